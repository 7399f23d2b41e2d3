use std::collections::{BTreeSet, VecDeque};

use super::{check_names, GraphError};

/// Directed acyclic graph with a designated set of latent nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    nodes: Vec<String>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    latent: BTreeSet<usize>,
    topo: Vec<usize>,
}

impl Dag {
    /// Builds a DAG from `(parent, child)` pairs. Duplicate edges are merged.
    pub fn new(nodes: Vec<String>, edges: &[(usize, usize)], latent: &[usize]) -> Result<Dag, GraphError> {
        check_names(&nodes)?;
        let p = nodes.len();
        let mut parents = vec![Vec::new(); p];
        let mut children = vec![Vec::new(); p];
        for &(a, b) in edges {
            if a >= p {
                return Err(GraphError::IndexOutOfRange(a));
            }
            if b >= p {
                return Err(GraphError::IndexOutOfRange(b));
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            parents[b].push(a);
            children[a].push(b);
        }
        for v in parents.iter_mut().chain(children.iter_mut()) {
            v.sort_unstable();
            v.dedup();
        }
        if let Some(&bad) = latent.iter().find(|&&l| l >= p) {
            return Err(GraphError::IndexOutOfRange(bad));
        }

        // Kahn's algorithm, smallest index first for a deterministic order.
        let mut indeg: Vec<usize> = parents.iter().map(Vec::len).collect();
        let mut ready: BTreeSet<usize> = (0..p).filter(|&v| indeg[v] == 0).collect();
        let mut topo = Vec::with_capacity(p);
        while let Some(v) = ready.pop_first() {
            topo.push(v);
            for &c in &children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        if topo.len() != p {
            return Err(GraphError::Cyclic);
        }
        Ok(Dag {
            nodes,
            parents,
            children,
            latent: latent.iter().copied().collect(),
            topo,
        })
    }

    /// Convenience constructor from node names.
    pub fn from_names(nodes: &[&str], edges: &[(&str, &str)], latent: &[&str]) -> Result<Dag, GraphError> {
        let names: Vec<String> = nodes.iter().map(|s| s.to_string()).collect();
        let idx = |n: &str| {
            names
                .iter()
                .position(|m| m == n)
                .ok_or_else(|| GraphError::UnknownNode(n.to_string()))
        };
        let e = edges
            .iter()
            .map(|(a, b)| Ok((idx(a)?, idx(b)?)))
            .collect::<Result<Vec<_>, GraphError>>()?;
        let l = latent.iter().map(|n| idx(n)).collect::<Result<Vec<_>, _>>()?;
        Dag::new(names, &e, &l)
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn latent(&self) -> &BTreeSet<usize> {
        &self.latent
    }

    pub fn is_latent(&self, v: usize) -> bool {
        self.latent.contains(&v)
    }

    /// Non-latent node indices in node order.
    pub fn observed(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|v| !self.latent.contains(v)).collect()
    }

    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    /// All `(parent, child)` pairs, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .children
            .iter()
            .enumerate()
            .flat_map(|(a, cs)| cs.iter().map(move |&b| (a, b)))
            .collect();
        out.sort_unstable();
        out
    }

    /// Descendants of `v`, excluding `v` itself.
    pub fn descendants(&self, v: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        let mut stack = self.children[v].clone();
        while let Some(c) = stack.pop() {
            if seen.insert(c) {
                stack.extend_from_slice(&self.children[c]);
            }
        }
        seen
    }

    /// `set` together with all of its ancestors, as a membership mask.
    pub(crate) fn ancestral_mask(&self, set: &[usize]) -> Vec<bool> {
        let mut mask = vec![false; self.nodes.len()];
        let mut stack = set.to_vec();
        while let Some(v) = stack.pop() {
            if !mask[v] {
                mask[v] = true;
                stack.extend_from_slice(&self.parents[v]);
            }
        }
        mask
    }
}

/// Whether `x` and `y` are d-separated by `cond` in `dag`.
///
/// Bayes-ball reachability: a ball leaves `x` upward; it passes a
/// non-conditioned node in either direction on chains and forks, and bounces
/// back up through a collider only when the collider is in `cond` or has a
/// descendant there, i.e. lies in the ancestral closure of `cond`.
pub fn d_separated(dag: &Dag, x: usize, y: usize, cond: &[usize]) -> Result<bool, GraphError> {
    let p = dag.n_nodes();
    for &v in [x, y].iter().chain(cond) {
        if v >= p {
            return Err(GraphError::IndexOutOfRange(v));
        }
    }
    if x == y {
        return Err(GraphError::InvalidQuery("x = y".into()));
    }
    if cond.contains(&x) || cond.contains(&y) {
        return Err(GraphError::InvalidQuery("conditioning set contains an endpoint".into()));
    }
    let mut in_cond = vec![false; p];
    for &c in cond {
        in_cond[c] = true;
    }
    let opens_collider = dag.ancestral_mask(cond);

    // visited[v][0]: reached from a child (moving up); [1]: from a parent (moving down)
    let mut visited = vec![[false; 2]; p];
    let mut queue = VecDeque::new();
    queue.push_back((x, 0usize));
    while let Some((v, dir)) = queue.pop_front() {
        if visited[v][dir] {
            continue;
        }
        visited[v][dir] = true;
        if v == y {
            return Ok(false);
        }
        if dir == 0 {
            if !in_cond[v] {
                queue.extend(dag.parents(v).iter().map(|&u| (u, 0)));
                queue.extend(dag.children(v).iter().map(|&c| (c, 1)));
            }
        } else {
            if !in_cond[v] {
                queue.extend(dag.children(v).iter().map(|&c| (c, 1)));
            }
            if opens_collider[v] {
                queue.extend(dag.parents(v).iter().map(|&u| (u, 0)));
            }
        }
    }
    Ok(true)
}
