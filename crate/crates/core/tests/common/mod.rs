#![allow(dead_code)]

use std::collections::BTreeSet;

use fcikit::graph::{Dag, Mark, Pag};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn names(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

pub fn rendered(pag: &Pag) -> BTreeSet<String> {
    pag.edge_records().iter().map(|r| r.render()).collect()
}

/// Random DAG on `p` nodes `V0..`, each forward pair an edge with probability `density`.
pub fn random_dag(p: usize, density: f64, latent: &[usize], seed: u64) -> Dag {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..p).collect();
    order.shuffle(&mut rng);
    let mut edges = Vec::new();
    for i in 0..p {
        for j in (i + 1)..p {
            if rng.random_bool(density) {
                edges.push((order[i], order[j]));
            }
        }
    }
    let names: Vec<String> = (0..p).map(|i| format!("V{i}")).collect();
    Dag::new(names, &edges, latent).unwrap()
}

/// Every simple path between `x` and `y` in the skeleton of `dag`.
pub fn simple_paths(dag: &Dag, x: usize, y: usize) -> Vec<Vec<usize>> {
    fn walk(dag: &Dag, path: &mut Vec<usize>, on: &mut Vec<bool>, y: usize, out: &mut Vec<Vec<usize>>) {
        let v = *path.last().unwrap();
        if v == y {
            out.push(path.clone());
            return;
        }
        let nbrs: Vec<usize> = dag.parents(v).iter().chain(dag.children(v)).copied().collect();
        for n in nbrs {
            if !on[n] {
                on[n] = true;
                path.push(n);
                walk(dag, path, on, y, out);
                path.pop();
                on[n] = false;
            }
        }
    }
    let mut on = vec![false; dag.n_nodes()];
    on[x] = true;
    let mut out = Vec::new();
    walk(dag, &mut vec![x], &mut on, y, &mut out);
    out
}

fn has_edge(dag: &Dag, a: usize, b: usize) -> bool {
    dag.children(a).contains(&b)
}

/// Path-enumeration d-separation over precomputed `paths` between the endpoints.
pub fn brute_d_separated(dag: &Dag, paths: &[Vec<usize>], cond: &[usize]) -> bool {
    let opens = |v: usize| cond.contains(&v) || dag.descendants(v).iter().any(|d| cond.contains(d));
    !paths.iter().any(|path| {
        path.windows(3).all(|w| {
            let (a, v, b) = (w[0], w[1], w[2]);
            if has_edge(dag, a, v) && has_edge(dag, b, v) {
                opens(v)
            } else {
                !cond.contains(&v)
            }
        })
    })
}

/// All subsets of `pool` (as sorted vectors).
pub fn subsets(pool: &[usize]) -> Vec<Vec<usize>> {
    (0..1u32 << pool.len())
        .map(|m| pool.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, &v)| v).collect())
        .collect()
}

pub fn is_ancestor(dag: &Dag, a: usize, b: usize) -> bool {
    dag.descendants(a).contains(&b)
}

/// Checks the oracle PAG over the observed nodes against the truth:
/// adjacency iff no observed subset separates, arrowheads only at
/// non-ancestors, tails only at ancestors. Returns the first violation.
pub fn pag_soundness(dag: &Dag, pag: &Pag) -> Result<(), String> {
    let obs = dag.observed();
    let p = obs.len();
    for i in 0..p {
        for j in (i + 1)..p {
            let rest: Vec<usize> = obs.iter().copied().filter(|&v| v != obs[i] && v != obs[j]).collect();
            let separable = subsets(&rest)
                .iter()
                .any(|s| fcikit::graph::d_separated(dag, obs[i], obs[j], s).unwrap());
            if separable == pag.is_adjacent(i, j) {
                return Err(format!("adjacency {i}-{j}: separable={separable}"));
            }
            if !pag.is_adjacent(i, j) {
                continue;
            }
            for (a, b) in [(i, j), (j, i)] {
                match pag.mark(a, b) {
                    Some(Mark::Arrow) if is_ancestor(dag, obs[a], obs[b]) => {
                        return Err(format!("arrowhead at {} but it is an ancestor of {}", pag.nodes()[a], pag.nodes()[b]))
                    }
                    Some(Mark::Tail) if !is_ancestor(dag, obs[a], obs[b]) => {
                        return Err(format!("tail at {} but it is not an ancestor of {}", pag.nodes()[a], pag.nodes()[b]))
                    }
                    _ => {}
                }
            }
        }
    }
    Ok(())
}
