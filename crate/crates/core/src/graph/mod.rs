//! Mixed-mark graphs (PAGs), DAGs and the separation machinery over them.

mod dag;
mod export;
mod pds;

pub use dag::{d_separated, Dag};
pub(crate) use export::arrow_style;
pub use export::{to_dot, PagJson};
pub use pds::possible_d_sep;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("node name `{0}` is used more than once")]
    DuplicateName(String),
    #[error("graph needs at least one node")]
    Empty,
    #[error("nodes {0} and {1} are not adjacent")]
    NotAdjacent(usize, usize),
    #[error("node index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("graph contains a directed cycle")]
    Cyclic,
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("invalid separation query: {0}")]
    InvalidQuery(String),
}

/// Endpoint mark of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mark {
    Tail,
    Arrow,
    Circle,
}

impl fmt::Display for Mark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mark::Tail => "tail",
            Mark::Arrow => "arrow",
            Mark::Circle => "circle",
        })
    }
}

/// Partial ancestral graph over named nodes.
///
/// `marks[at * p + other]` holds the mark at `at` on the edge `at *-* other`,
/// so both endpoint marks of an edge live in mirrored slots and are always
/// set or cleared together.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pag {
    nodes: Vec<String>,
    marks: Vec<Option<Mark>>,
}

fn check_names(nodes: &[String]) -> Result<(), GraphError> {
    if nodes.is_empty() {
        return Err(GraphError::Empty);
    }
    let mut seen = BTreeSet::new();
    for n in nodes {
        if !seen.insert(n.as_str()) {
            return Err(GraphError::DuplicateName(n.clone()));
        }
    }
    Ok(())
}

/// Complete graph with every pair joined by `o-o`.
pub fn complete_pag(nodes: &[String]) -> Result<Pag, GraphError> {
    let mut pag = Pag::empty(nodes)?;
    let p = nodes.len();
    for a in 0..p {
        for b in (a + 1)..p {
            pag.set_edge(a, b, Mark::Circle, Mark::Circle);
        }
    }
    Ok(pag)
}

/// Canonical record for the edge between `a` and `b`.
pub fn canonical_edge(pag: &Pag, a: usize, b: usize) -> Result<EdgeRecord, GraphError> {
    let p = pag.n_nodes();
    if a >= p {
        return Err(GraphError::IndexOutOfRange(a));
    }
    if b >= p {
        return Err(GraphError::IndexOutOfRange(b));
    }
    match (pag.mark(a, b), pag.mark(b, a)) {
        (Some(ma), Some(mb)) => Ok(EdgeRecord::canonical(pag.nodes(), a, ma, mb, b)),
        _ => Err(GraphError::NotAdjacent(a, b)),
    }
}

impl Pag {
    /// Graph over `nodes` with no edges.
    pub fn empty(nodes: &[String]) -> Result<Pag, GraphError> {
        check_names(nodes)?;
        let p = nodes.len();
        Ok(Pag {
            nodes: nodes.to_vec(),
            marks: vec![None; p * p],
        })
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    /// Mark at `at` on the edge between `at` and `other`, if they are adjacent.
    pub fn mark(&self, at: usize, other: usize) -> Option<Mark> {
        self.marks[at * self.nodes.len() + other]
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        self.mark(a, b).is_some()
    }

    /// Inserts or replaces the edge `a mark_a-mark_b b`.
    ///
    /// Panics on a self-loop or out-of-range index; these are programming errors.
    pub fn set_edge(&mut self, a: usize, b: usize, mark_a: Mark, mark_b: Mark) {
        assert_ne!(a, b, "self-loop");
        let p = self.nodes.len();
        self.marks[a * p + b] = Some(mark_a);
        self.marks[b * p + a] = Some(mark_b);
    }

    /// Changes the mark at `at` on an existing edge.
    pub fn set_mark(&mut self, at: usize, other: usize, mark: Mark) -> Result<(), GraphError> {
        let p = self.nodes.len();
        match self.marks[at * p + other] {
            Some(_) => {
                self.marks[at * p + other] = Some(mark);
                Ok(())
            }
            None => Err(GraphError::NotAdjacent(at, other)),
        }
    }

    pub fn remove_edge(&mut self, a: usize, b: usize) {
        let p = self.nodes.len();
        self.marks[a * p + b] = None;
        self.marks[b * p + a] = None;
    }

    /// Sorted neighbours of `a`.
    pub fn neighbors(&self, a: usize) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&b| self.is_adjacent(a, b)).collect()
    }

    /// Adjacent pairs `(a, b)` with `a < b`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let p = self.nodes.len();
        let mut out = Vec::new();
        for a in 0..p {
            for b in (a + 1)..p {
                if self.is_adjacent(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn n_edges(&self) -> usize {
        self.edges().len()
    }

    /// All edges as canonical records.
    pub fn edge_records(&self) -> Vec<EdgeRecord> {
        self.edges()
            .into_iter()
            .map(|(a, b)| {
                EdgeRecord::canonical(&self.nodes, a, self.mark(a, b).unwrap(), self.mark(b, a).unwrap(), b)
            })
            .collect()
    }

    /// Sets every endpoint mark to circle, keeping adjacencies.
    pub fn reset_marks(&mut self) {
        for m in self.marks.iter_mut().flatten() {
            *m = Mark::Circle;
        }
    }

    /// `a -> b`: tail at `a`, arrow at `b`.
    pub fn is_directed(&self, a: usize, b: usize) -> bool {
        self.mark(a, b) == Some(Mark::Tail) && self.mark(b, a) == Some(Mark::Arrow)
    }

    /// Builds a graph from canonical records over the given node order.
    pub fn from_records(nodes: &[String], records: &[EdgeRecord]) -> Result<Pag, GraphError> {
        let mut pag = Pag::empty(nodes)?;
        for r in records {
            let a = pag.node_index(&r.a).ok_or_else(|| GraphError::UnknownNode(r.a.clone()))?;
            let b = pag.node_index(&r.b).ok_or_else(|| GraphError::UnknownNode(r.b.clone()))?;
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            pag.set_edge(a, b, r.mark_a, r.mark_b);
        }
        Ok(pag)
    }

    /// Same graph with nodes reordered: node `k` of the result is node `order[k]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Pag {
        let p = self.nodes.len();
        let nodes: Vec<String> = order.iter().map(|&i| self.nodes[i].clone()).collect();
        let mut marks = vec![None; p * p];
        for (na, &oa) in order.iter().enumerate() {
            for (nb, &ob) in order.iter().enumerate() {
                marks[na * p + nb] = self.marks[oa * p + ob];
            }
        }
        Pag { nodes, marks }
    }
}

/// One edge in canonical form: `a` precedes `b` in node order and each mark
/// travels with its endpoint.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub a: String,
    pub mark_a: Mark,
    pub mark_b: Mark,
    pub b: String,
}

impl EdgeRecord {
    /// Record for `x mark_x-mark_y y`, swapped if `y` precedes `x` in `nodes`.
    pub fn canonical(nodes: &[String], x: usize, mark_x: Mark, mark_y: Mark, y: usize) -> EdgeRecord {
        if x <= y {
            EdgeRecord { a: nodes[x].clone(), mark_a: mark_x, mark_b: mark_y, b: nodes[y].clone() }
        } else {
            EdgeRecord { a: nodes[y].clone(), mark_a: mark_y, mark_b: mark_x, b: nodes[x].clone() }
        }
    }

    /// Re-canonicalizes against `nodes`; a no-op on records already in canonical form.
    pub fn recanonical(&self, nodes: &[String]) -> Result<EdgeRecord, GraphError> {
        let x = nodes.iter().position(|n| *n == self.a).ok_or_else(|| GraphError::UnknownNode(self.a.clone()))?;
        let y = nodes.iter().position(|n| *n == self.b).ok_or_else(|| GraphError::UnknownNode(self.b.clone()))?;
        Ok(EdgeRecord::canonical(nodes, x, self.mark_a, self.mark_b, y))
    }

    /// Human-readable form with the glyphs →, ○→, ○–○, ↔.
    ///
    /// Asymmetric edges are written with the arrowhead on the right, so
    /// `(A, arrow, tail, B)` renders as `B → A`.
    pub fn render(&self) -> String {
        use Mark::*;
        let (left, right, glyph) = match (self.mark_a, self.mark_b) {
            (Tail, Arrow) => (&self.a, &self.b, "→"),
            (Arrow, Tail) => (&self.b, &self.a, "→"),
            (Circle, Arrow) => (&self.a, &self.b, "○→"),
            (Arrow, Circle) => (&self.b, &self.a, "○→"),
            (Circle, Circle) => (&self.a, &self.b, "○–○"),
            (Arrow, Arrow) => (&self.a, &self.b, "↔"),
            (Tail, Circle) => (&self.a, &self.b, "–○"),
            (Circle, Tail) => (&self.b, &self.a, "–○"),
            (Tail, Tail) => (&self.a, &self.b, "—"),
        };
        format!("{left} {glyph} {right}")
    }
}

impl fmt::Display for EdgeRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}
