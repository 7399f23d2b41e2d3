use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{EdgeRecord, GraphError, Mark, Pag};

pub(crate) fn arrow_style(m: Mark) -> &'static str {
    match m {
        Mark::Arrow => "normal",
        Mark::Circle => "odot",
        Mark::Tail => "none",
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz rendering: nodes in canonical order, then one line per edge.
pub fn to_dot(pag: &Pag) -> String {
    let mut out = String::from("digraph pag {\n");
    for n in pag.nodes() {
        let _ = writeln!(out, "  {};", quote(n));
    }
    for r in pag.edge_records() {
        let _ = writeln!(
            out,
            "  {} -> {} [dir=both, arrowtail={}, arrowhead={}];",
            quote(&r.a),
            quote(&r.b),
            arrow_style(r.mark_a),
            arrow_style(r.mark_b)
        );
    }
    out.push_str("}\n");
    out
}

/// JSON shape of a PAG: node list plus canonical edge records.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PagJson {
    pub nodes: Vec<String>,
    pub edges: Vec<EdgeRecord>,
}

impl From<&Pag> for PagJson {
    fn from(pag: &Pag) -> Self {
        PagJson {
            nodes: pag.nodes().to_vec(),
            edges: pag.edge_records(),
        }
    }
}

impl PagJson {
    pub fn to_pag(&self) -> Result<Pag, GraphError> {
        Pag::from_records(&self.nodes, &self.edges)
    }
}
