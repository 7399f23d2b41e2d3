use std::collections::BTreeSet;

use itertools::Itertools;

use super::{check_universe, orient_colliders, BackgroundKnowledge, FciError, FciOptions, Phase, RemovedEdge, RunLog, SepsetMap};
use crate::citest::CiTester;
use crate::graph::{possible_d_sep, Pag};

/// Removes edges separable by subsets of Possible-D-SEP, then re-derives the
/// colliders from circle marks with the enlarged sepset map.
///
/// Possible-D-SEP sets are computed once on the collider-oriented input.
/// Subsets lying entirely inside the current adjacency of an endpoint are
/// skipped: the adjacency search already tested every one of them.
pub fn pds_refine(
    pag: &mut Pag,
    sepsets: &mut SepsetMap,
    tester: &dyn CiTester,
    opts: &FciOptions,
    bk: &BackgroundKnowledge,
    log: &mut RunLog,
) -> Result<(), FciError> {
    check_universe(tester, pag.nodes())?;
    let p = pag.n_nodes();
    let pds: Vec<BTreeSet<usize>> = (0..p).map(|v| possible_d_sep(pag, v)).collect();
    let adj: Vec<BTreeSet<usize>> = (0..p).map(|v| pag.neighbors(v).into_iter().collect()).collect();

    for (x, y) in pag.edges() {
        let sides = [
            (pds[x].iter().copied().filter(|&v| v != y).collect::<Vec<_>>(), &adj[x]),
            (pds[y].iter().copied().filter(|&v| v != x).collect::<Vec<_>>(), &adj[y]),
        ];
        let largest = sides.iter().map(|(pool, _)| pool.len()).max().unwrap_or(0);
        let limit = opts.max_depth.map_or(largest, |m| m.min(largest));
        let mut tried = BTreeSet::new();
        let mut found = None;
        'sizes: for size in 1..=limit {
            for (pool, side_adj) in &sides {
                if pool.len() < size {
                    continue;
                }
                for s in pool.iter().copied().combinations(size) {
                    if s.iter().all(|v| side_adj.contains(v)) || !tried.insert(s.clone()) {
                        continue;
                    }
                    log.tests += 1;
                    let res = tester.is_independent(x, y, &s)?;
                    if res.independent {
                        found = Some((s, res.p_value));
                        break 'sizes;
                    }
                }
            }
        }
        if let Some((s, p_value)) = found {
            pag.remove_edge(x, y);
            log.removed.push(RemovedEdge {
                a: pag.nodes()[x].clone(),
                b: pag.nodes()[y].clone(),
                sepset: s.iter().map(|&v| pag.nodes()[v].clone()).collect(),
                phase: Phase::PossibleDSep,
                p_value,
            });
            sepsets.insert(x, y, s);
        }
    }

    pag.reset_marks();
    log.suppressed.retain(|e| e.rule != "collider");
    orient_colliders(pag, sepsets, bk, log)
}
