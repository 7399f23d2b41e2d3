use std::collections::BTreeSet;

use itertools::Itertools;

use super::{check_universe, BackgroundKnowledge, FciError, FciOptions, Phase, RemovedEdge, RunLog, SepsetMap};
use crate::citest::CiTester;
use crate::graph::{complete_pag, Pag};

/// PC-style adjacency search starting from the complete circle graph.
///
/// At depth `d` every still-adjacent pair `(x, y)` is tested against the
/// `d`-subsets of `adj(x) \ {y}` and then `adj(y) \ {x}`, in lexicographic
/// order; the first separating set is kept. With `stable_skeleton` the
/// adjacency sets are frozen at the start of each depth.
pub fn skeleton_search(
    tester: &dyn CiTester,
    names: &[String],
    opts: &FciOptions,
    _bk: &BackgroundKnowledge,
    log: &mut RunLog,
) -> Result<(Pag, SepsetMap), FciError> {
    check_universe(tester, names)?;
    opts.validate()?;
    let mut pag = complete_pag(names)?;
    let mut sepsets = SepsetMap::default();
    let p = names.len();

    let mut depth = 0usize;
    loop {
        if opts.max_depth.is_some_and(|m| depth > m) {
            break;
        }
        let frozen: Vec<Vec<usize>> = (0..p).map(|v| pag.neighbors(v)).collect();
        let mut tested_any = false;
        for (x, y) in pag.edges() {
            if !pag.is_adjacent(x, y) {
                continue;
            }
            let pool = |v: usize, other: usize| -> Vec<usize> {
                let adj = if opts.stable_skeleton { frozen[v].clone() } else { pag.neighbors(v) };
                adj.into_iter().filter(|&u| u != other).collect()
            };
            let pools = [pool(x, y), pool(y, x)];
            let mut tried = BTreeSet::new();
            let mut found = None;
            'search: for side in &pools {
                if side.len() < depth {
                    continue;
                }
                tested_any = true;
                for s in side.iter().copied().combinations(depth) {
                    if !tried.insert(s.clone()) {
                        continue;
                    }
                    log.tests += 1;
                    let res = tester.is_independent(x, y, &s)?;
                    if res.independent {
                        found = Some((s, res.p_value));
                        break 'search;
                    }
                }
            }
            if let Some((s, p_value)) = found {
                pag.remove_edge(x, y);
                log.removed.push(RemovedEdge {
                    a: names[x].clone(),
                    b: names[y].clone(),
                    sepset: s.iter().map(|&v| names[v].clone()).collect(),
                    phase: Phase::Skeleton,
                    p_value,
                });
                sepsets.insert(x, y, s);
            }
        }
        if !tested_any {
            break;
        }
        depth += 1;
    }
    Ok((pag, sepsets))
}
