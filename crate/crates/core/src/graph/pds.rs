use std::collections::{BTreeSet, VecDeque};

use super::{Mark, Pag};

/// Possible-D-SEP of `x`: nodes reachable from `x` along a path where every
/// interior node is either a collider on the path or forms a triangle with
/// its two path neighbours.
///
/// Search runs over directed edge states `(prev, cur)`, each visited once.
pub fn possible_d_sep(pag: &Pag, x: usize) -> BTreeSet<usize> {
    let p = pag.n_nodes();
    let mut result = BTreeSet::new();
    let mut seen = vec![false; p * p];
    let mut queue = VecDeque::new();
    for n in pag.neighbors(x) {
        seen[x * p + n] = true;
        result.insert(n);
        queue.push_back((x, n));
    }
    while let Some((prev, cur)) = queue.pop_front() {
        for next in pag.neighbors(cur) {
            if next == prev || next == x || seen[cur * p + next] {
                continue;
            }
            let collider = pag.mark(cur, prev) == Some(Mark::Arrow) && pag.mark(cur, next) == Some(Mark::Arrow);
            if collider || pag.is_adjacent(prev, next) {
                seen[cur * p + next] = true;
                result.insert(next);
                queue.push_back((cur, next));
            }
        }
    }
    result
}
