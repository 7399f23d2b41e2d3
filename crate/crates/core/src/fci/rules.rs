use std::collections::{BTreeSet, VecDeque};

use super::{BackgroundKnowledge, FciError, FciOptions, RuleSet, RunLog, SepsetMap};
use crate::graph::{Mark, Pag};

/// Applies background knowledge to an oriented graph.
///
/// Every edge `e *-* v` with `e` exogenous and `v` not becomes `e -> v`.
/// Edges between two exogenous nodes are left untouched with a warning.
/// Required edges become directed when their endpoints are adjacent.
pub fn finalize_background(pag: &mut Pag, bk: &BackgroundKnowledge, log: &mut RunLog) {
    for &e in bk.exogenous() {
        for v in pag.neighbors(e) {
            if bk.forbids_arrowhead_at(v) {
                let (a, b) = (e.min(v), e.max(v));
                log.warn(format!(
                    "edge {} - {} joins two exogenous variables and is left unoriented",
                    pag.nodes()[a],
                    pag.nodes()[b]
                ));
                continue;
            }
            pag.set_edge(e, v, Mark::Tail, Mark::Arrow);
        }
    }
    for &(from, to) in bk.required_directed() {
        if pag.is_adjacent(from, to) {
            pag.set_edge(from, to, Mark::Tail, Mark::Arrow);
        } else {
            log.warn(format!(
                "required edge {} -> {} is absent from the skeleton",
                pag.nodes()[from],
                pag.nodes()[to]
            ));
        }
    }
}

/// Mark writer that only ever replaces circles and never places an
/// arrowhead on an exogenous node.
struct Orienter<'a> {
    pag: &'a mut Pag,
    bk: &'a BackgroundKnowledge,
    log: &'a mut RunLog,
}

impl Orienter<'_> {
    fn allowed(&mut self, rule: &str, at: usize, other: usize, mark: Mark) -> bool {
        match self.pag.mark(at, other) {
            Some(m) if m == mark => true,
            Some(Mark::Circle) => {
                if mark == Mark::Arrow && self.bk.forbids_arrowhead_at(at) {
                    self.log.suppress(self.pag, rule, at, other, mark);
                    false
                } else {
                    true
                }
            }
            _ => {
                self.log.suppress(self.pag, rule, at, other, mark);
                false
            }
        }
    }

    /// Sets the mark at `at`; returns whether the graph changed.
    fn set(&mut self, rule: &str, at: usize, other: usize, mark: Mark) -> bool {
        if self.pag.mark(at, other) == Some(mark) || !self.allowed(rule, at, other, mark) {
            return false;
        }
        self.pag.set_mark(at, other, mark).expect("adjacency checked");
        true
    }

    /// Sets several marks only if all of them are admissible.
    fn set_all(&mut self, rule: &str, marks: &[(usize, usize, Mark)]) -> bool {
        if !marks.iter().all(|&(at, other, m)| self.allowed(rule, at, other, m)) {
            return false;
        }
        let mut changed = false;
        for &(at, other, m) in marks {
            if self.pag.mark(at, other) != Some(m) {
                self.pag.set_mark(at, other, m).expect("adjacency checked");
                changed = true;
            }
        }
        changed
    }
}

fn arrow_at(g: &Pag, at: usize, other: usize) -> bool {
    g.mark(at, other) == Some(Mark::Arrow)
}

fn circle_at(g: &Pag, at: usize, other: usize) -> bool {
    g.mark(at, other) == Some(Mark::Circle)
}

/// R1: `a *-> b o-* c`, `a`, `c` non-adjacent  =>  `b -> c`.
fn rule1(o: &mut Orienter<'_>) -> bool {
    let mut changed = false;
    let p = o.pag.n_nodes();
    for b in 0..p {
        for a in o.pag.neighbors(b) {
            if !arrow_at(o.pag, b, a) {
                continue;
            }
            for c in o.pag.neighbors(b) {
                if c == a || o.pag.is_adjacent(a, c) || !circle_at(o.pag, b, c) || o.pag.mark(c, b) == Some(Mark::Tail) {
                    continue;
                }
                changed |= o.set_all("R1", &[(b, c, Mark::Tail), (c, b, Mark::Arrow)]);
            }
        }
    }
    changed
}

/// R2: `a -> b *-> c` or `a *-> b -> c`, with `a *-o c`  =>  `a *-> c`.
fn rule2(o: &mut Orienter<'_>) -> bool {
    let mut changed = false;
    let p = o.pag.n_nodes();
    for a in 0..p {
        for c in o.pag.neighbors(a) {
            if !circle_at(o.pag, c, a) {
                continue;
            }
            let hit = o.pag.neighbors(a).into_iter().any(|b| {
                b != c
                    && o.pag.is_adjacent(b, c)
                    && ((o.pag.is_directed(a, b) && arrow_at(o.pag, c, b))
                        || (arrow_at(o.pag, b, a) && o.pag.is_directed(b, c)))
            });
            if hit {
                changed |= o.set("R2", c, a, Mark::Arrow);
            }
        }
    }
    changed
}

/// R3: `a *-> b <-* c`, `a *-o d o-* c`, `a`, `c` non-adjacent, `d *-o b`  =>  `d *-> b`.
fn rule3(o: &mut Orienter<'_>) -> bool {
    let mut changed = false;
    let p = o.pag.n_nodes();
    for b in 0..p {
        let nb = o.pag.neighbors(b);
        for d in nb.clone() {
            if !circle_at(o.pag, b, d) {
                continue;
            }
            let hit = nb.iter().enumerate().any(|(i, &a)| {
                nb[i + 1..].iter().any(|&c| {
                    a != d
                        && c != d
                        && !o.pag.is_adjacent(a, c)
                        && arrow_at(o.pag, b, a)
                        && arrow_at(o.pag, b, c)
                        && circle_at(o.pag, d, a)
                        && circle_at(o.pag, d, c)
                })
            });
            if hit {
                changed |= o.set("R3", b, d, Mark::Arrow);
            }
        }
    }
    changed
}

/// Searches for a discriminating path `<theta, ..., a, b, c>` for `b`, where
/// `a` is already known to be a collider on the path and a parent of `c`.
/// Returns the far endpoint `theta`.
fn discriminating_endpoint(g: &Pag, a: usize, b: usize, c: usize) -> Option<usize> {
    let p = g.n_nodes();
    let mut visited = vec![false; p];
    visited[a] = true;
    visited[b] = true;
    visited[c] = true;
    let mut queue = VecDeque::from([a]);
    while let Some(v) = queue.pop_front() {
        for d in g.neighbors(v) {
            // v must be a collider, so d *-> v
            if visited[d] || !arrow_at(g, v, d) {
                continue;
            }
            if !g.is_adjacent(d, c) {
                return Some(d);
            }
            if g.is_directed(d, c) && arrow_at(g, d, v) {
                visited[d] = true;
                queue.push_back(d);
            }
        }
    }
    None
}

/// R4: discriminating path `<theta, ..., a, b, c>` with `b o-* c`: `b -> c` if
/// `b` is in `sepset(theta, c)`, else `a <-> b <-> c`.
fn rule4(o: &mut Orienter<'_>, sepsets: &SepsetMap) -> Result<bool, FciError> {
    let mut changed = false;
    let p = o.pag.n_nodes();
    for c in 0..p {
        for b in o.pag.neighbors(c) {
            if !circle_at(o.pag, b, c) {
                continue;
            }
            for a in o.pag.neighbors(b) {
                if a == c || !o.pag.is_adjacent(a, c) || !o.pag.is_directed(a, c) || !arrow_at(o.pag, a, b) {
                    continue;
                }
                let Some(theta) = discriminating_endpoint(o.pag, a, b, c) else {
                    continue;
                };
                let sep = sepsets.get(theta, c).ok_or_else(|| {
                    FciError::MissingSepset(o.pag.nodes()[theta].clone(), o.pag.nodes()[c].clone())
                })?;
                if sep.contains(&b) {
                    if o.pag.mark(c, b) != Some(Mark::Tail) {
                        changed |= o.set_all("R4", &[(b, c, Mark::Tail), (c, b, Mark::Arrow)]);
                    }
                } else {
                    changed |= o.set_all("R4", &[(b, a, Mark::Arrow), (b, c, Mark::Arrow), (c, b, Mark::Arrow)]);
                }
                break;
            }
        }
    }
    Ok(changed)
}

/// Edge `u *-* v` can be traversed as part of a potentially directed path from `u`.
fn potentially_directed(g: &Pag, u: usize, v: usize) -> bool {
    matches!(g.mark(u, v), Some(m) if m != Mark::Arrow) && matches!(g.mark(v, u), Some(m) if m != Mark::Tail)
}

/// Whether `path` (length >= 2) extends to an uncovered potentially directed
/// path ending at `target`.
fn extends_to(g: &Pag, path: &mut Vec<usize>, target: usize) -> bool {
    let cur = *path.last().unwrap();
    let prev = path[path.len() - 2];
    for next in g.neighbors(cur) {
        if path.contains(&next) || g.is_adjacent(prev, next) || !potentially_directed(g, cur, next) {
            continue;
        }
        if next == target {
            return true;
        }
        path.push(next);
        let ok = extends_to(g, path, target);
        path.pop();
        if ok {
            return true;
        }
    }
    false
}

/// Neighbours `mu` of `a` such that an uncovered potentially directed path
/// from `a` to `target` starts with the edge `a - mu`.
fn first_steps(g: &Pag, a: usize, target: usize, avoid: usize) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for mu in g.neighbors(a) {
        if mu == avoid || !potentially_directed(g, a, mu) {
            continue;
        }
        if mu == target || extends_to(g, &mut vec![a, mu], target) {
            out.insert(mu);
        }
    }
    out
}

/// R8: `a -> b -> c` or `a -o b -> c`, with `a o-> c`  =>  `a -> c`.
fn rule8(o: &mut Orienter<'_>) -> bool {
    let mut changed = false;
    let p = o.pag.n_nodes();
    for a in 0..p {
        for c in o.pag.neighbors(a) {
            if !(circle_at(o.pag, a, c) && arrow_at(o.pag, c, a)) {
                continue;
            }
            let hit = o.pag.neighbors(a).into_iter().any(|b| {
                b != c
                    && o.pag.mark(a, b) == Some(Mark::Tail)
                    && matches!(o.pag.mark(b, a), Some(Mark::Arrow) | Some(Mark::Circle))
                    && o.pag.is_directed(b, c)
            });
            if hit {
                changed |= o.set("R8", a, c, Mark::Tail);
            }
        }
    }
    changed
}

/// R9: `a o-> c` and an uncovered potentially directed path `<a, b, ..., c>`
/// with `b`, `c` non-adjacent  =>  `a -> c`.
fn rule9(o: &mut Orienter<'_>) -> bool {
    let mut changed = false;
    let p = o.pag.n_nodes();
    for a in 0..p {
        for c in o.pag.neighbors(a) {
            if !(circle_at(o.pag, a, c) && arrow_at(o.pag, c, a)) {
                continue;
            }
            let hit = o.pag.neighbors(a).into_iter().any(|b| {
                b != c
                    && !o.pag.is_adjacent(b, c)
                    && potentially_directed(o.pag, a, b)
                    && extends_to(o.pag, &mut vec![a, b], c)
            });
            if hit {
                changed |= o.set("R9", a, c, Mark::Tail);
            }
        }
    }
    changed
}

/// R10: `a o-> c`, `b -> c <- t`, uncovered potentially directed paths from
/// `a` to `b` and from `a` to `t` whose first steps are distinct and
/// non-adjacent  =>  `a -> c`.
fn rule10(o: &mut Orienter<'_>) -> bool {
    let mut changed = false;
    let p = o.pag.n_nodes();
    for a in 0..p {
        for c in o.pag.neighbors(a) {
            if !(circle_at(o.pag, a, c) && arrow_at(o.pag, c, a)) {
                continue;
            }
            let parents: Vec<usize> = o
                .pag
                .neighbors(c)
                .into_iter()
                .filter(|&v| v != a && o.pag.is_directed(v, c))
                .collect();
            let mut hit = false;
            'pairs: for (i, &b) in parents.iter().enumerate() {
                for &t in &parents[i + 1..] {
                    let mus = first_steps(o.pag, a, b, c);
                    if mus.is_empty() {
                        continue;
                    }
                    let omegas = first_steps(o.pag, a, t, c);
                    for &mu in &mus {
                        for &om in &omegas {
                            if mu != om && !o.pag.is_adjacent(mu, om) {
                                hit = true;
                                break 'pairs;
                            }
                        }
                    }
                }
            }
            if hit {
                changed |= o.set("R10", a, c, Mark::Tail);
            }
        }
    }
    changed
}

/// Finalizes background knowledge, then applies the orientation rules until
/// no rule changes a mark.
///
/// Rules only ever turn circles into tails or arrows. A rule that asks for an
/// arrowhead on an exogenous node is refused and logged; background
/// knowledge always wins.
pub fn apply_orientation_rules(
    pag: &mut Pag,
    sepsets: &SepsetMap,
    bk: &BackgroundKnowledge,
    opts: &FciOptions,
    log: &mut RunLog,
) -> Result<(), FciError> {
    finalize_background(pag, bk, log);
    let mut o = Orienter { pag, bk, log };
    loop {
        let mut changed = false;
        loop {
            let mut round = rule1(&mut o);
            round |= rule2(&mut o);
            round |= rule3(&mut o);
            round |= rule4(&mut o, sepsets)?;
            if !round {
                break;
            }
            changed = true;
        }
        if opts.rule_set == RuleSet::Complete {
            changed |= rule8(&mut o);
            changed |= rule9(&mut o);
            changed |= rule10(&mut o);
        }
        if !changed {
            break;
        }
    }
    Ok(())
}
