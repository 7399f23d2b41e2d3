use super::{BackgroundKnowledge, FciError, RunLog, SepsetMap};
use crate::graph::{Mark, Pag};

/// Orients every unshielded triple `x *-* z *-* y` whose middle node is not in
/// `sepset(x, y)` as `x *-> z <-* y`.
///
/// All colliders are found on the input graph before any mark changes, so the
/// result does not depend on scan order. Arrowheads on exogenous nodes are
/// suppressed and logged.
pub fn orient_colliders(
    pag: &mut Pag,
    sepsets: &SepsetMap,
    bk: &BackgroundKnowledge,
    log: &mut RunLog,
) -> Result<(), FciError> {
    let p = pag.n_nodes();
    let mut colliders = Vec::new();
    for z in 0..p {
        let nb = pag.neighbors(z);
        for (i, &x) in nb.iter().enumerate() {
            for &y in &nb[i + 1..] {
                if pag.is_adjacent(x, y) {
                    continue;
                }
                let sep = sepsets
                    .get(x, y)
                    .ok_or_else(|| FciError::MissingSepset(pag.nodes()[x].clone(), pag.nodes()[y].clone()))?;
                if !sep.contains(&z) {
                    colliders.push((x, z, y));
                }
            }
        }
    }
    for (x, z, y) in colliders {
        if bk.forbids_arrowhead_at(z) {
            log.suppress(pag, "collider", z, x, Mark::Arrow);
            log.suppress(pag, "collider", z, y, Mark::Arrow);
            continue;
        }
        pag.set_mark(z, x, Mark::Arrow)?;
        pag.set_mark(z, y, Mark::Arrow)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn skeleton(names: &[&str], edges: &[(usize, usize)]) -> Pag {
        let names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        let mut g = Pag::empty(&names).unwrap();
        for &(a, b) in edges {
            g.set_edge(a, b, Mark::Circle, Mark::Circle);
        }
        g
    }

    #[test]
    fn collider_gets_arrowheads() {
        // X - Z - Y with sepset(X, Y) = {}
        let mut g = skeleton(&["X", "Y", "Z"], &[(0, 2), (1, 2)]);
        let mut s = SepsetMap::default();
        s.insert(0, 1, vec![]);
        orient_colliders(&mut g, &s, &BackgroundKnowledge::none(), &mut RunLog::default()).unwrap();
        let rendered: Vec<String> = g.edge_records().iter().map(|r| r.render()).collect();
        assert_eq!(rendered, vec!["X ○→ Z", "Y ○→ Z"]);
    }

    #[test]
    fn separator_in_sepset_is_not_a_collider() {
        let mut g = skeleton(&["X", "Y", "Z"], &[(0, 1), (1, 2)]);
        let mut s = SepsetMap::default();
        s.insert(0, 2, vec![1]);
        let before = g.clone();
        orient_colliders(&mut g, &s, &BackgroundKnowledge::none(), &mut RunLog::default()).unwrap();
        assert_eq!(g, before);
    }

    #[test]
    fn exogenous_middle_suppressed_and_logged() {
        let mut g = skeleton(&["X", "Y", "Z"], &[(0, 2), (1, 2)]);
        let mut s = SepsetMap::default();
        s.insert(0, 1, vec![]);
        let bk = BackgroundKnowledge::new(3, &[2], &[]).unwrap();
        let mut log = RunLog::default();
        orient_colliders(&mut g, &s, &bk, &mut log).unwrap();
        assert_eq!(g.mark(2, 0), Some(Mark::Circle));
        assert_eq!(g.mark(2, 1), Some(Mark::Circle));
        assert_eq!(log.suppressed.len(), 2);
        assert_eq!(log.suppressed[0].node, "Z");
    }

    #[test]
    fn missing_sepset_is_an_error() {
        let mut g = skeleton(&["X", "Y", "Z"], &[(0, 2), (1, 2)]);
        let err = orient_colliders(&mut g, &SepsetMap::default(), &BackgroundKnowledge::none(), &mut RunLog::default())
            .unwrap_err();
        assert_eq!(err, FciError::MissingSepset("X".into(), "Y".into()));
    }
}
