mod common;

use common::{random_dag, subsets};
use fcikit::citest::{CiTester, FisherTester, OracleTester};
use fcikit::graph::d_separated;
use fcikit::sim::{random_sem, sample};
use fcikit::stats::{correlation_matrix, CorrelationMatrix};

fn indep(t: &OracleTester, x: usize, y: usize, s: &[usize]) -> bool {
    t.is_independent(x, y, s).unwrap().independent
}

#[test]
fn oracle_satisfies_semi_graphoid_axioms() {
    for seed in 0..8 {
        let t = OracleTester::new(random_dag(6, 0.35, &[], 40 + seed));
        let vars: Vec<usize> = (0..6).collect();
        for x in 0..6 {
            for y in 0..6 {
                if x == y {
                    continue;
                }
                let rest: Vec<usize> = vars.iter().copied().filter(|&v| v != x && v != y).collect();
                for z in subsets(&rest) {
                    let i_xy = indep(&t, x, y, &z);
                    assert_eq!(i_xy, indep(&t, y, x, &z), "symmetry");
                    for &w in rest.iter().filter(|v| !z.contains(v)) {
                        let mut zw = z.clone();
                        zw.push(w);
                        zw.sort();
                        // X ⟂ {Y,W} | Z, checked as both singletons given Z and given the other
                        let joint = i_xy && indep(&t, x, w, &{
                            let mut s = z.clone();
                            s.push(y);
                            s.sort();
                            s
                        });
                        if joint {
                            // decomposition and weak union
                            assert!(indep(&t, x, w, &z), "decomposition seed {seed}");
                            assert!(indep(&t, x, y, &zw), "weak union seed {seed}");
                        }
                        // contraction: X⟂Y|Z and X⟂W|Z∪Y give X⟂Y|Z∪W
                        if joint {
                            assert!(indep(&t, x, y, &zw), "contraction seed {seed}");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn fisher_agrees_with_d_separation_at_large_n() {
    let mut agree = 0usize;
    let mut total = 0usize;
    for seed in 0..20 {
        let m = random_sem(6, 1, 2.0, seed).unwrap();
        let d = sample(&m, 100_000, 1000 + seed).unwrap();
        let f = FisherTester::new(&d, 0.01).unwrap();
        let obs = m.dag().observed();
        for x in 0..6 {
            for y in (x + 1)..6 {
                let rest: Vec<usize> = (0..6).filter(|&v| v != x && v != y).collect();
                for s in subsets(&rest).into_iter().filter(|s| s.len() <= 2) {
                    let raw: Vec<usize> = s.iter().map(|&v| obs[v]).collect();
                    let truth = d_separated(m.dag(), obs[x], obs[y], &raw).unwrap();
                    total += 1;
                    agree += usize::from(f.is_independent(x, y, &s).unwrap().independent == truth);
                }
            }
        }
    }
    let rate = agree as f64 / total as f64;
    assert!(rate >= 0.98, "agreement {agree}/{total} = {rate:.4}");
}

#[test]
fn sample_covariance_converges_to_analytic() {
    let n = 100_000;
    for seed in 0..5 {
        let m = random_sem(5, 1, 2.0, 60 + seed).unwrap();
        let d = sample(&m, n, seed).unwrap();
        let p = d.n_cols();
        let means: Vec<f64> = (0..p).map(|j| d.column(j).iter().sum::<f64>() / n as f64).collect();
        let want = m.observed_covariance();
        let (mut frob, mut scale) = (0.0, 0.0);
        for i in 0..p {
            for j in 0..p {
                let c: f64 = d.column(i).iter().zip(d.column(j)).map(|(a, b)| (a - means[i]) * (b - means[j])).sum::<f64>()
                    / (n - 1) as f64;
                frob += (c - want[i * p + j]).powi(2);
                scale += want[i * p + i] * want[j * p + j] + want[i * p + j].powi(2);
            }
        }
        // 5/sqrt(n) in units of the Gaussian sampling sd of the covariance entries
        let tol = 5.0 * scale.sqrt() / (n as f64).sqrt();
        assert!(frob.sqrt() < tol, "seed {seed}: {} vs {tol}", frob.sqrt());
    }
}

#[test]
fn population_correlation_tester_matches_oracle_exactly() {
    // Fisher Z on the exact correlation with a huge n decides like d-separation
    for seed in 0..10 {
        let m = random_sem(5, 1, 2.0, 80 + seed).unwrap();
        let corr = CorrelationMatrix::from_covariance(5, &m.observed_covariance()).unwrap();
        let f = FisherTester::from_correlation(corr, 1_000_000_000_000, 0.01).unwrap();
        let o = OracleTester::new(m.dag().clone());
        for x in 0..5 {
            for y in (x + 1)..5 {
                let rest: Vec<usize> = (0..5).filter(|&v| v != x && v != y).collect();
                for s in subsets(&rest) {
                    assert_eq!(
                        f.is_independent(x, y, &s).unwrap().independent,
                        o.is_independent(x, y, &s).unwrap().independent,
                        "seed {seed}: {x} {y} | {s:?}"
                    );
                }
            }
        }
    }
}

#[test]
fn correlation_of_sample_is_valid_matrix() {
    let m = random_sem(4, 0, 2.0, 1).unwrap();
    let d = sample(&m, 500, 2).unwrap();
    let c = correlation_matrix(&d).unwrap();
    for i in 0..4 {
        assert!((c.get(i, i) - 1.0).abs() < 1e-12);
        for j in 0..4 {
            assert_eq!(c.get(i, j), c.get(j, i));
        }
    }
}
