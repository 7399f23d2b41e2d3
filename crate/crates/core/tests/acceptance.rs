//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::{brute_d_separated, names, random_dag, rendered, simple_paths, subsets};
use fcikit::bootstrap::{bootstrap_fci, filter_table, BootstrapTable};
use fcikit::citest::{CiTester, FisherTester, OracleTester};
use fcikit::fci::{fci, BackgroundKnowledge, FciOptions};
use fcikit::graph::{d_separated, Dag, EdgeRecord, Mark, Pag};
use fcikit::pipeline::{
    default_rules, drop_missing, encode_survey, partition_groups, synthetic_answer_key, synthetic_survey, RawSurvey,
};
use fcikit::sim::{random_sem, sample};
use fcikit::stats::{fisher_z_from_r, partial_correlation, CorrelationMatrix};
use fcikit::Dataset;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure(took < limit, format!("took {took:.2?}, limit {limit:?}"))?;
    Ok(took)
}

fn oracle_fci(dag: &Dag, bk: &BackgroundKnowledge) -> Pag {
    let t = OracleTester::new(dag.clone());
    fci(&t, t.names(), &FciOptions::default(), bk).unwrap().pag
}

fn fisher_fci(data: &Dataset, alpha: f64, bk: &BackgroundKnowledge) -> Pag {
    let t = FisherTester::new(data, alpha).unwrap();
    fci(&t, data.names(), &FciOptions { alpha, ..FciOptions::default() }, bk).unwrap().pag
}

fn set(xs: &[&str]) -> BTreeSet<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn canonical_fixture() -> Dag {
    Dag::from_names(&["X1", "X2", "X3", "X4"], &[("X1", "X3"), ("X2", "X3"), ("X3", "X4")], &[]).unwrap()
}

fn collider_fixture() -> Dag {
    Dag::from_names(&["X", "Y", "Z"], &[("X", "Z"), ("Y", "Z")], &[]).unwrap()
}

fn chain_fixture() -> Dag {
    Dag::from_names(&["X", "Y", "Z"], &[("X", "Y"), ("Y", "Z")], &[]).unwrap()
}

const CONSISTENCY_DEGREE: f64 = 2.0;

fn consistency_model(seed: u64) -> (fcikit::sim::SemModel, Dataset) {
    let m = random_sem(6, 1, CONSISTENCY_DEGREE, seed).unwrap();
    let d = sample(&m, 50_000, 10_000 + seed).unwrap();
    (m, d)
}

fn c1() -> Outcome {
    let start = Instant::now();
    let got = rendered(&oracle_fci(&canonical_fixture(), &BackgroundKnowledge::none()));
    let took = within(start, Duration::from_secs(1))?;
    let want = set(&["X1 ○→ X3", "X2 ○→ X3", "X3 → X4"]);
    ensure(got == want, format!("got {got:?}"))?;
    Ok(format!("{got:?} in {took:.2?}"))
}

fn c2() -> Outcome {
    let col = rendered(&oracle_fci(&collider_fixture(), &BackgroundKnowledge::none()));
    ensure(col == set(&["X ○→ Z", "Y ○→ Z"]), format!("collider gave {col:?}"))?;
    let chain = rendered(&oracle_fci(&chain_fixture(), &BackgroundKnowledge::none()));
    ensure(chain == set(&["X ○–○ Y", "Y ○–○ Z"]), format!("chain gave {chain:?}"))?;
    Ok(format!("collider {col:?}, chain {chain:?}"))
}

/// Smallest population |partial correlation| of any adjacent pair, minimized over conditioning sets.
fn weakest_adjacency(m: &fcikit::sim::SemModel, pag: &Pag) -> f64 {
    let p = m.observed_names().len();
    let c = CorrelationMatrix::from_covariance(p, &m.observed_covariance()).unwrap();
    let mut weakest = f64::INFINITY;
    for (i, j) in pag.edges() {
        let rest: Vec<usize> = (0..p).filter(|&v| v != i && v != j).collect();
        for s in subsets(&rest) {
            weakest = weakest.min(partial_correlation(&c, i, j, &s).unwrap().abs());
        }
    }
    weakest
}

fn c3() -> Outcome {
    let start = Instant::now();
    let mut matched = Vec::new();
    let mut missed = Vec::new();
    for seed in 0..20 {
        let (m, d) = consistency_model(seed);
        let oracle = oracle_fci(m.dag(), &BackgroundKnowledge::none());
        let fisher = fisher_fci(&d, 0.01, &BackgroundKnowledge::none());
        if oracle == fisher {
            matched.push(seed);
        } else {
            missed.push((seed, weakest_adjacency(&m, &oracle)));
        }
    }
    let took = within(start, Duration::from_secs(120))?;
    let shown: Vec<String> = missed.iter().map(|(s, w)| format!("seed {s}: weakest true adjacency |pcor| {w:.4}")).collect();
    ensure(matched.len() >= 18, format!("{} of 20 matched in {took:.2?}; {}", matched.len(), shown.join("; ")))?;
    Ok(format!("{}/20 identical in {took:.2?}; {}", matched.len(), shown.join("; ")))
}

fn exogenous_violations(pag: &Pag, e: usize) -> usize {
    let mut bad = 0;
    for v in 0..pag.n_nodes() {
        if pag.mark(e, v) == Some(Mark::Arrow) || (pag.is_adjacent(e, v) && !pag.is_directed(e, v)) {
            bad += 1;
        }
    }
    bad
}

fn c4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut runs = 0;
    let mut violations = 0;
    for dag in [canonical_fixture(), collider_fixture(), chain_fixture()] {
        let p = dag.observed().len();
        let e = rng.random_range(0..p);
        let pag = oracle_fci(&dag, &BackgroundKnowledge::new(p, &[e], &[]).unwrap());
        violations += exogenous_violations(&pag, e);
        runs += 1;
    }
    for seed in 0..20 {
        let (m, d) = consistency_model(seed);
        let e = rng.random_range(0..6);
        let bk = BackgroundKnowledge::new(6, &[e], &[]).unwrap();
        violations += exogenous_violations(&oracle_fci(m.dag(), &bk), e);
        violations += exogenous_violations(&fisher_fci(&d, 0.01, &bk), e);
        runs += 2;
    }
    ensure(violations == 0, format!("{violations} violations over {runs} runs"))?;
    Ok(format!("0 violations over {runs} runs"))
}

fn seeded_dataset(seed: u64) -> Dataset {
    let m = random_sem(6, 1, 2.0, 500 + seed).unwrap();
    sample(&m, 2000, 600 + seed).unwrap()
}

fn c5() -> Outcome {
    let mut diffs = 0;
    for seed in 0..10 {
        let d = seeded_dataset(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cols = (0..d.n_cols())
            .map(|j| {
                let a = rng.random_range(0.01..100.0);
                let b = rng.random_range(-1000.0..1000.0);
                (d.names()[j].clone(), d.column(j).iter().map(|x| a * x + b).collect())
            })
            .collect();
        let t = Dataset::from_columns(cols).unwrap();
        let base = fisher_fci(&d, 0.05, &BackgroundKnowledge::none());
        let moved = fisher_fci(&t, 0.05, &BackgroundKnowledge::none());
        diffs += base.edge_records().iter().collect::<BTreeSet<_>>().symmetric_difference(&moved.edge_records().iter().collect()).count();
    }
    ensure(diffs == 0, format!("{diffs} differing edge records"))?;
    Ok("0 differences over 10 datasets".into())
}

fn c6() -> Outcome {
    let mut diffs = 0;
    for seed in 0..10 {
        let d = seeded_dataset(seed);
        let mut order: Vec<usize> = (0..d.n_cols()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(100 + seed));
        let shuffled = d.select_column_indices(&order);
        let base = fisher_fci(&d, 0.05, &BackgroundKnowledge::none());
        let perm = fisher_fci(&shuffled, 0.05, &BackgroundKnowledge::none());
        let mut back = vec![0; order.len()];
        for (k, &o) in order.iter().enumerate() {
            back[o] = k;
        }
        let restored = perm.permuted(&back);
        let a: BTreeSet<_> = base.edges().into_iter().collect();
        let b: BTreeSet<_> = restored.edges().into_iter().collect();
        diffs += a.symmetric_difference(&b).count();
    }
    ensure(diffs == 0, format!("{diffs} skeleton differences"))?;
    Ok("0 skeleton differences over 10 datasets".into())
}

fn table_bytes(t: &BootstrapTable) -> Vec<u8> {
    let mut buf = Vec::new();
    t.write_edge_table(&mut buf, ',').unwrap();
    buf
}

fn c7() -> Outcome {
    let start = Instant::now();
    let m = random_sem(10, 1, 2.0, 77).unwrap();
    let d = sample(&m, 2000, 78).unwrap();
    let opts = FciOptions::default();
    let bk = BackgroundKnowledge::none();
    let base = bootstrap_fci(&d, &opts, &bk, 100, 2024, Some(1)).unwrap();
    for e in base.entries() {
        let hundredths = e.probability * 100.0;
        ensure((hundredths - hundredths.round()).abs() < 1e-9, format!("{} has probability {}", e.edge, e.probability))?;
    }
    let names = d.names();
    for a in 0..names.len() {
        for b in (a + 1)..names.len() {
            let s = base.pair_probability(&names[a], &names[b]);
            ensure(s <= 1.0 + 1e-12, format!("pair {}-{} sums to {s}", names[a], names[b]))?;
        }
    }
    let bytes = table_bytes(&base);
    ensure(table_bytes(&bootstrap_fci(&d, &opts, &bk, 100, 2024, Some(1)).unwrap()) == bytes, "rerun differs")?;
    for t in [4, 8] {
        ensure(table_bytes(&bootstrap_fci(&d, &opts, &bk, 100, 2024, Some(t)).unwrap()) == bytes, format!("{t} threads differ"))?;
    }
    let took = within(start, Duration::from_secs(300))?;

    let kept = filter_table(&base, 0.2).unwrap();
    let at_most = base.entries().iter().filter(|e| e.count <= 20).count();
    ensure(kept.len() + at_most == base.len(), "filter kept an entry with probability <= 0.20")?;
    ensure(kept.entries().iter().all(|e| e.count > 20), "filter kept an entry with probability <= 0.20")?;
    let rec = |b: &str| EdgeRecord { a: "A".into(), mark_a: Mark::Circle, mark_b: Mark::Arrow, b: b.into() };
    let mut runs = vec![Vec::new(); 100];
    for (r, run) in runs.iter_mut().enumerate() {
        if r < 20 {
            run.push(rec("B"));
        }
        if r < 21 {
            run.push(rec("C"));
        }
    }
    let synthetic = filter_table(&BootstrapTable::from_runs(names_abc(), 0, &runs), 0.2).unwrap();
    ensure(synthetic.len() == 1 && synthetic.count(&rec("C")) == 21, "0.20 entry not dropped or 0.21 entry lost")?;
    Ok(format!(
        "{} entries, {} kept above 0.2; identical across reruns and 1/4/8 threads; {took:.2?}",
        base.len(),
        kept.len()
    ))
}

fn names_abc() -> Vec<String> {
    names(&["A", "B", "C"])
}

fn encode_value(pairs: &[(&str, &str)], var: &str) -> Option<f64> {
    let base = synthetic_survey(1, 0.0, 0);
    let mut row = base.rows[0].clone();
    for (q, v) in pairs {
        row[base.column(q).unwrap()] = v.to_string();
    }
    let raw = RawSurvey { questions: base.questions, rows: vec![row] };
    let d = encode_survey(&raw, &default_rules(), Some(&synthetic_answer_key(0))).unwrap();
    d.get(0, d.column_index(var).unwrap())
}

fn c8() -> Outcome {
    let checks: [(&[(&str, &str)], &str, Option<f64>); 5] = [
        (&[("Q43", "1")], "Age", Some(18.5)),
        (&[("Q44", "University")], "Education", Some(16.0)),
        (&[("Q51", "At least 15 million yen")], "Income", Some(1500.0)),
        (&[("Q17", "6")], "Confidence", None),
        (&[("Q7", "1"), ("Q8_1", "Yes"), ("Q9_1", "Yes"), ("Q10_1", "Yes")], "Planning", Some(4.0)),
    ];
    for (pairs, var, want) in checks {
        let got = encode_value(pairs, var);
        ensure(got == want, format!("{pairs:?} -> {var} = {got:?}, want {want:?}"))?;
    }
    let wide = synthetic_survey(2000, 0.0, 1);
    let enc = encode_survey(&wide, &default_rules(), Some(&synthetic_answer_key(1))).unwrap();
    let j = enc.column_index("Planning").unwrap();
    let seen: BTreeSet<i64> = (0..enc.n_rows()).filter_map(|r| enc.get(r, j)).map(|v| v as i64).collect();
    ensure(seen.iter().all(|v| (0..=4).contains(v)), format!("Planning values {seen:?}"))?;

    let raw = synthetic_survey(12, 0.0, 12);
    let enc = encode_survey(&raw, &default_rules(), Some(&synthetic_answer_key(12))).unwrap();
    let (kept, rep) = drop_missing(&enc).unwrap();
    let groups = partition_groups(&kept).unwrap();
    let sizes: Vec<usize> = groups.values().map(Dataset::n_rows).collect();
    ensure(groups.len() == 8, "not 8 groups")?;
    ensure(sizes.iter().sum::<usize>() == rep.kept(), format!("sizes {sizes:?} vs kept {}", rep.kept()))?;
    Ok(format!("goldens exact; Planning values {seen:?}; 12 rows -> kept {} -> group sizes {sizes:?}", rep.kept()))
}

fn random_correlation(rng: &mut ChaCha8Rng, p: usize) -> CorrelationMatrix {
    // C = A A^T + p I, rescaled to unit diagonal
    let a: Vec<f64> = (0..p * p).map(|_| rng.sample(StandardNormal)).collect();
    let mut c = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..p {
            c[i * p + j] = (0..p).map(|k| a[i * p + k] * a[j * p + k]).sum::<f64>() + if i == j { p as f64 } else { 0.0 };
        }
    }
    CorrelationMatrix::from_covariance(p, &c).unwrap()
}

/// `r_ij|S = (r_ij|S' - r_ik|S' r_jk|S') / sqrt((1 - r_ik|S'^2)(1 - r_jk|S'^2))` with `S = S' ∪ {k}`.
fn recursive_pcor(c: &CorrelationMatrix, i: usize, j: usize, s: &[usize]) -> f64 {
    match s.split_last() {
        None => c.get(i, j),
        Some((&k, rest)) => {
            let rij = recursive_pcor(c, i, j, rest);
            let rik = recursive_pcor(c, i, k, rest);
            let rjk = recursive_pcor(c, j, k, rest);
            (rij - rik * rjk) / ((1.0 - rik * rik) * (1.0 - rjk * rjk)).sqrt()
        }
    }
}

fn c9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0_f64;
    let mut queries = 0;
    for _ in 0..1000 {
        let c = random_correlation(&mut rng, 6);
        let mut vars: Vec<usize> = (0..6).collect();
        vars.shuffle(&mut rng);
        let size = rng.random_range(0..=4);
        let (i, j, s) = (vars[0], vars[1], &vars[2..2 + size]);
        let fast = partial_correlation(&c, i, j, s).map_err(|e| e.to_string())?;
        worst = worst.max((fast - recursive_pcor(&c, i, j, s)).abs());
        queries += 1;
    }
    ensure(worst < 1e-8, format!("max disagreement {worst:e}"))?;
    let stat = fisher_z_from_r(0.5, 103, 0, 0.05).unwrap().statistic;
    // sqrt(100) * atanh(0.5) = 10 * ln(3) / 2
    let independent = 10.0 * 3.0_f64.ln() / 2.0;
    ensure((stat - independent).abs() < 1e-3 && (stat - 5.4931).abs() < 1e-3, format!("statistic {stat}"))?;
    Ok(format!("max |precision - recursive| = {worst:.2e} over {queries} matrices; Fisher statistic {stat:.6}"))
}

fn c10() -> Outcome {
    let start = Instant::now();
    let mut queries = 0usize;
    let mut disagreements = 0usize;
    for seed in 0..20 {
        let dag = random_dag(8, 0.3, &[], 10_000 + seed);
        for x in 0..8 {
            for y in (x + 1)..8 {
                let paths = simple_paths(&dag, x, y);
                let rest: Vec<usize> = (0..8).filter(|&v| v != x && v != y).collect();
                for s in subsets(&rest) {
                    queries += 1;
                    if d_separated(&dag, x, y, &s).unwrap() != brute_d_separated(&dag, &paths, &s) {
                        disagreements += 1;
                    }
                }
            }
        }
    }
    let took = within(start, Duration::from_secs(30))?;
    ensure(disagreements == 0, format!("{disagreements} disagreements in {queries} queries"))?;
    Ok(format!("0 disagreements over {queries} triples in {took:.2?}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("oracle canonical fixture", c1),
        ("collider/chain discrimination", c2),
        ("large-sample consistency", c3),
        ("background-knowledge invariant", c4),
        ("scale invariance", c5),
        ("order invariance", c6),
        ("bootstrap contract", c7),
        ("encoding goldens", c8),
        ("numerical cross-checks", c9),
        ("d-separation oracle equivalence", c10),
    ];
    let _ = OracleTester::new(canonical_fixture()).query_count();
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} {name}: PASS - {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL - {why}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
