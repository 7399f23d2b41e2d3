use std::collections::BTreeMap;

use fcikit::pipeline::{
    default_rules, drop_missing, encode_survey, group_summary, partition_groups, standardize, synthetic_answer_key,
    synthetic_survey, GroupKey, CONTINUOUS,
};
use fcikit::Dataset;
use proptest::prelude::*;

#[test]
fn drop_missing_matches_brute_recount_on_30k_rows() {
    let raw = synthetic_survey(30_000, 0.01, 11);
    let key = synthetic_answer_key(11);
    let enc = encode_survey(&raw, &default_rules(), Some(&key)).unwrap();
    let mut complete = 0;
    for r in 0..enc.n_rows() {
        if (0..enc.n_cols()).all(|c| enc.get(r, c).is_some()) {
            complete += 1;
        }
    }
    let (kept, rep) = drop_missing(&enc).unwrap();
    assert_eq!(rep.total, 30_000);
    assert_eq!(kept.n_rows(), complete);
    assert_eq!(rep.kept(), complete);
    assert!(rep.dropped > 0);
}

#[test]
fn full_chain_yields_clean_standardized_groups() {
    let raw = synthetic_survey(4000, 0.005, 3);
    let enc = encode_survey(&raw, &default_rules(), Some(&synthetic_answer_key(3))).unwrap();
    let (kept, _) = drop_missing(&enc).unwrap();
    let std = standardize(&kept, &CONTINUOUS).unwrap();
    for c in CONTINUOUS {
        let j = std.column_index(c).unwrap();
        let xs = std.column(j);
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let sd = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!(m.abs() < 1e-10 && (sd - 1.0).abs() < 1e-10, "{c}");
    }
    let groups = partition_groups(&std).unwrap();
    assert_eq!(groups.values().map(Dataset::n_rows).sum::<usize>(), kept.n_rows());
    for d in groups.values() {
        assert!(!d.has_missing());
        assert_eq!(d.names(), &CONTINUOUS.map(String::from));
    }
}

#[test]
fn summary_agrees_with_sort_oracle() {
    let raw = synthetic_survey(900, 0.0, 7);
    let enc = encode_survey(&raw, &default_rules(), Some(&synthetic_answer_key(7))).unwrap();
    let groups = partition_groups(&enc).unwrap();
    let table = group_summary("Fin_Literacy", &groups).unwrap();
    for row in &table {
        let d = &groups[&GroupKey::from_number(row.group).unwrap()];
        let mut xs = d.column(d.column_index("Fin_Literacy").unwrap()).to_vec();
        if xs.is_empty() {
            continue;
        }
        xs.sort_by(f64::total_cmp);
        // quantile by explicit order statistics: x[k] + frac * (x[k+1] - x[k])
        let q = |p: f64| {
            let h = p * (xs.len() - 1) as f64;
            let k = h as usize;
            if k + 1 < xs.len() {
                xs[k] + (h - k as f64) * (xs[k + 1] - xs[k])
            } else {
                xs[k]
            }
        };
        assert_eq!(row.min, Some(xs[0]));
        assert_eq!(row.max, xs.last().copied());
        assert!((row.q1.unwrap() - q(0.25)).abs() < 1e-12);
        assert!((row.median.unwrap() - q(0.5)).abs() < 1e-12);
        assert!((row.q3.unwrap() - q(0.75)).abs() < 1e-12);
    }
    let twice = group_summary("Fin_Literacy", &groups).unwrap();
    assert_eq!(table, twice);
}

#[test]
fn known_group_sizes_are_recovered() {
    let mut male = Vec::new();
    let mut edu = Vec::new();
    let mut home = Vec::new();
    let mut want = BTreeMap::new();
    for (k, key) in GroupKey::all().enumerate() {
        let count = k + 1;
        for _ in 0..count {
            male.push(f64::from(u8::from(key.male)));
            edu.push(f64::from(u8::from(key.fin_edu)));
            home.push(f64::from(u8::from(key.fin_edu_home)));
        }
        want.insert(key, count);
    }
    let y: Vec<f64> = (0..male.len()).map(|i| i as f64).collect();
    let d = Dataset::from_columns(vec![
        ("Male".into(), male),
        ("Fin_Edu".into(), edu),
        ("Fin_Edu_Home".into(), home),
        ("y".into(), y),
    ])
    .unwrap();
    let groups = partition_groups(&d).unwrap();
    for (k, g) in &groups {
        assert_eq!(g.n_rows(), want[k]);
    }
}

proptest! {
    #[test]
    fn partition_is_a_disjoint_cover(seed in any::<u64>(), n in 1usize..300) {
        let raw = synthetic_survey(n, 0.0, seed);
        let enc = encode_survey(&raw, &default_rules(), Some(&synthetic_answer_key(seed))).unwrap();
        let groups = partition_groups(&enc).unwrap();
        prop_assert_eq!(groups.len(), 8);
        prop_assert_eq!(groups.values().map(Dataset::n_rows).sum::<usize>(), n);
    }

    #[test]
    fn encoded_values_stay_in_documented_ranges(seed in any::<u64>()) {
        let raw = synthetic_survey(50, 0.1, seed);
        let enc = encode_survey(&raw, &default_rules(), Some(&synthetic_answer_key(seed))).unwrap();
        let range = |name: &str, lo: f64, hi: f64| {
            let j = enc.column_index(name).unwrap();
            (0..enc.n_rows()).filter_map(|r| enc.get(r, j)).all(|v| (lo..=hi).contains(&v))
        };
        prop_assert!(range("Planning", 0.0, 4.0));
        prop_assert!(range("Invest", 0.0, 3.0));
        prop_assert!(range("Fin_Literacy", 0.0, 25.0));
        prop_assert!(range("Age", 18.5, 77.0));
        prop_assert!(range("Confidence", 1.0, 5.0));
    }
}
