//! Encode a synthetic survey, drop incomplete rows, standardize and summarize by group.

use fcikit::pipeline::{
    default_rules, drop_missing, encode_survey, group_summary, partition_groups, standardize, synthetic_answer_key,
    synthetic_survey, CONTINUOUS,
};

fn main() {
    let raw = synthetic_survey(400, 0.02, 11);
    let key = synthetic_answer_key(11);
    let encoded = encode_survey(&raw, &default_rules(), Some(&key)).unwrap();
    let (complete, report) = drop_missing(&encoded).unwrap();
    println!("kept {} of {} respondents", report.kept(), report.total);

    let groups = partition_groups(&complete).unwrap();
    for s in group_summary("Fin_Literacy", &groups).unwrap() {
        match (s.median, s.mean) {
            (Some(m), Some(mu)) => println!("group {}: n = {:>3}, median = {m:>4.1}, mean = {mu:.2}", s.group, s.n),
            _ => println!("group {}: empty", s.group),
        }
    }

    let z = standardize(&complete, &CONTINUOUS).unwrap();
    let j = z.column_index("Income").unwrap();
    println!("standardized Income, first rows: {:?}", &z.column(j)[..5]);
}
