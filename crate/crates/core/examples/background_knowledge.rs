//! Exogenous variables: no arrowhead may point into them.

use std::collections::BTreeMap;

use fcikit::sim::{sample, SemModel};
use fcikit::{fci, BackgroundKnowledge, Dag, FciOptions, FisherTester};

fn main() {
    // Age -> Income -> Invest, Age -> Invest
    let dag = Dag::from_names(&["Age", "Income", "Invest"], &[("Age", "Income"), ("Income", "Invest"), ("Age", "Invest")], &[]).unwrap();
    let model = SemModel::new(dag, BTreeMap::from([((0, 1), 0.6), ((1, 2), 0.5), ((0, 2), 0.4)]), vec![1.0; 3]).unwrap();
    let data = sample(&model, 3000, 5).unwrap();
    let tester = FisherTester::new(&data, 0.05).unwrap();
    let opts = FciOptions::default();

    for exo in [&[][..], &["Age"][..]] {
        let bk = BackgroundKnowledge::from_names(data.names(), exo).unwrap();
        let out = fci(&tester, data.names(), &opts, &bk).unwrap();
        let edges: Vec<String> = out.pag.edge_records().iter().map(|e| e.render()).collect();
        println!("exogenous {exo:?}: {}", edges.join(", "));
        let report = out.report(&opts, &bk);
        println!("  suppressed orientations: {}", report.suppressed.len());
    }
}
