//! Sample a random SEM with a latent confounder and compare Fisher-Z FCI against the oracle.

use fcikit::sim::{random_sem, sample};
use fcikit::{fci, BackgroundKnowledge, FciOptions, FisherTester, OracleTester};

fn main() {
    let model = random_sem(6, 1, 2.0, 7).unwrap();
    for (a, b) in model.dag().edges() {
        let names = model.dag().nodes();
        println!("{} -> {} ({:+.2})", names[a], names[b], model.weight(a, b).unwrap());
    }

    let opts = FciOptions { alpha: 0.01, ..FciOptions::default() };
    let bk = BackgroundKnowledge::none();
    let oracle = OracleTester::new(model.dag().clone());
    let truth = fci(&oracle, oracle.names(), &opts, &bk).unwrap().pag;

    for n in [500, 5_000, 50_000] {
        let data = sample(&model, n, 8).unwrap();
        let tester = FisherTester::new(&data, opts.alpha).unwrap();
        let est = fci(&tester, data.names(), &opts, &bk).unwrap().pag;
        let edges: Vec<String> = est.edge_records().iter().map(|e| e.render()).collect();
        println!("n = {n:>6}: matches oracle = {:<5} {}", est == truth, edges.join(", "));
    }
}
