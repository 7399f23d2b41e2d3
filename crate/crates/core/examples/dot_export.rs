//! Render a PAG as Graphviz DOT and JSON.

use fcikit::graph::{to_dot, PagJson};
use fcikit::{fci, BackgroundKnowledge, Dag, FciOptions, OracleTester};

fn main() {
    let dag = Dag::from_names(
        &["A", "B", "C", "D", "L"],
        &[("A", "B"), ("L", "B"), ("L", "C"), ("D", "C")],
        &["L"],
    )
    .unwrap();
    let tester = OracleTester::new(dag);
    let pag = fci(&tester, tester.names(), &FciOptions::default(), &BackgroundKnowledge::none()).unwrap().pag;
    println!("{}", to_dot(&pag));
    println!("{}", serde_json::to_string_pretty(&PagJson::from(&pag)).unwrap());
}
