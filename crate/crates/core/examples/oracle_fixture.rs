//! FCI against an exact d-separation oracle on small textbook graphs.

use fcikit::{fci, BackgroundKnowledge, CiTester, Dag, FciOptions, OracleTester};

fn show(title: &str, dag: Dag) {
    let tester = OracleTester::new(dag);
    let out = fci(&tester, tester.names(), &FciOptions::default(), &BackgroundKnowledge::none()).unwrap();
    println!("{title}");
    for e in out.pag.edge_records() {
        println!("  {}", e.render());
    }
    println!("  ({} independence queries)", tester.query_count());
}

fn main() {
    show(
        "collider with descendant",
        Dag::from_names(&["X1", "X2", "X3", "X4"], &[("X1", "X3"), ("X2", "X3"), ("X3", "X4")], &[]).unwrap(),
    );
    show("chain", Dag::from_names(&["X", "Y", "Z"], &[("X", "Y"), ("Y", "Z")], &[]).unwrap());
    // L is never observed; FCI sees only the bidirected trace it leaves.
    show(
        "latent confounder",
        Dag::from_names(
            &["A", "B", "C", "D", "L"],
            &[("A", "B"), ("L", "B"), ("L", "C"), ("D", "C")],
            &["L"],
        )
        .unwrap(),
    );
}
