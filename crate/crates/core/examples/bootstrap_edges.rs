//! Bootstrap edge probabilities and the stability filter.

use fcikit::bootstrap::{bootstrap_fci, filter_table};
use fcikit::sim::{random_sem, sample};
use fcikit::{BackgroundKnowledge, FciOptions};

fn main() {
    let model = random_sem(8, 1, 1.5, 3).unwrap();
    let data = sample(&model, 1000, 4).unwrap();
    let table = bootstrap_fci(&data, &FciOptions::default(), &BackgroundKnowledge::none(), 100, 42, None).unwrap();
    println!("{} edge variants over {} replicates", table.len(), table.replicates);

    let kept = filter_table(&table, 0.2).unwrap();
    kept.write_edge_table(&mut std::io::stdout(), ',').unwrap();

    let names = data.names();
    println!("P(any edge {} - {}) = {:.2}", names[0], names[1], table.pair_probability(&names[0], &names[1]));
}
