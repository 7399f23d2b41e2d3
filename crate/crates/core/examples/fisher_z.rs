//! Pearson and partial correlations with the Fisher Z test.

use fcikit::stats::{correlation_matrix, fisher_z_from_r, partial_correlation};
use fcikit::{CiTester, Dataset, FisherTester};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn main() {
    let z = fisher_z_from_r(0.5, 103, 0, 0.05).unwrap();
    println!("r = 0.5, n = 103: z = {:.4}, p = {:.2e}, independent = {}", z.statistic, z.p_value, z.independent);

    // x -> y -> w: x and w are dependent, but not given y.
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 5000;
    let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };
    let x: Vec<f64> = (0..n).map(|_| draw()).collect();
    let y: Vec<f64> = x.iter().map(|v| 0.8 * v + draw()).collect();
    let w: Vec<f64> = y.iter().map(|v| 0.8 * v + draw()).collect();
    let data = Dataset::from_columns(vec![("x".into(), x), ("y".into(), y), ("w".into(), w)]).unwrap();

    let corr = correlation_matrix(&data).unwrap();
    println!("r(x,w)   = {:.4}", corr.get(0, 2));
    println!("r(x,w|y) = {:.4}", partial_correlation(&corr, 0, 2, &[1]).unwrap());

    let tester = FisherTester::new(&data, 0.05).unwrap();
    for s in [vec![], vec![1]] {
        let r = tester.is_independent(0, 2, &s).unwrap();
        println!("x _||_ w | {s:?}: p = {:.3e}, independent = {}", r.p_value, r.independent);
    }
}
