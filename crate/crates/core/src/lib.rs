//! Causal structure learning with FCI.
//!
//! The crate covers the whole path from raw survey answers to bootstrap edge
//! tables:
//!
//! - [`pipeline`] encodes survey responses, drops incomplete rows,
//!   standardizes and splits respondents into the eight dummy groups.
//! - [`stats`] and [`citest`] provide Pearson/partial correlations, the
//!   Fisher Z test and an exact d-separation oracle behind one trait.
//! - [`fci`] runs the FCI algorithm with exogeneity constraints.
//! - [`bootstrap`] aggregates resampled FCI runs into edge probabilities.
//! - [`sim`] samples linear-Gaussian models with latent confounders.
//!
//! Runnable walkthroughs for each piece live in `examples/`.

pub mod bootstrap;
pub mod citest;
pub mod cli;
pub mod dataset;
pub mod fci;
pub mod graph;
pub mod pipeline;
pub mod sim;
pub mod stats;

pub use citest::{CiTester, FisherTester, OracleTester};
pub use dataset::Dataset;
pub use fci::{fci, BackgroundKnowledge, FciOptions, FciOutput, RuleSet};
pub use graph::{Dag, EdgeRecord, Mark, Pag};
