//! Nonparametric bootstrap of FCI: per-edge occurrence probabilities.

use std::cmp::Reverse;
use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::citest::{CiError, FisherTester};
use crate::dataset::Dataset;
use crate::fci::{fci, BackgroundKnowledge, FciError, FciOptions};
use crate::graph::EdgeRecord;

#[derive(Debug, Error)]
pub enum BootstrapError {
    #[error("bootstrap needs at least one replicate")]
    NoReplicates,
    #[error("bootstrap needs complete data; drop missing rows first")]
    MissingValues,
    #[error("dataset has no rows")]
    NoRows,
    #[error("replicate {index}: {source}")]
    Replicate {
        index: usize,
        #[source]
        source: ReplicateError,
    },
    #[error("cannot build thread pool: {0}")]
    ThreadPool(String),
    #[error("min_prob {0} outside [0, 1]")]
    InvalidCutoff(f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum ReplicateError {
    #[error(transparent)]
    Ci(#[from] CiError),
    #[error(transparent)]
    Fci(#[from] FciError),
}

/// One row of a bootstrap table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapEntry {
    pub edge: EdgeRecord,
    pub count: usize,
    pub probability: f64,
}

/// Edge-record counts over `replicates` FCI runs; probabilities are `count / replicates`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapTable {
    pub nodes: Vec<String>,
    pub replicates: usize,
    pub base_seed: u64,
    counts: BTreeMap<EdgeRecord, usize>,
}

impl BootstrapTable {
    /// Recounts the given per-replicate edge lists.
    pub fn from_runs(nodes: Vec<String>, base_seed: u64, runs: &[Vec<EdgeRecord>]) -> Self {
        let mut counts = BTreeMap::new();
        for run in runs {
            for e in run {
                *counts.entry(e.clone()).or_insert(0) += 1;
            }
        }
        Self { nodes, replicates: runs.len(), base_seed, counts }
    }

    pub fn count(&self, edge: &EdgeRecord) -> usize {
        self.counts.get(edge).copied().unwrap_or(0)
    }

    pub fn probability(&self, edge: &EdgeRecord) -> f64 {
        self.count(edge) as f64 / self.replicates as f64
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Total probability of any edge between `a` and `b`.
    pub fn pair_probability(&self, a: &str, b: &str) -> f64 {
        let k: usize = self
            .counts
            .iter()
            .filter(|(e, _)| (e.a == a && e.b == b) || (e.a == b && e.b == a))
            .map(|(_, c)| c)
            .sum();
        k as f64 / self.replicates as f64
    }

    /// Entries sorted by canonical pair, then descending probability.
    pub fn entries(&self) -> Vec<BootstrapEntry> {
        let pos = |n: &str| self.nodes.iter().position(|m| m == n).unwrap_or(usize::MAX);
        let mut out: Vec<BootstrapEntry> = self
            .counts
            .iter()
            .map(|(e, &count)| BootstrapEntry {
                edge: e.clone(),
                count,
                probability: count as f64 / self.replicates as f64,
            })
            .collect();
        out.sort_by_key(|e| (pos(&e.edge.a), pos(&e.edge.b), Reverse(e.count), e.edge.clone()));
        out
    }

    /// Writes `edge<sep>prob` rows with two-decimal probabilities.
    pub fn write_edge_table<W: Write>(&self, mut w: W, sep: char) -> std::io::Result<()> {
        writeln!(w, "edge{sep}prob")?;
        for e in self.entries() {
            writeln!(w, "{}{sep}{:.2}", e.edge.render(), e.probability)?;
        }
        Ok(())
    }
}

/// Keeps entries whose probability is strictly above `min_prob`.
pub fn filter_table(table: &BootstrapTable, min_prob: f64) -> Result<BootstrapTable, BootstrapError> {
    if !(0.0..=1.0).contains(&min_prob) {
        return Err(BootstrapError::InvalidCutoff(min_prob));
    }
    let mut out = table.clone();
    let b = table.replicates as f64;
    out.counts.retain(|_, &mut k| k > 0 && k as f64 / b > min_prob);
    Ok(out)
}

/// Row indices for replicate `r`: `n` uniform draws from `[0, n)` on the
/// ChaCha stream `r` of `base_seed`.
pub fn resample_indices(n: usize, base_seed: u64, r: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(r);
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Runs FCI with a Fisher Z tester on `replicates` resamples of `data`.
///
/// `threads = None` uses the global rayon pool. The result is independent of
/// the thread count; the first failing replicate (by index) is reported.
pub fn bootstrap_fci(
    data: &Dataset,
    opts: &FciOptions,
    bk: &BackgroundKnowledge,
    replicates: usize,
    seed: u64,
    threads: Option<usize>,
) -> Result<BootstrapTable, BootstrapError> {
    if replicates == 0 {
        return Err(BootstrapError::NoReplicates);
    }
    if data.has_missing() {
        return Err(BootstrapError::MissingValues);
    }
    if data.n_rows() == 0 {
        return Err(BootstrapError::NoRows);
    }
    let names = data.names().to_vec();
    let run = |r: usize| -> Result<Vec<EdgeRecord>, ReplicateError> {
        let sample = data.select_rows(&resample_indices(data.n_rows(), seed, r as u64));
        let tester = FisherTester::new(&sample, opts.alpha)?;
        let out = fci(&tester, &names, opts, bk)?;
        log::debug!("replicate {r}: {} edges, {} tests", out.pag.n_edges(), out.log.tests);
        Ok(out.pag.edge_records())
    };
    let results: Vec<Result<Vec<EdgeRecord>, ReplicateError>> = match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| BootstrapError::ThreadPool(e.to_string()))?
            .install(|| (0..replicates).into_par_iter().map(run).collect()),
        None => (0..replicates).into_par_iter().map(run).collect(),
    };
    let mut runs = Vec::with_capacity(replicates);
    for (index, res) in results.into_iter().enumerate() {
        runs.push(res.map_err(|source| BootstrapError::Replicate { index, source })?);
    }
    Ok(BootstrapTable::from_runs(names, seed, &runs))
}
