//! Conditional-independence testers: Fisher Z over data and an exact
//! d-separation oracle over a ground-truth DAG.

use std::io::Write;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use thiserror::Error;

use crate::dataset::Dataset;
use crate::graph::{d_separated, Dag, GraphError};
use crate::stats::{correlation_matrix, fisher_z_test, CiResult, CorrelationMatrix, StatsError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CiError {
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("query touches latent node `{0}`")]
    LatentQueried(String),
    #[error("variable index {index} out of range for {n_vars} variables")]
    IndexOutOfRange { index: usize, n_vars: usize },
    #[error("alpha = {0} outside (0, 1)")]
    InvalidAlpha(f64),
}

/// A conditional-independence test over a fixed set of variables `0..n_vars()`.
///
/// Implementations must be deterministic and symmetric in `i` and `j`.
pub trait CiTester: Send + Sync {
    fn n_vars(&self) -> usize;

    fn is_independent(&self, i: usize, j: usize, cond: &[usize]) -> Result<CiResult, CiError>;

    /// Number of `is_independent` calls answered so far.
    fn query_count(&self) -> u64;
}

fn format_set(cond: &[usize]) -> String {
    let items: Vec<String> = cond.iter().map(usize::to_string).collect();
    format!("{{{}}}", items.join(","))
}

type LogSink = Mutex<Box<dyn Write + Send>>;

/// Fisher Z tester backed by a correlation matrix computed once at construction.
pub struct FisherTester {
    corr: CorrelationMatrix,
    n: usize,
    alpha: f64,
    queries: AtomicU64,
    log: Option<LogSink>,
}

impl std::fmt::Debug for FisherTester {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FisherTester")
            .field("n", &self.n)
            .field("alpha", &self.alpha)
            .field("queries", &self.queries)
            .finish_non_exhaustive()
    }
}

impl FisherTester {
    pub fn new(data: &Dataset, alpha: f64) -> Result<Self, CiError> {
        let corr = correlation_matrix(data)?;
        Self::from_correlation(corr, data.n_rows(), alpha)
    }

    pub fn from_correlation(corr: CorrelationMatrix, n: usize, alpha: f64) -> Result<Self, CiError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(CiError::InvalidAlpha(alpha));
        }
        Ok(Self {
            corr,
            n,
            alpha,
            queries: AtomicU64::new(0),
            log: None,
        })
    }

    /// Writes one tab-separated line per query: `i  j  S  statistic  p  verdict`.
    pub fn with_log(mut self, sink: Box<dyn Write + Send>) -> Self {
        self.log = Some(Mutex::new(sink));
        self
    }

    pub fn sample_size(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn correlation(&self) -> &CorrelationMatrix {
        &self.corr
    }
}

impl CiTester for FisherTester {
    fn n_vars(&self) -> usize {
        self.corr.dim()
    }

    fn is_independent(&self, i: usize, j: usize, cond: &[usize]) -> Result<CiResult, CiError> {
        self.queries.fetch_add(1, Ordering::Relaxed);
        let res = fisher_z_test(&self.corr, self.n, i, j, cond, self.alpha)?;
        if let Some(log) = &self.log {
            let mut sorted = cond.to_vec();
            sorted.sort_unstable();
            let (a, b) = (i.min(j), i.max(j));
            let verdict = if res.independent { "independent" } else { "dependent" };
            let mut w = log.lock().unwrap_or_else(|e| e.into_inner());
            // the log is best-effort; a failing sink must not abort discovery
            let _ = writeln!(w, "{a}\t{b}\t{}\t{:.6}\t{:.6e}\t{verdict}", format_set(&sorted), res.statistic, res.p_value);
        }
        Ok(res)
    }

    fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }
}

/// Exact tester answering by d-separation in a known DAG.
///
/// Its variables are the DAG's observed nodes, in node order. Reported
/// p-values are 1.0 for separated pairs and 0.0 otherwise.
#[derive(Debug)]
pub struct OracleTester {
    dag: Dag,
    observed: Vec<usize>,
    names: Vec<String>,
    queries: AtomicU64,
}

impl OracleTester {
    pub fn new(truth: Dag) -> Self {
        let observed = truth.observed();
        let names = observed.iter().map(|&v| truth.nodes()[v].clone()).collect();
        Self {
            dag: truth,
            observed,
            names,
            queries: AtomicU64::new(0),
        }
    }

    /// Names of the observed variables, in tester index order.
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    /// d-separation query addressed by raw DAG node indices; fails on latent nodes.
    pub fn query_dag(&self, x: usize, y: usize, cond: &[usize]) -> Result<CiResult, CiError> {
        for &v in [x, y].iter().chain(cond) {
            if v < self.dag.n_nodes() && self.dag.is_latent(v) {
                return Err(CiError::LatentQueried(self.dag.nodes()[v].clone()));
            }
        }
        let sep = d_separated(&self.dag, x, y, cond)?;
        Ok(CiResult {
            statistic: if sep { 0.0 } else { f64::INFINITY },
            p_value: if sep { 1.0 } else { 0.0 },
            independent: sep,
            conditioning_size: cond.len(),
        })
    }

    fn to_dag_index(&self, v: usize) -> Result<usize, CiError> {
        self.observed.get(v).copied().ok_or(CiError::IndexOutOfRange {
            index: v,
            n_vars: self.observed.len(),
        })
    }
}

impl CiTester for OracleTester {
    fn n_vars(&self) -> usize {
        self.observed.len()
    }

    fn is_independent(&self, i: usize, j: usize, cond: &[usize]) -> Result<CiResult, CiError> {
        self.queries.fetch_add(1, Ordering::Relaxed);
        let x = self.to_dag_index(i)?;
        let y = self.to_dag_index(j)?;
        let s = cond.iter().map(|&c| self.to_dag_index(c)).collect::<Result<Vec<_>, _>>()?;
        self.query_dag(x, y, &s)
    }

    fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }
}
