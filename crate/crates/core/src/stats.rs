//! Pearson correlation, partial correlation and the Fisher Z test.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Dataset;

/// Largest `|r|` fed to the z-transform.
pub const R_CLAMP: f64 = 1.0 - 1e-12;

/// Condition number above which a correlation submatrix is treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("at least 2 rows are required, got {0}")]
    TooFewRows(usize),
    #[error("column `{0}` has zero sample variance")]
    ConstantColumn(String),
    #[error("column `{0}` contains missing values")]
    MissingValues(String),
    #[error("correlation submatrix over {indices:?} is singular (condition number {condition:e})")]
    SingularSubmatrix { indices: Vec<usize>, condition: f64 },
    #[error("n - |S| - 3 = {dof} is below 1 (n = {n}, |S| = {cond_size})")]
    InsufficientSamples { n: usize, cond_size: usize, dof: i64 },
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("invalid correlation matrix: {0}")]
    InvalidMatrix(String),
}

/// Symmetric matrix of correlations with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    dim: usize,
    values: Vec<f64>,
}

impl CorrelationMatrix {
    /// Wraps a row-major `dim x dim` matrix after checking the invariants.
    pub fn from_values(dim: usize, values: Vec<f64>) -> Result<Self, StatsError> {
        if dim == 0 || values.len() != dim * dim {
            return Err(StatsError::InvalidMatrix(format!(
                "expected {dim}x{dim} entries, got {}",
                values.len()
            )));
        }
        for i in 0..dim {
            if (values[i * dim + i] - 1.0).abs() > 1e-12 {
                return Err(StatsError::InvalidMatrix(format!("diagonal entry {i} is not 1")));
            }
            for j in 0..dim {
                let v = values[i * dim + j];
                if v != values[j * dim + i] {
                    return Err(StatsError::InvalidMatrix(format!("entry ({i},{j}) is not symmetric")));
                }
                if !(v.abs() <= 1.0) {
                    return Err(StatsError::InvalidMatrix(format!("entry ({i},{j}) = {v} outside [-1,1]")));
                }
            }
        }
        Ok(Self { dim, values })
    }

    /// Normalizes a covariance matrix to a correlation matrix.
    pub fn from_covariance(dim: usize, cov: &[f64]) -> Result<Self, StatsError> {
        if cov.len() != dim * dim {
            return Err(StatsError::InvalidMatrix("covariance has wrong size".into()));
        }
        let sd: Vec<f64> = (0..dim).map(|i| cov[i * dim + i].sqrt()).collect();
        if let Some(i) = sd.iter().position(|s| !(*s > 0.0)) {
            return Err(StatsError::ConstantColumn(format!("#{i}")));
        }
        let mut values = vec![0.0; dim * dim];
        for i in 0..dim {
            values[i * dim + i] = 1.0;
            for j in (i + 1)..dim {
                let r = (cov[i * dim + j] / (sd[i] * sd[j])).clamp(-1.0, 1.0);
                values[i * dim + j] = r;
                values[j * dim + i] = r;
            }
        }
        Ok(Self { dim, values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.dim + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Outcome of one conditional-independence query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CiResult {
    pub statistic: f64,
    pub p_value: f64,
    pub independent: bool,
    pub conditioning_size: usize,
}

/// Sample mean and standard deviation (n - 1 denominator).
pub(crate) fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Pearson correlation matrix of every column pair.
pub fn correlation_matrix(data: &Dataset) -> Result<CorrelationMatrix, StatsError> {
    let n = data.n_rows();
    if n < 2 {
        return Err(StatsError::TooFewRows(n));
    }
    let p = data.n_cols();
    let mut z: Vec<Vec<f64>> = Vec::with_capacity(p);
    for j in 0..p {
        if data.column_mask(j).iter().any(|&m| m) {
            return Err(StatsError::MissingValues(data.names()[j].clone()));
        }
        let col = data.column(j);
        let (mean, sd) = mean_sd(col);
        // Relative to the column's magnitude, so affine rescaling cannot flip the verdict.
        let scale = col.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if !(sd > scale * 1e-14) || !sd.is_finite() {
            return Err(StatsError::ConstantColumn(data.names()[j].clone()));
        }
        z.push(col.iter().map(|x| (x - mean) / sd).collect());
    }
    let denom = (n - 1) as f64;
    let mut values = vec![0.0; p * p];
    for i in 0..p {
        values[i * p + i] = 1.0;
        for j in (i + 1)..p {
            let dot: f64 = z[i].iter().zip(&z[j]).map(|(a, b)| a * b).sum();
            let r = (dot / denom).clamp(-1.0, 1.0);
            values[i * p + j] = r;
            values[j * p + i] = r;
        }
    }
    Ok(CorrelationMatrix { dim: p, values })
}

fn validate_query(dim: usize, i: usize, j: usize, cond: &[usize]) -> Result<(), StatsError> {
    if i == j {
        return Err(StatsError::InvalidQuery(format!("i = j = {i}")));
    }
    if i >= dim || j >= dim || cond.iter().any(|&k| k >= dim) {
        return Err(StatsError::InvalidQuery(format!("index out of range for dimension {dim}")));
    }
    if cond.contains(&i) || cond.contains(&j) {
        return Err(StatsError::InvalidQuery("conditioning set contains i or j".into()));
    }
    Ok(())
}

/// Partial correlation of `i` and `j` given `cond`, read off the precision
/// matrix of the `{i, j} ∪ cond` submatrix: `-P_ij / sqrt(P_ii * P_jj)`.
///
/// The result does not depend on argument order: the submatrix is always
/// assembled as `(min, max, sorted cond)`.
pub fn partial_correlation(
    corr: &CorrelationMatrix,
    i: usize,
    j: usize,
    cond: &[usize],
) -> Result<f64, StatsError> {
    validate_query(corr.dim, i, j, cond)?;
    if cond.is_empty() {
        return Ok(corr.get(i, j));
    }
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    let mut idx = Vec::with_capacity(cond.len() + 2);
    idx.push(a);
    idx.push(b);
    let mut rest = cond.to_vec();
    rest.sort_unstable();
    rest.dedup();
    idx.extend(rest);

    let k = idx.len();
    let sub = DMatrix::from_fn(k, k, |r, c| corr.get(idx[r], idx[c]));
    let sv = sub.clone().singular_values();
    let (mut smax, mut smin) = (0.0_f64, f64::INFINITY);
    for &s in sv.iter() {
        smax = smax.max(s);
        smin = smin.min(s);
    }
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(StatsError::SingularSubmatrix { indices: idx, condition });
    }
    let prec = sub
        .try_inverse()
        .ok_or(StatsError::SingularSubmatrix { indices: idx, condition })?;
    let r = -prec[(0, 1)] / (prec[(0, 0)] * prec[(1, 1)]).sqrt();
    Ok(r.clamp(-1.0, 1.0))
}

/// Fisher Z test for an already computed (partial) correlation `r`.
pub fn fisher_z_from_r(r: f64, n: usize, cond_size: usize, alpha: f64) -> Result<CiResult, StatsError> {
    let dof = n as i64 - cond_size as i64 - 3;
    if dof < 1 {
        return Err(StatsError::InsufficientSamples { n, cond_size, dof });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::InvalidQuery(format!("alpha = {alpha} outside (0, 1)")));
    }
    let r = r.clamp(-R_CLAMP, R_CLAMP);
    let statistic = (dof as f64).sqrt() * r.atanh();
    let p_value = statrs::function::erf::erfc(statistic.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0);
    Ok(CiResult {
        statistic,
        p_value,
        independent: p_value > alpha,
        conditioning_size: cond_size,
    })
}

/// Tests `i ⟂ j | cond` with statistic `sqrt(n - |cond| - 3) * atanh(r)`
/// against a two-sided standard normal.
pub fn fisher_z_test(
    corr: &CorrelationMatrix,
    n: usize,
    i: usize,
    j: usize,
    cond: &[usize],
    alpha: f64,
) -> Result<CiResult, StatsError> {
    validate_query(corr.dim, i, j, cond)?;
    let dof = n as i64 - cond.len() as i64 - 3;
    if dof < 1 {
        return Err(StatsError::InsufficientSamples { n, cond_size: cond.len(), dof });
    }
    let r = partial_correlation(corr, i, j, cond)?;
    fisher_z_from_r(r, n, cond.len(), alpha)
}
