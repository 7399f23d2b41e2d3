use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::dataset::Dataset;
use crate::stats::mean_sd;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropReport {
    pub total: usize,
    pub dropped: usize,
}

impl DropReport {
    pub fn kept(&self) -> usize {
        self.total - self.dropped
    }
}

/// Removes every row with at least one missing cell.
pub fn drop_missing(data: &Dataset) -> Result<(Dataset, DropReport), PipelineError> {
    let keep: Vec<usize> = (0..data.n_rows()).filter(|&r| !data.row_has_missing(r)).collect();
    if keep.is_empty() {
        return Err(PipelineError::EmptyResult);
    }
    let report = DropReport { total: data.n_rows(), dropped: data.n_rows() - keep.len() };
    log::info!("dropped {} of {} rows with missing values", report.dropped, report.total);
    Ok((data.select_rows(&keep), report))
}

/// Centers and scales the named columns to mean 0, sd 1 (n - 1 denominator).
pub fn standardize(data: &Dataset, continuous: &[&str]) -> Result<Dataset, PipelineError> {
    let mut out = data.clone();
    for name in continuous {
        let j = data
            .column_index(name)
            .ok_or_else(|| crate::dataset::DatasetError::UnknownColumn(name.to_string()))?;
        let mask = data.column_mask(j).to_vec();
        let present: Vec<f64> = data.column(j).iter().zip(&mask).filter(|(_, m)| !**m).map(|(v, _)| *v).collect();
        let (mean, sd) = mean_sd(&present);
        if present.len() < 2 || !(sd > 0.0) {
            return Err(PipelineError::ConstantColumn(name.to_string()));
        }
        for (v, m) in out.column_mut(j).iter_mut().zip(&mask) {
            if !m {
                *v = (*v - mean) / sd;
            }
        }
    }
    Ok(out)
}
