use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{PipelineError, DUMMIES};
use crate::dataset::{Dataset, DatasetError};

/// Dummy combination identifying one of the eight respondent groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupKey {
    pub male: bool,
    pub fin_edu: bool,
    pub fin_edu_home: bool,
}

impl GroupKey {
    /// Group number 1..=8: (1,1,1) is 1 and (0,0,0) is 8, with `Fin_Edu` as the fastest-varying bit.
    pub fn number(&self) -> usize {
        1 + 4 * usize::from(!self.male) + 2 * usize::from(!self.fin_edu_home) + usize::from(!self.fin_edu)
    }

    pub fn from_number(n: usize) -> Option<GroupKey> {
        if !(1..=8).contains(&n) {
            return None;
        }
        let k = n - 1;
        Some(GroupKey { male: k & 4 == 0, fin_edu_home: k & 2 == 0, fin_edu: k & 1 == 0 })
    }

    pub fn all() -> impl Iterator<Item = GroupKey> {
        (1..=8).filter_map(GroupKey::from_number)
    }
}

impl Ord for GroupKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.number().cmp(&other.number())
    }
}

impl PartialOrd for GroupKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "group_{} (Male={}, Fin_Edu={}, Fin_Edu_Home={})",
            self.number(),
            u8::from(self.male),
            u8::from(self.fin_edu),
            u8::from(self.fin_edu_home)
        )
    }
}

/// Splits rows by the three dummies; every key is present, possibly empty.
pub fn partition_groups(data: &Dataset) -> Result<BTreeMap<GroupKey, Dataset>, PipelineError> {
    let idx: Vec<usize> = DUMMIES
        .iter()
        .map(|d| data.column_index(d).ok_or_else(|| DatasetError::UnknownColumn(d.to_string())))
        .collect::<Result<_, _>>()?;
    let mut rows: BTreeMap<GroupKey, Vec<usize>> = GroupKey::all().map(|k| (k, Vec::new())).collect();
    for r in 0..data.n_rows() {
        let mut bits = [false; 3];
        for (b, (&j, name)) in bits.iter_mut().zip(idx.iter().zip(DUMMIES)) {
            *b = match data.get(r, j) {
                Some(v) if v == 1.0 => true,
                Some(v) if v == 0.0 => false,
                v => return Err(PipelineError::NonBinaryDummy { column: name.to_string(), value: v.unwrap_or(f64::NAN) }),
            };
        }
        let key = GroupKey { male: bits[0], fin_edu: bits[1], fin_edu_home: bits[2] };
        rows.get_mut(&key).expect("all keys present").push(r);
    }
    Ok(rows.into_iter().map(|(k, r)| (k, data.select_rows(&r).without_columns(&DUMMIES))).collect())
}

/// Linear-interpolation quantile of sorted data: position `q * (n - 1)`.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub group: usize,
    pub n: usize,
    pub min: Option<f64>,
    pub q1: Option<f64>,
    pub median: Option<f64>,
    pub q3: Option<f64>,
    pub max: Option<f64>,
    pub mean: Option<f64>,
}

/// Five-number summary plus mean of `column` in each group, ignoring missing cells.
pub fn group_summary(
    column: &str,
    groups: &BTreeMap<GroupKey, Dataset>,
) -> Result<Vec<GroupSummary>, PipelineError> {
    let mut out = Vec::new();
    for (key, data) in groups {
        let j = data.column_index(column).ok_or_else(|| DatasetError::UnknownColumn(column.to_string()))?;
        let mut xs: Vec<f64> = (0..data.n_rows()).filter_map(|r| data.get(r, j)).collect();
        xs.sort_by(f64::total_cmp);
        let stat = |f: &dyn Fn(&[f64]) -> f64| (!xs.is_empty()).then(|| f(&xs));
        out.push(GroupSummary {
            group: key.number(),
            n: xs.len(),
            min: stat(&|s| s[0]),
            q1: stat(&|s| quantile(s, 0.25)),
            median: stat(&|s| quantile(s, 0.5)),
            q3: stat(&|s| quantile(s, 0.75)),
            max: stat(&|s| s[s.len() - 1]),
            mean: stat(&|s| s.iter().sum::<f64>() / s.len() as f64),
        });
    }
    Ok(out)
}
