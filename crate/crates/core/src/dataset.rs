//! Named numeric columns with an explicit missing-value mask.

use std::collections::BTreeSet;
use std::io::{Read, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("column `{0}` appears more than once")]
    DuplicateColumn(String),
    #[error("column `{name}` has {got} rows, expected {expected}")]
    RaggedColumn {
        name: String,
        got: usize,
        expected: usize,
    },
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("row {row}, column `{column}`: cannot parse `{value}` as a number")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// An `n x p` table of reals stored column-major.
///
/// Missing cells are tracked by `missing`; the numeric slot under a missing
/// cell holds `NaN` but is never read by the statistics code.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    n_rows: usize,
    values: Vec<f64>,
    missing: Vec<bool>,
}

impl Dataset {
    /// Builds a complete dataset (no missing cells) from named columns.
    pub fn from_columns(columns: Vec<(String, Vec<f64>)>) -> Result<Self, DatasetError> {
        let cols = columns
            .into_iter()
            .map(|(name, v)| (name, v.into_iter().map(Some).collect()))
            .collect();
        Self::from_optional_columns(cols)
    }

    /// Builds a dataset where `None` marks a missing cell.
    pub fn from_optional_columns(
        columns: Vec<(String, Vec<Option<f64>>)>,
    ) -> Result<Self, DatasetError> {
        let n_rows = columns.first().map_or(0, |(_, v)| v.len());
        let mut seen = BTreeSet::new();
        let mut names = Vec::with_capacity(columns.len());
        let mut values = Vec::with_capacity(n_rows * columns.len());
        let mut missing = Vec::with_capacity(n_rows * columns.len());
        for (name, col) in columns {
            if !seen.insert(name.clone()) {
                return Err(DatasetError::DuplicateColumn(name));
            }
            if col.len() != n_rows {
                return Err(DatasetError::RaggedColumn {
                    name,
                    got: col.len(),
                    expected: n_rows,
                });
            }
            for cell in col {
                values.push(cell.unwrap_or(f64::NAN));
                missing.push(cell.is_none());
            }
            names.push(name);
        }
        Ok(Self {
            names,
            n_rows,
            values,
            missing,
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Raw values of column `j`; entries under the missing mask are `NaN`.
    pub fn column(&self, j: usize) -> &[f64] {
        &self.values[j * self.n_rows..(j + 1) * self.n_rows]
    }

    pub fn column_mask(&self, j: usize) -> &[bool] {
        &self.missing[j * self.n_rows..(j + 1) * self.n_rows]
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        let k = col * self.n_rows + row;
        (!self.missing[k]).then(|| self.values[k])
    }

    pub fn is_missing(&self, row: usize, col: usize) -> bool {
        self.missing[col * self.n_rows + row]
    }

    pub fn has_missing(&self) -> bool {
        self.missing.iter().any(|&m| m)
    }

    pub fn row_has_missing(&self, row: usize) -> bool {
        (0..self.n_cols()).any(|j| self.is_missing(row, j))
    }

    /// New dataset containing the given rows, in the given order (repeats allowed).
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        let mut values = Vec::with_capacity(rows.len() * self.n_cols());
        let mut missing = Vec::with_capacity(rows.len() * self.n_cols());
        for j in 0..self.n_cols() {
            let base = j * self.n_rows;
            for &r in rows {
                values.push(self.values[base + r]);
                missing.push(self.missing[base + r]);
            }
        }
        Dataset {
            names: self.names.clone(),
            n_rows: rows.len(),
            values,
            missing,
        }
    }

    /// New dataset keeping the named columns in the given order.
    pub fn select_columns(&self, names: &[&str]) -> Result<Dataset, DatasetError> {
        let idx = names
            .iter()
            .map(|n| {
                self.column_index(n)
                    .ok_or_else(|| DatasetError::UnknownColumn(n.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.select_column_indices(&idx))
    }

    pub fn select_column_indices(&self, idx: &[usize]) -> Dataset {
        let mut values = Vec::with_capacity(idx.len() * self.n_rows);
        let mut missing = Vec::with_capacity(idx.len() * self.n_rows);
        for &j in idx {
            values.extend_from_slice(self.column(j));
            missing.extend_from_slice(self.column_mask(j));
        }
        Dataset {
            names: idx.iter().map(|&j| self.names[j].clone()).collect(),
            n_rows: self.n_rows,
            values,
            missing,
        }
    }

    /// Drops the named columns, keeping the rest in order.
    pub fn without_columns(&self, drop: &[&str]) -> Dataset {
        let keep: Vec<usize> = (0..self.n_cols())
            .filter(|&j| !drop.contains(&self.names[j].as_str()))
            .collect();
        self.select_column_indices(&keep)
    }

    /// Replaces the values of column `j`, keeping its mask.
    pub(crate) fn column_mut(&mut self, j: usize) -> &mut [f64] {
        let n = self.n_rows;
        &mut self.values[j * n..(j + 1) * n]
    }

    /// Reads a CSV with a header row. Empty cells, `NA` and `NaN` are missing.
    pub fn read_csv<R: Read>(reader: R) -> Result<Dataset, DatasetError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let names: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut cols: Vec<Vec<Option<f64>>> = vec![Vec::new(); names.len()];
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            for (j, cell) in rec.iter().enumerate() {
                let v = if cell.is_empty() || cell == "NA" || cell.eq_ignore_ascii_case("nan") {
                    None
                } else {
                    Some(cell.parse::<f64>().map_err(|_| DatasetError::Parse {
                        row,
                        column: names[j].clone(),
                        value: cell.to_string(),
                    })?)
                };
                cols[j].push(v);
            }
        }
        Self::from_optional_columns(names.into_iter().zip(cols).collect())
    }

    /// Writes a CSV with a header row; missing cells are written empty.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), DatasetError> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(&self.names)?;
        for r in 0..self.n_rows {
            let row: Vec<String> = (0..self.n_cols())
                .map(|j| self.get(r, j).map(|v| v.to_string()).unwrap_or_default())
                .collect();
            wtr.write_record(&row)?;
        }
        wtr.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}
