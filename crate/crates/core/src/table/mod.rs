//! Tabular data: a column store with a per-cell missing mask, plus CSV
//! ingestion, cleaning, imputation, splitting and synthetic generation.

mod clean;
mod csv_io;
mod split;
mod synth;

pub use clean::{drop_sparse_columns, impute, FillValue, ImputationStats};
pub use csv_io::{load_csv, read_csv, write_csv, SchemaHints, DEFAULT_TARGET};
pub use split::{
    split, split_indices, stratified_kfold, stratified_kfold_labels, Fold, SplitParts, SplitSpec,
};
pub use synth::{synth_generate, SynthSpec};

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Continuous,
    Categorical,
    Target,
    Identifier,
}

impl ColumnKind {
    pub fn is_feature(self) -> bool {
        matches!(self, ColumnKind::Continuous | ColumnKind::Categorical)
    }
}

/// One named column. Missing cells hold NaN in `values`, but callers go
/// through [`Column::get`], which never exposes a masked payload.
#[derive(Debug, Clone)]
pub struct Column {
    name: String,
    kind: ColumnKind,
    values: Vec<f64>,
    missing: Vec<bool>,
    /// Text levels for categorical or identifier columns read from non-numeric
    /// cells; `values` then holds level indices.
    levels: Option<Vec<String>>,
}

impl PartialEq for Column {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.kind == other.kind
            && self.levels == other.levels
            && self.missing == other.missing
            && (0..self.len()).all(|i| self.get(i) == other.get(i))
    }
}

impl Column {
    pub fn new(name: impl Into<String>, kind: ColumnKind, cells: Vec<Option<f64>>) -> Self {
        let missing: Vec<bool> = cells.iter().map(Option::is_none).collect();
        let values = cells.into_iter().map(|c| c.unwrap_or(f64::NAN)).collect();
        Self {
            name: name.into(),
            kind,
            values,
            missing,
            levels: None,
        }
    }

    /// A fully observed numeric column.
    pub fn dense(name: impl Into<String>, kind: ColumnKind, values: Vec<f64>) -> Self {
        Self::new(name, kind, values.into_iter().map(Some).collect())
    }

    /// A column of text levels (categorical or identifier).
    pub fn text(name: impl Into<String>, kind: ColumnKind, cells: Vec<Option<String>>) -> Self {
        let mut levels: Vec<String> = cells.iter().flatten().cloned().collect();
        levels.sort();
        levels.dedup();
        let values = cells
            .iter()
            .map(|c| match c {
                Some(s) => levels
                    .binary_search(s)
                    .map(|i| i as f64)
                    .unwrap_or(f64::NAN),
                None => f64::NAN,
            })
            .collect();
        Self {
            name: name.into(),
            kind,
            missing: cells.iter().map(Option::is_none).collect(),
            values,
            levels: Some(levels),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> ColumnKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn levels(&self) -> Option<&[String]> {
        self.levels.as_deref()
    }

    pub fn is_text(&self) -> bool {
        self.levels.is_some()
    }

    #[inline]
    pub fn is_missing(&self, row: usize) -> bool {
        self.missing[row]
    }

    #[inline]
    pub fn get(&self, row: usize) -> Option<f64> {
        (!self.missing[row]).then(|| self.values[row])
    }

    /// Text rendering of a cell; `None` when masked.
    pub fn display(&self, row: usize) -> Option<String> {
        let v = self.get(row)?;
        Some(match &self.levels {
            Some(levels) => levels[v as usize].clone(),
            None => format!("{v}"),
        })
    }

    pub fn missing_count(&self) -> usize {
        self.missing.iter().filter(|&&m| m).count()
    }

    pub fn missing_fraction(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.missing_count() as f64 / self.values.len() as f64
    }

    /// All cells as numbers; errors if any cell is masked.
    pub fn dense_values(&self) -> Result<Vec<f64>> {
        if let Some(row) = self.missing.iter().position(|&m| m) {
            return Err(Error::invalid(format!(
                "column `{}` has a missing cell at row {row}; impute first",
                self.name
            )));
        }
        Ok(self.values.clone())
    }

    pub(crate) fn select(&self, rows: &[usize]) -> Column {
        Column {
            name: self.name.clone(),
            kind: self.kind,
            values: rows.iter().map(|&r| self.values[r]).collect(),
            missing: rows.iter().map(|&r| self.missing[r]).collect(),
            levels: self.levels.clone(),
        }
    }

    pub(crate) fn set(&mut self, row: usize, value: f64) {
        self.values[row] = value;
        self.missing[row] = false;
    }
}

/// Rows × named columns. Exactly one column is the binary target.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    columns: Vec<Column>,
    n_rows: usize,
}

impl DataTable {
    pub fn new(columns: Vec<Column>) -> Result<Self> {
        let n_rows = columns.first().map_or(0, Column::len);
        let mut seen = HashSet::new();
        for c in &columns {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::DuplicateColumn(c.name.clone()));
            }
            if c.len() != n_rows {
                return Err(Error::invalid(format!(
                    "column `{}` has {} rows, expected {n_rows}",
                    c.name,
                    c.len()
                )));
            }
        }
        let targets: Vec<&Column> = columns
            .iter()
            .filter(|c| c.kind == ColumnKind::Target)
            .collect();
        match targets.len() {
            0 => return Err(Error::MissingTarget("<none declared>".into())),
            1 => {}
            _ => return Err(Error::invalid("more than one target column")),
        }
        let target = targets[0];
        for row in 0..n_rows {
            if let Some(v) = target.get(row) {
                if target.is_text() || (v != 0.0 && v != 1.0) {
                    return Err(Error::NonBinaryTarget {
                        column: target.name.clone(),
                        row,
                        value: target.display(row).unwrap_or_default(),
                    });
                }
            }
        }
        Ok(Self { columns, n_rows })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn column_names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn target(&self) -> &Column {
        self.columns
            .iter()
            .find(|c| c.kind == ColumnKind::Target)
            .expect("table invariant: one target column")
    }

    pub fn identifiers(&self) -> impl Iterator<Item = &Column> {
        self.columns
            .iter()
            .filter(|c| c.kind == ColumnKind::Identifier)
    }

    pub fn features(&self) -> impl Iterator<Item = &Column> {
        self.columns.iter().filter(|c| c.kind.is_feature())
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.features().map(|c| c.name.clone()).collect()
    }

    /// Target as 0/1 labels. Errors if any label is missing.
    pub fn labels(&self) -> Result<Vec<u8>> {
        let t = self.target();
        (0..self.n_rows)
            .map(|r| {
                t.get(r)
                    .map(|v| v as u8)
                    .ok_or_else(|| Error::invalid(format!("row {r} has no target value")))
            })
            .collect()
    }

    pub fn positive_count(&self) -> usize {
        let t = self.target();
        (0..self.n_rows).filter(|&r| t.get(r) == Some(1.0)).count()
    }

    /// Dense feature matrix over the named columns, in the given order.
    pub fn matrix(&self, names: &[String]) -> Result<Matrix> {
        let cols = names
            .iter()
            .map(|n| {
                let c = self
                    .column(n)
                    .ok_or_else(|| Error::MissingColumn(n.clone()))?;
                if c.is_text() && c.kind.is_feature() {
                    return Err(Error::invalid(format!(
                        "column `{n}` holds text levels; encode it numerically before modeling"
                    )));
                }
                c.dense_values()
            })
            .collect::<Result<Vec<_>>>()?;
        if cols.is_empty() {
            return Matrix::from_vec(self.n_rows, 0, Vec::new());
        }
        Matrix::from_columns(&cols)
    }

    /// Dense matrix of every feature column in table order.
    pub fn feature_matrix(&self) -> Result<Matrix> {
        self.matrix(&self.feature_names())
    }

    pub fn select_rows(&self, rows: &[usize]) -> DataTable {
        DataTable {
            columns: self.columns.iter().map(|c| c.select(rows)).collect(),
            n_rows: rows.len(),
        }
    }

    /// Keeps the named columns (in table order) plus target and identifiers.
    pub fn retain_features(&self, keep: &[String]) -> DataTable {
        let columns = self
            .columns
            .iter()
            .filter(|c| !c.kind.is_feature() || keep.iter().any(|k| k == &c.name))
            .cloned()
            .collect();
        DataTable {
            columns,
            n_rows: self.n_rows,
        }
    }

    /// Replaces the target column's cells. Used by leakage audits and tests.
    pub fn with_labels(&self, labels: &[u8]) -> Result<DataTable> {
        if labels.len() != self.n_rows {
            return Err(Error::invalid("label vector length differs from row count"));
        }
        let columns = self
            .columns
            .iter()
            .map(|c| {
                if c.kind == ColumnKind::Target {
                    Column::dense(
                        c.name.clone(),
                        ColumnKind::Target,
                        labels.iter().map(|&l| f64::from(l)).collect(),
                    )
                } else {
                    c.clone()
                }
            })
            .collect();
        DataTable::new(columns)
    }

    pub(crate) fn from_parts(columns: Vec<Column>, n_rows: usize) -> DataTable {
        DataTable { columns, n_rows }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> DataTable {
        DataTable::new(vec![
            Column::new(
                "a",
                ColumnKind::Continuous,
                vec![Some(1.0), None, Some(3.0)],
            ),
            Column::dense("y", ColumnKind::Target, vec![0.0, 1.0, 0.0]),
        ])
        .unwrap()
    }

    #[test]
    fn masked_cells_are_not_exposed() {
        let t = small();
        assert_eq!(t.column("a").unwrap().get(1), None);
        assert!(t.feature_matrix().is_err());
    }

    #[test]
    fn rejects_duplicate_names() {
        let err = DataTable::new(vec![
            Column::dense("a", ColumnKind::Continuous, vec![1.0]),
            Column::dense("a", ColumnKind::Target, vec![1.0]),
        ])
        .unwrap_err();
        assert!(matches!(err, Error::DuplicateColumn(_)));
    }

    #[test]
    fn rejects_non_binary_target() {
        let err = DataTable::new(vec![Column::dense("y", ColumnKind::Target, vec![0.0, 2.0])])
            .unwrap_err();
        assert!(err.to_string().contains("non-binary target"));
    }

    #[test]
    fn text_columns_index_sorted_levels() {
        let c = Column::text(
            "g",
            ColumnKind::Categorical,
            vec![Some("b".into()), None, Some("a".into())],
        );
        assert_eq!(c.levels().unwrap(), &["a".to_string(), "b".to_string()]);
        assert_eq!(c.display(0).as_deref(), Some("b"));
        assert_eq!(c.get(1), None);
    }
}
