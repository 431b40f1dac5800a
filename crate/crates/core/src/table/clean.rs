use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{Column, ColumnKind, DataTable};

/// Drops feature columns whose missing fraction exceeds `threshold`.
/// Target and identifier columns always survive; column order is kept.
pub fn drop_sparse_columns(table: &DataTable, threshold: f64) -> Result<(DataTable, Vec<String>)> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::invalid(format!(
            "sparse-column threshold {threshold} outside (0, 1)"
        )));
    }
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for c in table.columns() {
        if c.kind().is_feature() && c.missing_fraction() > threshold {
            dropped.push(c.name().to_string());
        } else {
            kept.push(c.clone());
        }
    }
    if !kept.iter().any(|c| c.kind().is_feature()) {
        return Err(Error::NoFeaturesSurvive(threshold));
    }
    Ok((DataTable::from_parts(kept, table.n_rows()), dropped))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FillValue {
    Mean { value: f64 },
    Mode { value: f64 },
    ModeLevel { level: String },
}

/// Per-column fill values learned by [`impute`], reapplied at scoring time.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ImputationStats {
    pub fills: BTreeMap<String, FillValue>,
}

impl ImputationStats {
    /// Fills masked cells of every column this instance knows about. Columns
    /// absent from the table are an error; unknown columns pass through.
    pub fn apply(&self, table: &DataTable) -> Result<DataTable> {
        for name in self.fills.keys() {
            if table.column(name).is_none() {
                return Err(Error::MissingColumn(name.clone()));
            }
        }
        let n = table.n_rows();
        let columns = table
            .columns()
            .iter()
            .map(|c| match self.fills.get(c.name()) {
                Some(fill) => fill_column(c, fill),
                None => Ok(c.clone()),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DataTable::from_parts(columns, n))
    }
}

fn fill_column(c: &Column, fill: &FillValue) -> Result<Column> {
    let value = match fill {
        FillValue::Mean { value } | FillValue::Mode { value } => {
            if c.is_text() {
                return Err(Error::invalid(format!(
                    "column `{}` holds text but its fill value is numeric",
                    c.name()
                )));
            }
            *value
        }
        FillValue::ModeLevel { level } => {
            let levels = c.levels().ok_or_else(|| {
                Error::invalid(format!(
                    "column `{}` is numeric but its fill value is a text level",
                    c.name()
                ))
            })?;
            match levels.iter().position(|l| l == level) {
                Some(i) => i as f64,
                None => {
                    // The stored mode is not among this table's levels: rebuild
                    // the column so the level exists.
                    let cells = (0..c.len())
                        .map(|r| Some(c.display(r).unwrap_or_else(|| level.clone())))
                        .collect();
                    return Ok(Column::text(c.name(), c.kind(), cells));
                }
            }
        }
    };
    let mut out = c.clone();
    for r in 0..c.len() {
        if c.is_missing(r) {
            out.set(r, value);
        }
    }
    Ok(out)
}

/// Mean-imputes continuous features and mode-imputes categorical ones.
/// Mode ties resolve to the smallest value (or first level in sort order).
pub fn impute(table: &DataTable) -> Result<(DataTable, ImputationStats)> {
    let mut stats = ImputationStats::default();
    for c in table.features() {
        let observed: Vec<f64> = (0..c.len()).filter_map(|r| c.get(r)).collect();
        if observed.is_empty() {
            return Err(Error::FullyMissing(c.name().to_string()));
        }
        let fill = match c.kind() {
            ColumnKind::Continuous => FillValue::Mean {
                value: observed.iter().sum::<f64>() / observed.len() as f64,
            },
            _ => {
                let mode = mode_of(&observed);
                match c.levels() {
                    Some(levels) => FillValue::ModeLevel {
                        level: levels[mode as usize].clone(),
                    },
                    None => FillValue::Mode { value: mode },
                }
            }
        };
        stats.fills.insert(c.name().to_string(), fill);
    }
    let filled = stats.apply(table)?;
    Ok((filled, stats))
}

fn mode_of(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (mut best, mut best_count) = (sorted[0], 0usize);
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        if j - i > best_count {
            best = sorted[i];
            best_count = j - i;
        }
        i = j;
    }
    best
}
