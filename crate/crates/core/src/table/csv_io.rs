use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::{Column, ColumnKind, DataTable};

pub const DEFAULT_TARGET: &str = "SepsisLabel";

/// Column-kind hints for CSV ingestion. Columns without a hint are inferred:
/// all-numeric cells make a continuous column, anything else categorical.
#[derive(Debug, Clone)]
pub struct SchemaHints {
    pub target: String,
    pub kinds: BTreeMap<String, ColumnKind>,
    /// Accept files without the target column; an all-missing target is added.
    pub unlabeled: bool,
}

impl Default for SchemaHints {
    fn default() -> Self {
        let mut kinds = BTreeMap::new();
        kinds.insert("Patient_ID".to_string(), ColumnKind::Identifier);
        Self {
            target: DEFAULT_TARGET.to_string(),
            kinds,
            unlabeled: false,
        }
    }
}

impl SchemaHints {
    pub fn with_target(target: impl Into<String>) -> Self {
        Self {
            target: target.into(),
            ..Self::default()
        }
    }

    /// Hints for the PhysioNet-2019 layout: demographic indicator columns are
    /// categorical, `Patient_ID` is an identifier, `SepsisLabel` the target.
    pub fn physionet() -> Self {
        let mut hints = Self::default();
        for name in ["Gender", "Gender_0", "Gender_1", "Unit1", "Unit2"] {
            hints
                .kinds
                .insert(name.to_string(), ColumnKind::Categorical);
        }
        hints
    }

    pub fn unlabeled(mut self) -> Self {
        self.unlabeled = true;
        self
    }

    pub fn hint(mut self, column: impl Into<String>, kind: ColumnKind) -> Self {
        self.kinds.insert(column.into(), kind);
        self
    }
}

fn is_missing_token(cell: &str) -> bool {
    let t = cell.trim();
    t.is_empty() || t.eq_ignore_ascii_case("na") || t.eq_ignore_ascii_case("nan")
}

pub fn load_csv(path: impl AsRef<Path>, hints: &SchemaHints) -> Result<DataTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, hints)
}

pub fn read_csv<R: Read>(reader: R, hints: &SchemaHints) -> Result<DataTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut seen = HashSet::new();
    for h in &header {
        if !seen.insert(h.as_str()) {
            return Err(Error::DuplicateColumn(h.clone()));
        }
    }
    let has_target = header.iter().any(|h| h == &hints.target);
    if !has_target && !hints.unlabeled {
        return Err(Error::MissingTarget(hints.target.clone()));
    }

    let mut raw: Vec<Vec<Option<String>>> = vec![Vec::new(); header.len()];
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() != header.len() {
            return Err(Error::RaggedRow {
                row,
                expected: header.len(),
                found: record.len(),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            raw[j].push((!is_missing_token(cell)).then(|| cell.trim().to_string()));
        }
    }

    let n_rows = raw.first().map_or(0, Vec::len);
    let mut columns = header
        .iter()
        .zip(raw)
        .map(|(name, cells)| build_column(name, cells, hints))
        .collect::<Result<Vec<_>>>()?;
    if !has_target {
        columns.push(Column::new(
            hints.target.clone(),
            ColumnKind::Target,
            vec![None; n_rows],
        ));
    }
    DataTable::new(columns)
}

fn parse_all(cells: &[Option<String>]) -> Result<Vec<Option<f64>>, (usize, String)> {
    cells
        .iter()
        .enumerate()
        .map(|(row, c)| match c {
            None => Ok(None),
            Some(s) => s.parse::<f64>().map(Some).map_err(|_| (row, s.clone())),
        })
        .collect()
}

fn build_column(name: &str, cells: Vec<Option<String>>, hints: &SchemaHints) -> Result<Column> {
    let kind = if name == hints.target {
        Some(ColumnKind::Target)
    } else {
        hints.kinds.get(name).copied()
    };
    match kind {
        Some(ColumnKind::Target) => match parse_all(&cells) {
            Ok(values) => Ok(Column::new(name, ColumnKind::Target, values)),
            Err((row, value)) => Err(Error::NonBinaryTarget {
                column: name.to_string(),
                row,
                value,
            }),
        },
        Some(ColumnKind::Continuous) => match parse_all(&cells) {
            Ok(values) => Ok(Column::new(name, ColumnKind::Continuous, values)),
            Err((row, value)) => Err(Error::Parse {
                column: name.to_string(),
                row,
                value,
            }),
        },
        Some(kind) => match parse_all(&cells) {
            Ok(values) => Ok(Column::new(name, kind, values)),
            Err(_) => Ok(Column::text(name, kind, cells)),
        },
        None => match parse_all(&cells) {
            Ok(values) => Ok(Column::new(name, ColumnKind::Continuous, values)),
            Err(_) => Ok(Column::text(name, ColumnKind::Categorical, cells)),
        },
    }
}

/// Writes the table with a header row; masked cells become empty fields.
pub fn write_csv(table: &DataTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv_to(table, file)
}

pub(crate) fn write_csv_to<W: Write>(table: &DataTable, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(table.columns().iter().map(Column::name))?;
    for row in 0..table.n_rows() {
        wtr.write_record(
            table
                .columns()
                .iter()
                .map(|c| c.display(row).unwrap_or_default()),
        )?;
    }
    wtr.flush().map_err(|source| Error::Io {
        path: "<csv output>".into(),
        source,
    })?;
    Ok(())
}
