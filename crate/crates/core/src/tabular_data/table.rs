use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::io::Read;
use std::path::Path;

/// Which columns play which role. Everything not named becomes a feature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnRoles {
    pub target: String,
    pub protected: String,
    #[serde(default)]
    pub drop: Vec<String>,
}

impl ColumnRoles {
    pub fn new(target: impl Into<String>, protected: impl Into<String>) -> Self {
        Self {
            target: target.into(),
            protected: protected.into(),
            drop: Vec::new(),
        }
    }

    pub fn with_drop<S: Into<String>>(mut self, drop: impl IntoIterator<Item = S>) -> Self {
        self.drop = drop.into_iter().map(Into::into).collect();
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Numeric(Vec<Option<f64>>),
    Categorical(Vec<Option<String>>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Numeric(v) => v.len(),
            Column::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_missing(&self, row: usize) -> bool {
        match self {
            Column::Numeric(v) => v[row].is_none(),
            Column::Categorical(v) => v[row].is_none(),
        }
    }

    fn select(&self, rows: &[usize]) -> Column {
        match self {
            Column::Numeric(v) => Column::Numeric(rows.iter().map(|&r| v[r]).collect()),
            Column::Categorical(v) => {
                Column::Categorical(rows.iter().map(|&r| v[r].clone()).collect())
            }
        }
    }
}

/// Parsed table. Columns are numeric when every present cell parses as a real.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    column_names: Vec<String>,
    columns: Vec<Column>,
    n_rows: usize,
}

/// Missing-value spellings: empty, `NA`, `nan` (any case).
pub fn is_missing(cell: &str) -> bool {
    let c = cell.trim();
    c.is_empty() || c.eq_ignore_ascii_case("na") || c.eq_ignore_ascii_case("nan")
}

impl Table {
    pub fn new(column_names: Vec<String>, columns: Vec<Column>) -> Result<Self> {
        if column_names.len() != columns.len() {
            return Err(Error::LengthMismatch(format!(
                "{} names for {} columns",
                column_names.len(),
                columns.len()
            )));
        }
        let mut seen = HashSet::new();
        for (i, name) in column_names.iter().enumerate() {
            if name.is_empty() {
                return Err(Error::EmptyColumnName(i));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateColumn(name.clone()));
            }
        }
        let n_rows = columns.first().map_or(0, Column::len);
        if let Some(c) = columns.iter().position(|c| c.len() != n_rows) {
            return Err(Error::LengthMismatch(format!(
                "column `{}` has {} rows, expected {n_rows}",
                column_names[c],
                columns[c].len()
            )));
        }
        Ok(Self {
            column_names,
            columns,
            n_rows,
        })
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|n| n == name)
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.index_of(name).map(|i| &self.columns[i])
    }

    /// Row subset, preserving column order.
    pub fn select_rows(&self, rows: &[usize]) -> Table {
        Table {
            column_names: self.column_names.clone(),
            columns: self.columns.iter().map(|c| c.select(rows)).collect(),
            n_rows: rows.len(),
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, roles: &ColumnRoles) -> Result<Table> {
    let path = path.as_ref();
    if !path.is_file() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    read_csv(std::fs::File::open(path)?, roles)
}

/// Parses UTF-8 CSV with a header row and drops the declared `roles.drop` columns.
pub fn read_csv<R: Read>(reader: R, roles: &ColumnRoles) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    for declared in [&roles.target, &roles.protected]
        .into_iter()
        .chain(roles.drop.iter())
    {
        if !header.iter().any(|h| h == declared) {
            return Err(Error::MissingColumn(declared.clone()));
        }
    }

    let mut cells: Vec<Vec<String>> = vec![Vec::new(); header.len()];
    for record in rdr.records() {
        let record = record?;
        if record.len() != header.len() {
            let line = record.position().map_or(0, |p| p.line());
            return Err(Error::RaggedRow {
                line,
                expected: header.len(),
                found: record.len(),
            });
        }
        for (col, field) in cells.iter_mut().zip(record.iter()) {
            col.push(field.to_owned());
        }
    }
    if cells.first().is_none_or(Vec::is_empty) {
        return Err(Error::EmptyTable);
    }

    let mut names = Vec::new();
    let mut columns = Vec::new();
    for (name, raw) in header.into_iter().zip(cells) {
        if roles.drop.contains(&name) {
            continue;
        }
        columns.push(type_column(raw));
        names.push(name);
    }
    Table::new(names, columns)
}

fn type_column(raw: Vec<String>) -> Column {
    let parsed: Option<Vec<Option<f64>>> = raw
        .iter()
        .map(|c| {
            if is_missing(c) {
                Some(None)
            } else {
                c.parse::<f64>().ok().map(Some)
            }
        })
        .collect();
    match parsed {
        Some(values) => Column::Numeric(values),
        None => Column::Categorical(
            raw.into_iter()
                .map(|c| if is_missing(&c) { None } else { Some(c) })
                .collect(),
        ),
    }
}
