//! CSV data ingestion.
//!
//! Cells are kept as raw strings; numeric conversion happens when a
//! column is mapped as an observation or regressor column, so errors can
//! name the offending row and column. Empty cells and the literal token
//! `NA` parse as missing.

use std::path::Path;

use crate::error::{Error, Result};

/// A rectangular table of raw cells with a header row.
#[derive(Debug, Clone)]
pub struct DataTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl DataTable {
    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.headers.iter().position(|h| h == name).ok_or_else(|| {
            Error::Data(format!(
                "column `{name}` not found; available: {}",
                self.headers.join(", ")
            ))
        })
    }

    /// Numeric view of a column; empty cells and `NA` become missing.
    pub fn numeric_column(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let idx = self.column_index(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                let cell = row[idx].trim();
                if cell.is_empty() || cell == "NA" {
                    return Ok(None);
                }
                cell.parse::<f64>().map(Some).map_err(|_| {
                    Error::Data(format!(
                        "non-numeric cell `{cell}` at row {}, column `{name}`",
                        r + 2 // 1-based plus the header row
                    ))
                })
            })
            .collect()
    }

    pub fn string_column(&self, name: &str) -> Result<Vec<String>> {
        let idx = self.column_index(name)?;
        Ok(self.rows.iter().map(|row| row[idx].clone()).collect())
    }
}

/// Read a CSV file with a header row into a [`DataTable`].
///
/// A result document written by this tool (first line `# gas-result v1`)
/// is also accepted: its `[simulation]` table becomes the data, so a
/// simulated series can feed straight into `estimate`.
pub fn parse_data(path: &Path) -> Result<DataTable> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    if text.starts_with(super::output::RESULT_MAGIC) {
        return table_from_result(&text, path);
    }
    parse_csv_text(&text, path)
}

fn parse_csv_text(text: &str, path: &Path) -> Result<DataTable> {
    let mut lines = text.lines().map(|l| l.strip_suffix('\r').unwrap_or(l));
    let header_line = lines
        .next()
        .ok_or_else(|| Error::Data(format!("{}: no header row", path.display())))?;
    let headers: Vec<String> = header_line.split(',').map(|h| h.trim().to_string()).collect();
    if headers.iter().all(String::is_empty) {
        return Err(Error::Data(format!("{}: no header row", path.display())));
    }
    let mut seen = std::collections::BTreeSet::new();
    for h in &headers {
        if !seen.insert(h) {
            return Err(Error::Data(format!(
                "{}: duplicate column name `{h}`",
                path.display()
            )));
        }
    }
    let mut rows = Vec::new();
    for (r, line) in lines.enumerate() {
        // An empty line in a single-column file is one missing cell.
        let cells: Vec<String> = line.split(',').map(str::to_string).collect();
        if cells.len() != headers.len() {
            return Err(Error::Data(format!(
                "{}: row {} has {} cells, expected {}",
                path.display(),
                r + 2,
                cells.len(),
                headers.len()
            )));
        }
        rows.push(cells);
    }
    Ok(DataTable { headers, rows })
}

/// Extract the `[simulation]` (or `[filter]`) table of a result document.
fn table_from_result(text: &str, path: &Path) -> Result<DataTable> {
    let doc = super::output::parse_result_text(text)?;
    for section in ["simulation", "filter"] {
        if let Some(table) = doc.table(section) {
            return Ok(DataTable {
                headers: table.header.clone(),
                rows: table.rows.clone(),
            });
        }
    }
    Err(Error::Data(format!(
        "{}: result document has no simulation or filter table",
        path.display()
    )))
}
