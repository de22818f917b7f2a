//! Reading numeric data files.
//!
//! Single samples are one value per line; paired data are two columns `x,y`.
//! Blank lines and `#` comments are skipped, and a first row with no numeric
//! cell is taken as a header.

use std::path::Path;

use crate::Failure;

fn read_rows(path: &Path, columns: usize) -> Result<Vec<Vec<f64>>, Failure> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;

    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
        let line = record.position().map_or(idx as u64 + 1, |p| p.line());
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        let parsed: Vec<Option<f64>> = record.iter().map(|c| c.parse::<f64>().ok()).collect();
        if rows.is_empty() && idx == 0 && parsed.iter().all(Option::is_none) {
            continue;
        }
        if record.len() != columns {
            return Err(Failure::Data(format!(
                "{}:{line}: expected {columns} column(s), found {}",
                path.display(),
                record.len()
            )));
        }
        let mut row = Vec::with_capacity(columns);
        for (cell, value) in record.iter().zip(parsed) {
            match value {
                Some(v) if v.is_finite() => row.push(v),
                _ => {
                    return Err(Failure::Data(format!(
                        "{}:{line}: '{cell}' is not a finite number",
                        path.display()
                    )))
                }
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Failure::Data(format!("{}: no data rows", path.display())));
    }
    Ok(rows)
}

pub fn read_column(path: &Path) -> Result<Vec<f64>, Failure> {
    Ok(read_rows(path, 1)?.into_iter().map(|r| r[0]).collect())
}

pub fn read_pairs(path: &Path) -> Result<(Vec<f64>, Vec<f64>), Failure> {
    Ok(read_rows(path, 2)?.into_iter().map(|r| (r[0], r[1])).unzip())
}
