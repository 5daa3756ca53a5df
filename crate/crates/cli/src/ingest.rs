//! CSV ingestion with row-wise deletion of incomplete records.

use std::path::Path;

use ascore_core::DataTable;

use crate::CliError;

/// Reads a comma-delimited file with a header row into a [`DataTable`].
///
/// Rows with a missing field, a non-numeric field, or the wrong field count
/// are dropped; the number of dropped rows is reported on stderr. Column
/// names must be unique and at least one complete numeric row must remain.
pub fn ingest_csv(path: &Path) -> Result<DataTable, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| CliError::UnreadableFile {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::UnreadableFile {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if headers.is_empty() {
        return Err(CliError::NoNumericRows {
            path: path.display().to_string(),
        });
    }
    for (i, name) in headers.iter().enumerate() {
        if headers[..i].contains(name) {
            return Err(CliError::DuplicateHeader { name: name.clone() });
        }
    }

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); headers.len()];
    let mut dropped = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| CliError::UnreadableFile {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
        let mut row = Vec::with_capacity(headers.len());
        let complete = record.len() == headers.len()
            && record.iter().all(|field| {
                match field.trim().parse::<f64>() {
                    Ok(v) if v.is_finite() => {
                        row.push(v);
                        true
                    }
                    _ => false,
                }
            });
        if complete {
            for (col, v) in columns.iter_mut().zip(row) {
                col.push(v);
            }
        } else {
            dropped += 1;
        }
    }

    if dropped > 0 {
        eprintln!(
            "warning: dropped {} row{} with missing or non-numeric fields",
            dropped,
            if dropped == 1 { "" } else { "s" }
        );
    }
    if columns[0].is_empty() {
        return Err(CliError::NoNumericRows {
            path: path.display().to_string(),
        });
    }

    DataTable::new(headers.into_iter().zip(columns).collect()).map_err(CliError::from)
}
