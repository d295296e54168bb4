//! Dataset ingestion: delimiter-separated values with a header row, id and
//! text columns selectable by name.

use std::path::Path;

use crate::error::CliError;

#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    /// Column holding the record id; `None` uses the 1-based data row number.
    pub id_col: Option<String>,
    /// Columns concatenated (single space) into the record text; empty means
    /// every column except the id column.
    pub text_cols: Vec<String>,
    /// Field delimiter; `None` picks by extension (.tsv tab, otherwise comma).
    pub delim: Option<u8>,
}

fn pick_delimiter(path: &Path, options: &IngestOptions) -> u8 {
    if let Some(d) = options.delim {
        return d;
    }
    match path.extension().and_then(|e| e.to_str()) {
        Some("tsv") => b'\t',
        _ => b',',
    }
}

/// Read one side as `(external_id, text)` rows.
pub fn read_rows(path: &Path, options: &IngestOptions) -> Result<Vec<(String, String)>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(pick_delimiter(path, options))
        .flexible(false)
        .from_path(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_owned)
        .collect();
    if headers.is_empty() {
        return Err(CliError::Input(format!("{}: empty file", path.display())));
    }

    let column = |name: &str| -> Result<usize, CliError> {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            CliError::Input(format!(
                "{}: missing column {name:?} (have: {})",
                path.display(),
                headers.join(", ")
            ))
        })
    };
    let id_idx = options.id_col.as_deref().map(column).transpose()?;
    let text_idx: Vec<usize> = if options.text_cols.is_empty() {
        (0..headers.len()).filter(|i| Some(*i) != id_idx).collect()
    } else {
        options
            .text_cols
            .iter()
            .map(|c| column(c))
            .collect::<Result<_, _>>()?
    };
    if text_idx.is_empty() {
        return Err(CliError::Input(format!("{}: no text columns selected", path.display())));
    }

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row_number = i + 1;
        let record = record.map_err(|e| {
            CliError::Input(format!("{}: malformed row {row_number}: {e}", path.display()))
        })?;
        let id = match id_idx {
            Some(idx) => record.get(idx).unwrap_or("").to_owned(),
            None => row_number.to_string(),
        };
        let text = text_idx
            .iter()
            .map(|&idx| record.get(idx).unwrap_or(""))
            .collect::<Vec<_>>()
            .join(" ");
        rows.push((id, text));
    }
    if rows.is_empty() {
        return Err(CliError::Input(format!("{}: empty file (no data rows)", path.display())));
    }
    Ok(rows)
}

/// Read a ground-truth file: the first two columns are R and S external ids.
pub fn read_truth(path: &Path, delim: Option<u8>) -> Result<Vec<(String, String)>, CliError> {
    let options = IngestOptions { delim, ..Default::default() };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(pick_delimiter(path, &options))
        .flexible(false)
        .from_path(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut pairs = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            CliError::Input(format!("{}: malformed row {}: {e}", path.display(), i + 1))
        })?;
        let r = record.get(0).unwrap_or("").to_owned();
        let s = record.get(1).unwrap_or("").to_owned();
        if r.is_empty() || s.is_empty() {
            return Err(CliError::Input(format!(
                "{}: malformed row {}: expected two ids",
                path.display(),
                i + 1
            )));
        }
        pairs.push((r, s));
    }
    Ok(pairs)
}
