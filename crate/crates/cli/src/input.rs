use std::fs::File;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("cannot read {path}: {reason}")]
    Unreadable { path: String, reason: String },
    #[error("line {line}: {reason}")]
    Malformed { line: u64, reason: String },
    #[error("{0}")]
    Shape(String),
}

#[derive(Debug, Clone)]
pub struct Table {
    pub header: Option<Vec<String>>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn p(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }
}

fn line_of(record: &csv::StringRecord, fallback: u64) -> u64 {
    record.position().map_or(fallback, |p| p.line())
}

/// Reads a comma-separated numeric table. The first row is treated as a
/// header when any of its fields does not parse as a number.
pub fn read_csv(path: &Path) -> Result<Table, InputError> {
    let file = File::open(path).map_err(|e| InputError::Unreadable {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut header = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| InputError::Malformed {
            line: e.position().map_or(i as u64 + 1, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = line_of(&record, i as u64 + 1);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Vec<Option<f64>> = record.iter().map(|f| f.parse::<f64>().ok()).collect();
        if i == 0 && parsed.iter().any(Option::is_none) {
            header = Some(record.iter().map(str::to_string).collect::<Vec<_>>());
            width = Some(record.len());
            continue;
        }
        if let Some(w) = width {
            if record.len() != w {
                return Err(InputError::Malformed {
                    line,
                    reason: format!("expected {w} fields, found {}", record.len()),
                });
            }
        }
        width = Some(record.len());
        let mut row = Vec::with_capacity(parsed.len());
        for (j, value) in parsed.into_iter().enumerate() {
            match value {
                Some(x) if x.is_finite() => row.push(x),
                _ => {
                    return Err(InputError::Malformed {
                        line,
                        reason: format!("field {} is not a finite number: '{}'", j + 1, &record[j]),
                    })
                }
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(InputError::Shape("no data rows".into()));
    }
    Ok(Table { header, rows })
}
