//! Data-file ingestion: one number per line, or one column of a
//! comma-separated file with an optional header row.

use std::fs;
use std::path::{Path, PathBuf};

use qplugin::Dataset;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: cannot parse {token:?} as a number")]
    Parse { line: usize, token: String },
    #[error("line {line}: value {value} is not finite")]
    NotFinite { line: usize, value: f64 },
    #[error("line {line}: no column {column}")]
    MissingColumn { line: usize, column: usize },
    #[error("input must contain at least two values")]
    Empty,
    #[error(transparent)]
    Invalid(#[from] qplugin::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    /// One decimal number per line; blank lines are skipped.
    Lines,
    /// Comma-separated rows; the first row may be a header.
    Csv,
}

pub fn ingest(path: &Path, format: InputFormat, csv_column: usize) -> Result<Dataset, IngestError> {
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse(&text, format, csv_column)
}

pub fn parse(text: &str, format: InputFormat, csv_column: usize) -> Result<Dataset, IngestError> {
    let mut values = Vec::new();
    let mut row = 0usize; // non-empty rows seen
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw_line.trim();
        if trimmed.is_empty() {
            continue;
        }
        row += 1;
        let token = match format {
            InputFormat::Lines => trimmed,
            InputFormat::Csv => match trimmed.split(',').nth(csv_column) {
                Some(t) => t.trim(),
                None => {
                    return Err(IngestError::MissingColumn {
                        line,
                        column: csv_column,
                    })
                }
            },
        };
        match token.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(v) => return Err(IngestError::NotFinite { line, value: v }),
            Err(_) => {
                // only the very first csv row may be a header
                if format == InputFormat::Csv && row == 1 {
                    continue;
                }
                return Err(IngestError::Parse {
                    line,
                    token: token.to_owned(),
                });
            }
        }
    }
    if values.len() < 2 {
        return Err(IngestError::Empty);
    }
    Ok(Dataset::new(values)?)
}
