//! Two-column time series files and their mapping onto the unit interval with buffers.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{GofError, Result};
use crate::frontier::Sample;

/// Tokens read as a missing value.
pub const MISSING_TOKENS: [&str; 7] = ["NA", "N/A", "NaN", "nan", "null", "-", "."];

pub const MIN_ROWS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesFile {
    /// Usable `(label, value)` rows.
    pub rows: Vec<(f64, f64)>,
    pub parsed_count: usize,
    pub skipped_count: usize,
    pub delimiter: char,
    pub had_header: bool,
}

fn detect_delimiter(line: &str) -> char {
    ['\t', ';', ',']
        .into_iter()
        .max_by_key(|&d| (line.matches(d).count(), d == '\t'))
        .filter(|&d| line.contains(d))
        .unwrap_or(',')
}

fn is_missing(field: &str) -> bool {
    field.is_empty() || MISSING_TOKENS.contains(&field)
}

fn parse_number(field: &str, row: usize, what: &str) -> Result<f64> {
    let v: f64 = field.parse().map_err(|_| GofError::Parse {
        row,
        msg: format!("{what} {field:?} is not a number"),
    })?;
    if !v.is_finite() {
        return Err(GofError::Parse {
            row,
            msg: format!("{what} {field:?} is not finite"),
        });
    }
    Ok(v)
}

/// Parses delimited text. Rows are numbered from 1 as lines in the file.
pub fn parse_series(text: &str) -> Result<SeriesFile> {
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    let delimiter = detect_delimiter(first);
    let mut rows: Vec<(f64, f64)> = Vec::new();
    let mut skipped = 0;
    let mut had_header = false;
    let mut seen_data = false;
    for (i, line) in text.lines().enumerate() {
        let row = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(delimiter).map(str::trim).collect();
        if fields.len() != 2 {
            return Err(GofError::Parse {
                row,
                msg: format!("expected 2 fields separated by {delimiter:?}, found {}", fields.len()),
            });
        }
        let looks_numeric = |f: &str| f.parse::<f64>().is_ok() || is_missing(f);
        if !seen_data && !had_header && !(looks_numeric(fields[0]) && looks_numeric(fields[1])) {
            had_header = true;
            continue;
        }
        seen_data = true;
        if is_missing(fields[0]) || is_missing(fields[1]) {
            skipped += 1;
            continue;
        }
        let label = parse_number(fields[0], row, "label")?;
        let value = parse_number(fields[1], row, "value")?;
        if let Some(&(prev, _)) = rows.last() {
            if label <= prev {
                return Err(GofError::Parse {
                    row,
                    msg: format!("labels must be strictly increasing ({label} after {prev})"),
                });
            }
        }
        rows.push((label, value));
    }
    if rows.len() < MIN_ROWS {
        return Err(GofError::TooFewRows {
            got: rows.len(),
            min: MIN_ROWS,
        });
    }
    Ok(SeriesFile {
        parsed_count: rows.len(),
        rows,
        skipped_count: skipped,
        delimiter,
        had_header,
    })
}

/// Affine map sending the first label to `-h` and the last to `1 + h`.
pub fn rescale_labels(rows: &[(f64, f64)], h: f64) -> Vec<(f64, f64)> {
    let first = rows[0].0;
    let last = rows[rows.len() - 1].0;
    let span = 1.0 + 2.0 * h;
    rows.iter()
        .enumerate()
        .map(|(i, &(l, v))| {
            let x = if i + 1 == rows.len() {
                1.0 + h
            } else {
                -h + (l - first) / (last - first) * span
            };
            (x, v)
        })
        .collect()
}

/// Parses, rescales, and builds the sample. Parity is assigned after missing rows are dropped.
pub fn series_to_sample(series: &SeriesFile, h: f64) -> Result<Sample<f64>> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(GofError::Domain(format!("bandwidth must be positive, got {h}")));
    }
    Sample::new(rescale_labels(&series.rows, h))
}

pub fn load_series(path: impl AsRef<Path>, h: f64) -> Result<(SeriesFile, Sample<f64>)> {
    let text = std::fs::read_to_string(path)?;
    let series = parse_series(&text)?;
    let sample = series_to_sample(&series, h)?;
    Ok((series, sample))
}
