//! LIBSVM / SVMlight text format.
//!
//! ```text
//! <label> <index>:<value> <index>:<value> ... # optional comment
//! ```
//!
//! Indices are 1-based and strictly ascending within a line. Labels are
//! parsed as reals and mapped to `-1` when `<= 0`, `+1` otherwise. Blank
//! lines and `#` comments are ignored.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::dataset::{Dataset, Sample};
use crate::error::{Error, Result};
use crate::vec::DenseVec;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// A label and its sorted `(index, value)` features.
type ParsedLine = (f64, Vec<(usize, f64)>);

fn parse_line(lineno: usize, content: &str) -> Result<Option<ParsedLine>> {
    let content = match content.find('#') {
        Some(i) => &content[..i],
        None => content,
    };
    let mut tokens = content.split_whitespace();
    let Some(label_tok) = tokens.next() else {
        return Ok(None);
    };
    let raw: f64 = label_tok
        .parse()
        .map_err(|_| parse_err(lineno, format!("malformed label {label_tok:?}")))?;
    if !raw.is_finite() {
        return Err(parse_err(lineno, format!("non-finite label {label_tok:?}")));
    }
    let label = if raw <= 0.0 { -1.0 } else { 1.0 };

    let mut entries = Vec::new();
    let mut last = 0usize;
    for tok in tokens {
        let (idx, val) = tok
            .split_once(':')
            .ok_or_else(|| parse_err(lineno, format!("malformed feature {tok:?}")))?;
        let idx: usize = idx
            .parse()
            .map_err(|_| parse_err(lineno, format!("malformed feature index in {tok:?}")))?;
        if idx < 1 {
            return Err(parse_err(lineno, "feature indices start at 1"));
        }
        if idx <= last {
            return Err(parse_err(
                lineno,
                format!("feature index {idx} does not follow {last} in ascending order"),
            ));
        }
        let val: f64 = val
            .parse()
            .map_err(|_| parse_err(lineno, format!("malformed feature value in {tok:?}")))?;
        if !val.is_finite() {
            return Err(parse_err(
                lineno,
                format!("non-finite feature value in {tok:?}"),
            ));
        }
        entries.push((idx, val));
        last = idx;
    }
    Ok(Some((label, entries)))
}

/// Parses a whole LIBSVM document; `dim` is the largest index seen.
pub fn parse_libsvm<R: BufRead>(reader: R) -> Result<Dataset> {
    let mut rows = Vec::new();
    let mut dim = 0;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if let Some((label, entries)) = parse_line(i + 1, &line)? {
            if let Some(&(idx, _)) = entries.last() {
                dim = dim.max(idx);
            }
            rows.push((label, entries));
        }
    }
    let samples = rows
        .into_iter()
        .map(|(label, entries)| {
            let mut features = vec![0.0; dim];
            for (idx, val) in entries {
                features[idx - 1] = val;
            }
            Sample {
                features: DenseVec::new(features),
                label,
            }
        })
        .collect();
    Ok(Dataset::new(samples, dim))
}

pub fn parse_libsvm_str(text: &str) -> Result<Dataset> {
    parse_libsvm(text.as_bytes())
}

pub fn read_libsvm_file(path: impl AsRef<Path>) -> Result<Dataset> {
    parse_libsvm(BufReader::new(File::open(path)?))
}

/// Writes non-zero entries only. If no sample has a non-zero in the last
/// coordinate, the first line carries an explicit `dim:0` so that parsing
/// the output recovers the same dimension.
pub fn to_libsvm_string(data: &Dataset) -> String {
    let dim = data.dim();
    let last_used = data
        .samples()
        .iter()
        .any(|s| dim > 0 && s.features[dim - 1] != 0.0);
    let mut out = String::new();
    for (i, s) in data.samples().iter().enumerate() {
        out.push_str(if s.label > 0.0 { "+1" } else { "-1" });
        for (j, &v) in s.features.iter().enumerate() {
            let pad = i == 0 && !last_used && j + 1 == dim;
            if v != 0.0 || pad {
                let _ = write!(out, " {}:{}", j + 1, v);
            }
        }
        out.push('\n');
    }
    out
}
