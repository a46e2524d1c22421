//! LIBSVM sparse text format.
//!
//! ```text
//! +1 3:1 11:1 14:1   # optional comment
//! -1 5:0.25 7:1
//! ```
//!
//! One sample per line: a label, then `index:value` pairs with 1-based,
//! strictly increasing indices. Labels `1`/`+1` map to `+1` and `-1`/`0` map
//! to `-1`; anything else is rejected.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseRow {
    /// `+1.0` or `-1.0`.
    pub label: f64,
    /// `(index, value)` with 1-based, strictly increasing indices.
    pub features: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseDataset {
    pub rows: Vec<SparseRow>,
    pub n_features: usize,
}

impl SparseDataset {
    pub fn n_samples(&self) -> usize {
        self.rows.len()
    }

    /// Canonical text form: `+1`/`-1` labels, shortest round-trip values.
    pub fn to_libsvm_string(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            out.push_str(if row.label > 0.0 { "+1" } else { "-1" });
            for &(idx, val) in &row.features {
                write!(out, " {idx}:{val}").expect("writing to a String cannot fail");
            }
            out.push('\n');
        }
        out
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn normalize_label(raw: f64) -> Option<f64> {
    if raw == 1.0 {
        Some(1.0)
    } else if raw == -1.0 || raw == 0.0 {
        Some(-1.0)
    } else {
        None
    }
}

fn parse_line(line_no: usize, line: &str) -> Result<Option<SparseRow>> {
    let content = line.split('#').next().unwrap_or("");
    let mut tokens = content.split_whitespace();
    let Some(label_tok) = tokens.next() else {
        return Ok(None);
    };
    let raw: f64 = label_tok
        .parse()
        .map_err(|_| parse_err(line_no, format!("label `{label_tok}` is not a number")))?;
    let label = normalize_label(raw)
        .ok_or_else(|| parse_err(line_no, format!("label `{label_tok}` is not one of +1, 1, -1, 0")))?;

    let mut features = Vec::new();
    let mut last = 0usize;
    for tok in tokens {
        let (idx_s, val_s) = tok
            .split_once(':')
            .ok_or_else(|| parse_err(line_no, format!("token `{tok}` is not index:value")))?;
        let idx: usize = idx_s
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad feature index `{idx_s}`")))?;
        if idx == 0 {
            return Err(parse_err(line_no, "feature indices are 1-based"));
        }
        if idx <= last {
            return Err(parse_err(
                line_no,
                format!("feature index {idx} does not increase (previous {last})"),
            ));
        }
        let val: f64 = val_s
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad feature value `{val_s}`")))?;
        if !val.is_finite() {
            return Err(parse_err(line_no, format!("feature value `{val_s}` is not finite")));
        }
        features.push((idx, val));
        last = idx;
    }
    Ok(Some(SparseRow { label, features }))
}

/// Parses with `n_features` inferred as the largest index seen.
pub fn parse_libsvm(text: &str) -> Result<SparseDataset> {
    parse_libsvm_with(text, None)
}

/// Parses, optionally fixing `n_features` (it must cover every index present).
pub fn parse_libsvm_with(text: &str, n_features: Option<usize>) -> Result<SparseDataset> {
    let mut rows = Vec::new();
    let mut max_idx = 0;
    for (i, line) in text.lines().enumerate() {
        if let Some(row) = parse_line(i + 1, line)? {
            if let Some(&(idx, _)) = row.features.last() {
                if n_features.is_some_and(|n| idx > n) {
                    return Err(parse_err(
                        i + 1,
                        format!("feature index {idx} exceeds n_features = {}", n_features.unwrap_or(0)),
                    ));
                }
                max_idx = max_idx.max(idx);
            }
            rows.push(row);
        }
    }
    Ok(SparseDataset {
        rows,
        n_features: n_features.unwrap_or(max_idx),
    })
}

pub fn read_libsvm(path: impl AsRef<Path>, n_features: Option<usize>) -> Result<SparseDataset> {
    let text = std::fs::read_to_string(path)?;
    parse_libsvm_with(&text, n_features)
}
