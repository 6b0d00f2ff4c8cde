//! SVMlight / LIBSVM sparse text format.
//!
//! One sample per line, `<label> <index>:<value> ...`, indices 1-based and
//! strictly increasing. Blank lines are skipped and `#` starts a comment.

use std::io::{self, BufRead, Write};

use super::{Dataset, SparseRow};
use crate::{Error, Result};

/// Parses a whole document. The dimension is the largest index seen unless
/// `dim` overrides it (it must then be at least that large).
pub fn parse_svmlight<R: BufRead>(reader: R, dim: Option<usize>) -> Result<Dataset> {
    let mut entries: Vec<(f64, Vec<usize>, Vec<f64>)> = Vec::new();
    let mut max_index = 0usize;

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| Error::Parse { line: lineno, msg: e.to_string() })?;
        let Some((label, indices, values)) = parse_line(&line, lineno)? else {
            continue;
        };
        if let Some(&last) = indices.last() {
            max_index = max_index.max(last + 1);
        }
        entries.push((label, indices, values));
    }

    let dim = match dim {
        Some(d) if d < max_index => {
            return Err(Error::invalid(format!(
                "dimension override {d} is smaller than the largest feature index {max_index}"
            )))
        }
        Some(d) => d,
        None => max_index,
    };

    let mut rows = Vec::with_capacity(entries.len());
    let mut labels = Vec::with_capacity(entries.len());
    for (label, indices, values) in entries {
        rows.push(SparseRow::new(indices, values, dim)?);
        labels.push(label);
    }
    Dataset::new(rows, labels, dim)
}

pub fn parse_svmlight_str(text: &str, dim: Option<usize>) -> Result<Dataset> {
    parse_svmlight(text.as_bytes(), dim)
}

type ParsedLine = (f64, Vec<usize>, Vec<f64>);

fn parse_line(line: &str, lineno: usize) -> Result<Option<ParsedLine>> {
    let content = match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    };
    let mut tokens = content.split_whitespace();
    let Some(label_tok) = tokens.next() else {
        return Ok(None);
    };
    let err = |msg: String| Error::Parse { line: lineno, msg };

    let label = parse_finite(label_tok).ok_or_else(|| err(format!("invalid label `{label_tok}`")))?;

    let mut indices = Vec::new();
    let mut values = Vec::new();
    for tok in tokens {
        let (idx, val) = tok.split_once(':').ok_or_else(|| err(format!("expected `index:value`, found `{tok}`")))?;
        let idx: usize = idx.parse().map_err(|_| err(format!("invalid feature index `{idx}`")))?;
        if idx == 0 {
            return Err(err("feature indices are 1-based".into()));
        }
        let val = parse_finite(val).ok_or_else(|| err(format!("invalid feature value `{val}`")))?;
        let idx = idx - 1;
        if indices.last().is_some_and(|&prev| prev >= idx) {
            return Err(err(format!("feature index {} is not increasing", idx + 1)));
        }
        indices.push(idx);
        values.push(val);
    }
    Ok(Some((label, indices, values)))
}

fn parse_finite(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Writes `data` in SVMlight format using shortest round-trip decimals.
pub fn emit_svmlight<W: Write>(data: &Dataset, mut out: W) -> io::Result<()> {
    for (row, label) in data.rows().iter().zip(data.labels()) {
        write!(out, "{label}")?;
        for (j, v) in row.indices().iter().zip(row.values()) {
            write!(out, " {}:{v}", j + 1)?;
        }
        writeln!(out)?;
    }
    Ok(())
}
