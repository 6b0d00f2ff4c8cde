//! Trace CSV emission and parsing.

use std::io::Write;
use std::path::Path;

use catalyst_core::catalyst::{relative_gap, Trace};

use crate::error::{BenchError, Result};

pub const HEADER: &str = "grad_evals,full_passes,effective_grads,outer_iter,inner_iters,f_value,rel_gap,wall_ms";

/// One parsed CSV row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsvRow {
    pub grad_evals: u64,
    pub full_passes: u64,
    pub effective_grads: u64,
    pub outer_iter: u64,
    pub inner_iters: u64,
    pub f_value: f64,
    pub rel_gap: f64,
    pub wall_ms: f64,
}

/// 17 significant digits, enough to recover every `f64` exactly.
fn real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn rows(trace: &Trace, f_star: f64) -> Vec<CsvRow> {
    trace
        .samples
        .iter()
        .map(|s| CsvRow {
            grad_evals: s.component_grads,
            full_passes: s.full_passes,
            effective_grads: s.effective_grads,
            outer_iter: s.outer_iter,
            inner_iters: s.inner_iters,
            f_value: s.f_value,
            rel_gap: relative_gap(s.f_value, f_star),
            wall_ms: s.wall_ms,
        })
        .collect()
}

pub fn write_rows<W: Write>(rows: &[CsvRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.grad_evals,
            r.full_passes,
            r.effective_grads,
            r.outer_iter,
            r.inner_iters,
            real(r.f_value),
            real(r.rel_gap),
            real(r.wall_ms)
        )?;
    }
    out.flush()
}

pub fn write_csv<W: Write>(trace: &Trace, f_star: f64, out: W) -> std::io::Result<()> {
    write_rows(&rows(trace, f_star), out)
}

pub fn to_csv_string(trace: &Trace, f_star: f64) -> String {
    let mut buf = Vec::new();
    write_csv(trace, f_star, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is ascii")
}

pub fn emit_csv(trace: &Trace, f_star: f64, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    }
    let file = std::fs::File::create(path).map_err(|e| BenchError::io(path, e))?;
    write_csv(trace, f_star, std::io::BufWriter::new(file)).map_err(|e| BenchError::io(path, e))
}

/// Parses a trace CSV; the header must match exactly.
pub fn read_trace_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end_matches('\r') == HEADER => {}
        Some((_, h)) => return Err(BenchError::Csv { line: 1, msg: format!("unexpected header {h:?}") }),
        None => return Err(BenchError::Csv { line: 1, msg: "empty file".into() }),
    }
    let mut out = Vec::new();
    for (idx, line) in lines {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| BenchError::Csv { line: idx + 1, msg };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(err(format!("expected 8 fields, got {}", fields.len())));
        }
        let int = |j: usize| fields[j].parse::<u64>().map_err(|_| err(format!("bad integer {:?}", fields[j])));
        let float = |j: usize| fields[j].parse::<f64>().map_err(|_| err(format!("bad number {:?}", fields[j])));
        out.push(CsvRow {
            grad_evals: int(0)?,
            full_passes: int(1)?,
            effective_grads: int(2)?,
            outer_iter: int(3)?,
            inner_iters: int(4)?,
            f_value: float(5)?,
            rel_gap: float(6)?,
            wall_ms: float(7)?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use catalyst_core::catalyst::{RunStop, TraceSample};
    use catalyst_core::DenseVector;

    fn trace(samples: Vec<TraceSample>) -> Trace {
        Trace {
            n: 4,
            samples,
            outer: Vec::new(),
            final_point: DenseVector::zeros(2),
            stop: RunStop::MaxOuter,
            kappa: 0.0,
        }
    }

    fn sample(c: u64, f: f64) -> TraceSample {
        TraceSample {
            component_grads: c,
            full_passes: 1,
            effective_grads: c + 4,
            outer_iter: 2,
            inner_iters: 9,
            f_value: f,
            wall_ms: 0.0,
        }
    }

    #[test]
    fn empty_trace_is_header_only() {
        assert_eq!(to_csv_string(&trace(Vec::new()), 1.0), format!("{HEADER}\n"));
    }

    #[test]
    fn seventeen_digits() {
        let text = to_csv_string(&trace(vec![sample(8, 0.1)]), 0.0);
        let row = text.lines().nth(1).unwrap();
        assert_eq!(row, "8,1,12,2,9,1.0000000000000001e-1,1.0000000000000001e-1,0.0000000000000000e0");
    }

    #[test]
    fn round_trip_is_exact() {
        let values = [0.1, 1.0 / 3.0, 6.02214076e23, 5e-324, -2.5, f64::MAX];
        let t = trace(values.iter().enumerate().map(|(i, &f)| sample(i as u64, f)).collect());
        let parsed = read_trace_csv(&to_csv_string(&t, 0.7)).unwrap();
        assert_eq!(parsed.len(), t.samples.len());
        assert_eq!(parsed, rows(&t, 0.7));
    }

    #[test]
    fn rejects_malformed() {
        assert!(read_trace_csv("").is_err());
        assert!(read_trace_csv("a,b\n").is_err());
        let bad_field = format!("{HEADER}\n1,2,3,4,5,x,7,8\n");
        assert!(matches!(read_trace_csv(&bad_field), Err(BenchError::Csv { line: 2, .. })));
        assert!(read_trace_csv(&format!("{HEADER}\n1,2,3\n")).is_err());
        assert!(read_trace_csv(&format!("{HEADER}\n-1,2,3,4,5,6,7,8\n")).is_err());
    }
}
