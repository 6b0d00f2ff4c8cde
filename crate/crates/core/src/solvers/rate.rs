use crate::{Error, Result};

/// Empirical linear rate `tau` of a gap sequence: `1 - exp(slope)` for the
/// least-squares slope of `log(gap_t)` against `t`. Non-positive gaps are
/// dropped; at least five must remain.
pub fn contraction_estimate(gaps: &[f64]) -> Result<f64> {
    let pts: Vec<(f64, f64)> =
        gaps.iter().enumerate().filter(|(_, g)| **g > 0.0 && g.is_finite()).map(|(t, g)| (t as f64, g.ln())).collect();
    if pts.len() < 5 {
        return Err(Error::invalid(format!("need at least 5 positive gaps, got {}", pts.len())));
    }
    let m = pts.len() as f64;
    let tx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let ty = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - tx) * (y - ty)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - tx) * (x - tx)).sum();
    Ok(1.0 - (sxy / sxx).exp())
}
