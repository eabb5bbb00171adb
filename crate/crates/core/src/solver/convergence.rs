use crate::error::{Error, Result};

/// Least-squares slope of `log(err)` against `log(h)`.
///
/// Needs at least three samples; mesh sizes must be strictly decreasing and
/// errors strictly positive.
pub fn fit_convergence_order(samples: &[(f64, f64)]) -> Result<f64> {
    if samples.len() < 3 {
        return Err(Error::InsufficientSamples(samples.len()));
    }
    for (index, &(h, err)) in samples.iter().enumerate() {
        if !(err > 0.0 && err.is_finite()) {
            return Err(Error::NonPositiveError { index, value: err });
        }
        if !(h > 0.0) || (index > 0 && h >= samples[index - 1].0) {
            return Err(Error::NonDecreasingMeshSize { index });
        }
    }
    let pts: Vec<(f64, f64)> = samples.iter().map(|&(h, e)| (h.ln(), e.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}
