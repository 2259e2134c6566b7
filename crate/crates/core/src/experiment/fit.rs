//! Log-log least squares for `y ≈ A·x^b (+ c)`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub amplitude: f64,
    pub exponent: f64,
    /// Present only for offset fits.
    pub offset: Option<f64>,
    pub r_squared: f64,
    /// Abscissa range the fit was asked to cover.
    pub window: (f64, f64),
}

impl PowerLawFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.amplitude * x.powf(self.exponent) + self.offset.unwrap_or(0.0)
    }
}

/// `amplitude exponent offset r2 window`, offset `NA` when absent.
impl fmt::Display for PowerLawFit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let offset = self.offset.map_or("NA".to_string(), |c| format!("{c:.6e}"));
        write!(
            f,
            "{:.6e} {:.6} {} {:.6} [{},{}]",
            self.amplitude, self.exponent, offset, self.r_squared, self.window.0, self.window.1
        )
    }
}

/// Number of largest-`x` points averaged into the offset: 10%, at least one.
fn tail_len(n: usize) -> usize {
    n.div_ceil(10).max(1)
}

/// Fits all `points`. With `with_offset`, the offset is the mean `y` of the
/// last 10% of points by `x`; those points are then left out of the log-log
/// regression, since their residuals are zero or of either sign by
/// construction.
pub fn fit_power_law(points: &[(f64, f64)], with_offset: bool) -> Result<PowerLawFit> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let window = match (pts.first(), pts.last()) {
        (Some(a), Some(b)) => (a.0, b.0),
        _ => return Err(Error::Fit("no points".into())),
    };

    let offset = if with_offset {
        let k = tail_len(pts.len());
        let tail = pts.split_off(pts.len() - k);
        Some(tail.iter().map(|p| p.1).sum::<f64>() / k as f64)
    } else {
        None
    };
    if pts.len() < 3 {
        return Err(Error::Fit(format!(
            "need at least 3 points, have {}",
            pts.len()
        )));
    }

    let c = offset.unwrap_or(0.0);
    let mut logs = Vec::with_capacity(pts.len());
    for &(x, y) in &pts {
        let r = y - c;
        if !x.is_finite() || !r.is_finite() || x <= 0.0 || r <= 0.0 {
            return Err(Error::Fit(format!(
                "non-positive value at x = {x}: y = {y}, offset = {c}"
            )));
        }
        logs.push((x.ln(), r.ln()));
    }

    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all abscissae coincide".into()));
    }
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let ss_res: f64 = logs
        .iter()
        .map(|p| (p.1 - intercept - exponent * p.0).powi(2))
        .sum();
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };

    Ok(PowerLawFit {
        amplitude: intercept.exp(),
        exponent,
        offset,
        r_squared,
        window,
    })
}

/// Fits only the points with `lo ≤ x ≤ hi` and records the requested window.
pub fn fit_in_window(
    points: &[(f64, f64)],
    window: (f64, f64),
    with_offset: bool,
) -> Result<PowerLawFit> {
    let inside: Vec<_> = points
        .iter()
        .copied()
        .filter(|p| p.0 >= window.0 && p.0 <= window.1)
        .collect();
    let mut fit = fit_power_law(&inside, with_offset)?;
    fit.window = window;
    Ok(fit)
}
