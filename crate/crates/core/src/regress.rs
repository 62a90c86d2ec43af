//! Ordinary least squares on a line.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope (zero for exact or two-point fits).
    pub slope_stderr: f64,
    pub r_squared: f64,
    /// Sum of squared residuals.
    pub rss: f64,
    pub n: usize,
}

/// Fits `y = intercept + slope * x`. Returns `None` with fewer than two
/// points or no spread in `x`.
pub fn fit_line(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = x[..n].iter().sum::<f64>() / nf;
    let my = y[..n].iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let dx = x[i] - mx;
        let dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = (0..n)
        .map(|i| {
            let e = y[i] - intercept - slope * x[i];
            e * e
        })
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - rss / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let slope_stderr = if n > 2 { (rss / (nf - 2.0) / sxx).sqrt() } else { 0.0 };
    Some(LineFit {
        slope,
        intercept,
        slope_stderr,
        r_squared,
        rss,
        n,
    })
}
