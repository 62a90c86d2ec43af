//! Classical return statistics: autocorrelation, magnitude CCDFs and
//! least-squares fits of tail and decay exponents.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::log_spaced_integers;
use crate::par::Exec;
use crate::regress::fit_line;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfCurve {
    pub lags: Vec<usize>,
    pub values: Vec<f64>,
}

/// `(x, P(X > x))` over the sorted distinct magnitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcdfCurve {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub normalized: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailModel {
    /// `P(X > x) ~ x^-gamma`
    PowerLaw,
    /// `P(X > x) ~ exp(-c x^beta)`
    StretchedExponential,
}

/// Which part of the CCDF a tail fit uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum TailWindow {
    /// Magnitudes in `[lo, hi]`.
    Range { lo: f64, hi: f64 },
    /// The largest `fraction` of CCDF points by magnitude.
    TopFraction { fraction: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub model: TailModel,
    /// `gamma` (reported positive) or `beta`.
    pub exponent: f64,
    pub window: [f64; 2],
    /// Sum of squared residuals of `ln P` in the fitting coordinates.
    pub residual: f64,
    pub n_points: usize,
    /// Points inside the window dropped because `P = 0`.
    pub clipped_zeros: usize,
    /// Standard error of the linear slope at the chosen exponent.
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub exponent: f64,
    pub window: [usize; 2],
    pub n_points: usize,
    pub r_squared: f64,
}

/// 50 log-spaced lags from 1 to `min(1e5, len - 1)`.
pub fn default_lags(len: usize) -> Vec<usize> {
    let hi = len.saturating_sub(1).min(100_000);
    if hi == 0 {
        return Vec::new();
    }
    log_spaced_integers(1, hi, 50)
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var)
}

/// Sample autocorrelation with full-sample mean and variance:
/// `A(tau) = (1/T) sum_i (x_i - m)(x_{i+tau} - m) / sigma^2`.
pub fn acf(x: &[f64], lags: &[usize]) -> Result<AcfCurve> {
    acf_with(x, lags, Exec::auto())
}

pub fn acf_with(x: &[f64], lags: &[usize], exec: Exec) -> Result<AcfCurve> {
    if x.len() < 2 {
        return Err(Error::Size(format!("acf needs at least 2 points, got {}", x.len())));
    }
    if let Some(&bad) = lags.iter().find(|&&l| l >= x.len()) {
        return Err(Error::Range(format!("lag {bad} >= series length {}", x.len())));
    }
    if lags.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("lags must be strictly increasing".into()));
    }
    let (mean, var) = mean_var(x);
    if !(var > 0.0) {
        return Err(Error::DegenerateSeries("zero variance, ACF undefined".into()));
    }
    let centered: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let n = x.len() as f64;
    let values = exec.map_slice(lags, |&lag| {
        if lag == 0 {
            return 1.0;
        }
        let s: f64 = centered[..centered.len() - lag]
            .iter()
            .zip(&centered[lag..])
            .map(|(a, b)| a * b)
            .sum();
        s / n / var
    });
    Ok(AcfCurve {
        lags: lags.to_vec(),
        values,
    })
}

/// Empirical CCDF of `|x|` (optionally of `|x| / std(x)`).
pub fn ccdf(x: &[f64], normalize: bool) -> Result<CcdfCurve> {
    if x.len() < 2 {
        return Err(Error::Size(format!("ccdf needs at least 2 points, got {}", x.len())));
    }
    let scale = if normalize {
        let (_, var) = mean_var(x);
        if var > 0.0 {
            var.sqrt()
        } else {
            1.0
        }
    } else {
        1.0
    };
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs() / scale).collect();
    mags.sort_by(f64::total_cmp);
    let n = mags.len();
    let mut xs = Vec::new();
    let mut ps = Vec::new();
    let mut i = 0;
    while i < n {
        let v = mags[i];
        let mut j = i;
        while j < n && mags[j] == v {
            j += 1;
        }
        xs.push(v);
        ps.push((n - j) as f64 / n as f64);
        i = j;
    }
    Ok(CcdfCurve {
        x: xs,
        p: ps,
        normalized: normalize,
    })
}

fn window_bounds(c: &CcdfCurve, window: TailWindow) -> Result<(f64, f64)> {
    match window {
        TailWindow::Range { lo, hi } => {
            if !(lo < hi) {
                return Err(Error::Config(format!("empty tail window [{lo}, {hi}]")));
            }
            Ok((lo, hi))
        }
        TailWindow::TopFraction { fraction } => {
            if !(fraction > 0.0 && fraction <= 1.0) || c.x.is_empty() {
                return Err(Error::Config(format!("bad tail fraction {fraction}")));
            }
            let n = c.x.len();
            let k = ((n as f64 * fraction).ceil() as usize).clamp(1, n);
            Ok((c.x[n - k], c.x[n - 1]))
        }
    }
}

const STRETCHED_BETA_LO: f64 = 0.1;
const STRETCHED_BETA_HI: f64 = 1.0;
const STRETCHED_BETA_STEP: f64 = 0.01;

/// Least-squares tail fit in the model's linearising coordinates.
///
/// Power law: `ln P` against `ln x`. Stretched exponential: for each trial
/// `beta`, `ln P` against `x^beta`, scanning `beta` on a 0.01 grid over
/// `[0.1, 1]` and refining the best cell by golden-section search.
pub fn fit_tail(c: &CcdfCurve, model: TailModel, window: TailWindow) -> Result<TailFit> {
    let (lo, hi) = window_bounds(c, window)?;
    let mut xs = Vec::new();
    let mut lp = Vec::new();
    let mut clipped = 0;
    for (&x, &p) in c.x.iter().zip(&c.p) {
        if x < lo || x > hi {
            continue;
        }
        if p <= 0.0 {
            clipped += 1;
            continue;
        }
        xs.push(x);
        lp.push(p.ln());
    }
    if xs.len() < 10 {
        return Err(Error::Size(format!(
            "tail window [{lo}, {hi}] holds {} usable points (need 10)",
            xs.len()
        )));
    }
    match model {
        TailModel::PowerLaw => {
            if xs[0] <= 0.0 {
                return Err(Error::Domain("power-law window must exclude x = 0".into()));
            }
            let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
            let f = fit_line(&lx, &lp).ok_or_else(|| Error::Numeric("degenerate tail window".into()))?;
            Ok(TailFit {
                model,
                exponent: -f.slope,
                window: [lo, hi],
                residual: f.rss,
                n_points: f.n,
                clipped_zeros: clipped,
                stderr: f.slope_stderr,
            })
        }
        TailModel::StretchedExponential => {
            let rss_at = |beta: f64| -> f64 {
                let xb: Vec<f64> = xs.iter().map(|x| x.powf(beta)).collect();
                fit_line(&xb, &lp).map(|f| f.rss).unwrap_or(f64::INFINITY)
            };
            let steps = ((STRETCHED_BETA_HI - STRETCHED_BETA_LO) / STRETCHED_BETA_STEP).round() as usize;
            let (mut best_b, mut best) = (STRETCHED_BETA_LO, f64::INFINITY);
            for k in 0..=steps {
                let b = STRETCHED_BETA_LO + k as f64 * STRETCHED_BETA_STEP;
                let r = rss_at(b);
                if r < best {
                    best = r;
                    best_b = b;
                }
            }
            let a = (best_b - STRETCHED_BETA_STEP).max(STRETCHED_BETA_LO);
            let b = (best_b + STRETCHED_BETA_STEP).min(STRETCHED_BETA_HI);
            let beta = golden_min(rss_at, a, b, 1e-6);
            let xb: Vec<f64> = xs.iter().map(|x| x.powf(beta)).collect();
            let f = fit_line(&xb, &lp).ok_or_else(|| Error::Numeric("degenerate tail window".into()))?;
            Ok(TailFit {
                model,
                exponent: beta,
                window: [lo, hi],
                residual: f.rss,
                n_points: f.n,
                clipped_zeros: clipped,
                stderr: f.slope_stderr,
            })
        }
    }
}

/// Golden-section minimiser of a unimodal function on `[a, b]`.
pub(crate) fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Log-log slope of the ACF over lags in `[lo, hi]`.
pub fn fit_acf_decay(a: &AcfCurve, lo: usize, hi: usize) -> Result<DecayFit> {
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for (&lag, &v) in a.lags.iter().zip(&a.values) {
        if lag < lo || lag > hi {
            continue;
        }
        if lag == 0 {
            return Err(Error::Domain("decay window must start at lag >= 1".into()));
        }
        if !(v > 0.0) {
            return Err(Error::Domain(format!("non-positive ACF value {v} at lag {lag}")));
        }
        lx.push((lag as f64).ln());
        ly.push(v.ln());
    }
    let f = fit_line(&lx, &ly).ok_or_else(|| Error::Size(format!("fewer than 2 lags in decay window [{lo}, {hi}]")))?;
    Ok(DecayFit {
        exponent: f.slope,
        window: [lo, hi],
        n_points: f.n,
        r_squared: f.r_squared,
    })
}
