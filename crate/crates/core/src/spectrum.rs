//! From fluctuation surfaces to scaling exponents and spectra.
//!
//! - [`fit_scaling`]: per-`r` log-log slopes `h(r)` (or `lambda(r)` for a
//!   bivariate surface) over a common or per-`r` scale window.
//! - [`tau_function`]: `tau(r) = r h(r) - 1`.
//! - [`legendre_spectrum`]: `alpha = h + r h'`, `f = r (alpha - h) + 1`,
//!   with width and asymmetry.
//! - [`average_hurst`], [`rho_r`]: the bivariate companions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mfdfa::{FluctuationSurface, SurfaceKind};
use crate::regress::fit_line;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum WindowChoice {
    /// Widest contiguous run of scales whose `r = 2` fit reaches the R^2
    /// threshold; reused for every `r` unless `per_r` is set.
    Auto { per_r: bool },
    /// Scales within `[s_lo, s_hi]`.
    Fixed { s_lo: usize, s_hi: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScalingOptions {
    pub window: WindowChoice,
    pub r_squared_min: f64,
    pub min_scales: usize,
}

impl Default for ScalingOptions {
    fn default() -> Self {
        ScalingOptions {
            window: WindowChoice::Auto { per_r: false },
            r_squared_min: 0.98,
            min_scales: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitFlag {
    Ok,
    /// A value in the window was non-positive or missing; no exponent.
    Unusable,
    /// Exponent reported but the fit misses the R^2 threshold.
    BelowThreshold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RFit {
    pub r: f64,
    pub exponent: Option<f64>,
    pub stderr: f64,
    pub r_squared: f64,
    pub window: [usize; 2],
    pub n_scales: usize,
    pub flag: FitFlag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub kind: SurfaceKind,
    pub r_grid: Vec<f64>,
    pub fits: Vec<RFit>,
    /// The common window (the `r = 2` window under per-`r` fitting).
    pub window: [usize; 2],
}

impl ScalingFit {
    pub fn exponents(&self) -> Vec<Option<f64>> {
        self.fits.iter().map(|f| f.exponent).collect()
    }

    pub fn exponent_at(&self, r: f64) -> Option<f64> {
        self.fits.iter().find(|f| f.r == r).and_then(|f| f.exponent)
    }

    pub fn is_univariate(&self) -> bool {
        self.kind != SurfaceKind::BivariateXy
    }
}

fn index_of_r2(r_grid: &[f64]) -> usize {
    r_grid
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - 2.0).abs().total_cmp(&(b.1 - 2.0).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

struct Candidate {
    lo: usize,
    hi: usize,
    r_squared: f64,
}

/// Widest window (ties: best R^2) with R^2 >= threshold; `Err` carries the
/// best window found regardless of threshold.
fn auto_window(
    row: &[f64],
    s_grid: &[usize],
    threshold: f64,
    min_scales: usize,
) -> std::result::Result<Candidate, Option<Candidate>> {
    let ls: Vec<f64> = s_grid.iter().map(|&s| (s as f64).ln()).collect();
    let n = row.len();
    let mut best_ok: Option<Candidate> = None;
    let mut best_any: Option<Candidate> = None;
    for lo in 0..n {
        for hi in (lo + min_scales - 1)..n {
            let w = &row[lo..=hi];
            if w.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                break;
            }
            let ly: Vec<f64> = w.iter().map(|v| v.ln()).collect();
            let Some(f) = fit_line(&ls[lo..=hi], &ly) else { continue };
            let c = Candidate {
                lo,
                hi,
                r_squared: f.r_squared,
            };
            let better = |cur: &Option<Candidate>, c: &Candidate| match cur {
                None => true,
                Some(b) => {
                    let (wb, wc) = (b.hi - b.lo, c.hi - c.lo);
                    wc > wb || (wc == wb && c.r_squared > b.r_squared)
                }
            };
            if best_any.as_ref().is_none_or(|b| c.r_squared > b.r_squared) {
                best_any = Some(Candidate { ..c });
            }
            if c.r_squared >= threshold && better(&best_ok, &c) {
                best_ok = Some(c);
            }
        }
    }
    best_ok.ok_or(best_any)
}

fn fit_row(r: f64, row: &[f64], s_grid: &[usize], lo: usize, hi: usize, threshold: f64) -> RFit {
    let window = [s_grid[lo], s_grid[hi]];
    let n_scales = hi - lo + 1;
    let w = &row[lo..=hi];
    let unusable = RFit {
        r,
        exponent: None,
        stderr: f64::NAN,
        r_squared: f64::NAN,
        window,
        n_scales,
        flag: FitFlag::Unusable,
    };
    if w.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return unusable;
    }
    let ls: Vec<f64> = s_grid[lo..=hi].iter().map(|&s| (s as f64).ln()).collect();
    let ly: Vec<f64> = w.iter().map(|v| v.ln()).collect();
    match fit_line(&ls, &ly) {
        Some(f) => RFit {
            r,
            exponent: Some(f.slope),
            stderr: f.slope_stderr,
            r_squared: f.r_squared,
            window,
            n_scales,
            flag: if f.r_squared >= threshold {
                FitFlag::Ok
            } else {
                FitFlag::BelowThreshold
            },
        },
        None => unusable,
    }
}

/// Per-`r` least squares of `ln F` against `ln s`.
pub fn fit_scaling(surf: &FluctuationSurface, opts: &ScalingOptions) -> Result<ScalingFit> {
    let s_grid = &surf.s_grid;
    if opts.min_scales < 2 {
        return Err(Error::Config("min_scales must be at least 2".into()));
    }
    let describe = |c: &Option<Candidate>| match c {
        Some(c) => format!(
            "s in [{}, {}] with R^2 = {:.4}",
            s_grid[c.lo], s_grid[c.hi], c.r_squared
        ),
        None => "no window with positive values".to_string(),
    };
    let (lo, hi, per_r) = match opts.window {
        WindowChoice::Fixed { s_lo, s_hi } => {
            let lo = s_grid.iter().position(|&s| s >= s_lo);
            let hi = s_grid.iter().rposition(|&s| s <= s_hi);
            match (lo, hi) {
                (Some(lo), Some(hi)) if hi + 1 >= lo + opts.min_scales => (lo, hi, false),
                _ => {
                    return Err(Error::Config(format!(
                        "window [{s_lo}, {s_hi}] holds fewer than {} scales",
                        opts.min_scales
                    )))
                }
            }
        }
        WindowChoice::Auto { per_r } => {
            if s_grid.len() < opts.min_scales {
                return Err(Error::Config(format!(
                    "{} scales available, need {}",
                    s_grid.len(),
                    opts.min_scales
                )));
            }
            let i2 = index_of_r2(&surf.r_grid);
            match auto_window(&surf.values[i2], s_grid, opts.r_squared_min, opts.min_scales) {
                Ok(c) => (c.lo, c.hi, per_r),
                Err(best) => {
                    return Err(Error::NoScaling {
                        threshold: opts.r_squared_min,
                        best: describe(&best),
                    })
                }
            }
        }
    };
    let fits = surf
        .r_grid
        .iter()
        .zip(&surf.values)
        .map(|(&r, row)| {
            if per_r {
                match auto_window(row, s_grid, opts.r_squared_min, opts.min_scales) {
                    Ok(c) => fit_row(r, row, s_grid, c.lo, c.hi, opts.r_squared_min),
                    Err(Some(c)) => fit_row(r, row, s_grid, c.lo, c.hi, opts.r_squared_min),
                    Err(None) => fit_row(r, row, s_grid, lo, hi, opts.r_squared_min),
                }
            } else {
                fit_row(r, row, s_grid, lo, hi, opts.r_squared_min)
            }
        })
        .collect();
    Ok(ScalingFit {
        kind: surf.kind,
        r_grid: surf.r_grid.clone(),
        fits,
        window: [s_grid[lo], s_grid[hi]],
    })
}

/// `tau(r) = r h(r) - 1` for a univariate fit.
pub fn tau_function(fit: &ScalingFit) -> Result<Vec<Option<f64>>> {
    if !fit.is_univariate() {
        return Err(Error::Config("tau(r) needs a univariate fit".into()));
    }
    Ok(fit.fits.iter().map(|f| f.exponent.map(|h| f.r * h - 1.0)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularitySpectrum {
    /// Moment orders of the retained points.
    pub r: Vec<f64>,
    pub alpha: Vec<f64>,
    pub f_alpha: Vec<f64>,
    pub alpha0: f64,
    pub delta_alpha: f64,
    pub delta_alpha_left: f64,
    pub delta_alpha_right: f64,
    pub asymmetry: f64,
    /// `tau(r)` on the full grid.
    pub tau: Vec<Option<f64>>,
    pub r_grid: Vec<f64>,
    pub fit_window: [usize; 2],
    /// Points dropped as non-concave artifacts at the low / high `r` ends.
    pub trimmed: [usize; 2],
    /// True when all points coincide (monofractal).
    pub collapsed: bool,
}

pub const MIN_SPECTRUM_POINTS: usize = 21;
const TRIM_TOL: f64 = 1e-12;

/// Legendre transform of `h(r)` with central-difference derivatives.
pub fn legendre_spectrum(fit: &ScalingFit) -> Result<SingularitySpectrum> {
    if !fit.is_univariate() {
        return Err(Error::Config("singularity spectrum needs a univariate fit".into()));
    }
    let pts: Vec<(f64, f64)> = fit.fits.iter().filter_map(|f| f.exponent.map(|h| (f.r, h))).collect();
    if pts.len() < MIN_SPECTRUM_POINTS {
        return Err(Error::Config(format!(
            "{} usable moment orders, need {MIN_SPECTRUM_POINTS} for finite differences",
            pts.len()
        )));
    }
    let n = pts.len();
    let dh: Vec<f64> = (0..n)
        .map(|i| {
            let (a, b) = match i {
                0 => (0, 1),
                _ if i == n - 1 => (n - 2, n - 1),
                _ => (i - 1, i + 1),
            };
            (pts[b].1 - pts[a].1) / (pts[b].0 - pts[a].0)
        })
        .collect();
    let alpha: Vec<f64> = (0..n).map(|i| pts[i].1 + pts[i].0 * dh[i]).collect();
    let f: Vec<f64> = (0..n).map(|i| pts[i].0 * (alpha[i] - pts[i].1) + 1.0).collect();

    // Peel artifacts off the ends: alpha must decrease in r and f must fall
    // towards both ends.
    let (mut lo, mut hi) = (0, n - 1);
    while hi > lo && (alpha[lo] + TRIM_TOL < alpha[lo + 1] || f[lo] > f[lo + 1] + TRIM_TOL) {
        lo += 1;
    }
    while hi > lo && (alpha[hi] > alpha[hi - 1] + TRIM_TOL || f[hi] > f[hi - 1] + TRIM_TOL) {
        hi -= 1;
    }
    let anchor = (lo..=hi)
        .min_by(|&a, &b| pts[a].0.abs().total_cmp(&pts[b].0.abs()))
        .unwrap();
    let tau = tau_function(fit)?;
    let base = |r: Vec<f64>, a: Vec<f64>, fa: Vec<f64>, collapsed: bool, trimmed: [usize; 2]| {
        let a0_idx = (0..fa.len())
            .max_by(|&i, &j| fa[i].total_cmp(&fa[j]).then(j.cmp(&i)))
            .unwrap();
        let alpha0 = a[a0_idx];
        let amax = a.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let amin = a.iter().cloned().fold(f64::INFINITY, f64::min);
        let left = alpha0 - amin;
        let right = amax - alpha0;
        let asymmetry = if left + right > 0.0 {
            (left - right) / (left + right)
        } else {
            0.0
        };
        SingularitySpectrum {
            r,
            alpha: a,
            f_alpha: fa,
            alpha0,
            delta_alpha: amax - amin,
            delta_alpha_left: left,
            delta_alpha_right: right,
            asymmetry,
            tau: tau.clone(),
            r_grid: fit.r_grid.clone(),
            fit_window: fit.window,
            trimmed,
            collapsed,
        }
    };
    let spread = |v: &[f64]| {
        v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let kept = lo..hi + 1;
    if spread(&alpha[kept.clone()]) <= 1e-9 && (kept.len() == n || spread(&alpha) <= 1e-9) {
        return Ok(base(
            vec![pts[anchor].0],
            vec![alpha[anchor]],
            vec![f[anchor]],
            true,
            [lo, n - 1 - hi],
        ));
    }
    if kept.len() < 3 {
        return Err(Error::SpectrumDegenerate(format!(
            "{} points left after trimming non-concave artifacts",
            kept.len()
        )));
    }
    Ok(base(
        pts[kept.clone()].iter().map(|p| p.0).collect(),
        alpha[kept.clone()].to_vec(),
        f[kept].to_vec(),
        false,
        [lo, n - 1 - hi],
    ))
}

impl SingularitySpectrum {
    /// `alpha,f_alpha,r` rows for plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,alpha,f_alpha\n");
        for i in 0..self.alpha.len() {
            out.push_str(&format!("{},{},{}\n", self.r[i], self.alpha[i], self.f_alpha[i]));
        }
        out
    }
}

/// `h_xy(r) = (h_x(r) + h_y(r)) / 2`.
pub fn average_hurst(fx: &ScalingFit, fy: &ScalingFit) -> Result<Vec<Option<f64>>> {
    if fx.r_grid != fy.r_grid {
        return Err(Error::Config("r grids of the two fits differ".into()));
    }
    Ok(fx
        .fits
        .iter()
        .zip(&fy.fits)
        .map(|(a, b)| match (a.exponent, b.exponent) {
            (Some(x), Some(y)) => Some(0.5 * (x + y)),
            _ => None,
        })
        .collect())
}

/// `rho_r(s)`; `None` where the denominator is not strictly positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoMatrix {
    pub r_grid: Vec<f64>,
    pub s_grid: Vec<usize>,
    pub values: Vec<Vec<Option<f64>>>,
    pub excluded_cells: usize,
}

impl RhoMatrix {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,s,rho\n");
        for (i, r) in self.r_grid.iter().enumerate() {
            for (j, s) in self.s_grid.iter().enumerate() {
                match self.values[i][j] {
                    Some(v) => out.push_str(&format!("{r},{s},{v}\n")),
                    None => out.push_str(&format!("{r},{s},\n")),
                }
            }
        }
        out
    }
}

/// How the r-th order coefficient is formed from the three surfaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RhoForm {
    /// Ratio of the signed moments before the `1/r` root, so `rho_2` is the
    /// usual detrended cross-correlation coefficient.
    #[default]
    Moment,
    /// Ratio of the rooted fluctuation functions, `F^XY / sqrt(F^XX F^YY)`.
    Root,
}

/// Moment-form coefficient; see [`rho_r_with`].
pub fn rho_r(xy: &FluctuationSurface, xx: &FluctuationSurface, yy: &FluctuationSurface) -> Result<RhoMatrix> {
    rho_r_with(xy, xx, yy, RhoForm::Moment)
}

/// `rho_r(s)` from the XY, XX and YY surfaces. The two forms are related by
/// `moment = sign(root) |root|^r`; at r = 0 both report the root ratio.
pub fn rho_r_with(
    xy: &FluctuationSurface,
    xx: &FluctuationSurface,
    yy: &FluctuationSurface,
    form: RhoForm,
) -> Result<RhoMatrix> {
    if xy.r_grid != xx.r_grid || xy.r_grid != yy.r_grid || xy.s_grid != xx.s_grid || xy.s_grid != yy.s_grid {
        return Err(Error::Config("surfaces are on different grids".into()));
    }
    let mut excluded = 0;
    let values = xy
        .r_grid
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            (0..xy.s_grid.len())
                .map(|j| {
                    let den = (xx.values[i][j] * yy.values[i][j]).sqrt();
                    let num = xy.values[i][j];
                    if den > 0.0 && den.is_finite() && num.is_finite() {
                        let root = num / den;
                        Some(match form {
                            RhoForm::Moment if r != 0.0 => root.signum() * root.abs().powf(r),
                            _ => root,
                        })
                    } else {
                        excluded += 1;
                        None
                    }
                })
                .collect()
        })
        .collect();
    Ok(RhoMatrix {
        r_grid: xy.r_grid.clone(),
        s_grid: xy.s_grid.clone(),
        values,
        excluded_cells: excluded,
    })
}
