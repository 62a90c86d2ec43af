//! Detrended fluctuation machinery for one series (MFDFA) or a pair (MFCCA).
//!
//! For a scale `s` the series is cut into `M_s = 2 * floor(T/s)` segments,
//! `floor(T/s)` counted from the head and as many from the tail. Each
//! segment is integrated, a least-squares polynomial of degree `m` is
//! removed, and the detrended (co)variance `f^2(s, nu)` of the residual
//! profiles is formed. The fluctuation function of order `r` is the signed
//! `r/2`-moment of those (co)variances raised to `1/r`.
//!
//! Polynomial fits project onto a discrete orthonormal basis built once per
//! scale on the abscissa `j/s`, so every segment costs `O(s * m)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{log_spaced_integers, moment_grid};
use crate::par::Exec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroMoment {
    /// `F_0(s) = exp(mean(ln |f^2|) / 2)` over segments with `f^2 != 0`.
    #[default]
    LogAverage,
    /// Drop `r = 0` from the grid.
    Omit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfConfig {
    pub r_grid: Vec<f64>,
    pub s_grid: Vec<usize>,
    pub poly_degree: usize,
    /// Minimum fraction of segments with non-zero `f^2` for a scale's
    /// `r <= 0` moments to count as valid.
    pub min_segment_fill: f64,
    #[serde(default)]
    pub zero_moment: ZeroMoment,
}

pub const DEFAULT_POLY_DEGREE: usize = 2;
pub const DEFAULT_SCALE_COUNT: usize = 40;
pub const DEFAULT_MIN_SCALE: usize = 50;
pub const DEFAULT_MIN_SEGMENT_FILL: f64 = 0.99;

impl MfConfig {
    /// Defaults for a series of length `len`: `r` from -4 to 4 in steps of
    /// 0.2, 40 log-spaced scales from 50 to `len / 20`, quadratic detrending.
    pub fn for_length(len: usize) -> Self {
        MfConfig {
            r_grid: moment_grid(-4.0, 4.0, 0.2),
            s_grid: default_scales(len, DEFAULT_POLY_DEGREE),
            poly_degree: DEFAULT_POLY_DEGREE,
            min_segment_fill: DEFAULT_MIN_SEGMENT_FILL,
            zero_moment: ZeroMoment::LogAverage,
        }
    }

    /// Checks the grids against a series of length `len`.
    pub fn validate(&self, len: usize) -> Result<()> {
        if self.r_grid.is_empty() || self.s_grid.is_empty() {
            return Err(Error::Config("empty r or s grid".into()));
        }
        if self.r_grid.iter().any(|r| !r.is_finite()) {
            return Err(Error::Config("non-finite moment order".into()));
        }
        if self.r_grid.windows(2).any(|w| w[0] >= w[1]) || self.s_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("grids must be strictly increasing".into()));
        }
        if let Some(&s) = self.s_grid.iter().find(|&&s| s < self.poly_degree + 2) {
            return Err(Error::Config(format!(
                "scale {s} too small for degree-{} detrending (need >= {})",
                self.poly_degree,
                self.poly_degree + 2
            )));
        }
        if !(self.min_segment_fill > 0.0 && self.min_segment_fill <= 1.0) {
            return Err(Error::Config(format!(
                "min_segment_fill {} outside (0, 1]",
                self.min_segment_fill
            )));
        }
        let smax = *self.s_grid.last().unwrap();
        if smax > len {
            return Err(Error::Range(format!(
                "largest scale {smax} exceeds series length {len}"
            )));
        }
        let segments = 2 * (len / smax);
        if segments < 4 {
            return Err(Error::ScaleGrid(format!(
                "only {segments} segments at the largest scale {smax} (need >= 4)"
            )));
        }
        Ok(())
    }

    /// The moment orders actually evaluated.
    pub fn effective_r_grid(&self) -> Vec<f64> {
        match self.zero_moment {
            ZeroMoment::LogAverage => self.r_grid.clone(),
            ZeroMoment::Omit => self.r_grid.iter().copied().filter(|&r| r != 0.0).collect(),
        }
    }
}

/// 40 log-spaced scales from 50 to `len / 20` (shrunk for short series).
pub fn default_scales(len: usize, poly_degree: usize) -> Vec<usize> {
    let hi = (len / 20).max(poly_degree + 2);
    let lo = DEFAULT_MIN_SCALE.min(hi / 4).max(poly_degree + 2);
    log_spaced_integers(lo, hi, DEFAULT_SCALE_COUNT)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurfaceKind {
    UnivariateX,
    UnivariateY,
    BivariateXy,
}

/// Per-scale bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleDiagnostics {
    pub s: usize,
    pub segments: usize,
    /// Segments with `f^2 = 0`, left out of the `r <= 0` moments.
    pub excluded_segments: usize,
    /// Segments with `f^2 < 0` (bivariate only).
    pub negative_segments: usize,
    /// False when too many segments were excluded; `r <= 0` cells are NaN.
    pub valid: bool,
}

/// `F_r(s)` on the `(r, s)` grid; `values[i][j]` is `r_grid[i]`, `s_grid[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluctuationSurface {
    pub kind: SurfaceKind,
    pub r_grid: Vec<f64>,
    pub s_grid: Vec<usize>,
    pub values: Vec<Vec<f64>>,
    pub series_length: usize,
    pub poly_degree: usize,
    pub diagnostics: Vec<ScaleDiagnostics>,
}

impl FluctuationSurface {
    pub fn row(&self, r: f64) -> Option<&[f64]> {
        self.r_grid
            .iter()
            .position(|&x| x == r)
            .map(|i| self.values[i].as_slice())
    }

    /// Long-format CSV: `r,s,F`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,s,F\n");
        for (i, r) in self.r_grid.iter().enumerate() {
            for (j, s) in self.s_grid.iter().enumerate() {
                out.push_str(&format!("{r},{s},{}\n", self.values[i][j]));
            }
        }
        out
    }
}

/// Orthonormal polynomial basis on `j/s`, `j = 1..s`, degrees `0..=m`.
#[derive(Debug, Clone)]
pub struct Detrender {
    s: usize,
    basis: Vec<Vec<f64>>,
}

impl Detrender {
    pub fn new(s: usize, m: usize) -> Result<Self> {
        if s < m + 2 {
            return Err(Error::Config(format!("scale {s} too small for degree-{m} detrending")));
        }
        let xs: Vec<f64> = (1..=s).map(|j| j as f64 / s as f64).collect();
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        for k in 0..=m {
            let mut v: Vec<f64> = xs.iter().map(|x| x.powi(k as i32)).collect();
            // two passes of modified Gram-Schmidt
            for _ in 0..2 {
                for b in &basis {
                    let d = dot(&v, b);
                    v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= d * bi);
                }
            }
            let norm = dot(&v, &v).sqrt();
            if !(norm > 0.0) {
                return Err(Error::Numeric(format!("polynomial basis degenerate at s = {s}")));
            }
            v.iter_mut().for_each(|vi| *vi /= norm);
            basis.push(v);
        }
        Ok(Detrender { s, basis })
    }

    pub fn scale(&self) -> usize {
        self.s
    }

    /// Writes the detrended profile of `segment` into `out`.
    pub fn residual_into(&self, segment: &[f64], out: &mut [f64]) {
        let mut acc = 0.0;
        for (o, x) in out.iter_mut().zip(segment) {
            acc += x;
            *o = acc;
        }
        for b in &self.basis {
            let d = dot(out, b);
            out.iter_mut().zip(b).for_each(|(o, bi)| *o -= d * bi);
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Start index of segment `nu` (0-based): head segments first, then tail
/// segments counted back from the end.
pub fn segment_start(len: usize, s: usize, nu: usize) -> usize {
    let k = len / s;
    if nu < k {
        nu * s
    } else {
        len - (nu - k + 1) * s
    }
}

pub fn segment_count(len: usize, s: usize) -> usize {
    2 * (len / s)
}

/// Detrended profiles of all `M_s` segments of `x`.
pub fn detrended_segments(x: &[f64], s: usize, m: usize) -> Result<Vec<Vec<f64>>> {
    if s > x.len() {
        return Err(Error::Range(format!("scale {s} exceeds series length {}", x.len())));
    }
    let d = Detrender::new(s, m)?;
    Ok((0..segment_count(x.len(), s))
        .map(|nu| {
            let a = segment_start(x.len(), s, nu);
            let mut out = vec![0.0; s];
            d.residual_into(&x[a..a + s], &mut out);
            out
        })
        .collect())
}

/// `(1/s) sum_j (x_j - <x>)(y_j - <y>)` over two detrended profiles.
fn profile_covariance(rx: &[f64], ry: &[f64]) -> f64 {
    let s = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / s;
    let my = ry.iter().sum::<f64>() / s;
    rx.iter().zip(ry).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / s
}

/// Detrended covariance `f^2_XY(s, nu)` of segment `nu` (0-based).
pub fn detrended_covariance(x: &[f64], y: &[f64], s: usize, nu: usize, m: usize) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Size(format!(
            "series lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if s > x.len() {
        return Err(Error::Range(format!("scale {s} exceeds series length {}", x.len())));
    }
    if nu >= segment_count(x.len(), s) {
        return Err(Error::Range(format!("segment {nu} out of range at scale {s}")));
    }
    let d = Detrender::new(s, m)?;
    let a = segment_start(x.len(), s, nu);
    let mut rx = vec![0.0; s];
    let mut ry = vec![0.0; s];
    d.residual_into(&x[a..a + s], &mut rx);
    d.residual_into(&y[a..a + s], &mut ry);
    Ok(profile_covariance(&rx, &ry))
}

/// Segment (co)variances at one scale: `(f2_xx, f2_yy, f2_xy)`; the `yy`
/// and `xy` vectors are empty in the univariate case.
fn scale_variances(x: &[f64], y: Option<&[f64]>, d: &Detrender) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let s = d.scale();
    let len = x.len();
    let m = segment_count(len, s);
    let mut rx = vec![0.0; s];
    let mut ry = vec![0.0; s];
    let mut fxx = Vec::with_capacity(m);
    let mut fyy = Vec::new();
    let mut fxy = Vec::new();
    for nu in 0..m {
        let a = segment_start(len, s, nu);
        d.residual_into(&x[a..a + s], &mut rx);
        fxx.push(profile_covariance(&rx, &rx));
        if let Some(y) = y {
            d.residual_into(&y[a..a + s], &mut ry);
            fyy.push(profile_covariance(&ry, &ry));
            fxy.push(profile_covariance(&rx, &ry));
        }
    }
    (fxx, fyy, fxy)
}

/// Column of `F_r(s)` over the `r` grid at one scale.
fn moments(f2: &[f64], r_grid: &[f64], s: usize, min_fill: f64) -> Result<(Vec<f64>, ScaleDiagnostics)> {
    if let Some(nu) = f2.iter().position(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!(
            "non-finite detrended variance at s = {s}, segment {nu}"
        )));
    }
    let total = f2.len();
    let zeros = f2.iter().filter(|&&v| v == 0.0).count();
    let negatives = f2.iter().filter(|&&v| v < 0.0).count();
    let valid = (total - zeros) as f64 >= min_fill * total as f64 && zeros < total;
    let mut col = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        if r <= 0.0 && !valid {
            col.push(f64::NAN);
            continue;
        }
        let value = if r == 0.0 {
            let used = total - zeros;
            let sum: f64 = f2.iter().filter(|&&v| v != 0.0).map(|v| v.abs().ln()).sum();
            (sum / (2.0 * used as f64)).exp()
        } else {
            let half = r / 2.0;
            let (sum, used) = f2
                .iter()
                .filter(|&&v| r > 0.0 || v != 0.0)
                .fold((0.0, 0usize), |(acc, n), &v| {
                    (acc + v.signum() * v.abs().powf(half), n + 1)
                });
            let mean = sum / used as f64;
            mean.signum() * mean.abs().powf(1.0 / r)
        };
        if value.is_nan() || value.is_infinite() {
            let nu = f2
                .iter()
                .position(|&v| !(v.abs().powf(r / 2.0)).is_finite())
                .map(|n| n.to_string())
                .unwrap_or_else(|| "-".into());
            return Err(Error::Numeric(format!(
                "fluctuation function overflow at r = {r}, s = {s}, segment {nu}"
            )));
        }
        col.push(value);
    }
    Ok((
        col,
        ScaleDiagnostics {
            s,
            segments: total,
            excluded_segments: zeros,
            negative_segments: negatives,
            valid,
        },
    ))
}

fn assemble(
    kind: SurfaceKind,
    cfg: &MfConfig,
    r_grid: &[f64],
    len: usize,
    columns: Vec<(Vec<f64>, ScaleDiagnostics)>,
) -> FluctuationSurface {
    let mut values = vec![Vec::with_capacity(columns.len()); r_grid.len()];
    let mut diagnostics = Vec::with_capacity(columns.len());
    for (col, diag) in columns {
        for (i, v) in col.into_iter().enumerate() {
            values[i].push(v);
        }
        diagnostics.push(diag);
    }
    FluctuationSurface {
        kind,
        r_grid: r_grid.to_vec(),
        s_grid: cfg.s_grid.clone(),
        values,
        series_length: len,
        poly_degree: cfg.poly_degree,
        diagnostics,
    }
}

/// Univariate (MFDFA) fluctuation surface.
pub fn fluctuation_surface(x: &[f64], cfg: &MfConfig) -> Result<FluctuationSurface> {
    fluctuation_surface_with(x, cfg, Exec::auto())
}

pub fn fluctuation_surface_with(x: &[f64], cfg: &MfConfig, exec: Exec) -> Result<FluctuationSurface> {
    cfg.validate(x.len())?;
    let r_grid = cfg.effective_r_grid();
    let columns = exec
        .map_slice(&cfg.s_grid, |&s| {
            let d = Detrender::new(s, cfg.poly_degree)?;
            let (fxx, _, _) = scale_variances(x, None, &d);
            moments(&fxx, &r_grid, s, cfg.min_segment_fill)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(SurfaceKind::UnivariateX, cfg, &r_grid, x.len(), columns))
}

/// The three surfaces of a bivariate analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSurfaces {
    pub xx: FluctuationSurface,
    pub yy: FluctuationSurface,
    pub xy: FluctuationSurface,
}

/// Bivariate (MFCCA) analysis: `F^XX`, `F^YY` and the signed `F^XY`.
pub fn cross_surfaces(x: &[f64], y: &[f64], cfg: &MfConfig) -> Result<CrossSurfaces> {
    cross_surfaces_with(x, y, cfg, Exec::auto())
}

pub fn cross_surfaces_with(x: &[f64], y: &[f64], cfg: &MfConfig, exec: Exec) -> Result<CrossSurfaces> {
    if x.len() != y.len() {
        return Err(Error::Size(format!(
            "series lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    cfg.validate(x.len())?;
    let r_grid = cfg.effective_r_grid();
    let per_scale = exec
        .map_slice(&cfg.s_grid, |&s| {
            let d = Detrender::new(s, cfg.poly_degree)?;
            let (fxx, fyy, fxy) = scale_variances(x, Some(y), &d);
            Ok((
                moments(&fxx, &r_grid, s, cfg.min_segment_fill)?,
                moments(&fyy, &r_grid, s, cfg.min_segment_fill)?,
                moments(&fxy, &r_grid, s, cfg.min_segment_fill)?,
            ))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut cx = Vec::with_capacity(per_scale.len());
    let mut cy = Vec::with_capacity(per_scale.len());
    let mut cxy = Vec::with_capacity(per_scale.len());
    for (a, b, c) in per_scale {
        cx.push(a);
        cy.push(b);
        cxy.push(c);
    }
    let len = x.len();
    Ok(CrossSurfaces {
        xx: assemble(SurfaceKind::UnivariateX, cfg, &r_grid, len, cx),
        yy: assemble(SurfaceKind::UnivariateY, cfg, &r_grid, len, cy),
        xy: assemble(SurfaceKind::BivariateXy, cfg, &r_grid, len, cxy),
    })
}

/// Only the bivariate surface `F^XY`.
pub fn cross_fluctuation_surface(x: &[f64], y: &[f64], cfg: &MfConfig) -> Result<FluctuationSurface> {
    Ok(cross_surfaces(x, y, cfg)?.xy)
}
