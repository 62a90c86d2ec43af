//! The q-Gaussian family.
//!
//! Density `p(x) = sqrt(beta) / C_q * e_q(-beta x^2)` with `C_q` obtained by
//! adaptive quadrature and cached per `q`. CDF and quantile work on the
//! standardised variable `y = sqrt(beta) x`, so the cumulative table depends
//! on `q` only and is shared across widths.
//!
//! The half-line `y >= 0` is split into a head and a mapped tail, each cut
//! into `TABLE_PANELS / 2` equal panels whose GK15 integrals are accumulated
//! once. A CDF evaluation is one table lookup plus one partial panel; the
//! quantile solves inside the bracketing panel by safeguarded Newton.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Exec;
use crate::quad::{adaptive, gk15};
use crate::rng;
use crate::stats::golden_min;

/// Panels in the cumulative table.
pub const TABLE_PANELS: usize = 4096;

/// `e_q(x)`: `(1 + (1-q) x)^(1/(1-q))` on its support, `0` off it, `exp(x)` at `q = 1`.
pub fn q_exponential(x: f64, q: f64) -> f64 {
    if q == 1.0 {
        return x.exp();
    }
    let base = 1.0 + (1.0 - q) * x;
    if base <= 0.0 {
        0.0
    } else {
        base.powf(1.0 / (1.0 - q))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QGaussianParams {
    pub q: f64,
    pub beta: f64,
}

impl QGaussianParams {
    pub fn new(q: f64, beta: f64) -> Result<Self> {
        if !(q < 3.0) || !q.is_finite() {
            return Err(Error::Domain(format!("q must be < 3, got {q}")));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::Domain(format!("beta must be positive, got {beta}")));
        }
        Ok(QGaussianParams { q, beta })
    }

    /// The unit normal as a q-Gaussian (`q = 1`, `beta = 1/2`).
    pub fn standard_normal() -> Self {
        QGaussianParams { q: 1.0, beta: 0.5 }
    }

    pub fn has_finite_variance(&self) -> bool {
        self.q < 5.0 / 3.0
    }

    /// `1 / (beta (5 - 3q))` when finite.
    pub fn variance(&self) -> Option<f64> {
        self.has_finite_variance()
            .then(|| 1.0 / (self.beta * (5.0 - 3.0 * self.q)))
    }
}

/// How the half-line `y >= 0` is split. The head `[0, y_split]` is scaled
/// onto `z in [0, 1]`; the tail beyond `y_split` is mapped onto `w in [0, 1]`
/// with `w = 0` at the far end, so tail masses are accumulated from the
/// outside in and keep their relative precision.
#[derive(Debug, Clone, Copy)]
struct Layout {
    q: f64,
    y_split: f64,
    tail: Tail,
}

#[derive(Debug, Clone, Copy)]
enum Tail {
    /// `y = ymax - w (ymax - y_split)`.
    Compact { ymax: f64 },
    /// `y = w^-k`.
    Power { k: f64 },
}

impl Layout {
    fn new(q: f64) -> Self {
        if q < 1.0 {
            let ymax = 1.0 / (1.0 - q).sqrt();
            Layout {
                q,
                y_split: 0.5 * ymax,
                tail: Tail::Compact { ymax },
            }
        } else {
            // k = 1/(gamma - 1) with gamma = 2/(q - 1) keeps the mapped
            // tail bounded at w = 0 once the decay is slower than y^-2.
            let k = if q > 2.0 { (q - 1.0) / (3.0 - q) } else { 1.0 };
            Layout {
                q,
                y_split: 1.0,
                tail: Tail::Power { k },
            }
        }
    }

    fn head(&self, z: f64) -> f64 {
        let y = z * self.y_split;
        q_exponential(-y * y, self.q) * self.y_split
    }

    fn tail(&self, w: f64) -> f64 {
        match self.tail {
            Tail::Compact { ymax } => {
                let y = self.tail_y(w);
                q_exponential(-y * y, self.q) * (ymax - self.y_split)
            }
            Tail::Power { k } => {
                if w <= 0.0 {
                    return 0.0;
                }
                if k == 1.0 {
                    let y = 1.0 / w;
                    let y2 = y * y;
                    if !y2.is_finite() {
                        return 0.0;
                    }
                    q_exponential(-y2, self.q) * y2
                } else {
                    let gamma = 2.0 / (self.q - 1.0);
                    k * (w.powf(2.0 * k) + (self.q - 1.0)).powf(-0.5 * gamma)
                }
            }
        }
    }

    fn tail_y(&self, w: f64) -> f64 {
        match self.tail {
            Tail::Compact { ymax } => ymax - w * (ymax - self.y_split),
            Tail::Power { k } => {
                if w <= 0.0 {
                    f64::INFINITY
                } else {
                    w.powf(-k)
                }
            }
        }
    }

    fn tail_w(&self, y: f64) -> f64 {
        match self.tail {
            Tail::Compact { ymax } => ((ymax - y) / (ymax - self.y_split)).clamp(0.0, 1.0),
            Tail::Power { k } => {
                if y.is_infinite() {
                    0.0
                } else {
                    y.powf(-1.0 / k).min(1.0)
                }
            }
        }
    }
}

fn cache_key(q: f64) -> u64 {
    q.to_bits()
}

/// `C_q = integral of e_q(-u^2) over the real line`, cached per `q`.
pub fn normalization(q: f64) -> Result<f64> {
    static CACHE: OnceLock<Mutex<HashMap<u64, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(&c) = cache.lock().unwrap().get(&cache_key(q)) {
        return Ok(c);
    }
    if !(q < 3.0) {
        return Err(Error::Domain(format!("q must be < 3, got {q}")));
    }
    let layout = Layout::new(q);
    let head = adaptive(|z| layout.head(z), 0.0, 1.0, 1e-300, 1e-13, 4000);
    let tail = adaptive(|w| layout.tail(w), 0.0, 1.0, 1e-300, 1e-13, 4000);
    let c = 2.0 * (head.value + tail.value);
    if !head.converged || !tail.converged || !c.is_finite() {
        return Err(Error::Numeric(format!(
            "normalization for q = {q} did not converge: estimate {c} +/- {} after {} panels",
            2.0 * (head.error + tail.error),
            head.panels + tail.panels
        )));
    }
    cache.lock().unwrap().insert(cache_key(q), c);
    Ok(c)
}

const SECTION_PANELS: usize = TABLE_PANELS / 2;

/// Cumulative integral of a density on `[0, 1]` at the panel nodes.
#[derive(Debug)]
struct Section {
    cum: Vec<f64>,
}

impl Section {
    fn build<F: Fn(f64) -> f64>(f: F) -> Result<Self> {
        let mut cum = Vec::with_capacity(SECTION_PANELS + 1);
        cum.push(0.0);
        let mut acc = 0.0;
        for k in 0..SECTION_PANELS {
            let a = k as f64 / SECTION_PANELS as f64;
            let b = (k + 1) as f64 / SECTION_PANELS as f64;
            let v = Self::panel(&f, k, a, b)?;
            acc += v;
            cum.push(acc);
        }
        Ok(Section { cum })
    }

    // The first panel may hold an integrable endpoint singularity.
    fn panel<F: Fn(f64) -> f64>(f: &F, k: usize, a: f64, b: f64) -> Result<f64> {
        if k > 0 {
            return Ok(gk15(f, a, b).0);
        }
        let r = adaptive(f, a, b, 1e-300, 1e-13, 500);
        if !r.converged || !r.value.is_finite() {
            return Err(Error::Numeric(format!(
                "edge panel did not converge: {} +/- {}",
                r.value, r.error
            )));
        }
        Ok(r.value)
    }

    fn total(&self) -> f64 {
        self.cum[SECTION_PANELS]
    }

    fn mass_to<F: Fn(f64) -> f64>(&self, f: &F, z: f64) -> f64 {
        if z >= 1.0 {
            return self.total();
        }
        if z <= 0.0 {
            return 0.0;
        }
        let k = ((z * SECTION_PANELS as f64) as usize).min(SECTION_PANELS - 1);
        let a = k as f64 / SECTION_PANELS as f64;
        self.cum[k] + Self::panel(f, k, a, z).unwrap_or(f64::NAN)
    }

    /// Solves `mass_to(z) = v` by safeguarded Newton inside the bracketing panel.
    fn solve<F: Fn(f64) -> f64>(&self, f: &F, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        if v >= self.total() {
            return 1.0;
        }
        let k = self
            .cum
            .partition_point(|&c| c <= v)
            .saturating_sub(1)
            .min(SECTION_PANELS - 1);
        let n = SECTION_PANELS as f64;
        let a = k as f64 / n;
        let (mut lo, mut hi) = (a, (k + 1) as f64 / n);
        let width = self.cum[k + 1] - self.cum[k];
        let mut z = if width > 0.0 {
            lo + (v - self.cum[k]) / width / n
        } else {
            lo
        };
        for _ in 0..60 {
            let phi = self.cum[k] + Self::panel(f, k, a, z).unwrap_or(f64::NAN) - v;
            if phi == 0.0 {
                break;
            }
            if phi > 0.0 {
                hi = z;
            } else {
                lo = z;
            }
            let d = f(z);
            let mut next = if d > 0.0 { z - phi / d } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let done = (next - z).abs() <= 1e-16 * z.max(1e-300) || hi - lo <= f64::EPSILON * hi;
            z = next;
            if done {
                break;
            }
        }
        z
    }
}

/// Cumulative half-mass tables for one `q`.
#[derive(Debug)]
struct HalfTable {
    layout: Layout,
    head: Section,
    tail: Section,
}

impl HalfTable {
    fn build(q: f64) -> Result<Self> {
        let layout = Layout::new(q);
        let head = Section::build(|z| layout.head(z))?;
        let tail = Section::build(|w| layout.tail(w))?;
        Ok(HalfTable { layout, head, tail })
    }

    fn get(q: f64) -> Result<Arc<HalfTable>> {
        static CACHE: OnceLock<Mutex<HashMap<u64, Arc<HalfTable>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(t) = cache.lock().unwrap().get(&cache_key(q)) {
            return Ok(Arc::clone(t));
        }
        let table = Arc::new(HalfTable::build(q)?);
        cache.lock().unwrap().insert(cache_key(q), Arc::clone(&table));
        Ok(table)
    }

    fn total(&self) -> f64 {
        self.head.total() + self.tail.total()
    }

    /// Mass in `[0, y]`, for `y <= y_split`.
    fn lower(&self, y: f64) -> f64 {
        let l = self.layout;
        self.head.mass_to(&|z| l.head(z), y / l.y_split)
    }

    /// Mass beyond `y`, for `y >= y_split`.
    fn upper(&self, y: f64) -> f64 {
        let l = self.layout;
        self.tail.mass_to(&|w| l.tail(w), l.tail_w(y))
    }

    fn y_for_lower(&self, v: f64) -> f64 {
        let l = self.layout;
        l.y_split * self.head.solve(&|z| l.head(z), v)
    }

    fn y_for_upper(&self, v: f64) -> f64 {
        let l = self.layout;
        l.tail_y(self.tail.solve(&|w| l.tail(w), v))
    }
}

/// A q-Gaussian with its normalization and cumulative table resolved.
#[derive(Debug, Clone)]
pub struct QGaussian {
    params: QGaussianParams,
    c_q: f64,
    sqrt_beta: f64,
    table: Arc<HalfTable>,
}

impl QGaussian {
    pub fn new(params: QGaussianParams) -> Result<Self> {
        let params = QGaussianParams::new(params.q, params.beta)?;
        let c_q = normalization(params.q)?;
        let table = HalfTable::get(params.q)?;
        Ok(QGaussian {
            params,
            c_q,
            sqrt_beta: params.beta.sqrt(),
            table,
        })
    }

    pub fn params(&self) -> QGaussianParams {
        self.params
    }

    pub fn normalization(&self) -> f64 {
        self.c_q
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.sqrt_beta / self.c_q * q_exponential(-self.params.beta * x * x, self.params.q)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        let y = self.sqrt_beta * x.abs();
        let t = &self.table;
        if y <= t.layout.y_split {
            let half = 0.5 * t.lower(y) / t.total();
            if x >= 0.0 {
                0.5 + half
            } else {
                0.5 - half
            }
        } else {
            let tail = 0.5 * t.upper(y) / t.total();
            if x >= 0.0 {
                1.0 - tail
            } else {
                tail
            }
        }
    }

    /// Inverse CDF on `(0, 1)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Range(format!("quantile level {u} outside (0, 1)")));
        }
        Ok(self.quantile_unchecked(u))
    }

    pub(crate) fn quantile_unchecked(&self, u: f64) -> f64 {
        let d = u - 0.5;
        if d == 0.0 {
            return 0.0;
        }
        let t = &self.table;
        let outside = 2.0 * if d < 0.0 { u } else { 1.0 - u } * t.total();
        let y = if outside <= t.tail.total() {
            t.y_for_upper(outside)
        } else {
            t.y_for_lower((2.0 * d.abs() * t.total()).min(t.head.total()))
        };
        d.signum() * y / self.sqrt_beta
    }

    /// `n` inverse-CDF draws from a ChaCha8 stream seeded with `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        self.sample_with(n, seed, Exec::auto())
    }

    pub fn sample_with(&self, n: usize, seed: u64, exec: Exec) -> Vec<f64> {
        let mut r = rng::stream(seed);
        let us: Vec<f64> = (0..n).map(|_| rng::open01(&mut r)).collect();
        exec.map_slice(&us, |&u| self.quantile_unchecked(u))
    }
}

pub fn q_gaussian_pdf(x: f64, p: QGaussianParams) -> Result<f64> {
    Ok(QGaussian::new(p)?.pdf(x))
}

pub fn q_gaussian_quantile(u: f64, p: QGaussianParams) -> Result<f64> {
    QGaussian::new(p)?.quantile(u)
}

/// Result of [`fit_q`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QFit {
    pub q: f64,
    /// Width of the fitted curve for the standardised series.
    pub beta: f64,
    /// Sum of squared log-density differences over the used bins.
    pub fit_residual: f64,
    pub n_bins: usize,
}

/// Binning and search settings for [`fit_q`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QFitConfig {
    /// Log-spaced bins over standardised magnitudes `[min_magnitude, max]`.
    pub n_bins: usize,
    pub min_magnitude: f64,
    /// Bins with fewer counts are ignored.
    pub min_count: usize,
    pub q_range: [f64; 2],
    pub q_step: f64,
}

impl Default for QFitConfig {
    fn default() -> Self {
        QFitConfig {
            n_bins: 50,
            min_magnitude: 0.02,
            min_count: 10,
            q_range: [0.0, 2.5],
            q_step: 0.05,
        }
    }
}

pub const MIN_FIT_LEN: usize = 10_000;

/// Fits `(q, beta)` to the standardised sample by least squares between
/// log histogram densities of `|z|` and log bin-averaged model densities.
pub fn fit_q(x: &[f64]) -> Result<QFit> {
    fit_q_with(x, &QFitConfig::default())
}

pub fn fit_q_with(x: &[f64], cfg: &QFitConfig) -> Result<QFit> {
    if x.len() < MIN_FIT_LEN {
        return Err(Error::Size(format!(
            "q fit needs at least {MIN_FIT_LEN} points, got {}",
            x.len()
        )));
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let sd = (x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
    if !(sd > 0.0) || !sd.is_finite() {
        return Err(Error::Domain("standard deviation is zero or non-finite".into()));
    }
    let mags: Vec<f64> = x.iter().map(|v| ((v - mean) / sd).abs()).collect();
    let max = mags.iter().cloned().fold(0.0, f64::max);
    if !(max > cfg.min_magnitude) {
        return Err(Error::Domain("histogram range is empty".into()));
    }
    let (la, lb) = (cfg.min_magnitude.ln(), (max * (1.0 + 1e-12)).ln());
    let edges: Vec<f64> = (0..=cfg.n_bins)
        .map(|i| (la + (lb - la) * i as f64 / cfg.n_bins as f64).exp())
        .collect();
    let mut counts = vec![0usize; cfg.n_bins];
    for &m in &mags {
        if m < edges[0] {
            continue;
        }
        let k = (((m.ln() - la) / (lb - la)) * cfg.n_bins as f64) as usize;
        counts[k.min(cfg.n_bins - 1)] += 1;
    }
    let bins: Vec<(f64, f64, f64)> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c >= cfg.min_count)
        .map(|(k, &c)| {
            let (a, b) = (edges[k], edges[k + 1]);
            (a, b, (c as f64 / (2.0 * n * (b - a))).ln())
        })
        .collect();
    if bins.len() < 3 {
        return Err(Error::Domain(format!(
            "degenerate histogram: {} usable bins",
            bins.len()
        )));
    }

    let objective = |q: f64, beta: f64| -> f64 {
        let Ok(g) = QGaussian::new(QGaussianParams { q, beta }) else {
            return f64::INFINITY;
        };
        bins.iter()
            .map(|&(a, b, ld)| {
                let m = (g.cdf(b) - g.cdf(a)) / (b - a);
                if m > 0.0 {
                    (ld - m.ln()).powi(2)
                } else {
                    f64::INFINITY
                }
            })
            .sum()
    };
    let best_beta = |q: f64| -> (f64, f64) {
        let (lo, hi) = ((1e-2f64).ln(), (1e2f64).ln());
        let mut best = (f64::INFINITY, 0.0);
        let steps = 24;
        for i in 0..=steps {
            let lb = lo + (hi - lo) * i as f64 / steps as f64;
            let v = objective(q, lb.exp());
            if v < best.0 {
                best = (v, lb);
            }
        }
        let h = (hi - lo) / steps as f64;
        let lb = golden_min(|l| objective(q, l.exp()), best.1 - h, best.1 + h, 1e-7);
        (objective(q, lb.exp()), lb.exp())
    };

    let [qlo, qhi] = cfg.q_range;
    let steps = ((qhi - qlo) / cfg.q_step).round() as usize;
    let mut best = (f64::INFINITY, qlo);
    for i in 0..=steps {
        let q = qlo + i as f64 * cfg.q_step;
        let (v, _) = best_beta(q);
        if v < best.0 {
            best = (v, q);
        }
    }
    if !best.0.is_finite() {
        return Err(Error::Domain("no q in range gives a finite objective".into()));
    }
    let q = golden_min(
        |q| best_beta(q).0,
        (best.1 - cfg.q_step).max(qlo),
        (best.1 + cfg.q_step).min(qhi),
        1e-5,
    );
    let (fit_residual, beta) = best_beta(q);
    Ok(QFit {
        q,
        beta,
        fit_residual,
        n_bins: bins.len(),
    })
}
