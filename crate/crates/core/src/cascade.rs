//! Synthetic series with known scaling, used as ground truth.

use std::f64::consts::LN_2;

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{num_complex::Complex64, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

pub const MAX_LEVELS: u32 = 26;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadeSpec {
    pub p: f64,
    pub levels: u32,
    pub seed: u64,
    #[serde(default)]
    pub randomize_sign: bool,
}

impl CascadeSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 0.5 && self.p < 1.0) {
            return Err(Error::Config(format!("cascade weight p = {} outside [0.5, 1)", self.p)));
        }
        if self.levels == 0 || self.levels > MAX_LEVELS {
            return Err(Error::Config(format!(
                "cascade levels {} outside 1..={MAX_LEVELS}",
                self.levels
            )));
        }
        Ok(())
    }
}

/// Binomial multiplicative cascade on `2^levels` cells.
///
/// Each split hands weight `p` to a randomly chosen half and `1 - p` to the
/// other. With `randomize_sign` every cell's sign is then flipped by a fair
/// coin. `p = 0.5` is accepted and yields the uniform measure.
pub fn binomial_cascade(spec: &CascadeSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let mut r = rng::stream(spec.seed);
    let n = 1usize << spec.levels;
    let mut cells = Vec::with_capacity(n);
    cells.push(1.0f64);
    let q = 1.0 - spec.p;
    for _ in 0..spec.levels {
        let mut next = Vec::with_capacity(cells.len() * 2);
        let mut bits = 0u64;
        for (i, &m) in cells.iter().enumerate() {
            if i % 64 == 0 {
                bits = r.next_u64();
            }
            let (a, b) = if bits & 1 == 1 { (spec.p, q) } else { (q, spec.p) };
            bits >>= 1;
            next.push(m * a);
            next.push(m * b);
        }
        cells = next;
    }
    if spec.randomize_sign {
        let mut bits = 0u64;
        for (i, c) in cells.iter_mut().enumerate() {
            if i % 64 == 0 {
                bits = r.next_u64();
            }
            if bits & 1 == 1 {
                *c = -*c;
            }
            bits >>= 1;
        }
    }
    Ok(cells)
}

/// Generalized Hurst exponent of the binomial cascade:
/// `h(r) = 1/r - ln(p^r + (1-p)^r) / (r ln 2)`, continuous at `r = 0`.
pub fn cascade_h_theory(p: f64, r: f64) -> f64 {
    let q = 1.0 - p;
    if r.abs() < 1e-8 {
        return -(p.ln() + q.ln()) / (2.0 * LN_2);
    }
    1.0 / r - (p.powf(r) + q.powf(r)).ln() / (r * LN_2)
}

/// `tau(r) = r h(r) - 1 = -ln(p^r + (1-p)^r) / ln 2`.
pub fn cascade_tau_theory(p: f64, r: f64) -> f64 {
    -((p.powf(r) + (1.0 - p).powf(r)).ln()) / LN_2
}

/// Hölder exponent `alpha(r) = tau'(r)`.
pub fn cascade_alpha_theory(p: f64, r: f64) -> f64 {
    let q = 1.0 - p;
    let (a, b) = (p.powf(r), q.powf(r));
    -(a * p.ln() + b * q.ln()) / ((a + b) * LN_2)
}

/// Independent standard normal draws.
pub fn gaussian_noise(len: usize, seed: u64) -> Vec<f64> {
    let mut r = rng::stream(seed);
    (0..len).map(|_| StandardNormal.sample(&mut r)).collect()
}

/// Autocovariance of unit-variance fractional Gaussian noise.
pub fn fgn_autocovariance(k: usize, hurst: f64) -> f64 {
    let k = k as f64;
    let e = 2.0 * hurst;
    0.5 * ((k + 1.0).powf(e) - 2.0 * k.powf(e) + (k - 1.0).abs().powf(e))
}

/// Fractional Gaussian noise by circulant embedding (Davies–Harte).
pub fn fgn(len: usize, hurst: f64, seed: u64) -> Result<Vec<f64>> {
    if len < 2 {
        return Err(Error::Size(format!("fgn length must be >= 2, got {len}")));
    }
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(Error::Config(format!("Hurst exponent {hurst} outside (0, 1)")));
    }
    let m = 2 * len.next_power_of_two();
    let half = m / 2;
    let mut row: Vec<Complex64> = (0..m)
        .map(|j| {
            let k = if j <= half { j } else { m - j };
            Complex64::new(fgn_autocovariance(k, hurst), 0.0)
        })
        .collect();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m);
    fft.process(&mut row);
    let scale = row.iter().map(|c| c.re.abs()).fold(0.0, f64::max);
    let mut sqrt_eig = Vec::with_capacity(m);
    for (j, c) in row.iter().enumerate() {
        if c.re < -1e-10 * scale {
            return Err(Error::Numeric(format!(
                "circulant embedding failed for H = {hurst}: eigenvalue {} at {j}",
                c.re
            )));
        }
        sqrt_eig.push((c.re.max(0.0) / m as f64).sqrt());
    }
    let mut r = rng::stream(seed);
    let mut w: Vec<Complex64> = sqrt_eig
        .iter()
        .map(|&s| {
            let a: f64 = StandardNormal.sample(&mut r);
            let b: f64 = StandardNormal.sample(&mut r);
            Complex64::new(s * a, s * b)
        })
        .collect();
    fft.process(&mut w);
    Ok(w[..len].iter().map(|c| c.re).collect())
}
