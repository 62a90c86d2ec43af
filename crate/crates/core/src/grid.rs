//! Scale, lag and moment-order grids.

/// `count` integers spaced evenly in log between `lo` and `hi` (inclusive),
/// with duplicates from rounding removed.
pub fn log_spaced_integers(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    if count == 0 || hi < lo {
        return Vec::new();
    }
    if count == 1 || hi == lo {
        return vec![lo];
    }
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut out: Vec<usize> = (0..count)
        .map(|i| {
            let t = i as f64 / (count - 1) as f64;
            ((a + t * (b - a)).exp().round() as usize).clamp(lo, hi)
        })
        .collect();
    out.dedup();
    out
}

/// Moment orders `lo, lo + step, ..., hi`, generated from integer multiples
/// so that `0` lands exactly on zero.
pub fn moment_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let k_lo = (lo / step).round() as i64;
    let k_hi = (hi / step).round() as i64;
    // exact for step = 1/n
    let inv = 1.0 / step;
    (k_lo..=k_hi)
        .map(|k| {
            if (inv - inv.round()).abs() < 1e-12 {
                k as f64 / inv.round()
            } else {
                k as f64 * step
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_grid_endpoints_and_order() {
        let g = log_spaced_integers(50, 3276, 40);
        assert_eq!(g[0], 50);
        assert_eq!(*g.last().unwrap(), 3276);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        let lags = log_spaced_integers(1, 100_000, 50);
        assert_eq!(lags[0], 1);
        assert!(lags.len() < 50);
    }

    #[test]
    fn default_moment_grid() {
        let r = moment_grid(-4.0, 4.0, 0.2);
        assert_eq!(r.len(), 41);
        assert_eq!(r[0], -4.0);
        assert_eq!(r[20], 0.0);
        assert_eq!(r[30], 2.0);
        assert_eq!(r[40], 4.0);
    }
}
