use mfcca::cascade::{binomial_cascade, cascade_h_theory, gaussian_noise, CascadeSpec};
use mfcca::grid::log_spaced_integers;
use mfcca::mfdfa::{
    cross_surfaces, cross_surfaces_with, detrended_covariance, detrended_segments, fluctuation_surface,
    fluctuation_surface_with, segment_count, segment_start, MfConfig,
};
use mfcca::regress::fit_line;
use mfcca::Exec;

fn slope(s: &[usize], f: &[f64]) -> f64 {
    let lx: Vec<f64> = s.iter().map(|&v| (v as f64).ln()).collect();
    let ly: Vec<f64> = f.iter().map(|v| v.ln()).collect();
    fit_line(&lx, &ly).unwrap().slope
}

#[test]
fn zero_series_has_zero_profiles() {
    let segs = detrended_segments(&vec![0.0; 1000], 50, 2).unwrap();
    assert_eq!(segs.len(), 40);
    assert!(segs.iter().flatten().all(|&v| v == 0.0));
}

#[test]
fn constant_returns_are_fully_detrended() {
    let x = vec![0.37; 5000];
    for m in 1..=3 {
        for s in [10, 64, 500] {
            let segs = detrended_segments(&x, s, m).unwrap();
            let worst = segs.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
            assert!(worst <= 1e-10, "m = {m}, s = {s}: {worst}");
        }
    }
}

#[test]
fn segments_come_from_both_ends() {
    assert_eq!(segment_count(10, 4), 4);
    let starts: Vec<usize> = (0..4).map(|nu| segment_start(10, 4, nu)).collect();
    // 1-based {1..4, 5..8} from the head, {7..10, 3..6} from the tail
    assert_eq!(starts, vec![0, 4, 6, 2]);
}

#[test]
fn covariance_is_bilinear() {
    let x = gaussian_noise(4096, 1);
    let neg: Vec<f64> = x.iter().map(|v| -v).collect();
    for nu in [0, 7, 100] {
        let v = detrended_covariance(&x, &x, 32, nu, 2).unwrap();
        assert!(v >= 0.0);
        assert_eq!(detrended_covariance(&x, &neg, 32, nu, 2).unwrap(), -v);
    }
    assert!(detrended_covariance(&x, &x[1..], 32, 0, 2).is_err());
}

#[test]
fn independent_covariances_average_to_zero() {
    let t = 4096;
    let s = 32;
    let mut means = Vec::new();
    for seed in 0..100 {
        let x = gaussian_noise(t, 2 * seed);
        let y = gaussian_noise(t, 2 * seed + 1);
        let m = segment_count(t, s);
        let sum: f64 = (0..m).map(|nu| detrended_covariance(&x, &y, s, nu, 2).unwrap()).sum();
        means.push(sum / m as f64);
    }
    let n = means.len() as f64;
    let mean = means.iter().sum::<f64>() / n;
    let se = (means.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() / n.sqrt();
    assert!(mean.abs() < 3.0 * se, "{mean} +/- {se}");
}

#[test]
fn white_noise_slope_is_one_half() {
    let x = gaussian_noise(1 << 16, 3);
    let cfg = MfConfig {
        s_grid: log_spaced_integers(32, 4096, 30),
        ..MfConfig::for_length(x.len())
    };
    let surf = fluctuation_surface(&x, &cfg).unwrap();
    let h = slope(&surf.s_grid, surf.row(2.0).unwrap());
    assert!((h - 0.5).abs() < 0.03, "{h}");
}

#[test]
fn cascade_slope_matches_theory() {
    let x = binomial_cascade(&CascadeSpec {
        p: 0.6,
        levels: 16,
        seed: 1,
        randomize_sign: false,
    })
    .unwrap();
    let cfg = MfConfig::for_length(x.len());
    let surf = fluctuation_surface(&x, &cfg).unwrap();
    let h = slope(&surf.s_grid, surf.row(2.0).unwrap());
    let e = cascade_h_theory(0.6, 2.0);
    assert!((e - 0.9717).abs() < 1e-4);
    assert!((h - e).abs() < 0.05, "{h} vs {e}");
}

#[test]
fn positive_moments_grow_with_scale() {
    let x = gaussian_noise(1 << 16, 4);
    let surf = fluctuation_surface(&x, &MfConfig::for_length(x.len())).unwrap();
    for (r, row) in surf.r_grid.iter().zip(&surf.values) {
        if *r > 0.0 {
            assert!(row.windows(2).all(|w| w[1] > w[0]), "r = {r}");
        }
    }
}

#[test]
fn moments_are_ordered() {
    let x = binomial_cascade(&CascadeSpec {
        p: 0.7,
        levels: 14,
        seed: 2,
        randomize_sign: true,
    })
    .unwrap();
    let surf = fluctuation_surface(&x, &MfConfig::for_length(x.len())).unwrap();
    for j in 0..surf.s_grid.len() {
        for i in 1..surf.r_grid.len() {
            let (a, b) = (surf.values[i - 1][j], surf.values[i][j]);
            assert!(b >= a - 1e-12 * a, "s = {}, r = {}", surf.s_grid[j], surf.r_grid[i]);
        }
    }
}

#[test]
fn amplitude_scales_fluctuations() {
    let x = gaussian_noise(1 << 14, 5);
    let x2: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
    let cfg = MfConfig::for_length(x.len());
    let a = fluctuation_surface(&x, &cfg).unwrap();
    let b = fluctuation_surface(&x2, &cfg).unwrap();
    for (ra, rb) in a.values.iter().zip(&b.values) {
        for (va, vb) in ra.iter().zip(rb) {
            assert!((vb / va - 2.0).abs() < 1e-9);
        }
    }
}

#[test]
fn bivariate_reduces_to_univariate() {
    let x = gaussian_noise(1 << 14, 6);
    let cfg = MfConfig::for_length(x.len());
    let uni = fluctuation_surface(&x, &cfg).unwrap();
    let cs = cross_surfaces(&x, &x, &cfg).unwrap();
    assert_eq!(cs.xy.values, uni.values);
    assert_eq!(cs.xx.values, uni.values);
    assert_eq!(cs.yy.values, uni.values);
}

#[test]
fn bivariate_is_symmetric() {
    let x = gaussian_noise(1 << 14, 7);
    let y: Vec<f64> = gaussian_noise(1 << 14, 8)
        .iter()
        .zip(&x)
        .map(|(a, b)| a + 0.5 * b)
        .collect();
    let cfg = MfConfig::for_length(x.len());
    let xy = cross_surfaces(&x, &y, &cfg).unwrap();
    let yx = cross_surfaces(&y, &x, &cfg).unwrap();
    assert_eq!(xy.xy.values, yx.xy.values);
    assert_eq!(xy.xx.values, yx.yy.values);
}

#[test]
fn schedule_does_not_change_results() {
    let x = gaussian_noise(1 << 15, 9);
    let y = gaussian_noise(1 << 15, 10);
    let cfg = MfConfig::for_length(x.len());
    assert_eq!(
        fluctuation_surface_with(&x, &cfg, Exec::Sequential).unwrap(),
        fluctuation_surface_with(&x, &cfg, Exec::Parallel).unwrap()
    );
    assert_eq!(
        cross_surfaces_with(&x, &y, &cfg, Exec::Sequential).unwrap(),
        cross_surfaces_with(&x, &y, &cfg, Exec::Parallel).unwrap()
    );
}

#[test]
fn zero_runs_invalidate_negative_moments() {
    // long stretches of exact zeros, as in illiquid minutes
    let mut x = gaussian_noise(20_000, 11);
    for (i, v) in x.iter_mut().enumerate() {
        if (i / 400) % 3 == 0 {
            *v = 0.0;
        }
    }
    let cfg = MfConfig {
        s_grid: log_spaced_integers(20, 500, 10),
        ..MfConfig::for_length(x.len())
    };
    let surf = fluctuation_surface(&x, &cfg).unwrap();
    let d = &surf.diagnostics[0];
    assert!(d.excluded_segments > 0 && !d.valid);
    let neg = surf.r_grid.iter().position(|&r| r == -2.0).unwrap();
    let pos = surf.r_grid.iter().position(|&r| r == 2.0).unwrap();
    assert!(surf.values[neg][0].is_nan());
    assert!(surf.values[pos][0].is_finite());
    assert!(surf.diagnostics.last().unwrap().valid);
}

#[test]
fn nan_input_is_a_numeric_error() {
    let mut x = gaussian_noise(5000, 12);
    x[1234] = f64::NAN;
    let err = fluctuation_surface(&x, &MfConfig::for_length(x.len())).unwrap_err();
    assert_eq!(err.class().exit_code(), 5);
    assert!(err.to_string().contains("segment"));
}

#[test]
fn surface_csv_is_long_format() {
    let x = gaussian_noise(4000, 13);
    let surf = fluctuation_surface(&x, &MfConfig::for_length(x.len())).unwrap();
    let csv = surf.to_csv();
    assert!(csv.starts_with("r,s,F\n"));
    assert_eq!(csv.lines().count(), 1 + surf.r_grid.len() * surf.s_grid.len());
}
