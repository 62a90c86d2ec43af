use mfcca::cascade::gaussian_noise;
use mfcca::grid::{log_spaced_integers, moment_grid};
use mfcca::mfdfa::{
    cross_surfaces, fluctuation_surface, fluctuation_surface_with, FluctuationSurface, MfConfig, SurfaceKind,
};
use mfcca::spectrum::{fit_scaling, legendre_spectrum, rho_r, ScalingOptions};
use mfcca::Exec;
use proptest::prelude::*;

fn small_config() -> MfConfig {
    MfConfig {
        r_grid: moment_grid(-4.0, 4.0, 0.5),
        s_grid: log_spaced_integers(16, 200, 8),
        ..MfConfig::for_length(4000)
    }
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (a.abs() + b.abs()).max(1e-300)
}

fn power_surface(h: impl Fn(f64) -> f64) -> FluctuationSurface {
    let r_grid = moment_grid(-4.0, 4.0, 0.2);
    let s_grid = log_spaced_integers(50, 5000, 30);
    let values = r_grid
        .iter()
        .map(|&r| s_grid.iter().map(|&s| 1.3 * (s as f64).powf(h(r))).collect())
        .collect();
    FluctuationSurface {
        kind: SurfaceKind::UnivariateX,
        r_grid,
        s_grid,
        values,
        series_length: 100_000,
        poly_degree: 2,
        diagnostics: Vec::new(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn schedules_agree_bitwise(seed in any::<u64>()) {
        let x = gaussian_noise(4000, seed);
        let cfg = small_config();
        let a = fluctuation_surface_with(&x, &cfg, Exec::Sequential).unwrap();
        let b = fluctuation_surface_with(&x, &cfg, Exec::Parallel).unwrap();
        prop_assert_eq!(a.values, b.values);
    }

    #[test]
    fn amplitude_factors_out(seed in any::<u64>(), c in 0.01f64..100.0) {
        let x = gaussian_noise(4000, seed);
        let y: Vec<f64> = x.iter().map(|v| c * v).collect();
        let cfg = small_config();
        let a = fluctuation_surface(&x, &cfg).unwrap();
        let b = fluctuation_surface(&y, &cfg).unwrap();
        for (ra, rb) in a.values.iter().zip(&b.values) {
            for (fa, fb) in ra.iter().zip(rb) {
                prop_assert!(close(c * fa, *fb, 1e-9), "{} vs {}", c * fa, fb);
            }
        }
    }

    #[test]
    fn drift_is_detrended(seed in any::<u64>(), mu in -10.0f64..10.0) {
        let x = gaussian_noise(4000, seed);
        let y: Vec<f64> = x.iter().map(|v| v + mu).collect();
        let cfg = small_config();
        let a = fluctuation_surface(&x, &cfg).unwrap();
        let b = fluctuation_surface(&y, &cfg).unwrap();
        for (i, &r) in cfg.r_grid.iter().enumerate() {
            if r > 0.0 {
                for (fa, fb) in a.values[i].iter().zip(&b.values[i]) {
                    prop_assert!(close(*fa, *fb, 1e-6), "r = {}: {} vs {}", r, fa, fb);
                }
            }
        }
    }

    #[test]
    fn rho_is_symmetric_and_unit_on_the_diagonal(s1 in any::<u64>(), s2 in any::<u64>()) {
        let x = gaussian_noise(4000, s1);
        let y = gaussian_noise(4000, s2);
        let cfg = small_config();
        let c = cross_surfaces(&x, &y, &cfg).unwrap();
        let d = cross_surfaces(&y, &x, &cfg).unwrap();
        let a = rho_r(&c.xy, &c.xx, &c.yy).unwrap();
        let b = rho_r(&d.xy, &d.xx, &d.yy).unwrap();
        prop_assert_eq!(a.values, b.values);
        let id = rho_r(&c.xx, &c.xx, &c.xx).unwrap();
        prop_assert!(id.values.iter().flatten().all(|v| *v == Some(1.0)));
    }

    #[test]
    fn spectrum_of_a_smooth_hurst_curve(a in 0.3f64..0.9, b in 0.01f64..0.3, c in 1.0f64..4.0) {
        let h = |r: f64| a - b * (r / c).tanh();
        let fit = fit_scaling(&power_surface(h), &ScalingOptions::default()).unwrap();
        for f in &fit.fits {
            prop_assert!((f.exponent.unwrap() - h(f.r)).abs() < 1e-9);
        }
        let sp = legendre_spectrum(&fit).unwrap();
        prop_assert!(sp.f_alpha.iter().all(|&f| f <= 1.0 + 1e-9));
        prop_assert!((sp.alpha0 - a).abs() < 1e-6);
        prop_assert!(sp.delta_alpha > 0.0);
        prop_assert!(sp.delta_alpha_left >= 0.0 && sp.delta_alpha_right >= 0.0);
    }
}
