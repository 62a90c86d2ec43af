use mfcca::cascade::{fgn, gaussian_noise};
use mfcca::rng;
use mfcca::stats::{acf, ccdf, default_lags, fit_acf_decay, fit_tail, TailModel, TailWindow};
use statrs::distribution::{ContinuousCDF, Normal};

fn pareto(n: usize, gamma: f64, seed: u64) -> Vec<f64> {
    let mut r = rng::stream(seed);
    (0..n).map(|_| rng::open01(&mut r).powf(-1.0 / gamma)).collect()
}

fn weibull(n: usize, beta: f64, seed: u64) -> Vec<f64> {
    let mut r = rng::stream(seed);
    (0..n).map(|_| (-rng::open01(&mut r).ln()).powf(1.0 / beta)).collect()
}

fn ccdf_at(x: &[f64], p: &[f64], at: f64) -> f64 {
    let i = x.partition_point(|&v| v <= at);
    p[i - 1]
}

#[test]
fn iid_acf_stays_in_null_band() {
    let t = 100_000;
    let band = 3.0 / (t as f64).sqrt();
    let lags = default_lags(t);
    let (mut inside, mut total) = (0, 0);
    for seed in 0..100 {
        let a = acf(&gaussian_noise(t, seed), &lags).unwrap();
        for (&lag, &v) in a.lags.iter().zip(&a.values) {
            if lag >= 1 {
                total += 1;
                inside += (v.abs() < band) as usize;
            }
        }
    }
    let freq = inside as f64 / total as f64;
    assert!(freq >= 0.99, "{freq}");
}

#[test]
fn alternating_series_is_anticorrelated() {
    let x: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let a = acf(&x, &[0, 1, 2]).unwrap();
    assert_eq!(a.values[0], 1.0);
    assert!((a.values[1] + 1.0).abs() <= 1.0 / 1000.0 + 1e-12);
    assert!((a.values[2] - 1.0).abs() <= 2.0 / 1000.0 + 1e-12);
}

#[test]
fn normal_ccdf_matches_two_sided_tail() {
    let x = gaussian_noise(1_000_000, 2);
    let c = ccdf(&x, false).unwrap();
    let expected = 2.0 * (1.0 - Normal::new(0.0, 1.0).unwrap().cdf(1.96));
    let got = ccdf_at(&c.x, &c.p, 1.96);
    assert!((got - expected).abs() < 0.002, "{got} vs {expected}");
    assert!((got - 0.05).abs() < 0.002);
}

#[test]
fn ccdf_is_a_survival_function() {
    let x = gaussian_noise(10_000, 9);
    let c = ccdf(&x, true).unwrap();
    assert!(c.p.windows(2).all(|w| w[1] <= w[0]));
    assert!(c.x.windows(2).all(|w| w[1] > w[0]));
    assert!(c.p.iter().all(|&p| (0.0..=1.0).contains(&p)));
    assert_eq!(*c.p.last().unwrap(), 0.0);
}

#[test]
fn pareto_tail_exponent() {
    let x = pareto(1_000_000, 3.0, 5);
    let c = ccdf(&x, false).unwrap();
    let fit = fit_tail(&c, TailModel::PowerLaw, TailWindow::TopFraction { fraction: 0.1 }).unwrap();
    assert!((2.85..=3.15).contains(&fit.exponent), "{fit:?}");
    assert!(fit.clipped_zeros <= 1);
}

#[test]
fn weibull_stretched_exponent() {
    let x = weibull(1_000_000, 0.5, 6);
    let c = ccdf(&x, false).unwrap();
    let fit = fit_tail(
        &c,
        TailModel::StretchedExponential,
        TailWindow::TopFraction { fraction: 0.5 },
    )
    .unwrap();
    assert!((fit.exponent - 0.5).abs() < 0.03, "{fit:?}");
}

// Parametric bootstrap: refit replicas drawn from the fitted model. The
// standard error is the spread of the replica estimates.
#[test]
fn tail_fit_bootstrap_is_consistent() {
    let window = TailWindow::TopFraction { fraction: 0.1 };
    let base = fit_tail(
        &ccdf(&pareto(100_000, 3.0, 77), false).unwrap(),
        TailModel::PowerLaw,
        window,
    )
    .unwrap();
    let reps: Vec<f64> = (0..50)
        .map(|seed| {
            let c = ccdf(&pareto(100_000, base.exponent, 1000 + seed), false).unwrap();
            fit_tail(&c, TailModel::PowerLaw, window).unwrap().exponent
        })
        .collect();
    let m = reps.iter().sum::<f64>() / 50.0;
    let se = (reps.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / 49.0).sqrt();
    let hits = reps.iter().filter(|v| (*v - base.exponent).abs() <= 2.0 * se).count();
    assert!(hits >= 45, "{hits} of 50 (gamma {}, se {se})", base.exponent);
}

#[test]
fn volatility_of_fgn_decays_slowly() {
    let x = fgn(1 << 20, 0.9, 4).unwrap();
    let v: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    let a = acf(&v, &default_lags(v.len())).unwrap();
    let d = fit_acf_decay(&a, 1, 1000).unwrap();
    assert!(d.exponent > -0.5 && d.exponent < 0.0, "{d:?}");
}

#[test]
fn fgn_half_is_uncorrelated() {
    let x = fgn(1 << 16, 0.5, 12).unwrap();
    let a = acf(&x, &[1]).unwrap();
    assert!(a.values[0].abs() < 3.0 / ((1 << 16) as f64).sqrt());
}

#[test]
fn fgn_has_target_autocovariance() {
    let h = 0.7;
    let (mut acc1, mut acc10) = (0.0, 0.0);
    let reps = 20;
    for seed in 0..reps {
        let x = fgn(1 << 14, h, seed).unwrap();
        let a = acf(&x, &[1, 10]).unwrap();
        acc1 += a.values[0];
        acc10 += a.values[1];
    }
    let e = |k: usize| mfcca::cascade::fgn_autocovariance(k, h);
    assert!((acc1 / reps as f64 - e(1)).abs() < 0.02);
    assert!((acc10 / reps as f64 - e(10)).abs() < 0.03);
}
