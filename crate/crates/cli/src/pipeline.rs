//! The analyses behind the subcommands.
//!
//! Each command loads its inputs, cuts them into the configured periods and
//! writes plain CSV/JSON under `<output_dir>/<command>/`. Failures inside a
//! period (a fit without a scaling window, a degenerate ACF, ...) are
//! recorded and the remaining outputs are still written; the first failure
//! decides the exit code.

use std::path::{Path, PathBuf};

use mfcca::cascade::{binomial_cascade, fgn, gaussian_noise, CascadeSpec};
use mfcca::mfdfa::{cross_surfaces_with, fluctuation_surface_with, FluctuationSurface, MfConfig};
use mfcca::series::{load_prices, load_values, log_returns, window_by_period, write_values, ReturnSeries};
use mfcca::spectrum::{
    average_hurst, fit_scaling, legendre_spectrum, rho_r_with, tau_function, ScalingFit, SingularitySpectrum,
};
use mfcca::stats::{acf, ccdf, default_lags, fit_acf_decay, fit_tail, DecayFit, TailFit, TailModel};
use mfcca::surrogate::SurrogateSpec;
use mfcca::{rng, Exec};
use serde::{Deserialize, Serialize};

use crate::config::{InputKind, InputSpec, RunConfig};
use crate::error::{CliError, CliResult, Context};
use crate::output::{opt, path_label, sha256_hex, Csv, OutputDir, WrittenFile};
use crate::report;

pub const ALL_PERIODS: &str = "all";
pub const ORIGINAL: &str = "original";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub context: String,
    pub message: String,
    pub exit_code: i32,
}

/// The error text without its context prefix.
fn message(err: &CliError) -> String {
    match err {
        CliError::Core { source, .. } => source.to_string(),
        other => other.to_string(),
    }
}

impl Failure {
    fn new(err: CliError) -> Self {
        let exit_code = err.exit_code();
        match err {
            CliError::Core { context, source } => Failure {
                context,
                message: source.to_string(),
                exit_code,
            },
            other => Failure {
                context: String::new(),
                message: other.to_string(),
                exit_code,
            },
        }
    }
}

/// What a command produced.
#[derive(Debug)]
pub struct Outcome {
    pub root: PathBuf,
    pub files: Vec<WrittenFile>,
    pub failures: Vec<Failure>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        self.failures.first().map_or(0, |f| f.exit_code)
    }
}

#[derive(Default)]
struct Failures(Vec<Failure>);

impl Failures {
    /// Keeps the value, or records the error and yields `None`.
    fn take<T>(&mut self, r: CliResult<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.0.push(Failure::new(e));
                None
            }
        }
    }
}

/// One input restricted to one period.
#[derive(Debug, Clone)]
pub struct Piece {
    pub input: String,
    pub period: String,
    pub series: ReturnSeries,
    pub filled_gaps: usize,
}

fn open(spec: &InputSpec) -> CliResult<std::fs::File> {
    std::fs::File::open(&spec.path).map_err(|e| CliError::io(&spec.path, e))
}

/// Loads `spec` and splits it into the configured periods.
pub fn load_pieces(spec: &InputSpec, cfg: &RunConfig) -> CliResult<Vec<Piece>> {
    let label = spec.label();
    let file = spec.path.display().to_string();
    let bounds: Vec<(String, Option<(i64, i64)>)> = if cfg.periods.is_empty() {
        vec![(ALL_PERIODS.to_string(), None)]
    } else {
        cfg.periods
            .iter()
            .map(|p| p.bounds().map(|b| (p.label.clone(), Some(b))))
            .collect::<CliResult<_>>()?
    };
    let mut out = Vec::new();
    match spec.kind {
        InputKind::Prices => {
            let prices = load_prices(open(spec)?, &spec.format).context(|| file.clone())?;
            for (period, b) in bounds {
                let ctx = || format!("{file} [{period}]");
                let p = match b {
                    Some((lo, hi)) => window_by_period(&prices, lo, hi).context(ctx)?,
                    None => prices.clone(),
                };
                out.push(Piece {
                    input: label.clone(),
                    series: log_returns(&p).context(ctx)?,
                    filled_gaps: p.filled_gaps(),
                    period,
                });
            }
        }
        InputKind::Values => {
            let values = load_values(open(spec)?, &spec.format).context(|| file.clone())?;
            for (period, b) in bounds {
                let series = match b {
                    Some((lo, hi)) => window_by_period(&values, lo, hi).context(|| format!("{file} [{period}]"))?,
                    None => values.clone(),
                };
                out.push(Piece {
                    input: label.clone(),
                    period,
                    series,
                    filled_gaps: 0,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct InputRecord {
    label: String,
    path: PathBuf,
    bytes: u64,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema_version: u32,
    tool: String,
    command: &'a str,
    rng: &'a str,
    /// Effective configuration, defaults filled in; `--config` accepts this
    /// file directly.
    config: &'a RunConfig,
    inputs: Vec<InputRecord>,
    /// Per-period values that depend on the data (e.g. the scale grid).
    resolved: Vec<serde_json::Value>,
    outputs: Vec<WrittenFile>,
    failures: &'a [Failure],
}

/// Absolute input paths, so the manifest re-runs from anywhere.
fn pinned(cfg: &RunConfig) -> CliResult<RunConfig> {
    let mut cfg = cfg.clone();
    for input in &mut cfg.inputs {
        input.path = std::fs::canonicalize(&input.path).map_err(|e| CliError::io(&input.path, e))?;
        input.label = Some(input.label());
    }
    Ok(cfg)
}

fn finish(
    command: &str,
    cfg: &RunConfig,
    mut out: OutputDir,
    resolved: Vec<serde_json::Value>,
    failures: Failures,
) -> CliResult<Outcome> {
    let mut inputs = Vec::new();
    for i in &cfg.inputs {
        let bytes = std::fs::read(&i.path).map_err(|e| CliError::io(&i.path, e))?;
        inputs.push(InputRecord {
            label: i.label(),
            path: i.path.clone(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(&bytes),
        });
    }
    let manifest = Manifest {
        schema_version: cfg.schema_version,
        tool: format!("mfcca {}", env!("CARGO_PKG_VERSION")),
        command,
        rng: rng::GENERATOR_NAME,
        config: cfg,
        inputs,
        resolved,
        outputs: out.written(),
        failures: &failures.0,
    };
    out.write_json("manifest.json", &manifest)?;
    Ok(Outcome {
        root: out.root().to_path_buf(),
        files: out.written(),
        failures: failures.0,
    })
}

fn need_inputs(cfg: &RunConfig, command: &str) -> CliResult<()> {
    if cfg.inputs.is_empty() {
        return Err(CliError::Config(format!("{command}: no inputs given")));
    }
    Ok(())
}

// ---------------------------------------------------------------- stats

/// One row of the basic-statistics table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub input: String,
    pub period: String,
    pub n_returns: usize,
    pub sampling_interval: i64,
    pub filled_gaps: usize,
    pub zero_returns: usize,
    pub power_law: Option<TailFit>,
    pub stretched_exponential: Option<TailFit>,
    pub acf_decay: Option<DecayFit>,
    pub errors: Vec<String>,
}

pub fn cmd_stats(cfg: &RunConfig) -> CliResult<Outcome> {
    cfg.validate()?;
    need_inputs(cfg, "stats")?;
    let cfg = pinned(cfg)?;
    let mut out = OutputDir::new(cfg.output_dir().join("stats"))?;
    let mut failures = Failures::default();
    let mut rows = Vec::new();
    let mut resolved = Vec::new();
    let st = &cfg.stats;
    for spec in &cfg.inputs {
        for piece in load_pieces(spec, &cfg)? {
            let x = piece.series.values();
            let dir = format!("{}/{}", path_label(&piece.input), path_label(&piece.period));
            let ctx = |what: &str| format!("{} [{}] {what}", piece.input, piece.period);
            let before = failures.0.len();
            let lags = st.acf_lags.clone().unwrap_or_else(|| default_lags(x.len()));
            resolved.push(serde_json::json!({
                "input": piece.input, "period": piece.period, "n_returns": x.len(), "acf_lags": lags,
            }));

            let mut power = None;
            let mut stretched = None;
            if let Some(c) = failures.take(ccdf(x, st.normalize).context(|| ctx("ccdf"))) {
                let mut csv = Csv::new(&["x", "p"]);
                for (a, p) in c.x.iter().zip(&c.p) {
                    csv.row(&[a.to_string(), p.to_string()]);
                }
                out.write(&format!("{dir}/ccdf.csv"), &csv.into_bytes())?;
                power = failures
                    .take(fit_tail(&c, TailModel::PowerLaw, st.power_law_window).context(|| ctx("power-law fit")));
                stretched = failures.take(
                    fit_tail(&c, TailModel::StretchedExponential, st.stretched_window)
                        .context(|| ctx("stretched-exponential fit")),
                );
            }

            let mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
            let mut decay = None;
            if let Some(a) = failures.take(acf(&mags, &lags).context(|| ctx("acf of |returns|"))) {
                let mut csv = Csv::new(&["lag", "acf"]);
                for (l, v) in a.lags.iter().zip(&a.values) {
                    csv.row(&[l.to_string(), v.to_string()]);
                }
                out.write(&format!("{dir}/acf.csv"), &csv.into_bytes())?;
                let [lo, hi] = st.acf_decay_window;
                decay = failures.take(fit_acf_decay(&a, lo, hi).context(|| ctx("acf decay fit")));
            }

            rows.push(StatsRow {
                input: piece.input.clone(),
                period: piece.period.clone(),
                n_returns: x.len(),
                sampling_interval: piece.series.sampling_interval(),
                filled_gaps: piece.filled_gaps,
                zero_returns: x.iter().filter(|v| **v == 0.0).count(),
                power_law: power,
                stretched_exponential: stretched,
                acf_decay: decay,
                errors: failures.0[before..]
                    .iter()
                    .map(|f| format!("{}: {}", f.context, f.message))
                    .collect(),
            });
        }
    }
    out.write_json("summary.json", &rows)?;
    out.write("summary.csv", &stats_csv(&rows))?;
    if cfg.report.markdown {
        out.write("report.md", report::render_stats(&rows).as_bytes())?;
    }
    finish("stats", &cfg, out, resolved, failures)
}

/// Table-1 style columns. `gamma` and `beta` are positive; the CCDF decays
/// as `x^-gamma`.
fn stats_csv(rows: &[StatsRow]) -> Vec<u8> {
    let mut csv = Csv::new(&[
        "input",
        "period",
        "n_returns",
        "sampling_interval",
        "filled_gaps",
        "zero_returns",
        "gamma",
        "gamma_stderr",
        "beta",
        "acf_exponent",
    ]);
    for r in rows {
        csv.row(&[
            r.input.clone(),
            r.period.clone(),
            r.n_returns.to_string(),
            r.sampling_interval.to_string(),
            r.filled_gaps.to_string(),
            r.zero_returns.to_string(),
            opt(r.power_law.as_ref().map(|f| f.exponent)),
            opt(r.power_law.as_ref().map(|f| f.stderr)),
            opt(r.stretched_exponential.as_ref().map(|f| f.exponent)),
            opt(r.acf_decay.as_ref().map(|f| f.exponent)),
        ]);
    }
    csv.into_bytes()
}

// ---------------------------------------------------------------- mf

/// Headline numbers of one fitted series (or pair).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfRow {
    pub period: String,
    pub variant: String,
    /// Input label, or `x~y` for the cross exponent.
    pub series: String,
    pub length: usize,
    pub window: Option<[usize; 2]>,
    pub h2: Option<f64>,
    pub delta_alpha: Option<f64>,
    pub alpha0: Option<f64>,
    pub asymmetry: Option<f64>,
    pub error: Option<String>,
}

fn surface_diagnostics(s: &FluctuationSurface) -> Vec<u8> {
    let mut csv = Csv::new(&["s", "segments", "excluded_segments", "negative_segments", "valid"]);
    for d in &s.diagnostics {
        csv.row(&[
            d.s.to_string(),
            d.segments.to_string(),
            d.excluded_segments.to_string(),
            d.negative_segments.to_string(),
            d.valid.to_string(),
        ]);
    }
    csv.into_bytes()
}

fn fit_csv(f: &ScalingFit) -> Vec<u8> {
    let mut csv = Csv::new(&[
        "r",
        "exponent",
        "stderr",
        "r_squared",
        "s_lo",
        "s_hi",
        "n_scales",
        "flag",
    ]);
    for r in &f.fits {
        let flag = serde_json::to_value(r.flag).unwrap();
        csv.row(&[
            r.r.to_string(),
            opt(r.exponent),
            r.stderr.to_string(),
            r.r_squared.to_string(),
            r.window[0].to_string(),
            r.window[1].to_string(),
            r.n_scales.to_string(),
            flag.as_str().unwrap_or_default().to_string(),
        ]);
    }
    csv.into_bytes()
}

#[derive(Serialize)]
struct SpectrumReport<'a> {
    series: &'a str,
    tau: Vec<Option<f64>>,
    spectrum: Option<&'a SingularitySpectrum>,
}

struct Analysis<'a> {
    out: &'a mut OutputDir,
    failures: &'a mut Failures,
    rows: &'a mut Vec<MfRow>,
    dir: String,
    period: String,
    variant: String,
    length: usize,
}

impl Analysis<'_> {
    fn ctx(&self, what: &str) -> String {
        format!("[{}] {} {what}", self.period, self.variant)
    }

    fn surface(&mut self, name: &str, s: &FluctuationSurface) -> CliResult<()> {
        self.out
            .write(&format!("{}/surface_{name}.csv", self.dir), s.to_csv().as_bytes())?;
        self.out
            .write(&format!("{}/scales_{name}.csv", self.dir), &surface_diagnostics(s))
    }

    /// Fits one surface and, when univariate, its spectrum.
    fn fit(
        &mut self,
        name: &str,
        series: &str,
        surf: &FluctuationSurface,
        cfg: &RunConfig,
    ) -> CliResult<Option<ScalingFit>> {
        let ctx = self.ctx(&format!("{series} scaling fit"));
        let mut row = MfRow {
            period: self.period.clone(),
            variant: self.variant.clone(),
            series: series.to_string(),
            length: self.length,
            window: None,
            h2: None,
            delta_alpha: None,
            alpha0: None,
            asymmetry: None,
            error: None,
        };
        let fit = match fit_scaling(surf, &cfg.mf.scaling).context(|| ctx) {
            Ok(f) => f,
            Err(e) => {
                row.error = Some(message(&e));
                self.rows.push(row);
                self.failures.take::<()>(Err(e));
                return Ok(None);
            }
        };
        self.out
            .write(&format!("{}/fit_{name}.csv", self.dir), &fit_csv(&fit))?;
        row.window = Some(fit.window);
        row.h2 = fit.exponent_at(2.0);
        if fit.is_univariate() {
            let tau = tau_function(&fit).context(|| self.ctx("tau"))?;
            let sp = legendre_spectrum(&fit).context(|| self.ctx(&format!("{series} spectrum")));
            let sp = match sp {
                Ok(sp) => Some(sp),
                Err(e) => {
                    row.error = Some(message(&e));
                    self.failures.take::<()>(Err(e));
                    None
                }
            };
            if let Some(sp) = &sp {
                self.out
                    .write(&format!("{}/spectrum_{name}.csv", self.dir), sp.to_csv().as_bytes())?;
                row.delta_alpha = Some(sp.delta_alpha);
                row.alpha0 = Some(sp.alpha0);
                row.asymmetry = Some(sp.asymmetry);
            }
            self.out.write_json(
                &format!("{}/spectrum_{name}.json", self.dir),
                &SpectrumReport {
                    series,
                    tau,
                    spectrum: sp.as_ref(),
                },
            )?;
        }
        self.rows.push(row);
        Ok(Some(fit))
    }
}

fn variants(cfg: &RunConfig) -> CliResult<Vec<(String, Option<SurrogateSpec>)>> {
    let mut v = vec![(ORIGINAL.to_string(), None)];
    for s in &cfg.surrogates {
        let label = s.label();
        if v.iter().any(|(l, _)| *l == label) {
            return Err(CliError::Config(format!("surrogate {label:?} listed twice")));
        }
        v.push((label, Some(*s)));
    }
    Ok(v)
}

fn same_grid(a: &Piece, b: &Piece) -> CliResult<()> {
    if a.series.origin_timestamps() != b.series.origin_timestamps() {
        return Err(CliError::core(
            format!("{} / {} [{}]", a.input, b.input, a.period),
            mfcca::Error::Size(format!(
                "bivariate inputs are not on the same time grid ({} vs {} points)",
                a.series.len(),
                b.series.len()
            )),
        ));
    }
    Ok(())
}

pub fn cmd_mf(cfg: &RunConfig) -> CliResult<Outcome> {
    cfg.validate()?;
    need_inputs(cfg, "mf")?;
    if cfg.inputs.len() > 2 {
        return Err(CliError::Config(format!(
            "mf takes one input or one bivariate pair, got {}",
            cfg.inputs.len()
        )));
    }
    let variants = variants(cfg)?;
    let cfg = pinned(cfg)?;
    let mut out = OutputDir::new(cfg.output_dir().join("mf"))?;
    let mut failures = Failures::default();
    let mut rows = Vec::new();
    let mut resolved = Vec::new();
    let xs = load_pieces(&cfg.inputs[0], &cfg)?;
    let ys = match cfg.inputs.get(1) {
        Some(spec) => Some(load_pieces(spec, &cfg)?),
        None => None,
    };
    let exec = Exec::auto();

    for (i, px) in xs.iter().enumerate() {
        let py = ys.as_ref().map(|v| &v[i]);
        if let Some(py) = py {
            same_grid(px, py)?;
        }
        let len = px.series.len();
        let Some(mf) = failures.take(cfg.mf.resolve(len).and_then(|m| {
            m.validate(len).context(|| format!("[{}] scale grid", px.period))?;
            Ok(m)
        })) else {
            continue;
        };
        resolved.push(serde_json::json!({ "period": px.period, "length": len, "mf": mf }));

        for (variant, spec) in &variants {
            let dir = format!("{}/{}", path_label(&px.period), path_label(variant));
            let transform = |p: &Piece| -> CliResult<Vec<f64>> {
                match spec {
                    None => Ok(p.series.values().to_vec()),
                    Some(s) => s
                        .apply(p.series.values())
                        .context(|| format!("{} [{}] {variant}", p.input, p.period)),
                }
            };
            let Some(x) = failures.take(transform(px)) else {
                continue;
            };
            let y = match py {
                Some(py) => match failures.take(transform(py)) {
                    Some(y) => Some(y),
                    None => continue,
                },
                None => None,
            };
            let mut a = Analysis {
                out: &mut out,
                failures: &mut failures,
                rows: &mut rows,
                dir,
                period: px.period.clone(),
                variant: variant.clone(),
                length: len,
            };
            match (&y, py) {
                (None, _) => univariate(&mut a, &x, &px.input, &mf, &cfg, exec)?,
                (Some(y), Some(py)) => bivariate(&mut a, &x, y, (&px.input, &py.input), &mf, &cfg, exec)?,
                _ => unreachable!(),
            }
        }
    }
    out.write_json("summary.json", &rows)?;
    out.write("summary.csv", &mf_csv(&rows))?;
    if cfg.report.markdown {
        out.write("report.md", report::render_mf(&rows).as_bytes())?;
    }
    finish("mf", &cfg, out, resolved, failures)
}

fn univariate(a: &mut Analysis, x: &[f64], label: &str, mf: &MfConfig, cfg: &RunConfig, exec: Exec) -> CliResult<()> {
    let ctx = a.ctx("fluctuation surface");
    let Some(surf) = a.failures.take(fluctuation_surface_with(x, mf, exec).context(|| ctx)) else {
        return Ok(());
    };
    a.surface("x", &surf)?;
    a.fit("x", label, &surf, cfg)?;
    Ok(())
}

fn bivariate(
    a: &mut Analysis,
    x: &[f64],
    y: &[f64],
    labels: (&str, &str),
    mf: &MfConfig,
    cfg: &RunConfig,
    exec: Exec,
) -> CliResult<()> {
    let ctx = a.ctx("fluctuation surfaces");
    let Some(cs) = a.failures.take(cross_surfaces_with(x, y, mf, exec).context(|| ctx)) else {
        return Ok(());
    };
    a.surface("x", &cs.xx)?;
    a.surface("y", &cs.yy)?;
    a.surface("xy", &cs.xy)?;
    let fx = a.fit("x", labels.0, &cs.xx, cfg)?;
    let fy = a.fit("y", labels.1, &cs.yy, cfg)?;
    let fxy = a.fit("xy", &format!("{}~{}", labels.0, labels.1), &cs.xy, cfg)?;

    if let (Some(fx), Some(fy), Some(fxy)) = (&fx, &fy, &fxy) {
        let hxy = average_hurst(fx, fy).context(|| a.ctx("h_xy"))?;
        let mut csv = Csv::new(&["r", "lambda", "h_xy", "difference"]);
        for ((r, l), h) in fxy.fits.iter().map(|f| (f.r, f.exponent)).zip(hxy) {
            if r >= cfg.mf.lambda_r_min {
                csv.row(&[r.to_string(), opt(l), opt(h), opt(l.zip(h).map(|(l, h)| l - h))]);
            }
        }
        a.out.write(&format!("{}/lambda.csv", a.dir), &csv.into_bytes())?;
    }
    let rho = rho_r_with(&cs.xy, &cs.xx, &cs.yy, cfg.mf.rho_form).context(|| a.ctx("rho"))?;
    a.out.write(&format!("{}/rho.csv", a.dir), rho.to_csv().as_bytes())
}

fn mf_csv(rows: &[MfRow]) -> Vec<u8> {
    let mut csv = Csv::new(&[
        "period",
        "variant",
        "series",
        "length",
        "s_lo",
        "s_hi",
        "h2",
        "delta_alpha",
        "alpha0",
        "asymmetry",
        "error",
    ]);
    for r in rows {
        csv.row(&[
            r.period.clone(),
            r.variant.clone(),
            r.series.clone(),
            r.length.to_string(),
            opt(r.window.map(|w| w[0])),
            opt(r.window.map(|w| w[1])),
            opt(r.h2),
            opt(r.delta_alpha),
            opt(r.alpha0),
            opt(r.asymmetry),
            r.error.as_deref().map(quote).unwrap_or_default(),
        ]);
    }
    csv.into_bytes()
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

// ---------------------------------------------------------------- surrogate

pub fn cmd_surrogate(cfg: &RunConfig) -> CliResult<Outcome> {
    cfg.validate()?;
    need_inputs(cfg, "surrogate")?;
    if cfg.surrogates.is_empty() {
        return Err(CliError::Config("surrogate: no surrogate specs given".into()));
    }
    let variants = variants(cfg)?;
    let cfg = pinned(cfg)?;
    let mut out = OutputDir::new(cfg.output_dir().join("surrogate"))?;
    let mut failures = Failures::default();
    for spec in &cfg.inputs {
        for piece in load_pieces(spec, &cfg)? {
            for (label, s) in variants.iter().filter_map(|(l, s)| s.map(|s| (l, s))) {
                let ctx = || format!("{} [{}] {label}", piece.input, piece.period);
                let Some(v) = failures.take(s.apply(piece.series.values()).context(ctx)) else {
                    continue;
                };
                let series = ReturnSeries::new(
                    v,
                    piece.series.origin_timestamps().to_vec(),
                    piece.series.sampling_interval(),
                )
                .context(ctx)?;
                let mut buf = Vec::new();
                write_values(&mut buf, &series).context(ctx)?;
                let rel = format!(
                    "{}/{}/{}.csv",
                    path_label(&piece.input),
                    path_label(&piece.period),
                    path_label(label)
                );
                out.write(&rel, &buf)?;
            }
        }
    }
    finish("surrogate", &cfg, out, Vec::new(), failures)
}

// ---------------------------------------------------------------- cascade

/// Synthetic series with known scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "generator")]
pub enum Generator {
    Binomial(CascadeSpec),
    Fgn { len: usize, hurst: f64, seed: u64 },
    Noise { len: usize, seed: u64 },
}

impl Generator {
    pub fn generate(&self) -> mfcca::Result<Vec<f64>> {
        match *self {
            Generator::Binomial(spec) => binomial_cascade(&spec),
            Generator::Fgn { len, hurst, seed } => fgn(len, hurst, seed),
            Generator::Noise { len, seed } => Ok(gaussian_noise(len, seed)),
        }
    }
}

#[derive(Serialize)]
struct GeneratorManifest<'a> {
    schema_version: u32,
    tool: String,
    rng: &'a str,
    spec: &'a Generator,
    output: WrittenFile,
}

/// Writes the series as `timestamp,value` CSV (timestamps `0, 1, 2, ...`),
/// plus a `<file>.manifest.json` sidecar. Read it back with kind `values`.
pub fn cmd_cascade(gen: &Generator, path: &Path) -> CliResult<Outcome> {
    let values = gen.generate().context(|| "generator".to_string())?;
    let series = ReturnSeries::from_values(values, 1).context(|| "generator".to_string())?;
    let mut buf = Vec::new();
    write_values(&mut buf, &series).context(|| path.display().to_string())?;
    crate::output::write_atomic(path, &buf)?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let written = WrittenFile {
        path: name.clone(),
        sha256: sha256_hex(&buf),
    };
    let manifest = GeneratorManifest {
        schema_version: crate::config::SCHEMA_VERSION,
        tool: format!("mfcca {}", env!("CARGO_PKG_VERSION")),
        rng: rng::GENERATOR_NAME,
        spec: gen,
        output: written.clone(),
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("serialisable");
    text.push('\n');
    crate::output::write_atomic(&path.with_file_name(format!("{name}.manifest.json")), text.as_bytes())?;
    Ok(Outcome {
        root: match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        },
        files: vec![written],
        failures: Vec::new(),
    })
}
