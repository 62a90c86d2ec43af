//! Batch front-end for the `mfcca` library.
//!
//! Subcommands:
//!
//! - `stats`: CCDFs, tail fits and ACF decay per input and period.
//! - `mf`: fluctuation surfaces, scaling fits, spectra, `lambda` versus
//!   `h_xy` and `rho_r(s)`, for the original series and every surrogate.
//! - `surrogate`: writes the configured surrogates as CSV.
//! - `cascade`: synthetic series with known scaling.
//! - `report`: Markdown digest of an output directory.
//!
//! Settings come from command-line flags, then the TOML config file, then
//! built-in defaults. Exit codes: 0 success, 2 configuration, 3 data,
//! 4 no scaling window, 5 numeric.

pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mfcca::cascade::CascadeSpec;
use mfcca::qgauss::QGaussianParams;
use mfcca::series::{Column, GapPolicy};
use mfcca::spectrum::{RhoForm, WindowChoice};
use mfcca::surrogate::SurrogateSpec;

pub use config::RunConfig;
pub use error::{CliError, CliResult};
pub use pipeline::{cmd_cascade, cmd_mf, cmd_stats, cmd_surrogate, Generator, Outcome};

pub const THREADS_ENV: &str = "MFCCA_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "mfcca",
    version,
    about = "Multifractal detrended (cross-)correlation analysis"
)]
pub struct Cli {
    /// Worker threads; all cores when neither this nor the environment
    /// variable is set.
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tail exponents and volatility autocorrelation.
    Stats(RunArgs),
    /// Multifractal analysis of one series or one pair.
    Mf(MfArgs),
    /// Write surrogate series.
    Surrogate(RunArgs),
    /// Generate a synthetic series.
    Cascade(CascadeArgs),
    /// Rebuild report.md from an output directory.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Prices,
    Values,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// TOML config file, or a manifest.json from an earlier run.
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    /// Input CSV; repeat for a bivariate pair. Replaces the config's inputs.
    #[arg(short, long = "input")]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    /// Column index or header name.
    #[arg(long)]
    pub timestamp_column: Option<String>,
    /// Column index or header name.
    #[arg(long)]
    pub value_column: Option<String>,
    /// One character, or `tab`.
    #[arg(long)]
    pub delimiter: Option<String>,
    #[arg(long)]
    pub no_header: bool,
    /// Expected spacing in seconds.
    #[arg(long)]
    pub sampling_interval: Option<i64>,
    /// Carry the previous price over missing timestamps.
    #[arg(long)]
    pub fill_gaps: bool,
    /// `LABEL=START..END`, bounds in epoch seconds or ISO-8601. Repeatable;
    /// replaces the config's periods.
    #[arg(long = "period")]
    pub periods: Vec<String>,
    /// `shuffle:SEED`, `remap:Q[:BETA]` or a JSON spec. Repeatable; replaces
    /// the config's surrogates.
    #[arg(long = "surrogate")]
    pub surrogates: Vec<String>,
    /// Output root directory.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// Skip report.md.
    #[arg(long)]
    pub no_report: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct MfArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Moment orders `LO:HI:STEP`.
    #[arg(long, allow_hyphen_values = true)]
    pub r_range: Option<String>,
    /// Scales `LO:HI:COUNT`.
    #[arg(long)]
    pub scales: Option<String>,
    /// Detrending polynomial degree.
    #[arg(long)]
    pub degree: Option<usize>,
    /// `auto`, `auto-per-r` or `LO:HI` (scales).
    #[arg(long)]
    pub window: Option<String>,
    #[arg(long, value_enum)]
    pub rho_form: Option<RhoFormArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RhoFormArg {
    Moment,
    Root,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GeneratorArg {
    Binomial,
    Fgn,
    Noise,
}

#[derive(Debug, Clone, Args)]
pub struct CascadeArgs {
    #[arg(long, value_enum, default_value = "binomial")]
    pub generator: GeneratorArg,
    /// Cascade weight.
    #[arg(long, default_value_t = 0.6)]
    pub p: f64,
    /// Cascade depth; the series has 2^levels points.
    #[arg(long, default_value_t = 16)]
    pub levels: u32,
    /// Random signs on the cascade increments.
    #[arg(long)]
    pub signed: bool,
    /// Hurst exponent for `fgn`.
    #[arg(long, default_value_t = 0.5)]
    pub hurst: f64,
    /// Length for `fgn` and `noise`.
    #[arg(long, default_value_t = 65536)]
    pub len: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long, default_value = "cascade.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    #[arg(long, default_value = config::DEFAULT_OUTPUT_DIR)]
    pub dir: PathBuf,
}

fn column(s: &str) -> Column {
    s.parse()
        .map(Column::Index)
        .unwrap_or_else(|_| Column::Name(s.to_string()))
}

fn numbers<T: std::str::FromStr>(s: &str, what: &str) -> CliResult<Vec<T>> {
    s.split(':')
        .map(|p| p.trim().parse::<T>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CliError::Config(format!("cannot parse {what} {s:?}")))
}

/// Parses the `--surrogate` shorthand.
pub fn parse_surrogate(s: &str) -> CliResult<SurrogateSpec> {
    let s = s.trim();
    if s.starts_with('{') {
        return serde_json::from_str(s).map_err(|e| CliError::Config(format!("surrogate {s:?}: {e}")));
    }
    let bad = || CliError::Config(format!("surrogate {s:?} is not shuffle:SEED or remap:Q[:BETA]"));
    let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
    match kind {
        "shuffle" => Ok(SurrogateSpec::Shuffle {
            seed: rest.parse().map_err(|_| bad())?,
        }),
        "remap" => {
            let v: Vec<f64> = numbers(rest, "surrogate")?;
            let (q, beta) = match v[..] {
                [q] => (q, 1.0),
                [q, b] => (q, b),
                _ => return Err(bad()),
            };
            let target = QGaussianParams::new(q, beta).map_err(|e| CliError::Config(e.to_string()))?;
            Ok(SurrogateSpec::RankRemap { target, tie_seed: None })
        }
        _ => Err(bad()),
    }
}

impl RunArgs {
    /// Config file (if any) with the flags applied on top.
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if !self.inputs.is_empty() {
            cfg.inputs = self.inputs.iter().map(config::InputSpec::new).collect();
        }
        for input in &mut cfg.inputs {
            if let Some(k) = self.kind {
                input.kind = match k {
                    KindArg::Prices => config::InputKind::Prices,
                    KindArg::Values => config::InputKind::Values,
                };
            }
            let f = &mut input.format;
            if let Some(c) = &self.timestamp_column {
                f.timestamp_column = column(c);
            }
            if let Some(c) = &self.value_column {
                f.value_column = column(c);
            }
            if let Some(d) = &self.delimiter {
                f.delimiter = match d.as_str() {
                    "tab" | "\\t" => b'\t',
                    _ if d.len() == 1 && d.is_ascii() => d.as_bytes()[0],
                    _ => return Err(CliError::Config(format!("delimiter {d:?} is not one ASCII character"))),
                };
            }
            if self.no_header {
                f.has_header = false;
            }
            if let Some(dt) = self.sampling_interval {
                f.sampling_interval = Some(dt);
            }
            if self.fill_gaps {
                f.fill_gaps = GapPolicy::Previous;
            }
        }
        if !self.periods.is_empty() {
            cfg.periods = self
                .periods
                .iter()
                .map(|p| config::Period::parse(p))
                .collect::<CliResult<_>>()?;
        }
        if !self.surrogates.is_empty() {
            cfg.surrogates = self
                .surrogates
                .iter()
                .map(|s| parse_surrogate(s))
                .collect::<CliResult<_>>()?;
        }
        if let Some(o) = &self.out {
            cfg.output_dir = Some(o.clone());
        }
        if self.no_report {
            cfg.report.markdown = false;
        }
        Ok(cfg)
    }
}

impl MfArgs {
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let mut cfg = self.run.resolve()?;
        let mf = &mut cfg.mf;
        if let Some(r) = &self.r_range {
            match numbers::<f64>(r, "--r-range")?[..] {
                [lo, hi, step] => {
                    (mf.r_min, mf.r_max, mf.r_step) = (lo, hi, step);
                    mf.r_grid = None;
                }
                _ => return Err(CliError::Config(format!("--r-range {r:?} is not LO:HI:STEP"))),
            }
        }
        if let Some(s) = &self.scales {
            match numbers::<usize>(s, "--scales")?[..] {
                [lo, hi, n] => {
                    (mf.s_min, mf.s_max, mf.s_count) = (Some(lo), Some(hi), n);
                    mf.s_grid = None;
                }
                _ => return Err(CliError::Config(format!("--scales {s:?} is not LO:HI:COUNT"))),
            }
        }
        if let Some(m) = self.degree {
            mf.poly_degree = m;
        }
        if let Some(w) = &self.window {
            mf.scaling.window = match w.as_str() {
                "auto" => WindowChoice::Auto { per_r: false },
                "auto-per-r" => WindowChoice::Auto { per_r: true },
                _ => match numbers::<usize>(w, "--window")?[..] {
                    [s_lo, s_hi] => WindowChoice::Fixed { s_lo, s_hi },
                    _ => {
                        return Err(CliError::Config(format!(
                            "--window {w:?} is not auto, auto-per-r or LO:HI"
                        )))
                    }
                },
            };
        }
        if let Some(f) = self.rho_form {
            mf.rho_form = match f {
                RhoFormArg::Moment => RhoForm::Moment,
                RhoFormArg::Root => RhoForm::Root,
            };
        }
        Ok(cfg)
    }
}

impl CascadeArgs {
    pub fn generator(&self) -> Generator {
        match self.generator {
            GeneratorArg::Binomial => Generator::Binomial(CascadeSpec {
                p: self.p,
                levels: self.levels,
                seed: self.seed,
                randomize_sign: self.signed,
            }),
            GeneratorArg::Fgn => Generator::Fgn {
                len: self.len,
                hurst: self.hurst,
                seed: self.seed,
            },
            GeneratorArg::Noise => Generator::Noise {
                len: self.len,
                seed: self.seed,
            },
        }
    }
}

/// Runs `f` on a pool of `threads` workers (all cores when `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    if threads == Some(0) {
        return Err(CliError::Config("thread count must be at least 1".into()));
    }
    #[cfg(feature = "parallel")]
    {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = threads {
            b = b.num_threads(n);
        }
        let pool = b.build().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(pool.install(f))
    }
    #[cfg(not(feature = "parallel"))]
    {
        Ok(f())
    }
}

fn dispatch(command: Command) -> CliResult<Outcome> {
    match command {
        Command::Stats(a) => cmd_stats(&a.resolve()?),
        Command::Mf(a) => cmd_mf(&a.resolve()?),
        Command::Surrogate(a) => cmd_surrogate(&a.resolve()?),
        Command::Cascade(a) => cmd_cascade(&a.generator(), &a.out),
        Command::Report(a) => {
            let path = report::cmd_report(&a.dir)?;
            Ok(Outcome {
                root: a.dir,
                files: vec![output::WrittenFile {
                    sha256: output::sha256_hex(&std::fs::read(&path).map_err(|e| CliError::io(&path, e))?),
                    path: "report.md".into(),
                }],
                failures: Vec::new(),
            })
        }
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match with_threads(cli.threads, || dispatch(cli.command)).and_then(|r| r) {
        Ok(outcome) => {
            for f in &outcome.failures {
                eprintln!("error: {}: {}", f.context, f.message);
            }
            println!("wrote {} files under {}", outcome.files.len(), outcome.root.display());
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
