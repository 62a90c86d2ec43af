//! Versioned run configuration.
//!
//! A run is described by a TOML file (or a previous run's manifest, which
//! embeds the fully resolved configuration). Command-line flags are applied
//! on top, and anything still unset falls back to the documented defaults.

use std::path::{Path, PathBuf};

use mfcca::grid::{log_spaced_integers, moment_grid};
use mfcca::mfdfa::{
    default_scales, MfConfig, ZeroMoment, DEFAULT_MIN_SEGMENT_FILL, DEFAULT_POLY_DEGREE, DEFAULT_SCALE_COUNT,
};
use mfcca::series::{parse_time_bound, CsvFormat};
use mfcca::spectrum::{RhoForm, ScalingOptions};
use mfcca::stats::TailWindow;
use mfcca::surrogate::SurrogateSpec;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_OUTPUT_DIR: &str = "mfcca-out";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    /// Relative paths are taken from the config file's directory. Never
    /// written to manifests, so a manifest does not pin its own location.
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub inputs: Vec<InputSpec>,
    #[serde(default)]
    pub periods: Vec<Period>,
    #[serde(default)]
    pub mf: MfSettings,
    #[serde(default)]
    pub surrogates: Vec<SurrogateSpec>,
    #[serde(default)]
    pub stats: StatsSettings,
    #[serde(default)]
    pub report: ReportSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            output_dir: None,
            inputs: Vec::new(),
            periods: Vec::new(),
            mf: MfSettings::default(),
            surrogates: Vec::new(),
            stats: StatsSettings::default(),
            report: ReportSettings::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputKind {
    /// Prices; analysed through their log-returns.
    #[default]
    Prices,
    /// Values used as they are (returns, synthetic series, surrogates).
    Values,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSpec {
    pub path: PathBuf,
    /// Name used in output paths; defaults to the file stem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default)]
    pub kind: InputKind,
    #[serde(default)]
    pub format: CsvFormat,
}

impl InputSpec {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        InputSpec {
            path: path.into(),
            label: None,
            kind: InputKind::default(),
            format: CsvFormat::default(),
        }
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| {
            self.path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "input".into())
        })
    }
}

/// Half-open calendar window `[start, end)`; bounds are epoch seconds or
/// ISO-8601 strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Period {
    pub label: String,
    pub start: String,
    pub end: String,
}

impl Period {
    pub fn bounds(&self) -> CliResult<(i64, i64)> {
        let parse =
            |s: &str| parse_time_bound(s).map_err(|e| CliError::Config(format!("period {:?}: {e}", self.label)));
        let (a, b) = (parse(&self.start)?, parse(&self.end)?);
        if a >= b {
            return Err(CliError::Config(format!("period {:?} is empty", self.label)));
        }
        Ok((a, b))
    }

    /// Parses `LABEL=START..END`.
    pub fn parse(s: &str) -> CliResult<Self> {
        let bad = || CliError::Config(format!("period {s:?} is not LABEL=START..END"));
        let (label, range) = s.split_once('=').ok_or_else(bad)?;
        let (start, end) = range.split_once("..").ok_or_else(bad)?;
        Ok(Period {
            label: label.trim().into(),
            start: start.trim().into(),
            end: end.trim().into(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MfSettings {
    pub r_min: f64,
    pub r_max: f64,
    pub r_step: f64,
    /// Explicit moment orders; overrides the range above.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_grid: Option<Vec<f64>>,
    /// Smallest scale; 50 (shrunk for short series) when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_min: Option<usize>,
    /// Largest scale; `T / 20` when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_max: Option<usize>,
    pub s_count: usize,
    /// Explicit scales; overrides the range above.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_grid: Option<Vec<usize>>,
    pub poly_degree: usize,
    pub min_segment_fill: f64,
    pub zero_moment: ZeroMoment,
    pub scaling: ScalingOptions,
    pub rho_form: RhoForm,
    /// Smallest `r` reported in the `lambda` versus `h_xy` comparison.
    pub lambda_r_min: f64,
}

impl Default for MfSettings {
    fn default() -> Self {
        MfSettings {
            r_min: -4.0,
            r_max: 4.0,
            r_step: 0.2,
            r_grid: None,
            s_min: None,
            s_max: None,
            s_count: DEFAULT_SCALE_COUNT,
            s_grid: None,
            poly_degree: DEFAULT_POLY_DEGREE,
            min_segment_fill: DEFAULT_MIN_SEGMENT_FILL,
            zero_moment: ZeroMoment::LogAverage,
            scaling: ScalingOptions::default(),
            rho_form: RhoForm::Moment,
            lambda_r_min: 0.0,
        }
    }
}

impl MfSettings {
    /// The engine configuration for a series of length `len`.
    pub fn resolve(&self, len: usize) -> CliResult<MfConfig> {
        let r_grid = match &self.r_grid {
            Some(g) => g.clone(),
            None => {
                if !(self.r_step > 0.0 && self.r_min < self.r_max) {
                    return Err(CliError::Config(format!(
                        "moment range {}..{} step {} is empty",
                        self.r_min, self.r_max, self.r_step
                    )));
                }
                moment_grid(self.r_min, self.r_max, self.r_step)
            }
        };
        let s_grid = match (&self.s_grid, self.s_min, self.s_max) {
            (Some(g), _, _) => g.clone(),
            (None, None, None) if self.s_count == DEFAULT_SCALE_COUNT => default_scales(len, self.poly_degree),
            (None, lo, hi) => {
                let dflt = default_scales(len, self.poly_degree);
                let lo = lo.unwrap_or(dflt[0]);
                let hi = hi.unwrap_or(*dflt.last().unwrap());
                if lo >= hi || self.s_count < 2 {
                    return Err(CliError::Config(format!(
                        "scale range {lo}..{hi} with {} scales is empty",
                        self.s_count
                    )));
                }
                log_spaced_integers(lo, hi, self.s_count)
            }
        };
        Ok(MfConfig {
            r_grid,
            s_grid,
            poly_degree: self.poly_degree,
            min_segment_fill: self.min_segment_fill,
            zero_moment: self.zero_moment,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsSettings {
    /// Standardise returns by their standard deviation before the CCDF.
    pub normalize: bool,
    pub power_law_window: TailWindow,
    pub stretched_window: TailWindow,
    /// Explicit ACF lags; 50 log-spaced lags up to 1e5 when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub acf_lags: Option<Vec<usize>>,
    /// Lag range `[lo, hi]` of the ACF decay fit.
    pub acf_decay_window: [usize; 2],
}

impl Default for StatsSettings {
    fn default() -> Self {
        StatsSettings {
            normalize: true,
            power_law_window: TailWindow::TopFraction { fraction: 0.01 },
            stretched_window: TailWindow::TopFraction { fraction: 0.5 },
            acf_lags: None,
            acf_decay_window: [1, 1000],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSettings {
    /// Also write a Markdown digest (`report.md`) next to the summaries.
    pub markdown: bool,
}

impl Default for ReportSettings {
    fn default() -> Self {
        ReportSettings { markdown: true }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.check_version()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    fn check_version(&self) -> CliResult<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported schema_version {} (this build reads {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        Ok(())
    }

    /// Reads a TOML config or a run manifest. Relative paths are made
    /// absolute against the file's directory. A manifest's output root is
    /// the parent of the directory it sits in.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let base = if base.as_os_str().is_empty() {
            PathBuf::from(".")
        } else {
            base
        };
        let mut cfg = if path.extension().is_some_and(|e| e == "json") {
            let m: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
            let inner = m
                .get("config")
                .ok_or_else(|| CliError::Config(format!("{} is not a run manifest", path.display())))?;
            let mut cfg: RunConfig =
                serde_json::from_value(inner.clone()).map_err(|e| CliError::Config(e.to_string()))?;
            cfg.check_version()?;
            // manifests live in `<root>/<command>/`
            let dir = std::fs::canonicalize(&base).map_err(|e| CliError::io(&base, e))?;
            cfg.output_dir = Some(dir.parent().map(Path::to_path_buf).unwrap_or(dir));
            cfg
        } else {
            Self::from_toml(&text)?
        };
        for input in &mut cfg.inputs {
            if input.path.is_relative() {
                input.path = base.join(&input.path);
            }
        }
        if let Some(out) = &cfg.output_dir {
            if out.is_relative() {
                cfg.output_dir = Some(base.join(out));
            }
        }
        Ok(cfg)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
    }

    /// Checks labels and periods before any work starts.
    pub fn validate(&self) -> CliResult<()> {
        self.check_version()?;
        let labels: Vec<String> = self.inputs.iter().map(InputSpec::label).collect();
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(CliError::Config(format!("duplicate input label {l:?}")));
            }
        }
        for (i, p) in self.periods.iter().enumerate() {
            p.bounds()?;
            if self.periods[..i].iter().any(|q| q.label == p.label) {
                return Err(CliError::Config(format!("duplicate period label {:?}", p.label)));
            }
        }
        Ok(())
    }
}
