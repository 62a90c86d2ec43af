//! Markdown digests of the summary tables.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};
use crate::output::write_atomic;
use crate::pipeline::{MfRow, StatsRow};

fn num(v: Option<f64>, digits: usize) -> String {
    v.map(|x| format!("{x:.digits$}")).unwrap_or_else(|| "-".into())
}

pub fn render_stats(rows: &[StatsRow]) -> String {
    let mut s = String::from("## Basic statistics\n\n");
    s.push_str("| input | period | returns | gamma | beta | ACF exponent |\n");
    s.push_str("|---|---|---:|---:|---:|---:|\n");
    for r in rows {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} | {} |",
            r.input,
            r.period,
            r.n_returns,
            num(r.power_law.as_ref().map(|f| f.exponent), 2),
            num(r.stretched_exponential.as_ref().map(|f| f.exponent), 2),
            num(r.acf_decay.as_ref().map(|f| f.exponent), 2),
        );
    }
    let errors: Vec<&String> = rows.iter().flat_map(|r| &r.errors).collect();
    if !errors.is_empty() {
        s.push_str("\nErrors:\n\n");
        for e in errors {
            let _ = writeln!(s, "- {e}");
        }
    }
    s
}

pub fn render_mf(rows: &[MfRow]) -> String {
    let mut s = String::from("## Multifractal spectra\n\n");
    s.push_str("| period | variant | series | h(2) | width | alpha0 | asymmetry | scales |\n");
    s.push_str("|---|---|---|---:|---:|---:|---:|---|\n");
    for r in rows {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} | {} | {} | {} |",
            r.period,
            r.variant,
            r.series,
            num(r.h2, 3),
            num(r.delta_alpha, 3),
            num(r.alpha0, 3),
            num(r.asymmetry, 2),
            r.window
                .map(|w| format!("{}-{}", w[0], w[1]))
                .unwrap_or_else(|| "-".into()),
        );
    }
    let errors: Vec<String> = rows
        .iter()
        .filter_map(|r| {
            r.error
                .as_ref()
                .map(|e| format!("[{}] {} {}: {e}", r.period, r.variant, r.series))
        })
        .collect();
    if !errors.is_empty() {
        s.push_str("\nErrors:\n\n");
        for e in errors {
            let _ = writeln!(s, "- {e}");
        }
    }
    s
}

fn read_rows<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<Option<Vec<T>>> {
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Rebuilds `<dir>/report.md` from the `stats` and `mf` summaries found
/// under `dir`.
pub fn cmd_report(dir: &Path) -> CliResult<PathBuf> {
    let stats: Option<Vec<StatsRow>> = read_rows(&dir.join("stats/summary.json"))?;
    let mf: Option<Vec<MfRow>> = read_rows(&dir.join("mf/summary.json"))?;
    if stats.is_none() && mf.is_none() {
        return Err(CliError::Config(format!(
            "{} holds no stats/summary.json or mf/summary.json",
            dir.display()
        )));
    }
    let mut text = String::from("# mfcca report\n\n");
    if let Some(rows) = stats {
        text.push_str(&render_stats(&rows));
        text.push('\n');
    }
    if let Some(rows) = mf {
        text.push_str(&render_mf(&rows));
    }
    let path = dir.join("report.md");
    write_atomic(&path, text.as_bytes())?;
    Ok(path)
}
