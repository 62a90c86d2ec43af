//! Price ingestion and return construction.
//!
//! Prices are read from delimited text, validated onto a strictly regular
//! time grid and turned into logarithmic returns. Zero returns are kept so
//! that two series sampled on the same grid stay aligned.

use std::io::{Read, Write};

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible price; anything below makes `ln` ill-conditioned.
pub const MIN_PRICE: f64 = 1e-12;

/// A column reference in a delimited file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Column {
    Index(usize),
    Name(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeFormat {
    /// Decide from the first data row.
    #[default]
    Auto,
    EpochSeconds,
    Iso8601,
}

/// What to do when consecutive timestamps are more than one step apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapPolicy {
    #[default]
    Reject,
    /// Carry the previous price forward over missing grid points.
    Previous,
}

/// Describes how to read a price (or value) column from delimited text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CsvFormat {
    pub timestamp_column: Column,
    pub value_column: Column,
    pub has_header: bool,
    /// `b','` or `b'\t'`; serialized as a one-character string.
    #[serde(with = "delimiter_char")]
    pub delimiter: u8,
    pub time_format: TimeFormat,
    /// Expected step in seconds; inferred from the first two rows when absent.
    pub sampling_interval: Option<i64>,
    pub fill_gaps: GapPolicy,
}

mod delimiter_char {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &u8, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&char::from(*d).to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u8, D::Error> {
        let s = String::deserialize(d)?;
        match s.as_str() {
            "tab" | "\\t" => Ok(b'\t'),
            _ if s.len() == 1 && s.is_ascii() => Ok(s.as_bytes()[0]),
            _ => Err(D::Error::custom(format!(
                "delimiter must be a single ASCII character, got {s:?}"
            ))),
        }
    }
}

impl Default for CsvFormat {
    fn default() -> Self {
        CsvFormat {
            timestamp_column: Column::Index(0),
            value_column: Column::Index(1),
            has_header: true,
            delimiter: b',',
            time_format: TimeFormat::Auto,
            sampling_interval: None,
            fill_gaps: GapPolicy::Reject,
        }
    }
}

/// Uniformly sampled, strictly positive prices.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    timestamps: Vec<i64>,
    prices: Vec<f64>,
    sampling_interval: i64,
    filled_gaps: usize,
}

impl PriceSeries {
    /// Validates and builds a price series. Rows must already be sorted.
    pub fn new(timestamps: Vec<i64>, prices: Vec<f64>, sampling_interval: i64) -> Result<Self> {
        if timestamps.len() != prices.len() {
            return Err(Error::Size(format!(
                "{} timestamps but {} prices",
                timestamps.len(),
                prices.len()
            )));
        }
        if sampling_interval <= 0 {
            return Err(Error::Domain(format!(
                "sampling interval must be positive, got {sampling_interval}"
            )));
        }
        if let Some(i) = prices.iter().position(|p| !(p.is_finite() && *p >= MIN_PRICE)) {
            return Err(Error::Domain(format!(
                "price at index {i} is {} (must be >= {MIN_PRICE})",
                prices[i]
            )));
        }
        check_grid(&timestamps, sampling_interval)?;
        Ok(PriceSeries {
            timestamps,
            prices,
            sampling_interval,
            filled_gaps: 0,
        })
    }

    pub fn timestamps(&self) -> &[i64] {
        &self.timestamps
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn sampling_interval(&self) -> i64 {
        self.sampling_interval
    }

    /// Number of grid points synthesized by [`GapPolicy::Previous`].
    pub fn filled_gaps(&self) -> usize {
        self.filled_gaps
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }
}

/// Logarithmic returns aligned to the first timestamp of each price pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    values: Vec<f64>,
    origin_timestamps: Vec<i64>,
    sampling_interval: i64,
}

impl ReturnSeries {
    pub fn new(values: Vec<f64>, origin_timestamps: Vec<i64>, sampling_interval: i64) -> Result<Self> {
        if values.len() != origin_timestamps.len() {
            return Err(Error::Size(format!(
                "{} values but {} timestamps",
                values.len(),
                origin_timestamps.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite value at index {i}")));
        }
        Ok(ReturnSeries {
            values,
            origin_timestamps,
            sampling_interval,
        })
    }

    /// Wraps a plain value sequence on a synthetic grid `0, step, 2*step, ...`.
    pub fn from_values(values: Vec<f64>, sampling_interval: i64) -> Result<Self> {
        let ts = (0..values.len() as i64).map(|i| i * sampling_interval).collect();
        Self::new(values, ts, sampling_interval)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn origin_timestamps(&self) -> &[i64] {
        &self.origin_timestamps
    }

    pub fn sampling_interval(&self) -> i64 {
        self.sampling_interval
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

fn check_grid(timestamps: &[i64], step: i64) -> Result<()> {
    let mut gaps = Vec::new();
    for (i, w) in timestamps.windows(2).enumerate() {
        let d = w[1] - w[0];
        if d == 0 {
            return Err(Error::Domain(format!(
                "duplicate timestamp {} at index {}",
                w[1],
                i + 1
            )));
        }
        if d < 0 {
            return Err(Error::Domain(format!("timestamps not increasing at index {}", i + 1)));
        }
        if d != step {
            gaps.push(i + 1);
        }
    }
    if gaps.is_empty() {
        Ok(())
    } else {
        Err(Error::Gap {
            indices: gaps,
            expected: step,
        })
    }
}

fn parse_timestamp(field: &str, format: TimeFormat, line: usize) -> Result<i64> {
    let field = field.trim();
    let bad = |m: String| Error::Parse { line, message: m };
    match format {
        TimeFormat::EpochSeconds => field
            .parse::<i64>()
            .map_err(|e| bad(format!("timestamp {field:?}: {e}"))),
        TimeFormat::Iso8601 => parse_iso(field).ok_or_else(|| bad(format!("timestamp {field:?} is not ISO-8601"))),
        TimeFormat::Auto => unreachable!("auto format resolved before parsing"),
    }
}

fn parse_iso(field: &str) -> Option<i64> {
    if let Ok(dt) = DateTime::parse_from_rfc3339(field) {
        return Some(dt.timestamp());
    }
    for fmt in [
        "%Y-%m-%dT%H:%M:%S",
        "%Y-%m-%d %H:%M:%S",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M",
    ] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(field, fmt) {
            return Some(dt.and_utc().timestamp());
        }
    }
    NaiveDate::parse_from_str(field, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(|dt| dt.and_utc().timestamp())
}

/// Parses a period bound given either as epoch seconds or ISO-8601.
pub fn parse_time_bound(s: &str) -> Result<i64> {
    s.trim()
        .parse::<i64>()
        .ok()
        .or_else(|| parse_iso(s.trim()))
        .ok_or_else(|| Error::Config(format!("cannot parse time bound {s:?}")))
}

fn resolve_column(col: &Column, headers: Option<&csv::StringRecord>) -> Result<usize> {
    match col {
        Column::Index(i) => Ok(*i),
        Column::Name(name) => headers
            .and_then(|h| h.iter().position(|f| f.trim() == name))
            .ok_or_else(|| Error::Config(format!("column {name:?} not found in header"))),
    }
}

/// Reads `(timestamp, value)` rows, sorted by timestamp.
fn read_rows<R: Read>(source: R, format: &CsvFormat) -> Result<Vec<(i64, f64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(format.has_header)
        .delimiter(format.delimiter)
        .flexible(true)
        .from_reader(source);
    let headers = if format.has_header {
        Some(
            reader
                .headers()
                .map_err(|e| Error::Parse {
                    line: 1,
                    message: e.to_string(),
                })?
                .clone(),
        )
    } else {
        None
    };
    let tcol = resolve_column(&format.timestamp_column, headers.as_ref())?;
    let vcol = resolve_column(&format.value_column, headers.as_ref())?;
    let mut time_format = format.time_format;
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let tfield = rec.get(tcol).ok_or_else(|| Error::Parse {
            line,
            message: format!("missing timestamp column {tcol}"),
        })?;
        let vfield = rec.get(vcol).ok_or_else(|| Error::Parse {
            line,
            message: format!("missing value column {vcol}"),
        })?;
        if time_format == TimeFormat::Auto {
            time_format = if tfield.trim().parse::<i64>().is_ok() {
                TimeFormat::EpochSeconds
            } else {
                TimeFormat::Iso8601
            };
        }
        let t = parse_timestamp(tfield, time_format, line)?;
        let v = vfield.trim().parse::<f64>().map_err(|e| Error::Parse {
            line,
            message: format!("value {vfield:?}: {e}"),
        })?;
        rows.push((t, v));
    }
    rows.sort_by_key(|r| r.0);
    Ok(rows)
}

fn resolve_interval(rows: &[(i64, f64)], format: &CsvFormat) -> Result<i64> {
    match format.sampling_interval {
        Some(dt) => Ok(dt),
        None if rows.len() >= 2 => Ok(rows[1].0 - rows[0].0),
        None => Ok(1),
    }
}

/// Loads a price series from delimited text.
pub fn load_prices<R: Read>(source: R, format: &CsvFormat) -> Result<PriceSeries> {
    let rows = read_rows(source, format)?;
    let dt = resolve_interval(&rows, format)?;
    if let Some(i) = rows.iter().position(|r| !(r.1.is_finite() && r.1 >= MIN_PRICE)) {
        return Err(Error::Domain(format!(
            "price at row {} is {} (must be >= {MIN_PRICE})",
            i + 1,
            rows[i].1
        )));
    }
    let mut timestamps: Vec<i64> = rows.iter().map(|r| r.0).collect();
    let mut prices: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let mut filled = 0;
    if format.fill_gaps == GapPolicy::Previous && dt > 0 {
        (timestamps, prices, filled) = fill_previous(&timestamps, &prices, dt);
    }
    let mut series = PriceSeries::new(timestamps, prices, dt)?;
    series.filled_gaps = filled;
    Ok(series)
}

/// Inserts carried-forward prices on missing grid points. Spacings that are
/// not whole multiples of `dt` are left for the grid check to reject.
fn fill_previous(ts: &[i64], ps: &[f64], dt: i64) -> (Vec<i64>, Vec<f64>, usize) {
    let mut out_t = Vec::with_capacity(ts.len());
    let mut out_p = Vec::with_capacity(ps.len());
    let mut filled = 0;
    for i in 0..ts.len() {
        if i > 0 {
            let d = ts[i] - ts[i - 1];
            if d > dt && d % dt == 0 {
                let mut t = ts[i - 1] + dt;
                while t < ts[i] {
                    out_t.push(t);
                    out_p.push(ps[i - 1]);
                    filled += 1;
                    t += dt;
                }
            }
        }
        out_t.push(ts[i]);
        out_p.push(ps[i]);
    }
    (out_t, out_p, filled)
}

/// Loads an already-computed value series (returns, cascade, surrogate).
/// Only ordering and finiteness are enforced; the grid must still be regular.
pub fn load_values<R: Read>(source: R, format: &CsvFormat) -> Result<ReturnSeries> {
    let rows = read_rows(source, format)?;
    let dt = resolve_interval(&rows, format)?;
    let ts: Vec<i64> = rows.iter().map(|r| r.0).collect();
    check_grid(&ts, dt)?;
    ReturnSeries::new(rows.iter().map(|r| r.1).collect(), ts, dt)
}

/// Writes a value series as `timestamp,value` CSV.
pub fn write_values<W: Write>(sink: W, series: &ReturnSeries) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["timestamp", "value"]).map_err(io)?;
    for (t, v) in series.origin_timestamps.iter().zip(&series.values) {
        w.write_record([t.to_string(), v.to_string()]).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// `R(t_i) = ln p(t_{i+1}) - ln p(t_i)`.
pub fn log_returns(p: &PriceSeries) -> Result<ReturnSeries> {
    if p.len() < 2 {
        return Err(Error::Size(format!(
            "need at least 2 prices for returns, got {}",
            p.len()
        )));
    }
    let values = p.prices.windows(2).map(|w| w[1].ln() - w[0].ln()).collect();
    let ts = p.timestamps[..p.len() - 1].to_vec();
    ReturnSeries::new(values, ts, p.sampling_interval)
}

/// Running sum of returns.
pub fn cumulative_returns(r: &ReturnSeries) -> Vec<f64> {
    r.values
        .iter()
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect()
}

/// Timestamped series that can be cut to a calendar window.
pub trait Windowed: Sized {
    fn times(&self) -> &[i64];
    fn slice(&self, range: std::ops::Range<usize>) -> Self;
}

impl Windowed for PriceSeries {
    fn times(&self) -> &[i64] {
        &self.timestamps
    }
    fn slice(&self, range: std::ops::Range<usize>) -> Self {
        PriceSeries {
            timestamps: self.timestamps[range.clone()].to_vec(),
            prices: self.prices[range].to_vec(),
            sampling_interval: self.sampling_interval,
            filled_gaps: self.filled_gaps,
        }
    }
}

impl Windowed for ReturnSeries {
    fn times(&self) -> &[i64] {
        &self.origin_timestamps
    }
    fn slice(&self, range: std::ops::Range<usize>) -> Self {
        ReturnSeries {
            values: self.values[range.clone()].to_vec(),
            origin_timestamps: self.origin_timestamps[range].to_vec(),
            sampling_interval: self.sampling_interval,
        }
    }
}

/// Keeps the points with timestamps in `[start, end)`.
pub fn window_by_period<S: Windowed>(series: &S, start: i64, end: i64) -> Result<S> {
    if start >= end {
        return Err(Error::Config(format!("period start {start} is not before end {end}")));
    }
    let ts = series.times();
    let lo = ts.partition_point(|&t| t < start);
    let hi = ts.partition_point(|&t| t < end);
    if lo >= hi {
        return Err(Error::Size(format!("no points in [{start}, {end})")));
    }
    Ok(series.slice(lo..hi))
}
