//! Log-returns, standardization, display normalization, log-density
//! histograms and the crash scan.

use std::collections::BTreeMap;
use std::io::Write;

use chrono::{Datelike, NaiveDate};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::{ser_f64, sig9};
use crate::ingest::{AlignedPanel, MarketMeta};
use crate::panel::SeriesPanel;
use crate::stats;

pub const DEFAULT_LOG_DENSITY_BIN: f64 = 0.004;
pub const DEFAULT_CRASH_COUNT: usize = 10;

/// Log-returns of an aligned panel. Row `t` is labeled with the later date
/// of its price pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel {
    pub dates: Vec<NaiveDate>,
    pub markets: Vec<MarketMeta>,
    pub raw: DMatrix<f64>,
    /// True where the later close of the pair was forward-filled, i.e. the
    /// return is zero by construction.
    pub spans_fill: DMatrix<bool>,
    /// Present once [`ReturnPanel::standardize`] has run.
    pub standardized: Option<DMatrix<f64>>,
    /// Symbols whose raw column has zero variance. Their standardized column
    /// is all zeros and correlation drops them.
    pub zero_variance: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StandardizeOptions {
    /// Leave returns that span a forward-filled close out of the mean and
    /// standard deviation estimates.
    pub exclude_fill_spanning: bool,
}

impl ReturnPanel {
    pub fn symbols(&self) -> Vec<String> {
        self.markets.iter().map(|m| m.symbol.clone()).collect()
    }

    pub fn n_rows(&self) -> usize {
        self.raw.nrows()
    }

    pub fn standardize(mut self, opts: StandardizeOptions) -> ReturnPanel {
        let exclude = opts.exclude_fill_spanning.then_some(&self.spans_fill);
        let out = standardize(&self.raw, exclude);
        self.zero_variance = out.zero_variance.iter().map(|&j| self.markets[j].symbol.clone()).collect();
        self.standardized = Some(out.values);
        self
    }

    pub fn raw_panel(&self) -> SeriesPanel {
        SeriesPanel { dates: self.dates.clone(), symbols: self.symbols(), values: self.raw.clone() }
    }

    /// Standardized grid; errors when [`ReturnPanel::standardize`] has not run.
    pub fn standardized_panel(&self) -> Result<SeriesPanel> {
        let values = self
            .standardized
            .clone()
            .ok_or_else(|| Error::InvalidArgument("returns have not been standardized".into()))?;
        Ok(SeriesPanel { dates: self.dates.clone(), symbols: self.symbols(), values })
    }
}

/// `raw[t][i] = ln(values[t+1][i]) - ln(values[t][i])`.
pub fn log_returns(panel: &AlignedPanel) -> Result<ReturnPanel> {
    let d = panel.n_dates();
    if d < 2 {
        return Err(Error::TooFewRows { needed: 2, got: d });
    }
    if let Some((idx, v)) = panel.values.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
        let (t, j) = (idx % d, idx / d);
        return Err(Error::InvalidArgument(format!(
            "non-positive close {v} for {} on {}",
            panel.markets[j].symbol, panel.dates[t]
        )));
    }
    let n = panel.n_markets();
    let raw = DMatrix::from_fn(d - 1, n, |t, j| panel.values[(t + 1, j)].ln() - panel.values[(t, j)].ln());
    let spans_fill = DMatrix::from_fn(d - 1, n, |t, j| panel.fill_mask[(t + 1, j)]);
    Ok(ReturnPanel {
        dates: panel.dates[1..].to_vec(),
        markets: panel.markets.clone(),
        raw,
        spans_fill,
        standardized: None,
        zero_variance: Vec::new(),
    })
}

/// Column `(x - mean) / sd` with the sample standard deviation.
pub fn standardize_series(xs: &[f64]) -> Result<Vec<f64>> {
    renormalize(xs, 0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Standardized {
    pub values: DMatrix<f64>,
    /// Column indices with zero variance (left as zeros).
    pub zero_variance: Vec<usize>,
}

/// Standardize every column. When `exclude` is given, flagged cells do not
/// enter the mean/std estimates (they are still transformed).
pub fn standardize(raw: &DMatrix<f64>, exclude: Option<&DMatrix<bool>>) -> Standardized {
    let mut values = DMatrix::zeros(raw.nrows(), raw.ncols());
    let mut zero_variance = Vec::new();
    for j in 0..raw.ncols() {
        let col: Vec<f64> = raw.column(j).iter().copied().collect();
        let sample: Vec<f64> = match exclude {
            Some(mask) => col.iter().zip(mask.column(j).iter()).filter(|(_, &m)| !m).map(|(&x, _)| x).collect(),
            None => col.clone(),
        };
        let m = if sample.is_empty() { 0.0 } else { stats::mean(&sample) };
        let sd = stats::sample_std(&sample);
        if !is_spread(sd, m) {
            zero_variance.push(j);
            continue;
        }
        for (t, x) in col.iter().enumerate() {
            values[(t, j)] = (x - m) / sd;
        }
    }
    Standardized { values, zero_variance }
}

fn is_spread(sd: f64, mean: f64) -> bool {
    sd.is_finite() && sd > 1e-14 * mean.abs().max(f64::MIN_POSITIVE)
}

/// Affine map onto the given mean and sample standard deviation.
pub fn renormalize(xs: &[f64], target_mean: f64, target_std: f64) -> Result<Vec<f64>> {
    if xs.len() < 2 {
        return Err(Error::ZeroVariance(format!("series of length {}", xs.len())));
    }
    let m = stats::mean(xs);
    let sd = stats::sample_std(xs);
    if !is_spread(sd, m) {
        return Err(Error::ZeroVariance("constant series".into()));
    }
    Ok(xs.iter().map(|x| target_mean + target_std * (x - m) / sd).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogDensityBin {
    #[serde(serialize_with = "ser_f64")]
    pub center: f64,
    #[serde(serialize_with = "ser_f64")]
    pub log_density: f64,
}

/// `ln(1 + density)` per occupied bin of width `bin_width`.
pub fn log_density(values: &[f64], bin_width: f64) -> Result<Vec<LogDensityBin>> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("log-density of an empty sample".into()));
    }
    if !(bin_width > 0.0) {
        return Err(Error::InvalidArgument(format!("bin width {bin_width} must be positive")));
    }
    Ok(stats::density_histogram(values, bin_width)
        .into_iter()
        .map(|b| LogDensityBin { center: b.center, log_density: b.density.ln_1p() })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrashEvent {
    pub date: NaiveDate,
    pub ret: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarketCrashes {
    pub symbol: String,
    /// Ascending by return (worst first).
    pub events: Vec<CrashEvent>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrashReport {
    pub markets: Vec<MarketCrashes>,
    /// Year -> number of top-k events across all markets.
    pub yearly_counts: BTreeMap<i32, usize>,
}

/// The `k` most negative log-returns of every market; repeated drops in the
/// same year count once each.
pub fn scan_crashes(returns: &ReturnPanel, k: usize) -> Result<CrashReport> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if returns.n_rows() == 0 || returns.markets.is_empty() {
        return Err(Error::TooFewRows { needed: 1, got: returns.n_rows() });
    }
    let mut yearly_counts = BTreeMap::new();
    let markets = returns
        .markets
        .iter()
        .enumerate()
        .map(|(j, m)| {
            let mut events: Vec<CrashEvent> = returns
                .dates
                .iter()
                .zip(returns.raw.column(j).iter())
                .map(|(&date, &ret)| CrashEvent { date, ret })
                .collect();
            events.sort_by(|a, b| a.ret.total_cmp(&b.ret).then(a.date.cmp(&b.date)));
            events.truncate(k);
            for e in &events {
                *yearly_counts.entry(e.date.year()).or_insert(0) += 1;
            }
            MarketCrashes { symbol: m.symbol.clone(), events }
        })
        .collect();
    Ok(CrashReport { markets, yearly_counts })
}

#[derive(Serialize)]
struct CrashEventJson<'a> {
    symbol: &'a str,
    date: String,
    #[serde(rename = "return", serialize_with = "ser_f64")]
    ret: f64,
}

#[derive(Serialize)]
struct CrashReportJson<'a> {
    events: Vec<CrashEventJson<'a>>,
    yearly_counts: BTreeMap<String, usize>,
}

impl CrashReport {
    pub fn to_json(&self) -> Result<serde_json::Value> {
        let events = self
            .markets
            .iter()
            .flat_map(|m| {
                m.events.iter().map(move |e| CrashEventJson { symbol: &m.symbol, date: e.date.to_string(), ret: e.ret })
            })
            .collect();
        let yearly_counts = self.yearly_counts.iter().map(|(y, c)| (y.to_string(), *c)).collect();
        Ok(serde_json::to_value(CrashReportJson { events, yearly_counts })?)
    }
}

/// Write `date,<sym1>,...` returns; `standardized` selects the variant.
pub fn write_returns_csv<W: Write>(returns: &ReturnPanel, standardized: bool, out: W) -> Result<()> {
    let grid = if standardized {
        returns
            .standardized
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("returns have not been standardized".into()))?
    } else {
        &returns.raw
    };
    let mut w = csv::Writer::from_writer(out);
    w.write_record(std::iter::once("date".to_string()).chain(returns.symbols()))?;
    for (t, d) in returns.dates.iter().enumerate() {
        w.write_record(std::iter::once(d.to_string()).chain(grid.row(t).iter().map(|&v| sig9(v))))?;
    }
    w.flush()?;
    Ok(())
}
