//! Correlation matrices, their off-diagonal statistics, rolling averages and
//! periodized coefficient histograms.

use std::fmt;
use std::io::Write;
use std::ops::Range;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::{ser_f64, sig9};
use crate::panel::SeriesPanel;
use crate::stats::{self, Bin};

pub const DEFAULT_COEFFICIENT_BIN: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Method {
    Pearson,
    Spearman,
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pearson" => Ok(Method::Pearson),
            "spearman" => Ok(Method::Spearman),
            _ => Err(format!("unknown correlation method {s:?} (pearson|spearman)")),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Pearson => "pearson",
            Method::Spearman => "spearman",
        })
    }
}

/// Row span a matrix was estimated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Window {
    pub start: NaiveDate,
    pub end: NaiveDate,
    /// Number of rows.
    pub length: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub method: Method,
    pub symbols: Vec<String>,
    /// Symmetric, unit diagonal, entries in [-1, 1].
    pub entries: DMatrix<f64>,
    pub window: Option<Window>,
    /// Columns dropped for zero variance inside the window.
    pub excluded: Vec<String>,
}

impl CorrelationMatrix {
    pub fn n(&self) -> usize {
        self.symbols.len()
    }

    /// Entries `(i, j)` with `i < j`, row by row.
    pub fn upper_triangle(&self) -> Vec<f64> {
        let n = self.n();
        let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                out.push(self.entries[(i, j)]);
            }
        }
        out
    }

    /// Equicorrelated matrix: unit diagonal, constant off-diagonal `rho`.
    pub fn equicorrelated(n: usize, rho: f64) -> CorrelationMatrix {
        CorrelationMatrix {
            method: Method::Pearson,
            symbols: (0..n).map(|i| format!("X{}", i + 1)).collect(),
            entries: DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { rho }),
            window: None,
            excluded: Vec::new(),
        }
    }

    /// Symmetric grid with the symbols as header row and first column.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(std::iter::once("symbol".to_string()).chain(self.symbols.iter().cloned()))?;
        for (i, s) in self.symbols.iter().enumerate() {
            w.write_record(std::iter::once(s.clone()).chain(self.entries.row(i).iter().map(|&v| sig9(v))))?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_rows(panel: &SeriesPanel, rows: &Range<usize>) -> Result<()> {
    if rows.end > panel.n_rows() || rows.start > rows.end {
        return Err(Error::WindowTooLong { window: rows.len(), rows: panel.n_rows() });
    }
    if rows.len() < 3 {
        return Err(Error::TooFewRows { needed: 3, got: rows.len() });
    }
    Ok(())
}

fn window_of(panel: &SeriesPanel, rows: &Range<usize>) -> Window {
    Window { start: panel.dates[rows.start], end: panel.dates[rows.end - 1], length: rows.len() }
}

/// Sample Pearson correlation of the columns over `rows` (all rows when
/// `None`). Zero-variance columns are dropped and listed in `excluded`.
pub fn pearson(panel: &SeriesPanel, rows: Option<Range<usize>>) -> Result<CorrelationMatrix> {
    let rows = rows.unwrap_or(0..panel.n_rows());
    check_rows(panel, &rows)?;
    let window = window_of(panel, &rows);
    let columns = (0..panel.n_cols())
        .map(|j| panel.values.column(j).rows(rows.start, rows.len()).iter().copied().collect())
        .collect::<Vec<Vec<f64>>>();
    Ok(pearson_columns(Method::Pearson, &panel.symbols, columns, window))
}

/// Spearman correlation: Pearson correlation of per-column average ranks
/// within the window.
pub fn spearman(panel: &SeriesPanel, rows: Option<Range<usize>>) -> Result<CorrelationMatrix> {
    let rows = rows.unwrap_or(0..panel.n_rows());
    check_rows(panel, &rows)?;
    let window = window_of(panel, &rows);
    let columns = (0..panel.n_cols())
        .map(|j| {
            let col: Vec<f64> = panel.values.column(j).rows(rows.start, rows.len()).iter().copied().collect();
            stats::average_ranks(&col)
        })
        .collect::<Vec<Vec<f64>>>();
    Ok(pearson_columns(Method::Spearman, &panel.symbols, columns, window))
}

pub fn correlation(panel: &SeriesPanel, rows: Option<Range<usize>>, method: Method) -> Result<CorrelationMatrix> {
    match method {
        Method::Pearson => pearson(panel, rows),
        Method::Spearman => spearman(panel, rows),
    }
}

fn pearson_columns(method: Method, symbols: &[String], columns: Vec<Vec<f64>>, window: Window) -> CorrelationMatrix {
    let mut kept_symbols = Vec::new();
    let mut excluded = Vec::new();
    let mut centered: Vec<Vec<f64>> = Vec::new();
    let mut sums_sq = Vec::new();
    for (sym, col) in symbols.iter().zip(columns) {
        let m = stats::mean(&col);
        let c: Vec<f64> = col.iter().map(|x| x - m).collect();
        let ss: f64 = c.iter().map(|x| x * x).sum();
        let sd = (ss / (c.len() - 1) as f64).sqrt();
        if !(sd > 1e-14 * m.abs()) || !sd.is_finite() {
            excluded.push(sym.clone());
            continue;
        }
        kept_symbols.push(sym.clone());
        sums_sq.push(ss);
        centered.push(c);
    }
    let n = centered.len();
    let mut entries = DMatrix::identity(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let dot: f64 = centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).sum();
            let r = (dot / (sums_sq[i] * sums_sq[j]).sqrt()).clamp(-1.0, 1.0);
            entries[(i, j)] = r;
            entries[(j, i)] = r;
        }
    }
    CorrelationMatrix { method, symbols: kept_symbols, entries, window: Some(window), excluded }
}

/// Mean, sample standard deviation, skewness and non-excess kurtosis of the
/// `i < j` entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OffDiagStats {
    pub count: usize,
    #[serde(serialize_with = "ser_f64")]
    pub mean: f64,
    #[serde(serialize_with = "ser_f64")]
    pub std: f64,
    #[serde(serialize_with = "crate::format::ser_opt_f64")]
    pub skewness: Option<f64>,
    #[serde(serialize_with = "crate::format::ser_opt_f64")]
    pub kurtosis: Option<f64>,
}

pub fn offdiag_stats(matrix: &CorrelationMatrix) -> Result<OffDiagStats> {
    if matrix.n() < 2 {
        return Err(Error::InvalidArgument(format!(
            "off-diagonal statistics need at least 2 markets, got {}",
            matrix.n()
        )));
    }
    let xs = matrix.upper_triangle();
    let m = stats::moments(&xs);
    Ok(OffDiagStats { count: xs.len(), mean: m.mean, std: m.std, skewness: m.skewness, kurtosis: m.kurtosis })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RollingKind {
    MeanCorrelation,
    Volatility,
    MeanVolatility,
    Covariance,
    Skewness,
    Kurtosis,
}

/// Window statistic labeled by the window's last date. NaN marks a window
/// where the statistic is undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct RollingSeries {
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
    pub window_length: usize,
    pub kind: RollingKind,
}

impl RollingSeries {
    /// `end_date,value`; undefined values are written as empty fields.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["end_date", "value"])?;
        for (d, v) in self.dates.iter().zip(&self.values) {
            w.write_record([d.to_string(), sig9(*v)])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Indices of undefined windows.
    pub fn gaps(&self) -> Vec<usize> {
        self.values.iter().enumerate().filter(|(_, v)| v.is_nan()).map(|(i, _)| i).collect()
    }
}

/// Row ranges of all windows of `window` consecutive rows.
pub fn window_ranges(rows: usize, window: usize) -> Result<Vec<Range<usize>>> {
    if window == 0 || window > rows {
        return Err(Error::WindowTooLong { window, rows });
    }
    Ok((0..=rows - window).map(|s| s..s + window).collect())
}

pub(crate) fn window_label(panel: &SeriesPanel, rows: &Range<usize>) -> String {
    format!("window {} to {}", panel.dates[rows.start], panel.dates[rows.end - 1])
}

/// Apply `stat` to the correlation matrix of every window.
pub(crate) fn rolling_matrices<T: Send>(
    panel: &SeriesPanel,
    window: usize,
    method: Method,
    stat: impl Fn(&CorrelationMatrix) -> T + Sync,
) -> Result<(Vec<NaiveDate>, Vec<T>)> {
    let ranges = window_ranges(panel.n_rows(), window)?;
    if window < 3 {
        return Err(Error::TooFewRows { needed: 3, got: window });
    }
    let dates = ranges.iter().map(|r| panel.dates[r.end - 1]).collect();
    let values = ranges
        .into_par_iter()
        .map(|r| {
            let label = window_label(panel, &r);
            correlation(panel, Some(r), method).map(|m| stat(&m)).map_err(|e| e.context(label))
        })
        .collect::<Result<Vec<T>>>()?;
    Ok((dates, values))
}

/// Average off-diagonal correlation per window of `window` rows.
pub fn rolling_mean_correlation(panel: &SeriesPanel, window: usize, method: Method) -> Result<RollingSeries> {
    let (dates, values) =
        rolling_matrices(
            panel,
            window,
            method,
            |m| {
                if m.n() < 2 {
                    f64::NAN
                } else {
                    stats::mean(&m.upper_triangle())
                }
            },
        )?;
    Ok(RollingSeries { dates, values, window_length: window, kind: RollingKind::MeanCorrelation })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Period {
    /// Calendar two-month blocks (Jan/Feb, Mar/Apr, ...) followed by the
    /// full span.
    BiMonthly,
    FullSpan,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodHistogram {
    pub period: String,
    #[serde(serialize_with = "ser_f64")]
    pub bin_width: f64,
    pub bins: Vec<HistogramBin>,
    #[serde(skip)]
    pub matrix: CorrelationMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramBin {
    #[serde(serialize_with = "ser_f64")]
    pub center: f64,
    #[serde(serialize_with = "ser_f64")]
    pub density: f64,
}

impl From<Bin> for HistogramBin {
    fn from(b: Bin) -> Self {
        HistogramBin { center: b.center, density: b.density }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodizedDistribution {
    pub histograms: Vec<PeriodHistogram>,
    pub warnings: Vec<String>,
}

fn bimonthly_blocks(dates: &[NaiveDate]) -> Vec<(String, Range<usize>)> {
    let key = |d: &NaiveDate| (d.year(), (d.month0() / 2) as i32);
    let mut out: Vec<(String, Range<usize>)> = Vec::new();
    let mut start = 0;
    for t in 1..=dates.len() {
        if t == dates.len() || key(&dates[t]) != key(&dates[start]) {
            let (y, b) = key(&dates[start]);
            out.push((format!("{y}-{:02}/{:02}", 2 * b + 1, 2 * b + 2), start..t));
            start = t;
        }
    }
    out
}

/// Correlation matrix and coefficient density histogram per period.
pub fn periodized_coefficient_distribution(
    panel: &SeriesPanel,
    period: Period,
    bin_width: f64,
    method: Method,
) -> Result<PeriodizedDistribution> {
    if !(bin_width > 0.0) {
        return Err(Error::InvalidArgument(format!("bin width {bin_width} must be positive")));
    }
    let mut blocks = match period {
        Period::BiMonthly => bimonthly_blocks(&panel.dates),
        Period::FullSpan => Vec::new(),
    };
    blocks.push(("full".to_string(), 0..panel.n_rows()));
    let mut histograms = Vec::new();
    let mut warnings = Vec::new();
    for (label, rows) in blocks {
        if rows.len() < 3 {
            warnings.push(format!("period {label} has {} rows (< 3), skipped", rows.len()));
            continue;
        }
        let matrix = correlation(panel, Some(rows), method)?;
        let coeffs = matrix.upper_triangle();
        if coeffs.is_empty() {
            warnings.push(format!("period {label} has fewer than 2 usable markets, skipped"));
            continue;
        }
        let bins = stats::density_histogram(&coeffs, bin_width).into_iter().map(HistogramBin::from).collect();
        histograms.push(PeriodHistogram { period: label, bin_width, bins, matrix });
    }
    Ok(PeriodizedDistribution { histograms, warnings })
}
