//! Command-line front end. Every command reads its inputs, runs one pipeline
//! stage (or all of them for `report`) and writes CSV/JSON files into the
//! output directory.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::corrmat::{self, CorrelationMatrix, Method, Period};
use crate::error::{Error, Result};
use crate::format::{round_sig9, sig9};
use crate::ingest::{self, AlignedPanel, IngestWarning};
use crate::marketmode::{self, ModeEstimation};
use crate::normality;
use crate::panel::SeriesPanel;
use crate::returns::{self, ReturnPanel, StandardizeOptions};
use crate::spectral::{self, SpectralDecomposition};
use crate::synth::{self, FactorModelSpec};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_WINDOW: usize = 30;

#[derive(Debug, Parser)]
#[command(name = "rmtcorr", version, about = "Random-matrix diagnostics for cross-market correlation matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Merge market calendars and forward-fill gaps.
    Align(RunArgs),
    /// Raw and standardized log-returns plus per-market log densities.
    Returns(RunArgs),
    /// Correlation matrix, off-diagonal statistics and coefficient histograms.
    Corr(RunArgs),
    /// Eigenvalues against the random bulk, eigenvectors, IPR/PR.
    Spectrum(RunArgs),
    /// Rolling average correlation.
    Rolling(RunArgs),
    /// Market-mode series and volatility/correlation co-movement.
    Mode(RunArgs),
    /// Normality tests of correlation coefficients and rolling moments.
    Normality(RunArgs),
    /// Spectra of pure-noise correlation matrices.
    MpSim(MpSimArgs),
    /// Largest negative returns per market.
    Scan(ScanArgs),
    /// Full pipeline with a JSON summary.
    Report(RunArgs),
    /// Write a synthetic one-factor return panel.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Closing prices, `date,symbol,close`.
    #[arg(long, requires = "meta", conflicts_with = "returns")]
    pub prices: Option<PathBuf>,
    /// Market metadata, `symbol,name,country,region,weekend,eastern`.
    #[arg(long, requires = "prices")]
    pub meta: Option<PathBuf>,
    /// Returns grid, `date,<symbols...>`; standardized per column on load.
    #[arg(long)]
    pub returns: Option<PathBuf>,
    #[arg(long, default_value = "pearson")]
    pub method: Method,
    /// Rolling window in rows. For `corr`, restricts the matrix to the last
    /// `window` rows.
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long, default_value_t = marketmode::DEFAULT_COV_WINDOW)]
    pub cov_window: usize,
    #[arg(long)]
    pub phase_east: bool,
    #[arg(long, default_value_t = ingest::DEFAULT_DROP_THRESHOLD)]
    pub drop_threshold: f64,
    /// Leave returns across forward-filled closes out of the standardization.
    #[arg(long)]
    pub exclude_fill: bool,
    #[arg(long, default_value_t = 2.0)]
    pub norm_mean: f64,
    #[arg(long, default_value_t = 1.0)]
    pub norm_std: f64,
    #[arg(long, default_value_t = spectral::DEFAULT_EIGEN_BIN)]
    pub eigen_bin: f64,
    #[arg(long, default_value_t = corrmat::DEFAULT_COEFFICIENT_BIN)]
    pub coef_bin: f64,
    #[arg(long, default_value_t = returns::DEFAULT_LOG_DENSITY_BIN)]
    pub log_density_bin: f64,
    /// Coefficient periods: `bimonthly` or `full`.
    #[arg(long, default_value = "bimonthly", value_parser = parse_period)]
    pub period: Period,
    /// Re-estimate the market mode inside every rolling window.
    #[arg(long)]
    pub per_window_mode: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct MpSimArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub l: usize,
    #[arg(long, default_value_t = 20)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = spectral::DEFAULT_EIGEN_BIN)]
    pub eigen_bin: f64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Events kept per market.
    #[arg(long, default_value_t = returns::DEFAULT_CRASH_COUNT)]
    pub count: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 23)]
    pub n: usize,
    #[arg(long, default_value_t = 250)]
    pub rows: usize,
    #[arg(long, default_value_t = 0.1)]
    pub rho: f64,
    /// Correlation from `--break-row` on.
    #[arg(long, requires = "break_row")]
    pub rho_after: Option<f64>,
    #[arg(long, requires = "rho_after")]
    pub break_row: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

fn parse_period(s: &str) -> std::result::Result<Period, String> {
    match s.to_ascii_lowercase().as_str() {
        "bimonthly" => Ok(Period::BiMonthly),
        "full" => Ok(Period::FullSpan),
        _ => Err(format!("unknown period {s:?} (bimonthly|full)")),
    }
}

/// Validated settings shared by the pipeline commands; echoed in the report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub prices: Option<PathBuf>,
    pub meta: Option<PathBuf>,
    pub returns: Option<PathBuf>,
    pub method: Method,
    pub drop_threshold: f64,
    pub phase_east: bool,
    pub exclude_fill: bool,
    pub window: usize,
    pub cov_window: usize,
    pub norm_mean: f64,
    pub norm_std: f64,
    pub eigen_bin: f64,
    pub coef_bin: f64,
    pub log_density_bin: f64,
    pub period: String,
    pub per_window_mode: bool,
    pub seed: u64,
    pub out: PathBuf,
    #[serde(skip)]
    window_given: bool,
    #[serde(skip)]
    period_kind: Period,
}

impl RunConfig {
    pub fn from_args(a: &RunArgs) -> Result<RunConfig> {
        let cfg = RunConfig {
            prices: a.prices.clone(),
            meta: a.meta.clone(),
            returns: a.returns.clone(),
            method: a.method,
            drop_threshold: a.drop_threshold,
            phase_east: a.phase_east,
            exclude_fill: a.exclude_fill,
            window: a.window.unwrap_or(DEFAULT_WINDOW),
            cov_window: a.cov_window,
            norm_mean: a.norm_mean,
            norm_std: a.norm_std,
            eigen_bin: a.eigen_bin,
            coef_bin: a.coef_bin,
            log_density_bin: a.log_density_bin,
            period: match a.period {
                Period::BiMonthly => "bimonthly".into(),
                Period::FullSpan => "full".into(),
            },
            per_window_mode: a.per_window_mode,
            seed: a.seed,
            out: a.out.clone(),
            window_given: a.window.is_some(),
            period_kind: a.period,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.window < 3 {
            return bad(format!("--window {} must be at least 3", self.window));
        }
        if self.cov_window < 3 {
            return bad(format!("--cov-window {} must be at least 3", self.cov_window));
        }
        if !(self.drop_threshold > 0.0 && self.drop_threshold < 1.0) {
            return bad(format!("--drop-threshold {} must lie in (0, 1)", self.drop_threshold));
        }
        for (name, w) in
            [("eigen-bin", self.eigen_bin), ("coef-bin", self.coef_bin), ("log-density-bin", self.log_density_bin)]
        {
            if !(w > 0.0 && w.is_finite()) {
                return bad(format!("--{name} {w} must be positive"));
            }
        }
        if !(self.norm_std > 0.0 && self.norm_std.is_finite()) || !self.norm_mean.is_finite() {
            return bad(format!("--norm-std {} must be positive", self.norm_std));
        }
        if self.returns.is_none() && self.prices.is_none() {
            return bad("one of --prices/--meta or --returns is required".into());
        }
        Ok(())
    }

    fn mode_estimation(&self) -> ModeEstimation {
        if self.per_window_mode {
            ModeEstimation::PerWindow
        } else {
            ModeEstimation::Fixed
        }
    }
}

/// Parse `args` (including the program name) and run. Returns the process
/// exit status: 0 success, 1 input error, 2 numerical failure.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}

pub fn execute(command: &Command) -> Result<()> {
    match command {
        Command::Align(a) => cmd_align(&RunConfig::from_args(a)?),
        Command::Returns(a) => cmd_returns(&RunConfig::from_args(a)?),
        Command::Corr(a) => cmd_corr(&RunConfig::from_args(a)?),
        Command::Spectrum(a) => cmd_spectrum(&RunConfig::from_args(a)?),
        Command::Rolling(a) => cmd_rolling(&RunConfig::from_args(a)?),
        Command::Mode(a) => cmd_mode(&RunConfig::from_args(a)?),
        Command::Normality(a) => cmd_normality(&RunConfig::from_args(a)?),
        Command::MpSim(a) => cmd_mp_sim(a),
        Command::Scan(a) => cmd_scan(&RunConfig::from_args(&a.run)?, a.count),
        Command::Report(a) => cmd_report(&RunConfig::from_args(a)?),
        Command::Synth(a) => cmd_synth(a),
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::from(e).context(path.display().to_string()))
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::from(e).context(dir.display().to_string()))?;
    let path = dir.join(name);
    File::create(&path).map(BufWriter::new).map_err(|e| Error::from(e).context(path.display().to_string()))
}

fn write_json(dir: &Path, name: &str, value: &Value) -> Result<()> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn aligned_input(cfg: &RunConfig) -> Result<(AlignedPanel, Vec<IngestWarning>)> {
    let (prices, meta) = match (&cfg.prices, &cfg.meta) {
        (Some(p), Some(m)) => (p, m),
        _ => return Err(Error::InvalidArgument("this command needs --prices and --meta".into())),
    };
    let markets = ingest::parse_metadata(open(meta)?, false).map_err(|e| e.context(meta.display().to_string()))?;
    let panel = ingest::parse_prices(open(prices)?, &markets).map_err(|e| e.context(prices.display().to_string()))?;
    let (panel, warnings) = ingest::shift_weekend(&panel);
    let mut aligned = ingest::align(&panel, cfg.drop_threshold)?;
    if cfg.phase_east {
        aligned = ingest::phase_east(&aligned)?;
    }
    Ok((aligned, warnings))
}

/// Inputs after the returns stage.
struct Loaded {
    aligned: Option<(AlignedPanel, Vec<IngestWarning>)>,
    returns: Option<ReturnPanel>,
    /// Standardized returns.
    panel: SeriesPanel,
    zero_variance: Vec<String>,
}

fn load(cfg: &RunConfig) -> Result<Loaded> {
    if let Some(path) = &cfg.returns {
        let raw = SeriesPanel::read_csv(open(path)?).map_err(|e| e.context(path.display().to_string()))?;
        let std = returns::standardize(&raw.values, None);
        let zero_variance = std.zero_variance.iter().map(|&j| raw.symbols[j].clone()).collect();
        let panel = SeriesPanel::new(raw.dates, raw.symbols, std.values)?;
        return Ok(Loaded { aligned: None, returns: None, panel, zero_variance });
    }
    let (aligned, warnings) = aligned_input(cfg)?;
    let rets =
        returns::log_returns(&aligned)?.standardize(StandardizeOptions { exclude_fill_spanning: cfg.exclude_fill });
    let panel = rets.standardized_panel()?;
    Ok(Loaded {
        zero_variance: rets.zero_variance.clone(),
        aligned: Some((aligned, warnings)),
        returns: Some(rets),
        panel,
    })
}

fn alignment_json(aligned: &AlignedPanel, warnings: &[IngestWarning]) -> Value {
    json!({
        "n_dates": aligned.n_dates(),
        "n_markets": aligned.n_markets(),
        "first_date": aligned.dates.first().map(|d| d.to_string()),
        "last_date": aligned.dates.last().map(|d| d.to_string()),
        "dropped_dates": aligned.dropped_dates.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
        "filled_cells": aligned.fill_mask.iter().filter(|&&f| f).count(),
        "phased": aligned.phased,
        "warnings": warnings,
    })
}

fn write_alignment(cfg: &RunConfig, aligned: &AlignedPanel, warnings: &[IngestWarning]) -> Result<()> {
    aligned.write_csv(create(&cfg.out, "aligned.csv")?, create(&cfg.out, "fill_mask.csv")?)?;
    write_json(&cfg.out, "alignment.json", &alignment_json(aligned, warnings))
}

pub fn cmd_align(cfg: &RunConfig) -> Result<()> {
    let (aligned, warnings) = aligned_input(cfg)?;
    write_alignment(cfg, &aligned, &warnings)
}

pub fn cmd_returns(cfg: &RunConfig) -> Result<()> {
    let loaded = load(cfg)?;
    if let Some(rets) = &loaded.returns {
        returns::write_returns_csv(rets, false, create(&cfg.out, "returns.csv")?)?;
        returns::write_returns_csv(rets, true, create(&cfg.out, "returns_standardized.csv")?)?;
    } else {
        loaded.panel.write_csv(create(&cfg.out, "returns_standardized.csv")?)?;
    }
    let mut w = csv::Writer::from_writer(create(&cfg.out, "log_density.csv")?);
    w.write_record(["symbol", "center", "log_density"])?;
    for (j, sym) in loaded.panel.symbols.iter().enumerate() {
        if loaded.zero_variance.contains(sym) {
            continue;
        }
        for b in returns::log_density(&loaded.panel.column(j), cfg.log_density_bin)? {
            w.write_record([sym.clone(), sig9(b.center), sig9(b.log_density)])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn full_matrix(cfg: &RunConfig, panel: &SeriesPanel) -> Result<CorrelationMatrix> {
    let rows = panel.n_rows();
    if cfg.window_given {
        if cfg.window > rows {
            return Err(Error::WindowTooLong { window: cfg.window, rows });
        }
        corrmat::correlation(panel, Some(rows - cfg.window..rows), cfg.method)
    } else {
        corrmat::correlation(panel, None, cfg.method)
    }
}

fn correlation_json(m: &CorrelationMatrix, zero_variance: &[String]) -> Result<Value> {
    Ok(json!({
        "method": m.method.to_string(),
        "n": m.n(),
        "window": m.window,
        "excluded": m.excluded,
        "zero_variance": zero_variance,
        "offdiag": corrmat::offdiag_stats(m)?,
    }))
}

fn write_coefficients(cfg: &RunConfig, panel: &SeriesPanel) -> Result<corrmat::PeriodizedDistribution> {
    let dist = corrmat::periodized_coefficient_distribution(panel, cfg.period_kind, cfg.coef_bin, cfg.method)?;
    write_json(
        &cfg.out,
        "coefficient_histograms.json",
        &json!({ "histograms": dist.histograms, "warnings": dist.warnings }),
    )?;
    Ok(dist)
}

pub fn cmd_corr(cfg: &RunConfig) -> Result<()> {
    let loaded = load(cfg)?;
    let m = full_matrix(cfg, &loaded.panel)?;
    m.write_csv(create(&cfg.out, "correlation.csv")?)?;
    write_json(&cfg.out, "correlation.json", &correlation_json(&m, &loaded.zero_variance)?)?;
    write_coefficients(cfg, &loaded.panel)?;
    Ok(())
}

fn spectrum_json(decomp: &SpectralDecomposition, rows: usize) -> Result<Value> {
    let summary = spectral::summarize(decomp, rows)?;
    let mut v = serde_json::to_value(&summary)?;
    v["symbols"] = json!(decomp.symbols);
    v["lambda_max"] = json!(round_sig9(decomp.lambda_max()));
    v["mean_pr"] = json!(round_sig9(spectral::mean_pr(decomp)));
    v["rows"] = json!(rows);
    Ok(v)
}

fn write_spectrum(cfg: &RunConfig, decomp: &SpectralDecomposition, rows: usize) -> Result<Value> {
    let v = spectrum_json(decomp, rows)?;
    write_json(&cfg.out, "spectrum.json", &v)?;
    decomp.write_eigenvectors_csv(create(&cfg.out, "eigenvectors.csv")?)?;
    let mp = spectral::mp_bounds(rows as f64 / decomp.n() as f64, 1.0)?;
    let mut w = csv::Writer::from_writer(create(&cfg.out, "eigenvalue_histogram.csv")?);
    w.write_record(["center", "density", "mp_density"])?;
    for b in crate::stats::density_histogram(&decomp.eigenvalues, cfg.eigen_bin) {
        w.write_record([sig9(b.center), sig9(b.density), sig9(spectral::mp_density(b.center, &mp))])?;
    }
    w.flush()?;
    Ok(v)
}

fn matrix_rows(m: &CorrelationMatrix, panel: &SeriesPanel) -> usize {
    m.window.map_or(panel.n_rows(), |w| w.length)
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<()> {
    let loaded = load(cfg)?;
    let m = full_matrix(cfg, &loaded.panel)?;
    let decomp = spectral::eigh(&m)?;
    write_spectrum(cfg, &decomp, matrix_rows(&m, &loaded.panel))?;
    Ok(())
}

pub fn cmd_rolling(cfg: &RunConfig) -> Result<()> {
    let loaded = load(cfg)?;
    let s = corrmat::rolling_mean_correlation(&loaded.panel, cfg.window, cfg.method)?;
    s.write_csv(create(&cfg.out, "rolling_mean_correlation.csv")?)
}

fn write_mode(cfg: &RunConfig, panel: &SeriesPanel, decomp: &SpectralDecomposition) -> Result<Value> {
    let mode = marketmode::build_market_mode(panel, decomp)?;
    let mut w = csv::Writer::from_writer(create(&cfg.out, "market_mode.csv")?);
    w.write_record(["date", "market_mode", "volatility"])?;
    for t in 0..mode.len() {
        w.write_record([mode.dates[t].to_string(), sig9(mode.values[t]), sig9(mode.volatility[t])])?;
    }
    w.flush()?;
    let co = marketmode::comovement(panel, &mode, cfg.window, cfg.cov_window, cfg.method, cfg.mode_estimation())?;
    co.write_csv(create(&cfg.out, "comovement.csv")?, cfg.norm_mean, cfg.norm_std)?;
    let r = co.correlation().map_err(|e| e.context("co-movement correlation"))?;
    let weights: serde_json::Map<String, Value> =
        mode.symbols.iter().zip(&mode.weights).map(|(s, &x)| (s.clone(), json!(round_sig9(x)))).collect();
    let v = json!({
        "weights": weights,
        "lambda_max": round_sig9(decomp.lambda_max()),
        "window": cfg.window,
        "cov_window": cfg.cov_window,
        "per_window_mode": cfg.per_window_mode,
        "comovement_correlation": round_sig9(r),
    });
    write_json(&cfg.out, "market_mode.json", &v)?;
    Ok(v)
}

pub fn cmd_mode(cfg: &RunConfig) -> Result<()> {
    let loaded = load(cfg)?;
    let m = corrmat::correlation(&loaded.panel, None, cfg.method)?;
    write_mode(cfg, &loaded.panel, &spectral::eigh(&m)?)?;
    Ok(())
}

fn write_normality(cfg: &RunConfig, panel: &SeriesPanel) -> Result<Value> {
    let dist = write_coefficients(cfg, panel)?;
    let mut periods = Vec::new();
    let mut warnings = dist.warnings.clone();
    for h in &dist.histograms {
        match normality::test_normality(&h.matrix.upper_triangle()) {
            Ok(r) => {
                let mut v = r.to_json();
                v["period"] = json!(h.period);
                periods.push(v);
            }
            Err(e @ (Error::TooFewRows { .. } | Error::ZeroVariance(_))) => {
                warnings.push(format!("period {}: {e}", h.period));
            }
            Err(e) => return Err(e.context(format!("period {}", h.period))),
        }
    }
    let (skew, kurt) = normality::rolling_moments(panel, cfg.window, cfg.method)?;
    skew.write_csv(create(&cfg.out, "rolling_skewness.csv")?)?;
    kurt.write_csv(create(&cfg.out, "rolling_kurtosis.csv")?)?;
    let v = json!({
        "periods": periods,
        "warnings": warnings,
        "rolling_window": cfg.window,
        "rolling_gaps": skew.gaps().len(),
    });
    write_json(&cfg.out, "normality.json", &v)?;
    Ok(v)
}

pub fn cmd_normality(cfg: &RunConfig) -> Result<()> {
    let loaded = load(cfg)?;
    write_normality(cfg, &loaded.panel)?;
    Ok(())
}

pub fn cmd_mp_sim(a: &MpSimArgs) -> Result<()> {
    if !(a.eigen_bin > 0.0) {
        return Err(Error::InvalidArgument(format!("--eigen-bin {} must be positive", a.eigen_bin)));
    }
    if a.replicates == 0 {
        return Err(Error::InvalidArgument("--replicates must be at least 1".into()));
    }
    let rs = spectral::sample_random_spectrum(a.n, a.l, a.seed, a.replicates, a.eigen_bin)?;
    let mut w = csv::Writer::from_writer(create(&a.out, "mp_histogram.csv")?);
    w.write_record(["center", "density", "mp_density"])?;
    for b in &rs.histogram {
        w.write_record([sig9(b.center), sig9(b.density), sig9(spectral::mp_density(b.center, &rs.mp))])?;
    }
    w.flush()?;
    write_json(
        &a.out,
        "mp_sim.json",
        &json!({
            "n": a.n,
            "l": a.l,
            "replicates": a.replicates,
            "seed": a.seed,
            "mp": rs.mp,
            "fraction_outside": round_sig9(rs.fraction_outside()),
            "l1_distance": round_sig9(rs.l1_distance_to_mp()),
            "eigenvalues": rs.spectra.iter().map(|s| s.iter().map(|&x| round_sig9(x)).collect::<Vec<_>>()).collect::<Vec<_>>(),
        }),
    )
}

pub fn cmd_scan(cfg: &RunConfig, count: usize) -> Result<()> {
    let loaded = load(cfg)?;
    let rets =
        loaded.returns.ok_or_else(|| Error::InvalidArgument("scan needs raw prices (--prices and --meta)".into()))?;
    write_json(&cfg.out, "crashes.json", &returns::scan_crashes(&rets, count)?.to_json()?)
}

pub fn cmd_report(cfg: &RunConfig) -> Result<()> {
    let loaded = load(cfg)?;
    let alignment = match &loaded.aligned {
        Some((aligned, warnings)) => {
            write_alignment(cfg, aligned, warnings)?;
            alignment_json(aligned, warnings)
        }
        None => json!({ "source": "returns", "n_dates": loaded.panel.n_rows(), "n_markets": loaded.panel.n_cols() }),
    };
    let panel = &loaded.panel;
    let m = full_matrix(cfg, panel)?;
    m.write_csv(create(&cfg.out, "correlation.csv")?)?;
    let correlation = correlation_json(&m, &loaded.zero_variance)?;
    let decomp = spectral::eigh(&m)?;
    let spectrum = write_spectrum(cfg, &decomp, matrix_rows(&m, panel))?;
    let market_mode = write_mode(cfg, panel, &decomp)?;
    let normality = write_normality(cfg, panel)?;
    corrmat::rolling_mean_correlation(panel, cfg.window, cfg.method)?
        .write_csv(create(&cfg.out, "rolling_mean_correlation.csv")?)?;
    write_json(
        &cfg.out,
        "report.json",
        &json!({
            "schema_version": SCHEMA_VERSION,
            "config": cfg,
            "alignment": alignment,
            "correlation": correlation,
            "spectrum": spectrum,
            "market_mode": market_mode,
            "normality": normality,
        }),
    )
}

pub fn cmd_synth(a: &SynthArgs) -> Result<()> {
    let spec = match (a.break_row, a.rho_after) {
        (Some(b), Some(after)) => FactorModelSpec::regime_change(a.n, a.rows, b, a.rho, after, a.seed),
        _ => FactorModelSpec::uniform(a.n, a.rows, a.rho, a.seed),
    };
    let panel = synth::generate(&spec)?;
    let mut w = create(&a.out, "returns.csv")?;
    panel.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}
