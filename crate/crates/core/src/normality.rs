//! Normality tests for samples of correlation coefficients.
//!
//! Jarque–Bera uses the asymptotic chi-square(2) critical value. Lilliefors
//! critical values are calibrated by Monte Carlo: [`LILLIEFORS_REPLICATES`]
//! standard-normal samples of the same size, replicate `i` drawn with seed
//! [`LILLIEFORS_SEED`]` + i`, and the nearest-rank 95th percentile of the
//! resulting statistics. Calibrated values are cached per sample size.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rayon::prelude::*;
use serde_json::json;

use crate::corrmat::{self, Method, RollingKind, RollingSeries};
use crate::error::{Error, Result};
use crate::format::round_sig9;
use crate::panel::SeriesPanel;
use crate::stats;
use crate::synth;

pub const SIGNIFICANCE: f64 = 0.05;
pub const LILLIEFORS_REPLICATES: usize = 10_000;
pub const LILLIEFORS_SEED: u64 = 19_871_019;

/// 5% critical value of chi-square with 2 degrees of freedom. Its CDF is
/// `1 - exp(-x / 2)`, so the quantile is `-2 ln(alpha)`.
pub fn jb_critical() -> f64 {
    -2.0 * SIGNIFICANCE.ln()
}

/// `n / 6 * (s^2 + (k - 3)^2 / 4)`.
pub fn jb_from_moments(n: usize, skewness: f64, kurtosis: f64) -> f64 {
    n as f64 / 6.0 * (skewness * skewness + (kurtosis - 3.0).powi(2) / 4.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JarqueBera {
    pub statistic: f64,
    pub reject: bool,
}

pub fn jarque_bera(sample: &[f64]) -> Result<JarqueBera> {
    if sample.len() < 4 {
        return Err(Error::TooFewRows { needed: 4, got: sample.len() });
    }
    let (s, k) = shape(sample)?;
    let statistic = jb_from_moments(sample.len(), s, k);
    Ok(JarqueBera { statistic, reject: statistic > jb_critical() })
}

fn shape(sample: &[f64]) -> Result<(f64, f64)> {
    let m = stats::moments(sample);
    match (m.skewness, m.kurtosis) {
        (Some(s), Some(k)) => Ok((s, k)),
        _ => Err(Error::ZeroVariance(format!("sample of {} values has no spread", sample.len()))),
    }
}

/// `max(D+, D-)` between the empirical CDF of `sample` and the normal CDF
/// with the given parameters, where `D+ = max(i/n - F(x_(i)))` and
/// `D- = max(F(x_(i)) - (i-1)/n)`.
pub fn ks_normal_statistic(sample: &[f64], mean: f64, std: f64) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, x) in xs.iter().enumerate() {
        let f = stats::normal_cdf((x - mean) / std);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    d
}

/// Lilliefors statistic: the KS distance to the normal with the sample's
/// mean and sample standard deviation.
pub fn lilliefors_statistic(sample: &[f64]) -> Result<f64> {
    if sample.len() < 5 {
        return Err(Error::TooFewRows { needed: 5, got: sample.len() });
    }
    shape(sample)?;
    Ok(ks_normal_statistic(sample, stats::mean(sample), stats::sample_std(sample)))
}

/// Nearest-rank 95th percentile of the Lilliefors statistic over
/// `replicates` standard-normal samples of size `n`.
pub fn calibrate_lilliefors(n: usize, replicates: usize, seed: u64) -> Result<f64> {
    if n < 5 {
        return Err(Error::TooFewRows { needed: 5, got: n });
    }
    if replicates == 0 {
        return Err(Error::InvalidArgument("need at least one replicate".into()));
    }
    let mut null: Vec<f64> = (0..replicates)
        .into_par_iter()
        .map(|i| {
            let g = synth::gaussian_matrix(n, 1, seed.wrapping_add(i as u64));
            lilliefors_statistic(g.as_slice())
        })
        .collect::<Result<_>>()?;
    null.sort_by(f64::total_cmp);
    let rank = ((1.0 - SIGNIFICANCE) * replicates as f64).ceil() as usize;
    Ok(null[rank.max(1) - 1])
}

/// Cached 5% critical value for samples of size `n`.
pub fn lilliefors_critical(n: usize) -> Result<f64> {
    static TABLE: OnceLock<Mutex<HashMap<usize, f64>>> = OnceLock::new();
    let table = TABLE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&c) = table.lock().expect("critical table lock").get(&n) {
        return Ok(c);
    }
    let c = calibrate_lilliefors(n, LILLIEFORS_REPLICATES, LILLIEFORS_SEED)?;
    table.lock().expect("critical table lock").insert(n, c);
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lilliefors {
    pub statistic: f64,
    pub critical: f64,
    pub reject: bool,
}

pub fn lilliefors(sample: &[f64]) -> Result<Lilliefors> {
    let statistic = lilliefors_statistic(sample)?;
    let critical = lilliefors_critical(sample.len())?;
    Ok(Lilliefors { statistic, critical, reject: statistic > critical })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalityResult {
    pub n: usize,
    pub skewness: f64,
    pub kurtosis: f64,
    pub jb: JarqueBera,
    pub lilliefors: Lilliefors,
}

impl NormalityResult {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "n": self.n,
            "skewness": round_sig9(self.skewness),
            "kurtosis": round_sig9(self.kurtosis),
            "jb": { "stat": round_sig9(self.jb.statistic), "reject": self.jb.reject },
            "lilliefors": {
                "stat": round_sig9(self.lilliefors.statistic),
                "critical": round_sig9(self.lilliefors.critical),
                "reject": self.lilliefors.reject,
            },
        })
    }
}

/// Both tests on one sample.
pub fn test_normality(sample: &[f64]) -> Result<NormalityResult> {
    let jb = jarque_bera(sample)?;
    let (skewness, kurtosis) = shape(sample)?;
    Ok(NormalityResult { n: sample.len(), skewness, kurtosis, jb, lilliefors: lilliefors(sample)? })
}

/// Skewness and kurtosis of the off-diagonal coefficients of every window's
/// correlation matrix. Windows where they are undefined hold NaN.
pub fn rolling_moments(panel: &SeriesPanel, window: usize, method: Method) -> Result<(RollingSeries, RollingSeries)> {
    let (dates, pairs) = corrmat::rolling_matrices(panel, window, method, |m| {
        corrmat::offdiag_stats(m)
            .map(|s| (s.skewness.unwrap_or(f64::NAN), s.kurtosis.unwrap_or(f64::NAN)))
            .unwrap_or((f64::NAN, f64::NAN))
    })?;
    let (skew, kurt): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    Ok((
        RollingSeries { dates: dates.clone(), values: skew, window_length: window, kind: RollingKind::Skewness },
        RollingSeries { dates, values: kurt, window_length: window, kind: RollingKind::Kurtosis },
    ))
}
