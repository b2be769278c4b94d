//! Small descriptive-statistics helpers shared by the analysis modules.
//!
//! Standard deviations and covariances use the sample divisor `n - 1`.
//! Skewness and kurtosis use central moments with divisor `n`, and kurtosis
//! is the non-excess form (3 for a normal distribution).

use std::collections::BTreeMap;

use statrs::function::erf::erfc;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance (divisor `n - 1`). Zero for fewer than two points.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn sample_std(xs: &[f64]) -> f64 {
    sample_variance(xs).sqrt()
}

/// Sample covariance (divisor `n - 1`) of two equal-length slices.
pub fn sample_covariance(xs: &[f64], ys: &[f64]) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    if xs.len() < 2 {
        return 0.0;
    }
    let mx = mean(xs);
    let my = mean(ys);
    xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Shape statistics of a sample from its central moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    /// Sample standard deviation (divisor `n - 1`).
    pub std: f64,
    /// `m3 / m2^(3/2)`; `None` when the sample has zero spread.
    pub skewness: Option<f64>,
    /// `m4 / m2^2` (non-excess); `None` when the sample has zero spread.
    pub kurtosis: Option<f64>,
}

pub fn moments(xs: &[f64]) -> Moments {
    let n = xs.len() as f64;
    let m = mean(xs);
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in xs {
        let d = x - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let std = if xs.len() > 1 { (m2 / (n - 1.0)).sqrt() } else { 0.0 };
    m2 /= n;
    m3 /= n;
    m4 /= n;
    // a constant sample still leaves rounding noise in m2
    let degenerate = m2.sqrt() <= 1e-13 * m.abs().max(1.0);
    let (skewness, kurtosis) = if degenerate { (None, None) } else { (Some(m3 / m2.powf(1.5)), Some(m4 / (m2 * m2))) };
    Moments { mean: m, std, skewness, kurtosis }
}

/// Ranks starting at 1, with tied values sharing the average of their ranks.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        // positions i..=j (0-based) share ranks i+1..=j+1
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Standard normal CDF through the complementary error function
/// (absolute error below 1e-10).
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// One histogram bin: center and probability density.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Bin {
    pub center: f64,
    pub density: f64,
}

/// Density histogram with bins `[k*w, (k+1)*w)`; empty bins are omitted.
/// Densities are `count / (total * w)` so the occupied bins integrate to 1.
pub fn density_histogram(values: &[f64], bin_width: f64) -> Vec<Bin> {
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for &v in values {
        *counts.entry((v / bin_width).floor() as i64).or_default() += 1;
    }
    let total = values.len() as f64;
    counts
        .into_iter()
        .map(|(k, c)| Bin { center: (k as f64 + 0.5) * bin_width, density: c as f64 / (total * bin_width) })
        .collect()
}
