//! Market-mode series and the volatility / average-correlation co-movement.
//!
//! The market mode `m_t = sum_i e_i X_{i,t}` weights the standardized returns
//! by the sign-fixed leading eigenvector. Its volatility is `|m_t|`.

use std::io::Write;

use chrono::NaiveDate;
use rayon::prelude::*;

use crate::corrmat::{self, Method, RollingKind, RollingSeries};
use crate::error::{Error, Result};
use crate::format::sig9;
use crate::panel::SeriesPanel;
use crate::returns;
use crate::spectral::{self, SpectralDecomposition};
use crate::stats;

pub const DEFAULT_COV_WINDOW: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct MarketModeSeries {
    pub dates: Vec<NaiveDate>,
    pub symbols: Vec<String>,
    /// Leading eigenvector, one weight per symbol.
    pub weights: Vec<f64>,
    pub values: Vec<f64>,
    pub volatility: Vec<f64>,
}

impl MarketModeSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Market mode of `panel` using the leading eigenvector of `decomp`. The
/// panel must contain every symbol of the decomposition; extra columns are
/// ignored.
pub fn build_market_mode(panel: &SeriesPanel, decomp: &SpectralDecomposition) -> Result<MarketModeSeries> {
    if decomp.n() == 0 {
        return Err(Error::DimensionMismatch("empty decomposition".into()));
    }
    from_weights(panel, &decomp.symbols, decomp.leading_vector())
}

/// Market mode for an explicit weight vector. The weights are sign-fixed
/// first, so `w` and `-w` give the same series.
pub fn from_weights(panel: &SeriesPanel, symbols: &[String], mut weights: Vec<f64>) -> Result<MarketModeSeries> {
    if symbols.len() != weights.len() {
        return Err(Error::DimensionMismatch(format!("{} symbols but {} weights", symbols.len(), weights.len())));
    }
    let cols = symbols
        .iter()
        .map(|s| {
            panel
                .column_index(s)
                .ok_or_else(|| Error::DimensionMismatch(format!("market {s} is not in the return panel")))
        })
        .collect::<Result<Vec<_>>>()?;
    spectral::sign_fix(&mut weights);
    let values: Vec<f64> =
        (0..panel.n_rows()).map(|t| cols.iter().zip(&weights).map(|(&j, w)| w * panel.values[(t, j)]).sum()).collect();
    let volatility = values.iter().map(|v: &f64| v.abs()).collect();
    Ok(MarketModeSeries { dates: panel.dates.clone(), symbols: symbols.to_vec(), weights, values, volatility })
}

/// Mean of `|m_t|` over every window of `window` rows, labeled by window end.
pub fn rolling_volatility(series: &MarketModeSeries, window: usize) -> Result<RollingSeries> {
    let ranges = corrmat::window_ranges(series.len(), window)?;
    Ok(RollingSeries {
        dates: ranges.iter().map(|r| series.dates[r.end - 1]).collect(),
        values: ranges.into_iter().map(|r| stats::mean(&series.volatility[r])).collect(),
        window_length: window,
        kind: RollingKind::MeanVolatility,
    })
}

/// `|m_t|` on the end date of every window of `window` rows, so it lines up
/// with the other rolling series of the same window.
pub fn end_volatility(series: &MarketModeSeries, window: usize) -> Result<RollingSeries> {
    let ranges = corrmat::window_ranges(series.len(), window)?;
    Ok(RollingSeries {
        dates: ranges.iter().map(|r| series.dates[r.end - 1]).collect(),
        values: ranges.into_iter().map(|r| series.volatility[r.end - 1]).collect(),
        window_length: window,
        kind: RollingKind::Volatility,
    })
}

/// Rolling mean volatility where the market mode of each window comes from
/// that window's own correlation matrix.
pub fn rolling_volatility_reestimated(panel: &SeriesPanel, window: usize, method: Method) -> Result<RollingSeries> {
    let ranges = corrmat::window_ranges(panel.n_rows(), window)?;
    let dates = ranges.iter().map(|r| panel.dates[r.end - 1]).collect();
    let values = ranges
        .into_par_iter()
        .map(|r| {
            let label = corrmat::window_label(panel, &r);
            let run = || {
                let m = corrmat::correlation(panel, Some(r.clone()), method)?;
                let d = spectral::eigh(&m)?;
                let mode = build_market_mode(&panel.rows(r.start, r.end), &d)?;
                Ok(stats::mean(&mode.volatility))
            };
            run().map_err(|e: Error| e.context(label))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(RollingSeries { dates, values, window_length: window, kind: RollingKind::MeanVolatility })
}

/// Sample covariance of the paired values of `vol` and `meancorr` over every
/// window of `window` points, labeled by window end.
pub fn rolling_covariance(vol: &RollingSeries, meancorr: &RollingSeries, window: usize) -> Result<RollingSeries> {
    if vol.dates != meancorr.dates {
        return Err(Error::DateMismatch(format!(
            "{:?} series ({} points) and {:?} series ({} points) have different dates",
            vol.kind,
            vol.len(),
            meancorr.kind,
            meancorr.len()
        )));
    }
    if window < 2 {
        return Err(Error::InvalidArgument(format!("covariance window {window} must be at least 2")));
    }
    let ranges = corrmat::window_ranges(vol.len(), window)?;
    Ok(RollingSeries {
        dates: ranges.iter().map(|r| vol.dates[r.end - 1]).collect(),
        values: ranges
            .into_iter()
            .map(|r| stats::sample_covariance(&vol.values[r.clone()], &meancorr.values[r]))
            .collect(),
        window_length: window,
        kind: RollingKind::Covariance,
    })
}

/// Pearson correlation of two full series.
pub fn comovement_correlation(vol: &[f64], meancorr: &[f64]) -> Result<f64> {
    if vol.len() != meancorr.len() {
        return Err(Error::DimensionMismatch(format!("lengths {} and {}", vol.len(), meancorr.len())));
    }
    if vol.len() < 3 {
        return Err(Error::TooFewRows { needed: 3, got: vol.len() });
    }
    if vol.iter().chain(meancorr).any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("co-movement series contain undefined values".into()));
    }
    let sx = stats::sample_std(vol);
    let sy = stats::sample_std(meancorr);
    if !(sx > 0.0) || !(sy > 0.0) {
        return Err(Error::ZeroVariance("co-movement series is constant".into()));
    }
    Ok((stats::sample_covariance(vol, meancorr) / (sx * sy)).clamp(-1.0, 1.0))
}

/// How the market mode is obtained for rolling volatility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModeEstimation {
    /// One eigenvector from the full-period matrix.
    #[default]
    Fixed,
    /// A fresh eigenvector for every window.
    PerWindow,
}

/// The rolling series behind the co-movement plots. `mean_correlation`,
/// `volatility` and `mean_volatility` share window-end dates; `covariance`
/// (of mean volatility against mean correlation) starts `cov_window - 1`
/// points later.
#[derive(Debug, Clone, PartialEq)]
pub struct Comovement {
    pub mean_correlation: RollingSeries,
    pub volatility: RollingSeries,
    pub mean_volatility: RollingSeries,
    pub covariance: RollingSeries,
}

pub fn comovement(
    panel: &SeriesPanel,
    mode: &MarketModeSeries,
    window: usize,
    cov_window: usize,
    method: Method,
    estimation: ModeEstimation,
) -> Result<Comovement> {
    let mean_correlation = corrmat::rolling_mean_correlation(panel, window, method)?;
    let volatility = end_volatility(mode, window)?;
    let mean_volatility = match estimation {
        ModeEstimation::Fixed => rolling_volatility(mode, window)?,
        ModeEstimation::PerWindow => rolling_volatility_reestimated(panel, window, method)?,
    };
    let covariance = rolling_covariance(&mean_volatility, &mean_correlation, cov_window)?;
    Ok(Comovement { mean_correlation, volatility, mean_volatility, covariance })
}

impl Comovement {
    /// Correlation between mean volatility and mean correlation.
    pub fn correlation(&self) -> Result<f64> {
        comovement_correlation(&self.mean_volatility.values, &self.mean_correlation.values)
    }

    /// `end_date,mean_correlation,volatility,mean_volatility,covariance`
    /// followed by the same four columns mapped to `norm_mean` / `norm_std`.
    pub fn write_csv<W: Write>(&self, out: W, norm_mean: f64, norm_std: f64) -> Result<()> {
        let n = self.mean_correlation.len();
        let offset = n - self.covariance.len();
        let mut cov = vec![f64::NAN; offset];
        cov.extend_from_slice(&self.covariance.values);
        let raw = [&self.mean_correlation.values, &self.volatility.values, &self.mean_volatility.values, &cov];
        let normed = raw.iter().map(|xs| renormalize_defined(xs, norm_mean, norm_std)).collect::<Result<Vec<_>>>()?;

        let mut w = csv::Writer::from_writer(out);
        let names = ["mean_correlation", "volatility", "mean_volatility", "covariance"];
        w.write_record(
            std::iter::once("end_date".to_string())
                .chain(names.iter().map(|s| s.to_string()))
                .chain(names.iter().map(|s| format!("{s}_norm"))),
        )?;
        for t in 0..n {
            w.write_record(
                std::iter::once(self.mean_correlation.dates[t].to_string())
                    .chain(raw.iter().map(|c| sig9(c[t])))
                    .chain(normed.iter().map(|c| sig9(c[t]))),
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Renormalize the defined entries, leaving NaN in place.
fn renormalize_defined(xs: &[f64], mean: f64, std: f64) -> Result<Vec<f64>> {
    let defined: Vec<f64> = xs.iter().copied().filter(|x| !x.is_nan()).collect();
    let mut mapped = returns::renormalize(&defined, mean, std)?.into_iter();
    Ok(xs.iter().map(|x| if x.is_nan() { f64::NAN } else { mapped.next().unwrap() }).collect())
}

#[cfg(test)]
mod tests {
    use nalgebra::DMatrix;

    use super::*;
    use crate::corrmat::pearson;
    use crate::synth;

    fn panel(cols: usize, values: Vec<f64>) -> SeriesPanel {
        let rows = values.len() / cols;
        SeriesPanel::new(
            synth::synthetic_dates(rows),
            synth::symbols(cols),
            DMatrix::from_row_slice(rows, cols, &values),
        )
        .unwrap()
    }

    fn series(dates: Vec<NaiveDate>, values: Vec<f64>) -> RollingSeries {
        RollingSeries { dates, values, window_length: 1, kind: RollingKind::MeanCorrelation }
    }

    #[test]
    fn identical_columns_give_sqrt2_scaling() {
        let x = [1.0, -0.5, 0.25, -0.75];
        let p = panel(2, x.iter().flat_map(|&v| [v, v]).collect());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let m = from_weights(&p, &p.symbols, vec![h, h]).unwrap();
        for (mt, xt) in m.values.iter().zip(x) {
            assert!((mt - std::f64::consts::SQRT_2 * xt).abs() < 1e-15);
        }
        assert!(m.volatility.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn unit_weight_picks_a_column() {
        let p = panel(3, (0..12).map(|i| i as f64 * 0.3 - 1.0).collect());
        let m = from_weights(&p, &p.symbols, vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(m.values, p.column(1));
    }

    #[test]
    fn negated_weights_give_same_series() {
        let p = synth::generate(&synth::FactorModelSpec::uniform(5, 60, 0.4, 9)).unwrap();
        let d = spectral::eigh(&pearson(&p, None).unwrap()).unwrap();
        let v = d.leading_vector();
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        assert_eq!(from_weights(&p, &p.symbols, v).unwrap(), from_weights(&p, &p.symbols, neg).unwrap());
    }

    #[test]
    fn equicorrelated_mode_is_scaled_cross_sectional_mean() {
        // columns 1.5 g + e_i built from distinct zero-sum Hadamard columns
        // are exactly equicorrelated, so the leading eigenvector is uniform
        let (n, rows) = (4, 8);
        let h = |i: usize, j: usize| if (i & j).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
        let vals: Vec<f64> = (0..rows).flat_map(|t| (0..n).map(move |i| 1.5 * h(t, 1) + h(t, i + 2))).collect();
        let p = panel(n, vals);
        let m = pearson(&p, None).unwrap();
        let off = m.upper_triangle();
        assert!(off.iter().all(|r| (r - off[0]).abs() < 1e-12));
        let d = spectral::eigh(&m).unwrap();
        let mode = build_market_mode(&p, &d).unwrap();
        for t in 0..rows {
            let mean = (0..n).map(|j| p.values[(t, j)]).sum::<f64>() / n as f64;
            assert!((mode.values[t] - (n as f64).sqrt() * mean).abs() < 1e-6);
        }
    }

    #[test]
    fn missing_symbol_is_a_dimension_mismatch() {
        let p = panel(2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 7.0]);
        let err = from_weights(&p, &["M01".into(), "ZZ".into()], vec![1.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
        assert!(from_weights(&p, &p.symbols, vec![1.0]).is_err());
    }

    #[test]
    fn rolling_volatility_by_hand() {
        let p = panel(1, vec![1.0, -2.0, 3.0, -4.0]);
        let m = from_weights(&p, &p.symbols, vec![1.0]).unwrap();
        assert_eq!(rolling_volatility(&m, 2).unwrap().values, vec![1.5, 2.5, 3.5]);
        assert_eq!(rolling_volatility(&m, 4).unwrap().values, vec![2.5]);
        assert_eq!(end_volatility(&m, 2).unwrap().values, vec![2.0, 3.0, 4.0]);
        assert!(matches!(rolling_volatility(&m, 5), Err(Error::WindowTooLong { window: 5, rows: 4 })));
        let c = from_weights(&panel(1, vec![2.0, -2.0, 2.0]), &["M01".into()], vec![1.0]).unwrap();
        assert_eq!(rolling_volatility(&c, 2).unwrap().values, vec![2.0, 2.0]);
    }

    #[test]
    fn covariance_oracles() {
        let dates = synth::synthetic_dates(8);
        let x: Vec<f64> = vec![0.3, 0.1, 0.7, 0.2, 0.9, 0.4, 0.5, 0.8];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let cov = rolling_covariance(&series(dates.clone(), x.clone()), &series(dates.clone(), y), 4).unwrap();
        for (k, c) in cov.values.iter().enumerate() {
            assert!((c - 2.0 * stats::sample_variance(&x[k..k + 4])).abs() < 1e-12);
        }
        let same = rolling_covariance(&series(dates.clone(), x.clone()), &series(dates.clone(), x.clone()), 8).unwrap();
        assert!((same.values[0] - stats::sample_variance(&x)).abs() < 1e-15);
        let flat =
            rolling_covariance(&series(dates.clone(), x.clone()), &series(dates.clone(), vec![0.2; 8]), 3).unwrap();
        assert!(flat.values.iter().all(|&c| c.abs() < 1e-15));
        let err = rolling_covariance(
            &series(dates[1..].to_vec(), x[1..].to_vec()),
            &series(dates[..7].to_vec(), x[..7].to_vec()),
            3,
        );
        assert!(matches!(err, Err(Error::DateMismatch(_))));
    }

    #[test]
    fn comovement_correlation_cases() {
        let x = [1.0, 3.0, 2.0, 5.0];
        assert!((comovement_correlation(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(comovement_correlation(&x, &[1.0; 4]), Err(Error::ZeroVariance(_))));
        assert!(comovement_correlation(&x[..2], &x[..2]).is_err());
        let g = synth::gaussian_matrix(10_000, 2, 5);
        let a: Vec<f64> = g.column(0).iter().copied().collect();
        let b: Vec<f64> = g.column(1).iter().copied().collect();
        assert!(comovement_correlation(&a, &b).unwrap().abs() < 0.05);
    }

    #[test]
    fn comovement_table_layout() {
        let p = synth::generate(&synth::FactorModelSpec::regime_change(6, 80, 40, 0.1, 0.6, 4)).unwrap();
        let d = spectral::eigh(&pearson(&p, None).unwrap()).unwrap();
        let mode = build_market_mode(&p, &d).unwrap();
        let c = comovement(&p, &mode, 20, 10, Method::Pearson, ModeEstimation::Fixed).unwrap();
        assert_eq!(c.mean_correlation.len(), 61);
        assert_eq!(c.covariance.len(), 52);
        let mut buf = Vec::new();
        c.write_csv(&mut buf, 2.0, 1.0).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 62);
        assert!(lines[0].starts_with("end_date,mean_correlation,volatility,mean_volatility,covariance,"));
        assert!(lines[1].split(',').nth(4).unwrap().is_empty());
        assert!(!lines[10].split(',').nth(4).unwrap().is_empty());
        let per = comovement(&p, &mode, 20, 10, Method::Pearson, ModeEstimation::PerWindow).unwrap();
        assert_eq!(per.mean_volatility.dates, c.mean_volatility.dates);
    }
}
