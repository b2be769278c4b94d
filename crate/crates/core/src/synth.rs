//! Synthetic one-factor return panels.
//!
//! Each row is `x_i = sqrt(rho) * g + sqrt(1 - rho) * e_i` with a shared
//! standard Gaussian factor `g` and independent standard Gaussian `e_i`, so
//! the population correlation between any two columns is `rho`. `rho` may
//! change between row ranges (regimes). Columns are standardized afterwards.
//!
//! Gaussian draws come from `rand_distr::StandardNormal` (ziggurat) on a
//! `ChaCha8Rng` seeded with `seed_from_u64`; for a fixed seed the output is
//! bit-identical across runs and platforms. Within a row the factor is drawn
//! first, then the idiosyncratic terms in column order.

use std::ops::Range;

use chrono::{Datelike, Days, NaiveDate, Weekday};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::panel::SeriesPanel;
use crate::returns;

#[derive(Debug, Clone, PartialEq)]
pub struct Regime {
    pub rows: Range<usize>,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorModelSpec {
    pub n: usize,
    pub rows: usize,
    /// Correlation for rows not covered by a regime.
    pub rho: f64,
    pub regimes: Vec<Regime>,
    pub seed: u64,
}

impl FactorModelSpec {
    pub fn uniform(n: usize, rows: usize, rho: f64, seed: u64) -> Self {
        FactorModelSpec { n, rows, rho, regimes: Vec::new(), seed }
    }

    /// `before` for rows `0..break_row`, `after` from `break_row` on.
    pub fn regime_change(n: usize, rows: usize, break_row: usize, before: f64, after: f64, seed: u64) -> Self {
        FactorModelSpec { n, rows, rho: before, regimes: vec![Regime { rows: break_row..rows, rho: after }], seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 markets, got {}", self.n)));
        }
        if self.rows < 3 {
            return Err(Error::TooFewRows { needed: 3, got: self.rows });
        }
        let check = |rho: f64| {
            if (0.0..1.0).contains(&rho) {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("rho {rho} outside [0, 1)")))
            }
        };
        check(self.rho)?;
        for r in &self.regimes {
            check(r.rho)?;
            if r.rows.end > self.rows || r.rows.start > r.rows.end {
                return Err(Error::InvalidArgument(format!("regime rows {:?} outside 0..{}", r.rows, self.rows)));
            }
        }
        Ok(())
    }

    /// Correlation in force at `row` (the last matching regime wins).
    pub fn rho_at(&self, row: usize) -> f64 {
        self.regimes.iter().rev().find(|r| r.rows.contains(&row)).map_or(self.rho, |r| r.rho)
    }
}

/// Consecutive weekdays starting Monday 2000-01-03.
pub fn synthetic_dates(rows: usize) -> Vec<NaiveDate> {
    let mut d = NaiveDate::from_ymd_opt(2000, 1, 3).expect("valid date");
    let mut out = Vec::with_capacity(rows);
    while out.len() < rows {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d + Days::new(1);
    }
    out
}

pub fn symbols(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("M{i:02}")).collect()
}

/// `rows x cols` independent standard Gaussians, filled row by row.
pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        data.push(StandardNormal.sample(&mut rng));
    }
    DMatrix::from_row_slice(rows, cols, &data)
}

/// Draw the factor-model panel and standardize its columns.
pub fn generate(spec: &FactorModelSpec) -> Result<SeriesPanel> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut raw = DMatrix::zeros(spec.rows, spec.n);
    for t in 0..spec.rows {
        let rho = spec.rho_at(t);
        let (load, idio) = (rho.sqrt(), (1.0 - rho).sqrt());
        let g: f64 = StandardNormal.sample(&mut rng);
        for j in 0..spec.n {
            let e: f64 = StandardNormal.sample(&mut rng);
            raw[(t, j)] = load * g + idio * e;
        }
    }
    let std = returns::standardize(&raw, None);
    if !std.zero_variance.is_empty() {
        return Err(Error::ZeroVariance(format!("synthetic columns {:?}", std.zero_variance)));
    }
    SeriesPanel::new(synthetic_dates(spec.rows), symbols(spec.n), std.values)
}
