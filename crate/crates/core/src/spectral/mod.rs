//! Eigen-analysis of correlation matrices against the random-matrix bulk.

mod jacobi;
mod mp;

use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

pub use jacobi::{sign_fix, symmetric_eigen, MAX_SWEEPS};
pub use mp::{mp_bounds, mp_density, mp_mass, MpParams};

use crate::corrmat::{self, CorrelationMatrix};
use crate::error::{Error, Result};
use crate::format::{ser_f64, ser_f64_slice, sig9};
use crate::panel::SeriesPanel;
use crate::returns;
use crate::stats::{self, Bin};
use crate::synth;

pub const DEFAULT_EIGEN_BIN: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the unit eigenvector of `eigenvalues[k]`; row `i` is
    /// market `symbols[i]`.
    pub eigenvectors: DMatrix<f64>,
    pub symbols: Vec<String>,
}

impl SpectralDecomposition {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn lambda_max(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    /// Eigenvector of the largest eigenvalue.
    pub fn leading_vector(&self) -> Vec<f64> {
        self.eigenvectors.column(self.n() - 1).iter().copied().collect()
    }

    /// `sum_k lambda_k e_k e_k^T`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.eigenvalues));
        &self.eigenvectors * d * self.eigenvectors.transpose()
    }

    /// Symbols down the rows, one column per eigenvector (`e1` is the
    /// smallest eigenvalue).
    pub fn write_eigenvectors_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(std::iter::once("symbol".to_string()).chain((1..=self.n()).map(|k| format!("e{k}"))))?;
        for (i, s) in self.symbols.iter().enumerate() {
            w.write_record(std::iter::once(s.clone()).chain(self.eigenvectors.row(i).iter().map(|&v| sig9(v))))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Eigendecomposition of a correlation matrix. The input must be symmetric
/// within 1e-10.
pub fn eigh(matrix: &CorrelationMatrix) -> Result<SpectralDecomposition> {
    let m = &matrix.entries;
    let asym = (m - m.transpose()).abs().max();
    if asym > 1e-10 {
        return Err(Error::InvalidArgument(format!("matrix is not symmetric (max |a - a^T| = {asym:e})")));
    }
    if matrix.n() == 0 {
        return Err(Error::InvalidArgument("empty correlation matrix".into()));
    }
    let (eigenvalues, eigenvectors) = symmetric_eigen(m)?;
    Ok(SpectralDecomposition { eigenvalues, eigenvectors, symbols: matrix.symbols.clone() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BulkCounts {
    pub below: usize,
    pub inside: usize,
    pub above: usize,
}

impl BulkCounts {
    pub fn total(&self) -> usize {
        self.below + self.inside + self.above
    }

    pub fn fraction_inside(&self) -> f64 {
        self.inside as f64 / self.total() as f64
    }
}

/// Partition eigenvalues by the closed interval `[lambda-, lambda+]`.
pub fn classify_bulk(eigenvalues: &[f64], params: &MpParams) -> BulkCounts {
    let mut c = BulkCounts { below: 0, inside: 0, above: 0 };
    for &l in eigenvalues {
        if l < params.lambda_minus {
            c.below += 1;
        } else if l > params.lambda_plus {
            c.above += 1;
        } else {
            c.inside += 1;
        }
    }
    c
}

/// Inverse participation ratio `sum_i (e_k^i)^4` of every eigenvector.
pub fn ipr(decomp: &SpectralDecomposition) -> Vec<f64> {
    decomp.eigenvectors.column_iter().map(|c| c.iter().map(|x| x.powi(4)).sum()).collect()
}

/// Participation ratio `1 / IPR`: roughly how many markets carry weight in
/// each eigenvector.
pub fn pr(decomp: &SpectralDecomposition) -> Vec<f64> {
    ipr(decomp).into_iter().map(|x| 1.0 / x).collect()
}

pub fn mean_pr(decomp: &SpectralDecomposition) -> f64 {
    stats::mean(&pr(decomp))
}

/// Share of total variance carried by the largest eigenvalue.
pub fn explained_fraction(eigenvalues: &[f64]) -> f64 {
    let max = eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max / eigenvalues.iter().sum::<f64>()
}

/// `Q = L / N` for `rows` observations of the markets kept in `matrix`.
pub fn ratio(rows: usize, matrix: &CorrelationMatrix) -> f64 {
    rows as f64 / matrix.n() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSummary {
    #[serde(serialize_with = "ser_f64_slice")]
    pub eigenvalues: Vec<f64>,
    pub mp: MpParams,
    pub bulk: BulkCounts,
    #[serde(serialize_with = "ser_f64_slice")]
    pub ipr: Vec<f64>,
    #[serde(serialize_with = "ser_f64_slice")]
    pub pr: Vec<f64>,
    #[serde(serialize_with = "ser_f64")]
    pub explained_fraction: f64,
}

/// Everything the spectrum JSON carries, for a matrix estimated on `rows`
/// observations of standardized series (`sigma = 1`).
pub fn summarize(decomp: &SpectralDecomposition, rows: usize) -> Result<SpectrumSummary> {
    let mp = mp_bounds(rows as f64 / decomp.n() as f64, 1.0)?;
    Ok(SpectrumSummary {
        eigenvalues: decomp.eigenvalues.clone(),
        mp,
        bulk: classify_bulk(&decomp.eigenvalues, &mp),
        ipr: ipr(decomp),
        pr: pr(decomp),
        explained_fraction: explained_fraction(&decomp.eigenvalues),
    })
}

/// Pooled spectra of random correlation matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomSpectrum {
    pub n: usize,
    pub l: usize,
    pub seed: u64,
    pub mp: MpParams,
    /// One ascending spectrum per replicate.
    pub spectra: Vec<Vec<f64>>,
    pub bin_width: f64,
    /// Density histogram of the pooled eigenvalues.
    pub histogram: Vec<Bin>,
}

impl RandomSpectrum {
    pub fn pooled(&self) -> Vec<f64> {
        self.spectra.iter().flatten().copied().collect()
    }

    /// Fraction of pooled eigenvalues outside `[lambda-, lambda+]`.
    pub fn fraction_outside(&self) -> f64 {
        let pooled = self.pooled();
        let c = classify_bulk(&pooled, &self.mp);
        (c.below + c.above) as f64 / pooled.len() as f64
    }

    /// `sum_b |h_b - rho_b| * w` where `rho_b` is the bin average of the
    /// limiting density, over every bin touched by either.
    pub fn l1_distance_to_mp(&self) -> f64 {
        let w = self.bin_width;
        let lo = ((self.mp.lambda_minus / w).floor() as i64)
            .min(self.histogram.first().map_or(i64::MAX, |b| (b.center / w).floor() as i64));
        let hi = ((self.mp.lambda_plus / w).floor() as i64)
            .max(self.histogram.last().map_or(i64::MIN, |b| (b.center / w).floor() as i64));
        (lo..=hi)
            .map(|k| {
                let a = k as f64 * w;
                let h = self.histogram.iter().find(|b| (b.center / w).floor() as i64 == k).map_or(0.0, |b| b.density);
                (h * w - mp_mass(a, a + w, &self.mp)).abs()
            })
            .sum()
    }
}

/// Eigenvalues of `replicates` correlation matrices built from `l x n`
/// independent standard Gaussians (columns standardized first). Replicate
/// `r` uses seed `seed + r`.
pub fn sample_random_spectrum(
    n: usize,
    l: usize,
    seed: u64,
    replicates: usize,
    bin_width: f64,
) -> Result<RandomSpectrum> {
    if n < 2 || l <= n {
        return Err(Error::InvalidArgument(format!("need l > n >= 2, got n = {n}, l = {l}")));
    }
    if replicates == 0 {
        return Err(Error::InvalidArgument("need at least one replicate".into()));
    }
    if !(bin_width > 0.0) {
        return Err(Error::InvalidArgument(format!("bin width {bin_width} must be positive")));
    }
    let spectra = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let raw = synth::gaussian_matrix(l, n, seed.wrapping_add(r));
            let values = returns::standardize(&raw, None).values;
            let panel = SeriesPanel::new(synth::synthetic_dates(l), synth::symbols(n), values)?;
            let m = corrmat::pearson(&panel, None)?;
            Ok(eigh(&m)?.eigenvalues)
        })
        .collect::<Result<Vec<_>>>()?;
    let pooled: Vec<f64> = spectra.iter().flatten().copied().collect();
    Ok(RandomSpectrum {
        n,
        l,
        seed,
        mp: mp_bounds(l as f64 / n as f64, 1.0)?,
        spectra,
        bin_width,
        histogram: stats::density_histogram(&pooled, bin_width),
    })
}
