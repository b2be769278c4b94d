//! Random-matrix diagnostics for cross-market correlation matrices of daily
//! index returns.
//!
//! The pipeline runs [`ingest`] (calendar alignment) → [`returns`]
//! (log-returns, standardization) → [`corrmat`] (Pearson/Spearman matrices,
//! rolling statistics) → [`spectral`] (eigendecomposition, Marčenko–Pastur
//! bulk) → [`marketmode`] (leading-eigenvector series and co-movement) and
//! [`normality`] (Jarque–Bera, Lilliefors). [`synth`] generates factor-model
//! panels that exercise every stage without market data.

// `!(x > 0.0)` is used deliberately so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod corrmat;
pub mod error;
pub mod format;
pub mod ingest;
pub mod marketmode;
pub mod normality;
pub mod panel;
pub mod returns;
pub mod spectral;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use panel::SeriesPanel;
