//! C ABI over `rmtcorr`.
//!
//! Panels, correlation matrices and spectra are opaque handles owned by the
//! caller and released with the matching `*_free`. Every fallible call
//! returns an [`RmtStatus`]; on failure [`rmt_last_error`] describes it.
//!
//! # Safety
//!
//! Handle arguments must be null or a live pointer returned by this library
//! and not yet freed. Output pointers must be null or valid for a write.
//! `data`/`values` must point to the stated number of doubles and `buf` to
//! `len` writable doubles. Paths are NUL-terminated UTF-8.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rmtcorr::corrmat::{self, CorrelationMatrix, Method};
use rmtcorr::normality;
use rmtcorr::spectral::{self, SpectralDecomposition};
use rmtcorr::synth::{self, FactorModelSpec};
use rmtcorr::{Error, SeriesPanel};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Malformed or inconsistent input data.
    InputError = 3,
    /// Zero variance or eigensolver failure.
    NumericalError = 4,
    /// Destination buffer shorter than required.
    BufferTooSmall = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmtMethod {
    Pearson = 0,
    Spearman = 1,
}

pub struct RmtPanel(SeriesPanel);

pub struct RmtCorrelation(CorrelationMatrix);

pub struct RmtSpectrum(SpectralDecomposition);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(RmtStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = if e.is_numerical() {
            RmtStatus::NumericalError
        } else if matches!(e, Error::InvalidArgument(_)) {
            RmtStatus::InvalidArgument
        } else {
            RmtStatus::InputError
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(RmtStatus::NullPointer, format!("{what} is null"))
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RmtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RmtStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            RmtStatus::Panic
        }
    }
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn copy_out(src: &[f64], buf: *mut f64, len: usize) -> Result<(), Failure> {
    if buf.is_null() {
        return Err(null("buffer"));
    }
    if len < src.len() {
        return Err(Failure(RmtStatus::BufferTooSmall, format!("buffer holds {len} values, need {}", src.len())));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

unsafe fn sample<'a>(data: *const f64, n: usize) -> Result<&'a [f64], Failure> {
    if data.is_null() {
        return Err(null("sample"));
    }
    Ok(std::slice::from_raw_parts(data, n))
}

/// Message for the last failed call on this thread, or null if none failed.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rmt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub unsafe extern "C" fn rmt_mp_bounds(q: f64, sigma: f64, lambda_minus: *mut f64, lambda_plus: *mut f64) -> RmtStatus {
    guard(|| {
        let p = spectral::mp_bounds(q, sigma)?;
        write(lambda_minus, p.lambda_minus, "lambda_minus")?;
        write(lambda_plus, p.lambda_plus, "lambda_plus")
    })
}

#[no_mangle]
pub unsafe extern "C" fn rmt_mp_density(q: f64, sigma: f64, lambda: f64, out: *mut f64) -> RmtStatus {
    guard(|| {
        let p = spectral::mp_bounds(q, sigma)?;
        write(out, spectral::mp_density(lambda, &p), "out")
    })
}

/// One-factor panel with equal pairwise correlation `rho`.
#[no_mangle]
pub unsafe extern "C" fn rmt_panel_synth(
    n: usize,
    rows: usize,
    rho: f64,
    seed: u64,
    out: *mut *mut RmtPanel,
) -> RmtStatus {
    guard(|| {
        let panel = synth::generate(&FactorModelSpec::uniform(n, rows, rho, seed))?;
        write(out, Box::into_raw(Box::new(RmtPanel(panel))), "out")
    })
}

/// Reads a `date,SYM1,SYM2,...` returns table.
#[no_mangle]
pub unsafe extern "C" fn rmt_panel_read_csv(path: *const c_char, out: *mut *mut RmtPanel) -> RmtStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Failure(RmtStatus::InvalidArgument, "path is not UTF-8".into()))?;
        let file = File::open(path).map_err(|e| Failure(RmtStatus::InputError, format!("{path}: {e}")))?;
        let panel = SeriesPanel::read_csv(file).map_err(|e| Failure::from(e.context(path)))?;
        write(out, Box::into_raw(Box::new(RmtPanel(panel))), "out")
    })
}

/// Wraps a row-major `rows x cols` block. Dates and symbols are synthetic.
#[no_mangle]
pub unsafe extern "C" fn rmt_panel_from_values(
    values: *const f64,
    rows: usize,
    cols: usize,
    out: *mut *mut RmtPanel,
) -> RmtStatus {
    guard(|| {
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| Failure(RmtStatus::InvalidArgument, "rows * cols overflows".into()))?;
        let data = sample(values, len)?;
        let m = nalgebra::DMatrix::from_row_slice(rows, cols, data);
        let panel = SeriesPanel::new(synth::synthetic_dates(rows), synth::symbols(cols), m)?;
        write(out, Box::into_raw(Box::new(RmtPanel(panel))), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn rmt_panel_shape(panel: *const RmtPanel, rows: *mut usize, cols: *mut usize) -> RmtStatus {
    guard(|| {
        let p = &handle(panel, "panel")?.0;
        write(rows, p.n_rows(), "rows")?;
        write(cols, p.n_cols(), "cols")
    })
}

#[no_mangle]
pub unsafe extern "C" fn rmt_panel_free(panel: *mut RmtPanel) {
    if !panel.is_null() {
        drop(Box::from_raw(panel));
    }
}

#[no_mangle]
pub unsafe extern "C" fn rmt_correlation(
    panel: *const RmtPanel,
    method: RmtMethod,
    out: *mut *mut RmtCorrelation,
) -> RmtStatus {
    guard(|| {
        let p = &handle(panel, "panel")?.0;
        let method = match method {
            RmtMethod::Pearson => Method::Pearson,
            RmtMethod::Spearman => Method::Spearman,
        };
        let m = corrmat::correlation(p, None, method)?;
        write(out, Box::into_raw(Box::new(RmtCorrelation(m))), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn rmt_correlation_size(corr: *const RmtCorrelation, n: *mut usize) -> RmtStatus {
    guard(|| write(n, handle(corr, "correlation")?.0.n(), "n"))
}

/// Copies the `n x n` matrix row-major into `buf`.
#[no_mangle]
pub unsafe extern "C" fn rmt_correlation_copy(corr: *const RmtCorrelation, buf: *mut f64, len: usize) -> RmtStatus {
    guard(|| {
        let m = &handle(corr, "correlation")?.0.entries;
        let rows: Vec<f64> = m.transpose().iter().copied().collect();
        copy_out(&rows, buf, len)
    })
}

/// Ratio `Q = L / N` of the rows the matrix was estimated on to its size.
#[no_mangle]
pub unsafe extern "C" fn rmt_correlation_ratio(corr: *const RmtCorrelation, q: *mut f64) -> RmtStatus {
    guard(|| {
        let m = &handle(corr, "correlation")?.0;
        let rows = m
            .window
            .map(|w| w.length)
            .ok_or_else(|| Failure(RmtStatus::InvalidArgument, "matrix has no estimation window".into()))?;
        write(q, spectral::ratio(rows, m), "q")
    })
}

#[no_mangle]
pub unsafe extern "C" fn rmt_correlation_free(corr: *mut RmtCorrelation) {
    if !corr.is_null() {
        drop(Box::from_raw(corr));
    }
}

#[no_mangle]
pub unsafe extern "C" fn rmt_spectrum(corr: *const RmtCorrelation, out: *mut *mut RmtSpectrum) -> RmtStatus {
    guard(|| {
        let d = spectral::eigh(&handle(corr, "correlation")?.0)?;
        write(out, Box::into_raw(Box::new(RmtSpectrum(d))), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn rmt_spectrum_size(spec: *const RmtSpectrum, n: *mut usize) -> RmtStatus {
    guard(|| write(n, handle(spec, "spectrum")?.0.n(), "n"))
}

/// Eigenvalues in ascending order.
#[no_mangle]
pub unsafe extern "C" fn rmt_spectrum_eigenvalues(spec: *const RmtSpectrum, buf: *mut f64, len: usize) -> RmtStatus {
    guard(|| copy_out(&handle(spec, "spectrum")?.0.eigenvalues, buf, len))
}

/// Unit eigenvector of the `k`-th smallest eigenvalue.
#[no_mangle]
pub unsafe extern "C" fn rmt_spectrum_eigenvector(
    spec: *const RmtSpectrum,
    k: usize,
    buf: *mut f64,
    len: usize,
) -> RmtStatus {
    guard(|| {
        let d = &handle(spec, "spectrum")?.0;
        if k >= d.n() {
            return Err(Failure(RmtStatus::InvalidArgument, format!("eigenvector {k} of {}", d.n())));
        }
        let v: Vec<f64> = d.eigenvectors.column(k).iter().copied().collect();
        copy_out(&v, buf, len)
    })
}

#[no_mangle]
pub unsafe extern "C" fn rmt_spectrum_explained_fraction(spec: *const RmtSpectrum, out: *mut f64) -> RmtStatus {
    guard(|| write(out, spectral::explained_fraction(&handle(spec, "spectrum")?.0.eigenvalues), "out"))
}

#[no_mangle]
pub unsafe extern "C" fn rmt_spectrum_free(spec: *mut RmtSpectrum) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Jarque-Bera statistic and its 5% decision.
#[no_mangle]
pub unsafe extern "C" fn rmt_jarque_bera(
    data: *const f64,
    n: usize,
    statistic: *mut f64,
    reject: *mut bool,
) -> RmtStatus {
    guard(|| {
        let jb = normality::jarque_bera(sample(data, n)?)?;
        write(statistic, jb.statistic, "statistic")?;
        write(reject, jb.reject, "reject")
    })
}

/// Lilliefors statistic with its Monte Carlo 5% critical value. The first
/// call for a given `n` runs the calibration.
#[no_mangle]
pub unsafe extern "C" fn rmt_lilliefors(
    data: *const f64,
    n: usize,
    statistic: *mut f64,
    critical: *mut f64,
    reject: *mut bool,
) -> RmtStatus {
    guard(|| {
        let l = normality::lilliefors(sample(data, n)?)?;
        write(statistic, l.statistic, "statistic")?;
        write(critical, l.critical, "critical")?;
        write(reject, l.reject, "reject")
    })
}
