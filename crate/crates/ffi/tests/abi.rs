use std::ffi::{CStr, CString};
use std::ptr;

use rmtcorr_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(rmt_last_error()).to_string_lossy().into_owned() }
}

#[test]
fn mp_bounds_through_the_abi() {
    let (mut lo, mut hi) = (0.0, 0.0);
    assert_eq!(unsafe { rmt_mp_bounds(4.0, 1.0, &mut lo, &mut hi) }, RmtStatus::Ok);
    assert!((lo - 0.25).abs() < 1e-15 && (hi - 2.25).abs() < 1e-15);
    let mut d = -1.0;
    assert_eq!(unsafe { rmt_mp_density(4.0, 1.0, 3.0, &mut d) }, RmtStatus::Ok);
    assert_eq!(d, 0.0);
    assert_eq!(unsafe { rmt_mp_bounds(-1.0, 1.0, &mut lo, &mut hi) }, RmtStatus::InvalidArgument);
    assert!(last_error().contains("Q"));
    assert_eq!(unsafe { rmt_mp_bounds(2.0, 1.0, ptr::null_mut(), &mut hi) }, RmtStatus::NullPointer);
}

#[test]
fn panel_to_spectrum() {
    unsafe {
        let mut panel = ptr::null_mut();
        assert_eq!(rmt_panel_synth(6, 400, 0.5, 3, &mut panel), RmtStatus::Ok);
        let (mut rows, mut cols) = (0, 0);
        assert_eq!(rmt_panel_shape(panel, &mut rows, &mut cols), RmtStatus::Ok);
        assert_eq!((rows, cols), (400, 6));

        let mut corr = ptr::null_mut();
        assert_eq!(rmt_correlation(panel, RmtMethod::Spearman, &mut corr), RmtStatus::Ok);
        let mut n = 0;
        rmt_correlation_size(corr, &mut n);
        let mut m = vec![0.0; n * n];
        assert_eq!(rmt_correlation_copy(corr, m.as_mut_ptr(), 3), RmtStatus::BufferTooSmall);
        assert_eq!(rmt_correlation_copy(corr, m.as_mut_ptr(), m.len()), RmtStatus::Ok);
        assert!((0..n).all(|i| m[i * n + i] == 1.0 && (0..n).all(|j| m[i * n + j] == m[j * n + i])));
        let mut q = 0.0;
        rmt_correlation_ratio(corr, &mut q);
        assert!((q - 400.0 / 6.0).abs() < 1e-12);

        let mut spec = ptr::null_mut();
        assert_eq!(rmt_spectrum(corr, &mut spec), RmtStatus::Ok);
        let mut ev = vec![0.0; 6];
        assert_eq!(rmt_spectrum_eigenvalues(spec, ev.as_mut_ptr(), ev.len()), RmtStatus::Ok);
        assert!(ev.windows(2).all(|w| w[0] <= w[1]));
        assert!((ev.iter().sum::<f64>() - 6.0).abs() < 1e-10);
        let mut v = vec![0.0; 6];
        assert_eq!(rmt_spectrum_eigenvector(spec, 5, v.as_mut_ptr(), v.len()), RmtStatus::Ok);
        assert!((v.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(v.iter().sum::<f64>() > 0.0);
        assert_eq!(rmt_spectrum_eigenvector(spec, 6, v.as_mut_ptr(), v.len()), RmtStatus::InvalidArgument);
        let mut frac = 0.0;
        rmt_spectrum_explained_fraction(spec, &mut frac);
        assert!((frac - ev[5] / 6.0).abs() < 1e-12);

        rmt_spectrum_free(spec);
        rmt_correlation_free(corr);
        rmt_panel_free(panel);
        rmt_panel_free(ptr::null_mut());
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        // a constant column is dropped from the matrix
        let values: Vec<f64> = (0..20).flat_map(|t| [t as f64, 1.0, (t * t % 7) as f64]).collect();
        let mut panel = ptr::null_mut();
        assert_eq!(rmt_panel_from_values(values.as_ptr(), 20, 3, &mut panel), RmtStatus::Ok);
        let mut corr = ptr::null_mut();
        assert_eq!(rmt_correlation(panel, RmtMethod::Pearson, &mut corr), RmtStatus::Ok);
        let mut n = 0;
        rmt_correlation_size(corr, &mut n);
        assert_eq!(n, 2);
        rmt_correlation_free(corr);
        rmt_panel_free(panel);

        let flat = vec![2.0; 30];
        assert_eq!(rmt_panel_from_values(flat.as_ptr(), 10, 3, &mut panel), RmtStatus::Ok);
        assert_eq!(rmt_correlation(panel, RmtMethod::Pearson, &mut corr), RmtStatus::Ok);
        let mut spec = ptr::null_mut();
        assert_eq!(rmt_spectrum(corr, &mut spec), RmtStatus::InvalidArgument);
        assert!(last_error().contains("empty correlation matrix"));
        rmt_correlation_free(corr);
        rmt_panel_free(panel);

        // zero variance is numerical
        let (mut stat, mut reject) = (0.0, false);
        assert_eq!(rmt_jarque_bera(flat.as_ptr(), flat.len(), &mut stat, &mut reject), RmtStatus::NumericalError);

        let missing = CString::new("/nonexistent/returns.csv").unwrap();
        assert_eq!(rmt_panel_read_csv(missing.as_ptr(), &mut panel), RmtStatus::InputError);
        assert!(last_error().contains("/nonexistent/returns.csv"));
        assert_eq!(rmt_correlation(ptr::null(), RmtMethod::Pearson, &mut corr), RmtStatus::NullPointer);
    }
}

#[test]
fn csv_round_trip() {
    let dir = std::env::temp_dir().join(format!("rmtcorr-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("r.csv");
    std::fs::write(&path, "date,A,B\n2000-01-03,1,2\n2000-01-04,2,1\n2000-01-05,3,5\n2000-01-06,4,3\n").unwrap();
    let c = CString::new(path.to_str().unwrap()).unwrap();
    unsafe {
        let mut panel = ptr::null_mut();
        assert_eq!(rmt_panel_read_csv(c.as_ptr(), &mut panel), RmtStatus::Ok);
        let (mut rows, mut cols) = (0, 0);
        rmt_panel_shape(panel, &mut rows, &mut cols);
        assert_eq!((rows, cols), (4, 2));
        let mut corr = ptr::null_mut();
        rmt_correlation(panel, RmtMethod::Pearson, &mut corr);
        let mut m = [0.0; 4];
        rmt_correlation_copy(corr, m.as_mut_ptr(), 4);
        // sum dx dy = 3.5, sxx = 5, syy = 8.75
        assert!((m[1] - 0.28f64.sqrt()).abs() < 1e-12, "{m:?}");
        rmt_correlation_free(corr);
        rmt_panel_free(panel);
    }
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn normality_through_the_abi() {
    let xs: Vec<f64> = (0..400).map(|i| ((i * 7919) % 400) as f64 / 400.0).collect();
    let (mut stat, mut crit, mut reject) = (0.0, 0.0, false);
    unsafe {
        assert_eq!(rmt_lilliefors(xs.as_ptr(), xs.len(), &mut stat, &mut crit, &mut reject), RmtStatus::Ok);
        assert!(reject && stat > crit);
        assert_eq!(rmt_jarque_bera(xs.as_ptr(), xs.len(), &mut stat, &mut reject), RmtStatus::Ok);
        assert!(reject);
        assert_eq!(rmt_jarque_bera(xs.as_ptr(), 3, &mut stat, &mut reject), RmtStatus::InputError);
        assert_eq!(rmt_jarque_bera(ptr::null(), 10, &mut stat, &mut reject), RmtStatus::NullPointer);
    }
}
