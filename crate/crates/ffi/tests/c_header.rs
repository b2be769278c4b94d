use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include "rmtcorr.h"

int main(void) {
    double lo, hi;
    if (rmt_mp_bounds(4.0, 1.0, &lo, &hi) != RMT_STATUS_OK) return 1;
    RmtPanel *panel = NULL;
    if (rmt_panel_synth(5, 300, 0.4, 9, &panel) != RMT_STATUS_OK) return 2;
    RmtCorrelation *corr = NULL;
    if (rmt_correlation(panel, RMT_METHOD_PEARSON, &corr) != RMT_STATUS_OK) return 3;
    RmtSpectrum *spec = NULL;
    if (rmt_spectrum(corr, &spec) != RMT_STATUS_OK) return 4;
    double ev[5];
    if (rmt_spectrum_eigenvalues(spec, ev, 5) != RMT_STATUS_OK) return 5;
    if (rmt_mp_bounds(0.0, 1.0, &lo, &hi) != RMT_STATUS_INVALID_ARGUMENT) return 6;
    printf("%.6f %.6f %s\n", ev[4], lo, rmt_last_error());
    rmt_spectrum_free(spec);
    rmt_correlation_free(corr);
    rmt_panel_free(panel);
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    // target/<profile>/deps/c_header-<hash>
    std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("librmtcorr_ffi.a");
    if Command::new("cc").arg("--version").output().is_err() || !lib.exists() {
        eprintln!("skipping: no C compiler or static library at {}", lib.display());
        return;
    }
    let dir = tempfile_dir();
    let src = dir.join("main.c");
    let exe = dir.join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(manifest.join("include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    let stdout = String::from_utf8(run.stdout).unwrap();
    assert!(stdout.contains("Q = 0 must be positive"), "{stdout}");
    std::fs::remove_dir_all(dir).unwrap();
}

fn tempfile_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rmtcorr-c-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
