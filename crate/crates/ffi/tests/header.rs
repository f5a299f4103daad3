//! Compiles and runs a small C program against the generated header and the
//! static library. Skipped when no C compiler is on the path.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "pbt_recycle.h"

int main(void) {
    double f = 0.0;
    if (pbt_frec(2, 2, &f) != PBT_STATUS_OK) return 1;
    if (fabs(f - 0.659739608441) > 1e-11) return 2;
    if (pbt_frec(0, 2, &f) != PBT_STATUS_INVALID_ARGUMENT) return 3;
    if (pbt_last_error_message() == NULL) return 4;

    PbtCoefficients *v6 = NULL;
    if (pbt_coefficients_qubit(6, &v6) != PBT_STATUS_OK) return 5;
    if (pbt_resource_fidelity(6, 2, v6, &f) != PBT_STATUS_OK) return 6;
    char *json = NULL;
    if (pbt_coefficients_to_json(v6, &json) != PBT_STATUS_OK) return 7;
    pbt_string_free(json);
    pbt_coefficients_free(v6);
    printf("%.12f\n", f);
    return 0;
}
"#;

fn compiler() -> Option<String> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| {
            Command::new(c)
                .arg("--version")
                .output()
                .is_ok_and(|o| o.status.success())
        })
        .map(str::to_string)
}

/// `target/<profile>` from the test executable's location.
fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let Some(cc) = compiler() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    assert!(include.join("pbt_recycle.h").exists(), "header not generated");
    let lib = profile_dir().join("libpbt_recycle_ffi.a");
    let work = tempfile::tempdir().unwrap();
    let src = work.path().join("probe.c");
    std::fs::write(&src, PROGRAM).unwrap();

    if !lib.exists() {
        let status = Command::new(&cc)
            .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
            .arg(&include)
            .arg(&src)
            .status()
            .unwrap();
        assert!(status.success(), "header does not compile");
        return;
    }

    let exe = work.path().join("probe");
    let status = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C probe failed to build");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "C probe exited with {:?}", out.status.code());
    let f: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    assert!((f - 0.9977).abs() < 5e-4);
}
