//! Compiles `tests/c/smoke.c` against the generated header and the static
//! library, then runs it. Skipped when no C compiler is on PATH.

use std::path::{Path, PathBuf};
use std::process::Command;

fn static_lib() -> Option<PathBuf> {
    let tmp = Path::new(env!("CARGO_TARGET_TMPDIR"));
    let target = tmp.parent()?;
    ["debug", "release"]
        .iter()
        .map(|p| target.join(p).join("libnsfom_ffi.a"))
        .filter(|p| p.exists())
        .max_by_key(|p| p.metadata().and_then(|m| m.modified()).ok())
}

#[test]
fn header_declares_public_api() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/nsfom.h")).unwrap();
    for sym in [
        "nsfom_last_error_message",
        "nsfom_schedule_at",
        "nsfom_extrapolation_weights",
        "nsfom_sample_heavy_tail",
        "nsfom_problem_quadratic",
        "nsfom_problem_synthetic",
        "nsfom_problem_csv",
        "nsfom_problem_free",
        "nsfom_run",
        "nsfom_trace_get",
        "nsfom_trace_free",
        "typedef struct NsfomProblem NsfomProblem;",
        "typedef struct NsfomTrace NsfomTrace;",
        "NSFOM_STATUS_OK = 0",
    ] {
        assert!(header.contains(sym), "header is missing {sym}");
    }
}

#[test]
fn c_program_links_and_runs() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler");
        return;
    }
    let Some(lib) = static_lib() else {
        eprintln!("skipping: static library not built");
        return;
    };
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let exe = Path::new(env!("CARGO_TARGET_TMPDIR")).join("nsfom_c_smoke");
    let status = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("k=40 calls=80"));
}
