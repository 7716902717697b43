use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use rubber_rope::engines::{run_batch, simulate_trajectory};
use rubber_rope::ProcessSpec;
use rubber_rope_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> Option<String> {
    let p = rr_last_error();
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string())
}

fn process(l0: f64, step: &str, stretch: &str) -> *mut RrProcess {
    let mut out = ptr::null_mut();
    let status = unsafe {
        rr_process_new(
            l0,
            cstr(step).as_ptr(),
            cstr(stretch).as_ptr(),
            false,
            &mut out,
        )
    };
    assert_eq!(status, RrStatus::Ok, "{:?}", last_error());
    assert!(!out.is_null());
    out
}

fn spec(l0: f64, step: &str, stretch: &str) -> ProcessSpec {
    ProcessSpec::new(l0, step.parse().unwrap(), stretch.parse().unwrap()).unwrap()
}

#[test]
fn solve_matches_core() {
    let mut report = RrSolveReport {
        has_hitting_time: false,
        hitting_time: 0,
        log10_hitting_time: 0.0,
        log10_error: 0.0,
        method: RrSolveMethod::CompensatedSum,
        error_bound: 0.0,
        certified: false,
    };
    assert_eq!(
        unsafe { rr_solve(2.0, 1.0, 2.0, &mut report) },
        RrStatus::Ok
    );
    assert!(report.has_hitting_time);
    assert_eq!(report.hitting_time, 4);
    assert_eq!(report.method, RrSolveMethod::ExactRational);
    assert!(report.certified);

    assert_eq!(
        unsafe { rr_solve(1e5, 1.0, 1e5, &mut report) },
        RrStatus::Ok
    );
    assert!(!report.has_hitting_time);
    assert_eq!(report.method, RrSolveMethod::DigammaAsymptotic);
    assert!((report.log10_hitting_time - 43_429.2).abs() < 0.05);

    assert_eq!(
        unsafe { rr_solve(-1.0, 1.0, 1.0, &mut report) },
        RrStatus::Domain
    );
    assert!(last_error().unwrap().contains("l0"));
}

#[test]
fn harmonic_functions() {
    let mut h = 0.0;
    assert_eq!(unsafe { rr_harmonic_number(4, &mut h) }, RrStatus::Ok);
    assert!((h - 25.0 / 12.0).abs() < 1e-15);
    assert!(last_error().is_none());

    let mut inv = RrHarmonicInverse::default();
    assert_eq!(unsafe { rr_invert_harmonic(10.0, &mut inv) }, RrStatus::Ok);
    assert!(inv.has_m && inv.certified);
    assert_eq!(inv.m, 12_367);

    assert_eq!(
        unsafe { rr_invert_harmonic(f64::NAN, &mut inv) },
        RrStatus::Domain
    );
    assert_eq!(
        unsafe { rr_harmonic_number(4, ptr::null_mut()) },
        RrStatus::NullPointer
    );
}

#[test]
fn trajectory_matches_core() {
    let p = process(5.0, "exponential:mean=1", "uniform:a=0.5,b=1.5");
    let expected = simulate_trajectory(
        &spec(5.0, "exponential:mean=1", "uniform:a=0.5,b=1.5"),
        3,
        11,
        1000,
    )
    .unwrap();
    let mut t = RrTrajectory::default();
    assert_eq!(
        unsafe { rr_simulate_trajectory(p, 3, 11, 1000, &mut t) },
        RrStatus::Ok
    );
    assert_eq!(t.substream_id, 3);
    assert_eq!(Some(t.hitting_time), expected.hitting_time.reached());
    assert_eq!(t.final_fraction, expected.final_fraction);
    assert!(!t.censored);
    unsafe { rr_process_free(p) };
}

#[test]
fn batch_round_trip() {
    let p = process(5.0, "exponential:mean=1", "exponential:mean=1");
    let expected = run_batch(
        &spec(5.0, "exponential:mean=1", "exponential:mean=1"),
        200,
        9,
        100_000,
        1,
    )
    .unwrap();
    for threads in [0, 1, 4] {
        let mut batch = ptr::null_mut();
        let status = unsafe { rr_batch_run(p, 200, 9, 100_000, threads, &mut batch) };
        assert_eq!(status, RrStatus::Ok);
        assert_eq!(unsafe { rr_batch_len(batch) }, 200);
        for (i, e) in expected.iter().enumerate() {
            let mut t = RrTrajectory::default();
            assert_eq!(unsafe { rr_batch_get(batch, i, &mut t) }, RrStatus::Ok);
            assert_eq!(Some(t.hitting_time), e.hitting_time.reached());
        }
        let mut t = RrTrajectory::default();
        assert_eq!(
            unsafe { rr_batch_get(batch, 200, &mut t) },
            RrStatus::Contract
        );

        let mut est = RrMeanEstimate::default();
        assert_eq!(
            unsafe { rr_batch_mean_hitting_time(batch, 0.95, &mut est) },
            RrStatus::Ok
        );
        assert_eq!(est.n_used, 200);
        assert!(est.ci_lo < est.mean && est.mean < est.ci_hi);
        assert_eq!(
            unsafe { rr_batch_mean_hitting_time(batch, 1.5, &mut est) },
            RrStatus::Domain
        );

        let mut curve = vec![f64::NAN; 21];
        let status = unsafe { rr_batch_survival(batch, 20, curve.as_mut_ptr(), curve.len()) };
        assert_eq!(status, RrStatus::Ok);
        assert_eq!(curve[0], 1.0);
        assert!(curve.windows(2).all(|w| w[1] <= w[0]));
        let status = unsafe { rr_batch_survival(batch, 20, curve.as_mut_ptr(), 20) };
        assert_eq!(status, RrStatus::BufferTooSmall);
        unsafe { rr_batch_free(batch) };
    }
    unsafe { rr_process_free(p) };
}

#[test]
fn all_censored_mean_is_nan() {
    let p = process(1e5, "constant:c=1", "constant:c=100000");
    let mut batch = ptr::null_mut();
    assert_eq!(
        unsafe { rr_batch_run(p, 3, 0, 10, 1, &mut batch) },
        RrStatus::Ok
    );
    let mut est = RrMeanEstimate::default();
    assert_eq!(
        unsafe { rr_batch_mean_hitting_time(batch, 0.95, &mut est) },
        RrStatus::Ok
    );
    assert!(est.mean.is_nan() && est.censored_warning);
    let mut t = RrTrajectory::default();
    assert_eq!(unsafe { rr_batch_get(batch, 0, &mut t) }, RrStatus::Ok);
    assert!(t.censored);
    assert_eq!(t.hitting_time, 0);
    unsafe {
        rr_batch_free(batch);
        rr_process_free(p);
    }
}

#[test]
fn process_errors() {
    let mut out = ptr::null_mut();
    let pareto = cstr("pareto:scale=1,shape=0.9");
    let one = cstr("constant:c=1");
    let status = unsafe { rr_process_new(1.0, one.as_ptr(), pareto.as_ptr(), false, &mut out) };
    assert_eq!(status, RrStatus::Domain);
    assert!(out.is_null());
    let status = unsafe { rr_process_new(1.0, one.as_ptr(), pareto.as_ptr(), true, &mut out) };
    assert_eq!(status, RrStatus::Ok);
    unsafe { rr_process_free(out) };

    let bad = cstr("uniform:a=1");
    let status = unsafe { rr_process_new(1.0, bad.as_ptr(), one.as_ptr(), false, &mut out) };
    assert_eq!(status, RrStatus::Parse);
    let status = unsafe { rr_process_new(1.0, ptr::null(), one.as_ptr(), false, &mut out) };
    assert_eq!(status, RrStatus::NullPointer);
    let invalid = [0xffu8, 0];
    let status =
        unsafe { rr_process_new(1.0, invalid.as_ptr().cast(), one.as_ptr(), false, &mut out) };
    assert_eq!(status, RrStatus::InvalidUtf8);
    let status = unsafe { rr_process_new(1.0, one.as_ptr(), one.as_ptr(), false, ptr::null_mut()) };
    assert_eq!(status, RrStatus::NullPointer);

    let mut t = RrTrajectory::default();
    assert_eq!(
        unsafe { rr_simulate_trajectory(ptr::null(), 0, 0, 10, &mut t) },
        RrStatus::NullPointer
    );
    assert_eq!(unsafe { rr_batch_len(ptr::null()) }, 0);
    unsafe {
        rr_process_free(ptr::null_mut());
        rr_batch_free(ptr::null_mut());
    }
}

#[test]
fn contract_error_for_zero_cap() {
    let p = process(1.0, "constant:c=1", "constant:c=1");
    let mut t = RrTrajectory::default();
    assert_eq!(
        unsafe { rr_simulate_trajectory(p, 0, 0, 0, &mut t) },
        RrStatus::Contract
    );
    assert!(last_error().unwrap().contains("cap"));
    unsafe { rr_process_free(p) };
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(rr_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_every_entry_point() {
    let header = std::fs::read_to_string(crate_dir().join("include/rubber_rope.h")).unwrap();
    for name in [
        "rr_process_new",
        "rr_process_free",
        "rr_simulate_trajectory",
        "rr_batch_run",
        "rr_batch_len",
        "rr_batch_get",
        "rr_batch_free",
        "rr_batch_mean_hitting_time",
        "rr_batch_survival",
        "rr_harmonic_number",
        "rr_invert_harmonic",
        "rr_solve",
        "rr_last_error",
        "rr_version",
        "typedef struct RrProcess RrProcess",
        "typedef struct RrBatch RrBatch",
        "RR_STATUS_OK = 0",
    ] {
        assert!(header.contains(name), "{name}");
    }
}

fn static_lib() -> Option<PathBuf> {
    // target/<profile>/deps/<test> -> target/<profile>
    let exe = std::env::current_exe().ok()?;
    let lib = exe.parent()?.parent()?.join("librubber_rope_ffi.a");
    lib.exists().then_some(lib)
}

fn compile(
    cc: &str,
    source: &Path,
    lib: &Path,
    out: &Path,
) -> std::io::Result<std::process::Output> {
    Command::new(cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(source)
        .arg(lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(out)
        .output()
}

#[cfg(unix)]
#[test]
fn c_program_links_and_runs() {
    let Some(lib) = static_lib() else {
        panic!("static library not found next to the test binary");
    };
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let source = crate_dir().join("tests/c/smoke.c");
    let output = match compile("cc", &source, &lib, &exe) {
        Ok(o) => o,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            eprintln!("no C compiler; skipping");
            return;
        }
        Err(e) => panic!("{e}"),
    };
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    let run = Command::new(&exe).output().unwrap();
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok "));
}
