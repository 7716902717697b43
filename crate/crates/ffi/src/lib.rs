//! C ABI for the `rubber-rope` library.
//!
//! Every function returns an [`RrStatus`] (or a value with a documented
//! sentinel) and never unwinds across the boundary. On failure the message
//! is available from [`rr_last_error`] on the same thread.
//!
//! Handles returned through out-pointers are owned by the caller and must
//! be released with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rubber_rope::engines::{
    deterministic_hitting_time, harmonic_number, invert_harmonic, run_batch, simulate_trajectory,
    SolveMethod, TrajectoryRecord,
};
use rubber_rope::stats::{mean_hitting_time, survival_curve};
use rubber_rope::{DistributionSpec, Error, ProcessSpec};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RrStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// A value lies outside the mathematical domain.
    Domain = 3,
    /// An API precondition was violated.
    Contract = 4,
    /// A distribution string did not parse.
    Parse = 5,
    /// An output buffer was too small.
    BufferTooSmall = 6,
    /// An internal panic was caught.
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RrSolveMethod {
    ExactRational = 0,
    CompensatedSum = 1,
    DigammaAsymptotic = 2,
}

/// A process: initial length plus the step and stretch laws.
pub struct RrProcess {
    spec: ProcessSpec,
}

/// Trajectory records of a batch, in substream order.
pub struct RrBatch {
    records: Vec<TrajectoryRecord>,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RrTrajectory {
    pub substream_id: u64,
    /// Zero when `censored` is set.
    pub hitting_time: u64,
    pub censored: bool,
    pub cap: u64,
    pub final_fraction: f64,
}

/// Missing values are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RrMeanEstimate {
    pub mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub n_used: u64,
    /// Set when censored records were dropped; the mean is then biased low.
    pub censored_warning: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RrHarmonicInverse {
    /// False when the answer does not fit in `u64`; only `log10_m` is then set.
    pub has_m: bool,
    pub m: u64,
    pub log10_m: f64,
    pub log10_error: f64,
    pub certified: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RrSolveReport {
    /// False when the hitting time does not fit in `u64`.
    pub has_hitting_time: bool,
    pub hitting_time: u64,
    pub log10_hitting_time: f64,
    pub log10_error: f64,
    pub method: RrSolveMethod,
    pub error_bound: f64,
    pub certified: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure {
    status: RrStatus,
    message: String,
}

impl Failure {
    fn new(status: RrStatus, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }

    fn null(name: &str) -> Self {
        Self::new(RrStatus::NullPointer, format!("{name} is null"))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Domain(_) => RrStatus::Domain,
            Error::Contract(_) => RrStatus::Contract,
            Error::Parse(_) => RrStatus::Parse,
        };
        Self::new(status, e.to_string())
    }
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RrStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RrStatus::Ok,
        Ok(Err(failure)) => {
            set_last_error(failure.message);
            failure.status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_last_error(format!("panic: {msg}"));
            RrStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::new(RrStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn write_out<T>(out: *mut T, value: T, name: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::null(name));
    }
    out.write(value);
    Ok(())
}

unsafe fn borrow<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::null(name))
}

fn to_c_record(r: &TrajectoryRecord) -> RrTrajectory {
    RrTrajectory {
        substream_id: r.substream_id,
        hitting_time: r.hitting_time.reached().unwrap_or(0),
        censored: r.censored,
        cap: r.cap,
        final_fraction: r.final_fraction,
    }
}

/// Message of the last failed call on this thread, or null after a
/// successful call. Valid until the next call into this library on the
/// same thread; do not free.
#[no_mangle]
pub extern "C" fn rr_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a process from an initial length and two distribution strings
/// such as `"exponential:mean=1"` or `"pareto:scale=1,shape=2.5"`.
///
/// Infinite-mean laws are rejected unless `exploration` is true.
///
/// # Safety
/// `step` and `stretch` must be null or NUL-terminated strings. `out` must
/// be null or valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn rr_process_new(
    l0: f64,
    step: *const c_char,
    stretch: *const c_char,
    exploration: bool,
    out: *mut *mut RrProcess,
) -> RrStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::null("out"));
        }
        let step: DistributionSpec = read_str(step, "step")?.parse()?;
        let stretch: DistributionSpec = read_str(stretch, "stretch")?.parse()?;
        let spec = if exploration {
            ProcessSpec::exploratory(l0, step, stretch)?
        } else {
            ProcessSpec::new(l0, step, stretch)?
        };
        out.write(Box::into_raw(Box::new(RrProcess { spec })));
        Ok(())
    })
}

/// # Safety
/// `process` must be null or a pointer from [`rr_process_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rr_process_free(process: *mut RrProcess) {
    if !process.is_null() {
        drop(Box::from_raw(process));
    }
}

/// Simulates one trajectory until the end is reached or `cap` seconds pass.
///
/// # Safety
/// `process` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn rr_simulate_trajectory(
    process: *const RrProcess,
    substream_id: u64,
    master_seed: u64,
    cap: u64,
    out: *mut RrTrajectory,
) -> RrStatus {
    guard(|| {
        let process = borrow(process, "process")?;
        let record = simulate_trajectory(&process.spec, substream_id, master_seed, cap)?;
        write_out(out, to_c_record(&record), "out")
    })
}

/// Simulates substreams `0 .. n_trajectories` on up to `threads` threads.
/// The records do not depend on `threads`.
///
/// # Safety
/// `process` must be a live handle and `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn rr_batch_run(
    process: *const RrProcess,
    n_trajectories: u64,
    master_seed: u64,
    cap: u64,
    threads: usize,
    out: *mut *mut RrBatch,
) -> RrStatus {
    guard(|| {
        let process = borrow(process, "process")?;
        if out.is_null() {
            return Err(Failure::null("out"));
        }
        let records = run_batch(
            &process.spec,
            n_trajectories,
            master_seed,
            cap,
            threads.max(1),
        )?;
        out.write(Box::into_raw(Box::new(RrBatch { records })));
        Ok(())
    })
}

/// # Safety
/// `batch` must be null or a pointer from [`rr_batch_run`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rr_batch_free(batch: *mut RrBatch) {
    if !batch.is_null() {
        drop(Box::from_raw(batch));
    }
}

/// Number of records, or 0 when `batch` is null.
///
/// # Safety
/// `batch` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rr_batch_len(batch: *const RrBatch) -> usize {
    batch.as_ref().map_or(0, |b| b.records.len())
}

/// # Safety
/// `batch` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn rr_batch_get(
    batch: *const RrBatch,
    index: usize,
    out: *mut RrTrajectory,
) -> RrStatus {
    guard(|| {
        let batch = borrow(batch, "batch")?;
        let record = batch.records.get(index).ok_or_else(|| {
            Failure::new(
                RrStatus::Contract,
                format!(
                    "index {index} out of range for {} records",
                    batch.records.len()
                ),
            )
        })?;
        write_out(out, to_c_record(record), "out")
    })
}

/// Mean of the non-censored hitting times with a normal-approximation
/// interval at level `confidence`.
///
/// # Safety
/// `batch` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn rr_batch_mean_hitting_time(
    batch: *const RrBatch,
    confidence: f64,
    out: *mut RrMeanEstimate,
) -> RrStatus {
    guard(|| {
        let batch = borrow(batch, "batch")?;
        let est = mean_hitting_time(&batch.records, confidence)?;
        let value = RrMeanEstimate {
            mean: est.mean.unwrap_or(f64::NAN),
            ci_lo: est.ci_lo.unwrap_or(f64::NAN),
            ci_hi: est.ci_hi.unwrap_or(f64::NAN),
            n_used: est.n_used,
            censored_warning: est.censored_warning,
        };
        write_out(out, value, "out")
    })
}

/// Writes the empirical `P(T > n)` for `n = 0 ..= horizon` into `out`,
/// which must hold at least `horizon + 1` values.
///
/// # Safety
/// `batch` must be a live handle and `out` valid for `out_len` writes.
#[no_mangle]
pub unsafe extern "C" fn rr_batch_survival(
    batch: *const RrBatch,
    horizon: u64,
    out: *mut f64,
    out_len: usize,
) -> RrStatus {
    guard(|| {
        let batch = borrow(batch, "batch")?;
        if out.is_null() {
            return Err(Failure::null("out"));
        }
        let curve = survival_curve(&batch.records, horizon)?;
        if out_len < curve.values.len() {
            return Err(Failure::new(
                RrStatus::BufferTooSmall,
                format!("need {} values, buffer holds {out_len}", curve.values.len()),
            ));
        }
        ptr::copy_nonoverlapping(curve.values.as_ptr(), out, curve.values.len());
        Ok(())
    })
}

/// `H_m = 1 + 1/2 + ... + 1/m`.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn rr_harmonic_number(m: u64, out: *mut f64) -> RrStatus {
    guard(|| write_out(out, harmonic_number(m)?, "out"))
}

/// Smallest `m` with `H_m >= c`.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn rr_invert_harmonic(c: f64, out: *mut RrHarmonicInverse) -> RrStatus {
    guard(|| {
        let inv = invert_harmonic(c)?;
        let value = RrHarmonicInverse {
            has_m: inv.m.is_some(),
            m: inv.m.unwrap_or(0),
            log10_m: inv.log10_m,
            log10_error: inv.log10_error,
            certified: inv.certified,
        };
        write_out(out, value, "out")
    })
}

/// Hitting time of the constant process with initial length `l0`, step `x`
/// and stretch `stretch`.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn rr_solve(
    l0: f64,
    x: f64,
    stretch: f64,
    out: *mut RrSolveReport,
) -> RrStatus {
    guard(|| {
        let report = deterministic_hitting_time(l0, x, stretch)?;
        let value = RrSolveReport {
            has_hitting_time: report.hitting_time.is_some(),
            hitting_time: report.hitting_time.unwrap_or(0),
            log10_hitting_time: report.log10_hitting_time,
            log10_error: report.log10_error,
            method: match report.method {
                SolveMethod::ExactRational => RrSolveMethod::ExactRational,
                SolveMethod::CompensatedSum => RrSolveMethod::CompensatedSum,
                SolveMethod::DigammaAsymptotic => RrSolveMethod::DigammaAsymptotic,
            },
            error_bound: report.error_bound,
            certified: report.certified,
        };
        write_out(out, value, "out")
    })
}
