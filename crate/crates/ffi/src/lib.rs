//! C ABI for the `nsfom` optimizers, schedules and test problems.
//!
//! Every fallible function returns an [`NsfomStatus`]. On failure a
//! human-readable message is stored per thread and can be read with
//! [`nsfom_last_error_message`]. Problems and traces are opaque handles that
//! must be released with their `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use nsfom::harness::config::default_eta_scale;
use nsfom::problems::{generate_synthetic, load_csv_dataset, AdditiveNoise, Quadratic, TargetColumn};
use nsfom::{
    compute_weights, problems, AlphaMode, DenseVector, Error, GradientOracle, Method, RngStream, RunConfig,
    SampleMode, ScheduleSpec, StepRule, TrialRecord,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NsfomStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    DegenerateDirection = 4,
    ParseError = 5,
    IoError = 6,
    NumericalFailure = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NsfomMethod {
    Pm = 0,
    Mem = 1,
    Rm = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NsfomSampleMode {
    Shared = 0,
    Independent = 1,
}

/// Schedule parameters. `alpha_known == 0` selects the tail-agnostic schedule
/// and ignores `alpha`. `eta_scale <= 0` selects the library default for the
/// step rule.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NsfomScheduleParams {
    pub method: NsfomMethod,
    pub alpha_known: bool,
    pub alpha: f64,
    pub p: u32,
    pub eta_scale: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NsfomRunParams {
    pub schedule: NsfomScheduleParams,
    pub normalized: bool,
    pub sample_mode: NsfomSampleMode,
    pub iterations: usize,
    /// Oracle-call budget; 0 means unlimited.
    pub max_oracle_calls: usize,
    /// Record every this many steps, plus the first and last.
    pub telemetry_every: usize,
    pub seed: u64,
    pub stream: u64,
}

/// One telemetry row of a run.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NsfomRecord {
    pub k: usize,
    pub f_val: f64,
    pub grad_norm: f64,
    pub mom_norm: f64,
    pub oracle_calls: usize,
}

/// Opaque problem handle.
pub struct NsfomProblem {
    oracle: Box<dyn GradientOracle>,
}

/// Opaque run trace.
pub struct NsfomTrace {
    records: Vec<NsfomRecord>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: NsfomStatus, msg: impl AsRef<str>) -> NsfomStatus {
    set_error(msg.as_ref());
    status
}

fn status_of(err: &Error) -> NsfomStatus {
    match err {
        Error::DegenerateDirection => NsfomStatus::DegenerateDirection,
        Error::PreconditionViolated(_) => NsfomStatus::InvalidArgument,
        Error::DimensionMismatch { .. } => NsfomStatus::DimensionMismatch,
        Error::Parse { .. } => NsfomStatus::ParseError,
        Error::Io { .. } => NsfomStatus::IoError,
        Error::NumericalFailure { .. } => NsfomStatus::NumericalFailure,
    }
}

fn guard(f: impl FnOnce() -> Result<(), NsfomStatus>) -> NsfomStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            NsfomStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => fail(NsfomStatus::Panic, "internal panic"),
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, NsfomStatus>;
}

impl<T> OrStatus<T> for nsfom::Result<T> {
    fn or_status(self) -> Result<T, NsfomStatus> {
        self.map_err(|e| fail(status_of(&e), e.to_string()))
    }
}

unsafe fn slice<'a>(ptr: *const f64, len: usize, what: &str) -> Result<&'a [f64], NsfomStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(fail(NsfomStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn slice_mut<'a>(ptr: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], NsfomStatus> {
    if len == 0 {
        return Ok(&mut []);
    }
    if ptr.is_null() {
        return Err(fail(NsfomStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts_mut(ptr, len))
}

unsafe fn deref<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, NsfomStatus> {
    ptr.as_ref()
        .ok_or_else(|| fail(NsfomStatus::NullPointer, format!("{what} is null")))
}

fn method_of(m: NsfomMethod) -> Method {
    match m {
        NsfomMethod::Pm => Method::Pm,
        NsfomMethod::Mem => Method::Mem,
        NsfomMethod::Rm => Method::Rm,
    }
}

fn schedule_of(p: &NsfomScheduleParams, rule: StepRule) -> Result<ScheduleSpec, NsfomStatus> {
    let alpha_mode = if p.alpha_known {
        AlphaMode::Known(p.alpha)
    } else {
        AlphaMode::Unknown
    };
    let scale = if p.eta_scale > 0.0 {
        p.eta_scale
    } else {
        default_eta_scale(method_of(p.method), rule)
    };
    ScheduleSpec::new(method_of(p.method), alpha_mode, p.p, scale).or_status()
}

fn check_dim(expected: usize, got: usize) -> Result<(), NsfomStatus> {
    if expected != got {
        return Err(fail(
            NsfomStatus::DimensionMismatch,
            format!("dimension mismatch: expected {expected}, got {got}"),
        ));
    }
    Ok(())
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), NsfomStatus> {
    if out.is_null() {
        return Err(fail(NsfomStatus::NullPointer, "output handle pointer is null"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Error message of the last fallible call on this thread, empty if it
/// succeeded.
/// The pointer stays valid until the next call into this library on the same
/// thread.
#[no_mangle]
pub extern "C" fn nsfom_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nsfom_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Step size and momentum weight at iteration `k`.
///
/// # Safety
/// `params`, `eta_out` and `theta_out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn nsfom_schedule_at(
    params: *const NsfomScheduleParams,
    normalized: bool,
    k: usize,
    eta_out: *mut f64,
    theta_out: *mut f64,
) -> NsfomStatus {
    guard(|| {
        let params = deref(params, "params")?;
        if eta_out.is_null() || theta_out.is_null() {
            return Err(fail(NsfomStatus::NullPointer, "output pointer is null"));
        }
        let rule = if normalized {
            StepRule::Normalized
        } else {
            StepRule::Unnormalized
        };
        let (eta, theta) = schedule_of(params, rule)?.at(k);
        *eta_out = eta;
        *theta_out = theta;
        Ok(())
    })
}

/// Extrapolation offsets and weights for `q` points given the base offset
/// `gamma_k`. Both output buffers must hold at least `q` values.
///
/// # Safety
/// `gammas_out` and `thetas_out` must point to `capacity` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn nsfom_extrapolation_weights(
    gamma_k: f64,
    q: usize,
    gammas_out: *mut f64,
    thetas_out: *mut f64,
    capacity: usize,
) -> NsfomStatus {
    guard(|| {
        if capacity < q {
            return Err(fail(
                NsfomStatus::BufferTooSmall,
                format!("capacity {capacity} is less than q = {q}"),
            ));
        }
        let gammas = slice_mut(gammas_out, q, "gammas_out")?;
        let thetas = slice_mut(thetas_out, q, "thetas_out")?;
        let w = compute_weights(gamma_k, q).or_status()?;
        gammas.copy_from_slice(w.gammas());
        thetas.copy_from_slice(w.thetas());
        Ok(())
    })
}

/// Inverse-CDF map from a uniform draw in (0, 1) to the symmetric heavy-tailed
/// noise variable. Returns NaN outside (0, 1).
#[no_mangle]
pub extern "C" fn nsfom_heavy_tail_from_uniform(u: f64) -> f64 {
    if !(u > 0.0 && u < 1.0) {
        return f64::NAN;
    }
    problems::heavy_tail_from_uniform(u)
}

/// Fill `out` with `len` heavy-tailed draws from stream (`seed`, `stream`).
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn nsfom_sample_heavy_tail(seed: u64, stream: u64, out: *mut f64, len: usize) -> NsfomStatus {
    guard(|| {
        let out = slice_mut(out, len, "out")?;
        let mut rng = RngStream::new(seed, stream);
        for v in out {
            *v = problems::sample_heavy_tail(&mut rng);
        }
        Ok(())
    })
}

/// Separable quadratic `½ Σ c_i x_i²`. With `noisy` set, gradients carry the
/// additive heavy-tailed noise.
///
/// # Safety
/// `curvature` must point to `n` doubles; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nsfom_problem_quadratic(
    curvature: *const f64,
    n: usize,
    noisy: bool,
    out: *mut *mut NsfomProblem,
) -> NsfomStatus {
    guard(|| {
        let c = slice(curvature, n, "curvature")?;
        let q = Quadratic::new(c.to_vec()).or_status()?;
        let oracle: Box<dyn GradientOracle> = if noisy {
            Box::new(AdditiveNoise::new(q))
        } else {
            Box::new(q)
        };
        emit(out, NsfomProblem { oracle })
    })
}

/// Synthetic data-fitting problem of dimension `n` with `m` samples, with
/// additive heavy-tailed gradient noise. If `x_star_out` is non-null it
/// receives the `n` generating parameters.
///
/// # Safety
/// `out` must be valid; `x_star_out`, if non-null, must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn nsfom_problem_synthetic(
    n: usize,
    m: usize,
    seed: u64,
    x_star_out: *mut f64,
    out: *mut *mut NsfomProblem,
) -> NsfomStatus {
    guard(|| {
        let mut rng = RngStream::new(seed, u64::MAX);
        let (problem, x_star) = generate_synthetic(n, m, &mut rng).or_status()?;
        if !x_star_out.is_null() {
            std::slice::from_raw_parts_mut(x_star_out, n).copy_from_slice(x_star.as_slice());
        }
        emit(
            out,
            NsfomProblem {
                oracle: Box::new(AdditiveNoise::new(problem)),
            },
        )
    })
}

/// Robust regression on a numeric CSV file. `target_column` is a 0-based
/// column index, or negative for the last column.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nsfom_problem_csv(
    path: *const c_char,
    target_column: i64,
    batch_size: usize,
    out: *mut *mut NsfomProblem,
) -> NsfomStatus {
    guard(|| {
        if path.is_null() {
            return Err(fail(NsfomStatus::NullPointer, "path is null"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| fail(NsfomStatus::InvalidArgument, "path is not valid UTF-8"))?;
        let target = if target_column < 0 {
            TargetColumn::Last
        } else {
            TargetColumn::Index(target_column as usize)
        };
        let loaded = load_csv_dataset(Path::new(path), &target, batch_size).or_status()?;
        emit(
            out,
            NsfomProblem {
                oracle: Box::new(loaded.problem),
            },
        )
    })
}

/// # Safety
/// `problem` must come from a `nsfom_problem_*` constructor and not be used
/// afterwards. Null is accepted.
#[no_mangle]
pub unsafe extern "C" fn nsfom_problem_free(problem: *mut NsfomProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Problem dimension, or 0 for a null handle.
///
/// # Safety
/// `problem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nsfom_problem_dim(problem: *const NsfomProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.oracle.dim())
}

/// # Safety
/// `problem` must be a live handle, `x` must point to `n` doubles and `out`
/// must be valid.
#[no_mangle]
pub unsafe extern "C" fn nsfom_problem_objective(
    problem: *const NsfomProblem,
    x: *const f64,
    n: usize,
    out: *mut f64,
) -> NsfomStatus {
    guard(|| {
        let p = deref(problem, "problem")?;
        check_dim(p.oracle.dim(), n)?;
        let x = DenseVector::new(slice(x, n, "x")?.to_vec());
        if out.is_null() {
            return Err(fail(NsfomStatus::NullPointer, "out is null"));
        }
        *out = p.oracle.objective(&x);
        Ok(())
    })
}

/// Exact gradient at `x`.
///
/// # Safety
/// `problem` must be a live handle; `x` and `grad_out` must each point to `n`
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn nsfom_problem_gradient(
    problem: *const NsfomProblem,
    x: *const f64,
    n: usize,
    grad_out: *mut f64,
) -> NsfomStatus {
    guard(|| {
        let p = deref(problem, "problem")?;
        check_dim(p.oracle.dim(), n)?;
        let x = DenseVector::new(slice(x, n, "x")?.to_vec());
        let out = slice_mut(grad_out, n, "grad_out")?;
        out.copy_from_slice(p.oracle.exact_gradient(&x).as_slice());
        Ok(())
    })
}

/// Run one optimizer from `x0` and return its telemetry trace.
///
/// # Safety
/// `problem` and `params` must be valid, `x0` must point to `n` doubles and
/// `trace_out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nsfom_run(
    problem: *const NsfomProblem,
    params: *const NsfomRunParams,
    x0: *const f64,
    n: usize,
    trace_out: *mut *mut NsfomTrace,
) -> NsfomStatus {
    guard(|| {
        let p = deref(problem, "problem")?;
        let params = deref(params, "params")?;
        check_dim(p.oracle.dim(), n)?;
        let x0 = DenseVector::new(slice(x0, n, "x0")?.to_vec());
        let rule = if params.normalized {
            StepRule::Normalized
        } else {
            StepRule::Unnormalized
        };
        let mut cfg = RunConfig::new(rule, schedule_of(&params.schedule, rule)?, params.iterations);
        cfg.sample_mode = match params.sample_mode {
            NsfomSampleMode::Shared => SampleMode::Shared,
            NsfomSampleMode::Independent => SampleMode::Independent,
        };
        cfg.max_oracle_calls = (params.max_oracle_calls > 0).then_some(params.max_oracle_calls);
        cfg.telemetry_every = params.telemetry_every.max(1);
        let rng = RngStream::new(params.seed, params.stream);
        let records = nsfom::run(p.oracle.as_ref(), &cfg, x0, rng).or_status()?;
        emit(
            trace_out,
            NsfomTrace {
                records: records.iter().map(record_of).collect(),
            },
        )
    })
}

fn record_of(r: &TrialRecord) -> NsfomRecord {
    NsfomRecord {
        k: r.k,
        f_val: r.f_val,
        grad_norm: r.grad_norm,
        mom_norm: r.mom_norm,
        oracle_calls: r.oracle_calls,
    }
}

/// Number of records, or 0 for a null handle.
///
/// # Safety
/// `trace` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nsfom_trace_len(trace: *const NsfomTrace) -> usize {
    trace.as_ref().map_or(0, |t| t.records.len())
}

/// # Safety
/// `trace` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nsfom_trace_get(trace: *const NsfomTrace, index: usize, out: *mut NsfomRecord) -> NsfomStatus {
    guard(|| {
        let t = deref(trace, "trace")?;
        if out.is_null() {
            return Err(fail(NsfomStatus::NullPointer, "out is null"));
        }
        let r = t.records.get(index).ok_or_else(|| {
            fail(
                NsfomStatus::InvalidArgument,
                format!("index {index} out of range for trace of length {}", t.records.len()),
            )
        })?;
        ptr::write(out, *r);
        Ok(())
    })
}

/// # Safety
/// `trace` must come from [`nsfom_run`] and not be used afterwards. Null is
/// accepted.
#[no_mangle]
pub unsafe extern "C" fn nsfom_trace_free(trace: *mut NsfomTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}
