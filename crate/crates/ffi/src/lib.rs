//! C ABI for the `dieout` library.
//!
//! Systems and trajectories are opaque handles owned by the caller and
//! released with the matching `_free` function. Reports are returned as
//! NUL-terminated JSON strings that must be released with
//! [`dieout_string_free`]. Every call returns a [`DieoutStatus`]; on failure
//! [`dieout_last_error`] describes the problem.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dieout::certificates::{team_certificate, verify_dieout, BetaSource, CertError};
use dieout::integrator::{simulate, SimError};
use dieout::model::{parse_rational, Config, ModelError, Trajectory};
use dieout::nullspace::{team, NullspaceError, TeamOptions};
use dieout::report::{to_json, CertifyDoc, TeamDoc, TrappingDoc, TrophicDoc, VerifyDoc};
use dieout::trophic::{check_trophic, trapping_region, TrophicError};

/// Result of every call. Values mirror the command-line exit codes where one exists.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DieoutStatus {
    Ok = 0,
    Failure = 1,
    Parse = 2,
    TooLarge = 3,
    AllBalanced = 4,
    TrivialKernel = 5,
    CensusFailure = 6,
    BetaMismatch = 7,
    Blowup = 9,
    NullPointer = 20,
    InvalidUtf8 = 21,
    OutOfRange = 22,
    Panic = 99,
}

/// A parsed system with its signal and simulation settings.
pub struct DieoutSystem {
    config: Config,
}

/// A simulated or loaded trajectory.
pub struct DieoutTrajectory {
    traj: Trajectory,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("NUL bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Fail(DieoutStatus, String);

impl From<ModelError> for Fail {
    fn from(e: ModelError) -> Self {
        Fail(DieoutStatus::Parse, e.to_string())
    }
}

impl From<NullspaceError> for Fail {
    fn from(e: NullspaceError) -> Self {
        let code = match e {
            NullspaceError::TooLarge { .. } => DieoutStatus::TooLarge,
            _ => DieoutStatus::Failure,
        };
        Fail(code, e.to_string())
    }
}

impl From<CertError> for Fail {
    fn from(e: CertError) -> Self {
        let code = match e {
            CertError::AllBalanced => DieoutStatus::AllBalanced,
            CertError::BetaMismatch { .. } => DieoutStatus::BetaMismatch,
            _ => DieoutStatus::Failure,
        };
        Fail(code, e.to_string())
    }
}

impl From<SimError> for Fail {
    fn from(e: SimError) -> Self {
        let code = match e {
            SimError::Blowup { .. } => DieoutStatus::Blowup,
            SimError::Model(_) => DieoutStatus::Parse,
            _ => DieoutStatus::Failure,
        };
        Fail(code, e.to_string())
    }
}

impl From<TrophicError> for Fail {
    fn from(e: TrophicError) -> Self {
        Fail(DieoutStatus::Failure, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(DieoutStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting failures and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> DieoutStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            DieoutStatus::Ok
        }
        Ok(Err(Fail(code, msg))) => {
            set_error(&msg);
            code
        }
        Err(_) => {
            set_error("internal panic");
            DieoutStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(DieoutStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn system<'a>(p: *const DieoutSystem) -> Result<&'a DieoutSystem, Fail> {
    p.as_ref().ok_or_else(|| null("system"))
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = CString::new(s).map_err(|_| Fail(DieoutStatus::Failure, "NUL in output".into()))?.into_raw();
    Ok(())
}

/// Message for the most recent failed call on this thread; empty after a
/// success. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn dieout_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn dieout_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn dieout_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a JSON config into a new system handle.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dieout_system_from_json(json: *const c_char, out: *mut *mut DieoutSystem) -> DieoutStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output pointer"));
        }
        *out = ptr::null_mut();
        let config = Config::from_json(read_str(json, "json")?)?;
        *out = Box::into_raw(Box::new(DieoutSystem { config }));
        Ok(())
    })
}

/// # Safety
/// `sys` must come from [`dieout_system_from_json`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn dieout_system_free(sys: *mut DieoutSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Number of species `d`, or 0 for a null handle.
///
/// # Safety
/// `sys` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dieout_system_dim(sys: *const DieoutSystem) -> usize {
    sys.as_ref().map_or(0, |s| s.config.spec.d())
}

/// Replaces growth coefficient `index` (1-based) with a rational literal
/// such as `"-3/5"` or `"0.29"`.
///
/// # Safety
/// `sys` must be a live handle; `value` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn dieout_system_set_c(sys: *mut DieoutSystem, index: usize, value: *const c_char) -> DieoutStatus {
    guard(|| {
        let s = sys.as_mut().ok_or_else(|| null("system"))?;
        if index == 0 || index > s.config.spec.d() {
            return Err(Fail(DieoutStatus::OutOfRange, format!("index {index} outside 1..={}", s.config.spec.d())));
        }
        let mut c = s.config.spec.c.clone();
        c[index - 1] = parse_rational(read_str(value, "value")?)?;
        s.config.spec = s.config.spec.with_c(c)?;
        Ok(())
    })
}

/// Team report as JSON (same document as `dieout team`).
///
/// # Safety
/// `sys` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dieout_team_json(sys: *const DieoutSystem, out: *mut *mut c_char) -> DieoutStatus {
    guard(|| {
        let s = system(sys)?;
        let t = team(&s.config.spec, TeamOptions::default())?;
        put_string(out, to_json(&TeamDoc::new(&s.config.spec, &t)))
    })
}

/// Trophic check and trapping region as JSON (same document as `dieout check-trophic`).
///
/// # Safety
/// `sys` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dieout_trophic_json(sys: *const DieoutSystem, out: *mut *mut c_char) -> DieoutStatus {
    guard(|| {
        let s = system(sys)?;
        let check = check_trophic(&s.config.spec)?;
        let trapping = if check.pass { Some(TrappingDoc::new(&trapping_region(&s.config.spec)?)) } else { None };
        put_string(out, to_json(&TrophicDoc { check, trapping }))
    })
}

/// Certificates for bound `beta` as JSON (same document as `dieout certify`).
///
/// # Safety
/// `sys` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dieout_certify_json(sys: *const DieoutSystem, beta: f64, out: *mut *mut c_char) -> DieoutStatus {
    guard(|| {
        let s = system(sys)?;
        let spec = &s.config.spec;
        let t = team(spec, TeamOptions::default())?;
        if t.k == 0 {
            return Err(Fail(DieoutStatus::TrivialKernel, "kernel is trivial".into()));
        }
        let tc = team_certificate(&t, &spec.c, beta, &s.config.sim.x0)?;
        put_string(out, to_json(&CertifyDoc::new(spec, &t, &tc, BetaSource::Flag, None)))
    })
}

/// Integrates the system with its configured settings.
///
/// # Safety
/// `sys` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dieout_simulate(sys: *const DieoutSystem, out: *mut *mut DieoutTrajectory) -> DieoutStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output pointer"));
        }
        *out = ptr::null_mut();
        let s = system(sys)?;
        let run = simulate(&s.config.spec, &s.config.signal, &s.config.sim)?;
        *out = Box::into_raw(Box::new(DieoutTrajectory { traj: run.trajectory }));
        Ok(())
    })
}

/// Loads a trajectory CSV (`t,x1..xd[,z..]`) for a system with `d` species.
///
/// # Safety
/// `csv` must be a NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dieout_trajectory_from_csv(csv: *const c_char, d: usize, out: *mut *mut DieoutTrajectory) -> DieoutStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output pointer"));
        }
        *out = ptr::null_mut();
        let traj = Trajectory::read_csv(read_str(csv, "csv")?.as_bytes(), d)?;
        *out = Box::into_raw(Box::new(DieoutTrajectory { traj }));
        Ok(())
    })
}

/// # Safety
/// `traj` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn dieout_trajectory_free(traj: *mut DieoutTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Number of retained samples, or 0 for a null handle.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dieout_trajectory_len(traj: *const DieoutTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.traj.samples.len())
}

/// Largest coordinate seen during the run, or NaN for a null handle.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dieout_trajectory_beta(traj: *const DieoutTrajectory) -> f64 {
    traj.as_ref().map_or(f64::NAN, |t| t.traj.beta)
}

/// Copies sample `index` into `t` and `x[0..xlen]`; `xlen` must equal `d`.
///
/// # Safety
/// `traj` must be a live handle; `t` writable; `x` writable for `xlen` doubles.
#[no_mangle]
pub unsafe extern "C" fn dieout_trajectory_sample(
    traj: *const DieoutTrajectory,
    index: usize,
    t: *mut f64,
    x: *mut f64,
    xlen: usize,
) -> DieoutStatus {
    guard(|| {
        let tr = traj.as_ref().ok_or_else(|| null("trajectory"))?;
        if t.is_null() || x.is_null() {
            return Err(null("output buffer"));
        }
        let s = tr
            .traj
            .samples
            .get(index)
            .ok_or_else(|| Fail(DieoutStatus::OutOfRange, format!("sample {index} of {}", tr.traj.samples.len())))?;
        if xlen != s.x.len() {
            return Err(Fail(DieoutStatus::OutOfRange, format!("buffer holds {xlen}, sample has {}", s.x.len())));
        }
        *t = s.t;
        std::slice::from_raw_parts_mut(x, xlen).copy_from_slice(&s.x);
        Ok(())
    })
}

/// Trajectory as CSV text.
///
/// # Safety
/// `traj` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dieout_trajectory_csv(traj: *const DieoutTrajectory, out: *mut *mut c_char) -> DieoutStatus {
    guard(|| {
        let tr = traj.as_ref().ok_or_else(|| null("trajectory"))?;
        let mut buf = Vec::new();
        tr.traj.write_csv(&mut buf)?;
        put_string(out, String::from_utf8(buf).expect("csv is ASCII"))
    })
}

/// Census of the trajectory against the team certificates. A `beta` that is
/// not positive selects the trajectory's own bound. The report is written to
/// `out` even when the census fails, in which case the status is
/// `CensusFailure`.
///
/// # Safety
/// `sys` and `traj` must be live handles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dieout_verify_json(
    sys: *const DieoutSystem,
    traj: *const DieoutTrajectory,
    beta: f64,
    out: *mut *mut c_char,
) -> DieoutStatus {
    let mut census_failed = false;
    let status = guard(|| {
        let s = system(sys)?;
        let tr = &traj.as_ref().ok_or_else(|| null("trajectory"))?.traj;
        let first = tr.samples.first().ok_or_else(|| Fail(DieoutStatus::Parse, "empty trajectory".into()))?;
        let (beta, source) = if beta > 0.0 { (beta, BetaSource::Flag) } else { (tr.beta, BetaSource::Trajectory) };
        let t = team(&s.config.spec, TeamOptions::default())?;
        if t.k == 0 {
            return Err(Fail(DieoutStatus::TrivialKernel, "kernel is trivial".into()));
        }
        let tc = team_certificate(&t, &s.config.spec.c, beta, &first.x)?;
        let report = verify_dieout(tr, &tc)?;
        census_failed = !report.pass;
        put_string(out, to_json(&VerifyDoc { beta_source: source, report }))
    });
    if status == DieoutStatus::Ok && census_failed {
        set_error("census failure");
        return DieoutStatus::CensusFailure;
    }
    status
}
