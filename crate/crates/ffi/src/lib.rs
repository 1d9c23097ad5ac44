//! C ABI for `semiq`.
//!
//! Every fallible function returns a [`SemiqStatus`]. On failure the message
//! of the most recent error on the calling thread is available from
//! [`semiq_last_error`]. Models and trajectories are opaque heap handles that
//! must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use semiq::algebra::{self, ExpectationState, InvariantSet, Mode, ModelParams, MultiplierState};
use semiq::chaos::{lyapunov_max, LyapunovParams};
use semiq::dynamics::{integrate, monitor_invariants, InitialState, IntegratorConfig, Method, Representation, Trajectory};
use semiq::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SemiqStatus {
    Ok = 0,
    NullPointer = 1,
    Validation = 2,
    Domain = 3,
    PureLimit = 4,
    DeltaLimit = 5,
    Unreachable = 6,
    DriftExceeded = 7,
    StepUnderflow = 8,
    NonFinite = 9,
    NonConverged = 10,
    NoCrossings = 11,
    InconsistentSigns = 12,
    OutOfRange = 13,
    Panic = 14,
}

impl From<&Error> for SemiqStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain(_) => SemiqStatus::Domain,
            Error::PureLimit { .. } => SemiqStatus::PureLimit,
            Error::DeltaLimit { .. } => SemiqStatus::DeltaLimit,
            Error::Unreachable(_) => SemiqStatus::Unreachable,
            Error::DriftExceeded { .. } => SemiqStatus::DriftExceeded,
            Error::StepUnderflow { .. } => SemiqStatus::StepUnderflow,
            Error::NonFinite { .. } => SemiqStatus::NonFinite,
            Error::NonConverged { .. } => SemiqStatus::NonConverged,
            Error::NoCrossings => SemiqStatus::NoCrossings,
            Error::InconsistentSigns { .. } => SemiqStatus::InconsistentSigns,
            Error::Parse { .. } | Error::Validation(_) | Error::Io(_) => SemiqStatus::Validation,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SemiqRepresentation {
    Multipliers = 0,
    Quantum = 1,
    Classical = 2,
}

impl From<SemiqRepresentation> for Representation {
    fn from(r: SemiqRepresentation) -> Self {
        match r {
            SemiqRepresentation::Multipliers => Representation::Multipliers,
            SemiqRepresentation::Quantum => Representation::Expectations(Mode::Quantum),
            SemiqRepresentation::Classical => Representation::Expectations(Mode::Classical),
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SemiqMethod {
    Rk45 = 0,
    Rk4 = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiqParams {
    pub m_q: f64,
    pub m_cl: f64,
    pub omega_q: f64,
    pub e: f64,
    pub hbar: f64,
}

impl From<SemiqParams> for ModelParams {
    fn from(p: SemiqParams) -> Self {
        ModelParams { m_q: p.m_q, m_cl: p.m_cl, omega_q: p.omega_q, e: p.e, hbar: p.hbar }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiqMultipliers {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub a: f64,
    pub p_a: f64,
}

impl From<SemiqMultipliers> for MultiplierState {
    fn from(s: SemiqMultipliers) -> Self {
        MultiplierState::new(s.lambda1, s.lambda2, s.lambda3, s.a, s.p_a)
    }
}

impl From<MultiplierState> for SemiqMultipliers {
    fn from(s: MultiplierState) -> Self {
        SemiqMultipliers { lambda1: s.lambda1, lambda2: s.lambda2, lambda3: s.lambda3, a: s.a, p_a: s.p_a }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiqExpectations {
    pub x2: f64,
    pub p2: f64,
    pub l: f64,
    pub a: f64,
    pub p_a: f64,
}

impl From<SemiqExpectations> for ExpectationState {
    fn from(e: SemiqExpectations) -> Self {
        ExpectationState::new(e.x2, e.p2, e.l, e.a, e.p_a)
    }
}

impl From<ExpectationState> for SemiqExpectations {
    fn from(e: ExpectationState) -> Self {
        SemiqExpectations { x2: e.x2, p2: e.p2, l: e.l, a: e.a, p_a: e.p_a }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiqInvariants {
    pub i_uncert: f64,
    pub i_lambda: f64,
    pub energy: f64,
    pub e_r: f64,
    pub t_val: f64,
    pub lambda0: f64,
    pub entropy: f64,
}

impl From<InvariantSet> for SemiqInvariants {
    fn from(v: InvariantSet) -> Self {
        SemiqInvariants {
            i_uncert: v.i_uncert,
            i_lambda: v.i_lambda,
            energy: v.energy,
            e_r: v.e_r,
            t_val: v.t_val,
            lambda0: v.lambda0,
            entropy: v.entropy,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiqIntegrator {
    pub method: SemiqMethod,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub dt_init: f64,
    pub t_end: f64,
    pub sample_stride: usize,
    pub drift_tol: f64,
}

impl From<SemiqIntegrator> for IntegratorConfig {
    fn from(c: SemiqIntegrator) -> Self {
        IntegratorConfig {
            method: match c.method {
                SemiqMethod::Rk45 => Method::Rk45Adaptive,
                SemiqMethod::Rk4 => Method::Rk4Fixed,
            },
            rel_tol: c.rel_tol,
            abs_tol: c.abs_tol,
            dt_init: c.dt_init,
            t_end: c.t_end,
            sample_stride: c.sample_stride,
            drift_tol: c.drift_tol,
        }
    }
}

/// Maximal relative drift of the invariants over a run.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiqDrift {
    pub i_lambda: f64,
    pub i_uncert: f64,
    pub energy: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiqLyapunovParams {
    pub renorm_dt: f64,
    pub horizon: f64,
    pub d0: f64,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiqLyapunov {
    pub lambda_max: f64,
    pub uncertainty: f64,
    pub positive_fraction: f64,
    pub drift: SemiqDrift,
}

/// Validated model parameters.
pub struct SemiqModel {
    params: ModelParams,
}

/// Sampled trajectory together with the parameters that produced it.
pub struct SemiqTrajectory {
    traj: Trajectory,
    params: ModelParams,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), SemiqStatus>) -> SemiqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            SemiqStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => {
            set_last_error("internal panic");
            SemiqStatus::Panic
        }
    }
}

fn fail(e: Error) -> SemiqStatus {
    set_last_error(&e.to_string());
    SemiqStatus::from(&e)
}

fn null(what: &str) -> SemiqStatus {
    set_last_error(&format!("null pointer: {what}"));
    SemiqStatus::NullPointer
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, SemiqStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), SemiqStatus> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn semiq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn semiq_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version contains NUL"),
    };
    VERSION.as_ptr()
}

#[no_mangle]
pub extern "C" fn semiq_params_default() -> SemiqParams {
    let p = ModelParams::default();
    SemiqParams { m_q: p.m_q, m_cl: p.m_cl, omega_q: p.omega_q, e: p.e, hbar: p.hbar }
}

#[no_mangle]
pub extern "C" fn semiq_integrator_default() -> SemiqIntegrator {
    let c = IntegratorConfig::default();
    SemiqIntegrator {
        method: SemiqMethod::Rk45,
        rel_tol: c.rel_tol,
        abs_tol: c.abs_tol,
        dt_init: c.dt_init,
        t_end: c.t_end,
        sample_stride: c.sample_stride,
        drift_tol: c.drift_tol,
    }
}

#[no_mangle]
pub extern "C" fn semiq_lyapunov_default() -> SemiqLyapunovParams {
    let l = LyapunovParams::default();
    SemiqLyapunovParams { renorm_dt: l.renorm_dt, horizon: l.horizon, d0: l.d0, seed: l.seed }
}

/// Validates `params` and stores a new model handle in `*out`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn semiq_model_new(params: SemiqParams, out: *mut *mut SemiqModel) -> SemiqStatus {
    guard(|| {
        let params = ModelParams::from(params);
        params.validate().map_err(fail)?;
        let handle = Box::into_raw(Box::new(SemiqModel { params }));
        put(out, handle, "out").inspect_err(|_| drop(Box::from_raw(handle)))
    })
}

/// # Safety
/// `model` must be null or a handle from [`semiq_model_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn semiq_model_free(model: *mut SemiqModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// Pointers must be null or valid; `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn semiq_multipliers_to_evs(
    model: *const SemiqModel,
    s: *const SemiqMultipliers,
    out: *mut SemiqExpectations,
) -> SemiqStatus {
    guard(|| {
        let m = get(model, "model")?;
        let s = MultiplierState::from(*get(s, "state")?);
        let e = algebra::multipliers_to_evs(&s, &m.params).map_err(fail)?;
        put(out, e.into(), "out")
    })
}

/// # Safety
/// Pointers must be null or valid; `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn semiq_evs_to_multipliers(
    model: *const SemiqModel,
    e: *const SemiqExpectations,
    out: *mut SemiqMultipliers,
) -> SemiqStatus {
    guard(|| {
        let m = get(model, "model")?;
        let e = ExpectationState::from(*get(e, "state")?);
        let s = algebra::evs_to_multipliers(&e, &m.params).map_err(fail)?;
        put(out, s.into(), "out")
    })
}

/// # Safety
/// Pointers must be null or valid; `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn semiq_invariants_of_multipliers(
    model: *const SemiqModel,
    s: *const SemiqMultipliers,
    out: *mut SemiqInvariants,
) -> SemiqStatus {
    guard(|| {
        let m = get(model, "model")?;
        let s = MultiplierState::from(*get(s, "state")?);
        let inv = InvariantSet::of_multipliers(&s, &m.params).map_err(fail)?;
        put(out, inv.into(), "out")
    })
}

/// `classical` selects the classical statistics (`I ≥ 0`) instead of the quantum one.
///
/// # Safety
/// Pointers must be null or valid; `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn semiq_invariants_of_expectations(
    model: *const SemiqModel,
    e: *const SemiqExpectations,
    classical: bool,
    out: *mut SemiqInvariants,
) -> SemiqStatus {
    guard(|| {
        let m = get(model, "model")?;
        let e = ExpectationState::from(*get(e, "state")?);
        let mode = if classical { Mode::Classical } else { Mode::Quantum };
        e.validate(&m.params, mode).map_err(fail)?;
        put(out, InvariantSet::of_expectations(&e, &m.params, mode).into(), "out")
    })
}

/// `T(I_λ) = (ħ/2)·coth(ħI_λ)`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn semiq_t_of_ilambda(i_lambda: f64, hbar: f64, out: *mut f64) -> SemiqStatus {
    guard(|| put(out, algebra::t_of_ilambda(i_lambda, hbar).map_err(fail)?, "out"))
}

/// Inverse of `I = T(I_λ)²`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn semiq_ilambda_from_i(i: f64, hbar: f64, out: *mut f64) -> SemiqStatus {
    guard(|| put(out, algebra::ilambda_from_i(i, hbar).map_err(fail)?, "out"))
}

unsafe fn run_integration(
    model: *const SemiqModel,
    initial: InitialState,
    rep: SemiqRepresentation,
    cfg: *const SemiqIntegrator,
    out: *mut *mut SemiqTrajectory,
) -> Result<(), SemiqStatus> {
    let m = get(model, "model")?;
    let cfg = IntegratorConfig::from(*get(cfg, "integrator")?);
    let traj = integrate(&initial, &m.params, &cfg, rep.into()).map_err(fail)?;
    let handle = Box::into_raw(Box::new(SemiqTrajectory { traj, params: m.params }));
    put(out, handle, "out").inspect_err(|_| drop(Box::from_raw(handle)))
}

/// Integrates from expectation values in representation `rep`.
///
/// # Safety
/// Pointers must be null or valid; `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn semiq_integrate_expectations(
    model: *const SemiqModel,
    initial: *const SemiqExpectations,
    rep: SemiqRepresentation,
    cfg: *const SemiqIntegrator,
    out: *mut *mut SemiqTrajectory,
) -> SemiqStatus {
    guard(|| {
        let e = ExpectationState::from(*get(initial, "initial")?);
        run_integration(model, InitialState::Expectations(e), rep, cfg, out)
    })
}

/// Integrates from Lagrange multipliers in representation `rep`.
///
/// # Safety
/// Pointers must be null or valid; `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn semiq_integrate_multipliers(
    model: *const SemiqModel,
    initial: *const SemiqMultipliers,
    rep: SemiqRepresentation,
    cfg: *const SemiqIntegrator,
    out: *mut *mut SemiqTrajectory,
) -> SemiqStatus {
    guard(|| {
        let s = MultiplierState::from(*get(initial, "initial")?);
        run_integration(model, InitialState::Multipliers(s), rep, cfg, out)
    })
}

/// Number of stored samples; 0 for a null handle.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn semiq_trajectory_len(traj: *const SemiqTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.traj.len())
}

unsafe fn sample<T>(
    traj: *const SemiqTrajectory,
    index: usize,
    out: *mut T,
    f: impl FnOnce(&SemiqTrajectory, usize) -> T,
) -> SemiqStatus {
    guard(|| {
        let t = get(traj, "trajectory")?;
        if index >= t.traj.len() {
            set_last_error(&format!("sample {index} out of range (length {})", t.traj.len()));
            return Err(SemiqStatus::OutOfRange);
        }
        put(out, f(t, index), "out")
    })
}

/// # Safety
/// `traj` must be a live handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn semiq_trajectory_time(traj: *const SemiqTrajectory, index: usize, out: *mut f64) -> SemiqStatus {
    sample(traj, index, out, |t, i| t.traj.times[i])
}

/// Sample `index` as expectation values, whatever the representation.
///
/// # Safety
/// `traj` must be a live handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn semiq_trajectory_expectations(
    traj: *const SemiqTrajectory,
    index: usize,
    out: *mut SemiqExpectations,
) -> SemiqStatus {
    sample(traj, index, out, |t, i| t.traj.expectation(i).into())
}

/// # Safety
/// `traj` must be a live handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn semiq_trajectory_invariants(
    traj: *const SemiqTrajectory,
    index: usize,
    out: *mut SemiqInvariants,
) -> SemiqStatus {
    sample(traj, index, out, |t, i| t.traj.invariant_log[i].into())
}

/// # Safety
/// `traj` must be a live handle; `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn semiq_trajectory_drift(traj: *const SemiqTrajectory, out: *mut SemiqDrift) -> SemiqStatus {
    guard(|| {
        let t = get(traj, "trajectory")?;
        let d = monitor_invariants(&t.traj, &t.params);
        put(out, SemiqDrift { i_lambda: d.i_lambda, i_uncert: d.i_uncert, energy: d.energy }, "out")
    })
}

/// # Safety
/// `traj` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn semiq_trajectory_free(traj: *mut SemiqTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Maximal Lyapunov exponent of the trajectory starting at `initial`.
///
/// # Safety
/// Pointers must be null or valid; `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn semiq_lyapunov(
    model: *const SemiqModel,
    initial: *const SemiqExpectations,
    rep: SemiqRepresentation,
    cfg: *const SemiqIntegrator,
    params: *const SemiqLyapunovParams,
    out: *mut SemiqLyapunov,
) -> SemiqStatus {
    guard(|| {
        let m = get(model, "model")?;
        let e = ExpectationState::from(*get(initial, "initial")?);
        let cfg = IntegratorConfig::from(*get(cfg, "integrator")?);
        let l = get(params, "params")?;
        let lp = LyapunovParams { renorm_dt: l.renorm_dt, horizon: l.horizon, d0: l.d0, seed: l.seed };
        let r = lyapunov_max(&InitialState::Expectations(e), &m.params, &cfg, rep.into(), &lp).map_err(fail)?;
        let result = SemiqLyapunov {
            lambda_max: r.lambda_max,
            uncertainty: r.uncertainty,
            positive_fraction: r.positive_fraction(),
            drift: SemiqDrift { i_lambda: r.drift.i_lambda, i_uncert: r.drift.i_uncert, energy: r.drift.energy },
        };
        put(out, result, "out")
    })
}
