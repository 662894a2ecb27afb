//! C ABI for `mlcavity`.
//!
//! Every fallible function returns an [`MlcStatus`]; on failure the message
//! is available from [`mlc_last_error`] on the same thread. Handles are
//! opaque and must be released with their `_free` function. Rates are in
//! rad/s, as in the Rust API.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use mlcavity::levels::{self, AngularMomentum, CouplingSet, LevelScheme, Sublevel, TransitionGeometry};
use mlcavity::meanfield::{self, AtomNumberModel, DriveParams, IntegratorSettings, TimeSeries};
use mlcavity::pumping::{self, RateCoefficients, Regime, TwoTransitionParams};
use mlcavity::spectra;
use mlcavity::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MlcStatus {
    Ok = 0,
    InvalidArgument = 1,
    Unsupported = 2,
    Domain = 3,
    Degenerate = 4,
    Stiffness = 5,
    Config = 6,
    Io = 7,
    NullPointer = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MlcRegime {
    Exponential = 0,
    Accelerated = 1,
    Decelerated = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MlcGeometry {
    Pi = 0,
    SigmaPlus = 1,
    SigmaMinus = 2,
}

/// Drive of the cavity mode.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct MlcDrive {
    pub eta: f64,
    pub delta_a: f64,
    pub delta_c: f64,
    pub kappa: f64,
}

/// Parameters of the two-transition rate model.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct MlcRateParams {
    pub c_minus_sq: f64,
    pub c_plus_sq: f64,
    pub g0: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub n_atoms: f64,
    pub delta_a: f64,
    pub delta_c: f64,
    pub eta: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct MlcRateCoefficients {
    pub u: f64,
    pub w: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma_eff: f64,
}

/// Opaque coupling set of one F → F′ transition.
pub struct MlcCouplingSet(CouplingSet);

/// Opaque result of a mean-field integration.
pub struct MlcTimeSeries(TimeSeries);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> MlcStatus {
    match e {
        Error::InvalidArgument(_) => MlcStatus::InvalidArgument,
        Error::Unsupported(_) => MlcStatus::Unsupported,
        Error::Domain(_) => MlcStatus::Domain,
        Error::Degenerate(_) => MlcStatus::Degenerate,
        Error::Stiffness { .. } => MlcStatus::Stiffness,
        Error::Config(_) => MlcStatus::Config,
        Error::Io(_) => MlcStatus::Io,
    }
}

enum Fail {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> MlcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            MlcStatus::Ok
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Null(name))) => {
            set_error(format!("null pointer: {name}"));
            MlcStatus::NullPointer
        }
        Err(_) => {
            set_error("internal panic".into());
            MlcStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(ptr: *mut T, name: &'static str) -> Result<&'a mut T, Fail> {
    ptr.as_mut().ok_or(Fail::Null(name))
}

unsafe fn input<'a, T>(ptr: *const T, name: &'static str) -> Result<&'a T, Fail> {
    ptr.as_ref().ok_or(Fail::Null(name))
}

unsafe fn slice<'a>(ptr: *const f64, len: usize, name: &'static str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(Fail::Null(name));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn mlc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// ⟨j1 m1; j2 m2 | j m⟩ with every argument given as twice its value.
///
/// # Safety
/// `result` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn mlc_clebsch_gordan(
    two_j1: i32,
    two_m1: i32,
    two_j2: i32,
    two_m2: i32,
    two_j: i32,
    two_m: i32,
    result: *mut f64,
) -> MlcStatus {
    guard(|| {
        *out(result, "result")? = levels::clebsch_gordan(two_j1, two_m1, two_j2, two_m2, two_j, two_m)?;
        Ok(())
    })
}

/// Builds the couplings of a closed F → F′ transition.
///
/// # Safety
/// `handle` must be a valid pointer; on success it receives a handle to be
/// released with [`mlc_coupling_set_free`].
#[no_mangle]
pub unsafe extern "C" fn mlc_coupling_set_new(
    two_f_ground: i32,
    two_f_excited: i32,
    geometry: MlcGeometry,
    g0: f64,
    gamma: f64,
    handle: *mut *mut MlcCouplingSet,
) -> MlcStatus {
    guard(|| {
        let slot = out(handle, "handle")?;
        let geometry = match geometry {
            MlcGeometry::Pi => TransitionGeometry::Pi,
            MlcGeometry::SigmaPlus => TransitionGeometry::SigmaPlus,
            MlcGeometry::SigmaMinus => TransitionGeometry::SigmaMinus,
        };
        let scheme = LevelScheme::new(
            AngularMomentum::from_twice(two_f_ground)?,
            AngularMomentum::from_twice(two_f_excited)?,
            geometry,
            g0,
            gamma,
        )?;
        *slot = Box::into_raw(Box::new(MlcCouplingSet(levels::coupling_set(&scheme)?)));
        Ok(())
    })
}

/// # Safety
/// `handle` must come from [`mlc_coupling_set_new`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn mlc_coupling_set_free(handle: *mut MlcCouplingSet) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Number of ground sublevels, or 0 for a null handle.
///
/// # Safety
/// `handle` must be null or a live coupling-set handle.
#[no_mangle]
pub unsafe extern "C" fn mlc_coupling_set_len(handle: *const MlcCouplingSet) -> usize {
    handle.as_ref().map_or(0, |h| h.0.len())
}

/// Copies the Clebsch–Gordan coefficients, in increasing ground m, into
/// `buffer` of length `len` (at least [`mlc_coupling_set_len`]).
///
/// # Safety
/// `buffer` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mlc_coupling_set_cg(handle: *const MlcCouplingSet, buffer: *mut f64, len: usize) -> MlcStatus {
    guard(|| {
        let set = &input(handle, "handle")?.0;
        if len < set.len() {
            return Err(Error::InvalidArgument(format!("buffer holds {len} values, need {}", set.len())).into());
        }
        if buffer.is_null() {
            return Err(Fail::Null("buffer"));
        }
        std::slice::from_raw_parts_mut(buffer, set.len()).copy_from_slice(set.cg());
        Ok(())
    })
}

/// g_eff = g0 √(Σ c_m² P_m) for normalized populations in increasing m.
///
/// # Safety
/// `populations` must hold `len` doubles; `result` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mlc_effective_coupling(
    handle: *const MlcCouplingSet,
    populations: *const f64,
    len: usize,
    result: *mut f64,
) -> MlcStatus {
    guard(|| {
        let set = &input(handle, "handle")?.0;
        let p = slice(populations, len, "populations")?;
        *out(result, "result")? = spectra::effective_coupling(set, p)?;
        Ok(())
    })
}

/// Steady-state intracavity photon number of the weakly driven system.
///
/// # Safety
/// `drive` and `result` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn mlc_intracavity_intensity(
    drive: *const MlcDrive,
    gamma: f64,
    n_atoms: f64,
    g_eff: f64,
    result: *mut f64,
) -> MlcStatus {
    guard(|| {
        let d = input(drive, "drive")?;
        let params = DriveParams { eta: d.eta, delta_a: d.delta_a, delta_c: d.delta_c, kappa: d.kappa };
        *out(result, "result")? = spectra::intracavity_intensity_ss(&params, gamma, n_atoms, g_eff)?;
        Ok(())
    })
}

/// 2 g_eff √N.
#[no_mangle]
pub extern "C" fn mlc_normal_mode_splitting(g_eff: f64, n_atoms: f64) -> f64 {
    spectra::normal_mode_splitting(g_eff, n_atoms)
}

fn rate_params(p: &MlcRateParams) -> TwoTransitionParams {
    TwoTransitionParams {
        c_minus_sq: p.c_minus_sq,
        c_plus_sq: p.c_plus_sq,
        g0: p.g0,
        gamma: p.gamma,
        kappa: p.kappa,
        n_atoms: p.n_atoms,
        delta_a: p.delta_a,
        delta_c: p.delta_c,
        eta: p.eta,
    }
}

fn coefficients(c: &MlcRateCoefficients) -> RateCoefficients {
    RateCoefficients { u: c.u, w: c.w, alpha: c.alpha, beta: c.beta, gamma_eff: c.gamma_eff }
}

/// # Safety
/// `params` and `result` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn mlc_rate_coefficients(
    params: *const MlcRateParams,
    result: *mut MlcRateCoefficients,
) -> MlcStatus {
    guard(|| {
        let c = pumping::rate_coefficients(&rate_params(input(params, "params")?))?;
        *out(result, "result")? =
            MlcRateCoefficients { u: c.u, w: c.w, alpha: c.alpha, beta: c.beta, gamma_eff: c.gamma_eff };
        Ok(())
    })
}

/// Time at which P_− has fallen from 1 to `p`.
///
/// # Safety
/// `coeffs` and `result` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn mlc_implicit_time(coeffs: *const MlcRateCoefficients, p: f64, result: *mut f64) -> MlcStatus {
    guard(|| {
        *out(result, "result")? = pumping::implicit_time(p, &coefficients(input(coeffs, "coeffs")?))?;
        Ok(())
    })
}

/// # Safety
/// `coeffs` and `result` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn mlc_classify_regime(coeffs: *const MlcRateCoefficients, result: *mut MlcRegime) -> MlcStatus {
    guard(|| {
        let regime = pumping::classify_regime(&coefficients(input(coeffs, "coeffs")?));
        *out(result, "result")? = match regime {
            Regime::Exponential => MlcRegime::Exponential,
            Regime::Accelerated => MlcRegime::Accelerated,
            Regime::Decelerated => MlcRegime::Decelerated,
        };
        Ok(())
    })
}

/// Integrates the mean-field equations at constant atom number from an empty
/// cavity, sampling `samples` evenly spaced times on [0, t_end].
/// `populations` holds the initial ground populations in increasing m.
///
/// # Safety
/// Pointers must be valid; `populations` must hold `len` doubles. On success
/// `series` receives a handle to be released with [`mlc_time_series_free`].
#[no_mangle]
pub unsafe extern "C" fn mlc_meanfield_integrate(
    handle: *const MlcCouplingSet,
    populations: *const f64,
    len: usize,
    drive: *const MlcDrive,
    n_atoms: f64,
    t_end: f64,
    samples: usize,
    series: *mut *mut MlcTimeSeries,
) -> MlcStatus {
    guard(|| {
        let set = &input(handle, "handle")?.0;
        let p = slice(populations, len, "populations")?;
        let d = input(drive, "drive")?;
        let slot = out(series, "series")?;
        if p.len() != set.len() {
            return Err(Error::InvalidArgument(format!("expected {} populations, got {}", set.len(), p.len())).into());
        }
        if samples < 2 || !(t_end > 0.0) {
            return Err(Error::InvalidArgument("need t_end > 0 and at least two samples".into()).into());
        }
        let map: BTreeMap<Sublevel, f64> = set.ground_levels().iter().copied().zip(p.iter().copied()).collect();
        let state = meanfield::initial_state(&map)?;
        let params = DriveParams { eta: d.eta, delta_a: d.delta_a, delta_c: d.delta_c, kappa: d.kappa };
        let grid = meanfield::uniform_grid(0.0, t_end, samples);
        let ts = meanfield::integrate(
            &state,
            &params,
            set,
            &AtomNumberModel::Constant(n_atoms),
            (0.0, t_end),
            &grid,
            &IntegratorSettings::default(),
        )?;
        *slot = Box::into_raw(Box::new(MlcTimeSeries(ts)));
        Ok(())
    })
}

/// # Safety
/// `series` must come from [`mlc_meanfield_integrate`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn mlc_time_series_free(series: *mut MlcTimeSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// Number of samples, or 0 for a null handle.
///
/// # Safety
/// `series` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mlc_time_series_len(series: *const MlcTimeSeries) -> usize {
    series.as_ref().map_or(0, |s| s.0.times.len())
}

/// Copies sample times and intracavity photon numbers into buffers of length
/// `len` (at least [`mlc_time_series_len`]). Either buffer may be null.
///
/// # Safety
/// Non-null buffers must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mlc_time_series_photon_number(
    series: *const MlcTimeSeries,
    times: *mut f64,
    photon_number: *mut f64,
    len: usize,
) -> MlcStatus {
    guard(|| {
        let s = &input(series, "series")?.0;
        let n = s.times.len();
        if len < n {
            return Err(Error::InvalidArgument(format!("buffer holds {len} values, need {n}")).into());
        }
        if !times.is_null() {
            std::slice::from_raw_parts_mut(times, n).copy_from_slice(&s.times);
        }
        if !photon_number.is_null() {
            let dst = std::slice::from_raw_parts_mut(photon_number, n);
            for (d, r) in dst.iter_mut().zip(&s.records) {
                *d = r.photon_number;
            }
        }
        Ok(())
    })
}

/// Peak excited-state population reached during the run.
///
/// # Safety
/// `series` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mlc_time_series_peak_rho_ee(series: *const MlcTimeSeries) -> f64 {
    series.as_ref().map_or(f64::NAN, |s| s.0.metadata.peak_rho_ee)
}
