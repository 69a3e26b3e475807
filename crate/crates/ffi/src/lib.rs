//! C ABI over `hhess_core`.
//!
//! Fallible functions return an [`HhessStatus`]. On failure a message is kept
//! per thread and can be read with [`hhess_last_error`]. Handles are opaque and
//! must be released with their matching `_free` function; passing NULL to a
//! `_free` function is a no-op.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use hhess_core::design::{synthesize, DesignTargets};
use hhess_core::model::{branch_transfer, characteristic, sharing_indices};
use hhess_core::mpt::{is_stable, MptCircuit, MptFixture, MptOperatingPoint, PowerConvention};
use hhess_core::sim::{simulate, GridModel, InertiaParams, LoadProfile, Scenario, SimOutput, SimWarning};
use hhess_core::{DroopBank, Error};
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HhessStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    PoleEvaluation = 3,
    UnderDampedInfeasible = 4,
    NonIdenticalWashout = 5,
    EmptyFleet = 6,
    Scenario = 7,
    IntegrationDiverged = 8,
    NoEvent = 9,
    SingularGridTerm = 10,
    SingularBranchTerm = 11,
    OutOfRange = 12,
    UnknownName = 13,
    Panic = 14,
}

/// Droop bank owned by the caller.
pub struct HhessBank(DroopBank);

/// Simulation result owned by the caller.
pub struct HhessSeries(SimOutput);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HhessBankParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub zeta: f64,
    pub k: f64,
    pub v_ref: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HhessCharacteristic {
    pub omega0: f64,
    pub xi: f64,
    pub omega_c: f64,
    pub k1: f64,
    pub k2: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HhessComplex {
    pub re: f64,
    pub im: f64,
}

/// Branch transfer values at one frequency.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HhessBranchResponse {
    pub ael: HhessComplex,
    pub pemel: HhessComplex,
    pub sc: HhessComplex,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HhessDesignTargets {
    pub tau: f64,
    pub xi: f64,
    pub k1: f64,
    pub k2: f64,
    pub alpha: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HhessInertia {
    pub j: f64,
    pub d: f64,
    pub f_ref: f64,
    pub p_ref: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HhessGrid {
    pub m_g: f64,
    pub d_g: f64,
    pub p_gen: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HhessSeriesRow {
    pub t: f64,
    pub f: f64,
    pub p_t: f64,
    pub p_a: f64,
    pub p_p: f64,
    pub p_s: f64,
    pub v_dc: f64,
    pub delta_q: f64,
    pub soc: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HhessMptCircuit {
    pub r_sr: f64,
    pub l_r: f64,
    pub r_d1: f64,
    pub r_d2: f64,
    pub r_d3: f64,
    pub l_d1: f64,
    pub l_d2: f64,
    pub l_d3: f64,
    pub r_fp: f64,
    pub r_fa: f64,
    pub r_fs: f64,
    pub l_fp: f64,
    pub l_fa: f64,
    pub l_fs: f64,
    pub c_dcr: f64,
    pub c_dc1: f64,
    pub c_dc2: f64,
    pub c_dc3: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HhessMptOperatingPoint {
    pub k_ipr: f64,
    pub k_ip1: f64,
    pub k_ip2: f64,
    pub k_ip3: f64,
    pub d_vi: f64,
    pub d_grid: f64,
    pub v_gdr: f64,
    pub i_drref: f64,
    pub v_dcr: f64,
    pub v_dc: f64,
    pub v_p: f64,
    pub v_a: f64,
    pub v_s: f64,
    pub i_p: f64,
    pub i_a: f64,
    pub i_s: f64,
    pub i_pref: f64,
    pub i_aref: f64,
    pub i_sref: f64,
    pub duty_p: f64,
    pub duty_a: f64,
    pub duty_s: f64,
}

/// Stability verdict. `binding_mu1` indexes the candidates in the order grid,
/// interconnect (PEMEL, AEL, SC), filter (PEMEL, AEL, SC); `binding_mu2` is
/// 0 for the rectifier and 1..3 for the PEMEL, AEL and SC capacitors.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HhessStabilityResult {
    pub mu1: f64,
    pub mu2: f64,
    pub mu_sum: f64,
    pub stable: bool,
    pub boundary: bool,
    pub binding_mu1: u32,
    pub binding_mu2: u32,
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

macro_rules! mirror {
    ($ffi:ident, $core:ident { $($f:ident),* $(,)? }) => {
        impl From<$ffi> for $core {
            fn from(v: $ffi) -> Self {
                $core { $($f: v.$f),* }
            }
        }
        impl From<$core> for $ffi {
            fn from(v: $core) -> Self {
                $ffi { $($f: v.$f),* }
            }
        }
    };
}

mirror!(
    HhessMptCircuit,
    MptCircuit {
        r_sr,
        l_r,
        r_d1,
        r_d2,
        r_d3,
        l_d1,
        l_d2,
        l_d3,
        r_fp,
        r_fa,
        r_fs,
        l_fp,
        l_fa,
        l_fs,
        c_dcr,
        c_dc1,
        c_dc2,
        c_dc3,
    }
);
mirror!(
    HhessMptOperatingPoint,
    MptOperatingPoint {
        k_ipr,
        k_ip1,
        k_ip2,
        k_ip3,
        d_vi,
        d_grid,
        v_gdr,
        i_drref,
        v_dcr,
        v_dc,
        v_p,
        v_a,
        v_s,
        i_p,
        i_a,
        i_s,
        i_pref,
        i_aref,
        i_sref,
        duty_p,
        duty_a,
        duty_s,
    }
);
mirror!(HhessInertia, InertiaParams { j, d, f_ref, p_ref });
mirror!(HhessGrid, GridModel { m_g, d_g, p_gen });
mirror!(
    HhessDesignTargets,
    DesignTargets {
        tau,
        xi,
        k1,
        k2,
        alpha
    }
);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(HhessStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidParameter { .. } => HhessStatus::InvalidParameter,
            Error::PoleEvaluation { .. } => HhessStatus::PoleEvaluation,
            Error::UnderDampedInfeasible { .. } => HhessStatus::UnderDampedInfeasible,
            Error::NonIdenticalWashout { .. } => HhessStatus::NonIdenticalWashout,
            Error::EmptyFleet(_) => HhessStatus::EmptyFleet,
            Error::Scenario(_) => HhessStatus::Scenario,
            Error::IntegrationDiverged { .. } => HhessStatus::IntegrationDiverged,
            Error::NoEvent => HhessStatus::NoEvent,
            Error::SingularGridTerm(_) => HhessStatus::SingularGridTerm,
            Error::SingularBranchTerm { .. } => HhessStatus::SingularBranchTerm,
        };
        Failure(status, e.to_string())
    }
}

fn set_error(message: Option<String>) {
    let c = message.map(|m| CString::new(m.replace('\0', " ")).unwrap_or_default());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> HhessStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(None);
            HhessStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(Some(message));
            status
        }
        Err(_) => {
            set_error(Some("internal panic".into()));
            HhessStatus::Panic
        }
    }
}

fn null(name: &str) -> Failure {
    Failure(HhessStatus::NullPointer, format!("`{name}` is NULL"))
}

unsafe fn arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(name))
}

fn complex(z: Complex64) -> HhessComplex {
    HhessComplex { re: z.re, im: z.im }
}

/// Message for the last failed call on this thread, or NULL after a success.
/// The pointer stays valid until the next call into this library on the same
/// thread.
#[no_mangle]
pub extern "C" fn hhess_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Static name of a status code.
#[no_mangle]
pub extern "C" fn hhess_status_name(status: HhessStatus) -> *const c_char {
    let name: &'static CStr = match status {
        HhessStatus::Ok => c"ok",
        HhessStatus::NullPointer => c"null_pointer",
        HhessStatus::InvalidParameter => c"invalid_parameter",
        HhessStatus::PoleEvaluation => c"pole_evaluation",
        HhessStatus::UnderDampedInfeasible => c"under_damped_infeasible",
        HhessStatus::NonIdenticalWashout => c"non_identical_washout",
        HhessStatus::EmptyFleet => c"empty_fleet",
        HhessStatus::Scenario => c"scenario",
        HhessStatus::IntegrationDiverged => c"integration_diverged",
        HhessStatus::NoEvent => c"no_event",
        HhessStatus::SingularGridTerm => c"singular_grid_term",
        HhessStatus::SingularBranchTerm => c"singular_branch_term",
        HhessStatus::OutOfRange => c"out_of_range",
        HhessStatus::UnknownName => c"unknown_name",
        HhessStatus::Panic => c"panic",
    };
    name.as_ptr()
}

/// Creates a bank from explicit gains.
///
/// # Safety
/// `out_bank` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn hhess_bank_new(
    params: HhessBankParams,
    out_bank: *mut *mut HhessBank,
) -> HhessStatus {
    guard(|| {
        let slot = out(out_bank, "out_bank")?;
        let HhessBankParams {
            alpha,
            beta,
            gamma,
            zeta,
            k,
            v_ref,
        } = params;
        let bank = DroopBank::new(alpha, beta, gamma, zeta, k, v_ref)?;
        *slot = Box::into_raw(Box::new(HhessBank(bank)));
        Ok(())
    })
}

/// Creates the shipped default bank (alpha = beta = 6.67e-4 V/W,
/// gamma = 750, zeta = 1500, k = 1, v_ref = 750 V).
///
/// # Safety
/// `out_bank` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn hhess_bank_reference(out_bank: *mut *mut HhessBank) -> HhessStatus {
    guard(|| {
        *out(out_bank, "out_bank")? = Box::into_raw(Box::new(HhessBank(DroopBank::reference())));
        Ok(())
    })
}

/// # Safety
/// `bank` must be NULL or a handle from this library that was not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hhess_bank_free(bank: *mut HhessBank) {
    if !bank.is_null() {
        drop(Box::from_raw(bank));
    }
}

/// # Safety
/// `bank` must be a live handle and `params` writable.
#[no_mangle]
pub unsafe extern "C" fn hhess_bank_params(
    bank: *const HhessBank,
    params: *mut HhessBankParams,
) -> HhessStatus {
    guard(|| {
        let b = arg(bank, "bank")?.0;
        *out(params, "params")? = HhessBankParams {
            alpha: b.alpha,
            beta: b.beta,
            gamma: b.gamma,
            zeta: b.zeta,
            k: b.k,
            v_ref: b.v_ref,
        };
        Ok(())
    })
}

/// Natural frequency, damping, cutoff and the two sharing indices.
///
/// # Safety
/// `bank` must be a live handle and `result` writable.
#[no_mangle]
pub unsafe extern "C" fn hhess_bank_characteristic(
    bank: *const HhessBank,
    result: *mut HhessCharacteristic,
) -> HhessStatus {
    guard(|| {
        let b = &arg(bank, "bank")?.0;
        let ch = characteristic(b);
        let idx = sharing_indices(b);
        *out(result, "result")? = HhessCharacteristic {
            omega0: ch.omega0,
            xi: ch.xi,
            omega_c: ch.omega_c,
            k1: idx.k1,
            k2: idx.k2,
        };
        Ok(())
    })
}

/// Evaluates the three branch transfer functions at `s = re + j im`.
///
/// # Safety
/// `bank` must be a live handle and `result` writable.
#[no_mangle]
pub unsafe extern "C" fn hhess_bank_transfer(
    bank: *const HhessBank,
    s: HhessComplex,
    result: *mut HhessBranchResponse,
) -> HhessStatus {
    guard(|| {
        let r = branch_transfer(Complex64::new(s.re, s.im), &arg(bank, "bank")?.0)?;
        *out(result, "result")? = HhessBranchResponse {
            ael: complex(r.h_a),
            pemel: complex(r.h_p),
            sc: complex(r.h_s),
        };
        Ok(())
    })
}

/// Smallest damping target that admits a real PEMEL inertia for `k2`.
#[no_mangle]
pub extern "C" fn hhess_min_feasible_xi(k2: f64) -> f64 {
    DesignTargets::min_feasible_xi(k2)
}

/// Synthesizes a bank meeting the targets.
///
/// # Safety
/// `out_bank` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn hhess_synthesize(
    targets: HhessDesignTargets,
    v_ref: f64,
    out_bank: *mut *mut HhessBank,
) -> HhessStatus {
    guard(|| {
        let slot = out(out_bank, "out_bank")?;
        let bank = synthesize(&targets.into())?.bank(v_ref)?;
        *slot = Box::into_raw(Box::new(HhessBank(bank)));
        Ok(())
    })
}

/// Default inertia-emulation loop parameters.
///
/// # Safety
/// `result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hhess_inertia_default(result: *mut HhessInertia) -> HhessStatus {
    guard(|| {
        *out(result, "result")? = InertiaParams::reference().into();
        Ok(())
    })
}

/// Default grid swing model.
///
/// # Safety
/// `result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hhess_grid_default(result: *mut HhessGrid) -> HhessStatus {
    guard(|| {
        *out(result, "result")? = GridModel::fixture().into();
        Ok(())
    })
}

/// Runs the coupled frequency and allocation simulation.
///
/// The load is piecewise constant: `load_p[i]` holds from `load_t[i]` until
/// the next breakpoint. `inertia` and `grid` may be NULL for the defaults.
///
/// # Safety
/// `bank` must be a live handle. `load_t` and `load_p` must each point to
/// `n_load` readable values. `out_series` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn hhess_simulate(
    bank: *const HhessBank,
    inertia: *const HhessInertia,
    grid: *const HhessGrid,
    load_t: *const f64,
    load_p: *const f64,
    n_load: usize,
    t_end: f64,
    dt: f64,
    soc0: f64,
    e_rated: f64,
    out_series: *mut *mut HhessSeries,
) -> HhessStatus {
    guard(|| {
        let b = &arg(bank, "bank")?.0;
        let slot = out(out_series, "out_series")?;
        let ip = inertia
            .as_ref()
            .map_or_else(InertiaParams::reference, |&i| i.into());
        let gm = grid.as_ref().map_or_else(GridModel::fixture, |&g| g.into());
        if n_load == 0 {
            return Err(Failure(HhessStatus::Scenario, "load profile is empty".into()));
        }
        let ts = std::slice::from_raw_parts(arg(load_t, "load_t")?, n_load);
        let ps = std::slice::from_raw_parts(arg(load_p, "load_p")?, n_load);
        let scenario = Scenario {
            load: LoadProfile::new(ts.iter().copied().zip(ps.iter().copied()).collect())?,
            t_end,
            dt,
            soc0,
            e_rated,
        };
        let output = simulate(&scenario, b, &ip, &gm)?;
        *slot = Box::into_raw(Box::new(HhessSeries(output)));
        Ok(())
    })
}

/// # Safety
/// `series` must be NULL or a handle from this library that was not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hhess_series_free(series: *mut HhessSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// Number of samples, or 0 for NULL.
///
/// # Safety
/// `series` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hhess_series_len(series: *const HhessSeries) -> usize {
    series.as_ref().map_or(0, |s| s.0.series.rows.len())
}

/// # Safety
/// `series` must be a live handle and `row` writable.
#[no_mangle]
pub unsafe extern "C" fn hhess_series_row(
    series: *const HhessSeries,
    index: usize,
    row: *mut HhessSeriesRow,
) -> HhessStatus {
    guard(|| {
        let rows = &arg(series, "series")?.0.series.rows;
        let r = rows
            .get(index)
            .ok_or_else(|| Failure(HhessStatus::OutOfRange, format!("row {index} of {}", rows.len())))?;
        *out(row, "row")? = HhessSeriesRow {
            t: r.t,
            f: r.f,
            p_t: r.p_t,
            p_a: r.p_a,
            p_p: r.p_p,
            p_s: r.p_s,
            v_dc: r.v_dc,
            delta_q: r.delta_q,
            soc: r.soc,
        };
        Ok(())
    })
}

/// Number of SOC excursions outside `[0, 1]`, or 0 for NULL.
///
/// # Safety
/// `series` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hhess_series_warning_count(series: *const HhessSeries) -> usize {
    series.as_ref().map_or(0, |s| s.0.warnings.len())
}

/// Time and SOC of one excursion.
///
/// # Safety
/// `series` must be a live handle; `t` and `soc` writable.
#[no_mangle]
pub unsafe extern "C" fn hhess_series_warning(
    series: *const HhessSeries,
    index: usize,
    t: *mut f64,
    soc: *mut f64,
) -> HhessStatus {
    guard(|| {
        let warnings = &arg(series, "series")?.0.warnings;
        let w = warnings.get(index).ok_or_else(|| {
            Failure(
                HhessStatus::OutOfRange,
                format!("warning {index} of {}", warnings.len()),
            )
        })?;
        let SimWarning::SocOutOfBounds { t: wt, soc: ws } = *w;
        *out(t, "t")? = wt;
        *out(soc, "soc")? = ws;
        Ok(())
    })
}

/// Fills a named stability fixture: `"nominal"` or `"boundary"`.
///
/// # Safety
/// `name` must be a NUL-terminated string; `circuit` and `op` writable.
#[no_mangle]
pub unsafe extern "C" fn hhess_mpt_fixture(
    name: *const c_char,
    circuit: *mut HhessMptCircuit,
    op: *mut HhessMptOperatingPoint,
) -> HhessStatus {
    guard(|| {
        let name = CStr::from_ptr(arg(name, "name")?).to_string_lossy();
        let fixture = MptFixture::parse(&name)
            .ok_or_else(|| Failure(HhessStatus::UnknownName, format!("unknown fixture `{name}`")))?;
        *out(circuit, "circuit")? = fixture.circuit().into();
        *out(op, "op")? = fixture.operating_point().into();
        Ok(())
    })
}

/// d-axis current reference for grid power `p_grid`, using `P = 1.5 v i`.
#[no_mangle]
pub extern "C" fn hhess_mpt_current(p_grid: f64, v_gdr: f64) -> f64 {
    PowerConvention::default().current(p_grid, v_gdr)
}

/// Evaluates the stability margins at one operating point.
///
/// # Safety
/// `circuit` and `op` must be readable and `result` writable.
#[no_mangle]
pub unsafe extern "C" fn hhess_mpt_evaluate(
    circuit: *const HhessMptCircuit,
    op: *const HhessMptOperatingPoint,
    result: *mut HhessStabilityResult,
) -> HhessStatus {
    guard(|| {
        let c: MptCircuit = (*arg(circuit, "circuit")?).into();
        let o: MptOperatingPoint = (*arg(op, "op")?).into();
        let r = is_stable(&c, &o)?;
        *out(result, "result")? = HhessStabilityResult {
            mu1: r.mu1,
            mu2: r.mu2,
            mu_sum: r.mu_sum,
            stable: r.stable,
            boundary: r.boundary,
            binding_mu1: r.binding_mu1.index() as u32,
            binding_mu2: r.binding_mu2.index() as u32,
            x1: r.x1,
            x2: r.x2,
            x3: r.x3,
        };
        Ok(())
    })
}
