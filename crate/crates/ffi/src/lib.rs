//! C interface. Objects are opaque handles released with their `_free`
//! function; strings returned through out-parameters are released with
//! `dof3wc_string_free`. Every call returns a status code, and the message of
//! the latest failure on the calling thread is available from
//! `dof3wc_last_error`. Strings passed in are NUL-terminated UTF-8; a NULL
//! argument where a value is required yields `DOF3WC_STATUS_NULL_POINTER`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dof3wc::allocation::{allocate, AllocationError};
use dof3wc::dof_model::{
    build_compact_region, build_cutset_region, build_genie_outer_region, build_inner_region,
    build_nonintermittent_region, sum_dof_formula, sum_objective, ChannelConfig, DoFTuple,
    ModelError,
};
use dof3wc::polyhedra::{is_subset, lp_maximize, LinearSystem, LpOutcome, PolyError, Rational};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dof3wcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    ParseError = 4,
    Infeasible = 5,
    Unbounded = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dof3wcRegionForm {
    Raw = 0,
    Compact = 1,
    Nonintermittent = 2,
    Cutset = 3,
    Genie = 4,
}

/// Antenna counts and intermittency of a three-way channel.
pub struct Dof3wcConfig(ChannelConfig);

/// A system of linear inequalities over named variables.
pub struct Dof3wcSystem(LinearSystem);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(Dof3wcStatus, String);

impl From<PolyError> for Failure {
    fn from(e: PolyError) -> Self {
        let status = match e {
            PolyError::Json(_) => Dof3wcStatus::ParseError,
            _ => Dof3wcStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure(Dof3wcStatus::InvalidArgument, e.to_string())
    }
}

fn set_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).expect("NUL bytes removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> Dof3wcStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => Dof3wcStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            Dof3wcStatus::Internal
        }
    }
}

fn null() -> Failure {
    Failure(Dof3wcStatus::NullPointer, "null pointer argument".into())
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null());
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Failure(Dof3wcStatus::InvalidUtf8, "string is not UTF-8".into()))
}

unsafe fn reference<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(null)
}

unsafe fn give<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null());
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn give_string(out: *mut *mut c_char, value: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null());
    }
    let c =
        CString::new(value).map_err(|_| Failure(Dof3wcStatus::Internal, "NUL in output".into()))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn give_bool(out: *mut bool, value: bool) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null());
    }
    *out = value;
    Ok(())
}

/// Message of the latest failure on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dof3wc_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dof3wc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Antenna counts `m1, m2, m3 >= 1` and `tau = tau_num / tau_den` in [0, 1].
#[no_mangle]
pub unsafe extern "C" fn dof3wc_config_new(
    m1: u32,
    m2: u32,
    m3: u32,
    tau_num: i64,
    tau_den: i64,
    out: *mut *mut Dof3wcConfig,
) -> Dof3wcStatus {
    guard(|| {
        if tau_den == 0 {
            return Err(Failure(
                Dof3wcStatus::InvalidArgument,
                "tau denominator is zero".into(),
            ));
        }
        let config = ChannelConfig::from_parts(m1, m2, m3, tau_num, tau_den)?;
        give(out, Dof3wcConfig(config))
    })
}

/// Parses `{"M":[m1,m2,m3],"tau":"p/q"}`.
#[no_mangle]
pub unsafe extern "C" fn dof3wc_config_from_json(
    json: *const c_char,
    out: *mut *mut Dof3wcConfig,
) -> Dof3wcStatus {
    guard(|| {
        let config = ChannelConfig::from_json(text(json)?)
            .map_err(|e| Failure(Dof3wcStatus::ParseError, e.to_string()))?;
        give(out, Dof3wcConfig(config))
    })
}

/// `config` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dof3wc_config_free(config: *mut Dof3wcConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Builds one of the DoF regions over `d12, d13, d21, d23, d31, d32`.
#[no_mangle]
pub unsafe extern "C" fn dof3wc_region_build(
    config: *const Dof3wcConfig,
    form: Dof3wcRegionForm,
    out: *mut *mut Dof3wcSystem,
) -> Dof3wcStatus {
    guard(|| {
        let c = &reference(config)?.0;
        let system = match form {
            Dof3wcRegionForm::Raw => build_inner_region(c),
            Dof3wcRegionForm::Compact => build_compact_region(c)?,
            Dof3wcRegionForm::Nonintermittent => build_nonintermittent_region(c),
            Dof3wcRegionForm::Cutset => build_cutset_region(c),
            Dof3wcRegionForm::Genie => build_genie_outer_region(c),
        };
        give(out, Dof3wcSystem(system))
    })
}

#[no_mangle]
pub unsafe extern "C" fn dof3wc_system_from_json(
    json: *const c_char,
    out: *mut *mut Dof3wcSystem,
) -> Dof3wcStatus {
    guard(|| give(out, Dof3wcSystem(LinearSystem::from_json(text(json)?)?)))
}

#[no_mangle]
pub unsafe extern "C" fn dof3wc_system_to_json(
    system: *const Dof3wcSystem,
    out: *mut *mut c_char,
) -> Dof3wcStatus {
    guard(|| give_string(out, reference(system)?.0.to_json()))
}

/// `system` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dof3wc_system_free(system: *mut Dof3wcSystem) {
    if !system.is_null() {
        drop(Box::from_raw(system));
    }
}

/// Number of inequalities in `system`, or 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn dof3wc_system_len(system: *const Dof3wcSystem) -> usize {
    system.as_ref().map_or(0, |s| s.0.len())
}

/// Membership of a point given as a JSON object of `"p/q"` strings or integers.
#[no_mangle]
pub unsafe extern "C" fn dof3wc_system_check_point(
    system: *const Dof3wcSystem,
    point_json: *const c_char,
    out: *mut bool,
) -> Dof3wcStatus {
    guard(|| {
        let s = &reference(system)?.0;
        let point: BTreeMap<String, Rational> = serde_json::from_str(text(point_json)?)
            .map_err(|e| Failure(Dof3wcStatus::ParseError, e.to_string()))?;
        give_bool(out, s.check_point(&point)?)
    })
}

/// Whether every point of `p` lies in `q` (same variables required).
#[no_mangle]
pub unsafe extern "C" fn dof3wc_system_is_subset(
    p: *const Dof3wcSystem,
    q: *const Dof3wcSystem,
    out: *mut bool,
) -> Dof3wcStatus {
    guard(|| give_bool(out, is_subset(&reference(p)?.0, &reference(q)?.0)?))
}

/// Maximum of the sum of all six DoF variables over `system`, as `"p/q"`.
#[no_mangle]
pub unsafe extern "C" fn dof3wc_system_max_sum(
    system: *const Dof3wcSystem,
    out: *mut *mut c_char,
) -> Dof3wcStatus {
    guard(
        || match lp_maximize(&reference(system)?.0, &sum_objective())? {
            LpOutcome::Optimal { value, .. } => give_string(out, value.to_string()),
            LpOutcome::Unbounded => {
                Err(Failure(Dof3wcStatus::Unbounded, "sum is unbounded".into()))
            }
            LpOutcome::Infeasible => {
                Err(Failure(Dof3wcStatus::Infeasible, "system is empty".into()))
            }
        },
    )
}

/// Achievable sum-DoF in closed form, as `"p/q"`.
#[no_mangle]
pub unsafe extern "C" fn dof3wc_sum_dof_formula(
    config: *const Dof3wcConfig,
    out: *mut *mut c_char,
) -> Dof3wcStatus {
    guard(|| give_string(out, sum_dof_formula(&reference(config)?.0).to_string()))
}

/// Integer stream allocation for `dof` (`"d12,d13,d21,d23,d31,d32"`), as JSON.
#[no_mangle]
pub unsafe extern "C" fn dof3wc_allocate_json(
    config: *const Dof3wcConfig,
    dof: *const c_char,
    out: *mut *mut c_char,
) -> Dof3wcStatus {
    guard(|| {
        let c = &reference(config)?.0;
        let d: DoFTuple = text(dof)?
            .parse()
            .map_err(|e: ModelError| Failure(Dof3wcStatus::ParseError, e.to_string()))?;
        let alloc = allocate(c, &d).map_err(|e| match e {
            AllocationError::OutsideRegion(_) => Failure(Dof3wcStatus::Infeasible, e.to_string()),
            other => Failure(Dof3wcStatus::Internal, other.to_string()),
        })?;
        give_string(out, alloc.to_json())
    })
}
