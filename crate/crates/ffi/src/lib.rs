//! C ABI over `nadir-core`.
//!
//! Every fallible call returns a [`NadirStatus`]; on failure the message is
//! kept per thread and read with [`nadir_last_error`]. Strings handed out
//! by this library are released with [`nadir_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nadir_core::module::{visible_radii, DiffModule, RadiiMultiset};
use nadir_core::pw_affine::{build_radius_profile, ProfileKind};
use nadir_core::rational::{fmt_q, parse_q};
use nadir_core::transforms::{frob_antecedent, frob_pull, frob_push, multiset_json, MultisetJson};
use nadir_core::valued::Axis;
use nadir_core::{Error, Q};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NadirStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    Computation = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NadirFrobeniusOp {
    Push = 0,
    Pull = 1,
    Antecedent = 2,
}

/// Opaque differential module.
pub struct NadirModule {
    inner: DiffModule,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(NadirStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Json(_)
            | Error::Invalid(_)
            | Error::ParseRational(_)
            | Error::ParseAxis(_)
            | Error::BadPrime(_)
            | Error::Dimension { .. }
            | Error::NotIntegrable(..)
            | Error::UnknownAxis(_)
            | Error::EmptyWindow { .. } => NadirStatus::InvalidInput,
            _ => NadirStatus::Computation,
        };
        Failure(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> NadirStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            NadirStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            NadirStatus::Panic
        }
    }
}

unsafe fn text<'a>(s: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(Failure(NadirStatus::NullArgument, format!("{name} is null")));
    }
    unsafe { CStr::from_ptr(s) }.to_str().map_err(|_| Failure(NadirStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

fn q_list(s: &str) -> Result<Vec<Q>, Failure> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    Ok(s.split(',').map(|x| parse_q(x.trim())).collect::<Result<Vec<_>, _>>()?)
}

unsafe fn hand_out(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(NadirStatus::NullArgument, "out is null".into()));
    }
    let c = CString::new(s).map_err(|_| Failure(NadirStatus::Computation, "output contains NUL".into()))?;
    unsafe { *out = c.into_raw() };
    Ok(())
}

fn radii_json(m: &RadiiMultiset) -> String {
    let entries: Vec<serde_json::Value> =
        m.entries().iter().map(|e| serde_json::json!([fmt_q(&e.value), e.multiplicity, e.capped])).collect();
    serde_json::json!({ "kind": m.kind, "entries": entries }).to_string()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn nadir_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a module from JSON and checks integrability.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nadir_module_from_json(json: *const c_char, out: *mut *mut NadirModule) -> NadirStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure(NadirStatus::NullArgument, "out is null".into()));
        }
        let m = DiffModule::from_json_str(unsafe { text(json, "json") }?)?;
        unsafe { *out = Box::into_raw(Box::new(NadirModule { inner: m })) };
        Ok(())
    })
}

/// # Safety
/// `module` must come from [`nadir_module_from_json`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn nadir_module_free(module: *mut NadirModule) {
    if !module.is_null() {
        drop(unsafe { Box::from_raw(module) });
    }
}

/// # Safety
/// `module` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nadir_module_rank(module: *const NadirModule, out: *mut usize) -> NadirStatus {
    guard(|| {
        let m = unsafe { module.as_ref() }.ok_or(Failure(NadirStatus::NullArgument, "module is null".into()))?;
        if out.is_null() {
            return Err(Failure(NadirStatus::NullArgument, "out is null".into()));
        }
        unsafe { *out = m.inner.rank() };
        Ok(())
    })
}

/// Extrinsic log-radii along `axis` (e.g. `"t1"`) at the fiber `radius`,
/// given as comma-separated rationals `f_k = −log_p r_k`.
/// Output: `{"kind": …, "entries": [[value, multiplicity, capped], …]}`.
///
/// # Safety
/// Pointers must be valid; release `*out` with [`nadir_string_free`].
#[no_mangle]
pub unsafe extern "C" fn nadir_visible_radii_json(
    module: *const NadirModule,
    axis: *const c_char,
    radius: *const c_char,
    out: *mut *mut c_char,
) -> NadirStatus {
    guard(|| {
        let m = unsafe { module.as_ref() }.ok_or(Failure(NadirStatus::NullArgument, "module is null".into()))?;
        let axis: Axis = unsafe { text(axis, "axis") }?.parse()?;
        let r = q_list(unsafe { text(radius, "radius") }?)?;
        let radii = visible_radii(&m.inner, axis, &r)?;
        unsafe { hand_out(out, radii_json(&radii)) }
    })
}

/// CSV profile along geometric variable `var` (0-based) on `[lo, hi]`.
/// `kind` is an axis name or `"intrinsic"`; `frozen` fixes the other radii.
///
/// # Safety
/// Pointers must be valid; release `*out` with [`nadir_string_free`].
#[no_mangle]
pub unsafe extern "C" fn nadir_profile_csv(
    module: *const NadirModule,
    kind: *const c_char,
    var: usize,
    lo: *const c_char,
    hi: *const c_char,
    frozen: *const c_char,
    out: *mut *mut c_char,
) -> NadirStatus {
    guard(|| {
        let m = unsafe { module.as_ref() }.ok_or(Failure(NadirStatus::NullArgument, "module is null".into()))?;
        let kind = match unsafe { text(kind, "kind") }? {
            "intrinsic" => ProfileKind::Intrinsic,
            a => ProfileKind::Derivation(a.parse()?),
        };
        let lo = parse_q(unsafe { text(lo, "lo") }?)?;
        let hi = parse_q(unsafe { text(hi, "hi") }?)?;
        let mut frozen = if frozen.is_null() { Vec::new() } else { q_list(unsafe { text(frozen, "frozen") }?)? };
        frozen.resize(m.inner.config().n_geom, lo.clone());
        let profile = build_radius_profile(&m.inner, kind, var, &lo, &hi, &frozen)?;
        unsafe { hand_out(out, profile.to_csv()) }
    })
}

/// Frobenius transform of an intrinsic multiset given as
/// `{"p": 2, "entries": [["1/2", 1], …]}`.
///
/// # Safety
/// Pointers must be valid; release `*out` with [`nadir_string_free`].
#[no_mangle]
pub unsafe extern "C" fn nadir_frobenius_json(
    multiset: *const c_char,
    op: NadirFrobeniusOp,
    out: *mut *mut c_char,
) -> NadirStatus {
    guard(|| {
        let (p, m) = MultisetJson::parse(unsafe { text(multiset, "multiset") }?)?;
        let res = match op {
            NadirFrobeniusOp::Push => frob_push(&m, p),
            NadirFrobeniusOp::Pull => frob_pull(&m, p),
            NadirFrobeniusOp::Antecedent => frob_antecedent(&m, p),
        }?;
        unsafe { hand_out(out, multiset_json(&res).to_string()) }
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn nadir_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}
