use std::ffi::{CStr, CString};
use std::ptr;

use nadir_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn take(s: *mut std::ffi::c_char) -> String {
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { nadir_string_free(s) };
    out
}

fn last_error() -> String {
    let e = nadir_last_error();
    assert!(!e.is_null());
    unsafe { CStr::from_ptr(e) }.to_str().unwrap().to_owned()
}

const RANK1: &str = r#"{"rank":1,"p":2,"matrices":{"t1":[[{"terms":[{"c":"1","t":[-2]}]}]]}}"#;

fn module(json: &str) -> (NadirStatus, *mut NadirModule) {
    let mut m = ptr::null_mut();
    let st = unsafe { nadir_module_from_json(c(json).as_ptr(), &mut m) };
    (st, m)
}

#[test]
fn module_lifecycle_and_radii() {
    let (st, m) = module(RANK1);
    assert_eq!(st, NadirStatus::Ok);
    assert!(nadir_last_error().is_null());
    let mut rank = 0usize;
    assert_eq!(unsafe { nadir_module_rank(m, &mut rank) }, NadirStatus::Ok);
    assert_eq!(rank, 1);

    let mut out = ptr::null_mut();
    let st = unsafe { nadir_visible_radii_json(m, c("t1").as_ptr(), c("1").as_ptr(), &mut out) };
    assert_eq!(st, NadirStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    // slope 2 at r = 1 is visible: extrinsic value v(ω) + 2 = 3 for p = 2
    assert_eq!(v["entries"], serde_json::json!([["3", 1, false]]));
    unsafe { nadir_module_free(m) };
}

#[test]
fn profile_csv_matches_cli_shape() {
    let (_, m) = module(RANK1);
    let mut out = ptr::null_mut();
    let st =
        unsafe { nadir_profile_csv(m, c("t1").as_ptr(), 0, c("1/2").as_ptr(), c("2").as_ptr(), ptr::null(), &mut out) };
    assert_eq!(st, NadirStatus::Ok);
    assert_eq!(take(out), "r_left,r_right,slope_1,value_1,capped_1\n1/2,2,2,2,false\n");
    unsafe { nadir_module_free(m) };
}

#[test]
fn frobenius_ops() {
    let ms = c(r#"{"p":2,"entries":[["1/2",1]]}"#);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { nadir_frobenius_json(ms.as_ptr(), NadirFrobeniusOp::Push, &mut out) }, NadirStatus::Ok);
    assert_eq!(take(out), r#"{"entries":[["1",1],["2",1]]}"#);
}

#[test]
fn errors_carry_status_and_message() {
    let (st, m) = module("{\"rank\": 1,");
    assert_eq!(st, NadirStatus::InvalidInput);
    assert!(m.is_null());
    assert!(last_error().contains("json"));

    let mut m = ptr::null_mut();
    assert_eq!(unsafe { nadir_module_from_json(ptr::null(), &mut m) }, NadirStatus::NullArgument);
    assert_eq!(unsafe { nadir_module_rank(ptr::null(), ptr::null_mut()) }, NadirStatus::NullArgument);

    let (_, m) = module(RANK1);
    let mut out = ptr::null_mut();
    let st = unsafe { nadir_visible_radii_json(m, c("t7").as_ptr(), c("1").as_ptr(), &mut out) };
    assert_ne!(st, NadirStatus::Ok);
    assert!(out.is_null());
    assert!(last_error().contains("t7"));
    let st = unsafe { nadir_visible_radii_json(m, c("t1").as_ptr(), c("x").as_ptr(), &mut out) };
    assert_eq!(st, NadirStatus::InvalidInput);
    unsafe { nadir_module_free(m) };
    unsafe { nadir_module_free(ptr::null_mut()) };
}

#[test]
fn errors_are_per_thread() {
    let _ = module("nope");
    assert!(!nadir_last_error().is_null());
    std::thread::spawn(|| assert!(nadir_last_error().is_null())).join().unwrap();
}

#[test]
fn header_declares_the_abi() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/nadir.h")).unwrap();
    for name in [
        "typedef struct NadirModule NadirModule",
        "NADIR_STATUS_INVALID_INPUT = 3",
        "nadir_module_from_json",
        "nadir_module_free",
        "nadir_visible_radii_json",
        "nadir_profile_csv",
        "nadir_frobenius_json",
        "nadir_string_free",
        "nadir_last_error",
    ] {
        assert!(h.contains(name), "{name}");
    }
}
