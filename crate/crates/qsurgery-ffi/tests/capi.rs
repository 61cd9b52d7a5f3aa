use std::ffi::{CStr, CString};
use std::ptr;

use qsurgery_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = qs_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn version_matches_the_package() {
    let v = unsafe { CStr::from_ptr(qs_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn fixture_parameters_and_distance() {
    let mut code = ptr::null_mut();
    unsafe {
        assert_eq!(qs_code_fixture(c("steane").as_ptr(), &mut code), QsStatus::Ok);
        let (mut n, mut k, mut d) = (0, 0, 0);
        assert_eq!(qs_code_params(code, &mut n, &mut k), QsStatus::Ok);
        assert_eq!((n, k), (7, 1));
        assert_eq!(qs_code_distance(code, 12, &mut d), QsStatus::Ok);
        assert_eq!(d, 3);
        qs_code_free(code);
    }
    assert!(qs_last_error_message().is_null());
}

#[test]
fn parsed_code_and_merge() {
    let mut code = ptr::null_mut();
    unsafe {
        assert_eq!(qs_code_parse(c("4\nXXXX\nZZZZ\n").as_ptr(), &mut code), QsStatus::Ok);
        let (mut total, mut k) = (0, 0);
        assert_eq!(qs_code_merge(code, c("XXII").as_ptr(), 7, &mut total, &mut k), QsStatus::Ok);
        assert!(total > 4);
        assert_eq!(k, 1);
        assert_eq!(qs_code_merge(code, c("XX").as_ptr(), 7, &mut total, &mut k), QsStatus::InvalidInput);
        assert!(last_error().contains("qubits"));
        qs_code_free(code);
    }
}

#[test]
fn bad_inputs_map_to_status_codes() {
    let mut code = ptr::null_mut();
    unsafe {
        assert_eq!(qs_code_parse(c("4\nXXXX\nZZQZ\n").as_ptr(), &mut code), QsStatus::InvalidInput);
        assert!(code.is_null());
        assert_eq!(qs_code_parse(c("2\nXI\nZI\n").as_ptr(), &mut code), QsStatus::InvalidInput);
        assert_eq!(qs_code_fixture(c("nope").as_ptr(), &mut code), QsStatus::InvalidInput);
        assert!(last_error().contains("nope"));
        assert_eq!(qs_code_parse(ptr::null(), &mut code), QsStatus::NullPointer);
        assert_eq!(qs_code_fixture(c("steane").as_ptr(), ptr::null_mut()), QsStatus::NullPointer);
        let (mut n, mut k) = (0, 0);
        assert_eq!(qs_code_params(ptr::null(), &mut n, &mut k), QsStatus::NullPointer);
        qs_code_free(ptr::null_mut());
        qs_compilation_free(ptr::null_mut());
        qs_string_free(ptr::null_mut());
    }
}

#[test]
fn distance_cap_is_reported() {
    let mut code = ptr::null_mut();
    unsafe {
        assert_eq!(qs_code_fixture(c("surface3").as_ptr(), &mut code), QsStatus::Ok);
        let mut d = 0;
        assert_eq!(qs_code_distance(code, 4, &mut d), QsStatus::CapExceeded);
        qs_code_free(code);
    }
}

const PAIRS: &str = r#"{"k": 3, "blocks": [[0, 1], [2, 3]]}"#;
const LINE2: &str = r#"{"blocks": 2, "edges": [[0, 1]]}"#;

#[test]
fn compile_inspect_and_verify() {
    let mut comp = ptr::null_mut();
    unsafe {
        let circ = c("qubits 4\nH 0\nT 0\nCNOT 0 2\nT 2\n");
        assert_eq!(qs_compile(circ.as_ptr(), c(PAIRS).as_ptr(), c(LINE2).as_ptr(), &mut comp), QsStatus::Ok);
        let (mut depth, mut lambda, mut magic) = (0, 0, 0);
        assert_eq!(qs_compilation_stats(comp, &mut depth, &mut lambda, &mut magic), QsStatus::Ok);
        assert_eq!(magic, 2);
        assert!(depth < 4 * 3 * lambda + 3);
        let mut json = ptr::null_mut();
        assert_eq!(qs_compilation_schedule_json(comp, &mut json), QsStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(CStr::from_ptr(json).to_str().unwrap()).unwrap();
        assert_eq!(v["depth"].as_u64(), Some(depth as u64));
        qs_string_free(json);
        let mut ok = 0u8;
        assert_eq!(qs_compilation_verify(comp, 12, 1, &mut ok), QsStatus::Ok);
        assert_eq!(ok, 1);
        assert_eq!(qs_compilation_verify(comp, 2, 1, &mut ok), QsStatus::CapExceeded);
        qs_compilation_free(comp);
    }
}

#[test]
fn incompatible_circuit_is_rejected() {
    let mut comp = ptr::null_mut();
    let triples = r#"{"k": 3, "blocks": [[0, 1], [2, 3], [4, 5]]}"#;
    let line3 = r#"{"blocks": 3, "edges": [[0, 1], [1, 2]]}"#;
    unsafe {
        let circ = c("qubits 6\nH 0\nCNOT 0 4\n");
        assert_eq!(qs_compile(circ.as_ptr(), c(triples).as_ptr(), c(line3).as_ptr(), &mut comp), QsStatus::InvalidInput);
        assert!(comp.is_null());
        assert!(!last_error().is_empty());
    }
}

#[test]
fn header_declares_every_entry_point() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/qsurgery.h")).unwrap();
    for name in [
        "qs_version",
        "qs_last_error_message",
        "qs_string_free",
        "qs_code_parse",
        "qs_code_fixture",
        "qs_code_free",
        "qs_code_params",
        "qs_code_distance",
        "qs_code_merge",
        "qs_compile",
        "qs_compilation_free",
        "qs_compilation_stats",
        "qs_compilation_schedule_json",
        "qs_compilation_verify",
        "QS_STATUS_CAP_EXCEEDED",
    ] {
        assert!(h.contains(name), "{name} missing from header");
    }
}
