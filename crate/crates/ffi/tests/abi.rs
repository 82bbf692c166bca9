use std::ffi::{CStr, CString};
use std::ptr;

use sbvp_ffi::*;

fn last_error() -> String {
    let p = sbvp_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn solve_analyze_round_trip() {
    let cfg = CString::new(r#"{"n": 256, "base_points": [0.0]}"#).unwrap();
    let mut sol = ptr::null_mut();
    assert_eq!(unsafe { sbvp_solve(cfg.as_ptr(), &mut sol) }, SbvpStatus::Ok);
    let n = unsafe { sbvp_solution_len(sol) };
    assert_eq!(n, 256);

    let mut sites = vec![0.0; 2 * n];
    let mut weights = vec![0.0; n];
    unsafe {
        assert_eq!(sbvp_solution_sites(sol, sites.as_mut_ptr(), sites.len()), SbvpStatus::Ok);
        assert_eq!(sbvp_solution_weights(sol, weights.as_mut_ptr(), weights.len()), SbvpStatus::Ok);
        assert_eq!(sbvp_solution_weights(sol, weights.as_mut_ptr(), n - 1), SbvpStatus::BufferTooSmall);
    }
    assert!(sites.iter().all(|v| v.abs() <= 1.0 + 1e-12));

    // identity transport: the map sends a point near itself
    let (mut value, mut map) = (0.0, [0.0; 2]);
    unsafe {
        assert_eq!(sbvp_solution_eval(sol, 0.3, -0.2, &mut value, map.as_mut_ptr()), SbvpStatus::Ok);
    }
    assert!((map[0] - 0.3).abs() < 0.2 && (map[1] + 0.2).abs() < 0.2);

    let mut rep = ptr::null_mut();
    assert_eq!(unsafe { sbvp_analyze(sol, &mut rep) }, SbvpStatus::Ok);
    let key = CString::new("solver_residual").unwrap();
    let mut r = f64::NAN;
    assert_eq!(unsafe { sbvp_report_summary(rep, key.as_ptr(), &mut r) }, SbvpStatus::Ok);
    assert!(r < 1e-6);
    let missing = CString::new("no_such_metric").unwrap();
    assert_eq!(unsafe { sbvp_report_summary(rep, missing.as_ptr(), &mut r) }, SbvpStatus::NotFound);
    assert!(last_error().contains("no_such_metric"));

    let json = unsafe { sbvp_report_json(rep) };
    assert!(!json.is_null());
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    assert!(text.contains("\"schema_version\""));
    unsafe {
        sbvp_string_free(json);
        sbvp_report_free(rep);
        sbvp_solution_free(sol);
    }
}

#[test]
fn bad_inputs_report_codes() {
    let mut sol = ptr::null_mut();
    assert_eq!(unsafe { sbvp_solve(ptr::null(), &mut sol) }, SbvpStatus::NullPointer);
    let bad = CString::new(r#"{"n": 3}"#).unwrap();
    assert_eq!(unsafe { sbvp_solve(bad.as_ptr(), &mut sol) }, SbvpStatus::InvalidConfig);
    assert!(sol.is_null());
    assert!(last_error().contains("n must be"));
    let junk = CString::new("{not json").unwrap();
    assert_eq!(unsafe { sbvp_solve(junk.as_ptr(), &mut sol) }, SbvpStatus::InvalidConfig);
    assert_eq!(unsafe { sbvp_solution_len(ptr::null()) }, 0);
    unsafe {
        sbvp_solution_free(ptr::null_mut());
        sbvp_report_free(ptr::null_mut());
        sbvp_string_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/sbvp.h")).unwrap();
    for f in [
        "sbvp_last_error",
        "sbvp_version",
        "sbvp_solve",
        "sbvp_solution_free",
        "sbvp_solution_sites",
        "sbvp_solution_eval",
        "sbvp_analyze",
        "sbvp_report_json",
        "sbvp_report_summary",
        "sbvp_report_failure_count",
    ] {
        assert!(header.contains(&format!("{f}(")), "{f} missing from header");
    }
    let v = unsafe { CStr::from_ptr(sbvp_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
