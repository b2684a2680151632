use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::ptr;

use nrp_ffi::*;
use serde_json::Value;

fn concise_path() -> CString {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/datasets/concise.json");
    CString::new(p.display().to_string()).unwrap()
}

fn last_error() -> String {
    let p = nrp_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn take(s: *mut c_char) -> String {
    let out = CStr::from_ptr(s).to_string_lossy().into_owned();
    nrp_string_free(s);
    out
}

fn load() -> *mut NrpProblem {
    let mut problem = ptr::null_mut();
    let path = concise_path();
    assert_eq!(unsafe { nrp_problem_load(path.as_ptr(), &mut problem) }, NrpStatus::Ok);
    problem
}

unsafe fn solve(problem: *const NrpProblem, options: Option<&str>) -> (NrpStatus, *mut NrpFront) {
    let options = options.map(|o| CString::new(o).unwrap());
    let mut front = ptr::null_mut();
    let status = nrp_solve(problem, options.as_ref().map_or(ptr::null(), |o| o.as_ptr()), &mut front);
    (status, front)
}

#[test]
fn solves_with_the_file_configuration() {
    let problem = load();
    let mut n = 0;
    unsafe {
        assert_eq!(nrp_problem_len(problem, &mut n), NrpStatus::Ok);
        assert_eq!(n, 11);
        let (status, front) = solve(problem, None);
        assert_eq!(status, NrpStatus::Ok);
        assert_eq!(nrp_front_len(front, &mut n), NrpStatus::Ok);
        assert_eq!(n, 15);
        nrp_front_free(front);
        nrp_problem_free(problem);
    }
}

#[test]
fn options_override_objectives_and_round_trip_as_json() {
    let problem = load();
    unsafe {
        let (status, front) =
            solve(problem, Some(r#"{"maximize":["value","n_req"],"minimize":["effort","risk"]}"#));
        assert_eq!(status, NrpStatus::Ok, "{}", last_error());
        let mut json = ptr::null_mut();
        assert_eq!(nrp_front_to_json(front, &mut json), NrpStatus::Ok);
        let doc: Value = serde_json::from_str(&take(json)).unwrap();
        assert_eq!(doc["solutions"].as_array().unwrap().len(), 17);

        let indicators = CString::new("productivity,stcov").unwrap();
        let mut report = ptr::null_mut();
        assert_eq!(nrp_front_analyze(front, 5, indicators.as_ptr(), ptr::null(), &mut report), NrpStatus::Ok);
        let report: Value = serde_json::from_str(&take(report)).unwrap();
        assert_eq!(report["rows"].as_array().unwrap().len(), 5);
        assert!(report["columns"].as_array().unwrap().iter().any(|c| c["name"] == "stcov:client1"));

        let mut none = ptr::null_mut();
        assert_eq!(nrp_front_analyze(front, 0, ptr::null(), ptr::null(), &mut none), NrpStatus::Config);
        nrp_front_free(front);
        nrp_problem_free(problem);
    }
}

#[test]
fn hill_climb_is_reproducible_through_the_boundary() {
    let problem = load();
    let opts = r#"{"algorithm":"hillclimb","seed":7,"restarts":4,"max_iters":100}"#;
    let dump = |front: *mut NrpFront| unsafe {
        let mut json = ptr::null_mut();
        assert_eq!(nrp_front_to_json(front, &mut json), NrpStatus::Ok);
        nrp_front_free(front);
        take(json)
    };
    unsafe {
        let (s1, a) = solve(problem, Some(opts));
        let (s2, b) = solve(problem, Some(opts));
        assert_eq!((s1, s2), (NrpStatus::Ok, NrpStatus::Ok));
        assert_eq!(dump(a), dump(b));
        nrp_problem_free(problem);
    }
}

#[test]
fn failures_carry_codes_and_messages() {
    let mut problem = ptr::null_mut();
    unsafe {
        assert_eq!(nrp_problem_parse(ptr::null(), &mut problem), NrpStatus::InvalidArgument);
        assert!(last_error().contains("null"));

        let broken = CString::new("{\n  \"requirements\": [,]\n}").unwrap();
        assert_eq!(nrp_problem_parse(broken.as_ptr(), &mut problem), NrpStatus::Parse);
        assert!(last_error().contains("line 2"), "{}", last_error());

        let dangling = CString::new(
            r#"{"name":"d","requirements":[{"id":"a","attributes":{"effort":1}}],"interactions":{"implies":[["a","ghost"]]}}"#,
        )
        .unwrap();
        assert_eq!(nrp_problem_parse(dangling.as_ptr(), &mut problem), NrpStatus::InvalidCatalog);
        assert!(last_error().contains("ghost"));

        let missing = CString::new("/no/such/problem.json").unwrap();
        assert_eq!(nrp_problem_load(missing.as_ptr(), &mut problem), NrpStatus::Io);

        let problem = load();
        assert!(nrp_last_error().is_null());
        let (status, _) = solve(problem, Some(r#"{"bounds":["effort<=3"]}"#));
        assert_eq!(status, NrpStatus::Infeasible);
        assert!(last_error().contains("effort"));
        let (status, _) = solve(problem, Some(r#"{"maximize":["speed"],"minimize":["effort"]}"#));
        assert_eq!(status, NrpStatus::Config);
        let (status, _) = solve(problem, Some(r#"{"algorithm":"annealing"}"#));
        assert_eq!(status, NrpStatus::InvalidArgument);
        let (status, _) = solve(problem, Some("[1]"));
        assert_eq!(status, NrpStatus::InvalidArgument);
        let (status, _) = solve(problem, Some(r#"{"seed":-1}"#));
        assert_eq!(status, NrpStatus::InvalidArgument);
        nrp_problem_free(problem);
    }
}

#[test]
fn free_functions_accept_null() {
    unsafe {
        nrp_problem_free(ptr::null_mut());
        nrp_front_free(ptr::null_mut());
        nrp_string_free(ptr::null_mut());
    }
    let v = unsafe { CStr::from_ptr(nrp_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/nrp.h")).unwrap();
    for name in [
        "nrp_problem_parse",
        "nrp_problem_load",
        "nrp_problem_len",
        "nrp_problem_free",
        "nrp_solve",
        "nrp_front_len",
        "nrp_front_to_json",
        "nrp_front_analyze",
        "nrp_front_free",
        "nrp_string_free",
        "nrp_last_error",
        "nrp_version",
        "NRP_STATUS_INFEASIBLE",
        "typedef struct NrpProblem NrpProblem",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
