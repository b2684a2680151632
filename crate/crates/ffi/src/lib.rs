//! C ABI over `nrp-core`.
//!
//! Handles are opaque and owned by the caller until passed to the matching
//! `*_free`. Every function returns an [`NrpStatus`]; on failure the message is
//! available from [`nrp_last_error`] on the same thread. Strings returned
//! through out-parameters must be released with [`nrp_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nrp_core::cli::parse_bound;
use nrp_core::indicators::{analyze, parse_indicators};
use nrp_core::io::{load_document, parse_document, FrontDocument, ProblemDocument};
use nrp_core::model::ObjectiveSpec;
use nrp_core::run::run;
use nrp_core::solvers::{Algorithm, SolverParams};
use nrp_core::{AttributeKey, Error};
use serde_json::Value;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NrpStatus {
    Ok = 0,
    /// A null pointer, bad UTF-8 or malformed options.
    InvalidArgument = 1,
    /// The problem text is not a well-formed document.
    Parse = 2,
    /// The catalog failed validation.
    InvalidCatalog = 3,
    /// Objectives, bounds, indicators or solver settings are unusable.
    Config = 4,
    /// Mandatory requirements, combinations or implications admit no release.
    Infeasible = 5,
    Io = 6,
    /// A Rust panic was caught at the boundary.
    Internal = 7,
}

/// A loaded problem document.
pub struct NrpProblem {
    doc: ProblemDocument,
}

/// A solved Pareto front with the context needed to analyze it.
pub struct NrpFront {
    doc: FrontDocument,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> NrpStatus {
    match e {
        Error::Parse { .. } | Error::Schema { .. } => NrpStatus::Parse,
        Error::InvalidCatalog(_) => NrpStatus::InvalidCatalog,
        Error::MandatoryInfeasible { .. } | Error::Contradiction { .. } | Error::ImplicationCycle(_) => {
            NrpStatus::Infeasible
        }
        Error::Io(_) | Error::Csv(_) => NrpStatus::Io,
        _ => NrpStatus::Config,
    }
}

struct Failure(NrpStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure(NrpStatus::InvalidArgument, message.into())
}

/// Runs `f` behind a panic guard and records any failure for `nrp_last_error`.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> NrpStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NrpStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal error: panic in nrp-core".into());
            NrpStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(invalid(format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("{what} is not UTF-8")))
}

unsafe fn optional_text<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        text(p, what).map(Some)
    }
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(invalid("output pointer is null"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(invalid("output pointer is null"));
    }
    *out = CString::new(s).map_err(|_| invalid("output contains NUL"))?.into_raw();
    Ok(())
}

fn problem_from(doc: ProblemDocument) -> Result<NrpProblem, Failure> {
    if !doc.diagnostics.is_empty() {
        return Err(Error::InvalidCatalog(doc.diagnostics).into());
    }
    Ok(NrpProblem { doc })
}

/// Parses a problem document from NUL-terminated JSON.
///
/// # Safety
/// `json` must be a valid C string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn nrp_problem_parse(json: *const c_char, out: *mut *mut NrpProblem) -> NrpStatus {
    guard(|| {
        let json = text(json, "json")?;
        put(out, problem_from(parse_document(json)?)?)
    })
}

/// Loads a problem document from a file.
///
/// # Safety
/// `path` must be a valid C string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn nrp_problem_load(path: *const c_char, out: *mut *mut NrpProblem) -> NrpStatus {
    guard(|| {
        let path = text(path, "path")?;
        put(out, problem_from(load_document(path)?)?)
    })
}

/// Number of requirements in the catalog, before preprocessing.
///
/// # Safety
/// `problem` must come from `nrp_problem_parse` or `nrp_problem_load`.
#[no_mangle]
pub unsafe extern "C" fn nrp_problem_len(problem: *const NrpProblem, out: *mut usize) -> NrpStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(|| invalid("problem is null"))?;
        if out.is_null() {
            return Err(invalid("output pointer is null"));
        }
        *out = p.doc.catalog.requirements.len();
        Ok(())
    })
}

/// # Safety
/// `problem` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nrp_problem_free(problem: *mut NrpProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

fn strings(v: &Value, what: &str) -> Result<Vec<String>, Failure> {
    match v {
        Value::Null => Ok(Vec::new()),
        Value::Array(items) => items
            .iter()
            .map(|i| i.as_str().map(str::to_string).ok_or_else(|| invalid(format!("{what} must hold strings"))))
            .collect(),
        _ => Err(invalid(format!("{what} must be an array"))),
    }
}

/// Options object accepted by `nrp_solve`; every key is optional:
/// `algorithm`, `seed`, `restarts`, `max_iters`, `cap`, `greedy_seeded`,
/// `maximize`, `minimize` (attribute lists) and `bounds` (strings such as
/// `"effort<=14"` or `"effort<=21%"`).
fn solve_options(doc: &ProblemDocument, options: Option<&str>) -> Result<(nrp_core::ProblemConfig, Algorithm, SolverParams), Failure> {
    let v: Value = match options {
        None => Value::Object(Default::default()),
        Some(s) => serde_json::from_str(s).map_err(|e| invalid(format!("options: {e}")))?,
    };
    if !v.is_object() {
        return Err(invalid("options must be a JSON object"));
    }
    let mut config = doc.config.clone().unwrap_or_default();
    let (maximize, minimize) = (strings(&v["maximize"], "maximize")?, strings(&v["minimize"], "minimize")?);
    if !maximize.is_empty() || !minimize.is_empty() {
        config.objectives = maximize
            .iter()
            .map(|a| ObjectiveSpec::maximize(a))
            .chain(minimize.iter().map(|a| ObjectiveSpec::minimize(a)))
            .collect();
    }
    let bounds = strings(&v["bounds"], "bounds")?;
    if !bounds.is_empty() {
        config.bounds = bounds.iter().map(|b| parse_bound(b).map_err(invalid)).collect::<Result<_, _>>()?;
    }
    let algorithm = match v["algorithm"].as_str() {
        None => Algorithm::Exhaustive,
        Some(a) => a.parse().map_err(invalid)?,
    };
    let uint = |key: &str| -> Result<Option<u64>, Failure> {
        match &v[key] {
            Value::Null => Ok(None),
            x => x.as_u64().map(Some).ok_or_else(|| invalid(format!("{key} must be a non-negative integer"))),
        }
    };
    let mut params = SolverParams::default();
    if let Some(seed) = uint("seed")? {
        params.hillclimb.seed = seed;
    }
    if let Some(r) = uint("restarts")? {
        params.hillclimb.restarts = r as usize;
    }
    if let Some(m) = uint("max_iters")? {
        params.hillclimb.max_iters = m as usize;
    }
    if let Some(c) = uint("cap")? {
        params.exhaustive_cap = c as usize;
    }
    if let Some(s) = v["greedy_seeded"].as_bool() {
        params.greedy.seeded = s;
    }
    Ok((config, algorithm, params))
}

/// Preprocesses and solves `problem`. `options_json` may be null.
///
/// # Safety
/// `problem` must be a live handle, `options_json` null or a valid C string,
/// and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn nrp_solve(
    problem: *const NrpProblem,
    options_json: *const c_char,
    out: *mut *mut NrpFront,
) -> NrpStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(|| invalid("problem is null"))?;
        let options = optional_text(options_json, "options")?;
        let (config, algorithm, params) = solve_options(&p.doc, options)?;
        let doc = run(&p.doc.catalog, &config, algorithm, &params)?;
        put(out, NrpFront { doc })
    })
}

/// Number of solutions on the front.
///
/// # Safety
/// `front` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nrp_front_len(front: *const NrpFront, out: *mut usize) -> NrpStatus {
    guard(|| {
        let f = front.as_ref().ok_or_else(|| invalid("front is null"))?;
        if out.is_null() {
            return Err(invalid("output pointer is null"));
        }
        *out = f.doc.solutions.len();
        Ok(())
    })
}

/// The front as the JSON document `nrp solve` writes.
///
/// # Safety
/// `front` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nrp_front_to_json(front: *const NrpFront, out: *mut *mut c_char) -> NrpStatus {
    guard(|| {
        let f = front.as_ref().ok_or_else(|| invalid("front is null"))?;
        put_string(out, f.doc.to_json()?)
    })
}

/// Handpicks the `k` solutions nearest the bound and scores them, returning
/// the report as JSON. `indicators` is a comma-separated list, or null for the
/// defaults; `attribute` is null for the first upper-bounded attribute.
///
/// # Safety
/// `front` must be a live handle, the strings null or valid C strings, and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nrp_front_analyze(
    front: *const NrpFront,
    k: usize,
    indicators: *const c_char,
    attribute: *const c_char,
    out: *mut *mut c_char,
) -> NrpStatus {
    guard(|| {
        let f = front.as_ref().ok_or_else(|| invalid("front is null"))?;
        if k == 0 {
            return Err(Failure(NrpStatus::Config, "k must be at least 1".into()));
        }
        let ctx = f.doc.context();
        let list = match optional_text(indicators, "indicators")? {
            None => ctx.default_indicators(),
            Some(s) => parse_indicators(s)?,
        };
        let attribute = optional_text(attribute, "attribute")?.map(AttributeKey::parse);
        let report = analyze(&f.doc.front(), &ctx, k, &list, attribute.as_ref())?;
        put_string(out, serde_json::to_string(&report).map_err(|e| invalid(e.to_string()))?)
    })
}

/// # Safety
/// `front` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nrp_front_free(front: *mut NrpFront) {
    if !front.is_null() {
        drop(Box::from_raw(front));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nrp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn nrp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version, statically allocated.
#[no_mangle]
pub extern "C" fn nrp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
