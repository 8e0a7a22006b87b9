//! C ABI over the scenario runner: opaque session handles, status codes, and
//! JSON-in/JSON-out reports. The checked-in header `include/gnatural.h`
//! mirrors this surface (regenerate with `cbindgen --crate gnatural-ffi`).

use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gnatural::scenario::{run_scenario, Scenario};
use gnatural::sextet::sextet_by_name;
use gnatural::GeometryError;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GnatStatus {
    /// Operation ran and its verdict passed.
    Ok = 0,
    /// Operation ran and its verdict failed; a report is still available.
    Failed = 1,
    /// Null pointer, non-UTF-8 input, or missing argument.
    InvalidArgument = 2,
    /// Scenario JSON did not parse.
    ParseError = 3,
    /// The geometry engine rejected the scenario (unknown preset, domain
    /// error, degenerate metric, ...); details via `gnat_last_error`.
    GeometryError = 4,
    /// Internal panic was caught at the boundary.
    Panic = 5,
}

/// Opaque session: owns the last report and the last error message.
pub struct GnatSession {
    report: Option<CString>,
    error: Option<CString>,
}

impl GnatSession {
    fn set_error(&mut self, msg: String) {
        self.error = Some(CString::new(msg.replace('\0', " ")).expect("NUL stripped"));
    }
}

fn classify_error(e: &GeometryError) -> GnatStatus {
    match e {
        GeometryError::Json(_) => GnatStatus::ParseError,
        GeometryError::Scenario(_) => GnatStatus::InvalidArgument,
        _ => GnatStatus::GeometryError,
    }
}

/// Creates a session; release with `gnat_session_free`.
#[no_mangle]
pub extern "C" fn gnat_session_new() -> *mut GnatSession {
    Box::into_raw(Box::new(GnatSession { report: None, error: None }))
}

/// Frees a session created by `gnat_session_new`; a null pointer is a no-op.
///
/// # Safety
/// `session` must be a pointer returned by `gnat_session_new` that has not
/// been freed already.
#[no_mangle]
pub unsafe extern "C" fn gnat_session_free(session: *mut GnatSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// Runs one scenario given as JSON; on `Ok`/`Failed` the report is available
/// through `gnat_last_report_json` until the next run on this session.
///
/// # Safety
/// `session` must be a live session pointer and `scenario_json` a valid
/// NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn gnat_run_scenario_json(
    session: *mut GnatSession,
    scenario_json: *const c_char,
) -> GnatStatus {
    let Some(session) = session.as_mut() else {
        return GnatStatus::InvalidArgument;
    };
    session.report = None;
    session.error = None;
    if scenario_json.is_null() {
        session.set_error("scenario_json is null".into());
        return GnatStatus::InvalidArgument;
    }
    let text = match CStr::from_ptr(scenario_json).to_str() {
        Ok(t) => t,
        Err(_) => {
            session.set_error("scenario_json is not valid UTF-8".into());
            return GnatStatus::InvalidArgument;
        }
    };
    let outcome = catch_unwind(AssertUnwindSafe(|| -> Result<_, GeometryError> {
        let scenario = Scenario::from_json(text)?;
        run_scenario(&scenario)
    }));
    match outcome {
        Ok(Ok(report)) => {
            let pass = report.pass;
            session.report =
                Some(CString::new(report.to_json().replace('\0', " ")).expect("NUL stripped"));
            if pass {
                GnatStatus::Ok
            } else {
                GnatStatus::Failed
            }
        }
        Ok(Err(e)) => {
            let status = classify_error(&e);
            session.set_error(e.to_string());
            status
        }
        Err(_) => {
            session.set_error("internal panic in the geometry engine".into());
            GnatStatus::Panic
        }
    }
}

/// Last report as a JSON string, or null if the last run produced none.
/// The pointer stays valid until the next run on this session or its free.
///
/// # Safety
/// `session` must be a live session pointer.
#[no_mangle]
pub unsafe extern "C" fn gnat_last_report_json(session: *const GnatSession) -> *const c_char {
    match session.as_ref().and_then(|s| s.report.as_ref()) {
        Some(r) => r.as_ptr(),
        None => ptr::null(),
    }
}

/// Last error message, or null when the last call succeeded.
///
/// # Safety
/// `session` must be a live session pointer.
#[no_mangle]
pub unsafe extern "C" fn gnat_last_error(session: *const GnatSession) -> *const c_char {
    match session.as_ref().and_then(|s| s.error.as_ref()) {
        Some(e) => e.as_ptr(),
        None => ptr::null(),
    }
}

/// K-contact scalar condition of a sextet spec at t = 1 for S^(2m+1);
/// writes the residual to `out`.
///
/// # Safety
/// `sextet_spec` must be a valid NUL-terminated string and `out` a valid
/// writable pointer.
#[no_mangle]
pub unsafe extern "C" fn gnat_kcontact_condition(
    sextet_spec: *const c_char,
    m: u32,
    out: *mut f64,
) -> GnatStatus {
    if sextet_spec.is_null() || out.is_null() || m == 0 {
        return GnatStatus::InvalidArgument;
    }
    let Ok(spec) = CStr::from_ptr(sextet_spec).to_str() else {
        return GnatStatus::InvalidArgument;
    };
    let result = catch_unwind(|| -> Result<f64, GeometryError> {
        let f = sextet_by_name(spec)?;
        gnatural::contact::kcontact_condition(&f, m as usize)
    });
    match result {
        Ok(Ok(v)) => {
            *out = v;
            GnatStatus::Ok
        }
        Ok(Err(e)) => classify_error(&e),
        Err(_) => GnatStatus::Panic,
    }
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn gnat_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    fn run(session: *mut GnatSession, json: &str) -> GnatStatus {
        let c = CString::new(json).unwrap();
        unsafe { gnat_run_scenario_json(session, c.as_ptr()) }
    }

    #[test]
    fn session_round_trip() {
        let s = gnat_session_new();
        let status = run(
            s,
            r#"{ "operation": "check-metric", "sextet": "cg", "parameters": { "dim": 3 } }"#,
        );
        assert_eq!(status, GnatStatus::Ok);
        let report = unsafe { CStr::from_ptr(gnat_last_report_json(s)) }.to_str().unwrap();
        assert!(report.contains("\"riemannian\": true"));
        assert!(unsafe { gnat_last_error(s) }.is_null());
        unsafe { gnat_session_free(s) };
    }

    #[test]
    fn failed_verdict_still_produces_a_report() {
        let s = gnat_session_new();
        let status = run(
            s,
            r#"{
                "operation": "tension", "manifold": "sphere:3",
                "sextet": "sasaki", "field": "hopf",
                "parameters": { "samples": 2, "tolerance": 1e-4 }
            }"#,
        );
        assert_eq!(status, GnatStatus::Failed);
        assert!(!unsafe { gnat_last_report_json(s) }.is_null());
        unsafe { gnat_session_free(s) };
    }

    #[test]
    fn error_paths() {
        let s = gnat_session_new();
        assert_eq!(run(s, "{ not json"), GnatStatus::ParseError);
        let err = unsafe { CStr::from_ptr(gnat_last_error(s)) }.to_str().unwrap();
        assert!(err.contains("json"));
        assert!(unsafe { gnat_last_report_json(s) }.is_null());

        assert_eq!(run(s, r#"{ "operation": "tension" }"#), GnatStatus::InvalidArgument);
        assert_eq!(
            run(s, r#"{ "operation": "tension", "manifold": "moebius:2",
                        "sextet": "sasaki", "field": "zero" }"#),
            GnatStatus::GeometryError
        );
        assert_eq!(
            unsafe { gnat_run_scenario_json(s, std::ptr::null()) },
            GnatStatus::InvalidArgument
        );
        assert_eq!(
            unsafe { gnat_run_scenario_json(std::ptr::null_mut(), std::ptr::null()) },
            GnatStatus::InvalidArgument
        );
        unsafe { gnat_session_free(s) };
        unsafe { gnat_session_free(std::ptr::null_mut()) };
    }

    #[test]
    fn kcontact_export() {
        let spec = CString::new("sasaki").unwrap();
        let mut out = 0.0;
        let status = unsafe { gnat_kcontact_condition(spec.as_ptr(), 1, &mut out) };
        assert_eq!(status, GnatStatus::Ok);
        assert!((out - 2.0).abs() < 1e-14);
        let bad = CString::new("nope").unwrap();
        assert_eq!(
            unsafe { gnat_kcontact_condition(bad.as_ptr(), 1, &mut out) },
            GnatStatus::GeometryError
        );
    }

    #[test]
    fn version_is_nul_terminated() {
        let v = unsafe { CStr::from_ptr(gnat_version()) }.to_str().unwrap();
        assert_eq!(v, env!("CARGO_PKG_VERSION"));
    }
}
