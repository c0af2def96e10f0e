//! C ABI for the itinerary solver.
//!
//! Conventions, mirrored by `include/tourplan.h`:
//!
//! - Handles (`TpInstance`, `TpSolution`) are opaque; create them through
//!   the `tp_*` constructors and release them with the matching `tp_*_free`.
//!   Freeing `NULL` is a no-op; accessors on `NULL` return zeros.
//! - Fallible calls return a [`TpStatus`]; on anything but `Ok` the output
//!   pointer is untouched and [`tp_last_error_message`] describes the
//!   failure. The message buffer is thread-local and valid until the next
//!   failing call on the same thread.
//! - Strings returned through out-pointers are NUL-terminated, UTF-8, and
//!   owned by the caller; release them with [`tp_string_free`].
//! - Panics never cross the boundary; they surface as `TpStatus::Internal`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use tourplan::clustering::{build, ClusterParams};
use tourplan::instance::{generate_synthetic, load_instance, GenerateParams, Instance};
use tourplan::report::to_solution_file;
use tourplan::search::{solve, SolveConfig};

/// Result of a fallible API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TpStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was NULL.
    NullPointer = 1,
    /// An argument was malformed (bad UTF-8, senseless number).
    InvalidArgument = 2,
    /// The instance could not be read or failed validation.
    LoadFailed = 3,
    /// An unexpected internal failure; details via `tp_last_error_message`.
    Internal = 4,
}

/// Opaque handle to a loaded problem instance.
pub struct TpInstance {
    inst: Instance,
}

/// Opaque handle to a finished solve. Self-contained: freeing the instance
/// first is allowed.
pub struct TpSolution {
    json: CString,
    total_score: f64,
    violations: u64,
    days: u64,
    visits: u64,
    iterations: u64,
    elapsed_secs: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: TpStatus, message: impl AsRef<str>) -> TpStatus {
    let text = message.as_ref().replace('\0', " ");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(text).unwrap_or_default());
    status
}

/// Message describing the most recent failure on this thread, or an empty
/// string. The pointer stays valid until the next failing call here.
#[no_mangle]
pub extern "C" fn tp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

fn guarded(job: impl FnOnce() -> TpStatus) -> TpStatus {
    match catch_unwind(AssertUnwindSafe(job)) {
        Ok(status) => status,
        Err(payload) => {
            let what = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(TpStatus::Internal, format!("internal error: {what}"))
        }
    }
}

/// Loads an instance from a JSON file.
///
/// # Safety
/// `path` must point to a NUL-terminated string and `out` to writable
/// storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn tp_instance_load(
    path: *const c_char,
    out: *mut *mut TpInstance,
) -> TpStatus {
    if path.is_null() || out.is_null() {
        return fail(TpStatus::NullPointer, "path and out must not be NULL");
    }
    let path = match CStr::from_ptr(path).to_str() {
        Ok(p) => p.to_owned(),
        Err(_) => return fail(TpStatus::InvalidArgument, "path is not valid UTF-8"),
    };
    guarded(|| match load_instance(path.as_ref()) {
        Ok(inst) => {
            out.write(Box::into_raw(Box::new(TpInstance { inst })));
            TpStatus::Ok
        }
        Err(e) => fail(TpStatus::LoadFailed, e.to_string()),
    })
}

/// Generates a seeded synthetic instance (identical seeds give identical
/// instances).
///
/// # Safety
/// `out` must point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn tp_instance_generate(
    n_pois: u64,
    days: u64,
    seed: u64,
    c_max: f64,
    out: *mut *mut TpInstance,
) -> TpStatus {
    if out.is_null() {
        return fail(TpStatus::NullPointer, "out must not be NULL");
    }
    if n_pois == 0 || days == 0 || !c_max.is_finite() || c_max <= 0.0 {
        return fail(
            TpStatus::InvalidArgument,
            "need n_pois >= 1, days >= 1 and a positive finite c_max",
        );
    }
    guarded(|| {
        let file = generate_synthetic(&GenerateParams {
            n_pois: n_pois as usize,
            days: days as usize,
            seed,
            c_max,
            ..GenerateParams::default()
        });
        match file.into_instance() {
            Ok(inst) => {
                out.write(Box::into_raw(Box::new(TpInstance { inst })));
                TpStatus::Ok
            }
            Err(e) => fail(TpStatus::LoadFailed, e.to_string()),
        }
    })
}

/// Number of schedulable PoIs (opening windows), anchors excluded.
///
/// # Safety
/// `inst` must be a live handle from this library or NULL.
#[no_mangle]
pub unsafe extern "C" fn tp_instance_candidate_count(inst: *const TpInstance) -> u64 {
    inst.as_ref().map_or(0, |h| h.inst.n_candidates() as u64)
}

/// Number of daily itineraries the instance plans for.
///
/// # Safety
/// `inst` must be a live handle from this library or NULL.
#[no_mangle]
pub unsafe extern "C" fn tp_instance_day_count(inst: *const TpInstance) -> u64 {
    inst.as_ref().map_or(0, |h| h.inst.days as u64)
}

/// Releases an instance handle.
///
/// # Safety
/// `inst` must be a handle from this library that has not been freed, or
/// NULL.
#[no_mangle]
pub unsafe extern "C" fn tp_instance_free(inst: *mut TpInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Runs the solver.
///
/// `radius_km <= 0` (or non-finite) lifts the candidate radius limit;
/// `use_clustering != 0` groups candidates by walkability and keeps each
/// day's visits cluster-contiguous.
///
/// # Safety
/// `inst` must be a live handle and `out` writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn tp_solve(
    inst: *const TpInstance,
    max_iter: u64,
    time_limit_secs: f64,
    radius_km: f64,
    use_clustering: i32,
    out: *mut *mut TpSolution,
) -> TpStatus {
    let Some(handle) = inst.as_ref() else {
        return fail(TpStatus::NullPointer, "inst must not be NULL");
    };
    if out.is_null() {
        return fail(TpStatus::NullPointer, "out must not be NULL");
    }
    if !time_limit_secs.is_finite() || time_limit_secs <= 0.0 {
        return fail(
            TpStatus::InvalidArgument,
            "time_limit_secs must be positive and finite",
        );
    }
    guarded(|| {
        let inst = &handle.inst;
        let radius = (radius_km.is_finite() && radius_km > 0.0).then_some(radius_km);
        let clusters =
            (use_clustering != 0).then(|| build(inst, radius, &ClusterParams::for_instance(inst)));
        let outcome = solve(
            inst,
            &SolveConfig {
                max_iter: max_iter as usize,
                time_limit_secs,
                radius_km: radius,
                clusters,
            },
        );
        let file = to_solution_file(inst, &outcome.solution);
        let json = match serde_json::to_string_pretty(&file) {
            Ok(text) => CString::new(text).expect("JSON never contains NUL"),
            Err(e) => return fail(TpStatus::Internal, e.to_string()),
        };
        let sol = TpSolution {
            json,
            total_score: outcome.solution.total_score,
            violations: outcome.solution.violations() as u64,
            days: outcome.solution.itineraries.len() as u64,
            visits: outcome
                .solution
                .itineraries
                .iter()
                .map(|it| it.candidate_count() as u64)
                .sum(),
            iterations: outcome.iterations as u64,
            elapsed_secs: outcome.elapsed_secs,
        };
        out.write(Box::into_raw(Box::new(sol)));
        TpStatus::Ok
    })
}

/// Sum of scores over all scheduled visits.
///
/// # Safety
/// `sol` must be a live handle from this library or NULL.
#[no_mangle]
pub unsafe extern "C" fn tp_solution_total_score(sol: *const TpSolution) -> f64 {
    sol.as_ref().map_or(0.0, |s| s.total_score)
}

/// Number of mobility-preference violations across all days.
///
/// # Safety
/// `sol` must be a live handle from this library or NULL.
#[no_mangle]
pub unsafe extern "C" fn tp_solution_violation_count(sol: *const TpSolution) -> u64 {
    sol.as_ref().map_or(0, |s| s.violations)
}

/// Number of daily itineraries in the solution.
///
/// # Safety
/// `sol` must be a live handle from this library or NULL.
#[no_mangle]
pub unsafe extern "C" fn tp_solution_day_count(sol: *const TpSolution) -> u64 {
    sol.as_ref().map_or(0, |s| s.days)
}

/// Number of scheduled PoI visits across all days.
///
/// # Safety
/// `sol` must be a live handle from this library or NULL.
#[no_mangle]
pub unsafe extern "C" fn tp_solution_visit_count(sol: *const TpSolution) -> u64 {
    sol.as_ref().map_or(0, |s| s.visits)
}

/// Search iterations the solver ran.
///
/// # Safety
/// `sol` must be a live handle from this library or NULL.
#[no_mangle]
pub unsafe extern "C" fn tp_solution_iterations(sol: *const TpSolution) -> u64 {
    sol.as_ref().map_or(0, |s| s.iterations)
}

/// Wall-clock seconds the solve took.
///
/// # Safety
/// `sol` must be a live handle from this library or NULL.
#[no_mangle]
pub unsafe extern "C" fn tp_solution_elapsed_secs(sol: *const TpSolution) -> f64 {
    sol.as_ref().map_or(0.0, |s| s.elapsed_secs)
}

/// Copies the solution as pretty-printed JSON into a fresh NUL-terminated
/// string owned by the caller (release with [`tp_string_free`]).
///
/// # Safety
/// `sol` must be a live handle and `out` writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn tp_solution_to_json(
    sol: *const TpSolution,
    out: *mut *mut c_char,
) -> TpStatus {
    let Some(sol) = sol.as_ref() else {
        return fail(TpStatus::NullPointer, "sol must not be NULL");
    };
    if out.is_null() {
        return fail(TpStatus::NullPointer, "out must not be NULL");
    }
    out.write(sol.json.clone().into_raw());
    TpStatus::Ok
}

/// Releases a string returned by this library.
///
/// # Safety
/// `text` must come from this library and not have been freed, or be NULL.
#[no_mangle]
pub unsafe extern "C" fn tp_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(CString::from_raw(text));
    }
}

/// Releases a solution handle.
///
/// # Safety
/// `sol` must be a handle from this library that has not been freed, or
/// NULL.
#[no_mangle]
pub unsafe extern "C" fn tp_solution_free(sol: *mut TpSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}
