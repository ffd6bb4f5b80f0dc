//! C ABI over the incompat library. Handles are opaque pointers, inputs and
//! outputs are JSON strings, and every call stores its failure message in a
//! thread-local slot readable through `incompat_last_error`.
//!
//! Conventions: constructors return null on failure; integer-returning calls
//! use negative codes for errors and small non-negative codes for results
//! (`incompat_check` returns the verdict 0/1/2). Strings returned through out
//! parameters must be released with `incompat_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use incompat::channels::Channel;
use incompat::classify::classify_channel;
use incompat::compat::{joint_measurability, white_noise_robustness, SolverOptions, Verdict};
use incompat::observables::{depolarize, Observable};

pub const INCOMPAT_OK: i32 = 0;
pub const INCOMPAT_ERR_NULL_ARG: i32 = -1;
pub const INCOMPAT_ERR_UTF8: i32 = -2;
pub const INCOMPAT_ERR_JSON: i32 = -3;
pub const INCOMPAT_ERR_DOMAIN: i32 = -4;
pub const INCOMPAT_ERR_PANIC: i32 = -5;

/// Opaque set of observables sharing one dimension.
pub struct IncompatSet {
    observables: Vec<Observable>,
}

/// Opaque unital channel.
pub struct IncompatChannel {
    channel: Channel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let message = message.into().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(message).ok();
    });
}

fn clear_error() {
    LAST_ERROR.with(|slot| slot.borrow_mut().take());
}

/// Message from the most recent failing call on this thread, or null. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn incompat_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(ptr::null(), |msg| msg.as_ptr())
    })
}

fn guarded<T>(fallback: T, body: impl FnOnce() -> T) -> T {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(value) => value,
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic across the C boundary".into());
            set_error(format!("internal panic: {message}"));
            fallback
        }
    }
}

/// Reads a C string as UTF-8, recording an error on failure.
///
/// # Safety
/// `raw` must be null or a valid NUL-terminated string.
unsafe fn read_str<'a>(raw: *const c_char, what: &str) -> Result<&'a str, i32> {
    if raw.is_null() {
        set_error(format!("{what} is null"));
        return Err(INCOMPAT_ERR_NULL_ARG);
    }
    CStr::from_ptr(raw).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        INCOMPAT_ERR_UTF8
    })
}

fn options(tol: f64) -> Result<SolverOptions, i32> {
    let opts = SolverOptions {
        tol,
        infeas_tol: (tol * 100.0).max(1e-5),
        ..SolverOptions::default()
    };
    opts.check().map_err(|e| {
        set_error(e.to_string());
        INCOMPAT_ERR_DOMAIN
    })?;
    Ok(opts)
}

fn emit_json<T: serde::Serialize>(value: &T, out: *mut *mut c_char) -> i32 {
    let text = match serde_json::to_string_pretty(value) {
        Ok(text) => text,
        Err(e) => {
            set_error(e.to_string());
            return INCOMPAT_ERR_JSON;
        }
    };
    match CString::new(text) {
        Ok(cstring) => {
            unsafe { *out = cstring.into_raw() };
            INCOMPAT_OK
        }
        Err(e) => {
            set_error(e.to_string());
            INCOMPAT_ERR_JSON
        }
    }
}

/// Builds an observable set from a JSON array of observables.
/// Returns null on failure; see `incompat_last_error`.
///
/// # Safety
/// `json` must be null or a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn incompat_set_from_json(json: *const c_char) -> *mut IncompatSet {
    guarded(ptr::null_mut(), || {
        let text = match read_str(json, "observable set JSON") {
            Ok(text) => text,
            Err(_) => return ptr::null_mut(),
        };
        let observables: Vec<Observable> = match serde_json::from_str(text) {
            Ok(parsed) => parsed,
            Err(e) => {
                set_error(format!("observable set JSON: {e}"));
                return ptr::null_mut();
            }
        };
        if observables.is_empty() {
            set_error("observable set is empty");
            return ptr::null_mut();
        }
        let dim = observables[0].dim();
        if observables.iter().any(|o| o.dim() != dim) {
            set_error("observables have mixed dimensions");
            return ptr::null_mut();
        }
        clear_error();
        Box::into_raw(Box::new(IncompatSet { observables }))
    })
}

/// Releases a set. Null is ignored.
///
/// # Safety
/// `set` must be null or a pointer from `incompat_set_from_json`, not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn incompat_set_free(set: *mut IncompatSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Number of observables in the set; 0 for null.
///
/// # Safety
/// `set` must be null or a live set pointer.
#[no_mangle]
pub unsafe extern "C" fn incompat_set_len(set: *const IncompatSet) -> usize {
    if set.is_null() {
        return 0;
    }
    (*set).observables.len()
}

/// Replaces every observable with its white-noise smearing at level `t`.
///
/// # Safety
/// `set` must be a live set pointer.
#[no_mangle]
pub unsafe extern "C" fn incompat_set_depolarize(set: *mut IncompatSet, t: f64) -> i32 {
    guarded(INCOMPAT_ERR_PANIC, || {
        if set.is_null() {
            set_error("set is null");
            return INCOMPAT_ERR_NULL_ARG;
        }
        let set = &mut *set;
        let smeared: Result<Vec<Observable>, _> =
            set.observables.iter().map(|o| depolarize(o, t)).collect();
        match smeared {
            Ok(observables) => {
                set.observables = observables;
                clear_error();
                INCOMPAT_OK
            }
            Err(e) => {
                set_error(e.to_string());
                INCOMPAT_ERR_DOMAIN
            }
        }
    })
}

/// Builds a channel from its JSON description (kraus, choi, white_noise,
/// noisy_mixture, measure_prepare, or compose). Null on failure.
///
/// # Safety
/// `json` must be null or a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn incompat_channel_from_json(json: *const c_char) -> *mut IncompatChannel {
    guarded(ptr::null_mut(), || {
        let text = match read_str(json, "channel JSON") {
            Ok(text) => text,
            Err(_) => return ptr::null_mut(),
        };
        let value: serde_json::Value = match serde_json::from_str(text) {
            Ok(value) => value,
            Err(e) => {
                set_error(format!("channel JSON: {e}"));
                return ptr::null_mut();
            }
        };
        match Channel::from_json_value(&value) {
            Ok(channel) => {
                clear_error();
                Box::into_raw(Box::new(IncompatChannel { channel }))
            }
            Err(e) => {
                set_error(e.to_string());
                ptr::null_mut()
            }
        }
    })
}

/// Releases a channel. Null is ignored.
///
/// # Safety
/// `channel` must be null or a pointer from `incompat_channel_from_json`,
/// not yet freed.
#[no_mangle]
pub unsafe extern "C" fn incompat_channel_free(channel: *mut IncompatChannel) {
    if !channel.is_null() {
        drop(Box::from_raw(channel));
    }
}

/// Hilbert space dimension of the channel; 0 for null.
///
/// # Safety
/// `channel` must be null or a live channel pointer.
#[no_mangle]
pub unsafe extern "C" fn incompat_channel_dim(channel: *const IncompatChannel) -> usize {
    if channel.is_null() {
        return 0;
    }
    (*channel).channel.dim()
}

/// Replaces the set with its image under the channel.
///
/// # Safety
/// `channel` and `set` must be live pointers.
#[no_mangle]
pub unsafe extern "C" fn incompat_channel_apply(
    channel: *const IncompatChannel,
    set: *mut IncompatSet,
) -> i32 {
    guarded(INCOMPAT_ERR_PANIC, || {
        if channel.is_null() || set.is_null() {
            set_error("channel or set is null");
            return INCOMPAT_ERR_NULL_ARG;
        }
        let channel = &(*channel).channel;
        let set = &mut *set;
        let image: Result<Vec<Observable>, _> = set
            .observables
            .iter()
            .map(|o| channel.apply_observable(o))
            .collect();
        match image {
            Ok(observables) => {
                set.observables = observables;
                clear_error();
                INCOMPAT_OK
            }
            Err(e) => {
                set_error(e.to_string());
                INCOMPAT_ERR_DOMAIN
            }
        }
    })
}

/// Tests joint measurability. Returns 0 compatible, 1 incompatible,
/// 2 undecided, or a negative error code. When `result_json` is non-null it
/// receives the full result document.
///
/// # Safety
/// `set` must be a live set pointer; `result_json` null or writable.
#[no_mangle]
pub unsafe extern "C" fn incompat_check(
    set: *const IncompatSet,
    tol: f64,
    result_json: *mut *mut c_char,
) -> i32 {
    guarded(INCOMPAT_ERR_PANIC, || {
        if set.is_null() {
            set_error("set is null");
            return INCOMPAT_ERR_NULL_ARG;
        }
        let opts = match options(tol) {
            Ok(opts) => opts,
            Err(code) => return code,
        };
        match joint_measurability(&(*set).observables, &opts) {
            Ok(result) => {
                if !result_json.is_null() {
                    let code = emit_json(&result, result_json);
                    if code != INCOMPAT_OK {
                        return code;
                    }
                }
                clear_error();
                match result.verdict {
                    Verdict::Compatible => 0,
                    Verdict::Incompatible => 1,
                    Verdict::Undecided => 2,
                }
            }
            Err(e) => {
                set_error(e.to_string());
                INCOMPAT_ERR_DOMAIN
            }
        }
    })
}

/// Locates the white-noise robustness threshold. On success writes the
/// result document to `result_json` (mandatory here) and returns 0.
///
/// # Safety
/// `set` must be a live set pointer; `result_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn incompat_robustness(
    set: *const IncompatSet,
    tol: f64,
    resolution: f64,
    result_json: *mut *mut c_char,
) -> i32 {
    guarded(INCOMPAT_ERR_PANIC, || {
        if set.is_null() || result_json.is_null() {
            set_error("set or result pointer is null");
            return INCOMPAT_ERR_NULL_ARG;
        }
        let opts = match options(tol) {
            Ok(opts) => opts,
            Err(code) => return code,
        };
        match white_noise_robustness(&(*set).observables, &opts, resolution) {
            Ok(result) => {
                let code = emit_json(&result, result_json);
                if code == INCOMPAT_OK {
                    clear_error();
                }
                code
            }
            Err(e) => {
                set_error(e.to_string());
                INCOMPAT_ERR_DOMAIN
            }
        }
    })
}

/// Classifies a channel for n = 2..=max_n. On success writes the report
/// document to `report_json` and returns 0.
///
/// # Safety
/// `channel` must be a live channel pointer; `report_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn incompat_classify(
    channel: *const IncompatChannel,
    max_n: usize,
    tol: f64,
    report_json: *mut *mut c_char,
) -> i32 {
    guarded(INCOMPAT_ERR_PANIC, || {
        if channel.is_null() || report_json.is_null() {
            set_error("channel or report pointer is null");
            return INCOMPAT_ERR_NULL_ARG;
        }
        if max_n < 2 {
            set_error("max_n must be at least 2");
            return INCOMPAT_ERR_DOMAIN;
        }
        let opts = match options(tol) {
            Ok(opts) => opts,
            Err(code) => return code,
        };
        let ns: Vec<usize> = (2..=max_n).collect();
        match classify_channel(&(*channel).channel, &ns, &opts) {
            Ok(report) => {
                let code = emit_json(&report, report_json);
                if code == INCOMPAT_OK {
                    clear_error();
                }
                code
            }
            Err(e) => {
                set_error(e.to_string());
                INCOMPAT_ERR_DOMAIN
            }
        }
    })
}

/// Releases a string returned through an out parameter. Null is ignored.
///
/// # Safety
/// `s` must be null or a string pointer produced by this library, not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn incompat_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn incompat_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
