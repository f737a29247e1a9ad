//! C interface to the ambiguity-lab library.
//!
//! Every fallible function returns an `AL_STATUS_*` code and writes its
//! result through out pointers. Joint tables and hint encoders travel as
//! opaque handles: create one with the matching constructor, release it
//! with the matching `*_free`. Strings returned through `char **` are
//! owned by the caller and must be released with [`al_string_free`].
//!
//! After any non-zero status, [`al_last_error_message`] returns a
//! NUL-terminated description; the pointer stays valid until the next
//! failing call on the same thread.
//!
//! The hand-maintained header `include/ambiguity_lab.h` mirrors these
//! declarations; the `header_matches_exports` test keeps them in sync.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::{c_char, c_int};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ambiguity_lab::guessing::{arikan_bounds, ceiled_min_guess_moment, min_guess_moment};
use ambiguity_lab::oracles::{brute_eve, Budget};
use ambiguity_lab::pmf::{arimoto_conditional_entropy, tilt_order, JointPMF};
use ambiguity_lab::storage::{
    bob_bounds, bob_guess_ambiguity, bob_list_ambiguity, build_guess_encoder,
    build_list_encoder, choose_split, evaluate_scheme, eve_ambiguity_alternating,
    eve_bounds, eve_feasible_pair_ambiguity, pad_secrecy_deviation, EveMode, HintEncoder,
    HintVersion, SplitParams,
};
use ambiguity_lab::Error;

/// The call succeeded.
pub const AL_STATUS_OK: c_int = 0;
/// A required pointer argument was null.
pub const AL_STATUS_NULL_ARGUMENT: c_int = 1;
/// Malformed input: bad JSON, a table that is not a distribution, or I/O.
pub const AL_STATUS_INVALID_INPUT: c_int = 2;
/// Arguments outside the supported domain, including rejected splits.
pub const AL_STATUS_DOMAIN: c_int = 3;
/// An exhaustive search would exceed the configured budget.
pub const AL_STATUS_BUDGET: c_int = 4;
/// An internal invariant failed; please report the last error message.
pub const AL_STATUS_INTERNAL: c_int = 5;

/// Opaque handle over a joint source table.
pub struct AlJoint(JointPMF);

/// Opaque handle over a two-hint encoder.
pub struct AlEncoder(HintEncoder);

/// Plain-data mirror of the split parameters.
///
/// `version` is 0 for the guessing reader and 1 for the list reader;
/// `relabeled` is nonzero when the picker swapped the two hint labels so
/// that the second hint is the smaller one.
#[repr(C)]
#[derive(Clone, Copy)]
pub struct AlSplitParams {
    pub c_s: u64,
    pub c_1: u64,
    pub c_2: u64,
    pub m1_size: u64,
    pub m2_size: u64,
    pub version: c_int,
    pub relabeled: c_int,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> =
        RefCell::new(CString::new("no error recorded").expect("static message"));
}

fn set_error(message: &str) {
    let clean = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(clean).unwrap_or_else(|_| {
            CString::new("error message unavailable").expect("static message")
        });
    });
}

fn status_of(e: &Error) -> c_int {
    match e {
        Error::Config(_) | Error::Distribution(_) | Error::Io(_) | Error::Json(_) => {
            AL_STATUS_INVALID_INPUT
        }
        Error::Param(_) | Error::SplitRejected(_) => AL_STATUS_DOMAIN,
        Error::Budget { .. } | Error::TimeBudget { .. } => AL_STATUS_BUDGET,
    }
}

fn fail(e: Error) -> c_int {
    set_error(&e.to_string());
    status_of(&e)
}

fn null_argument(name: &str) -> c_int {
    set_error(&format!("{} must not be null", name));
    AL_STATUS_NULL_ARGUMENT
}

/// Keep panics from crossing the C boundary.
fn guarded<F: FnOnce() -> c_int>(body: F) -> c_int {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(code) => code,
        Err(_) => {
            set_error("internal panic");
            AL_STATUS_INTERNAL
        }
    }
}

fn split_from_c(p: &AlSplitParams) -> Result<SplitParams, c_int> {
    let version = match p.version {
        0 => HintVersion::Guessing,
        1 => HintVersion::List,
        other => {
            set_error(&format!("version must be 0 or 1, got {}", other));
            return Err(AL_STATUS_DOMAIN);
        }
    };
    let mut split = SplitParams::new(p.c_s, p.c_1, p.c_2, p.m1_size, p.m2_size, version);
    split.relabeled = p.relabeled != 0;
    Ok(split)
}

fn split_to_c(p: &SplitParams) -> AlSplitParams {
    AlSplitParams {
        c_s: p.c_s,
        c_1: p.c_1,
        c_2: p.c_2,
        m1_size: p.m1_size,
        m2_size: p.m2_size,
        version: match p.version {
            HintVersion::Guessing => 0,
            HintVersion::List => 1,
        },
        relabeled: p.relabeled as c_int,
    }
}

fn eve_mode_from_c(mode: c_int) -> Result<EveMode, c_int> {
    match mode {
        0 => Ok(EveMode::Formula),
        1 => Ok(EveMode::Heuristic),
        2 => Ok(EveMode::Exact),
        other => {
            set_error(&format!(
                "eve_mode must be 0 (formula), 1 (heuristic), or 2 (exact), got {}",
                other
            ));
            Err(AL_STATUS_DOMAIN)
        }
    }
}

fn write_string(out: *mut *mut c_char, text: String) -> c_int {
    match CString::new(text) {
        Ok(s) => {
            unsafe { *out = s.into_raw() };
            AL_STATUS_OK
        }
        Err(_) => {
            set_error("produced text contained an interior NUL byte");
            AL_STATUS_INTERNAL
        }
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn al_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Description of the most recent failure on this thread.
#[no_mangle]
pub extern "C" fn al_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Release a string produced by this library.
#[no_mangle]
pub unsafe extern "C" fn al_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Parse a joint table from its JSON form.
#[no_mangle]
pub unsafe extern "C" fn al_joint_from_json(
    json: *const c_char,
    out: *mut *mut AlJoint,
) -> c_int {
    guarded(|| {
        if json.is_null() {
            return null_argument("json");
        }
        if out.is_null() {
            return null_argument("out");
        }
        let text = match unsafe { CStr::from_ptr(json) }.to_str() {
            Ok(t) => t,
            Err(_) => {
                set_error("json must be valid UTF-8");
                return AL_STATUS_INVALID_INPUT;
            }
        };
        match JointPMF::from_json(text) {
            Ok(j) => {
                unsafe { *out = Box::into_raw(Box::new(AlJoint(j))) };
                AL_STATUS_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// Serialize a joint table to JSON; free the result with `al_string_free`.
#[no_mangle]
pub unsafe extern "C" fn al_joint_to_json(
    joint: *const AlJoint,
    out: *mut *mut c_char,
) -> c_int {
    guarded(|| {
        let Some(j) = (unsafe { joint.as_ref() }) else {
            return null_argument("joint");
        };
        if out.is_null() {
            return null_argument("out");
        }
        write_string(out, j.0.to_json())
    })
}

/// Uniform secret on `x_size` points with a single trivial observation.
#[no_mangle]
pub unsafe extern "C" fn al_joint_uniform(x_size: usize, out: *mut *mut AlJoint) -> c_int {
    guarded(|| {
        if out.is_null() {
            return null_argument("out");
        }
        if x_size == 0 {
            set_error("x_size must be positive");
            return AL_STATUS_DOMAIN;
        }
        unsafe { *out = Box::into_raw(Box::new(AlJoint(JointPMF::uniform(x_size)))) };
        AL_STATUS_OK
    })
}

/// Release a joint table handle.
#[no_mangle]
pub unsafe extern "C" fn al_joint_free(joint: *mut AlJoint) {
    if !joint.is_null() {
        drop(unsafe { Box::from_raw(joint) });
    }
}

/// Secret alphabet size, or 0 when the handle is null.
#[no_mangle]
pub unsafe extern "C" fn al_joint_x_size(joint: *const AlJoint) -> usize {
    unsafe { joint.as_ref() }.map_or(0, |j| j.0.x_size())
}

/// Observation alphabet size, or 0 when the handle is null.
#[no_mangle]
pub unsafe extern "C" fn al_joint_y_size(joint: *const AlJoint) -> usize {
    unsafe { joint.as_ref() }.map_or(0, |j| j.0.y_size())
}

/// Entropy order `1/(1+rho)` matching a guessing-moment order `rho`.
#[no_mangle]
pub extern "C" fn al_tilt_order(rho: f64) -> f64 {
    tilt_order(rho)
}

/// Conditional Rényi entropy (Arimoto form) of the table at `alpha`.
#[no_mangle]
pub unsafe extern "C" fn al_entropy(
    joint: *const AlJoint,
    alpha: f64,
    out: *mut f64,
) -> c_int {
    guarded(|| {
        let Some(j) = (unsafe { joint.as_ref() }) else {
            return null_argument("joint");
        };
        if out.is_null() {
            return null_argument("out");
        }
        match arimoto_conditional_entropy(&j.0, alpha) {
            Ok(v) => {
                unsafe { *out = v };
                AL_STATUS_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// Best attainable guessing moment `min_G E[G(X|Y)^rho]`.
#[no_mangle]
pub unsafe extern "C" fn al_min_guess_moment(
    joint: *const AlJoint,
    rho: f64,
    out: *mut f64,
) -> c_int {
    guarded(|| {
        let Some(j) = (unsafe { joint.as_ref() }) else {
            return null_argument("joint");
        };
        if out.is_null() {
            return null_argument("out");
        }
        match min_guess_moment(&j.0, rho) {
            Ok(v) => {
                unsafe { *out = v };
                AL_STATUS_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// `E[ceil(G*(X|Y)/z_size)^rho]` for the optimal guesser.
#[no_mangle]
pub unsafe extern "C" fn al_ceiled_min_guess_moment(
    joint: *const AlJoint,
    z_size: usize,
    rho: f64,
    out: *mut f64,
) -> c_int {
    guarded(|| {
        let Some(j) = (unsafe { joint.as_ref() }) else {
            return null_argument("joint");
        };
        if out.is_null() {
            return null_argument("out");
        }
        match ceiled_min_guess_moment(&j.0, z_size, rho) {
            Ok(v) => {
                unsafe { *out = v };
                AL_STATUS_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// Entropy sandwich on the minimal guessing moment.
#[no_mangle]
pub unsafe extern "C" fn al_arikan_bounds(
    joint: *const AlJoint,
    rho: f64,
    lower: *mut f64,
    upper: *mut f64,
) -> c_int {
    guarded(|| {
        let Some(j) = (unsafe { joint.as_ref() }) else {
            return null_argument("joint");
        };
        if lower.is_null() {
            return null_argument("lower");
        }
        if upper.is_null() {
            return null_argument("upper");
        }
        match arikan_bounds(&j.0, rho) {
            Ok((lo, hi)) => {
                unsafe {
                    *lower = lo;
                    *upper = hi;
                }
                AL_STATUS_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// Pick a guessing-version split for the given hint alphabet sizes.
#[no_mangle]
pub unsafe extern "C" fn al_choose_split(
    joint: *const AlJoint,
    m1_size: u64,
    m2_size: u64,
    rho: f64,
    out: *mut AlSplitParams,
) -> c_int {
    guarded(|| {
        let Some(j) = (unsafe { joint.as_ref() }) else {
            return null_argument("joint");
        };
        if out.is_null() {
            return null_argument("out");
        }
        match choose_split(m1_size, m2_size, &j.0, rho) {
            Ok(p) => {
                unsafe { *out = split_to_c(&p) };
                AL_STATUS_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// Build the guessing-version encoder for an admissible split.
#[no_mangle]
pub unsafe extern "C" fn al_build_guess_encoder(
    joint: *const AlJoint,
    params: *const AlSplitParams,
    seed: u64,
    out: *mut *mut AlEncoder,
) -> c_int {
    guarded(|| {
        let Some(j) = (unsafe { joint.as_ref() }) else {
            return null_argument("joint");
        };
        let Some(p) = (unsafe { params.as_ref() }) else {
            return null_argument("params");
        };
        if out.is_null() {
            return null_argument("out");
        }
        let split = match split_from_c(p) {
            Ok(s) => s,
            Err(code) => return code,
        };
        match build_guess_encoder(&j.0, &split, seed) {
            Ok(enc) => {
                unsafe { *out = Box::into_raw(Box::new(AlEncoder(enc))) };
                AL_STATUS_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// Build the list-version encoder for an admissible split.
#[no_mangle]
pub unsafe extern "C" fn al_build_list_encoder(
    joint: *const AlJoint,
    params: *const AlSplitParams,
    seed: u64,
    out: *mut *mut AlEncoder,
) -> c_int {
    guarded(|| {
        let Some(j) = (unsafe { joint.as_ref() }) else {
            return null_argument("joint");
        };
        let Some(p) = (unsafe { params.as_ref() }) else {
            return null_argument("params");
        };
        if out.is_null() {
            return null_argument("out");
        }
        let split = match split_from_c(p) {
            Ok(s) => s,
            Err(code) => return code,
        };
        match build_list_encoder(&j.0, &split, seed) {
            Ok(enc) => {
                unsafe { *out = Box::into_raw(Box::new(AlEncoder(enc))) };
                AL_STATUS_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// Parse an encoder from its JSON form.
#[no_mangle]
pub unsafe extern "C" fn al_encoder_from_json(
    json: *const c_char,
    out: *mut *mut AlEncoder,
) -> c_int {
    guarded(|| {
        if json.is_null() {
            return null_argument("json");
        }
        if out.is_null() {
            return null_argument("out");
        }
        let text = match unsafe { CStr::from_ptr(json) }.to_str() {
            Ok(t) => t,
            Err(_) => {
                set_error("json must be valid UTF-8");
                return AL_STATUS_INVALID_INPUT;
            }
        };
        match HintEncoder::from_json(text) {
            Ok(enc) => {
                unsafe { *out = Box::into_raw(Box::new(AlEncoder(enc))) };
                AL_STATUS_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// Serialize an encoder to JSON; free the result with `al_string_free`.
#[no_mangle]
pub unsafe extern "C" fn al_encoder_to_json(
    encoder: *const AlEncoder,
    out: *mut *mut c_char,
) -> c_int {
    guarded(|| {
        let Some(enc) = (unsafe { encoder.as_ref() }) else {
            return null_argument("encoder");
        };
        if out.is_null() {
            return null_argument("out");
        }
        write_string(out, enc.0.to_json())
    })
}

/// Release an encoder handle.
#[no_mangle]
pub unsafe extern "C" fn al_encoder_free(encoder: *mut AlEncoder) {
    if !encoder.is_null() {
        drop(unsafe { Box::from_raw(encoder) });
    }
}

/// Two-hint reader's guessing ambiguity `E[G(X|Y,M1,M2)^rho]`.
#[no_mangle]
pub unsafe extern "C" fn al_bob_guess_ambiguity(
    encoder: *const AlEncoder,
    joint: *const AlJoint,
    rho: f64,
    out: *mut f64,
) -> c_int {
    guarded(|| {
        let Some(enc) = (unsafe { encoder.as_ref() }) else {
            return null_argument("encoder");
        };
        let Some(j) = (unsafe { joint.as_ref() }) else {
            return null_argument("joint");
        };
        if out.is_null() {
            return null_argument("out");
        }
        match bob_guess_ambiguity(&enc.0, &j.0, rho) {
            Ok(v) => {
                unsafe { *out = v };
                AL_STATUS_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// Two-hint reader's list ambiguity `E[|L(Y,M1,M2)|^rho]`.
#[no_mangle]
pub unsafe extern "C" fn al_bob_list_ambiguity(
    encoder: *const AlEncoder,
    joint: *const AlJoint,
    rho: f64,
    out: *mut f64,
) -> c_int {
    guarded(|| {
        let Some(enc) = (unsafe { encoder.as_ref() }) else {
            return null_argument("encoder");
        };
        let Some(j) = (unsafe { joint.as_ref() }) else {
            return null_argument("joint");
        };
        if out.is_null() {
            return null_argument("out");
        }
        match bob_list_ambiguity(&enc.0, &j.0, rho) {
            Ok(v) => {
                unsafe { *out = v };
                AL_STATUS_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// Genie-aided eavesdropper value of the per-hint-optimal strategy pair.
#[no_mangle]
pub unsafe extern "C" fn al_eve_feasible_pair(
    encoder: *const AlEncoder,
    joint: *const AlJoint,
    rho: f64,
    out: *mut f64,
) -> c_int {
    guarded(|| {
        let Some(enc) = (unsafe { encoder.as_ref() }) else {
            return null_argument("encoder");
        };
        let Some(j) = (unsafe { joint.as_ref() }) else {
            return null_argument("joint");
        };
        if out.is_null() {
            return null_argument("out");
        }
        match eve_feasible_pair_ambiguity(&enc.0, &j.0, rho) {
            Ok(v) => {
                unsafe { *out = v };
                AL_STATUS_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// Alternating best-response search for the eavesdropper's strategy pair.
#[no_mangle]
pub unsafe extern "C" fn al_eve_alternating(
    encoder: *const AlEncoder,
    joint: *const AlJoint,
    rho: f64,
    restarts: u32,
    seed: u64,
    out: *mut f64,
) -> c_int {
    guarded(|| {
        let Some(enc) = (unsafe { encoder.as_ref() }) else {
            return null_argument("encoder");
        };
        let Some(j) = (unsafe { joint.as_ref() }) else {
            return null_argument("joint");
        };
        if out.is_null() {
            return null_argument("out");
        }
        match eve_ambiguity_alternating(&enc.0, &j.0, rho, restarts, seed) {
            Ok(v) => {
                unsafe { *out = v };
                AL_STATUS_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// Exhaustive eavesdropper optimum under a configuration/time budget.
#[no_mangle]
pub unsafe extern "C" fn al_eve_brute(
    encoder: *const AlEncoder,
    joint: *const AlJoint,
    rho: f64,
    max_configs: u64,
    max_seconds: f64,
    out: *mut f64,
) -> c_int {
    guarded(|| {
        let Some(enc) = (unsafe { encoder.as_ref() }) else {
            return null_argument("encoder");
        };
        let Some(j) = (unsafe { joint.as_ref() }) else {
            return null_argument("joint");
        };
        if out.is_null() {
            return null_argument("out");
        }
        let budget = Budget {
            max_configs,
            max_seconds,
        };
        match brute_eve(&enc.0, &j.0, rho, &budget) {
            Ok(v) => {
                unsafe { *out = v };
                AL_STATUS_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// Closed-form reader bounds `(achievability, converse)` for a split.
#[no_mangle]
pub unsafe extern "C" fn al_bob_bounds(
    params: *const AlSplitParams,
    joint: *const AlJoint,
    rho: f64,
    achievability: *mut f64,
    converse: *mut f64,
) -> c_int {
    guarded(|| {
        let Some(p) = (unsafe { params.as_ref() }) else {
            return null_argument("params");
        };
        let Some(j) = (unsafe { joint.as_ref() }) else {
            return null_argument("joint");
        };
        if achievability.is_null() {
            return null_argument("achievability");
        }
        if converse.is_null() {
            return null_argument("converse");
        }
        let split = match split_from_c(p) {
            Ok(s) => s,
            Err(code) => return code,
        };
        match bob_bounds(&split, &j.0, rho) {
            Ok((ach, conv)) => {
                unsafe {
                    *achievability = ach;
                    *converse = conv;
                }
                AL_STATUS_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// Closed-form eavesdropper sandwich `(lower, upper)` for a split, given
/// the reader's realized guessing ambiguity.
#[no_mangle]
pub unsafe extern "C" fn al_eve_bounds(
    params: *const AlSplitParams,
    joint: *const AlJoint,
    rho: f64,
    bob_value: f64,
    lower: *mut f64,
    upper: *mut f64,
) -> c_int {
    guarded(|| {
        let Some(p) = (unsafe { params.as_ref() }) else {
            return null_argument("params");
        };
        let Some(j) = (unsafe { joint.as_ref() }) else {
            return null_argument("joint");
        };
        if lower.is_null() {
            return null_argument("lower");
        }
        if upper.is_null() {
            return null_argument("upper");
        }
        let split = match split_from_c(p) {
            Ok(s) => s,
            Err(code) => return code,
        };
        match eve_bounds(&split, &j.0, rho, bob_value) {
            Ok((lo, hi)) => {
                unsafe {
                    *lower = lo;
                    *upper = hi;
                }
                AL_STATUS_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// Maximal total-variation gap between the pad digit and uniform.
#[no_mangle]
pub unsafe extern "C" fn al_pad_secrecy_deviation(
    encoder: *const AlEncoder,
    out: *mut f64,
) -> c_int {
    guarded(|| {
        let Some(enc) = (unsafe { encoder.as_ref() }) else {
            return null_argument("encoder");
        };
        if out.is_null() {
            return null_argument("out");
        }
        match pad_secrecy_deviation(&enc.0) {
            Ok(v) => {
                unsafe { *out = v };
                AL_STATUS_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// Build and score a scheme in one call, returning the report as JSON.
///
/// `eve_mode` is 0 (formula), 1 (heuristic), or 2 (exact). Free the
/// returned string with `al_string_free`.
#[no_mangle]
pub unsafe extern "C" fn al_evaluate_json(
    joint: *const AlJoint,
    params: *const AlSplitParams,
    rho: f64,
    eve_mode: c_int,
    restarts: u32,
    seed: u64,
    max_configs: u64,
    max_seconds: f64,
    out: *mut *mut c_char,
) -> c_int {
    guarded(|| {
        let Some(j) = (unsafe { joint.as_ref() }) else {
            return null_argument("joint");
        };
        let Some(p) = (unsafe { params.as_ref() }) else {
            return null_argument("params");
        };
        if out.is_null() {
            return null_argument("out");
        }
        let split = match split_from_c(p) {
            Ok(s) => s,
            Err(code) => return code,
        };
        let mode = match eve_mode_from_c(eve_mode) {
            Ok(m) => m,
            Err(code) => return code,
        };
        let budget = Budget {
            max_configs,
            max_seconds,
        };
        match evaluate_scheme(&j.0, &split, rho, mode, restarts, seed, &budget) {
            Ok((_, report)) => match serde_json::to_string_pretty(&report) {
                Ok(text) => write_string(out, text),
                Err(e) => {
                    set_error(&format!("report serialization failed: {}", e));
                    AL_STATUS_INTERNAL
                }
            },
            Err(e) => fail(e),
        }
    })
}
