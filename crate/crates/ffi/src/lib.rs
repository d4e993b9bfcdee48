//! C ABI over `tdta`.
//!
//! Transducers cross the boundary as opaque `TdtaTransducer` handles. Every call
//! returns a `TdtaStatus`; on anything but `TDTA_STATUS_OK` the message is available
//! from `tdta_last_error_message` on the same thread until the next call.
//! Strings handed out by the library are freed with `tdta_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tdta::syntax::{parse_document, parse_ground, print_transducer_document};
use tdta::transducer::Mode;
use tdta::{Error, Transducer};

/// Status codes returned by every function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TdtaStatus {
    Ok = 0,
    NullArg = 1,
    ParseError = 2,
    Invalid = 3,
    /// A construction refused its input; the message names the reason code and stage.
    NegativeVerdict = 4,
    /// The translation is undefined on the given tree.
    Undefined = 5,
    Limit = 6,
    Internal = 7,
}

/// Mode for the constructions that depend on it.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TdtaMode {
    Uc = 0,
    Linear = 1,
}

/// Opaque transducer handle.
pub struct TdtaTransducer {
    inner: Transducer,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> TdtaStatus {
    match e {
        Error::Parse { .. } => TdtaStatus::ParseError,
        Error::Failure(_) => TdtaStatus::NegativeVerdict,
        Error::Limit(_) => TdtaStatus::Limit,
        Error::Internal(_) => TdtaStatus::Internal,
        _ => TdtaStatus::Invalid,
    }
}

fn fail(e: Error) -> TdtaStatus {
    set_error(e.to_string());
    status_of(&e)
}

fn guard(f: impl FnOnce() -> TdtaStatus) -> TdtaStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            set_error(format!("panic: {}", msg.unwrap_or_default()));
            TdtaStatus::Internal
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, TdtaStatus> {
    if s.is_null() {
        set_error("null argument".into());
        return Err(TdtaStatus::NullArg);
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8".into());
        TdtaStatus::Invalid
    })
}

unsafe fn read_handle<'a>(h: *const TdtaTransducer) -> Result<&'a Transducer, TdtaStatus> {
    if h.is_null() {
        set_error("null handle".into());
        return Err(TdtaStatus::NullArg);
    }
    Ok(&(*h).inner)
}

unsafe fn put_handle(out: *mut *mut TdtaTransducer, t: Transducer) {
    *out = Box::into_raw(Box::new(TdtaTransducer { inner: t }));
}

unsafe fn put_string(out: *mut *mut c_char, s: String) {
    *out = CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut());
}

fn mode_of(m: TdtaMode) -> Mode {
    match m {
        TdtaMode::Uc => Mode::Uc,
        TdtaMode::Linear => Mode::Linear,
    }
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

/// Parses a document and returns its last transducer, validated.
///
/// # Safety
/// `src` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tdta_parse_transducer(src: *const c_char, out: *mut *mut TdtaTransducer) -> TdtaStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer".into());
            return TdtaStatus::NullArg;
        }
        *out = ptr::null_mut();
        let src = tri!(read_str(src));
        let mut doc = match parse_document(src) {
            Ok(d) => d,
            Err(e) => return fail(e),
        };
        let Some(a) = doc.transducers.pop() else {
            set_error("document has no transducer".into());
            return TdtaStatus::Invalid;
        };
        if let Err(e) = a.validate() {
            return fail(e);
        }
        put_handle(out, a);
        TdtaStatus::Ok
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `h` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tdta_transducer_free(h: *mut TdtaTransducer) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tdta_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failing call on this thread, or null. Owned by the library.
#[no_mangle]
pub extern "C" fn tdta_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Self-contained document text (alphabets, automaton, transducer).
///
/// # Safety
/// `h` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tdta_transducer_print(h: *const TdtaTransducer, out: *mut *mut c_char) -> TdtaStatus {
    guard(|| {
        let a = tri!(read_handle(h));
        if out.is_null() {
            return TdtaStatus::NullArg;
        }
        put_string(out, print_transducer_document(a));
        TdtaStatus::Ok
    })
}

/// Translates a ground input tree such as `f(a,b)`.
///
/// # Safety
/// `h` must be a live handle, `tree` NUL-terminated and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tdta_eval(h: *const TdtaTransducer, tree: *const c_char, out: *mut *mut c_char) -> TdtaStatus {
    guard(|| {
        let a = tri!(read_handle(h));
        let src = tri!(read_str(tree));
        if out.is_null() {
            return TdtaStatus::NullArg;
        }
        *out = ptr::null_mut();
        let t = match parse_ground(src) {
            Ok(t) => t,
            Err(e) => return fail(e),
        };
        match a.eval(&t) {
            Some(o) => {
                put_string(out, o.to_string());
                TdtaStatus::Ok
            }
            None => {
                set_error(format!("translation undefined on {}", t));
                TdtaStatus::Undefined
            }
        }
    })
}

unsafe fn transform(
    h: *const TdtaTransducer,
    out: *mut *mut TdtaTransducer,
    f: impl FnOnce(&Transducer) -> tdta::Result<Transducer>,
) -> TdtaStatus {
    guard(|| {
        let a = tri!(read_handle(h));
        if out.is_null() {
            return TdtaStatus::NullArg;
        }
        *out = ptr::null_mut();
        match f(a) {
            Ok(r) => {
                put_handle(out, r);
                TdtaStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Earliest form. The input is left untouched.
///
/// # Safety
/// `h` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tdta_earliest(h: *const TdtaTransducer, mode: TdtaMode, out: *mut *mut TdtaTransducer) -> TdtaStatus {
    transform(h, out, |a| tdta::normalform::make_earliest(a, mode_of(mode)))
}

/// Canonical form of an earliest transducer.
///
/// # Safety
/// `h` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tdta_canonicalize(h: *const TdtaTransducer, out: *mut *mut TdtaTransducer) -> TdtaStatus {
    transform(h, out, |a| tdta::normalform::canonicalize(a).map(|c| c.transducer))
}

/// Look-ahead removal.
///
/// # Safety
/// `h` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tdta_remove_lookahead(
    h: *const TdtaTransducer,
    mode: TdtaMode,
    out: *mut *mut TdtaTransducer,
) -> TdtaStatus {
    transform(h, out, |a| tdta::lookahead::remove_lookahead(a, mode_of(mode)).map(|r| r.transducer))
}

/// Inspection removal.
///
/// # Safety
/// `h` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tdta_remove_inspection(
    h: *const TdtaTransducer,
    mode: TdtaMode,
    out: *mut *mut TdtaTransducer,
) -> TdtaStatus {
    transform(h, out, |a| tdta::inspection::remove_inspection(a, mode_of(mode)).map(|r| r.transducer))
}

/// Sets `*equal` to 1 if the translations coincide, 0 otherwise. When they differ and a
/// witness is known, `*witness` receives it (else null); pass null to skip it.
///
/// # Safety
/// Handles must be live; `equal` valid; `witness` valid or null.
#[no_mangle]
pub unsafe extern "C" fn tdta_equivalent(
    a: *const TdtaTransducer,
    b: *const TdtaTransducer,
    equal: *mut i32,
    witness: *mut *mut c_char,
) -> TdtaStatus {
    guard(|| {
        let a = tri!(read_handle(a));
        let b = tri!(read_handle(b));
        if equal.is_null() {
            return TdtaStatus::NullArg;
        }
        if !witness.is_null() {
            *witness = ptr::null_mut();
        }
        match tdta::normalform::equivalent(a, b) {
            Ok(r) => {
                *equal = i32::from(r.equivalent);
                if let (false, Some(w)) = (witness.is_null(), r.witness) {
                    put_string(witness, w.to_string());
                }
                TdtaStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
