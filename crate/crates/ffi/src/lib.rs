//! C ABI over `bergman-core`.
//!
//! Symbols and test functions are opaque heap handles created from their
//! text forms and released with the matching `*_free`. Every fallible call
//! returns a [`BgStatus`]; on failure the message is kept per thread and can
//! be copied out with [`bg_last_error_message`]. Panics never cross the
//! boundary.
//!
//! The header `include/bergman.h` is regenerated by the build script.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use bergman_core::averaging::carleson_mean;
use bergman_core::geometry::DyadicBox;
use bergman_core::operators::{truncated_apply, OperatorKind, TestFunction};
use bergman_core::spectral::radial_eigenvalue;
use bergman_core::symbol::Symbol;
use bergman_core::{Complex64, Error, PolarPoint};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BgStatus {
    Ok = 0,
    NullPointer = 1,
    /// Malformed text, out-of-range numbers or non-UTF-8 input.
    InvalidArgument = 2,
    /// A size or work cap was exceeded.
    Resource = 3,
    Io = 4,
    /// The call completed but missed its tolerance; outputs are filled.
    NotConverged = 5,
    Panic = 6,
}

/// Truncated operator selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BgOperator {
    Toeplitz = 0,
    Hankel = 1,
}

/// Opaque symbol handle.
pub struct BgSymbol(Symbol);

/// Opaque analytic test function handle.
pub struct BgTestFunction(TestFunction);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn fail(e: Error) -> BgStatus {
    let status = match e {
        Error::Domain(_) | Error::Parse { .. } => BgStatus::InvalidArgument,
        Error::Resource(_) => BgStatus::Resource,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => BgStatus::Io,
    };
    set_error(e.to_string());
    status
}

/// Runs `f`, turning panics into [`BgStatus::Panic`].
fn guard(f: impl FnOnce() -> BgStatus) -> BgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(msg);
            BgStatus::Panic
        }
    }
}

unsafe fn c_str<'a>(p: *const c_char) -> Result<&'a str, BgStatus> {
    if p.is_null() {
        set_error("null string");
        return Err(BgStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("string is not UTF-8");
        BgStatus::InvalidArgument
    })
}

macro_rules! deref {
    ($p:expr) => {
        match $p.as_ref() {
            Some(v) => v,
            None => {
                set_error(concat!("null pointer: ", stringify!($p)));
                return BgStatus::NullPointer;
            }
        }
    };
}

macro_rules! deref_mut {
    ($p:expr) => {
        match $p.as_mut() {
            Some(v) => v,
            None => {
                set_error(concat!("null pointer: ", stringify!($p)));
                return BgStatus::NullPointer;
            }
        }
    };
}

macro_rules! try_bg {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return fail(e),
        }
    };
}

/// Copies the calling thread's last error message (NUL-terminated,
/// truncated to `len`) into `buf` and returns the full message length in
/// bytes, excluding the terminator. `buf` may be null to query the length.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn bg_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a symbol such as `ab:0.25` or `abs(pow:0.5)`.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bg_symbol_parse(text: *const c_char, out: *mut *mut BgSymbol) -> BgStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return BgStatus::NullPointer;
        }
        let s = match c_str(text) {
            Ok(s) => s,
            Err(st) => return st,
        };
        let sym = try_bg!(Symbol::parse(s));
        *out = Box::into_raw(Box::new(BgSymbol(sym)));
        BgStatus::Ok
    })
}

/// Releases a symbol. Null is ignored.
///
/// # Safety
/// `sym` must come from [`bg_symbol_parse`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bg_symbol_free(sym: *mut BgSymbol) {
    if !sym.is_null() {
        drop(Box::from_raw(sym));
    }
}

/// Evaluates the symbol at `rho·e^{iφ}`.
///
/// # Safety
/// Pointers must be valid; `re`/`im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bg_symbol_eval(
    sym: *const BgSymbol,
    rho: f64,
    phi: f64,
    re: *mut f64,
    im: *mut f64,
) -> BgStatus {
    guard(|| {
        let sym = deref!(sym);
        let (re, im) = (deref_mut!(re), deref_mut!(im));
        let v = try_bg!(sym.0.eval_at(PolarPoint::new(rho, phi)));
        *re = v.re;
        *im = v.im;
        BgStatus::Ok
    })
}

/// Parses a test function such as `poly:1,1` or `mono:3`.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bg_test_function_parse(
    text: *const c_char,
    out: *mut *mut BgTestFunction,
) -> BgStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return BgStatus::NullPointer;
        }
        let s = match c_str(text) {
            Ok(s) => s,
            Err(st) => return st,
        };
        let f = try_bg!(TestFunction::parse(s));
        *out = Box::into_raw(Box::new(BgTestFunction(f)));
        BgStatus::Ok
    })
}

/// Releases a test function. Null is ignored.
///
/// # Safety
/// `f` must come from [`bg_test_function_parse`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bg_test_function_free(f: *mut BgTestFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Diagonal eigenvalue `γ_n` of the Toeplitz operator with a radial symbol.
///
/// # Safety
/// Pointers must be valid; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn bg_radial_eigenvalue(
    sym: *const BgSymbol,
    n: usize,
    tol: f64,
    re: *mut f64,
    im: *mut f64,
    err: *mut f64,
) -> BgStatus {
    guard(|| {
        let sym = deref!(sym);
        let (re, im, err) = (deref_mut!(re), deref_mut!(im), deref_mut!(err));
        let q = try_bg!(radial_eigenvalue(&sym.0, n, tol));
        *re = q.value.re;
        *im = q.value.im;
        *err = q.error_estimate;
        if q.converged {
            BgStatus::Ok
        } else {
            set_error(format!("eigenvalue {n} missed tolerance {tol:e}"));
            BgStatus::NotConverged
        }
    })
}

/// Carleson mean `|D|^{-1}∫_D a dA` over the box with inner radius `r` and
/// starting angle `theta`.
///
/// # Safety
/// Pointers must be valid; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn bg_carleson_mean(
    sym: *const BgSymbol,
    r: f64,
    theta: f64,
    tol: f64,
    re: *mut f64,
    im: *mut f64,
    err: *mut f64,
) -> BgStatus {
    guard(|| {
        let sym = deref!(sym);
        let (re, im, err) = (deref_mut!(re), deref_mut!(im), deref_mut!(err));
        let b = try_bg!(DyadicBox::family(r, theta));
        let q = try_bg!(carleson_mean(&sym.0, &b, tol));
        *re = q.value.re;
        *im = q.value.im;
        *err = q.error_estimate;
        if q.converged {
            BgStatus::Ok
        } else {
            set_error(format!("Carleson mean missed tolerance {tol:e}"));
            BgStatus::NotConverged
        }
    })
}

/// Applies the operator truncated at radius `rho` to `f` at `len` points
/// `z_re[i] + i·z_im[i]` of the open disc.
///
/// # Safety
/// Input arrays must hold `len` values and output arrays must be writable
/// for `len` values.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn bg_truncated_apply(
    op: BgOperator,
    sym: *const BgSymbol,
    rho: f64,
    f: *const BgTestFunction,
    z_re: *const f64,
    z_im: *const f64,
    len: usize,
    tol: f64,
    out_re: *mut f64,
    out_im: *mut f64,
    out_err: *mut f64,
) -> BgStatus {
    guard(|| {
        let (sym, f) = (deref!(sym), deref!(f));
        if len > 0 && [z_re, z_im].iter().any(|p| p.is_null())
            || len > 0 && [out_re, out_im, out_err].iter().any(|p| p.is_null())
        {
            set_error("null array");
            return BgStatus::NullPointer;
        }
        if len == 0 {
            return BgStatus::Ok;
        }
        let zr = std::slice::from_raw_parts(z_re, len);
        let zi = std::slice::from_raw_parts(z_im, len);
        let grid: Vec<PolarPoint> = zr
            .iter()
            .zip(zi)
            .map(|(&x, &y)| PolarPoint::from_complex(Complex64::new(x, y)))
            .collect();
        let kind = match op {
            BgOperator::Toeplitz => OperatorKind::Toeplitz,
            BgOperator::Hankel => OperatorKind::Hankel,
        };
        let field = try_bg!(truncated_apply(kind, &sym.0, rho, &f.0, &grid, tol));
        let (ore, oim, oerr) = (
            std::slice::from_raw_parts_mut(out_re, len),
            std::slice::from_raw_parts_mut(out_im, len),
            std::slice::from_raw_parts_mut(out_err, len),
        );
        for i in 0..len {
            ore[i] = field.values[i].re;
            oim[i] = field.values[i].im;
            oerr[i] = field.per_point_error[i];
        }
        if field.all_converged() {
            BgStatus::Ok
        } else {
            set_error(format!("some points missed tolerance {tol:e}"));
            BgStatus::NotConverged
        }
    })
}
