//! C ABI over the `degenwell` solvers.
//!
//! Potentials and spectra cross the boundary as opaque handles created by
//! `dw_*` constructors and released by the matching `*_free`. Every entry
//! point returns a [`DwStatus`]; on failure the message is kept per thread
//! and can be read back with [`dw_last_error_message`]. Panics never unwind
//! into C.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use degenwell::potentials::Potential;
use degenwell::radial::{ball_dirichlet_reference, radial_eigensolve};
use degenwell::spectral1d::{eigensolve, square_well_reference, well_widths, GridSpec, Spectrum};
use degenwell::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Bad potential description, parameters or grid.
    InvalidArgument = 3,
    /// The solver failed: no bracket, truncation, no convergence.
    Numerical = 4,
    /// Index or buffer length out of range.
    OutOfRange = 5,
    Panic = 6,
}

/// A validated potential.
pub struct DwPotential(Potential);

/// The lowest eigenvalues of one operator.
pub struct DwSpectrum(Spectrum);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: DwStatus, msg: &str) -> DwStatus {
    set_last_error(msg);
    status
}

fn from_error(e: Error) -> DwStatus {
    let status = if e.is_usage() {
        DwStatus::InvalidArgument
    } else {
        DwStatus::Numerical
    };
    fail(status, &e.to_string())
}

fn guard(f: impl FnOnce() -> DwStatus) -> DwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(DwStatus::Panic, &format!("internal panic: {msg}"))
        }
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(DwStatus::NullPointer, concat!("`", stringify!($p), "` is null"));
        })+
    };
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, DwStatus> {
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(DwStatus::InvalidUtf8, "string is not UTF-8"))
}

unsafe fn copy_out(values: &[f64], buf: *mut f64, cap: usize, len: *mut usize) -> DwStatus {
    if !len.is_null() {
        *len = values.len();
    }
    if cap < values.len() {
        return fail(
            DwStatus::OutOfRange,
            &format!("buffer holds {cap} values, {} needed", values.len()),
        );
    }
    if !values.is_empty() {
        if buf.is_null() {
            return fail(DwStatus::NullPointer, "`buf` is null");
        }
        ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    }
    DwStatus::Ok
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `cap`) and returns the full message length
/// without the NUL; 0 when there is none.
///
/// # Safety
/// `buf` must be null or point to `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn dw_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Parses a potential from a JSON object `{"family": ..., "params": {...}}`
/// or a builtin name such as `"exp_flat1"`.
///
/// # Safety
/// `spec` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dw_potential_from_json(spec: *const c_char, out: *mut *mut DwPotential) -> DwStatus {
    guard(|| {
        non_null!(spec, out);
        *out = ptr::null_mut();
        let s = match read_str(spec) {
            Ok(s) => s,
            Err(st) => return st,
        };
        match s.parse::<Potential>() {
            Ok(p) => {
                *out = Box::into_raw(Box::new(DwPotential(p)));
                DwStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `p` must be null or a handle from [`dw_potential_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dw_potential_free(p: *mut DwPotential) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// `V(x)`.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dw_potential_eval(p: *const DwPotential, x: f64, out: *mut f64) -> DwStatus {
    guard(|| {
        non_null!(p, out);
        *out = (*p).0.eval(x);
        DwStatus::Ok
    })
}

/// `ln V(x)`, finite far below the smallest positive double.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dw_potential_log_eval(p: *const DwPotential, x: f64, out: *mut f64) -> DwStatus {
    guard(|| {
        non_null!(p, out);
        *out = (*p).0.log_eval(x);
        DwStatus::Ok
    })
}

/// Well edges `delta_minus < 0 < delta_plus` at `h`, and the defect of the
/// defining equations.
///
/// # Safety
/// `p` must be a live handle; each output must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn dw_well_widths(
    p: *const DwPotential,
    h: f64,
    delta_minus: *mut f64,
    delta_plus: *mut f64,
    residual: *mut f64,
) -> DwStatus {
    guard(|| {
        non_null!(p);
        match well_widths(&(*p).0, h) {
            Ok(w) => {
                for (dst, v) in [(delta_minus, w.delta_minus), (delta_plus, w.delta_plus), (residual, w.residual)] {
                    if !dst.is_null() {
                        *dst = v;
                    }
                }
                DwStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

unsafe fn store_spectrum(result: degenwell::Result<Spectrum>, out: *mut *mut DwSpectrum) -> DwStatus {
    match result {
        Ok(s) => {
            *out = Box::into_raw(Box::new(DwSpectrum(s)));
            DwStatus::Ok
        }
        Err(e) => from_error(e),
    }
}

/// Lowest `k` eigenvalues of `-h^2 d^2/dx^2 + V` on the line. `n_points` is
/// the number of interior points on the default box; 0 picks the default.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dw_eigensolve(
    p: *const DwPotential,
    h: f64,
    k: usize,
    n_points: usize,
    out: *mut *mut DwSpectrum,
) -> DwStatus {
    guard(|| {
        non_null!(p, out);
        *out = ptr::null_mut();
        let mut grid = GridSpec::default();
        if n_points > 0 {
            grid.n_points = n_points;
        }
        store_spectrum(eigensolve(&(*p).0, h, k, &grid), out)
    })
}

/// Lowest `k` eigenvalues of `-h^2 Δ + V0(|x|)` in dimension `dim >= 2`.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dw_radial_eigensolve(
    p: *const DwPotential,
    h: f64,
    dim: usize,
    k: usize,
    out: *mut *mut DwSpectrum,
) -> DwStatus {
    guard(|| {
        non_null!(p, out);
        *out = ptr::null_mut();
        store_spectrum(radial_eigensolve(&(*p).0, h, dim, k), out)
    })
}

/// # Safety
/// `s` must be null or a handle from a solver call not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dw_spectrum_free(s: *mut DwSpectrum) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of eigenvalues held; 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dw_spectrum_len(s: *const DwSpectrum) -> usize {
    if s.is_null() {
        0
    } else {
        (*s).0.eigenvalues.len()
    }
}

/// Copies the eigenvalues of `-h^2 Δ + V` (or, when `rescaled` is nonzero,
/// of the rescaled operator) into `buf`. `len` receives the count even when
/// `cap` is too small.
///
/// # Safety
/// `s` must be a live handle, `buf` must hold `cap` doubles, `len` must be
/// null or writable.
#[no_mangle]
pub unsafe extern "C" fn dw_spectrum_eigenvalues(
    s: *const DwSpectrum,
    rescaled: i32,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> DwStatus {
    guard(|| {
        non_null!(s);
        let sp = &(*s).0;
        let v = if rescaled != 0 {
            &sp.rescaled_eigenvalues
        } else {
            &sp.eigenvalues
        };
        copy_out(v, buf, cap, len)
    })
}

/// Error estimates matching [`dw_spectrum_eigenvalues`] with `rescaled = 0`.
///
/// # Safety
/// As for [`dw_spectrum_eigenvalues`].
#[no_mangle]
pub unsafe extern "C" fn dw_spectrum_errors(s: *const DwSpectrum, buf: *mut f64, cap: usize, len: *mut usize) -> DwStatus {
    guard(|| {
        non_null!(s);
        copy_out(&(*s).0.error_estimates, buf, cap, len)
    })
}

/// The whole spectrum as a JSON document, to be released with
/// [`dw_string_free`].
///
/// # Safety
/// `s` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dw_spectrum_to_json(s: *const DwSpectrum, out: *mut *mut c_char) -> DwStatus {
    guard(|| {
        non_null!(s, out);
        *out = ptr::null_mut();
        match serde_json::to_string(&(*s).0) {
            Ok(text) => {
                *out = CString::new(text).expect("JSON has no NUL").into_raw();
                DwStatus::Ok
            }
            Err(e) => from_error(e.into()),
        }
    })
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dw_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Lowest `k` Dirichlet eigenvalues of the unit ball in dimension `dim >= 2`,
/// with multiplicity.
///
/// # Safety
/// `buf` must hold `cap` doubles, `len` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn dw_ball_reference(dim: usize, k: usize, buf: *mut f64, cap: usize, len: *mut usize) -> DwStatus {
    guard(|| {
        if dim < 2 {
            return fail(DwStatus::InvalidArgument, &format!("dimension {dim} is below 2"));
        }
        copy_out(&ball_dirichlet_reference(dim, k).eigenvalues, buf, cap, len)
    })
}

/// Lowest `k` levels of the unit square well of depth `depth`; missing bound
/// states are reported as `depth`.
///
/// # Safety
/// `buf` must hold `cap` doubles, `len` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn dw_square_well_reference(
    depth: f64,
    k: usize,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> DwStatus {
    guard(|| {
        if !(depth.is_finite() && depth > 0.0) {
            return fail(DwStatus::InvalidArgument, "depth must be finite and positive");
        }
        copy_out(&square_well_reference(depth, k).eigenvalues, buf, cap, len)
    })
}
