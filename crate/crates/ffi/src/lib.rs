//! C ABI over `afa_core`.
//!
//! Games and kernels are opaque heap handles created by `afa_*_new` /
//! `afa_*_from_*` and released with the matching `afa_*_free`. Every call
//! returns an [`AfaStatus`]; on failure a message is available from
//! [`afa_last_error_message`] on the same thread until the next call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use afa_core::error::{AfaError, ErrorClass};
use afa_core::kernels::KernelSpec;
use afa_core::{CoalitionGame, SymmetricKernel};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AfaStatus {
    Ok = 0,
    NullPointer = 1,
    Validation = 2,
    Numerical = 3,
    BufferTooSmall = 4,
    Panic = 5,
}

/// Opaque coalition game.
pub struct AfaGame(CoalitionGame);

/// Opaque symmetric kernel.
pub struct AfaKernel(SymmetricKernel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

enum Failure {
    Null(&'static str),
    Core(AfaError),
    Buffer { needed: usize, got: usize },
}

impl From<AfaError> for Failure {
    fn from(e: AfaError) -> Self {
        Failure::Core(e)
    }
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AfaStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    let (status, msg) = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => return AfaStatus::Ok,
        Ok(Err(Failure::Null(what))) => (AfaStatus::NullPointer, format!("{what} is null")),
        Ok(Err(Failure::Buffer { needed, got })) => (
            AfaStatus::BufferTooSmall,
            format!("buffer holds {got} values, {needed} needed"),
        ),
        Ok(Err(Failure::Core(e))) => {
            let status = match e.class() {
                ErrorClass::Validation => AfaStatus::Validation,
                ErrorClass::Numerical => AfaStatus::Numerical,
            };
            (status, e.to_string())
        }
        Err(_) => (AfaStatus::Panic, "internal panic".to_string()),
    };
    set_last_error(msg);
    status
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn read_str<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| AfaError::Validation(format!("{what} is not valid UTF-8")).into())
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn copy_to(src: &[f64], dst: *mut f64, len: usize) -> Result<(), Failure> {
    if dst.is_null() {
        return Err(Failure::Null("output buffer"));
    }
    if len < src.len() {
        return Err(Failure::Buffer { needed: src.len(), got: len });
    }
    ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    Ok(())
}

/// Message for the most recent failed call on this thread, or null. The
/// pointer stays valid until the next `afa_*` call on the same thread.
#[no_mangle]
pub extern "C" fn afa_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a game from `2^n` values indexed by coalition bitmask.
///
/// # Safety
/// `values` must point to `len` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn afa_game_new(
    n: usize,
    values: *const f64,
    len: usize,
    out: *mut *mut AfaGame,
) -> AfaStatus {
    guard(|| {
        if values.is_null() {
            return Err(Failure::Null("values"));
        }
        let values = std::slice::from_raw_parts(values, len).to_vec();
        let game = CoalitionGame::new(n, values)?;
        write_out(out, AfaGame(game))
    })
}

/// Parses `{"n": .., "values": [..]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn afa_game_from_json(json: *const c_char, out: *mut *mut AfaGame) -> AfaStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        let game = afa_core::io::parse_game_json(text)?;
        write_out(out, AfaGame(game))
    })
}

/// # Safety
/// `game` must be a live handle and `n` writable.
#[no_mangle]
pub unsafe extern "C" fn afa_game_n(game: *const AfaGame, n: *mut usize) -> AfaStatus {
    guard(|| {
        let game = deref(game, "game")?;
        if n.is_null() {
            return Err(Failure::Null("n"));
        }
        *n = game.0.n();
        Ok(())
    })
}

/// # Safety
/// `game` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn afa_game_free(game: *mut AfaGame) {
    if !game.is_null() {
        drop(Box::from_raw(game));
    }
}

/// Builds a kernel from a spec string such as `"shap"`, `"fesp:0.3"` or
/// `"custom:1,0,2"`.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn afa_kernel_from_spec(
    spec: *const c_char,
    n: usize,
    out: *mut *mut AfaKernel,
) -> AfaStatus {
    guard(|| {
        let spec: KernelSpec = read_str(spec, "spec")?.parse()?;
        write_out(out, AfaKernel(spec.build(n)?))
    })
}

/// Copies `w[0..=n]` into `out`, which must hold at least `n + 1` values.
///
/// # Safety
/// `kernel` must be a live handle and `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn afa_kernel_weights(
    kernel: *const AfaKernel,
    out: *mut f64,
    len: usize,
) -> AfaStatus {
    guard(|| copy_to(deref(kernel, "kernel")?.0.weights(), out, len))
}

/// # Safety
/// `kernel` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn afa_kernel_free(kernel: *mut AfaKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

/// Efficient attribution for `kernel`; writes `n` values to `phi`.
///
/// # Safety
/// Handles must be live and `phi` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn afa_solve_constrained(
    game: *const AfaGame,
    kernel: *const AfaKernel,
    phi: *mut f64,
    len: usize,
) -> AfaStatus {
    guard(|| {
        let a = afa_core::solver::solve_constrained(&deref(game, "game")?.0, &deref(kernel, "kernel")?.0)?;
        copy_to(&a.phi, phi, len)
    })
}

/// Attribution without the efficiency constraint; writes `n` values to `phi`.
///
/// # Safety
/// Handles must be live and `phi` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn afa_solve_unconstrained(
    game: *const AfaGame,
    kernel: *const AfaKernel,
    phi: *mut f64,
    len: usize,
) -> AfaStatus {
    guard(|| {
        let (a, _) =
            afa_core::solver::solve_unconstrained(&deref(game, "game")?.0, &deref(kernel, "kernel")?.0)?;
        copy_to(&a.phi, phi, len)
    })
}

/// # Safety
/// `game` must be live and `phi` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn afa_shapley(game: *const AfaGame, phi: *mut f64, len: usize) -> AfaStatus {
    guard(|| copy_to(&afa_core::reference::shapley(&deref(game, "game")?.0).phi, phi, len))
}
