//! C interface to `elliptic-cauchy`.
//!
//! Problems, decompositions and kernels are opaque handles created by
//! `*_from_json` or [`ec_decompose`] and released by the matching `*_free`.
//! Every fallible call returns an [`EcStatus`]; on failure the message is
//! available from [`ec_last_error_message`] on the same thread. Panics never
//! cross the boundary and are reported as [`EcStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;

use elliptic_cauchy::document::{parse_json, parse_kernel, parse_problem};
use elliptic_cauchy::gauss_decomposition::{
    decompose_closed_form, decompose_ldu, decompose_peeling, determinant_closed_form, ldu_target,
    minor_frobenius,
};
use elliptic_cauchy::matrix_builder::build_cauchy_like;
use elliptic_cauchy::oracle::reconstruct_and_report;
use elliptic_cauchy::{
    CauchyProblem, DecompositionResult, Error, EvalOptions, SigmaKernel, TriangularFactor,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SingularDifference = 3,
    LambdaChainSingular = 4,
    NearLattice = 5,
    Range = 6,
    SeriesNotConverged = 7,
    Breakdown = 8,
    IndexSet = 9,
    BufferTooSmall = 10,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EcMethod {
    ClosedForm = 0,
    Peeling = 1,
    Ldu = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EcFactor {
    Upper = 0,
    Diagonal = 1,
    Lower = 2,
}

// Enums arrive as plain integers so an out-of-range value from C is an
// error rather than undefined behaviour.
fn method_from(v: u32) -> Result<EcMethod, Failure> {
    match v {
        0 => Ok(EcMethod::ClosedForm),
        1 => Ok(EcMethod::Peeling),
        2 => Ok(EcMethod::Ldu),
        _ => Err(Failure::Lib(Error::InvalidArgument(format!(
            "unknown method {v}"
        )))),
    }
}

fn factor_from(v: u32) -> Result<EcFactor, Failure> {
    match v {
        0 => Ok(EcFactor::Upper),
        1 => Ok(EcFactor::Diagonal),
        2 => Ok(EcFactor::Lower),
        _ => Err(Failure::Lib(Error::InvalidArgument(format!(
            "unknown factor {v}"
        )))),
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EcComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for EcComplex {
    fn from(z: Complex64) -> Self {
        EcComplex { re: z.re, im: z.im }
    }
}

impl From<EcComplex> for Complex64 {
    fn from(z: EcComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

/// A parsed problem document.
pub struct EcProblem {
    inner: CauchyProblem,
}

/// Factors of a decomposition with their reconstruction residual.
pub struct EcDecomposition {
    inner: DecompositionResult,
    residual: f64,
}

/// A sigma kernel evaluated with default options.
pub struct EcKernel {
    inner: SigmaKernel,
    opts: EvalOptions,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = c);
}

fn status_of(err: &Error) -> EcStatus {
    match err {
        Error::InvalidArgument(_) => EcStatus::InvalidArgument,
        Error::SingularDifference { .. } => EcStatus::SingularDifference,
        Error::LambdaChainSingular { .. } => EcStatus::LambdaChainSingular,
        Error::NearLattice { .. } => EcStatus::NearLattice,
        Error::Range(_) => EcStatus::Range,
        Error::SeriesNotConverged { .. } => EcStatus::SeriesNotConverged,
        Error::Breakdown { .. } => EcStatus::Breakdown,
        Error::IndexSet(_) => EcStatus::IndexSet,
    }
}

enum Failure {
    Null(&'static str),
    Buffer { needed: usize, given: usize },
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> EcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error(String::new());
            EcStatus::Ok
        }
        Ok(Err(Failure::Null(name))) => {
            set_last_error(format!("{name} is null"));
            EcStatus::NullPointer
        }
        Ok(Err(Failure::Buffer { needed, given })) => {
            set_last_error(format!(
                "output buffer holds {given} entries, {needed} needed"
            ));
            EcStatus::BufferTooSmall
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            EcStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn read_str<'a>(p: *const c_char, name: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure::Lib(Error::InvalidArgument(format!("{name}: not UTF-8: {e}"))))
}

unsafe fn write_out<T>(out: *mut T, value: T, name: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(name));
    }
    out.write(value);
    Ok(())
}

unsafe fn fill(
    out: *mut EcComplex,
    len: usize,
    values: impl ExactSizeIterator<Item = Complex64>,
) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    if len < values.len() {
        return Err(Failure::Buffer {
            needed: values.len(),
            given: len,
        });
    }
    let dst = std::slice::from_raw_parts_mut(out, values.len());
    for (d, v) in dst.iter_mut().zip(values) {
        *d = v.into();
    }
    Ok(())
}

/// Message of the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next call into this library on the thread.
#[no_mangle]
pub extern "C" fn ec_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ec_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a problem document (the same JSON the command-line tool reads).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ec_problem_from_json(
    json: *const c_char,
    out: *mut *mut EcProblem,
) -> EcStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        out.write(ptr::null_mut());
        let text = read_str(json, "json")?;
        let inner = parse_problem(&parse_json(text)?)?;
        out.write(Box::into_raw(Box::new(EcProblem { inner })));
        Ok(())
    })
}

/// # Safety
/// `problem` must be null or a handle from [`ec_problem_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ec_problem_free(problem: *mut EcProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// # Safety
/// `problem` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ec_problem_size(problem: *const EcProblem, out: *mut usize) -> EcStatus {
    guard(|| {
        let p = borrow(problem, "problem")?;
        write_out(out, p.inner.n(), "out")
    })
}

/// Writes the `n × n` Cauchy-like matrix row-major into `out`, which must
/// hold at least `n²` entries.
///
/// # Safety
/// `problem` must be a live handle and `out` must point to `len` writable entries.
#[no_mangle]
pub unsafe extern "C" fn ec_build_matrix(
    problem: *const EcProblem,
    out: *mut EcComplex,
    len: usize,
) -> EcStatus {
    guard(|| {
        let p = borrow(problem, "problem")?;
        let m = build_cauchy_like(&p.inner)?;
        fill(out, len, m.entries().iter().copied())
    })
}

/// Decomposes the problem with `method`, an [`EcMethod`] value, and
/// measures the reconstruction residual against the matrix the method
/// targets.
///
/// # Safety
/// `problem` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ec_decompose(
    problem: *const EcProblem,
    method: u32,
    out: *mut *mut EcDecomposition,
) -> EcStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        out.write(ptr::null_mut());
        let p = &borrow(problem, "problem")?.inner;
        let (mut inner, target) = match method_from(method)? {
            EcMethod::ClosedForm => (decompose_closed_form(p)?, build_cauchy_like(p)?),
            EcMethod::Peeling => (decompose_peeling(p)?, build_cauchy_like(p)?),
            EcMethod::Ldu => (decompose_ldu(p)?, ldu_target(p)?),
        };
        let residual = reconstruct_and_report(&mut inner, &target)?.frobenius_relative;
        out.write(Box::into_raw(Box::new(EcDecomposition { inner, residual })));
        Ok(())
    })
}

/// # Safety
/// `decomposition` must be null or a handle from [`ec_decompose`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ec_decomposition_free(decomposition: *mut EcDecomposition) {
    if !decomposition.is_null() {
        drop(Box::from_raw(decomposition));
    }
}

/// Writes one factor, an [`EcFactor`] value, as a dense row-major `n × n`
/// array, structural zeros included.
///
/// # Safety
/// `decomposition` must be a live handle and `out` must point to `len` writable entries.
#[no_mangle]
pub unsafe extern "C" fn ec_decomposition_factor(
    decomposition: *const EcDecomposition,
    factor: u32,
    out: *mut EcComplex,
    len: usize,
) -> EcStatus {
    guard(|| {
        let d = &borrow(decomposition, "decomposition")?.inner;
        let f: &TriangularFactor = match factor_from(factor)? {
            EcFactor::Upper => &d.upper,
            EcFactor::Diagonal => &d.diagonal,
            EcFactor::Lower => &d.lower,
        };
        let n = f.n();
        fill(out, len, (0..n * n).map(|k| f.get(k / n, k % n)))
    })
}

/// Relative Frobenius residual of the factor product.
///
/// # Safety
/// `decomposition` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ec_decomposition_residual(
    decomposition: *const EcDecomposition,
    out: *mut f64,
) -> EcStatus {
    guard(|| {
        let d = borrow(decomposition, "decomposition")?;
        write_out(out, d.residual, "out")
    })
}

/// Closed-form determinant of the Cauchy-like matrix.
///
/// # Safety
/// `problem` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ec_determinant(
    problem: *const EcProblem,
    out: *mut EcComplex,
) -> EcStatus {
    guard(|| {
        let p = borrow(problem, "problem")?;
        write_out(out, determinant_closed_form(&p.inner)?.into(), "out")
    })
}

/// Closed-form minor on 0-based `rows` and `cols`, each of length `k`.
///
/// # Safety
/// `problem` must be a live handle, `rows` and `cols` must point to `k`
/// readable indices, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ec_minor(
    problem: *const EcProblem,
    rows: *const usize,
    cols: *const usize,
    k: usize,
    out: *mut EcComplex,
) -> EcStatus {
    guard(|| {
        let p = borrow(problem, "problem")?;
        if k > 0 && (rows.is_null() || cols.is_null()) {
            return Err(Failure::Null(if rows.is_null() { "rows" } else { "cols" }));
        }
        let (rows, cols) = if k == 0 {
            (&[][..], &[][..])
        } else {
            (
                std::slice::from_raw_parts(rows, k),
                std::slice::from_raw_parts(cols, k),
            )
        };
        write_out(out, minor_frobenius(&p.inner, rows, cols)?.into(), "out")
    })
}

/// Parses a kernel object such as `{"variant":"elliptic","omega1":[0.5,0],"tau":[0,1]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ec_kernel_from_json(
    json: *const c_char,
    out: *mut *mut EcKernel,
) -> EcStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        out.write(ptr::null_mut());
        let text = read_str(json, "json")?;
        let inner = parse_kernel(&parse_json(text)?, "kernel")?;
        let kernel = EcKernel {
            inner,
            opts: EvalOptions::default(),
        };
        out.write(Box::into_raw(Box::new(kernel)));
        Ok(())
    })
}

/// # Safety
/// `kernel` must be null or a handle from [`ec_kernel_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ec_kernel_free(kernel: *mut EcKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

/// # Safety
/// `kernel` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ec_kernel_sigma(
    kernel: *const EcKernel,
    z: EcComplex,
    out: *mut EcComplex,
) -> EcStatus {
    guard(|| {
        let k = borrow(kernel, "kernel")?;
        write_out(out, k.inner.sigma(z.into(), &k.opts)?.into(), "out")
    })
}
