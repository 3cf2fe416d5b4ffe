//! C ABI for `csr-spacings`.
//!
//! Kernels and patterns are opaque handles created by `*_new` functions and
//! released with the matching `*_free`. Every fallible call returns a
//! [`CsrStatus`]; outputs are written through pointer arguments only on
//! success. After a failure, [`csr_last_error_message`] describes it on the
//! calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::BufReader;
use std::panic::{catch_unwind, AssertUnwindSafe};

use csr_spacings::gfun::{self, GFunction};
use csr_spacings::moments::{self, Method, MomentSet};
use csr_spacings::pattern::{self, Point, PointPattern, Window};
use csr_spacings::sim::{self, Sampler};
use csr_spacings::spacings::compute_grid;
use csr_spacings::stat::{self, Sided};
use csr_spacings::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsrStatus {
    Ok = 0,
    ParseError = 1,
    OutsideWindow = 2,
    EmptyPattern = 3,
    InvalidWindow = 4,
    CoordinateDomain = 5,
    NonUnitWindow = 6,
    UnknownKernel = 7,
    DegenerateSpacing = 8,
    NumericalDomain = 9,
    NumericalConsistency = 10,
    DegenerateStatistic = 11,
    InvalidArgument = 12,
    Infeasible = 13,
    IoError = 14,
    NullPointer = 15,
    Panic = 16,
}

impl From<&Error> for CsrStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Parse { .. } => CsrStatus::ParseError,
            Error::OutsideWindow { .. } => CsrStatus::OutsideWindow,
            Error::EmptyPattern => CsrStatus::EmptyPattern,
            Error::InvalidWindow(_) => CsrStatus::InvalidWindow,
            Error::CoordinateDomain(_) => CsrStatus::CoordinateDomain,
            Error::NonUnitWindow => CsrStatus::NonUnitWindow,
            Error::UnknownKernel { .. } => CsrStatus::UnknownKernel,
            Error::DegenerateSpacing { .. } => CsrStatus::DegenerateSpacing,
            Error::NumericalDomain { .. } => CsrStatus::NumericalDomain,
            Error::NumericalConsistency { .. } => CsrStatus::NumericalConsistency,
            Error::DegenerateStatistic(_) => CsrStatus::DegenerateStatistic,
            Error::InvalidArgument(_) => CsrStatus::InvalidArgument,
            Error::Infeasible { .. } => CsrStatus::Infeasible,
            Error::Io(_) => CsrStatus::IoError,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsrMethod {
    ClosedForm = 0,
    Quadrature = 1,
    MonteCarlo = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsrSided {
    Two = 0,
    Upper = 1,
    Lower = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsrSampler {
    Moran = 0,
    Uniform = 1,
}

/// Limiting moments of a kernel; `sigma2 = 2(eta − c²)`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsrMomentSet {
    pub mu: f64,
    pub eta: f64,
    pub c: f64,
    pub sigma2: f64,
    pub method: CsrMethod,
    pub err: f64,
    pub degenerate: bool,
}

/// Fewer points than the asymptotic approximation is meant for.
pub const CSR_WARN_SMALL_SAMPLE: u32 = 1;
/// The kernel violates one of the regularity conditions.
pub const CSR_WARN_KERNEL_CONDITIONS: u32 = 2;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsrTestResult {
    pub statistic: f64,
    /// Spacings per axis, one more than the point count.
    pub n: usize,
    pub z: f64,
    pub p_asymptotic: f64,
    pub moments: CsrMomentSet,
    /// Bitwise OR of `CSR_WARN_*` flags.
    pub warnings: u32,
}

/// Opaque kernel handle.
pub struct CsrKernel(GFunction);

/// Opaque point pattern handle.
pub struct CsrPattern(PointPattern);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(e: Error) -> CsrStatus {
    set_last_error(&e.to_string());
    CsrStatus::from(&e)
}

/// Runs `f`, converting errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), CsrStatus>>(f: F) -> CsrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            CsrStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => {
            set_last_error("internal panic");
            CsrStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), CsrStatus> {
    if p.is_null() {
        set_last_error(&format!("{what} is null"));
        Err(CsrStatus::NullPointer)
    } else {
        Ok(())
    }
}

fn to_c(m: &MomentSet) -> CsrMomentSet {
    CsrMomentSet {
        mu: m.mu,
        eta: m.eta,
        c: m.c,
        sigma2: m.sigma2,
        method: match m.method {
            Method::ClosedForm => CsrMethod::ClosedForm,
            Method::Quadrature => CsrMethod::Quadrature,
            Method::MonteCarlo => CsrMethod::MonteCarlo,
        },
        err: m.err,
        degenerate: m.degenerate,
    }
}

/// `sigma2` and `degenerate` are recomputed from `mu`, `eta` and `c`.
fn from_c(m: &CsrMomentSet) -> Result<MomentSet, CsrStatus> {
    let method = match m.method {
        CsrMethod::ClosedForm => Method::ClosedForm,
        CsrMethod::Quadrature => Method::Quadrature,
        CsrMethod::MonteCarlo => Method::MonteCarlo,
    };
    MomentSet::new(m.mu, m.eta, m.c, method, m.err).map_err(fail)
}

fn window(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Window, CsrStatus> {
    Window::new(x0, x1, y0, y1).map_err(fail)
}

/// Message for the last failed call on this thread, empty after a
/// successful one. Valid until the next call into this library on the same
/// thread.
#[no_mangle]
pub extern "C" fn csr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Static snake_case name of a status code.
#[no_mangle]
pub extern "C" fn csr_status_name(status: CsrStatus) -> *const c_char {
    let name: &'static CStr = match status {
        CsrStatus::Ok => c"ok",
        CsrStatus::ParseError => c"parse_error",
        CsrStatus::OutsideWindow => c"outside_window",
        CsrStatus::EmptyPattern => c"empty_pattern",
        CsrStatus::InvalidWindow => c"invalid_window",
        CsrStatus::CoordinateDomain => c"coordinate_domain",
        CsrStatus::NonUnitWindow => c"non_unit_window",
        CsrStatus::UnknownKernel => c"unknown_kernel",
        CsrStatus::DegenerateSpacing => c"degenerate_spacing",
        CsrStatus::NumericalDomain => c"numerical_domain",
        CsrStatus::NumericalConsistency => c"numerical_consistency",
        CsrStatus::DegenerateStatistic => c"degenerate_statistic",
        CsrStatus::InvalidArgument => c"invalid_argument",
        CsrStatus::Infeasible => c"infeasible",
        CsrStatus::IoError => c"io_error",
        CsrStatus::NullPointer => c"null_pointer",
        CsrStatus::Panic => c"panic",
    };
    name.as_ptr()
}

/// Looks up a built-in kernel by name.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn csr_kernel_new(
    name: *const c_char,
    out: *mut *mut CsrKernel,
) -> CsrStatus {
    guard(|| {
        non_null(name, "name")?;
        non_null(out, "out")?;
        let name = CStr::from_ptr(name)
            .to_str()
            .map_err(|_| fail(Error::InvalidArgument("kernel name is not UTF-8".into())))?;
        let g = gfun::builtin(name).map_err(fail)?;
        *out = Box::into_raw(Box::new(CsrKernel(g)));
        Ok(())
    })
}

/// # Safety
/// `kernel` must come from [`csr_kernel_new`] and not be freed already.
/// Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn csr_kernel_free(kernel: *mut CsrKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

/// # Safety
/// `kernel` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn csr_kernel_evaluate(
    kernel: *const CsrKernel,
    t: f64,
    out: *mut f64,
) -> CsrStatus {
    guard(|| {
        non_null(kernel, "kernel")?;
        non_null(out, "out")?;
        *out = (*kernel).0.evaluate(t).map_err(fail)?;
        Ok(())
    })
}

/// Closed-form moments when known, otherwise quadrature with `nodes`
/// points per axis.
///
/// # Safety
/// `kernel` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn csr_moments_compute(
    kernel: *const CsrKernel,
    nodes: usize,
    out: *mut CsrMomentSet,
) -> CsrStatus {
    guard(|| {
        non_null(kernel, "kernel")?;
        non_null(out, "out")?;
        let g = &(*kernel).0;
        if nodes < moments::MIN_NODES && g.closed_moments.is_none() {
            return Err(fail(Error::InvalidArgument(format!(
                "quadrature needs at least {} nodes, got {nodes}",
                moments::MIN_NODES
            ))));
        }
        *out = to_c(&moments::compute_moments(g, nodes).map_err(fail)?);
        Ok(())
    })
}

/// Monte Carlo moment estimate from `samples` exponential triples.
///
/// # Safety
/// `kernel` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn csr_moments_mc_oracle(
    kernel: *const CsrKernel,
    samples: u64,
    seed: u64,
    out: *mut CsrMomentSet,
) -> CsrStatus {
    guard(|| {
        non_null(kernel, "kernel")?;
        non_null(out, "out")?;
        *out = to_c(&moments::mc_oracle(&(*kernel).0, samples, seed).map_err(fail)?);
        Ok(())
    })
}

/// Builds a pattern from `len` coordinate pairs inside the window
/// `[x0, x1] × [y0, y1]`.
///
/// # Safety
/// `xs` and `ys` must each hold `len` readable doubles and `out` be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn csr_pattern_new(
    xs: *const f64,
    ys: *const f64,
    len: usize,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    out: *mut *mut CsrPattern,
) -> CsrStatus {
    guard(|| {
        non_null(out, "out")?;
        if len > 0 {
            non_null(xs, "xs")?;
            non_null(ys, "ys")?;
        }
        let w = window(x0, x1, y0, y1)?;
        let points = if len == 0 {
            Vec::new()
        } else {
            let xs = std::slice::from_raw_parts(xs, len);
            let ys = std::slice::from_raw_parts(ys, len);
            xs.iter().zip(ys).map(|(&x, &y)| Point::new(x, y)).collect()
        };
        let p = PointPattern::new(w, points).map_err(fail)?;
        *out = Box::into_raw(Box::new(CsrPattern(p)));
        Ok(())
    })
}

/// Reads a two-column CSV file of coordinates.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn csr_pattern_load_csv(
    path: *const c_char,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    out: *mut *mut CsrPattern,
) -> CsrStatus {
    guard(|| {
        non_null(path, "path")?;
        non_null(out, "out")?;
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| fail(Error::InvalidArgument("path is not UTF-8".into())))?;
        let w = window(x0, x1, y0, y1)?;
        let file = File::open(path).map_err(|e| fail(Error::Io(format!("{path}: {e}"))))?;
        let p = pattern::load_pattern(BufReader::new(file), w).map_err(fail)?;
        *out = Box::into_raw(Box::new(CsrPattern(p)));
        Ok(())
    })
}

/// # Safety
/// `pattern` must come from a pattern constructor and not be freed
/// already. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn csr_pattern_free(pattern: *mut CsrPattern) {
    if !pattern.is_null() {
        drop(Box::from_raw(pattern));
    }
}

/// Number of points, or 0 for a null handle.
///
/// # Safety
/// `pattern` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn csr_pattern_len(pattern: *const CsrPattern) -> usize {
    if pattern.is_null() {
        0
    } else {
        (*pattern).0.len()
    }
}

/// Statistic `Σ g(n² A_ij)` of the pattern rescaled to the unit square.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn csr_v2_statistic(
    pattern: *const CsrPattern,
    kernel: *const CsrKernel,
    out: *mut f64,
) -> CsrStatus {
    guard(|| {
        non_null(pattern, "pattern")?;
        non_null(kernel, "kernel")?;
        non_null(out, "out")?;
        let grid = compute_grid(&pattern::rescale_to_unit(&(*pattern).0)).map_err(fail)?;
        *out = stat::v2_statistic(&grid, &(*kernel).0).map_err(fail)?;
        Ok(())
    })
}

/// Asymptotic normal test of the pattern.
///
/// # Safety
/// Handles and `moments` must be valid and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn csr_asymptotic_test(
    pattern: *const CsrPattern,
    kernel: *const CsrKernel,
    moments: *const CsrMomentSet,
    sided: CsrSided,
    out: *mut CsrTestResult,
) -> CsrStatus {
    guard(|| {
        non_null(pattern, "pattern")?;
        non_null(kernel, "kernel")?;
        non_null(moments, "moments")?;
        non_null(out, "out")?;
        let m = from_c(&*moments)?;
        let sided = match sided {
            CsrSided::Two => Sided::Two,
            CsrSided::Upper => Sided::Upper,
            CsrSided::Lower => Sided::Lower,
        };
        let r = stat::asymptotic_test(&(*pattern).0, &(*kernel).0, &m, sided).map_err(fail)?;
        let warnings = r.warnings.iter().fold(0, |acc, w| {
            acc | match w.as_str() {
                "small-sample" => CSR_WARN_SMALL_SAMPLE,
                "kernel-conditions" => CSR_WARN_KERNEL_CONDITIONS,
                _ => 0,
            }
        });
        *out = CsrTestResult {
            statistic: r.statistic,
            n: r.n,
            z: r.z,
            p_asymptotic: r.p_asymptotic,
            moments: to_c(&r.moments),
            warnings,
        };
        Ok(())
    })
}

/// Add-one Monte Carlo p-value from `replicates` null statistics.
///
/// # Safety
/// Handles and `moments` must be valid and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn csr_mc_pvalue(
    pattern: *const CsrPattern,
    kernel: *const CsrKernel,
    moments: *const CsrMomentSet,
    replicates: usize,
    seed: u64,
    sampler: CsrSampler,
    out: *mut f64,
) -> CsrStatus {
    guard(|| {
        non_null(pattern, "pattern")?;
        non_null(kernel, "kernel")?;
        non_null(moments, "moments")?;
        non_null(out, "out")?;
        let m = from_c(&*moments)?;
        let sampler = match sampler {
            CsrSampler::Moran => Sampler::Moran,
            CsrSampler::Uniform => Sampler::Uniform,
        };
        *out = sim::mc_pvalue(&(*pattern).0, &(*kernel).0, &m, replicates, seed, sampler)
            .map_err(fail)?;
        Ok(())
    })
}
