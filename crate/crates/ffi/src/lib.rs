//! C ABI for momentlab.
//!
//! Handles are opaque heap objects created by `ml_*_parse`/`ml_*_compute`
//! functions and released with the matching `ml_*_free`. Every fallible
//! function returns an [`MlStatus`]; on failure a message is kept per thread
//! and can be read with [`ml_last_error_message`]. Results are written
//! through out-pointers only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use momentlab::discretize::DiscretizationConfig;
use momentlab::eigensolve::{spectrum_below, Spectrum};
use momentlab::heat_trace::golden_thompson_check;
use momentlab::moments::{lt_check, riesz_mean};
use momentlab::oscillator_exact::{p_derivative, DerivativeSide, Sign};
use momentlab::potentials::{classical_constant, parse_potential, PotentialKind, PotentialSpec};
use momentlab::quadrature::QuadratureConfig;
use momentlab::Error;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MlStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Invalid parameters or potential description.
    Config = 3,
    /// Parameters outside the domain of the requested quantity.
    Domain = 4,
    /// A numerical method failed to reach its tolerance.
    Numerical = 5,
    /// The caller's buffer is too small; the required length was written.
    BufferTooSmall = 6,
    /// An internal panic was caught at the boundary.
    Panic = 7,
}

/// A potential `V` on `R^d`.
pub struct MlPotential {
    spec: PotentialSpec,
}

/// Eigenvalues of one discretized operator.
pub struct MlSpectrum {
    spectrum: Spectrum,
}

/// Lieb-Thirring comparison at one coupling.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MlLtResult {
    pub scaled_moment: f64,
    pub classical_bound: f64,
    pub ratio: f64,
    pub bound_states: usize,
    pub boundary_limited: bool,
}

/// Golden-Thompson comparison at one coupling and time.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MlGoldenThompson {
    pub trace: f64,
    pub tail_bound: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// Which one-sided quotient to use for the oscillator derivative.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MlSide {
    Central = 0,
    Left = 1,
    Right = 2,
}

/// Derivative of the exact oscillator moment; `sign` is -1, 0 or 1.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MlDerivative {
    pub value: f64,
    pub error_estimate: f64,
    pub sign: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> MlStatus {
    match e {
        Error::AtAlpha { source, .. } => status_of(source),
        Error::Config(_) | Error::Parse(_) | Error::Io { .. } | Error::Csv(_) | Error::Json(_) => MlStatus::Config,
        Error::Domain(_) | Error::BranchCrossing { .. } | Error::Breakpoint { .. } | Error::CutoffTooLow { .. } => {
            MlStatus::Domain
        }
        _ => MlStatus::Numerical,
    }
}

fn fail(status: MlStatus, message: impl Into<String>) -> MlStatus {
    set_last_error(message.into());
    status
}

/// Runs `f` behind a panic guard and records any error message.
fn guard<F: FnOnce() -> Result<(), MlStatus>>(f: F) -> MlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MlStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(MlStatus::Panic, "internal panic"),
    }
}

fn lib<T>(r: momentlab::Result<T>) -> Result<T, MlStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), MlStatus> {
    if p.is_null() {
        Err(fail(MlStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

/// # Safety
/// `p` must be null-checked and point to a live handle.
unsafe fn potential<'a>(p: *const MlPotential) -> Result<&'a PotentialSpec, MlStatus> {
    non_null(p, "potential")?;
    Ok(&(*p).spec)
}

/// `points == 0` or `half_width <= 0` select the standard box for the
/// potential's kind.
fn discretization(spec: &PotentialSpec, half_width: f64, points: usize) -> Result<DiscretizationConfig, MlStatus> {
    let standard = DiscretizationConfig::standard_for(spec);
    let half_width = if half_width > 0.0 { half_width } else { standard.half_width };
    let points = if points > 0 { points } else { standard.points };
    lib(DiscretizationConfig::new(half_width, points))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ml_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buffer`.
///
/// Writes the message length (excluding the NUL) to `length` when it is not
/// null. Returns `BufferTooSmall` when `capacity` cannot hold the message and
/// its terminator; an empty string is written when there is no error.
///
/// # Safety
/// `buffer` must be valid for `capacity` bytes; `length` may be null.
#[no_mangle]
pub unsafe extern "C" fn ml_last_error_message(buffer: *mut c_char, capacity: usize, length: *mut usize) -> MlStatus {
    let message = LAST_ERROR.with(|e| e.borrow().clone()).unwrap_or_default();
    let bytes = message.as_bytes_with_nul();
    if !length.is_null() {
        *length = bytes.len() - 1;
    }
    if buffer.is_null() || capacity < bytes.len() {
        return MlStatus::BufferTooSmall;
    }
    ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buffer, bytes.len());
    MlStatus::Ok
}

/// Parses a potential such as `"sech2:g=6"` in `dimension` dimensions.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ml_potential_parse(text: *const c_char, dimension: usize, out: *mut *mut MlPotential) -> MlStatus {
    guard(|| {
        non_null(text, "text")?;
        non_null(out, "out")?;
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|_| fail(MlStatus::InvalidUtf8, "potential text is not UTF-8"))?;
        let spec = lib(parse_potential(text, dimension))?;
        *out = Box::into_raw(Box::new(MlPotential { spec }));
        Ok(())
    })
}

/// Releases a potential; null is ignored.
///
/// # Safety
/// `p` must come from [`ml_potential_parse`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ml_potential_free(p: *mut MlPotential) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Dimension `d` of the potential.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ml_potential_dimension(p: *const MlPotential, out: *mut usize) -> MlStatus {
    guard(|| {
        let spec = potential(p)?;
        non_null(out, "out")?;
        *out = spec.dimension();
        Ok(())
    })
}

/// Evaluates `V` at one point `x` of length `d`.
///
/// # Safety
/// `x` must hold `dimension` values and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn ml_potential_evaluate(p: *const MlPotential, x: *const f64, dimension: usize, out: *mut f64) -> MlStatus {
    guard(|| {
        let spec = potential(p)?;
        non_null(x, "x")?;
        non_null(out, "out")?;
        let point = std::slice::from_raw_parts(x, dimension);
        *out = lib(spec.evaluate(point))?;
        Ok(())
    })
}

/// `1` for wells (`V <= 0`, `V -> 0`), `2` for confining potentials, `0`
/// otherwise.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ml_potential_kind(p: *const MlPotential, out: *mut i32) -> MlStatus {
    guard(|| {
        let spec = potential(p)?;
        non_null(out, "out")?;
        *out = match spec.kind() {
            PotentialKind::Decaying => 1,
            PotentialKind::Confining => 2,
            PotentialKind::Unclassified => 0,
        };
        Ok(())
    })
}

/// Classical constant `L^cl_{σ,d}`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ml_classical_constant(sigma: f64, dimension: usize, out: *mut f64) -> MlStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = lib(classical_constant(sigma, dimension))?;
        Ok(())
    })
}

/// Eigenvalues below `cutoff` of `-αΔ + V` on `[-L, L]` with `points`
/// interior points per axis (0 selects the standard box).
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ml_spectrum_compute(
    p: *const MlPotential,
    alpha: f64,
    cutoff: f64,
    half_width: f64,
    points: usize,
    out: *mut *mut MlSpectrum,
) -> MlStatus {
    guard(|| {
        let spec = potential(p)?;
        non_null(out, "out")?;
        let cfg = discretization(spec, half_width, points)?;
        let spectrum = lib(spectrum_below(spec, alpha, &cfg, cutoff, false))?;
        *out = Box::into_raw(Box::new(MlSpectrum { spectrum }));
        Ok(())
    })
}

/// Releases a spectrum; null is ignored.
///
/// # Safety
/// `s` must come from [`ml_spectrum_compute`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ml_spectrum_free(s: *mut MlSpectrum) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of eigenvalues held.
///
/// # Safety
/// `s` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ml_spectrum_len(s: *const MlSpectrum, out: *mut usize) -> MlStatus {
    guard(|| {
        non_null(s, "spectrum")?;
        non_null(out, "out")?;
        *out = (*s).spectrum.len();
        Ok(())
    })
}

/// Copies the ascending eigenvalues into `buffer`. `length` receives the
/// count; `BufferTooSmall` is returned when `capacity` is insufficient.
///
/// # Safety
/// `buffer` must be valid for `capacity` doubles; `length` writable.
#[no_mangle]
pub unsafe extern "C" fn ml_spectrum_eigenvalues(
    s: *const MlSpectrum,
    buffer: *mut f64,
    capacity: usize,
    length: *mut usize,
) -> MlStatus {
    guard(|| {
        non_null(s, "spectrum")?;
        non_null(length, "length")?;
        let values = (*s).spectrum.eigenvalues();
        *length = values.len();
        if values.len() > capacity {
            return Err(fail(
                MlStatus::BufferTooSmall,
                format!("need room for {} eigenvalues, got {capacity}", values.len()),
            ));
        }
        if !values.is_empty() {
            non_null(buffer, "buffer")?;
            ptr::copy_nonoverlapping(values.as_ptr(), buffer, values.len());
        }
        Ok(())
    })
}

/// Whether the shallowest state reaches the box walls.
///
/// # Safety
/// `s` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ml_spectrum_boundary_limited(s: *const MlSpectrum, out: *mut bool) -> MlStatus {
    guard(|| {
        non_null(s, "spectrum")?;
        non_null(out, "out")?;
        *out = (*s).spectrum.boundary_limited();
        Ok(())
    })
}

/// Riesz mean `Σ (z - E_j)₊^σ` of the held eigenvalues.
///
/// # Safety
/// `s` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ml_riesz_mean(s: *const MlSpectrum, sigma: f64, z: f64, out: *mut f64) -> MlStatus {
    guard(|| {
        non_null(s, "spectrum")?;
        non_null(out, "out")?;
        *out = lib(riesz_mean(&(*s).spectrum, sigma, z))?;
        Ok(())
    })
}

/// Scaled moment against the classical bound for `σ >= 2`.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ml_lt_check(
    p: *const MlPotential,
    sigma: f64,
    alpha: f64,
    half_width: f64,
    points: usize,
    out: *mut MlLtResult,
) -> MlStatus {
    guard(|| {
        let spec = potential(p)?;
        non_null(out, "out")?;
        let cfg = discretization(spec, half_width, points)?;
        let r = lib(lt_check(spec, sigma, alpha, &cfg, &QuadratureConfig::default()))?;
        *out = MlLtResult {
            scaled_moment: r.scaled_moment,
            classical_bound: r.classical_bound,
            ratio: r.ratio,
            bound_states: r.bound_states,
            boundary_limited: r.boundary_limited,
        };
        Ok(())
    })
}

/// Heat trace against the Golden-Thompson bound for a confining potential.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ml_golden_thompson(
    p: *const MlPotential,
    alpha: f64,
    t: f64,
    half_width: f64,
    points: usize,
    out: *mut MlGoldenThompson,
) -> MlStatus {
    guard(|| {
        let spec = potential(p)?;
        non_null(out, "out")?;
        let cfg = discretization(spec, half_width, points)?;
        let r = lib(golden_thompson_check(spec, alpha, t, &cfg, &QuadratureConfig::default()))?;
        *out = MlGoldenThompson {
            trace: r.trace,
            tail_bound: r.tail_bound,
            bound: r.bound,
            ratio: r.ratio,
        };
        Ok(())
    })
}

/// Derivative in `α` of the exact oscillator moment `α^{d/2} Σ (1-E)₊^σ`.
/// `step` is the initial Richardson step; pass 0 for `1e-3 α`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ml_oscillator_derivative(
    dimension: usize,
    sigma: f64,
    alpha: f64,
    step: f64,
    side: MlSide,
    out: *mut MlDerivative,
) -> MlStatus {
    guard(|| {
        non_null(out, "out")?;
        let side = match side {
            MlSide::Central => DerivativeSide::Central,
            MlSide::Left => DerivativeSide::Left,
            MlSide::Right => DerivativeSide::Right,
        };
        let step = if step > 0.0 { step } else { 1e-3 * alpha };
        let r = lib(p_derivative(dimension, sigma, alpha, step, side))?;
        *out = MlDerivative {
            value: r.value,
            error_estimate: r.error_estimate,
            sign: match r.sign {
                Sign::Positive => 1,
                Sign::Zero => 0,
                Sign::Negative => -1,
            },
        };
        Ok(())
    })
}
