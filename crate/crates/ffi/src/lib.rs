//! C ABI for `oneroot`.
//!
//! States and certificates are opaque handles created and destroyed through
//! this interface. Every fallible call returns an [`OrStatus`] and writes its
//! result through an out-pointer; on failure [`or_last_error`] describes the
//! problem. Complex arrays are interleaved `re, im` doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nalgebra::DMatrix;
use oneroot::convexroof::{
    closed_form, oracle_minimize, wootters_mixed_concurrence, OptimizerConfig,
};
use oneroot::io::certificate_json;
use oneroot::qstate::{eigen_decompose_rank2, make_rank_two};
use oneroot::zeropolytope::{certify_state, RootCertificate};
use oneroot::{BlochVector, DensityMatrix, Error, Measure, PureState, RankTwoState, C64};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrStatus {
    Ok = 0,
    /// The state is valid but not one-root.
    NotOneRoot = 1,
    InvalidInput = 2,
    DimensionMismatch = 3,
    /// Every state in the range has zero entanglement.
    RangeVanishes = 4,
    Numerical = 5,
    NullPointer = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrMeasure {
    Concurrence = 0,
    SqrtThreeTangle = 1,
}

impl From<OrMeasure> for Measure {
    fn from(m: OrMeasure) -> Measure {
        match m {
            OrMeasure::Concurrence => Measure::Concurrence,
            OrMeasure::SqrtThreeTangle => Measure::SqrtThreeTangle,
        }
    }
}

/// Rank-2 density matrix.
pub struct OrState {
    inner: RankTwoState,
}

/// Root certificate together with the basis it was computed in.
pub struct OrCertificate {
    cert: RootCertificate,
    basis: RankTwoState,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> OrStatus {
    match e {
        Error::DimensionMismatch(_)
        | Error::WrongQubitCount { .. }
        | Error::IndexOutOfRange { .. } => OrStatus::DimensionMismatch,
        Error::EntireRangeVanishes | Error::ZeroPolynomialIdentically => OrStatus::RangeVanishes,
        Error::NotOneRoot => OrStatus::NotOneRoot,
        Error::Numerical(_)
        | Error::InterpolationResidual(_)
        | Error::RankDeficient(_)
        | Error::SamplingFailed(_)
        | Error::InvalidDecomposition(_) => OrStatus::Numerical,
        _ => OrStatus::InvalidInput,
    }
}

struct Fail(OrStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Fail {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(OrStatus::NullPointer, format!("{what} is NULL"))
}

/// Runs `f`, recording any error or panic.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> OrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OrStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            OrStatus::Panic
        }
    }
}

unsafe fn complex_slice(data: *const f64, len: usize, what: &str) -> Result<Vec<C64>, Fail> {
    if data.is_null() {
        return Err(null(what));
    }
    let raw = std::slice::from_raw_parts(data, 2 * len);
    Ok(raw.chunks_exact(2).map(|c| C64::new(c[0], c[1])).collect())
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

fn dimension(m: usize) -> Result<usize, Fail> {
    if m == 0 || m > 20 {
        return Err(Fail(
            OrStatus::InvalidInput,
            format!("qubit count {m} out of range 1..=20"),
        ));
    }
    Ok(1 << m)
}

/// Message for the last failed call on this thread, or NULL. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn or_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn or_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Measure of a pure state with `2^m` interleaved amplitudes.
///
/// # Safety
/// `amps` must point to `2^(m+1)` doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn or_measure_pure(
    measure: OrMeasure,
    m: usize,
    amps: *const f64,
    out: *mut f64,
) -> OrStatus {
    guard(|| {
        let amps = complex_slice(amps, dimension(m)?, "amps")?;
        let value = Measure::from(measure).evaluate(&PureState::from_vec(amps)?)?;
        write(out, value)
    })
}

/// Rank-2 state from orthonormal `phi0`, `phi1` (each `2^m` interleaved
/// amplitudes) and Bloch coordinates `(r, theta, phi)`.
///
/// # Safety
/// `phi0` and `phi1` must each point to `2^(m+1)` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn or_state_new(
    m: usize,
    phi0: *const f64,
    phi1: *const f64,
    r: f64,
    theta: f64,
    phi: f64,
    out: *mut *mut OrState,
) -> OrStatus {
    guard(|| {
        let dim = dimension(m)?;
        let p0 = PureState::from_vec(complex_slice(phi0, dim, "phi0")?)?;
        let p1 = PureState::from_vec(complex_slice(phi1, dim, "phi1")?)?;
        let inner = make_rank_two(p0, p1, BlochVector::new(r, theta, phi)?)?;
        write(out, Box::into_raw(Box::new(OrState { inner })))
    })
}

/// Rank-2 state from a row-major `2^m x 2^m` interleaved density matrix.
///
/// # Safety
/// `rho` must point to `2 * 4^m` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn or_state_from_density(
    m: usize,
    rho: *const f64,
    out: *mut *mut OrState,
) -> OrStatus {
    guard(|| {
        let dim = dimension(m)?;
        let entries = complex_slice(rho, dim * dim, "rho")?;
        let inner = eigen_decompose_rank2(&DensityMatrix::new(DMatrix::from_row_slice(
            dim, dim, &entries,
        ))?)?;
        write(out, Box::into_raw(Box::new(OrState { inner })))
    })
}

/// # Safety
/// `state` must come from `or_state_new`/`or_state_from_density` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn or_state_free(state: *mut OrState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// # Safety
/// `state` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn or_state_qubits(state: *const OrState) -> usize {
    state.as_ref().map_or(0, |s| s.inner.qubits())
}

/// Certifies the one-root property. Succeeds with a certificate whether or
/// not the state is one-root; query it with `or_certificate_is_one_root`.
///
/// # Safety
/// `state` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn or_certify(
    state: *const OrState,
    measure: OrMeasure,
    out: *mut *mut OrCertificate,
) -> OrStatus {
    guard(|| {
        let state = state.as_ref().ok_or_else(|| null("state"))?;
        let (basis, cert) = certify_state(&state.inner, measure.into())?;
        write(out, Box::into_raw(Box::new(OrCertificate { cert, basis })))
    })
}

/// # Safety
/// `cert` must come from `or_certify` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn or_certificate_free(cert: *mut OrCertificate) {
    if !cert.is_null() {
        drop(Box::from_raw(cert));
    }
}

/// # Safety
/// `cert` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn or_certificate_is_one_root(cert: *const OrCertificate) -> bool {
    cert.as_ref().is_some_and(|c| c.cert.one_root)
}

/// Number of distinct roots on the projective line.
///
/// # Safety
/// `cert` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn or_certificate_cluster_count(cert: *const OrCertificate) -> usize {
    cert.as_ref().map_or(0, |c| c.cert.cluster_count())
}

/// `N = E(|z'>) / 4`; fails with `NotOneRoot` otherwise.
///
/// # Safety
/// `cert` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn or_certificate_n(cert: *const OrCertificate, out: *mut f64) -> OrStatus {
    guard(|| {
        let c = cert.as_ref().ok_or_else(|| null("cert"))?;
        write(out, c.cert.n.ok_or(Error::NotOneRoot)?)
    })
}

/// Unit Bloch vector of the root in the basis of `state`.
///
/// # Safety
/// Both handles must be live; `out` must point to 3 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn or_certificate_root_direction(
    cert: *const OrCertificate,
    state: *const OrState,
    out: *mut f64,
) -> OrStatus {
    guard(|| {
        let c = cert.as_ref().ok_or_else(|| null("cert"))?;
        let s = state.as_ref().ok_or_else(|| null("state"))?;
        let d = c.cert.root_direction(&s.inner)?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        std::slice::from_raw_parts_mut(out, 3).copy_from_slice(&d);
        Ok(())
    })
}

/// Certificate as a JSON object; free the string with `or_string_free`.
///
/// # Safety
/// `cert` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn or_certificate_to_json(
    cert: *const OrCertificate,
    out: *mut *mut c_char,
) -> OrStatus {
    guard(|| {
        let c = cert.as_ref().ok_or_else(|| null("cert"))?;
        let text = certificate_json(&c.cert, Some(&c.basis)).to_string();
        write(
            out,
            CString::new(text).expect("JSON has no NULs").into_raw(),
        )
    })
}

/// Exact roof of a certified one-root state.
///
/// # Safety
/// Both handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn or_closed_form(
    state: *const OrState,
    cert: *const OrCertificate,
    out: *mut f64,
) -> OrStatus {
    guard(|| {
        let s = state.as_ref().ok_or_else(|| null("state"))?;
        let c = cert.as_ref().ok_or_else(|| null("cert"))?;
        write(out, closed_form(&s.inner, &c.cert)?.value)
    })
}

/// Brute-force roof: `restarts` local searches per ensemble size `2..=nu_max`.
///
/// # Safety
/// `state` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn or_oracle(
    state: *const OrState,
    measure: OrMeasure,
    restarts: usize,
    nu_max: usize,
    seed: u64,
    out: *mut f64,
) -> OrStatus {
    guard(|| {
        let s = state.as_ref().ok_or_else(|| null("state"))?;
        let config = OptimizerConfig {
            restarts,
            nu_max,
            seed,
            ..OptimizerConfig::default()
        };
        write(
            out,
            oracle_minimize(&s.inner, measure.into(), &config)?.value,
        )
    })
}

/// Two-qubit mixed-state concurrence.
///
/// # Safety
/// `state` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn or_wootters(state: *const OrState, out: *mut f64) -> OrStatus {
    guard(|| {
        let s = state.as_ref().ok_or_else(|| null("state"))?;
        write(out, wootters_mixed_concurrence(&s.inner.density_matrix())?)
    })
}
