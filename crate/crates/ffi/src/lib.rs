//! C interface to the forest-fire simulators.
//!
//! Handles are opaque and owned by the caller, who releases them with the
//! matching `_free` function. Every call returns an [`FfpStatus`]; on
//! failure [`ffp_last_error`] describes the problem.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use forest_fire::discrete::DiscreteFFP;
use forest_fire::harness::run_marks;
use forest_fire::limit::{simulate_alffp_p, simulate_lffp_0, simulate_lffp_inf, LimitProcess};
use forest_fire::scales::compute_scales;
use forest_fire::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FfpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    Resource = 3,
    Runtime = 4,
    Panic = 5,
}

/// Discrete process handle.
pub struct FfpDiscrete(DiscreteFFP);

/// Simulated limit process handle.
pub struct FfpLimit(Box<dyn LimitProcess + Send + Sync>);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FfpScales {
    pub lambda: f64,
    pub pi: f64,
    pub a: f64,
    pub n: u64,
    pub m: u64,
    pub eps: f64,
    pub ratio: f64,
    pub zeta: f64,
    pub outside_asymptotic_range: bool,
}

/// Observables at a point; `d_lo`/`d_hi` are meaningful only when
/// `has_cluster` is set.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FfpObservables {
    pub has_cluster: bool,
    pub cluster_lo: i64,
    pub cluster_hi: i64,
    pub d_lo: f64,
    pub d_hi: f64,
    pub k: f64,
    pub z: f64,
    pub w: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FfpQuery {
    pub value: f64,
    pub h: f64,
    pub d_empty: bool,
    pub d_lo: f64,
    pub d_hi: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> FfpStatus {
    match e {
        Error::Param(_) => FfpStatus::InvalidParameter,
        Error::Resource(_) => FfpStatus::Resource,
        _ => FfpStatus::Runtime,
    }
}

fn guard(f: impl FnOnce() -> Result<(), FfpStatus>) -> FfpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FfpStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside the library".into());
            FfpStatus::Panic
        }
    }
}

fn lift<T>(r: forest_fire::Result<T>) -> Result<T, FfpStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn null() -> FfpStatus {
    set_error("null pointer argument".into());
    FfpStatus::NullPointer
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ffp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ffp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `out` must be null or point to writable memory for one `FfpScales`.
#[no_mangle]
pub unsafe extern "C" fn ffp_scales(lambda: f64, pi: f64, out: *mut FfpScales) -> FfpStatus {
    if out.is_null() {
        return null();
    }
    guard(|| {
        let s = lift(compute_scales(lambda, pi))?;
        *out = FfpScales {
            lambda: s.lambda,
            pi: s.pi,
            a: s.a,
            n: s.n,
            m: s.m,
            eps: s.eps,
            ratio: s.ratio,
            zeta: s.zeta,
            outside_asymptotic_range: s.outside_asymptotic_range,
        };
        Ok(())
    })
}

/// New discrete process on `[-A, A]` with Poisson matches.
///
/// # Safety
/// `out` must be null or point to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn ffp_discrete_new(
    lambda: f64,
    pi: f64,
    big_a: f64,
    seed: u64,
    out: *mut *mut FfpDiscrete,
) -> FfpStatus {
    if out.is_null() {
        return null();
    }
    guard(|| {
        let p = lift(DiscreteFFP::new(lambda, pi, big_a, seed))?;
        *out = Box::into_raw(Box::new(FfpDiscrete(p)));
        Ok(())
    })
}

/// Run to macroscopic time `t`.
///
/// # Safety
/// `h` must be null or a live handle from [`ffp_discrete_new`].
#[no_mangle]
pub unsafe extern "C" fn ffp_discrete_advance(h: *mut FfpDiscrete, t: f64) -> FfpStatus {
    let Some(h) = h.as_mut() else { return null() };
    guard(|| lift(h.0.advance_to(t)))
}

/// # Safety
/// `h` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ffp_discrete_now(h: *const FfpDiscrete, out: *mut f64) -> FfpStatus {
    let (Some(h), false) = (h.as_ref(), out.is_null()) else { return null() };
    *out = h.0.now();
    FfpStatus::Ok
}

/// # Safety
/// `h` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ffp_discrete_observe(
    h: *const FfpDiscrete,
    x: f64,
    out: *mut FfpObservables,
) -> FfpStatus {
    let (Some(h), false) = (h.as_ref(), out.is_null()) else { return null() };
    guard(|| {
        let o = lift(h.0.observables(x))?;
        let (cl, ch) = o.cluster.unwrap_or((0, -1));
        let (dl, dh) = o.d.bounds().unwrap_or((0.0, 0.0));
        *out = FfpObservables {
            has_cluster: o.cluster.is_some(),
            cluster_lo: cl,
            cluster_hi: ch,
            d_lo: dl,
            d_hi: dh,
            k: o.k,
            z: o.z,
            w: o.w,
        };
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle from [`ffp_discrete_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ffp_discrete_free(h: *mut FfpDiscrete) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

unsafe fn store_limit(out: *mut *mut FfpLimit, lp: Box<dyn LimitProcess + Send + Sync>) {
    *out = Box::into_raw(Box::new(FfpLimit(lp)));
}

/// Limit process with front slope `p` (`p = 0`: instantaneous fires) driven
/// by the marks of `seed` on `[-A, A] × [0, T]`.
///
/// # Safety
/// `out` must be null or point to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn ffp_limit_simulate_p(
    p: f64,
    big_a: f64,
    horizon: f64,
    seed: u64,
    out: *mut *mut FfpLimit,
) -> FfpStatus {
    if out.is_null() {
        return null();
    }
    guard(|| {
        let marks = lift(run_marks(seed, 0, big_a, horizon))?;
        let lp: Box<dyn LimitProcess + Send + Sync> = if p == 0.0 {
            Box::new(lift(simulate_lffp_0(big_a, horizon, &marks))?)
        } else {
            Box::new(lift(simulate_alffp_p(p, big_a, horizon, &marks))?)
        };
        store_limit(out, lp);
        Ok(())
    })
}

/// Slow-regime limit process with exponent `z0`.
///
/// # Safety
/// `out` must be null or point to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn ffp_limit_simulate_inf(
    z0: f64,
    big_a: f64,
    horizon: f64,
    seed: u64,
    out: *mut *mut FfpLimit,
) -> FfpStatus {
    if out.is_null() {
        return null();
    }
    guard(|| {
        let marks = lift(run_marks(seed, 0, big_a, horizon))?;
        store_limit(out, Box::new(lift(simulate_lffp_inf(z0, big_a, horizon, &marks))?));
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ffp_limit_event_count(h: *const FfpLimit, out: *mut usize) -> FfpStatus {
    let (Some(h), false) = (h.as_ref(), out.is_null()) else { return null() };
    *out = h.0.events().len();
    FfpStatus::Ok
}

/// # Safety
/// `h` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ffp_limit_query(h: *const FfpLimit, x: f64, t: f64, out: *mut FfpQuery) -> FfpStatus {
    let (Some(h), false) = (h.as_ref(), out.is_null()) else { return null() };
    guard(|| {
        let q = lift(h.0.query(x, t))?;
        let (lo, hi) = q.d.bounds().unwrap_or((0.0, 0.0));
        *out = FfpQuery { value: q.value, h: q.h, d_empty: q.d.is_empty(), d_lo: lo, d_hi: hi };
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle from a `ffp_limit_simulate_*` call not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn ffp_limit_free(h: *mut FfpLimit) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}
