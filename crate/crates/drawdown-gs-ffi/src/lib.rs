//! C ABI for the drawdown-gs engine.
//!
//! Conventions:
//!
//! * Objects cross the boundary as opaque handles created by `dgs_*_new`
//!   constructors and released by the matching `dgs_*_free`.
//! * Every fallible call returns a [`DgsStatus`]; results land in out
//!   pointers, written only on `DGS_STATUS_OK`.
//! * Handles are immutable after construction and safe to share across
//!   threads.
//! * Panics are caught at the boundary and reported as
//!   `DGS_STATUS_INTERNAL`.
//!
//! The C header is generated into `include/drawdown_gs.h` at build time.
//!
//! Safety contract for every `unsafe` function: handle arguments must be
//! null or originate from the matching constructor and not have been freed;
//! out-pointers must be null or point to writable storage. Null pointers
//! are rejected with `DGS_STATUS_NULL_POINTER`.

#![allow(clippy::missing_safety_doc)]

use std::ffi::{c_char, c_double, c_ulonglong};
use std::panic::{catch_unwind, AssertUnwindSafe};

use drawdown_gs::drawdown::DrawdownSpec;
use drawdown_gs::gs;
use drawdown_gs::inversion::{self, InversionConfig};
use drawdown_gs::mc::{self, SimConfig};
use drawdown_gs::scale::ScaleSet;
use drawdown_gs::{Error, LevyModel};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DgsStatus {
    DgsStatusOk = 0,
    DgsStatusNullPointer = 1,
    DgsStatusInvalidParameter = 2,
    DgsStatusDomain = 3,
    DgsStatusNumerical = 4,
    DgsStatusNonConvergence = 5,
    DgsStatusInternal = 6,
}

use DgsStatus::*;

/// A Lévy surplus model (opaque).
pub struct DgsModel(LevyModel);

/// A drawdown boundary with optional minimum capital (opaque).
pub struct DgsDrawdown(DrawdownSpec);

/// A cached scale-function set for one (model, q) pair (opaque).
pub struct DgsScaleSet(ScaleSet);

fn status_of(err: &Error) -> DgsStatus {
    match err {
        Error::InvalidParameter(_) => DgsStatusInvalidParameter,
        Error::Domain(_) => DgsStatusDomain,
        Error::NonConvergence { .. } | Error::QuadratureFailure { .. } => DgsStatusNonConvergence,
        _ => DgsStatusNumerical,
    }
}

/// Human-readable description of a status code (static storage).
#[no_mangle]
pub extern "C" fn dgs_status_message(status: DgsStatus) -> *const c_char {
    let msg: &'static [u8] = match status {
        DgsStatusOk => b"ok\0",
        DgsStatusNullPointer => b"null pointer argument\0",
        DgsStatusInvalidParameter => b"invalid parameter\0",
        DgsStatusDomain => b"argument outside the operation domain\0",
        DgsStatusNumerical => b"numerical failure\0",
        DgsStatusNonConvergence => b"iteration or quadrature did not converge\0",
        DgsStatusInternal => b"internal error\0",
    };
    msg.as_ptr() as *const c_char
}

/// Library version string (static storage).
#[no_mangle]
pub extern "C" fn dgs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

fn guarded<T>(out: *mut T, f: impl FnOnce() -> Result<T, DgsStatus>) -> DgsStatus {
    if out.is_null() {
        return DgsStatusNullPointer;
    }
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(v)) => {
            // SAFETY: out is non-null and points to caller-owned storage.
            unsafe { out.write(v) };
            DgsStatusOk
        }
        Ok(Err(status)) => status,
        Err(_) => DgsStatusInternal,
    }
}

macro_rules! deref {
    ($ptr:expr) => {
        match unsafe { $ptr.as_ref() } {
            Some(r) => r,
            None => return DgsStatusNullPointer,
        }
    };
}

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

/// Compound Poisson surplus with exponential claims.
#[no_mangle]
pub unsafe extern "C" fn dgs_model_cramer_lundberg(
    c: c_double,
    lambda0: c_double,
    mu_claim: c_double,
    out: *mut *mut DgsModel,
) -> DgsStatus {
    guarded(out, || {
        LevyModel::cramer_lundberg(c, lambda0, mu_claim)
            .map(|m| Box::into_raw(Box::new(DgsModel(m))))
            .map_err(|e| status_of(&e))
    })
}

/// Brownian motion with drift.
#[no_mangle]
pub unsafe extern "C" fn dgs_model_brownian(
    mu: c_double,
    sigma: c_double,
    out: *mut *mut DgsModel,
) -> DgsStatus {
    guarded(out, || {
        LevyModel::brownian(mu, sigma)
            .map(|m| Box::into_raw(Box::new(DgsModel(m))))
            .map_err(|e| status_of(&e))
    })
}

/// Jump diffusion with Erlang(2) claims.
#[no_mangle]
pub unsafe extern "C" fn dgs_model_jump_diffusion(
    c: c_double,
    sigma: c_double,
    lambda0: c_double,
    alpha: c_double,
    out: *mut *mut DgsModel,
) -> DgsStatus {
    guarded(out, || {
        LevyModel::jump_diffusion(c, sigma, lambda0, alpha)
            .map(|m| Box::into_raw(Box::new(DgsModel(m))))
            .map_err(|e| status_of(&e))
    })
}

/// Releases a model handle (no-op on NULL).
#[no_mangle]
pub unsafe extern "C" fn dgs_model_free(model: *mut DgsModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Laplace exponent `psi(theta)` of the model.
#[no_mangle]
pub unsafe extern "C" fn dgs_laplace_exponent(
    model: *const DgsModel,
    theta: c_double,
    out: *mut c_double,
) -> DgsStatus {
    let model = deref!(model);
    guarded(out, || {
        if theta < 0.0 {
            return Err(DgsStatusDomain);
        }
        Ok(model.0.laplace_exponent(theta))
    })
}

/// Largest solution of `psi(theta) = q`.
#[no_mangle]
pub unsafe extern "C" fn dgs_phi_q(model: *const DgsModel, q: c_double, out: *mut c_double) -> DgsStatus {
    let model = deref!(model);
    guarded(out, || model.0.phi_q(q).map_err(|e| status_of(&e)))
}

/// Lévy measure density at jump size `z > 0`.
#[no_mangle]
pub unsafe extern "C" fn dgs_levy_density(
    model: *const DgsModel,
    z: c_double,
    out: *mut c_double,
) -> DgsStatus {
    let model = deref!(model);
    guarded(out, || Ok(model.0.levy_density(z)))
}

/// Lévy measure tail beyond `z`.
#[no_mangle]
pub unsafe extern "C" fn dgs_levy_tail(
    model: *const DgsModel,
    z: c_double,
    out: *mut c_double,
) -> DgsStatus {
    let model = deref!(model);
    guarded(out, || Ok(model.0.levy_tail(z)))
}

// ---------------------------------------------------------------------------
// Drawdown boundaries
// ---------------------------------------------------------------------------

/// The zero boundary (classical ruin).
#[no_mangle]
pub unsafe extern "C" fn dgs_drawdown_ruin(out: *mut *mut DgsDrawdown) -> DgsStatus {
    guarded(out, || Ok(Box::into_raw(Box::new(DgsDrawdown(DrawdownSpec::ruin())))))
}

/// Linear boundary `a z - b` with `a < 1`, `b >= 0`.
#[no_mangle]
pub unsafe extern "C" fn dgs_drawdown_linear(
    a: c_double,
    b: c_double,
    out: *mut *mut DgsDrawdown,
) -> DgsStatus {
    guarded(out, || {
        DrawdownSpec::linear(a, b)
            .map(|d| Box::into_raw(Box::new(DgsDrawdown(d))))
            .map_err(|e| status_of(&e))
    })
}

/// Tax boundary with a constant rate in `[0, 1)` anchored at `x0 > 0`.
#[no_mangle]
pub unsafe extern "C" fn dgs_drawdown_tax_constant(
    gamma: c_double,
    x0: c_double,
    out: *mut *mut DgsDrawdown,
) -> DgsStatus {
    guarded(out, || {
        DrawdownSpec::tax_constant(gamma, x0)
            .map(|d| Box::into_raw(Box::new(DgsDrawdown(d))))
            .map_err(|e| status_of(&e))
    })
}

/// Dividend-barrier boundary `(z - b) ∨ 0`.
#[no_mangle]
pub unsafe extern "C" fn dgs_drawdown_barrier(b: c_double, out: *mut *mut DgsDrawdown) -> DgsStatus {
    guarded(out, || {
        DrawdownSpec::barrier(b)
            .map(|d| Box::into_raw(Box::new(DgsDrawdown(d))))
            .map_err(|e| status_of(&e))
    })
}

/// Copies `dd` with a constant minimum-capital requirement attached.
#[no_mangle]
pub unsafe extern "C" fn dgs_drawdown_with_min_capital(
    dd: *const DgsDrawdown,
    v: c_double,
    out: *mut *mut DgsDrawdown,
) -> DgsStatus {
    let dd = deref!(dd);
    guarded(out, || {
        dd.0.clone()
            .with_min_capital(v)
            .map(|d| Box::into_raw(Box::new(DgsDrawdown(d))))
            .map_err(|e| status_of(&e))
    })
}

/// Releases a drawdown handle (no-op on NULL).
#[no_mangle]
pub unsafe extern "C" fn dgs_drawdown_free(dd: *mut DgsDrawdown) {
    if !dd.is_null() {
        drop(unsafe { Box::from_raw(dd) });
    }
}

// ---------------------------------------------------------------------------
// Scale functions
// ---------------------------------------------------------------------------

/// Builds the cached scale-function set for `(model, q)`, `q >= 0`.
#[no_mangle]
pub unsafe extern "C" fn dgs_scale_set_new(
    model: *const DgsModel,
    q: c_double,
    out: *mut *mut DgsScaleSet,
) -> DgsStatus {
    let model = deref!(model);
    guarded(out, || {
        ScaleSet::new(model.0, q)
            .map(|s| Box::into_raw(Box::new(DgsScaleSet(s))))
            .map_err(|e| status_of(&e))
    })
}

/// Releases a scale-set handle (no-op on NULL).
#[no_mangle]
pub unsafe extern "C" fn dgs_scale_set_free(set: *mut DgsScaleSet) {
    if !set.is_null() {
        drop(unsafe { Box::from_raw(set) });
    }
}

/// Scale function value `W_q(x)` (zero for `x < 0`).
#[no_mangle]
pub unsafe extern "C" fn dgs_scale_w(set: *const DgsScaleSet, x: c_double, out: *mut c_double) -> DgsStatus {
    let set = deref!(set);
    guarded(out, || Ok(set.0.w(x)))
}

/// First derivative `W_q'(x)`.
#[no_mangle]
pub unsafe extern "C" fn dgs_scale_w1(
    set: *const DgsScaleSet,
    x: c_double,
    out: *mut c_double,
) -> DgsStatus {
    let set = deref!(set);
    guarded(out, || Ok(set.0.w1(x)))
}

/// Second derivative `W_q''(x)`.
#[no_mangle]
pub unsafe extern "C" fn dgs_scale_w2(
    set: *const DgsScaleSet,
    x: c_double,
    out: *mut c_double,
) -> DgsStatus {
    let set = deref!(set);
    guarded(out, || Ok(set.0.w2(x)))
}

/// Dominant exponent of the set (the largest root of `psi = q`).
#[no_mangle]
pub unsafe extern "C" fn dgs_scale_phi_q(set: *const DgsScaleSet, out: *mut c_double) -> DgsStatus {
    let set = deref!(set);
    guarded(out, || Ok(set.0.phi_q()))
}

// ---------------------------------------------------------------------------
// Drawdown functionals
// ---------------------------------------------------------------------------

fn quad_cfg(rel_tol: c_double) -> gs::QuadratureConfig {
    let mut cfg = gs::QuadratureConfig::default();
    if rel_tol > 0.0 {
        cfg.rel_tol = rel_tol;
    }
    cfg
}

/// Survival factor for reaching `s` from `x` before the drawdown.
#[no_mangle]
pub unsafe extern "C" fn dgs_exit_prob_drawdown(
    model: *const DgsModel,
    dd: *const DgsDrawdown,
    q: c_double,
    x: c_double,
    s: c_double,
    out: *mut c_double,
) -> DgsStatus {
    let model = deref!(model);
    let dd = deref!(dd);
    guarded(out, || {
        gs::exit_prob_drawdown(&model.0, &dd.0, q, x, s).map_err(|e| status_of(&e))
    })
}

/// Probability of drawdown in finite time from `x`. Pass `rel_tol <= 0`
/// for the default tolerance.
#[no_mangle]
pub unsafe extern "C" fn dgs_drawdown_probability(
    model: *const DgsModel,
    dd: *const DgsDrawdown,
    x: c_double,
    rel_tol: c_double,
    out: *mut c_double,
) -> DgsStatus {
    let model = deref!(model);
    let dd = deref!(dd);
    guarded(out, || {
        gs::drawdown_probability(&model.0, &dd.0, x, &quad_cfg(rel_tol)).map_err(|e| status_of(&e))
    })
}

/// Joint transform of (last-maximum time, drawdown time) at rates
/// `(q, lambda)`. Pass `rel_tol <= 0` for the default tolerance.
#[no_mangle]
pub unsafe extern "C" fn dgs_joint_laplace(
    model: *const DgsModel,
    dd: *const DgsDrawdown,
    q: c_double,
    lambda: c_double,
    x: c_double,
    rel_tol: c_double,
    out: *mut c_double,
) -> DgsStatus {
    let model = deref!(model);
    let dd = deref!(dd);
    guarded(out, || {
        gs::joint_laplace(&model.0, &dd.0, q, lambda, x, &quad_cfg(rel_tol))
            .map_err(|e| status_of(&e))
    })
}

/// Joint density of (drawdown time `t1`, last-maximum time `t2`) by
/// numerical inversion. Pass `n_terms == 0` for the default term count.
#[no_mangle]
pub unsafe extern "C" fn dgs_joint_density(
    model: *const DgsModel,
    dd: *const DgsDrawdown,
    x: c_double,
    t1: c_double,
    t2: c_double,
    n_terms: c_ulonglong,
    out: *mut c_double,
) -> DgsStatus {
    let model = deref!(model);
    let dd = deref!(dd);
    guarded(out, || {
        let mut inv = InversionConfig { n_terms: 160, euler_terms: 20, ..Default::default() };
        if n_terms > 0 {
            inv.n_terms = n_terms as usize;
        }
        let quad = gs::QuadratureConfig {
            rel_tol: 1e-6,
            s_max_prob: 1e-8,
            ..Default::default()
        };
        inversion::invert_2d_joint_density(&model.0, &dd.0, x, t1, t2, &inv, &quad)
            .map_err(|e| status_of(&e))
    })
}

/// Monte Carlo estimate of the drawdown probability: mean and standard
/// error at `n_paths` paths under the given seed.
#[no_mangle]
pub unsafe extern "C" fn dgs_mc_drawdown_probability(
    model: *const DgsModel,
    dd: *const DgsDrawdown,
    x: c_double,
    n_paths: c_ulonglong,
    seed: c_ulonglong,
    out_mean: *mut c_double,
    out_stderr: *mut c_double,
) -> DgsStatus {
    let model = deref!(model);
    let dd = deref!(dd);
    if out_stderr.is_null() {
        return DgsStatusNullPointer;
    }
    guarded(out_mean, || {
        let cfg = SimConfig { n_paths: n_paths as usize, seed, ..SimConfig::default() };
        let est = mc::estimate(&model.0, &dd.0, x, &cfg, |r| r.hit as u8 as f64)
            .map_err(|e| status_of(&e))?;
        // SAFETY: checked non-null above; caller-owned storage.
        unsafe { out_stderr.write(est.stderr) };
        Ok(est.mean)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    unsafe fn make_model() -> *mut DgsModel {
        let mut model = ptr::null_mut();
        assert_eq!(dgs_model_cramer_lundberg(1.1, 2.0, 2.0, &mut model), DgsStatusOk);
        model
    }

    #[test]
    fn model_lifecycle_and_values() {
        unsafe {
            let model = make_model();
            let mut psi = 0.0;
            assert_eq!(dgs_laplace_exponent(model, 2.0, &mut psi), DgsStatusOk);
            assert!((psi - 1.2).abs() < 1e-12);
            let mut phi = -1.0;
            assert_eq!(dgs_phi_q(model, 0.0, &mut phi), DgsStatusOk);
            assert_eq!(phi, 0.0);
            let mut tail = 0.0;
            assert_eq!(dgs_levy_tail(model, 0.0, &mut tail), DgsStatusOk);
            assert!((tail - 2.0).abs() < 1e-12);
            dgs_model_free(model);
        }
    }

    #[test]
    fn invalid_parameters_are_reported() {
        unsafe {
            let mut model = ptr::null_mut();
            assert_eq!(
                dgs_model_cramer_lundberg(-1.0, 2.0, 2.0, &mut model),
                DgsStatusInvalidParameter
            );
            assert!(model.is_null());
            let mut dd = ptr::null_mut();
            assert_eq!(dgs_drawdown_linear(1.5, 0.5, &mut dd), DgsStatusInvalidParameter);
        }
    }

    #[test]
    fn null_pointers_are_reported() {
        unsafe {
            let mut out = 0.0;
            assert_eq!(dgs_laplace_exponent(ptr::null(), 1.0, &mut out), DgsStatusNullPointer);
            let model = make_model();
            assert_eq!(dgs_laplace_exponent(model, 1.0, ptr::null_mut()), DgsStatusNullPointer);
            dgs_model_free(model);
            dgs_model_free(ptr::null_mut());
            dgs_drawdown_free(ptr::null_mut());
            dgs_scale_set_free(ptr::null_mut());
        }
    }

    #[test]
    fn scale_set_round_trip() {
        unsafe {
            let model = make_model();
            let mut set = ptr::null_mut();
            assert_eq!(dgs_scale_set_new(model, 0.0, &mut set), DgsStatusOk);
            let mut w0 = 0.0;
            assert_eq!(dgs_scale_w(set, 0.0, &mut w0), DgsStatusOk);
            assert!((w0 - 1.0 / 1.1).abs() < 1e-12);
            let mut w_neg = 1.0;
            assert_eq!(dgs_scale_w(set, -1.0, &mut w_neg), DgsStatusOk);
            assert_eq!(w_neg, 0.0);
            dgs_scale_set_free(set);
            dgs_model_free(model);
        }
    }

    #[test]
    fn drawdown_probability_matches_library() {
        unsafe {
            let model = make_model();
            let mut dd = ptr::null_mut();
            assert_eq!(dgs_drawdown_ruin(&mut dd), DgsStatusOk);
            let mut p = 0.0;
            assert_eq!(dgs_drawdown_probability(model, dd, 1.0, 0.0, &mut p), DgsStatusOk);
            let expected = (2.0 / 2.2) * (-(2.0 - 2.0 / 1.1) * 1.0f64).exp();
            assert!((p - expected).abs() < 1e-4, "{p} vs {expected}");
            // Exit probability against the scale ratio.
            let mut e = 0.0;
            assert_eq!(dgs_exit_prob_drawdown(model, dd, 0.3, 1.0, 2.0, &mut e), DgsStatusOk);
            assert!(e > 0.0 && e < 1.0);
            // Domain violation: s <= x.
            assert_eq!(
                dgs_exit_prob_drawdown(model, dd, 0.3, 2.0, 1.0, &mut e),
                DgsStatusDomain
            );
            dgs_drawdown_free(dd);
            dgs_model_free(model);
        }
    }

    #[test]
    fn mc_estimate_through_ffi() {
        unsafe {
            let model = make_model();
            let mut dd = ptr::null_mut();
            assert_eq!(dgs_drawdown_linear(0.5, 0.5, &mut dd), DgsStatusOk);
            let (mut mean, mut stderr) = (0.0, 0.0);
            assert_eq!(
                dgs_mc_drawdown_probability(model, dd, 1.0, 4000, 7, &mut mean, &mut stderr),
                DgsStatusOk
            );
            let mut analytic = 0.0;
            assert_eq!(dgs_drawdown_probability(model, dd, 1.0, 0.0, &mut analytic), DgsStatusOk);
            assert!(
                (mean - analytic).abs() <= 4.0 * stderr,
                "MC {mean} vs analytic {analytic} (stderr {stderr})"
            );
            dgs_drawdown_free(dd);
            dgs_model_free(model);
        }
    }

    #[test]
    fn status_messages_are_nul_terminated() {
        for status in [
            DgsStatusOk,
            DgsStatusNullPointer,
            DgsStatusInvalidParameter,
            DgsStatusDomain,
            DgsStatusNumerical,
            DgsStatusNonConvergence,
            DgsStatusInternal,
        ] {
            let ptr = dgs_status_message(status);
            assert!(!ptr.is_null());
            let s = unsafe { std::ffi::CStr::from_ptr(ptr) };
            assert!(!s.to_str().unwrap().is_empty());
        }
        let v = unsafe { std::ffi::CStr::from_ptr(dgs_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
