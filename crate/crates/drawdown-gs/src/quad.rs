//! Globally adaptive Gauss–Kronrod quadrature, generic over real- and
//! complex-valued integrands.

use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::{Error, Result};

/// Scalars the quadrature engine can accumulate.
pub trait QuadValue: Copy {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn sub(self, other: Self) -> Self;
    fn scale(self, k: f64) -> Self;
    fn norm(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn sub(self, other: Self) -> Self {
        self - other
    }
    fn scale(self, k: f64) -> Self {
        self * k
    }
    fn norm(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn sub(self, other: Self) -> Self {
        self - other
    }
    fn scale(self, k: f64) -> Self {
        self * k
    }
    fn norm(self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Quad<T> {
    pub value: T,
    pub abs_err: f64,
}

// 15-point Kronrod abscissae (positive half) with embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

/// One 15-point Kronrod panel on `[a, b]`. Returns the estimate and a
/// rescaled error bound.
pub fn gk15<T: QuadValue>(f: &mut impl FnMut(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let f_center = f(center);
    let mut kronrod = f_center.scale(WGK[7]);
    let mut gauss = f_center.scale(WG[3]);
    let mut res_abs = f_center.norm() * WGK[7];

    let mut samples = [T::zero(); 15];
    samples[7] = f_center;

    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        samples[j] = f1;
        samples[14 - j] = f2;
        let pair = f1.add(f2);
        kronrod = kronrod.add(pair.scale(WGK[j]));
        res_abs += WGK[j] * (f1.norm() + f2.norm());
        if j % 2 == 1 {
            gauss = gauss.add(pair.scale(WG[j / 2]));
        }
    }

    let mean = kronrod.scale(0.5);
    let mut res_asc = WGK[7] * samples[7].sub(mean).norm();
    for j in 0..7 {
        res_asc += WGK[j] * (samples[j].sub(mean).norm() + samples[14 - j].sub(mean).norm());
    }

    let raw_err = kronrod.sub(gauss).norm() * half.abs();
    let err = rescale_error(raw_err, res_abs * half.abs(), res_asc * half.abs());
    (kronrod.scale(half), err)
}

struct Interval<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
}

impl<T> PartialEq for Interval<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<T> Eq for Interval<T> {}
impl<T> PartialOrd for Interval<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Interval<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.partial_cmp(&other.err).unwrap_or(std::cmp::Ordering::Equal)
    }
}

/// Adaptive integration of `f` over `[a, b]` to the requested tolerances.
///
/// The worst panel (largest error bound) is bisected until the summed error
/// bound satisfies `max(abs_tol, rel_tol * |result|)` or the subdivision cap
/// is hit, in which case the partial estimate travels with the error.
pub fn integrate_adaptive<T: QuadValue>(
    mut f: impl FnMut(f64) -> T,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_subdivisions: usize,
) -> Result<Quad<T>> {
    if a == b {
        return Ok(Quad { value: T::zero(), abs_err: 0.0 });
    }
    let (value, err) = gk15(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Interval { a, b, value, err });
    let mut total_value = value;
    let mut total_err = err;

    let mut splits = 0usize;
    loop {
        let tol = abs_tol.max(rel_tol * total_value.norm());
        if total_err <= tol {
            break;
        }
        if splits >= max_subdivisions {
            return Err(Error::QuadratureFailure {
                partial: total_value.norm(),
                error_bound: total_err,
                subdivisions: splits,
            });
        }
        let worst = heap.pop().expect("heap cannot be empty while error positive");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval at floating-point resolution; accept its estimate
            // (its contribution stays in the running total).
            total_err -= worst.err;
            if heap.is_empty() {
                break;
            }
            continue;
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        total_value = total_value.sub(worst.value).add(v1).add(v2);
        total_err = total_err - worst.err + e1 + e2;
        heap.push(Interval { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Interval { a: mid, b: worst.b, value: v2, err: e2 });
        splits += 1;
    }

    Ok(Quad { value: total_value, abs_err: total_err })
}

/// Convenience wrapper with a generous subdivision cap.
pub fn integrate<T: QuadValue>(
    f: impl FnMut(f64) -> T,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Quad<T>> {
    integrate_adaptive(f, a, b, rel_tol, abs_tol, 4000)
}
