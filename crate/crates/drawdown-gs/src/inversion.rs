//! Numerical inverse Laplace transforms by Fourier-series expansion.
//!
//! The Bromwich integral is discretized by the trapezoidal rule on the
//! contour `Re p = A / (2 T)`, turning the inversion into a (half-)period-`T`
//! Fourier series whose aliasing error is of order `e^{-A}`; the slowly
//! converging series tail is damped by Euler (binomial) averaging of the
//! last partial sums.
//!
//! The joint density of (drawdown time, last-maximum time) comes out of the
//! bivariate transform by iterated one-dimensional inversion: an inner pass
//! in the second rate at fixed complex nodes of the first (the partial
//! original is complex, so the inner sum runs over both half-lines), then an
//! outer real fold. The transform values on the node lattice are shared
//! across the whole evaluation grid, which is what makes dense grids
//! affordable when each transform value itself costs a quadrature.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::drawdown::DrawdownSpec;
use crate::gs::{joint_laplace_complex, QuadratureConfig};
use crate::model::LevyModel;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InversionConfig {
    /// Contour parameter `A`; the discretization error scales like `e^{-A}`.
    pub abscissa_shift: f64,
    /// Number of Fourier terms per sum.
    pub n_terms: usize,
    /// Width of the Euler averaging window over the trailing partial sums.
    pub euler_terms: usize,
    /// Half-period override; by default twice the largest target time, per
    /// inversion dimension.
    pub t_scale: Option<f64>,
}

impl Default for InversionConfig {
    fn default() -> Self {
        InversionConfig {
            abscissa_shift: 18.4, // ln(1e8)
            n_terms: 2000,
            euler_terms: 30,
            t_scale: None,
        }
    }
}

impl InversionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abscissa_shift > 0.0) {
            return Err(Error::InvalidParameter("abscissa_shift must be > 0".into()));
        }
        if self.euler_terms < 1 || self.n_terms < self.euler_terms {
            return Err(Error::InvalidParameter(
                "need n_terms >= euler_terms >= 1".into(),
            ));
        }
        if let Some(t) = self.t_scale {
            if !(t > 0.0) {
                return Err(Error::InvalidParameter("t_scale must be > 0".into()));
            }
        }
        Ok(())
    }

    fn half_period(&self, max_t: f64) -> f64 {
        self.t_scale.unwrap_or(2.0 * max_t)
    }
}

fn check_finite(v: Complex64, node: Complex64) -> Result<Complex64> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteTransform { re: node.re, im: node.im })
    }
}

/// Binomial weights `C(m, j) / 2^m`, `j = 0..=m`.
fn euler_weights(m: usize) -> Vec<f64> {
    let mut w = vec![0.0; m + 1];
    let mut c = 1.0f64;
    for (j, slot) in w.iter_mut().enumerate() {
        *slot = c;
        c = c * (m - j) as f64 / (j + 1) as f64;
    }
    let scale = 0.5f64.powi(m as i32);
    for slot in w.iter_mut() {
        *slot *= scale;
    }
    w
}

/// Euler-averaged limit of a sequence of partial sums: the tail window of
/// `euler_terms + 1` sums is binomially averaged.
fn euler_average(partials: &[f64], euler_terms: usize) -> f64 {
    let m = euler_terms.min(partials.len() - 1);
    let start = partials.len() - 1 - m;
    let w = euler_weights(m);
    partials[start..].iter().zip(w.iter()).map(|(s, w)| s * w).sum()
}

/// Wynn's epsilon extrapolation of a partial-sum window.
///
/// Binomial (Euler) averaging only contracts when the series phase sits
/// near the alternating point `e^{i pi}`; on a shared coefficient lattice
/// the evaluation times sweep the whole phase range, where the epsilon
/// table still converges (it is exact for rational generating functions).
fn epsilon_limit(partials: &[Complex64]) -> Complex64 {
    let n = partials.len();
    if n == 1 {
        return partials[0];
    }
    let mut prev: Vec<Complex64> = vec![Complex64::ZERO; n + 1];
    let mut cur: Vec<Complex64> = partials.to_vec();
    let mut best = cur[cur.len() - 1];
    for col in 1..n {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let d = cur[i + 1] - cur[i];
            if d.norm() < 1e-290 {
                return cur[i + 1];
            }
            next.push(prev[i + 1] + 1.0 / d);
        }
        prev = cur;
        cur = next;
        if col % 2 == 0 {
            best = cur[cur.len() - 1];
        }
    }
    best
}

/// Inverts a one-dimensional transform of a real-valued original at `t > 0`.
pub fn invert_1d(
    transform: impl Fn(Complex64) -> Complex64,
    t: f64,
    cfg: &InversionConfig,
) -> Result<f64> {
    cfg.validate()?;
    if !(t > 0.0) {
        return Err(Error::Domain(format!("inversion time must be positive, got {t}")));
    }
    let half_period = cfg.half_period(t);
    if t > half_period {
        return Err(Error::Domain(format!(
            "inversion time {t} beyond the half-period {half_period}"
        )));
    }
    let a = cfg.abscissa_shift / (2.0 * half_period);
    let scale = (a * t).exp() / half_period;

    let c0 = check_finite(transform(Complex64::new(a, 0.0)), Complex64::new(a, 0.0))?;
    let mut running = 0.5 * c0.re;
    let window = cfg.n_terms - cfg.euler_terms;
    let mut partials = Vec::with_capacity(cfg.euler_terms + 1);
    for k in 1..=cfg.n_terms {
        let node = Complex64::new(a, k as f64 * std::f64::consts::PI / half_period);
        let ck = check_finite(transform(node), node)?;
        running += (ck * Complex64::new(0.0, node.im * t).exp()).re;
        if k >= window {
            partials.push(running);
        }
    }
    Ok(scale * euler_average(&partials, cfg.euler_terms))
}

/// A rectangular evaluation of a two-dimensional inversion.
#[derive(Debug, Clone)]
pub struct Grid2d {
    pub t1: Vec<f64>,
    pub t2: Vec<f64>,
    /// `values[i][j]` is the density at `(t1[i], t2[j])`.
    pub values: Vec<Vec<f64>>,
    /// Heuristic noise floor of the inversion (aliasing plus the residual
    /// Euler wobble observed on the grid).
    pub noise_floor: f64,
}

/// Shared state of one iterated inversion: the transform-value lattice plus
/// contour parameters, reusable across every evaluation point.
struct IteratedInversion {
    lattice: Vec<Vec<Complex64>>,
    t_outer: f64,
    t_inner: f64,
    a_outer: f64,
    a_inner: f64,
    n: usize,
    /// First partial-sum index kept for the extrapolation window.
    first_kept: usize,
    window: usize,
}

impl IteratedInversion {
    fn new<F>(transform: F, max_t2: f64, max_u: f64, cfg: &InversionConfig) -> Result<Self>
    where
        F: Fn(Complex64, Complex64) -> Result<Complex64> + Sync,
    {
        cfg.validate()?;
        let t_outer = cfg.half_period(max_t2);
        let t_inner = cfg.half_period(max_u);
        let a_outer = cfg.abscissa_shift / (2.0 * t_outer);
        let a_inner = cfg.abscissa_shift / (2.0 * t_inner);
        let n = cfg.n_terms;
        // Acceleration window: an odd run of trailing partial sums feeds the
        // epsilon table; deep tables go numerically unstable, so cap the
        // depth.
        let window = ((2 * cfg.euler_terms).min(40) + 1).min(n);
        let first_kept = n + 1 - window;

        let lattice: Vec<Vec<Complex64>> = (0..=n)
            .into_par_iter()
            .map(|j| {
                let q = Complex64::new(a_outer, j as f64 * std::f64::consts::PI / t_outer);
                (-(n as isize)..=n as isize)
                    .map(|k| {
                        let l = Complex64::new(
                            a_inner,
                            k as f64 * std::f64::consts::PI / t_inner,
                        );
                        check_finite(transform(q, l)?, l)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(IteratedInversion { lattice, t_outer, t_inner, a_outer, a_inner, n, first_kept, window })
    }

    /// Inner pass: the partial originals `H_j(u)` for one gap value,
    /// extrapolated two-sided sums over the inner nodes.
    fn inner_pass(&self, u: f64) -> Vec<Complex64> {
        let n = self.n;
        let scale = (self.a_inner * u).exp() / (2.0 * self.t_inner);
        (0..=n)
            .map(|j| {
                let row = &self.lattice[j];
                let mut running = row[n]; // k = 0 term
                let mut partials = Vec::with_capacity(self.window);
                let rot = Complex64::new(0.0, std::f64::consts::PI / self.t_inner * u).exp();
                let mut phase = Complex64::new(1.0, 0.0);
                for k in 1..=n {
                    phase *= rot;
                    running += row[n + k] * phase + row[n - k] * phase.conj();
                    if k >= self.first_kept {
                        partials.push(running);
                    }
                }
                epsilon_limit(&partials) * scale
            })
            .collect()
    }

    /// Outer pass: real fold of one inner-pass result at `t2`. One-sided
    /// complex sum; the original is real, so the real part of the limit is
    /// the folded two-sided value, and the single phase keeps the epsilon
    /// table's job easy.
    fn outer_fold(&self, h: &[Complex64], t2: f64) -> f64 {
        let scale = (self.a_outer * t2).exp() / self.t_outer;
        let mut running = 0.5 * h[0];
        let mut partials = Vec::with_capacity(self.window);
        let rot = Complex64::new(0.0, std::f64::consts::PI / self.t_outer * t2).exp();
        let mut phase = Complex64::new(1.0, 0.0);
        for (k, hk) in h.iter().enumerate().skip(1) {
            phase *= rot;
            running += hk * phase;
            if k >= self.first_kept {
                partials.push(running);
            }
        }
        scale * epsilon_limit(&partials).re
    }
}

/// Inverts a bivariate transform `F(q, lambda)` of a density supported on
/// `t1 >= t2` (first variable dual to `t2`, second dual to `t1 - t2`),
/// sharing transform evaluations across the whole grid.
///
/// Cells with `t1 <= t2` are zero by support and never touch the inversion.
pub fn invert_2d_grid<F>(
    transform: F,
    t1s: &[f64],
    t2s: &[f64],
    cfg: &InversionConfig,
) -> Result<Grid2d>
where
    F: Fn(Complex64, Complex64) -> Result<Complex64> + Sync,
{
    cfg.validate()?;
    if t1s.is_empty() || t2s.is_empty() {
        return Err(Error::Domain("empty inversion grid".into()));
    }
    if t1s.iter().chain(t2s.iter()).any(|t| !(*t > 0.0)) {
        return Err(Error::Domain("grid times must be positive".into()));
    }

    // Gaps u = t1 - t2 that actually occur with positive support.
    let mut gaps: Vec<f64> = Vec::new();
    for &t1 in t1s {
        for &t2 in t2s {
            let u = t1 - t2;
            if u > 0.0 && !gaps.iter().any(|g| (g - u).abs() < 1e-12) {
                gaps.push(u);
            }
        }
    }
    if gaps.is_empty() {
        // Entire grid sits on or below the support boundary.
        return Ok(Grid2d {
            t1: t1s.to_vec(),
            t2: t2s.to_vec(),
            values: vec![vec![0.0; t2s.len()]; t1s.len()],
            noise_floor: 0.0,
        });
    }

    let max_t2 = t2s.iter().cloned().fold(0.0f64, f64::max);
    let max_u = gaps.iter().cloned().fold(0.0f64, f64::max);
    let engine = IteratedInversion::new(transform, max_t2, max_u, cfg)?;

    let inner: Vec<Vec<Complex64>> = gaps.par_iter().map(|&u| engine.inner_pass(u)).collect();

    let gap_index = |u: f64| gaps.iter().position(|g| (g - u).abs() < 1e-12);
    let mut values = vec![vec![0.0; t2s.len()]; t1s.len()];
    let mut max_abs = 0.0f64;
    for (i, &t1) in t1s.iter().enumerate() {
        for (j, &t2) in t2s.iter().enumerate() {
            let u = t1 - t2;
            if u <= 0.0 {
                continue;
            }
            let h = &inner[gap_index(u).expect("gap registered above")];
            let value = engine.outer_fold(h, t2);
            values[i][j] = value;
            max_abs = max_abs.max(value.abs());
        }
    }

    let noise_floor = (-cfg.abscissa_shift).exp() * max_abs.max(1.0);
    Ok(Grid2d { t1: t1s.to_vec(), t2: t2s.to_vec(), values, noise_floor })
}

/// Same iterated inversion on a rectangle in (last-maximum time, gap)
/// coordinates: `values[i][j]` is the density of (`t2s[i] + us[j]`,
/// `t2s[i]`). These coordinates put the support boundary at `u = 0`, so a
/// rectangular grid can stay clear of it.
pub fn invert_2d_gap_grid<F>(
    transform: F,
    t2s: &[f64],
    us: &[f64],
    cfg: &InversionConfig,
) -> Result<Grid2d>
where
    F: Fn(Complex64, Complex64) -> Result<Complex64> + Sync,
{
    if t2s.is_empty() || us.is_empty() {
        return Err(Error::Domain("empty inversion grid".into()));
    }
    if t2s.iter().any(|t| !(*t > 0.0)) || us.iter().any(|u| !(*u > 0.0)) {
        return Err(Error::Domain("grid coordinates must be positive".into()));
    }
    let max_t2 = t2s.iter().cloned().fold(0.0f64, f64::max);
    let max_u = us.iter().cloned().fold(0.0f64, f64::max);
    let engine = IteratedInversion::new(transform, max_t2, max_u, cfg)?;

    let inner: Vec<Vec<Complex64>> = us.par_iter().map(|&u| engine.inner_pass(u)).collect();
    let mut values = vec![vec![0.0; us.len()]; t2s.len()];
    let mut max_abs = 0.0f64;
    for (i, &t2) in t2s.iter().enumerate() {
        for (j, _) in us.iter().enumerate() {
            let value = engine.outer_fold(&inner[j], t2);
            values[i][j] = value;
            max_abs = max_abs.max(value.abs());
        }
    }
    let noise_floor = (-cfg.abscissa_shift).exp() * max_abs.max(1.0);
    Ok(Grid2d { t1: t2s.to_vec(), t2: us.to_vec(), values, noise_floor })
}

/// Joint density of (drawdown time `t1`, last-maximum time `t2`) on a grid,
/// inverted from the bivariate transform of the drawdown functional.
pub fn joint_density_grid(
    model: &LevyModel,
    dd: &DrawdownSpec,
    x: f64,
    t1s: &[f64],
    t2s: &[f64],
    inv_cfg: &InversionConfig,
    quad_cfg: &QuadratureConfig,
) -> Result<Grid2d> {
    // F(q, lambda) = E[e^{-q ell - lambda (tau - ell)}]: q is dual to
    // t2 = ell and lambda to the gap u = tau - ell, exactly the iterated
    // layout of `invert_2d_grid`.
    invert_2d_grid(
        |q, lambda| joint_laplace_complex(model, dd, q, lambda, x, quad_cfg),
        t1s,
        t2s,
        inv_cfg,
    )
}

/// Pointwise joint density of (drawdown time, last-maximum time) at
/// `(t1, t2)`; zero on `t1 < t2` by support, error if the inverted value
/// falls below minus ten times the estimated inversion noise.
pub fn invert_2d_joint_density(
    model: &LevyModel,
    dd: &DrawdownSpec,
    x: f64,
    t1: f64,
    t2: f64,
    inv_cfg: &InversionConfig,
    quad_cfg: &QuadratureConfig,
) -> Result<f64> {
    if t1 < t2 {
        return Ok(0.0);
    }
    let grid = joint_density_grid(model, dd, x, &[t1], &[t2], inv_cfg, quad_cfg)?;
    let v = grid.values[0][0];
    if v < -10.0 * grid.noise_floor {
        return Err(Error::NegativeDensity { value: v, noise: grid.noise_floor });
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn known_pairs_recovered() {
        let cfg = InversionConfig::default();
        let one = c(1.0, 0.0);
        type Pair = (Box<dyn Fn(Complex64) -> Complex64>, Box<dyn Fn(f64) -> f64>);
        let pairs: Vec<Pair> = vec![
            (Box::new(move |p| one / (p + 1.0)), Box::new(|t: f64| (-t).exp())),
            (Box::new(move |p| one / (p * p)), Box::new(|t: f64| t)),
            (Box::new(move |p| one / (p * p + 1.0)), Box::new(|t: f64| t.sin())),
            (
                Box::new(move |p| one / ((p + 1.0) * (p + 1.0))),
                Box::new(|t: f64| t * (-t).exp()),
            ),
            (Box::new(move |p| p / (p * p + 1.0)), Box::new(|t: f64| t.cos())),
        ];
        for (idx, (transform, original)) in pairs.iter().enumerate() {
            let mut worst = 0.0f64;
            let mut t = 0.1;
            while t <= 10.0 {
                let got = invert_1d(transform, t, &cfg).unwrap();
                worst = worst.max((got - original(t)).abs());
                t += 0.3;
            }
            assert!(worst < 1e-4, "pair {idx}: max error {worst:.3e}");
        }
    }

    #[test]
    fn textbook_point_values() {
        let cfg = InversionConfig::default();
        let e1 = invert_1d(|p| 1.0 / (p + 1.0), 1.0, &cfg).unwrap();
        assert!((e1 - (-1.0f64).exp()).abs() < 1e-6);
        let ramp = invert_1d(|p| 1.0 / (p * p), 2.5, &cfg).unwrap();
        assert!((ramp - 2.5).abs() < 1e-5);
        let sine = invert_1d(|p| 1.0 / (p * p + 1.0), std::f64::consts::FRAC_PI_2, &cfg).unwrap();
        assert!((sine - 1.0).abs() < 1e-5);
    }

    #[test]
    fn rejects_bad_arguments() {
        let cfg = InversionConfig::default();
        assert!(invert_1d(|p| 1.0 / p, 0.0, &cfg).is_err());
        let bad = InversionConfig { euler_terms: 0, ..cfg };
        assert!(invert_1d(|p| 1.0 / p, 1.0, &bad).is_err());
        // Non-finite transform values carry the node out.
        let res = invert_1d(|_| c(f64::NAN, 0.0), 1.0, &cfg);
        assert!(matches!(res, Err(Error::NonFiniteTransform { .. })));
    }

    #[test]
    fn separable_exponential_pair_2d() {
        // F(q, lambda) = 2 / ((q + 1)(lambda + 2)) is the transform of the
        // density of (V + U, V) with V ~ Exp(1), U ~ Exp(2):
        // f(t1, t2) = e^{-t2} 2 e^{-2 (t1 - t2)} on t1 >= t2.
        let cfg = InversionConfig { n_terms: 600, ..InversionConfig::default() };
        let t1s: Vec<f64> = (1..=8).map(|k| 0.45 * k as f64).collect();
        let t2s: Vec<f64> = (1..=8).map(|k| 0.35 * k as f64).collect();
        let grid = invert_2d_grid(
            |q, l| Ok(2.0 / ((q + 1.0) * (l + 2.0))),
            &t1s,
            &t2s,
            &cfg,
        )
        .unwrap();
        let mut worst = 0.0f64;
        for (i, &t1) in t1s.iter().enumerate() {
            for (j, &t2) in t2s.iter().enumerate() {
                let expected = if t1 >= t2 { (-t2).exp() * 2.0 * (-2.0 * (t1 - t2)).exp() } else { 0.0 };
                worst = worst.max((grid.values[i][j] - expected).abs());
            }
        }
        assert!(worst < 1e-4, "separable pair max error {worst:.3e}");
    }

    #[test]
    fn support_constraint_short_circuits() {
        let model = LevyModel::brownian(0.3, 1.0).unwrap();
        let dd = DrawdownSpec::ruin();
        let cfg = InversionConfig { n_terms: 40, ..InversionConfig::default() };
        let v = invert_2d_joint_density(
            &model,
            &dd,
            1.0,
            0.5,
            2.0,
            &cfg,
            &QuadratureConfig::default(),
        )
        .unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn brownian_joint_density_smoke() {
        // Small grid, modest terms: positive mass near the mode, nothing
        // pathological, and self-consistent under term growth.
        let model = LevyModel::brownian(0.3, 1.0).unwrap();
        let dd = DrawdownSpec::linear(0.6, 0.5).unwrap();
        let quad = QuadratureConfig {
            rel_tol: 1e-6,
            s_max_prob: 1e-8,
            ..QuadratureConfig::default()
        };
        let t1s = [0.6, 1.2, 2.0];
        let t2s = [0.3, 0.9];
        let coarse = InversionConfig { n_terms: 96, euler_terms: 16, ..Default::default() };
        let fine = InversionConfig { n_terms: 160, euler_terms: 16, ..Default::default() };
        let g1 = joint_density_grid(&model, &dd, 1.0, &t1s, &t2s, &coarse, &quad).unwrap();
        let g2 = joint_density_grid(&model, &dd, 1.0, &t1s, &t2s, &fine, &quad).unwrap();
        let mut peak = 0.0f64;
        for i in 0..t1s.len() {
            for j in 0..t2s.len() {
                peak = peak.max(g1.values[i][j]);
                assert!(
                    (g1.values[i][j] - g2.values[i][j]).abs() < 5e-4,
                    "self-convergence failed at ({i}, {j}): {} vs {}",
                    g1.values[i][j],
                    g2.values[i][j]
                );
            }
        }
        assert!(peak > 0.01, "no visible density mass (peak {peak})");
        for i in 0..t1s.len() {
            for j in 0..t2s.len() {
                assert!(g1.values[i][j] > -1e-3 * peak, "negative beyond noise floor");
            }
        }
    }
}
