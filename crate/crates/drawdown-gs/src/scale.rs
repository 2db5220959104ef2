//! Closed-form q-scale functions for the three model families.
//!
//! Each family's scale function is a finite sum of exponentials
//! `W_q(x) = sum_j coeff_j * exp(rate_j * x)` whose rates are the zeros of
//! `psi(theta) - q` (counted with the pole factor for the jump-diffusion
//! quartic) and whose coefficients follow from partial fractions of
//! `1 / (psi(theta) - q)`. A built [`ScaleSet`] therefore evaluates
//! `W_q, W_q', W_q''` in O(number of terms).
//!
//! Rates and coefficients may be complex (conjugate pairs for the
//! jump-diffusion quartic); evaluation carries complex arithmetic internally
//! and returns the real part after a residue check. The same construction
//! evaluated at complex `q` powers the Laplace-inversion contours — see
//! [`ComplexScaleSet`].

use num_complex::Complex64;

use crate::model::LevyModel;
use crate::roots::polynomial_roots;
use crate::{Error, Result};

/// Pairwise-distinct tolerance on exponent gaps: the partial-fraction
/// coefficients divide by these gaps.
const DISTINCT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub struct Term {
    pub coeff: Complex64,
    pub rate: Complex64,
}

/// A finite exponential sum with overflow-safe shifted evaluation.
#[derive(Debug, Clone)]
pub(crate) struct ExpSum {
    terms: Vec<Term>,
    /// Largest real part among the rates; factored out of evaluations.
    shift: f64,
}

impl ExpSum {
    fn new(terms: Vec<Term>) -> Self {
        let shift = terms.iter().map(|t| t.rate.re).fold(f64::NEG_INFINITY, f64::max);
        ExpSum { terms, shift }
    }

    pub(crate) fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Shifted power sums `S_k(x) = sum_j coeff_j rate_j^k e^{(rate_j - shift) x}`.
    fn power_sums(&self, x: f64) -> (Complex64, Complex64, Complex64) {
        let mut s0 = Complex64::ZERO;
        let mut s1 = Complex64::ZERO;
        let mut s2 = Complex64::ZERO;
        for t in &self.terms {
            let e = ((t.rate - self.shift) * x).exp();
            let ce = t.coeff * e;
            s0 += ce;
            s1 += ce * t.rate;
            s2 += ce * t.rate * t.rate;
        }
        (s0, s1, s2)
    }

    fn s0(&self, x: f64) -> Complex64 {
        let mut s0 = Complex64::ZERO;
        for t in &self.terms {
            s0 += t.coeff * ((t.rate - self.shift) * x).exp();
        }
        s0
    }

    /// Full (unshifted) value; may overflow for very large `x * shift`.
    pub(crate) fn value(&self, x: f64) -> Complex64 {
        self.s0(x) * (self.shift * x).exp()
    }

    pub(crate) fn d1(&self, x: f64) -> Complex64 {
        let (_, s1, _) = self.power_sums(x);
        s1 * (self.shift * x).exp()
    }

    pub(crate) fn d2(&self, x: f64) -> Complex64 {
        let (_, _, s2) = self.power_sums(x);
        s2 * (self.shift * x).exp()
    }

    /// Logarithmic derivative `W'(x) / W(x)`; shift-free, so stable at
    /// arbitrarily large arguments.
    pub(crate) fn log_deriv(&self, x: f64) -> Complex64 {
        let (s0, s1, _) = self.power_sums(x);
        s1 / s0
    }

    /// `ln W(x)` for sums that are real and positive (real discount rates).
    pub(crate) fn log_value_real(&self, x: f64) -> f64 {
        self.shift * x + self.s0(x).re.ln()
    }

    /// `W'(x)^2 / W(x) - W''(x)`, evaluated through the cancellation-free
    /// pairwise form `W'^2 - W W'' = -sum_{i<j} c_i c_j (r_i - r_j)^2
    /// e^{(r_i + r_j) x}`. The naive difference of power sums loses all
    /// precision at large `x` where the two leading terms cancel.
    pub(crate) fn creep_kernel(&self, x: f64) -> Complex64 {
        let n = self.terms.len();
        let pair_shift = {
            let mut best = f64::NEG_INFINITY;
            for i in 0..n {
                for j in (i + 1)..n {
                    best = best.max((self.terms[i].rate + self.terms[j].rate).re);
                }
            }
            best
        };
        let mut num = Complex64::ZERO;
        for i in 0..n {
            for j in (i + 1)..n {
                let (ti, tj) = (self.terms[i], self.terms[j]);
                let gap = ti.rate - tj.rate;
                num -= ti.coeff * tj.coeff * gap * gap * ((ti.rate + tj.rate - pair_shift) * x).exp();
            }
        }
        // K = num / W = e^{(pair_shift - shift) x} * num_shifted / S0.
        num / self.s0(x) * ((pair_shift - self.shift) * x).exp()
    }

    /// `W'(u) - (W'(g)/W(g)) W(u)`, the excursion-measure bracket of the
    /// drawdown densities, through the pairwise Wronskian form
    /// `(W'(u) W(g) - W'(g) W(u)) / W(g)` with
    /// `W'(u) W(g) - W'(g) W(u) = sum_{i<j} c_i c_j (r_i - r_j)
    /// (e^{r_i u + r_j g} - e^{r_j u + r_i g})`.
    ///
    /// The naive difference multiplies two terms of size `e^{r_max g}` that
    /// cancel almost completely when `u` approaches `g`; the pairwise form
    /// keeps every term of the true size and factors the dominant exponent
    /// out before exponentiation, so it neither overflows nor loses the
    /// leading digits.
    pub(crate) fn exit_bracket(&self, u: f64, g: f64) -> Complex64 {
        let n = self.terms.len();
        let mut dominant = f64::NEG_INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                let (ri, rj) = (self.terms[i].rate, self.terms[j].rate);
                dominant = dominant.max((ri * u + rj * g).re).max((rj * u + ri * g).re);
            }
        }
        let mut num = Complex64::ZERO;
        for i in 0..n {
            for j in (i + 1)..n {
                let (ti, tj) = (self.terms[i], self.terms[j]);
                let e_ij = (ti.rate * u + tj.rate * g - dominant).exp();
                let e_ji = (tj.rate * u + ti.rate * g - dominant).exp();
                num += ti.coeff * tj.coeff * (ti.rate - tj.rate) * (e_ij - e_ji);
            }
        }
        num * (dominant - self.shift * g).exp() / self.s0(g)
    }

    /// Index of the term with the largest real rate and the envelope bound
    /// `sum_{j != d} |c_j/c_d| e^{Re(r_j - r_d) u}` on the remainder ratio
    /// at `u`; the envelope is nonincreasing in `u`.
    fn remainder_envelope(&self, u: f64) -> (usize, f64) {
        let d = self
            .terms
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.rate.re.total_cmp(&b.1.rate.re))
            .map(|(i, _)| i)
            .expect("nonempty sum");
        let lead = self.terms[d];
        let mut env = 0.0;
        for (j, t) in self.terms.iter().enumerate() {
            if j != d {
                env += (t.coeff / lead.coeff).norm() * ((t.rate - lead.rate).re * u).exp();
            }
        }
        (d, env)
    }

    /// `log W(u1) - log W(u0)` with the imaginary part unwrapped
    /// continuously along `[u0, u1]`, for `0 < u0 <= u1`.
    ///
    /// Needed on inversion contours, where `W` is complex-valued and a
    /// principal-branch logarithm of the endpoint ratio would miss windings.
    /// Where the dominant exponential leads the rest by a safe margin the
    /// variation is `rate_d (u1 - u0) + Ln(1 + r(u1)) - Ln(1 + r(u0))` with
    /// `|r| < 0.7` (no winding possible); only the mixed-regime prefix is
    /// walked with explicit phase tracking.
    pub(crate) fn log_ratio(&self, u0: f64, u1: f64) -> Result<Complex64> {
        if u0 == u1 {
            return Ok(Complex64::ZERO);
        }
        let (dominant, env0) = self.remainder_envelope(u0);
        if env0 <= 0.7 {
            return Ok(self.log_ratio_dominated(dominant, u0, u1));
        }
        // Envelope crossing point: beyond it every remainder term is small
        // enough for the branch-free form.
        let lead = self.terms[dominant];
        let per_term = 0.5 / (self.terms.len() - 1).max(1) as f64;
        let mut u_star = u0;
        for (j, t) in self.terms.iter().enumerate() {
            if j == dominant {
                continue;
            }
            let ratio = (t.coeff / lead.coeff).norm();
            let decay = (t.rate - lead.rate).re;
            if ratio <= per_term {
                continue;
            }
            if decay >= -1e-14 {
                // No decay: the walk must cover everything.
                u_star = u1;
                break;
            }
            u_star = u_star.max((per_term / ratio).ln() / decay);
        }
        let u_star = u_star.min(u1);
        let mut total = self.log_ratio_walk(u0, u_star)?;
        if u_star < u1 {
            let (d2, env) = self.remainder_envelope(u_star);
            debug_assert!(env <= 0.7 + 1e-9);
            total += self.log_ratio_dominated(d2, u_star, u1);
        }
        Ok(total)
    }

    /// Branch-free variation when the dominant term's remainder stays inside
    /// the disk |r| < 1 on the whole interval.
    fn log_ratio_dominated(&self, dominant: usize, u0: f64, u1: f64) -> Complex64 {
        let lead = self.terms[dominant];
        let remainder = |u: f64| {
            let mut r = Complex64::ZERO;
            for (j, t) in self.terms.iter().enumerate() {
                if j != dominant {
                    r += t.coeff / lead.coeff * ((t.rate - lead.rate) * u).exp();
                }
            }
            r
        };
        lead.rate * (u1 - u0) + (1.0 + remainder(u1)).ln() - (1.0 + remainder(u0)).ln()
    }

    /// Explicit phase-tracked walk: split until each step's phase advance
    /// sits well inside (-pi, pi), then sum principal step logarithms.
    fn log_ratio_walk(&self, u0: f64, u1: f64) -> Result<Complex64> {
        if u0 == u1 {
            return Ok(Complex64::ZERO);
        }
        let mut total = Complex64::new(self.shift * (u1 - u0), 0.0);
        let mut stack = vec![(u0, self.s0(u0), u1, self.s0(u1), 0u32)];
        while let Some((a, sa, b, sb, depth)) = stack.pop() {
            if sa.norm() == 0.0 || sb.norm() == 0.0 {
                return Err(Error::Numerical(format!(
                    "scale function vanished on the path at [{a}, {b}]"
                )));
            }
            let ratio = sb / sa;
            if ratio.arg().abs() < std::f64::consts::FRAC_PI_2 || (b - a).abs() < 1e-13 {
                total += ratio.ln();
            } else {
                if depth > 48 {
                    return Err(Error::NonConvergence {
                        what: "phase unwrapping of log W",
                        iterations: 48,
                    });
                }
                let mid = 0.5 * (a + b);
                let sm = self.s0(mid);
                stack.push((mid, sm, b, sb, depth + 1));
                stack.push((a, sa, mid, sm, depth + 1));
            }
        }
        Ok(total)
    }
}

/// Exponent/coefficient set for one `(model, q)` pair; `q` complex.
fn scale_terms(model: &LevyModel, q: Complex64) -> Result<Vec<Term>> {
    let terms = match *model {
        LevyModel::CramerLundbergExp { c, lambda0, mu_claim } => {
            let disc = {
                let base = Complex64::new(c * mu_claim - lambda0, 0.0) - q;
                (base * base + 4.0 * c * mu_claim * q).sqrt()
            };
            let mid = q + (lambda0 - c * mu_claim);
            let theta1 = (mid + disc) / (2.0 * c);
            let theta2 = (mid - disc) / (2.0 * c);
            let gap = theta1 - theta2;
            let a1 = (mu_claim + theta1) / gap;
            let a2 = (mu_claim + theta2) / gap;
            vec![
                Term { coeff: a1 / c, rate: theta1 },
                Term { coeff: -a2 / c, rate: theta2 },
            ]
        }
        LevyModel::BrownianDrift { mu, sigma } => {
            let s2 = sigma * sigma;
            let root = (Complex64::new(mu * mu, 0.0) + 2.0 * s2 * q).sqrt();
            let a0 = 1.0 / root;
            let l1 = (root - mu) / s2;
            let l2 = (-root - mu) / s2;
            vec![Term { coeff: a0, rate: l1 }, Term { coeff: -a0, rate: l2 }]
        }
        LevyModel::JumpDiffusionErlang2 { c, sigma, lambda0, alpha } => {
            let half_s2 = 0.5 * sigma * sigma;
            let coeffs = [
                -q * alpha * alpha,
                Complex64::new(c * alpha * alpha, 0.0) - 2.0 * alpha * (lambda0 + q),
                Complex64::new(half_s2 * alpha * alpha - lambda0 + 2.0 * c * alpha, 0.0) - q,
                Complex64::new(alpha * sigma * sigma + c, 0.0),
                Complex64::new(half_s2, 0.0),
            ];
            let roots = polynomial_roots(&coeffs)?;
            let mut terms = Vec::with_capacity(4);
            for (j, &rj) in roots.iter().enumerate() {
                let mut prod = Complex64::new(half_s2, 0.0);
                for (i, &ri) in roots.iter().enumerate() {
                    if i != j {
                        prod *= rj - ri;
                    }
                }
                let ar = alpha + rj;
                terms.push(Term { coeff: ar * ar / prod, rate: rj });
            }
            terms
        }
    };

    let mut min_gap = f64::INFINITY;
    for i in 0..terms.len() {
        for j in (i + 1)..terms.len() {
            min_gap = min_gap.min((terms[i].rate - terms[j].rate).norm());
        }
    }
    if min_gap <= DISTINCT_TOL {
        return Err(Error::NonDistinctRoots { min_gap });
    }
    Ok(terms)
}

fn w0_plus_analytic(model: &LevyModel) -> f64 {
    match *model {
        LevyModel::CramerLundbergExp { c, .. } => 1.0 / c,
        LevyModel::BrownianDrift { .. } | LevyModel::JumpDiffusionErlang2 { .. } => 0.0,
    }
}

/// Cached scale-function data for one `(model, q)` with real `q >= 0`,
/// giving O(1) evaluation of `W_q`, `W_q'`, `W_q''`.
#[derive(Debug, Clone)]
pub struct ScaleSet {
    model: LevyModel,
    q: f64,
    sum: ExpSum,
    w0_plus: f64,
    phi_q: f64,
}

impl ScaleSet {
    pub fn new(model: LevyModel, q: f64) -> Result<Self> {
        if q < 0.0 {
            return Err(Error::Domain(format!("scale set requires q >= 0, got {q}")));
        }
        let terms = scale_terms(&model, Complex64::new(q, 0.0))?;
        let sum = ExpSum::new(terms);

        // The dominant exponent must be (numerically) real: it is the
        // largest root of psi = q.
        let dominant = sum
            .terms()
            .iter()
            .max_by(|a, b| a.rate.re.total_cmp(&b.rate.re))
            .expect("scale sets have at least two terms");
        if dominant.rate.im.abs() > 1e-8 * (1.0 + dominant.rate.norm()) {
            return Err(Error::Numerical(format!(
                "dominant exponent {} is not real",
                dominant.rate
            )));
        }

        let set = ScaleSet {
            model,
            q,
            phi_q: dominant.rate.re,
            w0_plus: w0_plus_analytic(&model),
            sum,
        };

        // Conjugate-pair residue check: the evaluated sum must be real.
        for x in [0.25, 1.0, 5.0] {
            let v = set.sum.value(x);
            if v.im.abs() > 1e-8 * v.re.abs().max(1e-12) {
                return Err(Error::Numerical(format!(
                    "scale sum has imaginary residue {} at x = {x}",
                    v.im
                )));
            }
        }
        Ok(set)
    }

    pub fn model(&self) -> &LevyModel {
        &self.model
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Largest root of `psi(theta) = q` (the dominant exponent).
    pub fn phi_q(&self) -> f64 {
        self.phi_q
    }

    /// `W_q(0+)`, computed analytically per family (`1/c` without a Gaussian
    /// part, `0` otherwise).
    pub fn w0_plus(&self) -> f64 {
        self.w0_plus
    }

    pub fn exponents(&self) -> Vec<Complex64> {
        self.sum.terms().iter().map(|t| t.rate).collect()
    }

    pub fn coefficients(&self) -> Vec<Complex64> {
        self.sum.terms().iter().map(|t| t.coeff).collect()
    }

    /// `W_q(x)`; zero on the negative half-line.
    pub fn w(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            self.sum.value(x).re
        }
    }

    /// First derivative (right-limit at `x = 0`).
    pub fn w1(&self, x: f64) -> f64 {
        self.sum.d1(x.max(0.0)).re
    }

    /// Second derivative (right-limit at `x = 0`).
    pub fn w2(&self, x: f64) -> f64 {
        self.sum.d2(x.max(0.0)).re
    }

    /// `ln W_q(x)` for `x > 0`; stable where `W_q(x)` itself overflows.
    pub fn log_w(&self, x: f64) -> f64 {
        self.sum.log_value_real(x)
    }

    /// `W_q'(x) / W_q(x)`.
    pub fn log_deriv(&self, x: f64) -> f64 {
        self.sum.log_deriv(x).re
    }

    /// `W_q'(x)^2 / W_q(x) - W_q''(x)` (the creeping kernel).
    pub fn creep_kernel(&self, x: f64) -> f64 {
        self.sum.creep_kernel(x).re
    }

    /// `W_q'(u) - (W_q'(g)/W_q(g)) W_q(u)`, stable for large `u <= g`.
    pub fn exit_bracket(&self, u: f64, g: f64) -> f64 {
        self.sum.exit_bracket(u, g).re
    }

    /// Relative residual of the defining transform identity
    /// `integral_0^inf e^{-theta x} W_q(x) dx = 1 / (psi(theta) - q)`,
    /// evaluated term-wise as `sum_j coeff_j / (theta - rate_j)`.
    pub fn verify_laplace_identity(&self, theta: f64) -> Result<f64> {
        if theta <= self.phi_q {
            return Err(Error::Domain(format!(
                "transform abscissa {theta} must exceed phi_q = {}",
                self.phi_q
            )));
        }
        let mut transform = Complex64::ZERO;
        for t in self.sum.terms() {
            transform += t.coeff / (theta - t.rate);
        }
        let target = 1.0 / (self.model.laplace_exponent(theta) - self.q);
        Ok(((transform - target) * (self.model.laplace_exponent(theta) - self.q)).norm())
    }
}

/// Scale set at complex `q`: the same closed-form exponents and partial
/// fractions, evaluated with complex arithmetic. Used on Bromwich contours;
/// no analogue of `phi_q` exists or is needed here.
#[derive(Debug, Clone)]
pub struct ComplexScaleSet {
    q: Complex64,
    sum: ExpSum,
    w0_plus: f64,
}

impl ComplexScaleSet {
    pub fn new(model: LevyModel, q: Complex64) -> Result<Self> {
        let terms = scale_terms(&model, q)?;
        Ok(ComplexScaleSet { q, w0_plus: w0_plus_analytic(&model), sum: ExpSum::new(terms) })
    }

    pub fn q(&self) -> Complex64 {
        self.q
    }

    pub fn w0_plus(&self) -> f64 {
        self.w0_plus
    }

    pub fn w(&self, x: f64) -> Complex64 {
        if x < 0.0 {
            Complex64::ZERO
        } else {
            self.sum.value(x)
        }
    }

    pub fn w1(&self, x: f64) -> Complex64 {
        self.sum.d1(x.max(0.0))
    }

    pub fn w2(&self, x: f64) -> Complex64 {
        self.sum.d2(x.max(0.0))
    }

    pub fn log_deriv(&self, x: f64) -> Complex64 {
        self.sum.log_deriv(x)
    }

    pub fn creep_kernel(&self, x: f64) -> Complex64 {
        self.sum.creep_kernel(x)
    }

    pub fn exit_bracket(&self, u: f64, g: f64) -> Complex64 {
        self.sum.exit_bracket(u, g)
    }

    /// Phase-unwrapped `log W(u1) - log W(u0)`.
    pub fn log_ratio(&self, u0: f64, u1: f64) -> Result<Complex64> {
        self.sum.log_ratio(u0, u1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cl() -> LevyModel {
        LevyModel::cramer_lundberg(1.1, 2.0, 2.0).unwrap()
    }

    fn bm() -> LevyModel {
        LevyModel::brownian(0.3, 1.0).unwrap()
    }

    fn jd() -> LevyModel {
        LevyModel::jump_diffusion(3.0, 0.5, 2.0, 2.0).unwrap()
    }

    fn all_models() -> [LevyModel; 3] {
        [cl(), bm(), jd()]
    }

    #[test]
    fn cramer_lundberg_q0_exponents() {
        let set = ScaleSet::new(cl(), 0.0).unwrap();
        let mut rates: Vec<f64> = set.exponents().iter().map(|r| r.re).collect();
        rates.sort_by(f64::total_cmp);
        assert!(rates[1].abs() < 1e-12, "phi_0 should be 0, got {}", rates[1]);
        assert!((rates[0] - (2.0 - 1.1 * 2.0) / 1.1).abs() < 1e-12);
        // W(0+) = 1/c.
        assert!((set.w(0.0) - 1.0 / 1.1).abs() < 1e-12);
        assert!((set.w0_plus() - 1.0 / 1.1).abs() < 1e-15);
    }

    #[test]
    fn brownian_q0_closed_form() {
        let set = ScaleSet::new(bm(), 0.0).unwrap();
        // W(x) = (1 - e^{-2 mu x / sigma^2}) / mu.
        for x in [0.1f64, 0.5, 1.0, 3.0] {
            let expected = (1.0 - (-0.6 * x).exp()) / 0.3;
            assert!((set.w(x) - expected).abs() < 1e-12, "x = {x}");
        }
        assert!((set.w(1.0) - 1.50396).abs() < 1e-5);
        assert_eq!(set.w(-1.0), 0.0);
        assert!(set.w(0.0).abs() < 1e-14);
    }

    #[test]
    fn jump_diffusion_q0_has_zero_root() {
        let set = ScaleSet::new(jd(), 0.0).unwrap();
        let smallest = set
            .exponents()
            .iter()
            .map(|r| r.norm())
            .fold(f64::INFINITY, f64::min);
        assert!(smallest < 1e-9, "no root at origin: {smallest:.3e}");
        assert!(set.w(0.0).abs() < 1e-10);
    }

    #[test]
    fn laplace_identity_residuals() {
        for model in all_models() {
            for q in [0.0, 0.1, 1.0] {
                let set = ScaleSet::new(model, q).unwrap();
                for k in 1..=5 {
                    let theta = set.phi_q() + 0.3 * k as f64;
                    let residual = set.verify_laplace_identity(theta).unwrap();
                    assert!(
                        residual < 1e-8,
                        "residual {residual:.3e} for {model:?}, q={q}, theta={theta}"
                    );
                }
            }
        }
    }

    #[test]
    fn laplace_identity_needs_theta_beyond_phi() {
        let set = ScaleSet::new(cl(), 0.5).unwrap();
        assert!(set.verify_laplace_identity(set.phi_q() * 0.5).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        for model in all_models() {
            for q in [0.0, 0.4] {
                let set = ScaleSet::new(model, q).unwrap();
                let mut x = 0.1;
                while x <= 10.0 {
                    let fd1 = (set.w(x + h) - set.w(x - h)) / (2.0 * h);
                    let fd2 = (set.w1(x + h) - set.w1(x - h)) / (2.0 * h);
                    assert!(
                        (set.w1(x) - fd1).abs() <= 1e-5 * fd1.abs().max(1.0),
                        "w1 mismatch at x={x} for {model:?}"
                    );
                    assert!(
                        (set.w2(x) - fd2).abs() <= 1e-5 * fd2.abs().max(1.0),
                        "w2 mismatch at x={x} for {model:?}"
                    );
                    x += 0.3;
                }
            }
        }
    }

    #[test]
    fn scale_function_positive_and_increasing() {
        for model in all_models() {
            for q in [0.0, 0.5] {
                let set = ScaleSet::new(model, q).unwrap();
                let mut prev = 0.0;
                for k in 1..=800 {
                    let x = 0.01 * k as f64;
                    let w = set.w(x);
                    assert!(w > 0.0, "W not positive at {x}");
                    assert!(w > prev, "W not increasing at {x}");
                    prev = w;
                }
            }
        }
    }

    #[test]
    fn jump_diffusion_imaginary_residue_small() {
        for q in [0.0, 0.2, 1.0] {
            let set = ScaleSet::new(jd(), q).unwrap();
            for k in 0..=40 {
                let x = 0.5 * k as f64;
                let v = set.sum.value(x);
                assert!(
                    v.im.abs() <= 1e-10 * v.re.abs().max(1e-30),
                    "imaginary residue {} at x={x}",
                    v.im
                );
            }
        }
    }

    #[test]
    fn large_x_asymptotics_stabilize() {
        // W_q(x) e^{-phi_q x} approaches a constant.
        for model in all_models() {
            let set = ScaleSet::new(model, 0.3).unwrap();
            let reduced = |x: f64| (set.log_w(x) - set.phi_q() * x).exp();
            let (mut x, mut prev) = (20.0, reduced(20.0));
            for _ in 0..4 {
                x *= 2.0;
                let next = reduced(x);
                let rel = ((next - prev) / prev).abs();
                assert!(rel < 1e-3, "asymptotic ratio still moving: {rel:.3e} at x={x}");
                prev = next;
            }
        }
    }

    #[test]
    fn creep_kernel_matches_direct_form() {
        for model in [bm(), jd()] {
            let set = ScaleSet::new(model, 0.7).unwrap();
            for x in [0.2, 1.0, 4.0] {
                let direct = set.w1(x) * set.w1(x) / set.w(x) - set.w2(x);
                let paired = set.creep_kernel(x);
                assert!(
                    (direct - paired).abs() <= 1e-9 * direct.abs().max(1e-12),
                    "creep kernel mismatch at {x}: {direct} vs {paired}"
                );
            }
        }
    }

    #[test]
    fn exit_bracket_matches_direct_form() {
        for model in all_models() {
            let set = ScaleSet::new(model, 0.5).unwrap();
            for g in [1.0, 4.0] {
                for u in [0.2, 0.9 * g, g] {
                    let direct = set.w1(u) - set.w1(g) / set.w(g) * set.w(u);
                    let paired = set.exit_bracket(u, g);
                    let tol = 1e-9 * set.w1(u).abs().max(1.0);
                    assert!(
                        (direct - paired).abs() <= tol,
                        "bracket mismatch at u={u}, g={g}: {direct} vs {paired}"
                    );
                }
            }
            // At u = g the bracket vanishes identically.
            assert!(set.exit_bracket(3.0, 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn exit_bracket_stable_at_large_arguments() {
        // The bracket stays finite and nonnegative far beyond where the
        // naive difference overflows.
        let set = ScaleSet::new(cl(), 5.0).unwrap();
        for u in [50.0, 120.0, 200.0] {
            let g = 220.0;
            let v = set.exit_bracket(u, g);
            assert!(v.is_finite(), "bracket not finite at u={u}");
            assert!(v >= -1e-12, "bracket negative at u={u}: {v}");
        }
    }

    #[test]
    fn creep_kernel_is_positive_and_decays() {
        let set = ScaleSet::new(bm(), 0.0).unwrap();
        let mut prev = f64::INFINITY;
        for k in 1..=60 {
            let x = 0.5 * k as f64;
            let kx = set.creep_kernel(x);
            assert!(kx > 0.0);
            assert!(kx < prev);
            prev = kx;
        }
    }

    #[test]
    fn log_w_consistent_with_w() {
        for model in all_models() {
            let set = ScaleSet::new(model, 0.25).unwrap();
            for x in [0.3, 1.7, 9.0] {
                assert!((set.log_w(x) - set.w(x).ln()).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn log_ratio_real_sets() {
        let set = ScaleSet::new(jd(), 0.4).unwrap();
        let lr = set.sum.log_ratio(0.5, 6.0).unwrap();
        assert!((lr.re - (set.log_w(6.0) - set.log_w(0.5))).abs() < 1e-10);
        assert!(lr.im.abs() < 1e-10);
    }

    #[test]
    fn complex_sets_match_real_sets_on_the_real_axis() {
        for model in all_models() {
            let real = ScaleSet::new(model, 0.6).unwrap();
            let complexified = ComplexScaleSet::new(model, Complex64::new(0.6, 0.0)).unwrap();
            for x in [0.2, 1.0, 3.5] {
                assert!((complexified.w(x).re - real.w(x)).abs() < 1e-10 * real.w(x).max(1.0));
                assert!(complexified.w(x).im.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn complex_scale_transform_identity() {
        // The defining transform holds for complex q as well:
        // sum_j c_j / (theta - r_j) = 1 / (psi(theta) - q) at real theta
        // to the right of every exponent.
        for model in all_models() {
            let q = Complex64::new(0.8, 1.3);
            let set = ComplexScaleSet::new(model, q).unwrap();
            let theta = 20.0;
            let mut transform = Complex64::ZERO;
            for t in set.sum.terms() {
                transform += t.coeff / (theta - t.rate);
            }
            let target = 1.0 / (Complex64::new(model.laplace_exponent(theta), 0.0) - q);
            assert!(
                (transform - target).norm() < 1e-10 * target.norm(),
                "complex transform residual for {model:?}"
            );
        }
    }

    #[test]
    fn complex_log_ratio_exponentiates_to_value_ratio() {
        let set = ComplexScaleSet::new(bm(), Complex64::new(0.5, 8.0)).unwrap();
        let (u0, u1) = (0.4, 7.0);
        let lr = set.log_ratio(u0, u1).unwrap();
        let direct = set.w(u1) / set.w(u0);
        assert!((lr.exp() - direct).norm() < 1e-9 * direct.norm());
    }

    #[test]
    fn degenerate_exponents_rejected() {
        // Zero net profit at q = 0 collapses the two exponents.
        let boundary = LevyModel::cramer_lundberg(1.0, 2.0, 2.0).unwrap();
        match ScaleSet::new(boundary, 0.0) {
            Err(Error::NonDistinctRoots { .. }) => {}
            other => panic!("expected NonDistinctRoots, got {other:?}"),
        }
    }
}
