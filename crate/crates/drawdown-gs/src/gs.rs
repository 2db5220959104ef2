//! The quadrature engine for discounted penalty functionals at drawdown.
//!
//! Everything here assembles one triple-law density: conditional on the
//! running maximum at drawdown sitting at `s`, the surplus either jumps
//! across the boundary (a continuous part in the pre-drawdown level `y` and
//! the post-drawdown level `-z`, plus an atom at `y = s` for jumps straight
//! off the maximum), or — when the process has a Gaussian part — creeps onto
//! the boundary. Each part carries the survival factor
//! `exp(-int_x^s W_q'(gap(w))/W_q(gap(w)) dw)` for reaching maximum `s`
//! before drawing down, with the discount rate switching from `q` to
//! `lambda` at the last visit to the maximum.
//!
//! The supported boundaries make the gap piecewise affine, so the survival
//! exponent reduces to logarithm differences of scale functions piece by
//! piece; only the outer `s`-integral, the pre-drawdown level integral, and
//! (for non-unit penalties) the jump-size integral are numerical.

use std::cell::RefCell;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::drawdown::DrawdownSpec;
use crate::model::LevyModel;
use crate::quad::{self, QuadValue};
use crate::scale::{ComplexScaleSet, ScaleSet};
use crate::{Error, Result};

/// Tolerances and truncation thresholds for the assembly quadratures.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    /// Relative tolerance of the outer assembly.
    pub rel_tol: f64,
    /// Survival-factor cutoff: the running-maximum integral stops once the
    /// mass beyond the cut is provably below this.
    pub s_max_prob: f64,
    /// Jump-size integrals stop where the Lévy tail falls below this.
    pub z_max_tail: f64,
    /// Subdivision cap per adaptive integral.
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-7,
            s_max_prob: 1e-10,
            z_max_tail: 1e-12,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rel_tol", self.rel_tol),
            ("s_max_prob", self.s_max_prob),
            ("z_max_tail", self.z_max_tail),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in (0, 1), got {v}"
                )));
            }
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidParameter("max_subdivisions must be >= 1".into()));
        }
        Ok(())
    }
}

/// Penalty weight on (surplus before drawdown, surplus at drawdown).
/// Bounded by contract; the truncation bounds scale with its supremum.
#[derive(Clone)]
pub enum Penalty {
    /// `omega == 1`: plain (discounted) drawdown probabilities.
    One,
    /// `max(K - e^{a - w}, 0)` on the surplus `w` at drawdown: the payoff of
    /// a perpetual put exercised at the drawdown time, with strike `K` and
    /// log-boundary `a`.
    PerpetualPut { strike: f64, log_boundary: f64 },
    Custom(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl Penalty {
    pub fn eval(&self, y_before: f64, w_at: f64) -> f64 {
        match self {
            Penalty::One => 1.0,
            Penalty::PerpetualPut { strike, log_boundary } => {
                (strike - (log_boundary - w_at).exp()).max(0.0)
            }
            Penalty::Custom(f) => f(y_before, w_at),
        }
    }
}

impl fmt::Debug for Penalty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Penalty::One => write!(f, "Penalty::One"),
            Penalty::PerpetualPut { strike, log_boundary } => f
                .debug_struct("Penalty::PerpetualPut")
                .field("strike", strike)
                .field("log_boundary", log_boundary)
                .finish(),
            Penalty::Custom(_) => write!(f, "Penalty::Custom(..)"),
        }
    }
}

/// A penalty together with the two discount rates: `q` applies up to the
/// last visit to the running maximum, `lambda` from there to the drawdown.
#[derive(Debug, Clone)]
pub struct PenaltySpec {
    pub omega: Penalty,
    pub q: f64,
    pub lambda: f64,
}

impl PenaltySpec {
    pub fn new(omega: Penalty, q: f64, lambda: f64) -> Result<Self> {
        if q < 0.0 || lambda < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "discount rates must be nonnegative, got q={q}, lambda={lambda}"
            )));
        }
        Ok(PenaltySpec { omega, q, lambda })
    }

    pub fn indicator(q: f64, lambda: f64) -> Result<Self> {
        Self::new(Penalty::One, q, lambda)
    }
}

/// Adaptive integration with error propagation out of the integrand.
fn integrate_checked<T: QuadValue>(
    mut f: impl FnMut(f64) -> Result<T>,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    cap: usize,
) -> Result<quad::Quad<T>> {
    let pending: RefCell<Option<Error>> = RefCell::new(None);
    let res = quad::integrate_adaptive(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                pending.borrow_mut().get_or_insert(e);
                T::zero()
            }
        },
        a,
        b,
        rel_tol,
        abs_tol,
        cap,
    );
    if let Some(e) = pending.into_inner() {
        return Err(e);
    }
    res
}

// ---------------------------------------------------------------------------
// Survival factors
// ---------------------------------------------------------------------------

/// `int_x^s W'(gap(w))/W(gap(w)) dw` over the piecewise-affine gap
/// (`varsigma_bar` when `constrained`, else `xi_bar`).
fn log_deriv_integral(
    set: &ScaleSet,
    dd: &DrawdownSpec,
    x: f64,
    s: f64,
    constrained: bool,
) -> Result<f64> {
    let mut acc = 0.0;
    for p in dd.affine_pieces(x, s, constrained)? {
        if p.w1 <= p.w0 {
            continue;
        }
        if p.slope == 0.0 {
            acc += (p.w1 - p.w0) * set.log_deriv(p.g0);
        } else {
            let g1 = p.g0 + p.slope * (p.w1 - p.w0);
            acc += (set.log_w(g1) - set.log_w(p.g0)) / p.slope;
        }
    }
    Ok(acc)
}

fn log_deriv_integral_c(
    set: &ComplexScaleSet,
    dd: &DrawdownSpec,
    x: f64,
    s: f64,
    constrained: bool,
) -> Result<Complex64> {
    let mut acc = Complex64::ZERO;
    for p in dd.affine_pieces(x, s, constrained)? {
        if p.w1 <= p.w0 {
            continue;
        }
        if p.slope == 0.0 {
            acc += (p.w1 - p.w0) * set.log_deriv(p.g0);
        } else {
            let g1 = p.g0 + p.slope * (p.w1 - p.w0);
            acc += set.log_ratio(p.g0, g1)? / p.slope;
        }
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Real-valued engine
// ---------------------------------------------------------------------------

struct Engine<'a> {
    model: &'a LevyModel,
    dd: &'a DrawdownSpec,
    wq: ScaleSet,
    wl: ScaleSet,
    cfg: QuadratureConfig,
    /// Jump sizes beyond this carry less than `z_max_tail` mass.
    jump_cutoff: Option<f64>,
    sigma: f64,
}

impl<'a> Engine<'a> {
    fn new(
        model: &'a LevyModel,
        dd: &'a DrawdownSpec,
        q: f64,
        lambda: f64,
        cfg: QuadratureConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        Ok(Engine {
            model,
            dd,
            wq: ScaleSet::new(*model, q)?,
            wl: ScaleSet::new(*model, lambda)?,
            cfg,
            jump_cutoff: model.levy_tail_inverse(cfg.z_max_tail),
            sigma: model.gaussian_coeff(),
        })
    }

    fn survival(&self, x: f64, s: f64, constrained: bool) -> Result<f64> {
        Ok((-log_deriv_integral(&self.wq, self.dd, x, s, constrained)?).exp())
    }

    /// `int omega(y, -z) levy(y + z) dz` over `z > -xi(s)`, i.e. over jump
    /// sizes `w > w_lo` with `w_lo = y - xi(s)` (passed directly: computed
    /// as a gap difference it stays exact where `y - xi(s)` would cancel).
    fn z_integral(&self, pen: &Penalty, y: f64, w_lo: f64) -> Result<f64> {
        match pen {
            Penalty::One => Ok(self.model.levy_tail(w_lo)),
            _ => {
                let Some(hi) = self.jump_cutoff else {
                    return Ok(0.0);
                };
                let lo = w_lo.max(0.0);
                if hi <= lo {
                    return Ok(0.0);
                }
                let q = quad::integrate_adaptive(
                    |w| pen.eval(y, y - w) * self.model.levy_density(w),
                    lo,
                    hi,
                    self.cfg.rel_tol * 0.1,
                    0.0,
                    self.cfg.max_subdivisions,
                )?;
                Ok(q.value)
            }
        }
    }

    /// Jump-and-atom part of the running-maximum integrand at `s`.
    ///
    /// Under a minimum-capital constraint the pre-drawdown level is itself
    /// constrained to `y >= varsigma(s)` (the excursion height before the
    /// crossing is capped by the constrained gap), so the level integral
    /// runs over `u = s - y` in `(0, varsigma_bar(s))`.
    fn jump_atom_integrand(&self, pen: &Penalty, x: f64, s: f64) -> Result<f64> {
        let gap = self.dd.xi_bar(s)?;
        let cgap = self.dd.varsigma_bar(s)?;
        let surv = self.survival(x, s, true)?;
        if surv == 0.0 {
            return Ok(0.0);
        }
        let mut inner = self.wl.w0_plus() * self.z_integral(pen, s, gap)?;
        let level = integrate_checked(
            |u| Ok(self.wl.exit_bracket(u, cgap) * self.z_integral(pen, s - u, gap - u)?),
            0.0,
            cgap,
            self.cfg.rel_tol * 0.2,
            0.0,
            self.cfg.max_subdivisions,
        )?;
        inner += level.value;
        Ok(surv * inner)
    }

    /// Creeping part of the running-maximum integrand at `s` (no constraint
    /// applies to boundary-creeping drawdowns).
    fn creep_integrand(&self, pen: &Penalty, x: f64, s: f64) -> Result<f64> {
        if self.sigma == 0.0 {
            return Ok(0.0);
        }
        let xi_s = self.dd.xi(s)?;
        let gap = self.dd.xi_bar(s)?;
        let surv = self.survival(x, s, false)?;
        Ok(surv * 0.5 * self.sigma * self.sigma * pen.eval(xi_s, xi_s) * self.wl.creep_kernel(gap))
    }

    /// Upper bound on the functional mass carried by paths whose running
    /// maximum exceeds `s` (for unit penalties; bounded penalties scale it
    /// by their supremum). The reach-`s` survival factor alone suffices for
    /// positive `q`; at `q = 0` it converges to the no-drawdown probability
    /// instead of zero, so it is multiplied by a bound on the drawdown
    /// probability after a fresh maximum at `s`.
    fn tail_mass_bound(&self, x: f64, s: f64) -> Result<f64> {
        let surv = self.survival(x, s, false)?;
        if self.wq.q() > 0.0 {
            return Ok(surv);
        }
        Ok(surv * no_drawdown_complement(&self.wq, self.model, self.dd, s)?)
    }

    /// The improper running-maximum integral of `jump_atom + creep`.
    fn total(&self, pen: &Penalty, x: f64) -> Result<f64> {
        let has_jumps = self.jump_cutoff.is_some();
        let mut total = 0.0f64;
        let mut s0 = x;
        let mut width = 1.0f64;
        // Near-degenerate barrier cases decay at rates as small as the
        // scale-function tail allows; doubling segments cover any finite
        // truncation point the cutoff demands.
        for _segment in 0..1000 {
            let s1 = s0 + width;
            if !s1.is_finite() {
                break;
            }
            let abs_tol = 0.25 * self.cfg.rel_tol * total.abs();
            let q = integrate_checked(
                |s| {
                    let mut v = 0.0;
                    if has_jumps {
                        v += self.jump_atom_integrand(pen, x, s)?;
                    }
                    if self.sigma > 0.0 {
                        v += self.creep_integrand(pen, x, s)?;
                    }
                    Ok(v)
                },
                s0,
                s1,
                self.cfg.rel_tol,
                abs_tol,
                self.cfg.max_subdivisions,
            )?;
            total += q.value;
            if self.tail_mass_bound(x, s1)? < self.cfg.s_max_prob {
                return Ok(total);
            }
            s0 = s1;
            width *= 2.0;
        }
        Err(Error::NonConvergence { what: "running-maximum integral truncation", iterations: 1000 })
    }
}

/// Drawdown-probability bound after a fresh maximum at `s`:
/// `1 - exp(-int_s^inf W'(gap)/W(gap))` evaluated in closed form, valid for
/// the zero-discount scale set. Returns 1 whenever the integral diverges
/// (no net profit, or a gap that stops growing).
fn no_drawdown_complement(
    w0: &ScaleSet,
    model: &LevyModel,
    dd: &DrawdownSpec,
    s: f64,
) -> Result<f64> {
    if !model.has_net_profit() {
        return Ok(1.0);
    }
    let slope = dd.final_slope();
    if slope == 0.0 {
        return Ok(1.0);
    }
    let anchor = s.max(dd.last_breakpoint());
    let mut tail = log_deriv_integral(w0, dd, s, anchor, false)?;
    // ln W_0(inf) = -ln psi'(0+) under net profit.
    let log_w_inf = -model.net_profit_drift().ln();
    tail += (log_w_inf - w0.log_w(dd.xi_bar(anchor)?)) / slope;
    Ok((1.0 - (-tail).exp()).clamp(0.0, 1.0))
}

// ---------------------------------------------------------------------------
// Complex engine (unit penalty only), for Laplace-inversion contours
// ---------------------------------------------------------------------------

struct ComplexEngine<'a> {
    model: &'a LevyModel,
    dd: &'a DrawdownSpec,
    wq: ComplexScaleSet,
    wl: ComplexScaleSet,
    /// Real scale set at `Re q`, used for truncation bounds:
    /// `|survival(q)| <= survival(Re q)`.
    wq_re: ScaleSet,
    cfg: QuadratureConfig,
    jump_cutoff: Option<f64>,
    sigma: f64,
}

impl<'a> ComplexEngine<'a> {
    fn new(
        model: &'a LevyModel,
        dd: &'a DrawdownSpec,
        q: Complex64,
        lambda: Complex64,
        cfg: QuadratureConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        if q.re < 0.0 || lambda.re < 0.0 {
            return Err(Error::Domain(format!(
                "complex discount rates need nonnegative real parts, got q={q}, lambda={lambda}"
            )));
        }
        Ok(ComplexEngine {
            model,
            dd,
            wq: ComplexScaleSet::new(*model, q)?,
            wl: ComplexScaleSet::new(*model, lambda)?,
            wq_re: ScaleSet::new(*model, q.re)?,
            cfg,
            jump_cutoff: model.levy_tail_inverse(cfg.z_max_tail),
            sigma: model.gaussian_coeff(),
        })
    }

    fn survival(&self, x: f64, s: f64, constrained: bool) -> Result<Complex64> {
        Ok((-log_deriv_integral_c(&self.wq, self.dd, x, s, constrained)?).exp())
    }

    fn integrand(&self, x: f64, s: f64) -> Result<Complex64> {
        let gap = self.dd.xi_bar(s)?;
        let cgap = self.dd.varsigma_bar(s)?;
        let mut v = Complex64::ZERO;
        if self.jump_cutoff.is_some() {
            let surv = self.survival(x, s, true)?;
            let mut inner = Complex64::new(self.wl.w0_plus() * self.model.levy_tail(gap), 0.0);
            let level = integrate_checked(
                |u| Ok(self.wl.exit_bracket(u, cgap) * self.model.levy_tail(gap - u)),
                0.0,
                cgap,
                self.cfg.rel_tol * 0.2,
                0.0,
                self.cfg.max_subdivisions,
            )?;
            inner += level.value;
            v += surv * inner;
        }
        if self.sigma > 0.0 {
            let surv = self.survival(x, s, false)?;
            v += surv * 0.5 * self.sigma * self.sigma * self.wl.creep_kernel(gap);
        }
        Ok(v)
    }

    fn total(&self, x: f64) -> Result<Complex64> {
        let mut total = Complex64::ZERO;
        let mut s0 = x;
        let mut width = 1.0f64;
        for _segment in 0..1000 {
            let s1 = s0 + width;
            if !s1.is_finite() {
                break;
            }
            let abs_tol = 0.25 * self.cfg.rel_tol * total.norm();
            let q = integrate_checked(
                |s| self.integrand(x, s),
                s0,
                s1,
                self.cfg.rel_tol,
                abs_tol,
                self.cfg.max_subdivisions,
            )?;
            total += q.value;
            // |exp(-int rat_q)| <= exp(-int rat_{Re q}), so the real-engine
            // bound at Re q dominates the complex tail.
            let surv_bound = (-log_deriv_integral(&self.wq_re, self.dd, x, s1, false)?).exp();
            let bound = if self.wq_re.q() > 0.0 {
                surv_bound
            } else {
                surv_bound * no_drawdown_complement(&self.wq_re, self.model, self.dd, s1)?
            };
            if bound < self.cfg.s_max_prob {
                return Ok(total);
            }
            s0 = s1;
            width *= 2.0;
        }
        Err(Error::NonConvergence { what: "running-maximum integral truncation", iterations: 1000 })
    }
}

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

/// `E_x[e^{-q T_s} ; T_s < drawdown]` where `T_s` is the first passage over
/// `s`: the survival factor `exp(-int_x^s W_q'(xi_bar)/W_q(xi_bar) dw)`.
pub fn exit_prob_drawdown(
    model: &LevyModel,
    dd: &DrawdownSpec,
    q: f64,
    x: f64,
    s: f64,
) -> Result<f64> {
    if s <= x {
        return Err(Error::Domain(format!("upper level {s} must exceed start {x}")));
    }
    dd.validate_from(x)?;
    let wq = ScaleSet::new(*model, q)?;
    Ok((-log_deriv_integral(&wq, dd, x, s, false)?).exp())
}

/// Density (in the running maximum `s`) of creeping onto the boundary with
/// discounting split at the last maximum; identically zero without a
/// Gaussian part.
pub fn creeping_density(
    model: &LevyModel,
    dd: &DrawdownSpec,
    q: f64,
    lambda: f64,
    x: f64,
    s: f64,
) -> Result<f64> {
    if s < x {
        return Err(Error::Domain(format!("running maximum {s} below start {x}")));
    }
    if model.gaussian_coeff() == 0.0 {
        return Ok(0.0);
    }
    dd.validate_from(x)?;
    let engine = Engine::new(model, dd, q, lambda, QuadratureConfig::default())?;
    engine.creep_integrand(&Penalty::One, x, s)
}

/// Continuous part of the jump-drawdown density at `(s, y, z)`: running
/// maximum in `ds`, pre-drawdown surplus in `dy`, negated post-drawdown
/// surplus in `dz`. Zero outside `varsigma(s) <= y < s`, `z > -xi(s)` (under
/// a minimum-capital constraint the pre-drawdown level cannot sit below
/// `varsigma(s)`).
#[allow(clippy::too_many_arguments)]
pub fn jump_density_continuous(
    model: &LevyModel,
    dd: &DrawdownSpec,
    q: f64,
    lambda: f64,
    x: f64,
    s: f64,
    y: f64,
    z: f64,
) -> Result<f64> {
    if s < x {
        return Err(Error::Domain(format!("running maximum {s} below start {x}")));
    }
    dd.validate_from(x)?;
    let xi_s = dd.xi(s)?;
    if y >= s || y < dd.varsigma(s)? || z <= -xi_s {
        return Ok(0.0);
    }
    let engine = Engine::new(model, dd, q, lambda, QuadratureConfig::default())?;
    let surv = engine.survival(x, s, true)?;
    let cgap = dd.varsigma_bar(s)?;
    Ok(surv * engine.wl.exit_bracket(s - y, cgap) * model.levy_density(y + z))
}

/// Atom part of the jump-drawdown density: the pre-drawdown surplus sits at
/// the running maximum (`y = s`), with density in `(s, z)` only. Vanishes
/// for models with a Gaussian part (`W(0+) = 0`).
pub fn jump_density_atom(
    model: &LevyModel,
    dd: &DrawdownSpec,
    q: f64,
    lambda: f64,
    x: f64,
    s: f64,
    z: f64,
) -> Result<f64> {
    if s < x {
        return Err(Error::Domain(format!("running maximum {s} below start {x}")));
    }
    dd.validate_from(x)?;
    if z <= -dd.xi(s)? {
        return Ok(0.0);
    }
    let engine = Engine::new(model, dd, q, lambda, QuadratureConfig::default())?;
    let surv = engine.survival(x, s, true)?;
    Ok(surv * engine.wl.w0_plus() * model.levy_density(s + z))
}

/// The discounted penalty functional at the drawdown time: the triple-law
/// density integrated against the penalty, including the creeping
/// contribution weighted by `omega(xi(s), xi(s))`.
pub fn penalty_at_drawdown(
    model: &LevyModel,
    dd: &DrawdownSpec,
    pen: &PenaltySpec,
    x: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    dd.validate_from(x)?;
    let engine = Engine::new(model, dd, pen.q, pen.lambda, *cfg)?;
    engine.total(&pen.omega, x)
}

/// `P_x(drawdown in finite time)`, clamped to `[0, 1]`; values beyond
/// `1 + rel_tol` are reported as mass-bound violations.
pub fn drawdown_probability(
    model: &LevyModel,
    dd: &DrawdownSpec,
    x: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let pen = PenaltySpec::indicator(0.0, 0.0)?;
    let v = penalty_at_drawdown(model, dd, &pen, x, cfg)?;
    if v > 1.0 + cfg.rel_tol {
        return Err(Error::MassBound { value: v });
    }
    Ok(v.clamp(0.0, 1.0))
}

/// Joint transform `E_x[e^{-q l - lambda (tau - l)} ; tau < inf]` of the
/// last-maximum time `l` and the drawdown time `tau`.
pub fn joint_laplace(
    model: &LevyModel,
    dd: &DrawdownSpec,
    q: f64,
    lambda: f64,
    x: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let pen = PenaltySpec::indicator(q, lambda)?;
    penalty_at_drawdown(model, dd, &pen, x, cfg)
}

/// [`joint_laplace`] continued to complex rates with nonnegative real parts
/// (the same closed-form exponents and partial fractions, evaluated with
/// complex arithmetic). This is the transform handed to the numerical
/// inversion contours.
pub fn joint_laplace_complex(
    model: &LevyModel,
    dd: &DrawdownSpec,
    q: Complex64,
    lambda: Complex64,
    x: f64,
    cfg: &QuadratureConfig,
) -> Result<Complex64> {
    dd.validate_from(x)?;
    let engine = ComplexEngine::new(model, dd, q, lambda, *cfg)?;
    engine.total(x)
}

// ---------------------------------------------------------------------------
// Tax specialisation
// ---------------------------------------------------------------------------

fn tax_prelude(dd: &DrawdownSpec, x: f64, s: f64) -> Result<(f64, f64)> {
    dd.validate_from(x)?;
    if s < x {
        return Err(Error::Domain(format!("taxed supremum {s} below start {x}")));
    }
    let pre_tax_max = dd.xi_bar_inverse_tax(s)?;
    let gamma = dd.gamma_at(pre_tax_max)?;
    if (1.0 - gamma).abs() < 1e-12 {
        return Err(Error::SingularJacobian { at: pre_tax_max });
    }
    Ok((pre_tax_max, 1.0 / (1.0 - gamma)))
}

/// Continuous jump density of the taxed process's ruin triple law, in the
/// taxed coordinates `(s, y, z)`: taxed supremum, taxed pre-ruin surplus,
/// taxed deficit. `dd` must be a tax boundary anchored at the initial
/// surplus.
#[allow(clippy::too_many_arguments)]
pub fn gs_tax_density(
    model: &LevyModel,
    dd: &DrawdownSpec,
    q: f64,
    lambda: f64,
    x: f64,
    s: f64,
    y: f64,
    z: f64,
) -> Result<f64> {
    let (pre_tax_max, jacobian) = tax_prelude(dd, x, s)?;
    if y >= s || y < 0.0 || z <= 0.0 {
        return Ok(0.0);
    }
    let wq = ScaleSet::new(*model, q)?;
    let wl = ScaleSet::new(*model, lambda)?;
    let surv = (-log_deriv_integral(&wq, dd, x, pre_tax_max, false)?).exp();
    Ok(jacobian * surv * wl.exit_bracket(s - y, s) * model.levy_density(y + z))
}

/// Atom (`y = s`) part of the taxed ruin density, in `(s, z)`.
pub fn gs_tax_atom(
    model: &LevyModel,
    dd: &DrawdownSpec,
    q: f64,
    lambda: f64,
    x: f64,
    s: f64,
    z: f64,
) -> Result<f64> {
    let (pre_tax_max, jacobian) = tax_prelude(dd, x, s)?;
    if z <= 0.0 {
        return Ok(0.0);
    }
    let wq = ScaleSet::new(*model, q)?;
    let wl = ScaleSet::new(*model, lambda)?;
    let surv = (-log_deriv_integral(&wq, dd, x, pre_tax_max, false)?).exp();
    Ok(jacobian * surv * wl.w0_plus() * model.levy_density(s + z))
}

/// Creeping density of the taxed process's ruin law, in the taxed supremum.
pub fn gs_tax_creeping(
    model: &LevyModel,
    dd: &DrawdownSpec,
    q: f64,
    lambda: f64,
    x: f64,
    s: f64,
) -> Result<f64> {
    let (pre_tax_max, jacobian) = tax_prelude(dd, x, s)?;
    let sigma = model.gaussian_coeff();
    if sigma == 0.0 {
        return Ok(0.0);
    }
    let wq = ScaleSet::new(*model, q)?;
    let wl = ScaleSet::new(*model, lambda)?;
    let surv = (-log_deriv_integral(&wq, dd, x, pre_tax_max, false)?).exp();
    Ok(jacobian * surv * 0.5 * sigma * sigma * wl.creep_kernel(s))
}

/// Ruin functional of the taxed process integrated over its whole triple
/// law in the taxed coordinates — an independent arithmetic path from
/// [`drawdown_probability`] on the equivalent drawdown problem.
pub fn tax_ruin_functional_integrated(
    model: &LevyModel,
    dd: &DrawdownSpec,
    q: f64,
    lambda: f64,
    x: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    dd.validate_from(x)?;
    cfg.validate()?;
    let wq = ScaleSet::new(*model, q)?;
    let wl = ScaleSet::new(*model, lambda)?;
    let sigma = model.gaussian_coeff();
    let has_jumps = model.levy_tail_inverse(cfg.z_max_tail).is_some();

    let integrand = |s: f64| -> Result<f64> {
        let pre_tax_max = dd.xi_bar_inverse_tax(s)?;
        let gamma = dd.gamma_at(pre_tax_max)?;
        if (1.0 - gamma).abs() < 1e-12 {
            return Err(Error::SingularJacobian { at: pre_tax_max });
        }
        let surv = (-log_deriv_integral(&wq, dd, x, pre_tax_max, false)?).exp();
        if surv == 0.0 {
            return Ok(0.0);
        }
        let mut inner = wl.w0_plus() * model.levy_tail(s);
        if has_jumps {
            inner += integrate_checked(
                |u| Ok(wl.exit_bracket(u, s) * model.levy_tail(s - u)),
                0.0,
                s,
                cfg.rel_tol * 0.2,
                0.0,
                cfg.max_subdivisions,
            )?
            .value;
        }
        if sigma > 0.0 {
            inner += 0.5 * sigma * sigma * wl.creep_kernel(s);
        }
        Ok(surv * inner / (1.0 - gamma))
    };

    let mut total = 0.0f64;
    let mut s0 = x;
    let mut width = 1.0f64;
    for _ in 0..64 {
        let s1 = s0 + width;
        let q_seg = integrate_checked(
            integrand,
            s0,
            s1,
            cfg.rel_tol,
            0.25 * cfg.rel_tol * total.abs(),
            cfg.max_subdivisions,
        )?;
        total += q_seg.value;
        let pre_tax_end = dd.xi_bar_inverse_tax(s1)?;
        let surv = (-log_deriv_integral(&wq, dd, x, pre_tax_end, false)?).exp();
        let bound = if q > 0.0 {
            surv
        } else {
            surv * no_drawdown_complement(&wq, model, dd, pre_tax_end)?
        };
        if bound < cfg.s_max_prob {
            return Ok(total);
        }
        s0 = s1;
        width *= 2.0;
    }
    Err(Error::NonConvergence { what: "taxed supremum integral truncation", iterations: 64 })
}

// ---------------------------------------------------------------------------
// Dividend-barrier specialisation
// ---------------------------------------------------------------------------

fn dividend_checks(x: f64, b: f64) -> Result<()> {
    if !(x > 0.0 && x < b) {
        return Err(Error::Domain(format!(
            "dividend barrier needs 0 < x < b, got x={x}, b={b}"
        )));
    }
    Ok(())
}

/// Continuous jump density of the reflected process's ruin law for suprema
/// below the barrier: density in `(s, y, z)` with `s in [x, b)`.
#[allow(clippy::too_many_arguments)]
pub fn gs_dividend_continuous_below(
    model: &LevyModel,
    b: f64,
    q: f64,
    lambda: f64,
    x: f64,
    s: f64,
    y: f64,
    z: f64,
) -> Result<f64> {
    dividend_checks(x, b)?;
    if !(s >= x && s < b) {
        return Err(Error::Domain(format!("this piece needs s in [x, b), got {s}")));
    }
    if y >= s || y < 0.0 || z <= 0.0 {
        return Ok(0.0);
    }
    let wq = ScaleSet::new(*model, q)?;
    let wl = ScaleSet::new(*model, lambda)?;
    Ok((wq.log_w(x) - wq.log_w(s)).exp() * wl.exit_bracket(s - y, s) * model.levy_density(y + z))
}

/// Atom (`y = s`) companion of [`gs_dividend_continuous_below`], in `(s, z)`.
pub fn gs_dividend_atom_below(
    model: &LevyModel,
    b: f64,
    q: f64,
    lambda: f64,
    x: f64,
    s: f64,
    z: f64,
) -> Result<f64> {
    dividend_checks(x, b)?;
    if !(s >= x && s < b) {
        return Err(Error::Domain(format!("this piece needs s in [x, b), got {s}")));
    }
    if z <= 0.0 {
        return Ok(0.0);
    }
    let wq = ScaleSet::new(*model, q)?;
    let wl = ScaleSet::new(*model, lambda)?;
    Ok((wq.log_w(x) - wq.log_w(s)).exp() * wl.w0_plus() * model.levy_density(s + z))
}

/// Survival mass accumulated at the barrier: `int_b^inf exp(-int_x^s ...) ds`
/// for the barrier gap (flat at `b` beyond the barrier), truncated where the
/// survival factor drops below `s_max_prob`.
fn barrier_survival_integral(wq: &ScaleSet, x: f64, b: f64, cfg: &QuadratureConfig) -> f64 {
    let reach = (wq.log_w(x) - wq.log_w(b)).exp();
    let rate = wq.log_deriv(b);
    // Survival beyond b decays exactly exponentially at rate W_q'(b)/W_q(b);
    // integrate e^{-rate (s - b)} out to where the factor passes the cutoff.
    let horizon = (reach / cfg.s_max_prob).ln().max(0.0) / rate;
    reach * (1.0 - (-rate * horizon).exp()) / rate
}

/// Jump density of the reflected process's ruin law on the supremum atom at
/// the barrier (`reflected supremum = b`): density in `(y, z)` only.
pub fn gs_dividend_continuous_at_barrier(
    model: &LevyModel,
    b: f64,
    q: f64,
    lambda: f64,
    x: f64,
    y: f64,
    z: f64,
) -> Result<f64> {
    dividend_checks(x, b)?;
    if y >= b || y < 0.0 || z <= 0.0 {
        return Ok(0.0);
    }
    let wq = ScaleSet::new(*model, q)?;
    let wl = ScaleSet::new(*model, lambda)?;
    let mass = barrier_survival_integral(&wq, x, b, &QuadratureConfig::default());
    Ok(mass * wl.exit_bracket(b - y, b) * model.levy_density(y + z))
}

/// Point-mass companion of [`gs_dividend_continuous_at_barrier`] at `y = b`,
/// with density in `z` (nonzero only without a Gaussian part).
pub fn gs_dividend_atom_at_barrier(
    model: &LevyModel,
    b: f64,
    q: f64,
    lambda: f64,
    x: f64,
    z: f64,
) -> Result<f64> {
    dividend_checks(x, b)?;
    if z <= 0.0 {
        return Ok(0.0);
    }
    let wq = ScaleSet::new(*model, q)?;
    let wl = ScaleSet::new(*model, lambda)?;
    let mass = barrier_survival_integral(&wq, x, b, &QuadratureConfig::default());
    Ok(mass * wl.w0_plus() * model.levy_density(b + z))
}

/// Creeping density of the reflected process's ruin law below the barrier.
pub fn gs_dividend_creeping_below(
    model: &LevyModel,
    b: f64,
    q: f64,
    lambda: f64,
    x: f64,
    s: f64,
) -> Result<f64> {
    dividend_checks(x, b)?;
    if !(s >= x && s < b) {
        return Err(Error::Domain(format!("this piece needs s in [x, b), got {s}")));
    }
    let sigma = model.gaussian_coeff();
    if sigma == 0.0 {
        return Ok(0.0);
    }
    let wq = ScaleSet::new(*model, q)?;
    let wl = ScaleSet::new(*model, lambda)?;
    Ok((wq.log_w(x) - wq.log_w(s)).exp() * 0.5 * sigma * sigma * wl.creep_kernel(s))
}

/// Creeping point mass at the barrier: the coefficient of the Dirac mass of
/// the reflected supremum at `b` for boundary-creeping ruin.
pub fn gs_dividend_creeping_barrier_mass(
    model: &LevyModel,
    b: f64,
    q: f64,
    lambda: f64,
    x: f64,
) -> Result<f64> {
    dividend_checks(x, b)?;
    let sigma = model.gaussian_coeff();
    if sigma == 0.0 {
        return Ok(0.0);
    }
    let wq = ScaleSet::new(*model, q)?;
    let wl = ScaleSet::new(*model, lambda)?;
    let mass = barrier_survival_integral(&wq, x, b, &QuadratureConfig::default());
    Ok(mass * 0.5 * sigma * sigma * wl.creep_kernel(b))
}

/// Ruin functional of the reflected process integrated over all four pieces
/// (below-barrier jump + creep, at-barrier jump + creep) — an independent
/// arithmetic path from [`drawdown_probability`] on the barrier boundary.
pub fn dividend_ruin_functional_integrated(
    model: &LevyModel,
    b: f64,
    q: f64,
    lambda: f64,
    x: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    dividend_checks(x, b)?;
    cfg.validate()?;
    let wq = ScaleSet::new(*model, q)?;
    let wl = ScaleSet::new(*model, lambda)?;
    let sigma = model.gaussian_coeff();
    let has_jumps = model.levy_tail_inverse(cfg.z_max_tail).is_some();

    let inner_at = |s: f64| -> Result<f64> {
        let mut inner = wl.w0_plus() * model.levy_tail(s);
        if has_jumps {
            inner += integrate_checked(
                |u| Ok(wl.exit_bracket(u, s) * model.levy_tail(s - u)),
                0.0,
                s,
                cfg.rel_tol * 0.2,
                0.0,
                cfg.max_subdivisions,
            )?
            .value;
        }
        if sigma > 0.0 {
            inner += 0.5 * sigma * sigma * wl.creep_kernel(s);
        }
        Ok(inner)
    };

    let below = integrate_checked(
        |s| Ok((wq.log_w(x) - wq.log_w(s)).exp() * inner_at(s)?),
        x,
        b,
        cfg.rel_tol,
        0.0,
        cfg.max_subdivisions,
    )?
    .value;
    let at_barrier = barrier_survival_integral(&wq, x, b, cfg) * inner_at(b)?;
    Ok(below + at_barrier)
}

// ---------------------------------------------------------------------------
// Finite-barrier reduction (no Gaussian part)
// ---------------------------------------------------------------------------

/// Closed-form density (in `(y, z)`) of ruin before reaching `b`:
/// `W_q(x) levy(y+z) (W_q(b-y)/W_q(b) - W_q(x-y)/W_q(x))` for processes
/// without a Gaussian part. Doubles as the telescoped value of the
/// supremum-integrated ruin triple law restricted to `(x, b)`.
pub fn finite_barrier_reduction(
    model: &LevyModel,
    q: f64,
    x: f64,
    b: f64,
    y: f64,
    z: f64,
) -> Result<f64> {
    if model.gaussian_coeff() != 0.0 {
        return Err(Error::Domain(
            "finite-barrier reduction applies to models without a Gaussian part".into(),
        ));
    }
    if !(x > 0.0 && x < b) {
        return Err(Error::Domain(format!("need 0 < x < b, got x={x}, b={b}")));
    }
    if y < 0.0 || z <= 0.0 {
        return Ok(0.0);
    }
    let wq = ScaleSet::new(*model, q)?;
    let ratio_b = wq.w(b - y) / wq.w(b);
    let ratio_x = if y >= x { 0.0 } else { wq.w(x - y) / wq.w(x) };
    Ok(wq.w(x) * model.levy_density(y + z) * (ratio_b - ratio_x))
}

/// Drawdown-probability bound after a fresh running maximum at `m`; used by
/// the Monte Carlo oracle to retire paths whose remaining drawdown
/// probability is provably negligible.
pub(crate) fn drawdown_prob_from_max_bound(
    model: &LevyModel,
    dd: &DrawdownSpec,
    m: f64,
) -> Result<f64> {
    let w0 = ScaleSet::new(*model, 0.0)?;
    no_drawdown_complement(&w0, model, dd, m)
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

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn exit_prob_reduces_to_scale_ratio_for_ruin() {
        let dd = DrawdownSpec::ruin();
        for model in [cl(), bm(), jd()] {
            let wq = ScaleSet::new(model, 0.4).unwrap();
            for (x, s) in [(0.5, 1.0), (1.0, 3.0), (2.0, 9.0)] {
                let exit = exit_prob_drawdown(&model, &dd, 0.4, x, s).unwrap();
                let expected = wq.w(x) / wq.w(s);
                assert!(
                    (exit - expected).abs() < 1e-10 * expected,
                    "exit mismatch for {model:?} at ({x}, {s})"
                );
            }
        }
    }

    #[test]
    fn exit_prob_needs_s_above_x() {
        let dd = DrawdownSpec::ruin();
        assert!(exit_prob_drawdown(&cl(), &dd, 0.1, 2.0, 2.0).is_err());
        assert!(exit_prob_drawdown(&cl(), &dd, 0.1, 2.0, 1.0).is_err());
    }

    #[test]
    fn exit_prob_tends_to_one_near_start() {
        let dd = DrawdownSpec::linear(0.5, 0.5).unwrap();
        let p = exit_prob_drawdown(&bm(), &dd, 0.3, 1.0, 1.0 + 1e-9).unwrap();
        assert!((p - 1.0).abs() < 1e-7);
    }

    #[test]
    fn brownian_ruin_probability_closed_form() {
        // Pure creeping: the assembled functional equals e^{-2 mu x / sigma^2}.
        let dd = DrawdownSpec::ruin();
        let expected = (-0.6f64).exp();
        let got = drawdown_probability(&bm(), &dd, 1.0, &cfg()).unwrap();
        assert!((got - expected).abs() < 1e-6, "BM ruin probability {got} vs {expected}");
    }

    #[test]
    fn cramer_lundberg_ruin_probability_closed_form() {
        // (lambda0 / (c mu)) e^{-(mu - lambda0/c) x} at x = 1.
        let dd = DrawdownSpec::ruin();
        let expected = (2.0 / 2.2) * (-(2.0 - 2.0 / 1.1) * 1.0f64).exp();
        let got = drawdown_probability(&cl(), &dd, 1.0, &cfg()).unwrap();
        assert!((got - expected).abs() < 1e-4, "CL ruin probability {got} vs {expected}");
    }

    #[test]
    fn drawdown_certain_without_net_profit() {
        let lossy = LevyModel::jump_diffusion(1.9, 0.5, 2.0, 2.0).unwrap();
        let dd = DrawdownSpec::ruin();
        let got = drawdown_probability(&lossy, &dd, 1.0, &cfg()).unwrap();
        assert!((got - 1.0).abs() < 1e-5, "lossy drawdown probability {got}");
    }

    #[test]
    fn creeping_density_zero_without_gaussian_part() {
        let dd = DrawdownSpec::linear(0.5, 0.5).unwrap();
        assert_eq!(creeping_density(&cl(), &dd, 0.3, 0.7, 1.0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn creeping_density_integrates_to_brownian_ruin() {
        let dd = DrawdownSpec::ruin();
        let model = bm();
        let q = integrate_checked(
            |s| creeping_density(&model, &dd, 0.0, 0.0, 1.0, s),
            1.0,
            60.0,
            1e-9,
            0.0,
            4000,
        )
        .unwrap();
        assert!((q.value - (-0.6f64).exp()).abs() < 1e-7);
    }

    #[test]
    fn creeping_density_at_start_is_bare_kernel() {
        let dd = DrawdownSpec::linear(0.5, 0.5).unwrap();
        let model = bm();
        let wl = ScaleSet::new(model, 0.2).unwrap();
        let gap = dd.xi_bar(1.0).unwrap();
        let expected = 0.5 * wl.creep_kernel(gap);
        let got = creeping_density(&model, &dd, 0.7, 0.2, 1.0, 1.0).unwrap();
        assert!((got - expected).abs() < 1e-12 * expected.abs().max(1.0));
    }

    #[test]
    fn jump_density_vanishes_outside_domain() {
        let dd = DrawdownSpec::linear(0.6, 0.5).unwrap();
        // y >= s.
        assert_eq!(
            jump_density_continuous(&cl(), &dd, 0.0, 0.0, 1.0, 2.0, 2.5, 0.3).unwrap(),
            0.0
        );
        // z below -xi(s).
        let xi_s = dd.xi(2.0).unwrap();
        assert_eq!(
            jump_density_continuous(&cl(), &dd, 0.0, 0.0, 1.0, 2.0, 1.5, -xi_s - 0.1).unwrap(),
            0.0
        );
        // Atom vanishes for sigma > 0.
        assert_eq!(jump_density_atom(&bm(), &dd, 0.0, 0.0, 1.0, 2.0, 0.5).unwrap(), 0.0);
        assert_eq!(jump_density_atom(&jd(), &dd, 0.0, 0.0, 1.0, 2.0, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn jump_density_matches_ruin_reduction() {
        // With the zero boundary and q = lambda the factors reduce to
        // W_q(x)/W_q(s) (W_q'(s-y) - W_q(s-y) W_q'(s)/W_q(s)) levy(y+z).
        let dd = DrawdownSpec::ruin();
        let model = cl();
        let q = 0.3;
        let wq = ScaleSet::new(model, q).unwrap();
        for (x, s, y, z) in [(1.0, 2.0, 0.7, 0.4), (0.5, 4.0, 3.0, 1.1), (2.0, 2.5, 0.1, 0.01)] {
            let got = jump_density_continuous(&model, &dd, q, q, x, s, y, z).unwrap();
            let expected = wq.w(x) / wq.w(s)
                * (wq.w1(s - y) - wq.w(s - y) * wq.w1(s) / wq.w(s))
                * model.levy_density(y + z);
            assert!(
                (got - expected).abs() < 1e-10 * expected.abs().max(1e-12),
                "mismatch at ({x}, {s}, {y}, {z}): {got} vs {expected}"
            );
        }
    }

    #[test]
    fn jump_atom_example() {
        // CL at s = x: survival factor is 1, density is W(0+) levy(x + z).
        let model = cl();
        let dd = DrawdownSpec::ruin();
        let got = jump_density_atom(&model, &dd, 0.2, 0.5, 1.0, 1.0, 0.5).unwrap();
        let expected = (1.0 / 1.1) * model.levy_density(1.5);
        assert!((got - expected).abs() < 1e-12);
        // And with the scale ratio at s = 2 for q = lambda = 0.
        let got2 = jump_density_atom(&model, &dd, 0.0, 0.0, 1.0, 2.0, 0.5).unwrap();
        let w0 = ScaleSet::new(model, 0.0).unwrap();
        let expected2 = w0.w(1.0) / w0.w(2.0) * (1.0 / 1.1) * model.levy_density(2.5);
        assert!((got2 - expected2).abs() < 1e-12);
    }

    #[test]
    fn integrated_jump_law_recovers_cl_ruin_probability() {
        // The full triple-law integral for the pure-jump model must match
        // the classical ruin probability.
        let dd = DrawdownSpec::ruin();
        let pen = PenaltySpec::indicator(0.0, 0.0).unwrap();
        let got = penalty_at_drawdown(&cl(), &dd, &pen, 1.0, &cfg()).unwrap();
        let expected = (2.0 / 2.2) * (-(2.0 - 2.0 / 1.1) * 1.0f64).exp();
        assert!((got - expected).abs() < 1e-5, "{got} vs {expected}");
    }

    #[test]
    fn joint_laplace_at_zero_rates_is_probability() {
        let dd = DrawdownSpec::linear(0.6, 0.5).unwrap();
        for model in [cl(), bm(), jd()] {
            let a = joint_laplace(&model, &dd, 0.0, 0.0, 1.0, &cfg()).unwrap();
            let b = drawdown_probability(&model, &dd, 1.0, &cfg()).unwrap();
            assert!((a - b).abs() < 1e-9, "{model:?}");
        }
    }

    #[test]
    fn joint_laplace_monotone_in_rates() {
        let dd = DrawdownSpec::linear(0.5, 0.5).unwrap();
        for model in [cl(), bm()] {
            let base = joint_laplace(&model, &dd, 0.1, 0.1, 1.0, &cfg()).unwrap();
            let more_q = joint_laplace(&model, &dd, 0.3, 0.1, 1.0, &cfg()).unwrap();
            let more_l = joint_laplace(&model, &dd, 0.1, 0.3, 1.0, &cfg()).unwrap();
            assert!(more_q < base && more_l < base, "{model:?}");
        }
    }

    #[test]
    fn brownian_joint_laplace_matches_first_passage_transform() {
        // Ruin by creeping only:
        // E_x[e^{-rho tau}; tau < inf] = e^{-(mu + sqrt(mu^2 + 2 rho sigma^2)) x / sigma^2},
        // which recovers e^{-2 mu x / sigma^2} at rho = 0.
        let dd = DrawdownSpec::ruin();
        let model = bm();
        for rho in [0.0, 0.1, 0.5, 1.5] {
            let got = joint_laplace(&model, &dd, rho, rho, 1.0, &cfg()).unwrap();
            let expected = (-(0.3 + (0.09f64 + 2.0 * rho).sqrt()) * 1.0).exp();
            assert!((got - expected).abs() < 1e-6, "rho = {rho}: {got} vs {expected}");
        }
    }

    #[test]
    fn complex_joint_laplace_matches_real_on_axis() {
        let dd = DrawdownSpec::linear(0.6, 0.5).unwrap();
        for model in [cl(), bm(), jd()] {
            let real = joint_laplace(&model, &dd, 0.4, 0.2, 1.0, &cfg()).unwrap();
            let complexified = joint_laplace_complex(
                &model,
                &dd,
                Complex64::new(0.4, 0.0),
                Complex64::new(0.2, 0.0),
                1.0,
                &cfg(),
            )
            .unwrap();
            assert!(
                (complexified.re - real).abs() < 1e-7 * real.max(1e-9),
                "{model:?}: {complexified} vs {real}"
            );
            assert!(complexified.im.abs() < 1e-9);
        }
    }

    #[test]
    fn complex_joint_laplace_conjugate_symmetry() {
        // F(conj q, conj lambda) = conj F(q, lambda) for real-valued laws.
        let dd = DrawdownSpec::ruin();
        let model = bm();
        let q = Complex64::new(0.5, 1.2);
        let l = Complex64::new(0.7, -0.4);
        let a = joint_laplace_complex(&model, &dd, q, l, 1.0, &cfg()).unwrap();
        let b = joint_laplace_complex(&model, &dd, q.conj(), l.conj(), 1.0, &cfg()).unwrap();
        assert!((a - b.conj()).norm() < 1e-9 * a.norm());
    }

    #[test]
    fn perpetual_put_penalty_is_bounded_by_strike_times_probability() {
        let dd = DrawdownSpec::ruin();
        let pen =
            PenaltySpec::new(Penalty::PerpetualPut { strike: 2.0, log_boundary: 0.0 }, 0.05, 0.05)
                .unwrap();
        let value = penalty_at_drawdown(&cl(), &dd, &pen, 1.0, &cfg()).unwrap();
        let prob = joint_laplace(&cl(), &dd, 0.05, 0.05, 1.0, &cfg()).unwrap();
        assert!(value > 0.0);
        assert!(value <= 2.0 * prob + 1e-9);
    }

    #[test]
    fn constrained_jump_mass_decreases_in_the_requirement() {
        // Integrated constrained triple law, nonincreasing in the minimum
        // capital.
        let model = cl();
        let mut prev = f64::INFINITY;
        for v in [0.0, 0.2, 0.4, 0.6] {
            let dd = DrawdownSpec::ruin().with_min_capital(v).unwrap();
            let pen = PenaltySpec::indicator(0.0, 0.0).unwrap();
            let mass = penalty_at_drawdown(&model, &dd, &pen, 1.0, &cfg()).unwrap();
            assert!(mass <= prev + 1e-9, "mass increased at v = {v}");
            prev = mass;
        }
    }

    #[test]
    fn tax_zero_rate_reduces_to_ruin_densities() {
        let model = cl();
        let dd = DrawdownSpec::tax_constant(0.0, 1.0).unwrap();
        let ruin = DrawdownSpec::ruin();
        for (s, y, z) in [(1.5, 0.7, 0.4), (3.0, 2.2, 1.0)] {
            let taxed = gs_tax_density(&model, &dd, 0.2, 0.4, 1.0, s, y, z).unwrap();
            let plain = jump_density_continuous(&model, &ruin, 0.2, 0.4, 1.0, s, y, z).unwrap();
            assert!((taxed - plain).abs() <= 1e-10 * plain.abs().max(1e-12));
            let taxed_atom = gs_tax_atom(&model, &dd, 0.2, 0.4, 1.0, s, z).unwrap();
            let plain_atom = jump_density_atom(&model, &ruin, 0.2, 0.4, 1.0, s, z).unwrap();
            assert!((taxed_atom - plain_atom).abs() <= 1e-10 * plain_atom.abs().max(1e-12));
        }
        assert_eq!(gs_tax_creeping(&model, &dd, 0.2, 0.4, 1.0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn taxed_ruin_functional_matches_drawdown_route() {
        let model = cl();
        let dd = DrawdownSpec::tax_constant(0.3, 1.0).unwrap();
        let via_tax = tax_ruin_functional_integrated(&model, &dd, 0.0, 0.0, 1.0, &cfg()).unwrap();
        let via_drawdown = drawdown_probability(&model, &dd, 1.0, &cfg()).unwrap();
        assert!(
            (via_tax - via_drawdown).abs() < 1e-6,
            "tax route {via_tax} vs drawdown route {via_drawdown}"
        );
    }

    #[test]
    fn dividend_below_barrier_matches_ruin_densities() {
        // The barrier never binds below b, so the s < b pieces coincide with
        // the plain ruin triple law.
        let model = jd();
        let ruin = DrawdownSpec::ruin();
        let (q, l, x, b) = (0.1, 0.3, 1.0, 5.0);
        for (s, y, z) in [(1.5, 0.7, 0.4), (4.0, 2.0, 0.8)] {
            let div = gs_dividend_continuous_below(&model, b, q, l, x, s, y, z).unwrap();
            let plain = jump_density_continuous(&model, &ruin, q, l, x, s, y, z).unwrap();
            assert!((div - plain).abs() <= 1e-9 * plain.abs().max(1e-12));
            let div_creep = gs_dividend_creeping_below(&model, b, q, l, x, s).unwrap();
            let plain_creep = creeping_density(&model, &ruin, q, l, x, s).unwrap();
            assert!((div_creep - plain_creep).abs() <= 1e-9 * plain_creep.abs().max(1e-12));
        }
    }

    #[test]
    fn dividend_barrier_masses_match_closed_forms() {
        // The at-barrier survival integral telescopes to W_q(x)/W_q'(b).
        let (q, l, x, b) = (0.2, 0.2, 1.0, 3.0);
        for model in [bm(), cl()] {
            let wq = ScaleSet::new(model, q).unwrap();
            let mass = barrier_survival_integral(&wq, x, b, &cfg());
            let closed = wq.w(x) / wq.w1(b);
            assert!((mass - closed).abs() < 1e-8 * closed, "{model:?}: {mass} vs {closed}");
            if model.gaussian_coeff() > 0.0 {
                let wl = ScaleSet::new(model, l).unwrap();
                let creep_mass = gs_dividend_creeping_barrier_mass(&model, b, q, l, x).unwrap();
                let closed_creep = 0.5
                    * model.gaussian_coeff().powi(2)
                    * (wq.w(x) / wq.w1(b))
                    * wl.creep_kernel(b);
                assert!((creep_mass - closed_creep).abs() < 1e-8 * closed_creep);
            }
        }
    }

    #[test]
    fn dividend_ruin_functional_matches_drawdown_route() {
        let b = 3.0;
        for model in [bm(), cl()] {
            let dd = DrawdownSpec::barrier(b).unwrap();
            let via_pieces =
                dividend_ruin_functional_integrated(&model, b, 0.0, 0.0, 1.0, &cfg()).unwrap();
            let via_drawdown = drawdown_probability(&model, &dd, 1.0, &cfg()).unwrap();
            assert!(
                (via_pieces - via_drawdown).abs() < 1e-6,
                "{model:?}: pieces {via_pieces} vs drawdown {via_drawdown}"
            );
            // Reflected at a barrier, ruin is certain at zero discounting.
            assert!((via_drawdown - 1.0).abs() < 1e-6, "{model:?}: {via_drawdown}");
        }
    }

    #[test]
    fn finite_barrier_closed_form_cases() {
        let model = cl();
        let (q, x, b) = (0.2, 1.0, 3.0);
        // y beyond both x and b: both scale ratios vanish.
        assert_eq!(finite_barrier_reduction(&model, q, x, b, 5.0, 0.3).unwrap(), 0.0);
        // y <= x closed form.
        let wq = ScaleSet::new(model, q).unwrap();
        let (y, z) = (0.6, 0.9);
        let expected = wq.w(x)
            * model.levy_density(y + z)
            * (wq.w(b - y) / wq.w(b) - wq.w(x - y) / wq.w(x));
        let got = finite_barrier_reduction(&model, q, x, b, y, z).unwrap();
        assert!((got - expected).abs() < 1e-12);
        // Unsupported with a Gaussian part.
        assert!(finite_barrier_reduction(&bm(), q, x, b, y, z).is_err());
    }

    #[test]
    fn finite_barrier_matches_supremum_integration() {
        // Numerically integrating the ruin triple law over s in (x, b)
        // (continuous part plus the atom crossing at s = y for y > x) must
        // telescope to the closed form.
        let model = cl();
        let ruin = DrawdownSpec::ruin();
        let (q, x, b) = (0.15f64, 1.0f64, 4.0);
        let wq = ScaleSet::new(model, q).unwrap();
        for (y, z) in [(0.4, 0.7), (1.9, 0.2)] {
            let lo = x.max(y);
            let numeric = integrate_checked(
                |s| jump_density_continuous(&model, &ruin, q, q, x, s, y, z),
                lo,
                b,
                1e-10,
                0.0,
                4000,
            )
            .unwrap()
            .value
                + if y > x {
                    // The supremum can sit exactly at y when the surplus
                    // jumps off its maximum.
                    wq.w(x) / wq.w(y) * wq.w0_plus() * model.levy_density(y + z)
                } else {
                    0.0
                };
            let closed = finite_barrier_reduction(&model, q, x, b, y, z).unwrap();
            assert!(
                (numeric - closed).abs() < 1e-7 * closed.abs().max(1e-12),
                "telescoping failed at (y, z) = ({y}, {z}): {numeric} vs {closed}"
            );
        }
    }

    #[test]
    fn constrained_ruin_density_has_shifted_scale_structure() {
        // Zero boundary with constant minimum capital v at equal rates:
        // the survival factor becomes W_q(x-v)/W_q(s-v) and the bracket is
        // taken at s-v, supported on y in [v, s).
        let model = cl();
        let (q, v, x) = (0.3, 0.4, 1.0);
        let dd = DrawdownSpec::ruin().with_min_capital(v).unwrap();
        let wq = ScaleSet::new(model, q).unwrap();
        for (s, y, z) in [(1.5, 0.9, 0.6), (3.0, 0.5, 0.2), (2.0, 1.99, 1.0)] {
            let got = jump_density_continuous(&model, &dd, q, q, x, s, y, z).unwrap();
            let expected = wq.w(x - v) / wq.w(s - v)
                * (wq.w1(s - y) - wq.w(s - y) * wq.w1(s - v) / wq.w(s - v))
                * model.levy_density(y + z);
            assert!(
                (got - expected).abs() <= 1e-10 * expected.abs().max(1e-12),
                "mismatch at ({s}, {y}, {z}): {got} vs {expected}"
            );
        }
        // Below the capital floor the constrained density vanishes.
        assert_eq!(
            jump_density_continuous(&model, &dd, q, q, x, 2.0, 0.2, 0.5).unwrap(),
            0.0
        );
    }

    #[test]
    fn constrained_law_recovers_triple_law_limit() {
        // Integrating the constrained triple law over the supremum recovers
        // the last-minimum law: for y < x,
        // levy(y+z) (e^{-phi_q (y - v)} W_q(x-v) - W_q(x-y)).
        let model = cl();
        let (q, x, v, y, z) = (0.25f64, 1.0f64, 0.3, 0.8, 0.5);
        let dd = DrawdownSpec::ruin().with_min_capital(v).unwrap();
        let wq = ScaleSet::new(model, q).unwrap();
        let mut prev = 0.0;
        let mut upper = 8.0f64;
        let mut last = 0.0;
        for _ in 0..5 {
            let val = integrate_checked(
                |s| jump_density_continuous(&model, &dd, q, q, x, s, y, z),
                x.max(y),
                upper,
                1e-11,
                0.0,
                4000,
            )
            .unwrap()
            .value;
            // Monotone nondecreasing in the truncation point.
            assert!(val >= prev - 1e-12);
            prev = val;
            last = val;
            upper *= 2.0;
        }
        let expected = model.levy_density(y + z)
            * ((-wq.phi_q() * (y - v)).exp() * wq.w(x - v) - wq.w(x - y));
        assert!(
            (last - expected).abs() < 1e-7 * expected.abs(),
            "triple-law limit {last} vs {expected}"
        );
    }

    #[test]
    fn certain_drawdown_probability_stays_clamped() {
        let lossy = LevyModel::jump_diffusion(1.9, 0.5, 2.0, 2.0).unwrap();
        let p = drawdown_probability(&lossy, &DrawdownSpec::ruin(), 1.0, &cfg()).unwrap();
        assert!((0.0..=1.0).contains(&p));
    }
}
