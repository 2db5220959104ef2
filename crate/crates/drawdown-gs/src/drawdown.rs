//! Drawdown boundaries and minimum-capital constraints.
//!
//! A drawdown boundary is a continuous function `xi` of the running maximum
//! with `xi_bar(z) = z - xi(z) > 0`: the surplus draws down when it falls
//! below `xi(running max)`. Four shapes are supported — the zero boundary
//! (classical ruin), linear boundaries, the tax boundary accumulated from a
//! (piecewise-)constant tax rate on running-maximum increments, and the
//! dividend-barrier boundary `(z - b) ∨ 0`. All of them make `xi_bar`
//! piecewise affine, which the quadrature engine exploits: integrals of
//! `W'(xi_bar)/W(xi_bar)` reduce to logarithm differences piece by piece.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tax rate on increments of the running maximum, constant or piecewise
/// constant. Rates live in `[0, 1)`; the last piece's rate staying below 1
/// keeps the transformed supremum unbounded (the accumulated boundary never
/// swallows the whole maximum).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TaxRate {
    Constant(f64),
    /// `rates[i]` applies on `[breaks[i], breaks[i+1])`, with `breaks[0]`
    /// equal to the initial surplus and the last rate extending to infinity.
    Piecewise { breaks: Vec<f64>, rates: Vec<f64> },
}

/// The drawdown boundary variants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Boundary {
    /// `xi = 0`: classical ruin.
    Zero,
    /// `xi(z) = a z - b` with `a < 1`, `b >= 0`.
    Linear { a: f64, b: f64 },
    /// `xi(z) = integral of gamma over [x0, z]`.
    Tax { gamma: TaxRate, x0: f64 },
    /// `xi(z) = (z - b) ∨ 0`: reflection at a dividend barrier.
    Barrier { b: f64 },
}

/// Minimum-capital requirement above the drawdown level, applied on the
/// whole pre-drawdown path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MinCapital {
    #[default]
    Zero,
    Constant { v: f64 },
}

/// A drawdown boundary plus optional minimum-capital constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrawdownSpec {
    pub xi: Boundary,
    #[serde(default)]
    pub min_capital: MinCapital,
}

/// One affine piece of `xi_bar` (or `varsigma_bar`): on `[w0, w1]` the value
/// is `g0 + slope * (w - w0)`.
#[derive(Debug, Clone, Copy)]
pub struct AffinePiece {
    pub w0: f64,
    pub w1: f64,
    pub g0: f64,
    pub slope: f64,
}

impl DrawdownSpec {
    pub fn ruin() -> Self {
        DrawdownSpec { xi: Boundary::Zero, min_capital: MinCapital::Zero }
    }

    pub fn linear(a: f64, b: f64) -> Result<Self> {
        if !(a < 1.0) || !a.is_finite() {
            return Err(Error::InvalidParameter(format!("linear slope a must be < 1, got {a}")));
        }
        if !(b >= 0.0) || !b.is_finite() {
            return Err(Error::InvalidParameter(format!("linear offset b must be >= 0, got {b}")));
        }
        if b == 0.0 && a > 0.0 {
            return Err(Error::InvalidParameter(
                "linear boundary with b = 0 needs a <= 0, otherwise the gap vanishes at 0".into(),
            ));
        }
        Ok(DrawdownSpec { xi: Boundary::Linear { a, b }, min_capital: MinCapital::Zero })
    }

    pub fn tax_constant(gamma: f64, x0: f64) -> Result<Self> {
        Self::tax(TaxRate::Constant(gamma), x0)
    }

    pub fn tax(gamma: TaxRate, x0: f64) -> Result<Self> {
        if !(x0 > 0.0) || !x0.is_finite() {
            return Err(Error::InvalidParameter(format!("tax base point x0 must be > 0, got {x0}")));
        }
        match &gamma {
            TaxRate::Constant(g) => {
                if !(0.0..1.0).contains(g) {
                    return Err(Error::InvalidParameter(format!("tax rate must be in [0,1), got {g}")));
                }
            }
            TaxRate::Piecewise { breaks, rates } => {
                if breaks.is_empty() || breaks.len() != rates.len() {
                    return Err(Error::InvalidParameter(
                        "piecewise tax needs matching nonempty breaks and rates".into(),
                    ));
                }
                if (breaks[0] - x0).abs() > 1e-12 {
                    return Err(Error::InvalidParameter(
                        "first tax break must equal the base point x0".into(),
                    ));
                }
                if breaks.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidParameter("tax breaks must be increasing".into()));
                }
                if rates.iter().any(|g| !(0.0..1.0).contains(g)) {
                    return Err(Error::InvalidParameter("tax rates must be in [0,1)".into()));
                }
            }
        }
        Ok(DrawdownSpec { xi: Boundary::Tax { gamma, x0 }, min_capital: MinCapital::Zero })
    }

    pub fn barrier(b: f64) -> Result<Self> {
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::InvalidParameter(format!("barrier level must be > 0, got {b}")));
        }
        Ok(DrawdownSpec { xi: Boundary::Barrier { b }, min_capital: MinCapital::Zero })
    }

    /// Attach a constant minimum-capital requirement `v >= 0`. Feasibility
    /// against `xi_bar` depends on the initial surplus and is checked at
    /// evaluation time via [`DrawdownSpec::validate_from`].
    pub fn with_min_capital(mut self, v: f64) -> Result<Self> {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter(format!("minimum capital must be >= 0, got {v}")));
        }
        self.min_capital = if v == 0.0 { MinCapital::Zero } else { MinCapital::Constant { v } };
        Ok(self)
    }

    /// Validates a deserialized spec.
    pub fn validate(self) -> Result<Self> {
        let rebuilt = match self.xi.clone() {
            Boundary::Zero => DrawdownSpec::ruin(),
            Boundary::Linear { a, b } => DrawdownSpec::linear(a, b)?,
            Boundary::Tax { gamma, x0 } => DrawdownSpec::tax(gamma, x0)?,
            Boundary::Barrier { b } => DrawdownSpec::barrier(b)?,
        };
        match self.min_capital {
            MinCapital::Zero => Ok(rebuilt),
            MinCapital::Constant { v } => rebuilt.with_min_capital(v),
        }
    }

    /// Left edge of the evaluation domain (tax boundaries are anchored at
    /// their base point).
    pub fn domain_start(&self) -> f64 {
        match &self.xi {
            Boundary::Tax { x0, .. } => *x0,
            _ => 0.0,
        }
    }

    fn check_domain(&self, z: f64) -> Result<()> {
        let start = self.domain_start();
        if z < start - 1e-12 {
            return Err(Error::Domain(format!(
                "running maximum {z} below the boundary domain start {start}"
            )));
        }
        Ok(())
    }

    /// The boundary value `xi(z)`.
    pub fn xi(&self, z: f64) -> Result<f64> {
        self.check_domain(z)?;
        Ok(match &self.xi {
            Boundary::Zero => 0.0,
            Boundary::Linear { a, b } => a * z - b,
            Boundary::Tax { gamma, x0 } => match gamma {
                TaxRate::Constant(g) => g * (z - x0),
                TaxRate::Piecewise { breaks, rates } => {
                    let mut acc = 0.0;
                    for (i, &rate) in rates.iter().enumerate() {
                        let lo = breaks[i];
                        let hi = if i + 1 < breaks.len() { breaks[i + 1] } else { f64::INFINITY };
                        if z <= lo {
                            break;
                        }
                        acc += rate * (z.min(hi) - lo);
                    }
                    acc
                }
            },
            Boundary::Barrier { b } => (z - b).max(0.0),
        })
    }

    /// The gap `xi_bar(z) = z - xi(z)` between the running maximum and the
    /// boundary; strictly positive on the domain. Evaluated in rearranged
    /// per-variant form — the literal subtraction cancels catastrophically
    /// once `z` dwarfs the gap (huge running maxima against a barrier).
    pub fn xi_bar(&self, z: f64) -> Result<f64> {
        self.check_domain(z)?;
        Ok(match &self.xi {
            Boundary::Zero => z,
            Boundary::Linear { a, b } => (1.0 - a) * z + b,
            Boundary::Tax { gamma, x0 } => match gamma {
                TaxRate::Constant(g) => (1.0 - g) * z + g * x0,
                TaxRate::Piecewise { breaks, rates } => {
                    let mut acc = *x0;
                    let mut lo = *x0;
                    for (i, &rate) in rates.iter().enumerate() {
                        let hi = if i + 1 < breaks.len() { breaks[i + 1] } else { f64::INFINITY };
                        if z <= lo {
                            break;
                        }
                        acc += (1.0 - rate) * (z.min(hi) - lo);
                        lo = hi;
                    }
                    acc
                }
            },
            Boundary::Barrier { b } => z.min(*b),
        })
    }

    /// The minimum-capital level at running maximum `z`.
    pub fn min_capital_at(&self, _z: f64) -> f64 {
        match self.min_capital {
            MinCapital::Zero => 0.0,
            MinCapital::Constant { v } => v,
        }
    }

    /// `varsigma(z) = xi(z) + min capital`: the effective boundary under the
    /// constraint (itself a valid drawdown boundary).
    pub fn varsigma(&self, z: f64) -> Result<f64> {
        Ok(self.xi(z)? + self.min_capital_at(z))
    }

    /// `varsigma_bar(z) = xi_bar(z) - min capital`.
    pub fn varsigma_bar(&self, z: f64) -> Result<f64> {
        let g = self.xi_bar(z)? - self.min_capital_at(z);
        if g <= 0.0 {
            return Err(Error::Domain(format!(
                "minimum capital reaches the drawdown gap at running maximum {_z}",
                _z = z
            )));
        }
        Ok(g)
    }

    /// Checks that the spec is usable from initial surplus `x`: the gap is
    /// positive and strictly dominates the minimum capital on `[x, inf)`.
    /// All supported gaps are nondecreasing, so the left edge decides.
    pub fn validate_from(&self, x: f64) -> Result<()> {
        if x <= 0.0 {
            return Err(Error::Domain(format!("initial surplus must be > 0, got {x}")));
        }
        let z0 = x.max(self.domain_start());
        self.check_domain(z0)?;
        let gap = self.xi_bar(z0)?;
        if gap <= 0.0 {
            return Err(Error::Domain(format!("drawdown gap not positive at {z0}")));
        }
        let v = self.min_capital_at(z0);
        if v >= gap {
            return Err(Error::Domain(format!(
                "minimum capital {v} must stay below the drawdown gap {gap}"
            )));
        }
        Ok(())
    }

    /// Inverse of the tax gap `xi_bar` (tax boundaries only): the running
    /// maximum of the pre-tax process whose taxed supremum equals `s`.
    pub fn xi_bar_inverse_tax(&self, s: f64) -> Result<f64> {
        let Boundary::Tax { gamma, x0 } = &self.xi else {
            return Err(Error::Domain("xi_bar inverse is defined for tax boundaries".into()));
        };
        if s < *x0 - 1e-12 {
            return Err(Error::Domain(format!("taxed supremum {s} below base point {x0}")));
        }
        match gamma {
            TaxRate::Constant(g) => Ok(x0 + (s - x0) / (1.0 - g)),
            TaxRate::Piecewise { breaks, rates } => {
                // Walk pieces in the image coordinate until s is bracketed.
                let mut z = *x0;
                let mut img = *x0;
                for (i, &rate) in rates.iter().enumerate() {
                    let hi = if i + 1 < breaks.len() { breaks[i + 1] } else { f64::INFINITY };
                    let slope = 1.0 - rate;
                    let img_hi = img + slope * (hi - z);
                    if s <= img_hi || !img_hi.is_finite() {
                        return Ok(z + (s - img) / slope);
                    }
                    z = hi;
                    img = img_hi;
                }
                unreachable!("last tax piece extends to infinity");
            }
        }
    }

    /// Tax rate prevailing at pre-tax running maximum `z`.
    pub fn gamma_at(&self, z: f64) -> Result<f64> {
        let Boundary::Tax { gamma, .. } = &self.xi else {
            return Err(Error::Domain("gamma is defined for tax boundaries".into()));
        };
        Ok(match gamma {
            TaxRate::Constant(g) => *g,
            TaxRate::Piecewise { breaks, rates } => {
                let mut current = rates[0];
                for (i, &brk) in breaks.iter().enumerate() {
                    if z >= brk {
                        current = rates[i];
                    }
                }
                current
            }
        })
    }

    /// Interior breakpoints of the gap function within `(lo, hi)`.
    fn breakpoints_within(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut pts = Vec::new();
        match &self.xi {
            Boundary::Barrier { b } => {
                if *b > lo && *b < hi {
                    pts.push(*b);
                }
            }
            Boundary::Tax { gamma: TaxRate::Piecewise { breaks, .. }, .. } => {
                for &brk in breaks.iter().skip(1) {
                    if brk > lo && brk < hi {
                        pts.push(brk);
                    }
                }
            }
            _ => {}
        }
        pts
    }

    /// Decomposes `xi_bar` (or `varsigma_bar` when `constrained`) on
    /// `[from, to]` into affine pieces.
    pub fn affine_pieces(&self, from: f64, to: f64, constrained: bool) -> Result<Vec<AffinePiece>> {
        if to < from {
            return Err(Error::Domain(format!("piece range reversed: [{from}, {to}]")));
        }
        let mut cuts = vec![from];
        cuts.extend(self.breakpoints_within(from, to));
        cuts.push(to);
        let offset = if constrained { self.min_capital_at(from) } else { 0.0 };
        let mut pieces = Vec::with_capacity(cuts.len() - 1);
        for w in cuts.windows(2) {
            let (w0, w1) = (w[0], w[1]);
            let g0 = self.xi_bar(w0)? - offset;
            let slope = self.slope_at(0.5 * (w0 + w1));
            pieces.push(AffinePiece { w0, w1, g0, slope });
        }
        Ok(pieces)
    }

    /// Slope of the gap function at `z` (away from breakpoints).
    pub fn slope_at(&self, z: f64) -> f64 {
        match &self.xi {
            Boundary::Zero => 1.0,
            Boundary::Linear { a, .. } => 1.0 - a,
            Boundary::Tax { .. } => 1.0 - self.gamma_at(z).unwrap_or(0.0),
            Boundary::Barrier { b } => {
                if z < *b {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Slope of the gap beyond every breakpoint (0 for the barrier).
    pub fn final_slope(&self) -> f64 {
        match &self.xi {
            Boundary::Zero => 1.0,
            Boundary::Linear { a, .. } => 1.0 - a,
            Boundary::Tax { gamma, .. } => match gamma {
                TaxRate::Constant(g) => 1.0 - g,
                TaxRate::Piecewise { rates, .. } => 1.0 - rates[rates.len() - 1],
            },
            Boundary::Barrier { .. } => 0.0,
        }
    }

    /// Last breakpoint of the gap function.
    pub fn last_breakpoint(&self) -> f64 {
        match &self.xi {
            Boundary::Barrier { b } => *b,
            Boundary::Tax { gamma: TaxRate::Piecewise { breaks, .. }, .. } => breaks[breaks.len() - 1],
            _ => 0.0,
        }
    }
}
