//! The three spectrally negative Lévy model families and their analytic
//! characteristics: Laplace exponent, Gaussian coefficient, Lévy measure.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A spectrally negative Lévy surplus process, one of three parameterized
/// families. The initial surplus is an argument to operations, not part of
/// the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LevyModel {
    /// Compound Poisson: premium rate `c`, claim arrival rate `lambda0`,
    /// exponential claim sizes with rate `mu_claim` (mean `1/mu_claim`).
    CramerLundbergExp { c: f64, lambda0: f64, mu_claim: f64 },
    /// Brownian motion with drift `mu` (nonzero) and volatility `sigma`.
    BrownianDrift { mu: f64, sigma: f64 },
    /// Jump diffusion: premium rate `c`, volatility `sigma`, arrival rate
    /// `lambda0`, Erlang(2, `alpha`) claim sizes.
    JumpDiffusionErlang2 {
        c: f64,
        sigma: f64,
        lambda0: f64,
        alpha: f64,
    },
}

fn require_positive(name: &str, value: f64) -> Result<()> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "{name} must be strictly positive and finite, got {value}"
        )));
    }
    Ok(())
}

impl LevyModel {
    pub fn cramer_lundberg(c: f64, lambda0: f64, mu_claim: f64) -> Result<Self> {
        require_positive("premium rate c", c)?;
        require_positive("arrival rate lambda0", lambda0)?;
        require_positive("claim rate mu_claim", mu_claim)?;
        Ok(LevyModel::CramerLundbergExp { c, lambda0, mu_claim })
    }

    pub fn brownian(mu: f64, sigma: f64) -> Result<Self> {
        if mu == 0.0 || !mu.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "drift mu must be nonzero and finite, got {mu}"
            )));
        }
        require_positive("volatility sigma", sigma)?;
        Ok(LevyModel::BrownianDrift { mu, sigma })
    }

    pub fn jump_diffusion(c: f64, sigma: f64, lambda0: f64, alpha: f64) -> Result<Self> {
        require_positive("premium rate c", c)?;
        require_positive("volatility sigma", sigma)?;
        require_positive("arrival rate lambda0", lambda0)?;
        require_positive("Erlang rate alpha", alpha)?;
        Ok(LevyModel::JumpDiffusionErlang2 { c, sigma, lambda0, alpha })
    }

    /// Validates the parameters of a deserialized model.
    pub fn validate(self) -> Result<Self> {
        match self {
            LevyModel::CramerLundbergExp { c, lambda0, mu_claim } => {
                Self::cramer_lundberg(c, lambda0, mu_claim)
            }
            LevyModel::BrownianDrift { mu, sigma } => Self::brownian(mu, sigma),
            LevyModel::JumpDiffusionErlang2 { c, sigma, lambda0, alpha } => {
                Self::jump_diffusion(c, sigma, lambda0, alpha)
            }
        }
    }

    /// The Laplace exponent `psi(theta)` for `theta >= 0`, in closed form.
    pub fn laplace_exponent(&self, theta: f64) -> f64 {
        match *self {
            LevyModel::CramerLundbergExp { c, lambda0, mu_claim } => {
                c * theta - lambda0 + lambda0 * mu_claim / (mu_claim + theta)
            }
            LevyModel::BrownianDrift { mu, sigma } => mu * theta + 0.5 * sigma * sigma * theta * theta,
            LevyModel::JumpDiffusionErlang2 { c, sigma, lambda0, alpha } => {
                let ratio = alpha / (alpha + theta);
                c * theta + 0.5 * sigma * sigma * theta * theta - lambda0
                    + lambda0 * ratio * ratio
            }
        }
    }

    /// Derivative of the Laplace exponent on `(0, infinity)`.
    pub fn laplace_exponent_deriv(&self, theta: f64) -> f64 {
        match *self {
            LevyModel::CramerLundbergExp { c, lambda0, mu_claim } => {
                let d = mu_claim + theta;
                c - lambda0 * mu_claim / (d * d)
            }
            LevyModel::BrownianDrift { mu, sigma } => mu + sigma * sigma * theta,
            LevyModel::JumpDiffusionErlang2 { c, sigma, lambda0, alpha } => {
                let d = alpha + theta;
                c + sigma * sigma * theta - 2.0 * lambda0 * alpha * alpha / (d * d * d)
            }
        }
    }

    /// Gaussian coefficient sigma (0 for the pure-jump family).
    pub fn gaussian_coeff(&self) -> f64 {
        match *self {
            LevyModel::CramerLundbergExp { .. } => 0.0,
            LevyModel::BrownianDrift { sigma, .. } => sigma,
            LevyModel::JumpDiffusionErlang2 { sigma, .. } => sigma,
        }
    }

    /// `psi'(0+)`, the net-profit drift. Drawdown probabilities equal one
    /// when this is nonpositive.
    pub fn net_profit_drift(&self) -> f64 {
        match *self {
            LevyModel::CramerLundbergExp { c, lambda0, mu_claim } => c - lambda0 / mu_claim,
            LevyModel::BrownianDrift { mu, .. } => mu,
            LevyModel::JumpDiffusionErlang2 { c, lambda0, alpha, .. } => c - 2.0 * lambda0 / alpha,
        }
    }

    pub fn has_net_profit(&self) -> bool {
        self.net_profit_drift() > 0.0
    }

    /// Density of the Lévy measure at jump size `z > 0` (jumps counted as
    /// positive sizes of the downward moves).
    pub fn levy_density(&self, z: f64) -> f64 {
        match *self {
            LevyModel::CramerLundbergExp { lambda0, mu_claim, .. } => {
                lambda0 * mu_claim * (-mu_claim * z).exp()
            }
            LevyModel::BrownianDrift { .. } => 0.0,
            LevyModel::JumpDiffusionErlang2 { lambda0, alpha, .. } => {
                lambda0 * alpha * alpha * z * (-alpha * z).exp()
            }
        }
    }

    /// Upper tail of the Lévy measure: mass of jumps strictly larger than `z`.
    pub fn levy_tail(&self, z: f64) -> f64 {
        let z = z.max(0.0);
        match *self {
            LevyModel::CramerLundbergExp { lambda0, mu_claim, .. } => {
                lambda0 * (-mu_claim * z).exp()
            }
            LevyModel::BrownianDrift { .. } => 0.0,
            LevyModel::JumpDiffusionErlang2 { lambda0, alpha, .. } => {
                lambda0 * (1.0 + alpha * z) * (-alpha * z).exp()
            }
        }
    }

    /// Smallest `z` with `levy_tail(z) <= cutoff`; `None` for the jump-free
    /// family. Used to truncate jump-size integrals.
    pub fn levy_tail_inverse(&self, cutoff: f64) -> Option<f64> {
        match *self {
            LevyModel::CramerLundbergExp { lambda0, mu_claim, .. } => {
                if cutoff >= lambda0 {
                    Some(0.0)
                } else {
                    Some((lambda0 / cutoff).ln() / mu_claim)
                }
            }
            LevyModel::BrownianDrift { .. } => None,
            LevyModel::JumpDiffusionErlang2 { lambda0, alpha, .. } => {
                if cutoff >= lambda0 {
                    return Some(0.0);
                }
                // (1 + a z) e^{-a z} is strictly decreasing on (0, inf);
                // bracket by doubling, then bisect.
                let target = cutoff / lambda0;
                let tail = |z: f64| (1.0 + alpha * z) * (-alpha * z).exp();
                let mut hi = 1.0;
                let mut iters = 0;
                while tail(hi) > target {
                    hi *= 2.0;
                    iters += 1;
                    if iters > 200 {
                        return Some(hi);
                    }
                }
                let mut lo = hi * 0.5;
                if hi == 1.0 {
                    lo = 0.0;
                }
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if tail(mid) > target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Some(hi)
            }
        }
    }

    /// The largest solution of `psi(theta) = q`, for `q >= 0`.
    ///
    /// Closed form for Brownian motion; safeguarded bisection plus Newton
    /// polish for the jump families (relative tolerance 1e-12).
    pub fn phi_q(&self, q: f64) -> Result<f64> {
        if q < 0.0 {
            return Err(Error::Domain(format!("phi_q requires q >= 0, got {q}")));
        }
        if let LevyModel::BrownianDrift { mu, sigma } = *self {
            let s2 = sigma * sigma;
            return Ok((-mu + (mu * mu + 2.0 * q * s2).sqrt()) / s2);
        }
        if q == 0.0 && self.net_profit_drift() >= 0.0 {
            return Ok(0.0);
        }
        // Bracket: psi grows at least linearly for these families, so double
        // the upper end until psi exceeds q.
        let mut hi = 1.0;
        let mut iters = 0usize;
        while self.laplace_exponent(hi) <= q {
            hi *= 2.0;
            iters += 1;
            if iters > 200 {
                return Err(Error::NonConvergence { what: "phi_q bracketing", iterations: iters });
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.laplace_exponent(mid) > q {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-15 * hi.max(1.0) {
                break;
            }
        }
        // Newton polish from the upper end, where psi - q is positive and convex.
        let mut theta = hi;
        for _ in 0..4 {
            let f = self.laplace_exponent(theta) - q;
            let df = self.laplace_exponent_deriv(theta);
            if df <= 0.0 {
                break;
            }
            let next = theta - f / df;
            if next.is_finite() && next >= lo {
                theta = next;
            } else {
                break;
            }
        }
        Ok(theta)
    }
}
