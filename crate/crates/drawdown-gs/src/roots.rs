//! Polynomial root finding over the complex field.
//!
//! The scale-function exponents of the jump-diffusion family are the zeros
//! of a quartic whose coefficients become complex once the discount rate
//! moves off the real axis (Laplace-inversion contours). A single
//! simultaneous-iteration solver covers both cases; roots are polished with
//! Newton steps afterwards.

use num_complex::Complex64;

use crate::{Error, Result};

/// Evaluate `p(z)` with coefficients in ascending order.
pub fn eval_poly(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

/// Evaluate `p'(z)` with coefficients in ascending order.
pub fn eval_poly_deriv(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for k in (1..coeffs.len()).rev() {
        acc = acc * z + coeffs[k] * (k as f64);
    }
    acc
}

/// All roots of the polynomial with the given ascending coefficients
/// (Weierstrass–Durand–Kerner simultaneous iteration, Newton-polished).
pub fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let degree = coeffs.len().saturating_sub(1);
    if degree == 0 {
        return Err(Error::InvalidParameter("constant polynomial has no roots".into()));
    }
    let lead = coeffs[degree];
    if lead.norm() == 0.0 {
        return Err(Error::InvalidParameter("leading coefficient is zero".into()));
    }

    let monic: Vec<Complex64> = coeffs.iter().map(|&c| c / lead).collect();

    // Cauchy bound for the root radius of the monic polynomial.
    let radius = 1.0
        + monic[..degree]
            .iter()
            .map(|c| c.norm())
            .fold(0.0f64, f64::max);

    // Initial guesses on a circle, rotated off the axes so real-rooted
    // polynomials do not start on a symmetry line.
    let mut roots: Vec<Complex64> = (0..degree)
        .map(|j| {
            let angle = 2.0 * std::f64::consts::PI * (j as f64) / (degree as f64) + 0.4;
            Complex64::from_polar(radius.max(0.5), angle)
        })
        .collect();

    let mut converged = false;
    for _ in 0..500 {
        let mut max_step = 0.0f64;
        for j in 0..degree {
            let mut denom = Complex64::new(1.0, 0.0);
            for k in 0..degree {
                if k != j {
                    denom *= roots[j] - roots[k];
                }
            }
            if denom.norm() == 0.0 {
                // Coincident iterates; nudge apart and retry next sweep.
                roots[j] += Complex64::new(1e-8 * radius, 1e-8 * radius);
                max_step = f64::INFINITY;
                continue;
            }
            let step = eval_poly(&monic, roots[j]) / denom;
            roots[j] -= step;
            let scale = roots[j].norm().max(1.0);
            max_step = max_step.max(step.norm() / scale);
        }
        if max_step < 1e-14 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence { what: "polynomial root iteration", iterations: 500 });
    }

    // Newton polish restores full precision near clustered roots.
    for root in roots.iter_mut() {
        for _ in 0..2 {
            let dp = eval_poly_deriv(&monic, *root);
            if dp.norm() == 0.0 {
                break;
            }
            let step = eval_poly(&monic, *root) / dp;
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            *root -= step;
        }
    }

    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_contains(roots: &[Complex64], expected: Complex64, tol: f64) {
        let best = roots
            .iter()
            .map(|r| (r - expected).norm())
            .fold(f64::INFINITY, f64::min);
        assert!(best < tol, "no root near {expected} (closest off by {best:.3e})");
    }

    #[test]
    fn real_rooted_quartic() {
        // (x-1)(x-2)(x-3)(x-4) = x^4 - 10x^3 + 35x^2 - 50x + 24
        let coeffs = [c(24.0, 0.0), c(-50.0, 0.0), c(35.0, 0.0), c(-10.0, 0.0), c(1.0, 0.0)];
        let roots = polynomial_roots(&coeffs).unwrap();
        for expected in [1.0, 2.0, 3.0, 4.0] {
            assert_contains(&roots, c(expected, 0.0), 1e-10);
        }
    }

    #[test]
    fn conjugate_pairs() {
        // (x^2+1)(x^2+2x+5) = x^4 + 2x^3 + 6x^2 + 2x + 5
        let coeffs = [c(5.0, 0.0), c(2.0, 0.0), c(6.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)];
        let roots = polynomial_roots(&coeffs).unwrap();
        assert_contains(&roots, c(0.0, 1.0), 1e-10);
        assert_contains(&roots, c(0.0, -1.0), 1e-10);
        assert_contains(&roots, c(-1.0, 2.0), 1e-10);
        assert_contains(&roots, c(-1.0, -2.0), 1e-10);
    }

    #[test]
    fn zero_constant_term_has_root_at_origin() {
        // x(x^3 + 2x + 7)
        let coeffs = [c(0.0, 0.0), c(7.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let roots = polynomial_roots(&coeffs).unwrap();
        assert_contains(&roots, c(0.0, 0.0), 1e-12);
    }

    #[test]
    fn complex_coefficients_residuals() {
        let coeffs = [c(1.0, -2.0), c(0.5, 3.0), c(-4.0, 0.25), c(0.0, 1.0), c(2.0, 0.5)];
        let roots = polynomial_roots(&coeffs).unwrap();
        assert_eq!(roots.len(), 4);
        for r in &roots {
            let residual = eval_poly(&coeffs, *r).norm();
            assert!(residual < 1e-9, "residual {residual:.3e} at {r}");
        }
    }

    #[test]
    fn random_quartics_have_small_residuals() {
        // Deterministic pseudo-random coefficients.
        let mut state = 0x2545F4914F6CDD1Du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 4.0 - 2.0
        };
        for _ in 0..200 {
            let coeffs: Vec<Complex64> = (0..5).map(|_| c(next(), next())).collect();
            if coeffs[4].norm() < 1e-3 {
                continue;
            }
            let scale = coeffs.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
            let roots = polynomial_roots(&coeffs).unwrap();
            for r in &roots {
                let residual = eval_poly(&coeffs, *r).norm();
                let tol = 1e-8 * scale * r.norm().max(1.0).powi(4);
                assert!(residual < tol, "residual {residual:.3e} at {r}");
            }
        }
    }
}
