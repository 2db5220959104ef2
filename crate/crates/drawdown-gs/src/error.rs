use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("numerical consistency failure: {0}")]
    Numerical(String),

    /// The partial-fraction coefficients of the scale function divide by the
    /// gaps between exponents; coincident exponents have no representation.
    #[error("non-distinct scale-function exponents (minimum gap {min_gap:.3e})")]
    NonDistinctRoots { min_gap: f64 },

    #[error(
        "quadrature failed to reach tolerance within {subdivisions} subdivisions \
         (partial estimate {partial:.6e}, error bound {error_bound:.3e})"
    )]
    QuadratureFailure {
        partial: f64,
        error_bound: f64,
        subdivisions: usize,
    },

    #[error("singular tax transform: 1 - gamma vanishes at running maximum {at}")]
    SingularJacobian { at: f64 },

    #[error("probability estimate {value} exceeds 1 beyond quadrature tolerance")]
    MassBound { value: f64 },

    #[error("transform evaluation not finite at node {re}+{im}i")]
    NonFiniteTransform { re: f64, im: f64 },

    #[error(
        "inverted density {value:.6e} is negative beyond the inversion noise floor {noise:.3e}"
    )]
    NegativeDensity { value: f64, noise: f64 },
}
