//! Drawdown-based discounted penalty functionals for spectrally negative
//! Lévy risk processes.
//!
//! The crate evaluates expectations of the form
//!
//! ```text
//! E_x[ exp(-q*l - lambda*(tau - l)) * omega(surplus before, surplus at) ; tau < inf ]
//! ```
//!
//! where `tau` is the first time the surplus drops below a boundary drawn
//! from its running maximum (a general drawdown time; classical ruin is the
//! special case of a zero boundary) and `l` is the last time the running
//! maximum was attained before `tau`. Everything is expressed through the
//! q-scale functions of the driving process, which are available in closed
//! form for the three model families implemented here:
//!
//! * compound Poisson with exponential claims ([`model::LevyModel::CramerLundbergExp`]),
//! * Brownian motion with drift ([`model::LevyModel::BrownianDrift`]),
//! * jump diffusion with Erlang(2) claims ([`model::LevyModel::JumpDiffusionErlang2`]).
//!
//! Layout:
//!
//! * [`model`] — model families, Laplace exponents, Lévy densities.
//! * [`scale`] — scale-function evaluation from cached exponent/coefficient sets.
//! * [`drawdown`] — drawdown boundaries (zero / linear / tax / dividend barrier)
//!   and minimum-capital constraints.
//! * [`gs`] — the quadrature engine assembling penalty functionals, exit
//!   probabilities, and the tax / dividend specialisations.
//! * [`inversion`] — Fourier-series Laplace inversion (1-D and iterated 2-D)
//!   for recovering the joint density of the drawdown time pair.
//! * [`mc`] — an independent Monte Carlo simulator used as ground truth.
//! * [`cli`] — config schema, figure presets, and the command implementations
//!   behind the `drawdown-gs` binary.

// Validation uses `!(v > 0.0)` so that NaN parameters are rejected along
// with out-of-range ones; `v <= 0.0` would wave NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod drawdown;
mod error;
pub mod gs;
pub mod inversion;
pub mod mc;
pub mod model;
pub mod quad;
pub mod roots;
pub mod scale;

pub use error::{Error, Result};
pub use model::LevyModel;
