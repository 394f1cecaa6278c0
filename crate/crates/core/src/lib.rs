//! Numerical laboratory for eigenvalue moments of one-parameter
//! Schrödinger operators `H(α) = -αΔ + V`.
//!
//! The crate discretizes `H(α)` by second-order finite differences,
//! solves the resulting tridiagonal eigenproblem with Sturm bisection and
//! inverse iteration, and checks the identities and inequalities that
//! govern how Riesz means and heat traces depend on the coupling `α`:
//! trace formula and sum rule for the kinetic matrix elements,
//! monotonicity of `α^{d/2} Σ (-E_j)^σ` for `σ ≥ 2`, the sharp
//! Lieb-Thirring bound, and the Golden-Thompson bound on `tr e^{-tH}`.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod discretize;
pub mod eigensolve;
pub mod error;
pub mod heat_trace;
pub mod matrix_elements;
pub mod moments;
pub mod oscillator_exact;
pub mod potentials;
pub mod quadrature;
pub mod report;
pub mod special;
pub mod suite;

pub use error::{Error, Result};
