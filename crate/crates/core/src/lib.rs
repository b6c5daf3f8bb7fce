//! Weighted spectral geometric means on the cone of positive definite
//! matrices, the trace divergence `tr[A nabla_t B - F_t(A, B)]` they induce,
//! and the barycenter minimizing a weighted sum of such divergences.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: Hermitian/positive definite types, spectral calculus,
//!   Loewner comparisons, Daleckii-Krein derivatives, seeded sampling.
//! - [`means`]: two-variable means (`nabla_t`, `!_t`, `#_t`, spectral,
//!   `F_t`, Renyi quantity, Wasserstein, log-Euclidean) and distances.
//! - [`order`]: log-majorization and report-style checks of the operator,
//!   norm, trace and eigenvalue inequalities satisfied by `F_t`.
//! - [`divergence`]: the divergence, its gradient and the axiom checks.
//! - [`quadrature`] and [`barycenter`]: integral representations and the
//!   barycenter solver.
//! - [`suite`]: seeded property sweeps with replayable counterexamples.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod barycenter;
pub mod divergence;
pub mod error;
pub mod linalg;
pub mod means;
pub mod order;
pub mod quadrature;
pub mod sample;
pub mod suite;

pub use error::{Error, Result};
pub use linalg::{
    eig_hermitian, frechet_power_derivative, loewner_compare, loewner_margin, random_spd,
    spectral_exp, spectral_log, spectral_power, CMatrix, EigenDecomposition, HermitianMatrix,
    OrderRelation, SpdMatrix, Unitary, DEFAULT_ORDER_TOL,
};
pub use num_complex::Complex64;
