//! Numerical homogenization of periodic convex integrands with Orlicz growth.
//!
//! The crate computes the homogenized density `f_hom` through the periodic
//! cell problem, solves the oscillating problems `min ∫_Ω f(x/ε, ∇u)` at
//! finite `ε`, builds recovery sequences, and checks two-scale convergence
//! of solution sequences against separable oscillating test functions.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(a < b)` also rejects NaN

pub mod cell;
pub mod cli;
pub mod energy;
pub mod epsproblem;
pub mod error;
pub mod field;
pub mod integrand;
pub mod nfunc;
mod precond;
pub mod sampling;
pub mod solver;
pub mod twoscale;

pub use error::{Error, Result};
