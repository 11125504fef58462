//! Numerical toolkit for Kato-class potentials, covariant Schrödinger
//! operators on discrete Hermitian bundles and Feynman-Kac Monte Carlo.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod feynman_kac;
pub mod geometry;
pub mod kato;
pub mod operators;
pub mod parallel;
pub mod provenance;
pub mod quadrature;

pub use error::{Error, Result};
pub use parallel::Exec;
