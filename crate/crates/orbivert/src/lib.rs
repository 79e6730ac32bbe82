//! Exact invariants of twisted modules over lattice vertex algebras.
//!
//! The pipeline runs from an even unimodular lattice with a finite-order
//! isometry (plus an optional inner shift) to the conformal weight of the
//! twisted module, its trace functions, a numerical check of their modular
//! S-relation, limit diagnostics, and the order-2 orbifold fusion data.
//! All structural quantities are exact rationals; floating point appears
//! only when a series is evaluated at a point or a phase is not a sign.

pub mod catalog;
pub mod characters;
pub mod error;
pub mod fusion;
pub mod lattice;
pub mod matrix;
pub mod orbifold;
pub mod qseries;
pub mod rat;
pub mod suite;

pub use error::{Error, Result};
