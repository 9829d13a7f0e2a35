//! Exact constructions and numerical checks for pairs of unitaries
//! satisfying `V⁻¹U²V = U³`.
//!
//! In finite dimension that relation forces `V⁻¹UV` to commute with `U`; on
//! `ℓ²(ℕ×ℤ)` it does not. This crate builds both kinds of realization,
//! measures the defects of arbitrary pairs, checks the quantitative
//! finite-dimensional bound, searches for extremal approximate pairs, and
//! simulates the swap-test protocol that would probe the relation.

pub mod circle;
pub mod construction;
pub mod error;
pub mod experiment;
pub mod io;
pub mod operator;
pub mod search;
pub mod witness;
pub mod word;

pub use error::{Error, Result};
