//! Additive complements of the squares `S = {1², 2², 3², …}`.
//!
//! A set `W ⊆ ℕ` is an additive complement of `S` when `S + W` contains every
//! sufficiently large integer. This crate builds concrete candidates, counts
//! their representation functions exactly, checks the residue-class argument
//! that bounds `Σ_{n ≤ N} R(n) − N` from below, reproduces the constant
//! optimization behind that bound, and numerically certifies the
//! Euler–Maclaurin estimates for the circle sum `Σ_{m ≤ √N} √(N − m²)`.

pub mod acceptance;
pub mod analysis;
pub mod constructors;
pub mod counting;
pub mod error;
pub mod lemma;
pub mod optimizer;
pub mod quadrature;
pub mod report;
pub mod sequences;

pub use error::{Error, Result};
pub use sequences::{counting_function, coverage_report, ComplementCandidate, CoverageReport};
