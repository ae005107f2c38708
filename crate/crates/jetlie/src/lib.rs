//! Exact Lie point-symmetry analysis of completely integrable PDE systems.
//!
//! The crate prolongs vector fields to jet spaces, extracts determining
//! equations, solves them over polynomial ansätze, checks Lie-algebra
//! structure and finite symmetries, and analyzes submanifolds of solutions
//! over truncated power series. All arithmetic is exact over the rationals.

pub mod algebra;
pub mod determine;
mod error;
pub mod jet;
pub mod manifold;
pub mod prolong;
pub mod solve;
pub mod symfields;

pub use error::{Error, Result};
