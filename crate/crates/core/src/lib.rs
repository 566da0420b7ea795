//! Variable-exponent sequence spaces `ℓ^{p(·)}(ℤ)`: modulars and Luxemburg
//! norms, the fractional Hardy–Littlewood maximal operator, the dyadic
//! Calderón–Zygmund decomposition for sequences, and a seeded harness that
//! checks the strong and weak type inequalities built on them.

pub mod cli;
pub mod czd;
pub mod error;
pub mod exponent;
pub mod harness;
pub mod io;
pub mod lattice;
pub mod maximal;
pub mod norm;

pub use error::{Error, Result};
pub use exponent::ExponentFunction;
pub use lattice::{DyadicBlock, RunSet, Sequence, ZInterval};
