//! Exact verification that a Dudley class restricted to a finite sample is a
//! maximum class.
//!
//! A Dudley class is the family `{ pos(f0 - f) : f in span(f1..fn) }` where
//! `pos(g) = { x : g(x) > 0 }`. On a sample `x1..xN` the crate
//!
//! * evaluates the basis into a design matrix ([`floyd::DesignMatrix`]),
//! * checks the two determinant conditions (every `n`-row minor of the member
//!   columns and every `(n+1)`-row minor of the augmented matrix is nonzero),
//! * enumerates the realized subsets as open cells of the dual hyperplane
//!   arrangement in parameter space ([`arrangement`]),
//! * and compares the count against the Sauer bound ([`setsystem`]).
//!
//! Polynomial bases run end to end in exact rational arithmetic; bases with
//! `sin`, `cos` or `exp` fall back to a tolerance-based sign oracle and never
//! claim a certified verdict.

pub mod arrangement;
pub mod basis;
pub mod error;
pub mod exactnum;
pub mod floyd;
pub mod harness;
pub mod setsystem;

pub use error::{Error, Result};
