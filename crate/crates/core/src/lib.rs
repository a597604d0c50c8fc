//! Set-valued dynamic risk measures on finite scenario trees.
//!
//! The crate computes risk-compensating sets `R_t(X)` as exact rational
//! polyhedra, their penalty functions, and checks multiportfolio time
//! consistency both directly (acceptance-set sums) and through the
//! supermartingale property of the associated dual processes.

pub mod cli;
pub mod consistency;
pub mod duals;
pub mod error;
pub mod instance;
pub mod linalg;
pub mod lp;
pub mod num;
pub mod polycalc;
pub mod riskmeasures;
pub mod scalarize;
pub mod scenario;

pub use error::{Error, Result};
pub use num::{ExtRat, Rat};
