//! Difference operators, energy, Green's functions and boundary value
//! problems on the one-sided full shift over `N` symbols, in exact
//! rational arithmetic.

pub mod acceptance;
pub mod bvp;
pub mod energy;
pub mod error;
pub mod exec;
pub mod green;
pub mod measure;
pub mod numeric;
pub mod operators;
pub mod report;
pub mod sampling;
pub mod shift;

pub use error::{Error, Result};
pub use exec::ExecMode;
pub use numeric::{Rational, RationalMatrix};
pub use shift::{Alphabet, LevelSet, Point, Word};
