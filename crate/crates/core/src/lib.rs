//! Exact computations with rational polyhedral cones, fans and the affine
//! toric charts they define.

#![deny(clippy::float_arithmetic)]
// errors carry the offending cones
#![allow(clippy::result_large_err)]

pub mod cli;
pub mod cone;
pub mod fan;
pub mod io;
pub mod lattice;
pub mod linalg;
pub mod monoid;
pub mod reconstruct;
pub mod variety;
