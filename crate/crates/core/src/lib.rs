//! Bound states of singular interactions supported on closed surfaces in
//! flat and hyperbolic three-space.
//!
//! The central object is the principal (Krein) matrix Φ(−ν²); bound-state
//! energies E = −ν² are the zeros of its lowest eigenvalue.

pub mod bounds;
pub mod error;
pub mod geometry;
pub mod hybrid;
pub mod kernels;
pub mod linalg;
pub mod oracles;
pub mod principal;
pub mod quadrature;
pub mod variational;

pub use error::{Error, Result};
