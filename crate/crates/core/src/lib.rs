//! Core algorithms for a tagged-particle kinetic-hierarchy laboratory:
//! exact diagram combinatorics, Landau collision coefficients, spectral
//! velocity-space operators, the truncated hierarchy integrator, and the
//! geometric lemmas backing the momentum-integral estimates.

pub mod combinatorics;
pub mod error;
pub mod geometry;
pub mod hierarchy;
pub mod landau;
pub mod quad;
pub mod solver;
pub mod spectral;

pub use error::CoreError;
