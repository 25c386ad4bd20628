//! Pseudo-spectral solver for scalars convected by two-dimensional
//! incompressible flows on the 2π-periodic torus, with diagnostics for
//! collapsing level-curve pairs (sharp fronts).
//!
//! The crate covers passive scalars in a prescribed flow, 2D Euler,
//! surface quasi-geostrophic, Boussinesq and ideal MHD dynamics. Around the
//! solver sit the front tracker (level curves stored as graphs over x1),
//! fluid particle tracking, and the criteria engine that accumulates the
//! strip velocity integral, the blow-up integrals and the area identities.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod fronts;
pub mod integrator;
pub mod models;
pub mod particles;
pub mod runner;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{GridSpec, RealField, SpectralField, VectorField};
