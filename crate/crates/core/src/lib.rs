//! Fluid–particle hydrodynamics: the viscous Burgers and Euler fluid–particle
//! systems, their eigenstructure and stability diagnostics, Rankine–Hugoniot
//! shock branches with Liu admissibility, viscous shock profiles and a 1D
//! finite-volume evolution harness.

pub mod error;
pub mod evolve;
pub mod hugoniot;
pub mod models;
pub mod numerics;
pub mod profiles;
pub mod spectral;

pub use error::{Error, Result};
pub use models::{
    BurgersState, EntropyPack, EulerState, ModelDescriptor, ModelKind, PressureLaw, ViscousSystem,
};

/// Validity threshold for densities entering logarithms or reciprocals.
pub const DENSITY_MIN: f64 = 1e-12;
