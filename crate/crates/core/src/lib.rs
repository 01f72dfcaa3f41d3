//! Quantum and classical ideal-gas pressure in two-dimensional billiards.
//!
//! Natural units throughout: `ħ = 1`, `2m = 1`, `k_B = 1`, so an eigenstate
//! with wavenumber `k` has `E = k² = k_BT`.

pub mod analytic;
pub mod classical;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod helmholtz;
pub mod specfun;
pub mod thermo;

pub use classical::{Billiard, ClassicalPressure, EnsembleResult, Trajectory};
pub use dynamics::{
    CoherentRun, CoherentStateSpec, DynamicsSettings, RectangleBasis, SpectralExpansion,
};
pub use error::{Error, Result};
pub use geometry::{BoundaryPiece, BoundarySample, Shape, Vec2};
pub use helmholtz::{EigenBasis, FluxMethod, NumericEigenstate, SolverSettings};
pub use thermo::{LocalTempConvention, LocalTemperatureField, PressureReport};
