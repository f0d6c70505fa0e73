//! Band structure, spinor wave-packet propagation and Landau-Zener reference
//! models for a two-level atom in a standing-wave cavity mode.
//!
//! All quantities are dimensionless: energies in units of the recoil energy,
//! lengths in units of 1/q and time in units of hbar/E_R.

pub mod analytic;
pub mod error;
pub mod experiments;
pub mod model;
pub mod observables;
pub mod propagator;
pub mod series;
pub mod spectrum;

pub use error::{Error, Result};
pub use model::{GaussianSpec, InternalState, PacketKind, ScaledParams, SpatialGrid};
pub use propagator::{Schedule, SpinorWavefunction, Trajectory};

pub type C64 = num_complex::Complex64;
