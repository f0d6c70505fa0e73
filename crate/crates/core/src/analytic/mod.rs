//! Low-dimensional reference models: Landau-Zener crossings, the chirped
//! two-level system and photon-number averaging.

pub mod chirp;
pub mod elliptic;
pub mod landau_zener;
pub mod loss;
pub mod ode;
pub mod quadrature;

pub use chirp::{chirped_integrate, chirped_inversion_adiabatic, chirped_phase, chirped_phase_elliptic, InversionSeries};
pub use landau_zener::{
    adiabaticity, lz2_asymptotic, lz2_integrate, lz3_default_tau, lz3_integrate, lz3_integrate_with,
    lz3_transition_matrix, LZParams, Lz2Model, Readout, TransitionMatrix3,
};
pub use loss::{lambda_effective_coupling, poisson_average, AveragedSeries, PhotonDistribution};
