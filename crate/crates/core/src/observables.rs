//! Measurement functionals on spinor states.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::InternalState;
use crate::propagator::SpinorWavefunction;

/// `<sigma_z> = |psi_+|^2 - |psi_-|^2`.
pub fn inversion(state: &SpinorWavefunction) -> f64 {
    state.component_norm_sqr(InternalState::Plus) - state.component_norm_sqr(InternalState::Minus)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CenterOfMass {
    pub value: f64,
    /// Density at an edge point exceeds 1e-6: the packet has reached the
    /// periodic boundary and `value` is unreliable.
    pub boundary_warning: bool,
}

pub fn center_of_mass(state: &SpinorWavefunction) -> CenterOfMass {
    let g = state.grid;
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..g.n_points {
        let rho = state.plus[j].norm_sqr() + state.minus[j].norm_sqr();
        num += rho * g.x(j);
        den += rho;
    }
    let edge = |j: usize| state.plus[j].norm_sqr() + state.minus[j].norm_sqr();
    CenterOfMass {
        value: if den > 0.0 { num / den } else { 0.0 },
        boundary_warning: edge(0).max(edge(g.n_points - 1)) > 1e-6,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumWindow {
    pub internal: InternalState,
    pub p_lo: f64,
    pub p_hi: f64,
}

impl MomentumWindow {
    pub fn new(internal: InternalState, p_lo: f64, p_hi: f64) -> Result<Self> {
        if !(p_lo < p_hi) {
            return Err(Error::invalid(format!("empty momentum window [{p_lo}, {p_hi})")));
        }
        Ok(MomentumWindow { internal, p_lo, p_hi })
    }
}

/// Weight of one component in the bins whose physical momentum lies in
/// `[p_lo, p_hi)`.
pub fn momentum_window_probability(state: &SpinorWavefunction, window: &MomentumWindow) -> Result<f64> {
    if !(window.p_lo < window.p_hi) {
        return Err(Error::invalid("momentum window must satisfy p_lo < p_hi"));
    }
    let g = state.grid;
    let lo = g.momentum_index(g.n_points / 2) as f64 * g.dp() - state.gauge_offset;
    let hi = (g.n_points / 2) as f64 * g.dp() - state.gauge_offset;
    if window.p_lo < lo || window.p_hi > hi {
        return Err(Error::invalid(format!(
            "window [{}, {}) exceeds the grid momentum range [{lo}, {hi})",
            window.p_lo, window.p_hi
        )));
    }
    let (ap, am) = state.momentum_amplitudes();
    let amps = match window.internal {
        InternalState::Plus => ap,
        InternalState::Minus => am,
    };
    Ok(amps
        .iter()
        .enumerate()
        .filter(|(j, _)| {
            let p = state.physical_momentum(*j);
            p >= window.p_lo && p < window.p_hi
        })
        .map(|(_, a)| a.norm_sqr())
        .sum())
}

/// Position and momentum densities of both components. Momentum arrays are
/// sorted by physical momentum and normalized so that `sum rho dp` is the
/// component weight.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Densities {
    pub x: Vec<f64>,
    pub plus_x: Vec<f64>,
    pub minus_x: Vec<f64>,
    pub p: Vec<f64>,
    pub plus_p: Vec<f64>,
    pub minus_p: Vec<f64>,
}

pub fn densities(state: &SpinorWavefunction) -> Densities {
    let g = state.grid;
    let n = g.n_points;
    let (ap, am) = state.momentum_amplitudes();
    let inv_dp = 1.0 / g.dp();
    // FFT order -> ascending momentum: bins n/2..n then 0..n/2.
    let order: Vec<usize> = (n / 2..n).chain(0..n / 2).collect();
    Densities {
        x: g.xs(),
        plus_x: state.plus.iter().map(|z| z.norm_sqr()).collect(),
        minus_x: state.minus.iter().map(|z| z.norm_sqr()).collect(),
        p: order.iter().map(|&j| state.physical_momentum(j)).collect(),
        plus_p: order.iter().map(|&j| ap[j].norm_sqr() * inv_dp).collect(),
        minus_p: order.iter().map(|&j| am[j].norm_sqr() * inv_dp).collect(),
    }
}
