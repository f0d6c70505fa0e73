//! Time evolution of the spinor wave packet.

mod schedule;
mod split;
mod state;
mod trajectory;

pub use schedule::{CouplingFn, DetuningFn, Schedule};
pub use split::{GaugeMode, Propagator};
pub use state::SpinorWavefunction;
pub use trajectory::{BandObserver, DensitySnapshots, ObserverConfig, Trajectory};

use crate::error::Result;

/// Gauge used for a schedule: the accelerated frame whenever a force acts.
/// With `F = 0` both modes are the same evolution.
pub fn force_gauge(_state: &SpinorWavefunction, schedule: &Schedule) -> GaugeMode {
    if schedule.force > 0.0 {
        GaugeMode::Accelerated
    } else {
        GaugeMode::Direct
    }
}

/// One split-operator step in the mode chosen by [`force_gauge`].
pub fn step(state: &SpinorWavefunction, schedule: &Schedule, dt: f64) -> Result<SpinorWavefunction> {
    let mut out = state.clone();
    let mode = force_gauge(state, schedule);
    Propagator::new(state.grid, *schedule, dt, mode)?.step(&mut out)?;
    Ok(out)
}

/// Repeated stepping to `t_final`, sampling every `observer_stride` steps.
pub fn evolve(
    state: &SpinorWavefunction,
    schedule: &Schedule,
    t_final: f64,
    dt: f64,
    observer_stride: usize,
) -> Result<(Trajectory, SpinorWavefunction)> {
    let mode = force_gauge(state, schedule);
    let mut prop = Propagator::new(state.grid, *schedule, dt, mode)?;
    let mut out = state.clone();
    let traj = trajectory::run(&mut prop, &mut out, t_final, &ObserverConfig::every(observer_stride))?;
    Ok((traj, out))
}

/// Like [`evolve`] with an explicit gauge and observer configuration.
pub fn evolve_with(
    state: &mut SpinorWavefunction,
    propagator: &mut Propagator,
    t_final: f64,
    observer: &ObserverConfig,
) -> Result<Trajectory> {
    trajectory::run(propagator, state, t_final, observer)
}
