use std::io::Write;

use serde::Serialize;

use super::split::Propagator;
use super::state::SpinorWavefunction;
use crate::error::{Error, Result};
use crate::observables::{center_of_mass, inversion};
use crate::spectrum::band_populations;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandObserver {
    /// Plane-wave truncation for the band solver.
    pub m: usize,
    /// Record `P(nu)` for `nu = 1..=count`.
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObserverConfig {
    pub stride: usize,
    pub bands: Option<BandObserver>,
    pub density_stride: Option<usize>,
}

impl ObserverConfig {
    pub fn every(stride: usize) -> Self {
        ObserverConfig {
            stride,
            bands: None,
            density_stride: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensitySnapshots {
    pub times: Vec<f64>,
    pub x: Vec<f64>,
    /// One position density per snapshot.
    pub plus: Vec<Vec<f64>>,
    pub minus: Vec<Vec<f64>>,
}

impl DensitySnapshots {
    /// Matrix with one row per grid point and one column per snapshot.
    pub fn write_csv<W: Write>(&self, mut w: W, metadata: &str, plus: bool) -> Result<()> {
        writeln!(w, "# {metadata}")?;
        let mut header = String::from("x");
        for t in &self.times {
            header.push_str(&format!(",t={t:.6}"));
        }
        writeln!(w, "{header}")?;
        let data = if plus { &self.plus } else { &self.minus };
        for (i, x) in self.x.iter().enumerate() {
            let mut row = format!("{x:.8e}");
            for snap in data {
                row.push_str(&format!(",{:.8e}", snap[i]));
            }
            writeln!(w, "{row}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub inversion: Vec<f64>,
    pub center_of_mass: Vec<f64>,
    pub norm: Vec<f64>,
    /// Set when any sample saw density at the grid edge.
    pub boundary_warning: bool,
    /// `band_populations[i][nu - 1]` at sample `i`.
    pub band_populations: Option<Vec<Vec<f64>>>,
    pub densities: Option<DensitySnapshots>,
}

impl Trajectory {
    fn empty(observer: &ObserverConfig, x: Vec<f64>) -> Self {
        Trajectory {
            times: Vec::new(),
            inversion: Vec::new(),
            center_of_mass: Vec::new(),
            norm: Vec::new(),
            boundary_warning: false,
            band_populations: observer.bands.map(|_| Vec::new()),
            densities: observer.density_stride.map(|_| DensitySnapshots {
                times: Vec::new(),
                x,
                plus: Vec::new(),
                minus: Vec::new(),
            }),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Series `P(nu)` over all samples, if recorded.
    pub fn band_series(&self, nu: usize) -> Option<Vec<f64>> {
        self.band_populations
            .as_ref()
            .map(|rows| rows.iter().map(|r| r.get(nu - 1).copied().unwrap_or(0.0)).collect())
    }

    /// CSV with columns `t, sigma_z, x_mean, norm` and `P1..` when present.
    pub fn write_csv<W: Write>(&self, mut w: W, metadata: &str) -> Result<()> {
        writeln!(w, "# {metadata}")?;
        let bands = self.band_populations.as_ref().map(|b| b.first().map_or(0, |r| r.len())).unwrap_or(0);
        let mut header = String::from("t,sigma_z,x_mean,norm");
        for nu in 1..=bands {
            header.push_str(&format!(",P{nu}"));
        }
        writeln!(w, "{header}")?;
        for i in 0..self.len() {
            let mut row = format!(
                "{:.6},{:.12e},{:.10e},{:.15}",
                self.times[i], self.inversion[i], self.center_of_mass[i], self.norm[i]
            );
            if let Some(b) = &self.band_populations {
                for v in &b[i] {
                    row.push_str(&format!(",{v:.12e}"));
                }
            }
            writeln!(w, "{row}")?;
        }
        Ok(())
    }

    fn record(&mut self, state: &SpinorWavefunction, prop: &Propagator, observer: &ObserverConfig) -> Result<()> {
        let com = center_of_mass(state);
        self.times.push(state.time);
        self.inversion.push(inversion(state));
        self.center_of_mass.push(com.value);
        self.norm.push(state.norm_sqr());
        self.boundary_warning |= com.boundary_warning;
        if let (Some(b), Some(rows)) = (observer.bands, self.band_populations.as_mut()) {
            let params = prop.schedule().params_at(state.time);
            let nus: Vec<usize> = (1..=b.count).collect();
            rows.push(band_populations(state, &params, &nus, b.m)?);
        }
        Ok(())
    }

    fn snapshot(&mut self, state: &SpinorWavefunction) {
        if let Some(d) = self.densities.as_mut() {
            d.times.push(state.time);
            d.plus.push(state.plus.iter().map(|z| z.norm_sqr()).collect());
            d.minus.push(state.minus.iter().map(|z| z.norm_sqr()).collect());
        }
    }
}

pub(crate) fn run(
    prop: &mut Propagator,
    state: &mut SpinorWavefunction,
    t_final: f64,
    observer: &ObserverConfig,
) -> Result<Trajectory> {
    if observer.stride == 0 || observer.density_stride == Some(0) {
        return Err(Error::invalid("observer strides must be positive"));
    }
    prop.ready(state)?;
    let n = prop.steps_until(state.time, t_final)?;
    let dt = prop.dt();
    let mut traj = Trajectory::empty(observer, state.grid.xs());
    traj.record(state, prop, observer)?;
    traj.snapshot(state);
    for i in 1..=n {
        prop.raw_step(state, dt);
        if i % observer.stride == 0 {
            traj.record(state, prop, observer)?;
        }
        if observer.density_stride.is_some_and(|s| i % s == 0) {
            traj.snapshot(state);
        }
    }
    let rest = t_final - state.time;
    let tail = rest > 1e-12 * t_final.abs().max(1.0);
    if tail {
        prop.raw_step(state, rest);
    }
    if tail || n % observer.stride != 0 {
        traj.record(state, prop, observer)?;
    }
    if !state.norm_sqr().is_finite() {
        return Err(Error::Numerical(format!("state diverged before t = {}", state.time)));
    }
    Ok(traj)
}
