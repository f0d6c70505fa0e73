//! Strang splitting: half potential step, full kinetic step in momentum
//! space, half potential step.

use std::sync::Arc;

use rustfft::Fft;
use serde::Serialize;

use super::schedule::Schedule;
use super::state::{plan, SpinorWavefunction};
use crate::error::{Error, Result};
use crate::model::SpatialGrid;
use crate::C64;

/// How the force term is represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GaugeMode {
    /// `F x` applied as a position-space phase on the periodic grid.
    Direct,
    /// Accelerated frame: kinetic operator `(p - A)^2` with `A` kept within
    /// half a lattice spacing by exact momentum rolls.
    Accelerated,
}

impl std::str::FromStr for GaugeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "direct" => Ok(GaugeMode::Direct),
            "gauge" | "accelerated" => Ok(GaugeMode::Accelerated),
            other => Err(Error::invalid(format!("unknown gauge mode `{other}`"))),
        }
    }
}

/// 2x2 potential propagator for one grid point, row-major.
#[derive(Debug, Clone, Copy)]
struct Mat2 {
    pp: C64,
    pm: C64,
    mm: C64,
}

fn potential_exp(a: f64, b: f64, tau: f64) -> Mat2 {
    // exp(-i tau (a sz + b sx)) = cos(w tau) - i sin(w tau)/w (a sz + b sx)
    let w = (a * a + b * b).sqrt();
    let c = (w * tau).cos();
    let s = if w * tau < 1e-8 {
        tau * (1.0 - (w * tau) * (w * tau) / 6.0)
    } else {
        (w * tau).sin() / w
    };
    Mat2 {
        pp: C64::new(c, -a * s),
        pm: C64::new(0.0, -b * s),
        mm: C64::new(c, a * s),
    }
}

pub struct Propagator {
    grid: SpatialGrid,
    schedule: Schedule,
    dt: f64,
    mode: GaugeMode,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<C64>,
    cos_cell: Vec<f64>,
    /// `exp(-i p^2 dt) / N` in FFT order.
    kinetic: Vec<C64>,
    /// `exp(-i dp x)`, used for momentum rolls.
    roll: Vec<C64>,
    /// `exp(-i F x dt/2)` for the direct mode.
    force_half: Vec<C64>,
    static_half: Option<Vec<Mat2>>,
    kin_tmp: Vec<C64>,
}

impl Propagator {
    pub fn new(grid: SpatialGrid, schedule: Schedule, dt: f64, mode: GaugeMode) -> Result<Self> {
        grid.validate()?;
        schedule.validate()?;
        let bound = grid.max_dt();
        if !(dt > 0.0) || !(dt < bound) {
            return Err(Error::StepSize { dt, bound });
        }
        let n = grid.n_points;
        let (fwd, inv) = plan(n);
        let scratch = vec![C64::new(0.0, 0.0); fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len())];
        let ppc = grid.points_per_cell();
        let cos_cell = (0..ppc).map(|j| grid.x(j).cos()).collect();
        let inv_n = 1.0 / n as f64;
        let kinetic = grid
            .momenta()
            .iter()
            .map(|p| C64::from_polar(inv_n, -p * p * dt))
            .collect();
        let roll = (0..n)
            .map(|j| C64::from_polar(1.0, -grid.dp() * grid.x(j)))
            .collect();
        let force_half = (0..n)
            .map(|j| C64::from_polar(1.0, -schedule.force * grid.x(j) * 0.5 * dt))
            .collect();
        let mut prop = Propagator {
            grid,
            schedule,
            dt,
            mode,
            fwd,
            inv,
            scratch,
            cos_cell,
            kinetic,
            roll,
            force_half,
            static_half: None,
            kin_tmp: vec![C64::new(0.0, 0.0); n],
        };
        if schedule.is_static() {
            prop.static_half = Some(prop.half_matrices(0.0, 0.5 * dt));
        }
        Ok(prop)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn mode(&self) -> GaugeMode {
        self.mode
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    fn half_matrices(&self, t_mid: f64, tau: f64) -> Vec<Mat2> {
        let a = 0.5 * self.schedule.delta(t_mid);
        let v = self.schedule.coupling(t_mid);
        self.cos_cell.iter().map(|&c| potential_exp(a, v * c, tau)).collect()
    }

    fn potential_half(&self, state: &mut SpinorWavefunction, t_mid: f64, tau: f64, full: bool) {
        let owned;
        let mats: &[Mat2] = match (&self.static_half, full) {
            (Some(m), true) => m,
            _ => {
                owned = self.half_matrices(t_mid, tau);
                &owned
            }
        };
        let ppc = mats.len();
        let direct = self.mode == GaugeMode::Direct && self.schedule.force != 0.0;
        for (j, (p, m)) in state.plus.iter_mut().zip(state.minus.iter_mut()).enumerate() {
            let u = mats[j % ppc];
            let (a, b) = (*p, *m);
            let mut np = u.pp * a + u.pm * b;
            let mut nm = u.pm * a + u.mm * b;
            if direct {
                let f = if full {
                    self.force_half[j]
                } else {
                    C64::from_polar(1.0, -self.schedule.force * self.grid.x(j) * tau)
                };
                np *= f;
                nm *= f;
            }
            *p = np;
            *m = nm;
        }
    }

    fn kinetic_factors(&mut self, a: f64, dt: f64, full: bool) {
        // exp(-i (p - a)^2 dt) = exp(-i p^2 dt) exp(2 i p a dt) exp(-i a^2 dt)
        let n = self.grid.n_points;
        let dp = self.grid.dp();
        let inv_n = 1.0 / n as f64;
        if !full {
            for j in 0..n {
                let p = self.grid.momentum_index(j) as f64 * dp - a;
                self.kin_tmp[j] = C64::from_polar(inv_n, -p * p * dt);
            }
            return;
        }
        let theta = 2.0 * dp * a * dt;
        let global = C64::from_polar(1.0, -a * a * dt);
        let w = C64::from_polar(1.0, theta);
        const BLOCK: usize = 32;
        for start in (0..n).step_by(BLOCK) {
            let m0 = self.grid.momentum_index(start);
            let mut f = global * C64::from_polar(1.0, theta * m0 as f64);
            for j in start..(start + BLOCK).min(n) {
                if j == n / 2 {
                    f = global * C64::from_polar(1.0, theta * self.grid.momentum_index(j) as f64);
                }
                self.kin_tmp[j] = self.kinetic[j] * f;
                f *= w;
            }
        }
    }

    fn kinetic(&mut self, state: &mut SpinorWavefunction, a: f64, dt: f64) {
        let full = dt == self.dt;
        let plain = a == 0.0 && full;
        if !plain {
            self.kinetic_factors(a, dt, full);
        }
        let factors = if plain { &self.kinetic } else { &self.kin_tmp };
        for comp in [&mut state.plus, &mut state.minus] {
            self.fwd.process_with_scratch(comp, &mut self.scratch);
            for (z, f) in comp.iter_mut().zip(factors.iter()) {
                *z *= f;
            }
            self.inv.process_with_scratch(comp, &mut self.scratch);
        }
    }

    fn roll(&self, state: &mut SpinorWavefunction, down: bool) {
        for j in 0..self.grid.n_points {
            let r = if down { self.roll[j] } else { self.roll[j].conj() };
            state.plus[j] *= r;
            state.minus[j] *= r;
        }
    }

    fn prepare(&self, state: &mut SpinorWavefunction) -> Result<()> {
        if state.grid != self.grid {
            return Err(Error::invalid("state grid differs from the propagator grid"));
        }
        if self.mode == GaugeMode::Direct && state.gauge_offset != 0.0 {
            state.to_physical_frame();
        }
        Ok(())
    }

    fn step_dt(&mut self, state: &mut SpinorWavefunction, dt: f64) {
        let t = state.time;
        let full = dt == self.dt;
        self.potential_half(state, t + 0.25 * dt, 0.5 * dt, full);
        let a_mid = match self.mode {
            GaugeMode::Direct => 0.0,
            GaugeMode::Accelerated => state.gauge_offset + 0.5 * self.schedule.force * dt,
        };
        self.kinetic(state, a_mid, dt);
        self.potential_half(state, t + 0.75 * dt, 0.5 * dt, full);
        state.time = t + dt;
        if self.mode == GaugeMode::Accelerated {
            state.gauge_offset += self.schedule.force * dt;
            let half = 0.5 * self.grid.dp();
            while state.gauge_offset > half {
                self.roll(state, true);
                state.gauge_offset -= self.grid.dp();
            }
            while state.gauge_offset < -half {
                self.roll(state, false);
                state.gauge_offset += self.grid.dp();
            }
        }
    }

    /// Advance by one step of the configured size.
    pub fn step(&mut self, state: &mut SpinorWavefunction) -> Result<()> {
        self.prepare(state)?;
        let dt = self.dt;
        self.step_dt(state, dt);
        Ok(())
    }

    /// Advance to `t_final`; the last step is shortened if needed.
    pub fn advance_to(&mut self, state: &mut SpinorWavefunction, t_final: f64) -> Result<()> {
        self.prepare(state)?;
        let n = self.steps_until(state.time, t_final)?;
        for _ in 0..n {
            self.step_dt(state, self.dt);
        }
        let rest = t_final - state.time;
        if rest > 1e-12 * t_final.abs().max(1.0) {
            self.step_dt(state, rest);
        }
        state.time = state.time.max(t_final);
        Ok(())
    }

    pub(crate) fn steps_until(&self, t: f64, t_final: f64) -> Result<usize> {
        let span = t_final - t;
        if span < -1e-12 * t_final.abs().max(1.0) {
            return Err(Error::invalid(format!("final time {t_final} precedes state time {t}")));
        }
        let n = (span / self.dt * (1.0 + 1e-12)).floor().max(0.0);
        Ok(n as usize)
    }

    pub(crate) fn raw_step(&mut self, state: &mut SpinorWavefunction, dt: f64) {
        self.step_dt(state, dt);
    }

    pub(crate) fn ready(&self, state: &mut SpinorWavefunction) -> Result<()> {
        self.prepare(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potential_exp_is_unitary() {
        for (a, b, tau) in [(0.3, 0.1, 0.01), (0.0, 0.0, 0.5), (-2.0, 7.0, 0.3), (1e-12, 0.0, 1.0)] {
            let u = potential_exp(a, b, tau);
            let r1 = u.pp.norm_sqr() + u.pm.norm_sqr();
            let r2 = u.pm.norm_sqr() + u.mm.norm_sqr();
            let cross = u.pp * u.pm.conj() + u.pm * u.mm.conj();
            assert!((r1 - 1.0).abs() < 1e-14 && (r2 - 1.0).abs() < 1e-14 && cross.norm() < 1e-14);
        }
    }

    #[test]
    fn potential_exp_diagonal_phases() {
        let u = potential_exp(0.35, 0.0, 2.0);
        assert!((u.pp - C64::from_polar(1.0, -0.7)).norm() < 1e-14);
        assert!((u.mm - C64::from_polar(1.0, 0.7)).norm() < 1e-14);
    }

    #[test]
    fn step_bound_enforced() {
        let g = SpatialGrid::new(8, 128).unwrap();
        let s = Schedule::constant(0.2, 0.0, 0.0);
        assert!(matches!(
            Propagator::new(g, s, 0.01, GaugeMode::Direct),
            Err(Error::StepSize { .. })
        ));
        assert!(Propagator::new(g, s, 0.005, GaugeMode::Direct).is_ok());
    }

    #[test]
    fn blockwise_kinetic_matches_direct() {
        let g = SpatialGrid::new(8, 256).unwrap();
        let mut p = Propagator::new(g, Schedule::constant(0.2, 0.0, 0.01), 0.001, GaugeMode::Accelerated).unwrap();
        let a = 0.037;
        p.kinetic_factors(a, 0.001, true);
        let fast = p.kin_tmp.clone();
        p.kinetic_factors(a, 0.001, false);
        for (x, y) in fast.iter().zip(&p.kin_tmp) {
            assert!((x - y).norm() < 1e-13);
        }
    }
}
