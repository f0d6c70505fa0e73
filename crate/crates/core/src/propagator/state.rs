use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::model::{InternalState, SpatialGrid};
use crate::C64;

/// Two-component wave function on a periodic grid.
///
/// In the accelerated frame the stored arrays carry a momentum offset:
/// FFT bin `j` holds physical momentum `p_j - gauge_offset`, and the physical
/// wave function is `exp(-i gauge_offset x)` times the stored one. The offset
/// never exceeds half a lattice spacing in magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorWavefunction {
    pub grid: SpatialGrid,
    pub plus: Vec<C64>,
    pub minus: Vec<C64>,
    pub time: f64,
    pub gauge_offset: f64,
}

pub(crate) fn plan(n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    let mut planner = FftPlanner::new();
    (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
}

impl SpinorWavefunction {
    pub fn zeros(grid: SpatialGrid) -> Self {
        SpinorWavefunction {
            grid,
            plus: vec![C64::new(0.0, 0.0); grid.n_points],
            minus: vec![C64::new(0.0, 0.0); grid.n_points],
            time: 0.0,
            gauge_offset: 0.0,
        }
    }

    pub fn from_components(grid: SpatialGrid, plus: Vec<C64>, minus: Vec<C64>) -> Result<Self> {
        grid.validate()?;
        if plus.len() != grid.n_points || minus.len() != grid.n_points {
            return Err(Error::invalid("component length does not match the grid"));
        }
        Ok(SpinorWavefunction {
            grid,
            plus,
            minus,
            time: 0.0,
            gauge_offset: 0.0,
        })
    }

    pub fn component(&self, s: InternalState) -> &[C64] {
        match s {
            InternalState::Plus => &self.plus,
            InternalState::Minus => &self.minus,
        }
    }

    pub fn component_mut(&mut self, s: InternalState) -> &mut Vec<C64> {
        match s {
            InternalState::Plus => &mut self.plus,
            InternalState::Minus => &mut self.minus,
        }
    }

    pub fn component_norm_sqr(&self, s: InternalState) -> f64 {
        self.component(s).iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.component_norm_sqr(InternalState::Plus) + self.component_norm_sqr(InternalState::Minus)
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm_sqr();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Numerical("cannot normalize a zero or non-finite state".into()));
        }
        let s = 1.0 / n.sqrt();
        for z in self.plus.iter_mut().chain(self.minus.iter_mut()) {
            *z *= s;
        }
        Ok(())
    }

    /// Physical momentum of FFT bin `j`.
    pub fn physical_momentum(&self, j: usize) -> f64 {
        self.grid.momentum_index(j) as f64 * self.grid.dp() - self.gauge_offset
    }

    /// Plane-wave amplitudes `<p_j|psi>` of both components in FFT order,
    /// normalized so that their squared moduli sum to the state norm.
    pub fn momentum_amplitudes(&self) -> (Vec<C64>, Vec<C64>) {
        let (fwd, _) = plan(self.grid.n_points);
        let g = self.grid;
        let scale = g.dx() / g.length().sqrt();
        let transform = |src: &[C64]| {
            let mut buf = src.to_vec();
            fwd.process(&mut buf);
            for (j, z) in buf.iter_mut().enumerate() {
                let p = g.momentum_index(j) as f64 * g.dp();
                *z *= C64::from_polar(scale, -p * g.x0());
            }
            buf
        };
        (transform(&self.plus), transform(&self.minus))
    }

    /// Inverse of [`momentum_amplitudes`](Self::momentum_amplitudes).
    pub fn from_momentum_amplitudes(
        grid: SpatialGrid,
        plus: &[C64],
        minus: &[C64],
    ) -> Result<Self> {
        grid.validate()?;
        if plus.len() != grid.n_points || minus.len() != grid.n_points {
            return Err(Error::invalid("amplitude length does not match the grid"));
        }
        let (_, inv) = plan(grid.n_points);
        let scale = 1.0 / grid.length().sqrt();
        let transform = |src: &[C64]| {
            let mut buf: Vec<C64> = src
                .iter()
                .enumerate()
                .map(|(j, a)| {
                    let p = grid.momentum_index(j) as f64 * grid.dp();
                    a * C64::from_polar(scale, p * grid.x0())
                })
                .collect();
            inv.process(&mut buf);
            buf
        };
        SpinorWavefunction::from_components(grid, transform(plus), transform(minus))
    }

    /// Removes the accelerated-frame offset by multiplying with `exp(-i A x)`.
    /// The result is no longer periodic when the offset is nonzero.
    pub fn to_physical_frame(&mut self) {
        let a = self.gauge_offset;
        if a == 0.0 {
            return;
        }
        for j in 0..self.grid.n_points {
            let ph = C64::from_polar(1.0, -a * self.grid.x(j));
            self.plus[j] *= ph;
            self.minus[j] *= ph;
        }
        self.gauge_offset = 0.0;
    }
}
