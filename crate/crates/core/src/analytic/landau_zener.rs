//! Two- and three-level Landau-Zener models.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::ode::{integrate, schrodinger, OdeOptions};
use crate::error::{Error, Result};
use crate::C64;

/// Adiabaticity parameter `pi V0^2 / (4 F)`.
pub fn adiabaticity(v0: f64, force: f64) -> f64 {
    PI * v0 * v0 / (4.0 * force)
}

/// Asymptotic transfer `1 - exp(-Lambda)` to the other bare level.
pub fn lz2_asymptotic(v0: f64, force: f64) -> Result<f64> {
    if !(force > 0.0) {
        return Err(Error::invalid(format!("sweep rate must be positive, got {force}")));
    }
    Ok(-(-adiabaticity(v0, force)).exp_m1())
}

/// How populations at the ends of a finite window are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Readout {
    /// Amplitudes of the bare (diabatic) levels.
    Bare,
    /// Populations of the instantaneous eigenstates, each labelled by the
    /// bare level it is dominated by. The start state is the eigenstate
    /// dominated by the initial level.
    Adiabatic,
}

impl std::str::FromStr for Readout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bare" => Ok(Readout::Bare),
            "adiabatic" | "dressed" => Ok(Readout::Adiabatic),
            other => Err(Error::invalid(format!("unknown readout `{other}`"))),
        }
    }
}

/// Diagonal of the two-level problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Lz2Model {
    /// `diag(F t, -F t)` on `[-tau, tau]`.
    Linear,
    /// `diag((k0 - F t + 1)^2, (k0 - F t)^2)` on a window of half-width tau
    /// centred on the crossing time `(k0 + 1/2) / F`.
    Quadratic { k0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LZParams {
    pub v0: f64,
    pub force: f64,
    pub tau: f64,
    pub model: Lz2Model,
    pub readout: Readout,
}

impl LZParams {
    /// Linear model with the default window `tau = 1/(2F)`.
    pub fn new(v0: f64, force: f64) -> Self {
        LZParams {
            v0,
            force,
            tau: 0.5 / force,
            model: Lz2Model::Linear,
            readout: Readout::Adiabatic,
        }
    }

    pub fn with_tau(self, tau: f64) -> Self {
        LZParams { tau, ..self }
    }

    pub fn with_readout(self, readout: Readout) -> Self {
        LZParams { readout, ..self }
    }

    pub fn adiabaticity(&self) -> f64 {
        adiabaticity(self.v0, self.force)
    }
}

/// Tighter than the integrator default so that the norm stays within 1e-8
/// over windows of several `1/F`.
fn ode_opts() -> OdeOptions {
    OdeOptions {
        rtol: 1e-12,
        atol: 1e-14,
        ..Default::default()
    }
}

fn check_norm(y: &[C64]) -> Result<()> {
    let n: f64 = y.iter().map(|z| z.norm_sqr()).sum();
    if (n - 1.0).abs() > 1e-8 {
        return Err(Error::Numerical(format!("norm drifted to {n}")));
    }
    Ok(())
}

/// Eigenvector of a real symmetric matrix dominated by basis vector `level`.
fn dominated_eigenvector<const N: usize>(h: [[f64; N]; N], level: usize) -> Vec<f64> {
    let (vals, vecs): (Vec<f64>, Vec<Vec<f64>>) = match N {
        2 => {
            let m = Matrix2::from_fn(|i, j| h[i][j]);
            let e = SymmetricEigen::new(m);
            (
                e.eigenvalues.iter().copied().collect(),
                e.eigenvectors.column_iter().map(|c| c.iter().copied().collect()).collect(),
            )
        }
        3 => {
            let m = Matrix3::from_fn(|i, j| h[i][j]);
            let e = SymmetricEigen::new(m);
            (
                e.eigenvalues.iter().copied().collect(),
                e.eigenvectors.column_iter().map(|c| c.iter().copied().collect()).collect(),
            )
        }
        _ => unreachable!("only 2- and 3-level models"),
    };
    let _ = vals;
    vecs.into_iter()
        .max_by(|a, b| a[level].abs().total_cmp(&b[level].abs()))
        .unwrap()
}

fn run_window<const N: usize>(
    h: impl Fn(f64) -> [[f64; N]; N] + Copy,
    t_start: f64,
    t_end: f64,
    initial: usize,
    readout: Readout,
) -> Result<[f64; N]> {
    let y0: Vec<C64> = match readout {
        Readout::Bare => (0..N).map(|i| C64::new(if i == initial { 1.0 } else { 0.0 }, 0.0)).collect(),
        Readout::Adiabatic => dominated_eigenvector(h(t_start), initial)
            .into_iter()
            .map(|x| C64::new(x, 0.0))
            .collect(),
    };
    let y = integrate(schrodinger(h), t_start, &y0, t_end, &ode_opts())?;
    check_norm(&y)?;
    let mut out = [0.0; N];
    match readout {
        Readout::Bare => {
            for (o, z) in out.iter_mut().zip(&y) {
                *o = z.norm_sqr();
            }
        }
        Readout::Adiabatic => {
            let hm = h(t_end);
            for (level, o) in out.iter_mut().enumerate() {
                let v = dominated_eigenvector(hm, level);
                let ov: C64 = v.iter().zip(&y).map(|(a, z)| z * *a).sum();
                *o = ov.norm_sqr();
            }
        }
    }
    Ok(out)
}

/// Final population of the second level `d_mu`, starting in `d_{mu+1}`.
pub fn lz2_integrate(params: &LZParams) -> Result<f64> {
    if !(params.tau > 0.0) {
        return Err(Error::invalid("integration window must be positive"));
    }
    if !(params.force > 0.0) {
        return Err(Error::invalid("sweep rate must be positive"));
    }
    let (f, half_v) = (params.force, 0.5 * params.v0);
    let out = match params.model {
        Lz2Model::Linear => run_window(
            move |t| [[f * t, half_v], [half_v, -f * t]],
            -params.tau,
            params.tau,
            0,
            params.readout,
        )?,
        Lz2Model::Quadratic { k0 } => {
            let tc = (k0 + 0.5) / f;
            run_window(
                move |t| {
                    let a = k0 - f * t;
                    [[(a + 1.0) * (a + 1.0), half_v], [half_v, a * a]]
                },
                tc - params.tau,
                tc + params.tau,
                0,
                params.readout,
            )?
        }
    };
    Ok(out[1])
}

/// Symmetric doubly stochastic transition matrix of the three-level model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionMatrix3 {
    pub p: f64,
    pub m: [[f64; 3]; 3],
}

impl TransitionMatrix3 {
    pub fn from_p(p: f64) -> Self {
        let q = 1.0 - p;
        let a = 2.0 * p * q;
        let d = 1.0 - 2.0 * p;
        TransitionMatrix3 {
            p,
            m: [[p * p, a, q * q], [a, d * d, a], [q * q, a, p * p]],
        }
    }

    /// Final probabilities for an initial probability vector.
    pub fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        std::array::from_fn(|i| (0..3).map(|j| self.m[i][j] * v[j]).sum())
    }

    /// Element reached from level 1 at level 3: the full adiabatic swap.
    pub fn corner(&self) -> f64 {
        self.m[0][2]
    }
}

pub fn lz3_transition_matrix(v0: f64, force: f64) -> Result<TransitionMatrix3> {
    if !(force > 0.0) {
        return Err(Error::invalid(format!("sweep rate must be positive, got {force}")));
    }
    Ok(TransitionMatrix3::from_p((-0.5 * adiabaticity(v0, force)).exp()))
}

/// Default three-level window half-width `1/(4F)`.
pub fn lz3_default_tau(force: f64) -> f64 {
    0.25 / force
}

/// Final populations of the three levels after `[-tau, tau]`, starting in
/// `initial_level` (1-based).
pub fn lz3_integrate(v0: f64, force: f64, tau: f64, initial_level: usize) -> Result<[f64; 3]> {
    lz3_integrate_with(v0, force, tau, initial_level, Readout::Adiabatic)
}

pub fn lz3_integrate_with(v0: f64, force: f64, tau: f64, initial_level: usize, readout: Readout) -> Result<[f64; 3]> {
    if !(tau > 0.0) {
        return Err(Error::invalid("integration window must be positive"));
    }
    if !(1..=3).contains(&initial_level) {
        return Err(Error::invalid(format!("initial level must be 1, 2 or 3, got {initial_level}")));
    }
    let hv = 0.5 * v0;
    run_window(
        move |t| [[2.0 * force * t, hv, 0.0], [hv, 0.0, hv], [0.0, hv, -2.0 * force * t]],
        -tau,
        tau,
        initial_level - 1,
        readout,
    )
}
