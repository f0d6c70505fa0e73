use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ScaledParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DetuningFn {
    Constant(f64),
    /// `delta0 cos(omega (t - t0))`
    Chirp { delta0: f64, omega: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CouplingFn {
    Constant(f64),
    /// `v0 exp(-kappa (t - t0))`
    Decaying { v0: f64, kappa: f64 },
}

/// Time dependence of detuning, coupling and force.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Schedule {
    pub detuning: DetuningFn,
    pub coupling: CouplingFn,
    pub force: f64,
    pub t0: f64,
}

impl Schedule {
    pub fn constant(v0: f64, delta: f64, force: f64) -> Self {
        Schedule {
            detuning: DetuningFn::Constant(delta),
            coupling: CouplingFn::Constant(v0),
            force,
            t0: 0.0,
        }
    }

    pub fn from_params(p: &ScaledParams) -> Self {
        let detuning = if p.chirped {
            DetuningFn::Chirp {
                delta0: p.delta0,
                omega: p.omega,
            }
        } else {
            DetuningFn::Constant(p.delta0)
        };
        let coupling = if p.kappa > 0.0 {
            CouplingFn::Decaying {
                v0: p.v0,
                kappa: p.kappa,
            }
        } else {
            CouplingFn::Constant(p.v0)
        };
        Schedule {
            detuning,
            coupling,
            force: p.force,
            t0: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.force >= 0.0) || !self.force.is_finite() {
            return Err(Error::invalid(format!("force must be finite and nonnegative, got {}", self.force)));
        }
        if let CouplingFn::Decaying { kappa, .. } = self.coupling {
            if !(kappa >= 0.0) {
                return Err(Error::invalid("loss rate must be nonnegative"));
            }
        }
        Ok(())
    }

    pub fn delta(&self, t: f64) -> f64 {
        match self.detuning {
            DetuningFn::Constant(d) => d,
            DetuningFn::Chirp { delta0, omega } => delta0 * (omega * (t - self.t0)).cos(),
        }
    }

    pub fn coupling(&self, t: f64) -> f64 {
        match self.coupling {
            CouplingFn::Constant(v) => v,
            CouplingFn::Decaying { v0, kappa } => v0 * (-kappa * (t - self.t0)).exp(),
        }
    }

    pub fn is_static(&self) -> bool {
        matches!(
            (self.detuning, self.coupling),
            (DetuningFn::Constant(_), CouplingFn::Constant(_))
        )
    }

    /// Band-structure parameters frozen at time `t`.
    pub fn params_at(&self, t: f64) -> ScaledParams {
        ScaledParams::new(self.coupling(t).abs(), self.delta(t), self.force)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation() {
        let p = ScaledParams {
            v0: 0.5,
            delta0: 2.0,
            omega: 0.1,
            chirped: true,
            kappa: 0.01,
            ..Default::default()
        };
        let s = Schedule::from_params(&p);
        assert_eq!(s.delta(0.0), 2.0);
        assert!((s.delta(std::f64::consts::PI / 0.1) + 2.0).abs() < 1e-12);
        assert!((s.coupling(100.0) - 0.5 * (-1.0f64).exp()).abs() < 1e-15);
        assert!(!s.is_static());
        assert!(Schedule::constant(0.2, 0.0, -0.1).validate().is_err());
    }
}
