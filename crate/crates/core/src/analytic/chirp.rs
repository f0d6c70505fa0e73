//! Two-level dynamics under the chirped detuning `delta0 cos(omega t)`.

use std::f64::consts::PI;

use serde::Serialize;

use super::elliptic::incomplete_e;
use super::ode::{integrate_at, schrodinger, OdeOptions};
use super::quadrature;
use crate::error::{Error, Result};
use crate::C64;

fn chirp(delta0: f64, omega: f64, t: f64) -> f64 {
    delta0 * (omega * t).cos()
}

/// `phi(t) = int_0^t sqrt(V0^2 + delta(t')^2) dt'` by adaptive quadrature,
/// one chirp half-period at a time.
pub fn chirped_phase(t: f64, v0: f64, delta0: f64, omega: f64) -> f64 {
    let f = |s: f64| (v0 * v0 + chirp(delta0, omega, s).powi(2)).sqrt();
    let seg = if omega > 0.0 { PI / omega } else { t.max(1.0) };
    let mut acc = 0.0;
    let mut a = 0.0;
    while a < t {
        let b = (a + seg).min(t);
        acc += quadrature::integrate(f, a, b, 1e-14, 1e-300).expect("smooth integrand");
        a = b;
    }
    acc
}

/// Same phase through `sqrt(V0^2 + delta0^2) / omega * E(omega t | m)`,
/// `m = delta0^2 / (V0^2 + delta0^2)`.
pub fn chirped_phase_elliptic(t: f64, v0: f64, delta0: f64, omega: f64) -> Option<f64> {
    let a2 = v0 * v0 + delta0 * delta0;
    if a2 == 0.0 {
        return Some(0.0);
    }
    if omega == 0.0 {
        return Some(a2.sqrt() * t);
    }
    let m = delta0 * delta0 / a2;
    incomplete_e(omega * t, m).map(|e| a2.sqrt() / omega * e)
}

/// Adiabatic inversion formula, evaluated as written; its range is [0, 2].
pub fn chirped_inversion_adiabatic(t: f64, v0: f64, delta0: f64, omega: f64) -> f64 {
    let d = chirp(delta0, omega, t);
    let a = (v0 * v0 + delta0 * delta0).sqrt();
    let b = (v0 * v0 + d * d).sqrt();
    if a == 0.0 {
        return 0.0;
    }
    1.0 - d * d / (a * b) - v0 * v0 * chirped_phase(t, v0, delta0, omega).cos() / (a * b)
}

/// Instantaneous eigenvalues `-+ sqrt(delta^2 + V0^2) / 2`.
pub fn chirped_levels(t: f64, v0: f64, delta0: f64, omega: f64) -> (f64, f64) {
    let w = 0.5 * (chirp(delta0, omega, t).powi(2) + v0 * v0).sqrt();
    (-w, w)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InversionSeries {
    pub times: Vec<f64>,
    pub inversion: Vec<f64>,
}

/// Integrates `(phi_+, phi_-)` under `diag(delta/2, -delta/2)` with coupling
/// `V0/2` from `(0, 1)` and samples `|phi_+|^2 - |phi_-|^2` at `samples`
/// equally spaced times including 0 and `t_final`.
pub fn chirped_integrate(v0: f64, delta0: f64, omega: f64, t_final: f64, samples: usize) -> Result<InversionSeries> {
    if !(t_final > 0.0) {
        return Err(Error::invalid("final time must be positive"));
    }
    let samples = samples.max(2);
    let times: Vec<f64> = (0..samples).map(|i| t_final * i as f64 / (samples - 1) as f64).collect();
    let hv = 0.5 * v0;
    let f = schrodinger(move |t| {
        let d = 0.5 * chirp(delta0, omega, t);
        [[d, hv], [hv, -d]]
    });
    let y0 = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
    // Runs span many chirp periods, so the default local tolerance would let
    // the norm error accumulate past 1e-8.
    let opts = OdeOptions {
        rtol: 1e-12,
        atol: 1e-14,
        ..OdeOptions::default()
    };
    let ys = integrate_at(f, 0.0, &y0, &times, &opts)?;
    let mut inversion = Vec::with_capacity(samples);
    for y in &ys {
        let n = y[0].norm_sqr() + y[1].norm_sqr();
        if (n - 1.0).abs() > 1e-8 {
            return Err(Error::Numerical(format!("norm drifted to {n}")));
        }
        inversion.push(y[0].norm_sqr() - y[1].norm_sqr());
    }
    Ok(InversionSeries { times, inversion })
}
