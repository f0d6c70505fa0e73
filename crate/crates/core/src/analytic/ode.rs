//! Adaptive Dormand-Prince 5(4) integrator for complex linear systems.

use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub initial_step: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 5_000_000,
            initial_step: None,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the fifth- and fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `y' = f(t, y)` and returns the state at each requested time.
///
/// `times` must be nondecreasing and not precede `t0`.
pub fn integrate_at<F>(mut f: F, t0: f64, y0: &[C64], times: &[f64], opts: &OdeOptions) -> Result<Vec<Vec<C64>>>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut k: [Vec<C64>; 7] = std::array::from_fn(|_| vec![C64::new(0.0, 0.0); n]);
    let mut tmp = vec![C64::new(0.0, 0.0); n];
    let mut y_new = vec![C64::new(0.0, 0.0); n];
    let mut out = Vec::with_capacity(times.len());
    let mut steps = 0usize;
    let span = times.last().map_or(0.0, |&tl| (tl - t0).abs()).max(1e-300);
    let mut h = opts.initial_step.unwrap_or(span * 1e-3).min(span);
    f(t, &y, &mut k[0]);

    for &target in times {
        if target < t - 1e-14 * t.abs().max(1.0) {
            return Err(Error::invalid("output times must be nondecreasing and after t0"));
        }
        while t < target {
            if steps >= opts.max_steps {
                return Err(Error::Numerical(format!("step limit {} reached at t = {t}", opts.max_steps)));
            }
            let last = t + h >= target;
            let hs = if last { target - t } else { h };
            if hs < 1e-14 * t.abs().max(1.0) && !last {
                return Err(Error::Numerical(format!("step size underflow at t = {t}")));
            }
            let stage = |ys: &mut Vec<C64>, coeffs: &[(usize, f64)], k: &[Vec<C64>; 7]| {
                for i in 0..n {
                    let mut acc = y[i];
                    for &(s, a) in coeffs {
                        acc += k[s][i] * (a * hs);
                    }
                    ys[i] = acc;
                }
            };
            stage(&mut tmp, &[(0, A21)], &k);
            f(t + C2 * hs, &tmp, &mut k[1]);
            stage(&mut tmp, &[(0, A31), (1, A32)], &k);
            f(t + C3 * hs, &tmp, &mut k[2]);
            stage(&mut tmp, &[(0, A41), (1, A42), (2, A43)], &k);
            f(t + C4 * hs, &tmp, &mut k[3]);
            stage(&mut tmp, &[(0, A51), (1, A52), (2, A53), (3, A54)], &k);
            f(t + C5 * hs, &tmp, &mut k[4]);
            stage(&mut tmp, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)], &k);
            f(t + hs, &tmp, &mut k[5]);
            stage(&mut y_new, &[(0, B1), (2, B3), (3, B4), (4, B5), (5, B6)], &k);
            f(t + hs, &y_new, &mut k[6]);

            let mut err = 0.0;
            for i in 0..n {
                let e = (k[0][i] * E1 + k[2][i] * E3 + k[3][i] * E4 + k[4][i] * E5 + k[5][i] * E6 + k[6][i] * E7) * hs;
                let sc = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
                err += (e.norm() / sc).powi(2);
            }
            let err = (err / n as f64).sqrt();
            steps += 1;
            if err <= 1.0 {
                t = if last { target } else { t + hs };
                std::mem::swap(&mut y, &mut y_new);
                k.swap(0, 6);
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last || fac < 1.0 {
                    h = hs * fac;
                }
            } else {
                h = hs * (0.9 * err.powf(-0.2)).max(0.1);
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(Error::Numerical(format!("step size underflow at t = {t}")));
                }
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

pub fn integrate<F>(f: F, t0: f64, y0: &[C64], t1: f64, opts: &OdeOptions) -> Result<Vec<C64>>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    Ok(integrate_at(f, t0, y0, &[t1], opts)?.pop().unwrap())
}

/// Right-hand side `-i H(t) y` for a real symmetric `H` given as a closure
/// filling a row-major matrix.
pub fn schrodinger<const N: usize>(h: impl Fn(f64) -> [[f64; N]; N]) -> impl FnMut(f64, &[C64], &mut [C64]) {
    move |t, y, dy| {
        let m = h(t);
        for i in 0..N {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..N {
                acc += y[j] * m[i][j];
            }
            dy[i] = C64::new(acc.im, -acc.re);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let y = integrate(|_, y, dy| dy[0] = -y[0], 0.0, &[C64::new(1.0, 0.0)], 5.0, &OdeOptions::default()).unwrap();
        assert!((y[0].re - (-5.0f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn rabi_oscillation() {
        // H = (w/2) sx: population of the second level is sin^2(w t / 2).
        let w = 0.7;
        let f = schrodinger(move |_| [[0.0, 0.5 * w], [0.5 * w, 0.0]]);
        let ts: Vec<f64> = (1..=20).map(|i| i as f64).collect();
        let ys = integrate_at(f, 0.0, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], &ts, &OdeOptions::default()).unwrap();
        for (t, y) in ts.iter().zip(&ys) {
            assert!((y[1].norm_sqr() - (0.5 * w * t).sin().powi(2)).abs() < 1e-9);
        }
    }

    #[test]
    fn step_limit_reported() {
        let opts = OdeOptions {
            max_steps: 3,
            ..Default::default()
        };
        let f = schrodinger(|_| [[100.0, 1.0], [1.0, -100.0]]);
        assert!(matches!(
            integrate(f, 0.0, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], 100.0, &opts),
            Err(Error::Numerical(_))
        ));
    }
}
