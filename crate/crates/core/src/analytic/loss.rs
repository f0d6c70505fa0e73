//! Effective coupling of a Lambda system and photon-number averaging.

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Coupling `Omega_13 Omega_23 / Delta` left after eliminating the upper
/// level.
pub fn lambda_effective_coupling(omega13: f64, omega23: f64, big_delta: f64) -> Result<f64> {
    if big_delta == 0.0 || !big_delta.is_finite() {
        return Err(Error::invalid("detuning from the eliminated level must be nonzero"));
    }
    Ok(omega13 * omega23 / big_delta)
}

/// Required probability mass of a truncated photon distribution.
pub const COVERAGE: f64 = 1.0 - 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PhotonDistribution {
    Poisson { n_bar: f64 },
    /// All weight on a single photon number.
    Fock { n: u64 },
}

impl PhotonDistribution {
    pub fn mean(&self) -> f64 {
        match *self {
            PhotonDistribution::Poisson { n_bar } => n_bar,
            PhotonDistribution::Fock { n } => n as f64,
        }
    }

    fn pmf(&self, n: u64) -> f64 {
        match *self {
            PhotonDistribution::Poisson { n_bar } => {
                let nf = n as f64;
                (nf * n_bar.ln() - n_bar - ln_gamma(nf + 1.0)).exp()
            }
            PhotonDistribution::Fock { n: m } => (n == m) as u8 as f64,
        }
    }

    /// Smallest contiguous window around the mode holding at least
    /// [`COVERAGE`] of the mass, limited to `n <= n_cut`.
    pub fn support(&self, n_cut: u64) -> Result<Vec<(u64, f64)>> {
        match *self {
            PhotonDistribution::Fock { n } => {
                if n > n_cut {
                    return Err(Error::Coverage { covered: 0.0, required: COVERAGE });
                }
                Ok(vec![(n, 1.0)])
            }
            PhotonDistribution::Poisson { n_bar } => {
                if !(n_bar > 0.0) || !n_bar.is_finite() {
                    return Err(Error::invalid("mean photon number must be positive"));
                }
                let mode = (n_bar.floor() as u64).min(n_cut);
                let (mut lo, mut hi) = (mode, mode);
                let mut mass = self.pmf(mode);
                while mass < COVERAGE {
                    let below = if lo > 0 { self.pmf(lo - 1) } else { 0.0 };
                    let above = if hi < n_cut { self.pmf(hi + 1) } else { 0.0 };
                    if below == 0.0 && above == 0.0 {
                        return Err(Error::Coverage { covered: mass, required: COVERAGE });
                    }
                    if above >= below {
                        hi += 1;
                        mass += above;
                    } else {
                        lo -= 1;
                        mass += below;
                    }
                }
                Ok((lo..=hi).map(|n| (n, self.pmf(n))).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AveragedSeries {
    pub values: Vec<f64>,
    pub weights: Vec<(u64, f64)>,
    pub covered: f64,
}

/// Weighted average of `runner(n, scale)` over the truncated distribution,
/// where `scale = sqrt(n / mean)` multiplies the coupling. Runs execute in
/// parallel; the reduction order is fixed.
pub fn poisson_average<R>(dist: &PhotonDistribution, n_cut: u64, runner: R) -> Result<AveragedSeries>
where
    R: Fn(u64, f64) -> Result<Vec<f64>> + Sync,
{
    let weights = dist.support(n_cut)?;
    let mean = dist.mean();
    let runs: Vec<Vec<f64>> = weights
        .par_iter()
        .map(|&(n, _)| {
            let scale = if mean > 0.0 { (n as f64 / mean).sqrt() } else { 0.0 };
            runner(n, scale)
        })
        .collect::<Result<_>>()?;
    let len = runs[0].len();
    if runs.iter().any(|r| r.len() != len) {
        return Err(Error::Numerical("runs returned series of different lengths".into()));
    }
    let covered: f64 = weights.iter().map(|w| w.1).sum();
    let mut values = vec![0.0; len];
    for (run, &(_, w)) in runs.iter().zip(&weights) {
        for (v, x) in values.iter_mut().zip(run) {
            *v += w * x;
        }
    }
    Ok(AveragedSeries { values, weights, covered })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_coupling() {
        assert_eq!(lambda_effective_coupling(10.0, 10.0, 100.0).unwrap(), 1.0);
        assert_eq!(lambda_effective_coupling(0.0, 3.0, 7.0).unwrap(), 0.0);
        assert!((lambda_effective_coupling(1.0, 1.0, -10.0).unwrap() + 0.1).abs() < 1e-15);
        assert!(lambda_effective_coupling(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn poisson_support_mass() {
        let w = PhotonDistribution::Poisson { n_bar: 50.0 }.support(1000).unwrap();
        let mass: f64 = w.iter().map(|x| x.1).sum();
        assert!(mass >= COVERAGE && mass <= 1.0 + 1e-12);
        assert!(w.len() < 80);
        assert!(matches!(
            PhotonDistribution::Poisson { n_bar: 50.0 }.support(55),
            Err(Error::Coverage { .. })
        ));
    }

    #[test]
    fn fock_equals_single_run() {
        let avg = poisson_average(&PhotonDistribution::Fock { n: 3 }, 10, |n, s| Ok(vec![n as f64, s])).unwrap();
        assert_eq!(avg.values, vec![3.0, 1.0]);
    }

    #[test]
    fn average_of_linear_runner() {
        let d = PhotonDistribution::Poisson { n_bar: 20.0 };
        let avg = poisson_average(&d, 200, |n, _| Ok(vec![n as f64])).unwrap();
        assert!((avg.values[0] - 20.0).abs() < 1e-3);
        assert!((1.0 - avg.covered) < 1e-6);
    }
}
