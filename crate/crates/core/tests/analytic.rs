mod common;

use std::f64::consts::PI;

use cavity_bloch::analytic::{
    adiabaticity, chirped_integrate, chirped_inversion_adiabatic, chirped_phase, chirped_phase_elliptic,
    lz2_asymptotic, lz2_integrate, lz3_integrate, lz3_integrate_with, lz3_transition_matrix, poisson_average,
    LZParams, PhotonDistribution, Readout,
};
use common::{rk4_schrodinger, simpson};

#[test]
fn chirped_phase_matches_simpson() {
    let (v0, d0, w) = (10.0, 80.0, 0.1);
    for t in [PI / w, 0.37 * PI / w, 2.6 * PI / w] {
        let reference = simpson(|s| (v0 * v0 + (d0 * (w * s).cos()).powi(2)).sqrt(), 0.0, t, 2_000_000);
        let q = chirped_phase(t, v0, d0, w);
        assert!(((q - reference) / reference).abs() < 1e-8, "t={t}: {q} vs {reference}");
        let e = chirped_phase_elliptic(t, v0, d0, w).unwrap();
        assert!(((e - reference) / reference).abs() < 1e-8, "t={t}: {e} vs {reference}");
    }
}

#[test]
fn adiabatic_formula_structure() {
    let (v0, d0, w) = (10.0, 80.0, 0.1);
    assert!(chirped_inversion_adiabatic(0.0, v0, d0, w).abs() < 1e-12);
    // Only the phase term varies away from the zeros of the detuning; the
    // envelope repeats with period pi / omega.
    let a = chirped_inversion_adiabatic(0.3, v0, d0, w);
    let b = chirped_inversion_adiabatic(0.3 + PI / w, v0, d0, w);
    assert!((a - b).abs() < 2.0 * v0 * v0 / (v0 * v0 + d0 * d0));
    for i in 0..2000 {
        let x = chirped_inversion_adiabatic(i as f64 * 0.1, v0, d0, w);
        assert!((-1e-12..=2.0).contains(&x));
    }
}

#[test]
fn lz2_matches_fixed_step_oracle() {
    let (v0, f) = (0.2, 0.005);
    let tau = 1.0 / f;
    let h = |t: f64| [[f * t, 0.5 * v0], [0.5 * v0, -f * t]];
    let y = rk4_schrodinger(h, -tau, tau, [(1.0, 0.0), (0.0, 0.0)], 40_000);
    let oracle = y[1].0 * y[1].0 + y[1].1 * y[1].1;
    let p = lz2_integrate(&LZParams::new(v0, f).with_tau(tau).with_readout(Readout::Bare)).unwrap();
    assert!((p - oracle).abs() < 1e-8, "{p} vs {oracle}");
}

#[test]
fn lz2_converges_monotonically() {
    let (v0, f) = (0.2, 0.005);
    assert!((adiabaticity(v0, f) - 2.0 * PI).abs() < 1e-12);
    let asym = lz2_asymptotic(v0, f).unwrap();
    let devs: Vec<f64> = [0.5, 1.0, 2.0, 4.0]
        .iter()
        .map(|m| (lz2_integrate(&LZParams::new(v0, f).with_tau(m / f)).unwrap() - asym).abs())
        .collect();
    assert!(devs.windows(2).all(|w| w[1] < w[0]), "{devs:?}");
    assert!(devs[1] < 1e-2);
}

#[test]
fn lz3_matches_fixed_step_oracle() {
    let (v0, f, tau) = (0.2, 0.01, 25.0);
    let hv = 0.5 * v0;
    let h = |t: f64| [[2.0 * f * t, hv, 0.0], [hv, 0.0, hv], [0.0, hv, -2.0 * f * t]];
    let y = rk4_schrodinger(h, -tau, tau, [(1.0, 0.0), (0.0, 0.0), (0.0, 0.0)], 20_000);
    let p = lz3_integrate_with(v0, f, tau, 1, Readout::Bare).unwrap();
    for i in 0..3 {
        let oracle = y[i].0 * y[i].0 + y[i].1 * y[i].1;
        assert!((p[i] - oracle).abs() < 1e-8, "level {i}: {} vs {oracle}", p[i]);
    }
}

#[test]
fn lz3_long_window_reaches_asymptote() {
    let (v0, f) = (0.2, 0.01);
    let t = lz3_transition_matrix(v0, f).unwrap();
    let p = lz3_integrate(v0, f, 10.0 / f, 1).unwrap();
    for i in 0..3 {
        assert!((p[i] - t.m[i][0]).abs() < 5e-3, "{p:?} vs {:?}", t.m);
    }
}

#[test]
fn chirped_integration_matches_fixed_step_oracle() {
    let (v0, d0, w) = (1.0, 8.0, 0.1);
    let t_final = 2.0 * PI / w;
    let series = chirped_integrate(v0, d0, w, t_final, 3).unwrap();
    let h = |t: f64| {
        let d = 0.5 * d0 * (w * t).cos();
        [[d, 0.5 * v0], [0.5 * v0, -d]]
    };
    let y = rk4_schrodinger(h, 0.0, t_final, [(0.0, 0.0), (1.0, 0.0)], 60_000);
    let oracle = (y[0].0 * y[0].0 + y[0].1 * y[0].1) - (y[1].0 * y[1].0 + y[1].1 * y[1].1);
    assert!((series.inversion[2] - oracle).abs() < 1e-7, "{} vs {oracle}", series.inversion[2]);
    assert_eq!(series.inversion[0], -1.0);
}

#[test]
fn fock_average_is_the_single_run() {
    let avg = poisson_average(&PhotonDistribution::Fock { n: 3 }, 100, |n, scale| Ok(vec![n as f64, scale])).unwrap();
    assert_eq!(avg.values, vec![3.0, 1.0]);
    assert_eq!(avg.covered, 1.0);
}

#[test]
fn poisson_average_of_linear_series() {
    // E[n] = n_bar and E[sqrt(n / n_bar)^2] = 1 for a Poisson distribution.
    let dist = PhotonDistribution::Poisson { n_bar: 50.0 };
    let avg = poisson_average(&dist, 10_000, |n, s| Ok(vec![n as f64, s * s])).unwrap();
    assert!(avg.covered >= 1.0 - 1e-6);
    assert!((avg.values[0] - 50.0).abs() < 1e-3);
    assert!((avg.values[1] - 1.0).abs() < 1e-5);
    assert!(poisson_average(&dist, 20, |_, _| Ok(vec![0.0])).is_err());
}
