mod common;

use cavity_bloch::spectrum::{
    self, bare_energy, classify_crossings, classify_crossings_with, dispersion, solve_bands, zone_grid, CrossingKind,
};
use cavity_bloch::ScaledParams;
use common::{linspace, scalar_cosine_bands};

#[test]
fn zero_detuning_matches_scalar_cosine_bands() {
    for v0 in [0.2, 0.5, 1.0] {
        let params = ScaledParams::new(v0, 0.0, 0.0);
        for k in linspace(-0.975, 1.0, 41) {
            let spinor = solve_bands(k, &params, 12).unwrap();
            let plus = scalar_cosine_bands(k, v0, 8);
            let minus = scalar_cosine_bands(k, -v0, 8);
            for nu in 1..=8 {
                let e = spinor.energy(nu);
                assert!((e - plus[nu - 1]).abs() < 1e-8, "V0={v0} k={k} nu={nu}: {e} vs {}", plus[nu - 1]);
                assert!((e - minus[nu - 1]).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn truncation_converged_for_low_bands() {
    let params = ScaledParams::new(0.5, 0.7, 0.0);
    for k in zone_grid(17) {
        let a = solve_bands(k, &params, 12).unwrap();
        let b = solve_bands(k, &params, 14).unwrap();
        for nu in 1..=6 {
            assert!((a.energy(nu) - b.energy(nu)).abs() < 1e-12);
        }
    }
}

#[test]
fn bands_continuous_across_zone_edge() {
    let params = ScaledParams::new(0.2, -1.0, 0.0);
    let edge = solve_bands(1.0, &params, 12).unwrap();
    let wrapped = solve_bands(-1.0 + 1e-9, &params, 12).unwrap();
    for nu in 1..=6 {
        assert!((edge.energy(nu) - wrapped.energy(nu)).abs() < 1e-7);
    }
}

#[test]
fn dispersion_is_even_in_k() {
    let params = ScaledParams::new(0.2, 0.7, 0.0);
    let ks = [0.1, 0.35, 0.8];
    let pos = dispersion(&params, &ks, 5, 12).unwrap();
    let neg = dispersion(&params, &ks.map(|k| -k), 5, 12).unwrap();
    for nu in 0..5 {
        for i in 0..ks.len() {
            assert!((pos.energies[nu][i] - neg.energies[nu][i]).abs() < 1e-12);
        }
    }
}

#[test]
fn uncoupled_bands_are_sorted_bare_energies() {
    let params = ScaledParams::new(0.0, 0.7, 0.0);
    for k in [-0.5, 0.0, 0.3, 1.0] {
        let s = solve_bands(k, &params, 6).unwrap();
        let mut bare: Vec<f64> = (-6..=6).map(|mu| bare_energy(k, mu, 0.7)).collect();
        bare.sort_by(f64::total_cmp);
        for (a, b) in s.energies.iter().zip(&bare) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn crossings_lie_on_bare_curves() {
    for delta in [-1.0, -0.3, 0.0, 0.7, 1.0, 2.5] {
        for c in classify_crossings(delta) {
            assert!(c.energy_spread < 1e-12, "{c:?}");
            for &mu in &c.mus {
                assert!((bare_energy(c.k, mu, delta) - c.energy).abs() < 1e-12);
            }
            let same_parity = c.mus.iter().all(|m| m.rem_euclid(2) == c.mus[0].rem_euclid(2));
            match c.kind {
                CrossingKind::Bragg => assert!(same_parity && c.mus.len() == 2),
                CrossingKind::Doppleron => assert!(!same_parity && c.mus.len() == 2),
                CrossingKind::Triple => assert_eq!(c.mus.len(), 3),
                CrossingKind::Multiple => assert!(c.mus.len() > 3),
            }
        }
    }
}

#[test]
fn unit_detuning_triple_crossings() {
    let at = |delta: f64| -> Vec<f64> {
        classify_crossings(delta)
            .into_iter()
            .filter(|c| c.kind == CrossingKind::Triple)
            .map(|c| c.k)
            .collect()
    };
    let neg = at(-1.0);
    assert!(!neg.is_empty() && neg.iter().all(|k| k.abs() < 1e-12), "{neg:?}");
    let pos = at(1.0);
    assert!(!pos.is_empty() && pos.iter().all(|k| (k.abs() - 1.0).abs() < 1e-12), "{pos:?}");
    assert!(at(0.0).is_empty());
    assert!(at(0.5).is_empty());
}

#[test]
fn crossing_gap_grows_with_coupling() {
    let gap = |v0: f64| {
        classify_crossings_with(0.0, 12, Some(v0))
            .into_iter()
            .find(|c| c.kind == CrossingKind::Doppleron && (c.k - 0.5).abs() < 1e-12 && (c.energy - 0.25).abs() < 1e-12)
            .and_then(|c| c.gap)
            .unwrap()
    };
    assert!(gap(0.4) > gap(0.2));
    assert!((gap(0.2) - 0.2).abs() < 0.01);
}

#[test]
fn dressed_coefficients_normalized() {
    let params = ScaledParams::new(0.5, 0.3, 0.0);
    let s = spectrum::solve_bands(0.2, &params, 12).unwrap();
    for nu in 1..=5 {
        let n: f64 = (-12..=12).map(|mu| s.coefficient(nu, mu).powi(2)).sum();
        assert!((n - 1.0).abs() < 1e-12);
    }
}
