//! Plane-wave Bloch Hamiltonian at fixed quasi momentum, dressed bands and
//! their use for building and analysing wave packets.
//!
//! The basis at quasi momentum `k` is `|k+mu>` for `mu = -M..=M`, with the
//! internal state fixed by the parity of `mu` (even: minus, odd: plus).

use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    bare_detuning_sign, bare_internal_state, gaussian_truncation, GaussianSpec, InternalState,
    ScaledParams, SpatialGrid,
};
use crate::propagator::SpinorWavefunction;
use crate::C64;

pub const DEFAULT_TRUNCATION: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct BlochMatrix {
    pub k: f64,
    pub m: usize,
    /// Basis ordered `mu = -M..=M`.
    pub entries: DMatrix<f64>,
}

impl BlochMatrix {
    pub fn dim(&self) -> usize {
        2 * self.m + 1
    }
}

/// Bare energy `(k+mu)^2 +- delta/2`.
pub fn bare_energy(k: f64, mu: i64, delta: f64) -> f64 {
    let p = k + mu as f64;
    p * p + bare_detuning_sign(mu) * 0.5 * delta
}

fn check_k(k: f64) -> Result<()> {
    if !(k > -1.0 && k <= 1.0) {
        return Err(Error::invalid(format!("quasi momentum {k} outside (-1, 1]")));
    }
    Ok(())
}

fn check_m(m: usize) -> Result<()> {
    if m < 1 {
        return Err(Error::Truncation("truncation M must be at least 1".into()));
    }
    Ok(())
}

pub(crate) fn bloch_entries(k: f64, params: &ScaledParams, m: usize) -> DMatrix<f64> {
    let dim = 2 * m + 1;
    let half_v = 0.5 * params.v0;
    DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            bare_energy(k, i as i64 - m as i64, params.delta0)
        } else if i.abs_diff(j) == 1 {
            half_v
        } else {
            0.0
        }
    })
}

pub fn build_bloch_matrix(k: f64, params: &ScaledParams, m: usize) -> Result<BlochMatrix> {
    check_k(k)?;
    check_m(m)?;
    params.validate()?;
    Ok(BlochMatrix {
        k,
        m,
        entries: bloch_entries(k, params, m),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandSolution {
    pub k: f64,
    pub m: usize,
    /// Ascending, band `nu` at index `nu - 1`.
    pub energies: Vec<f64>,
    /// Column `nu - 1` holds `c_nu^mu` for `mu = -M..=M`.
    pub coefficients: DMatrix<f64>,
}

impl BandSolution {
    pub fn energy(&self, nu: usize) -> f64 {
        self.energies[nu - 1]
    }

    pub fn coefficient(&self, nu: usize, mu: i64) -> f64 {
        let i = mu + self.m as i64;
        if i < 0 || i as usize >= self.energies.len() {
            return 0.0;
        }
        self.coefficients[(i as usize, nu - 1)]
    }

    pub fn band_count(&self) -> usize {
        self.energies.len()
    }
}

pub(crate) fn solve_unchecked(k: f64, params: &ScaledParams, m: usize) -> Result<BandSolution> {
    let h = bloch_entries(k, params, m);
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical(format!("eigensolver did not converge at k = {k}")))?;
    let dim = 2 * m + 1;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut coefficients = DMatrix::zeros(dim, dim);
    for (col, &src) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(src);
        let lead = v.iter().copied().fold(0.0_f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        let sign = if lead < 0.0 { -1.0 } else { 1.0 };
        for r in 0..dim {
            coefficients[(r, col)] = sign * v[r];
        }
    }
    Ok(BandSolution {
        k,
        m,
        energies,
        coefficients,
    })
}

pub fn solve_bands(k: f64, params: &ScaledParams, m: usize) -> Result<BandSolution> {
    check_k(k)?;
    check_m(m)?;
    params.validate()?;
    solve_unchecked(k, params, m)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispersionTable {
    pub params: ScaledParams,
    pub k: Vec<f64>,
    /// `energies[nu - 1][i]` is `E_nu(k[i])`.
    pub energies: Vec<Vec<f64>>,
    pub nu_max: usize,
}

impl DispersionTable {
    pub fn write_csv<W: Write>(&self, mut w: W, metadata: &str) -> Result<()> {
        writeln!(w, "# {metadata}")?;
        let header: Vec<String> = std::iter::once("k".to_string())
            .chain((1..=self.nu_max).map(|nu| format!("E_{nu}")))
            .collect();
        writeln!(w, "{}", header.join(","))?;
        for (i, k) in self.k.iter().enumerate() {
            let mut row = format!("{k:.10e}");
            for band in &self.energies {
                row.push_str(&format!(",{:.12e}", band[i]));
            }
            writeln!(w, "{row}")?;
        }
        Ok(())
    }
}

/// Uniform grid of `n` quasi momenta in (-1, 1], ending at 1.
pub fn zone_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|i| -1.0 + 2.0 * i as f64 / n as f64).collect()
}

pub fn dispersion(
    params: &ScaledParams,
    k_grid: &[f64],
    nu_max: usize,
    m: usize,
) -> Result<DispersionTable> {
    check_m(m)?;
    params.validate()?;
    if nu_max == 0 || nu_max > 2 * m + 1 {
        return Err(Error::Truncation(format!(
            "{nu_max} bands requested but truncation M = {m} holds {}",
            2 * m + 1
        )));
    }
    for &k in k_grid {
        check_k(k)?;
    }
    let solved: Vec<BandSolution> = k_grid
        .par_iter()
        .map(|&k| solve_unchecked(k, params, m))
        .collect::<Result<_>>()?;
    let energies = (1..=nu_max)
        .map(|nu| solved.iter().map(|s| s.energy(nu)).collect())
        .collect();
    Ok(DispersionTable {
        params: *params,
        k: k_grid.to_vec(),
        energies,
        nu_max,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveParameters {
    pub group_velocity: f64,
    pub inverse_mass: f64,
    /// Set when a neighbouring band comes within ten stencil widths.
    pub ill_conditioned: bool,
}

pub fn effective_parameters(
    params: &ScaledParams,
    nu: usize,
    k0: f64,
    m: usize,
    h: f64,
) -> Result<EffectiveParameters> {
    check_m(m)?;
    if !(h > 0.0) {
        return Err(Error::invalid("finite-difference step must be positive"));
    }
    check_k(k0 - h)?;
    check_k(k0 + h)?;
    if nu == 0 || nu > 2 * m + 1 {
        return Err(Error::Truncation(format!("band {nu} not available at M = {m}")));
    }
    let sols = [
        solve_unchecked(k0 - h, params, m)?,
        solve_unchecked(k0, params, m)?,
        solve_unchecked(k0 + h, params, m)?,
    ];
    let e: Vec<f64> = sols.iter().map(|s| s.energy(nu)).collect();
    let min_gap = sols
        .iter()
        .map(|s| {
            let below = if nu > 1 { s.energy(nu) - s.energy(nu - 1) } else { f64::INFINITY };
            let above = if nu < s.band_count() { s.energy(nu + 1) - s.energy(nu) } else { f64::INFINITY };
            below.min(above)
        })
        .fold(f64::INFINITY, f64::min);
    let ill_conditioned = min_gap < 10.0 * h;
    if ill_conditioned {
        log::warn!("band {nu} at k = {k0} is within {min_gap:.3e} of a neighbour; finite differences are unreliable");
    }
    Ok(EffectiveParameters {
        group_velocity: (e[2] - e[0]) / (2.0 * h),
        inverse_mass: (e[2] - 2.0 * e[1] + e[0]) / (h * h),
        ill_conditioned,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CrossingKind {
    Bragg,
    Doppleron,
    Triple,
    /// Four or more bare curves meeting at one point.
    Multiple,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Crossing {
    pub k: f64,
    pub energy: f64,
    pub mus: Vec<i64>,
    pub kind: CrossingKind,
    /// Largest difference between the participating bare energies at `k`.
    pub energy_spread: f64,
    /// Splitting of the dressed levels emerging from the crossing, when a
    /// coupling was supplied.
    pub gap: Option<f64>,
}

pub fn classify_crossings(delta: f64) -> Vec<Crossing> {
    classify_crossings_with(delta, DEFAULT_TRUNCATION, None)
}

/// Bare-curve intersections among `|mu| <= m` on the closed zone [-1, 1].
pub fn classify_crossings_with(delta: f64, m: usize, v0: Option<f64>) -> Vec<Crossing> {
    let m = m as i64;
    let tol = 1e-12;
    let mut points: Vec<(f64, f64, Vec<i64>)> = Vec::new();
    for a in -m..=m {
        for b in (a + 1)..=m {
            // (k+a)^2 + sa d/2 = (k+b)^2 + sb d/2 is linear in k.
            let sa = bare_detuning_sign(a);
            let sb = bare_detuning_sign(b);
            let num = (b * b - a * a) as f64 + 0.5 * delta * (sb - sa);
            let k = num / (2.0 * (a - b) as f64);
            if !(k >= -1.0 - tol && k <= 1.0 + tol) {
                continue;
            }
            let k = k.clamp(-1.0, 1.0);
            let e = bare_energy(k, a, delta);
            match points
                .iter_mut()
                .find(|(pk, pe, _)| (pk - k).abs() < 1e-9 && (pe - e).abs() < 1e-9 * (1.0 + e.abs()))
            {
                Some((_, _, mus)) => {
                    for mu in [a, b] {
                        if !mus.contains(&mu) {
                            mus.push(mu);
                        }
                    }
                }
                None => points.push((k, e, vec![a, b])),
            }
        }
    }
    let mut out: Vec<Crossing> = points
        .into_iter()
        .map(|(k, energy, mut mus)| {
            mus.sort_unstable();
            let kind = match mus.len() {
                2 if bare_internal_state(mus[0]) == bare_internal_state(mus[1]) => CrossingKind::Bragg,
                2 => CrossingKind::Doppleron,
                3 => CrossingKind::Triple,
                _ => CrossingKind::Multiple,
            };
            let es: Vec<f64> = mus.iter().map(|&mu| bare_energy(k, mu, delta)).collect();
            let energy_spread = es.iter().cloned().fold(f64::MIN, f64::max)
                - es.iter().cloned().fold(f64::MAX, f64::min);
            let gap = v0.and_then(|v0| crossing_gap(k, energy, mus.len(), delta, v0, m as usize));
            Crossing {
                k,
                energy,
                mus,
                kind,
                energy_spread,
                gap,
            }
        })
        .collect();
    out.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.k.total_cmp(&b.k)));
    out
}

fn crossing_gap(k: f64, energy: f64, count: usize, delta: f64, v0: f64, m: usize) -> Option<f64> {
    let kk = if k <= -1.0 { k + 2.0 } else { k };
    let params = ScaledParams::new(v0, delta, 0.0);
    let sol = solve_unchecked(kk, &params, m).ok()?;
    let mut near: Vec<f64> = sol.energies.clone();
    near.sort_by(|a, b| (a - energy).abs().total_cmp(&(b - energy).abs()));
    near.truncate(count);
    let hi = near.iter().cloned().fold(f64::MIN, f64::max);
    let lo = near.iter().cloned().fold(f64::MAX, f64::min);
    Some(hi - lo)
}

/// Quasi-momentum classes of a grid: integer `kappa` in `(-n_cells, n_cells]`
/// with `k = kappa / n_cells`, and the FFT bin of `|k+mu>` for each `mu`.
pub(crate) struct ClassMap {
    pub n_cells: i64,
}

impl ClassMap {
    pub fn new(grid: &SpatialGrid) -> Self {
        ClassMap {
            n_cells: grid.n_cells as i64,
        }
    }

    pub fn kappas(&self) -> impl Iterator<Item = i64> {
        (-self.n_cells + 1)..=self.n_cells
    }

    pub fn k(&self, kappa: i64) -> f64 {
        kappa as f64 / self.n_cells as f64
    }

    pub fn bin(&self, grid: &SpatialGrid, kappa: i64, mu: i64) -> Option<usize> {
        grid.bin_of_index(kappa + mu * self.n_cells)
    }
}

fn wrap_zone(d: f64) -> f64 {
    let mut d = (d + 1.0).rem_euclid(2.0) - 1.0;
    if d <= -1.0 {
        d += 2.0;
    }
    d
}

/// Packet of dressed states of band `nu` with a Gaussian quasi-momentum
/// profile centred at `spec.k0`.
pub fn dressed_packet(
    params: &ScaledParams,
    nu: usize,
    spec: &GaussianSpec,
    grid: &SpatialGrid,
    m: usize,
) -> Result<SpinorWavefunction> {
    spec.validate()?;
    grid.validate()?;
    check_m(m)?;
    params.validate()?;
    if nu == 0 || nu > 2 * m + 1 {
        return Err(Error::Truncation(format!("band {nu} not available at M = {m}")));
    }
    let lost = gaussian_truncation(spec, grid);
    if lost > 1e-8 {
        return Err(Error::Truncation(format!(
            "grid of length {:.1} loses {lost:.2e} of the packet norm",
            grid.length()
        )));
    }
    let map = ClassMap::new(grid);
    let wk2 = spec.width_k2();
    let mut plus = vec![C64::new(0.0, 0.0); grid.n_points];
    let mut minus = vec![C64::new(0.0, 0.0); grid.n_points];
    for kappa in map.kappas() {
        let k = map.k(kappa);
        let d = wrap_zone(k - spec.k0);
        let phi = (-d * d / (4.0 * wk2)).exp();
        if phi < 1e-300 {
            continue;
        }
        let sol = solve_unchecked(k, params, m)?;
        for mu in -(m as i64)..=(m as i64) {
            let Some(bin) = map.bin(grid, kappa, mu) else { continue };
            let p = k + mu as f64;
            let amp = C64::from_polar(phi * sol.coefficient(nu, mu), -p * spec.center);
            match bare_internal_state(mu) {
                InternalState::Plus => plus[bin] = amp,
                InternalState::Minus => minus[bin] = amp,
            }
        }
    }
    let mut state = SpinorWavefunction::from_momentum_amplitudes(*grid, &plus, &minus)?;
    state.normalize()?;
    Ok(state)
}

pub fn dressed_gaussian(
    params: &ScaledParams,
    nu: usize,
    k0: f64,
    width_x2: f64,
    grid: &SpatialGrid,
    m: usize,
) -> Result<SpinorWavefunction> {
    dressed_packet(params, nu, &GaussianSpec::dressed(k0, width_x2, nu), grid, m)
}

pub fn bare_gaussian(
    k0: f64,
    width_x2: f64,
    internal: InternalState,
    grid: &SpatialGrid,
) -> Result<SpinorWavefunction> {
    bare_packet(&GaussianSpec::bare(k0, width_x2, internal), internal, grid)
}

pub fn bare_packet(
    spec: &GaussianSpec,
    internal: InternalState,
    grid: &SpatialGrid,
) -> Result<SpinorWavefunction> {
    let chi = crate::model::gaussian_profile(spec, grid)?;
    let mut state = SpinorWavefunction::zeros(*grid);
    *state.component_mut(internal) = chi;
    Ok(state)
}

/// Build the packet described by `spec`, using `params` for dressed kinds.
pub fn packet_from_spec(
    spec: &GaussianSpec,
    params: &ScaledParams,
    grid: &SpatialGrid,
    m: usize,
) -> Result<SpinorWavefunction> {
    match spec.kind {
        crate::model::PacketKind::Bare(s) => bare_packet(spec, s, grid),
        crate::model::PacketKind::Dressed(nu) => dressed_packet(params, nu, spec, grid, m),
    }
}

/// Populations of the requested bands (1-based), summed over all quasi
/// momenta on the grid.
///
/// Bands are evaluated at the physical quasi momentum, so the accelerated
/// frame offset of the state is taken into account.
pub fn band_populations(
    state: &SpinorWavefunction,
    params: &ScaledParams,
    nus: &[usize],
    m: usize,
) -> Result<Vec<f64>> {
    check_m(m)?;
    params.validate()?;
    let dim = 2 * m + 1;
    if let Some(&bad) = nus.iter().find(|&&nu| nu == 0 || nu > dim) {
        return Err(Error::Truncation(format!("band {bad} not available at M = {m}")));
    }
    let grid = state.grid;
    let (ap, am) = state.momentum_amplitudes();
    let map = ClassMap::new(&grid);
    let total: f64 = ap.iter().chain(am.iter()).map(|z| z.norm_sqr()).sum();
    let mut out = vec![0.0; nus.len()];
    let mut vec_c = vec![C64::new(0.0, 0.0); dim];
    for kappa in map.kappas() {
        let mut weight = 0.0;
        for (i, mu) in (-(m as i64)..=(m as i64)).enumerate() {
            vec_c[i] = match map.bin(&grid, kappa, mu) {
                Some(bin) => match bare_internal_state(mu) {
                    InternalState::Plus => ap[bin],
                    InternalState::Minus => am[bin],
                },
                None => C64::new(0.0, 0.0),
            };
            weight += vec_c[i].norm_sqr();
        }
        if weight <= 1e-22 * total {
            continue;
        }
        let k = map.k(kappa) - state.gauge_offset;
        let sol = solve_unchecked(k, params, m)?;
        for (o, &nu) in out.iter_mut().zip(nus) {
            let overlap: C64 = (0..dim).map(|i| vec_c[i] * sol.coefficients[(i, nu - 1)]).sum();
            *o += overlap.norm_sqr();
        }
    }
    Ok(out)
}

pub fn project_band(
    state: &SpinorWavefunction,
    params: &ScaledParams,
    nu: usize,
    m: usize,
) -> Result<f64> {
    Ok(band_populations(state, params, &[nu], m)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v0: f64, delta: f64) -> ScaledParams {
        ScaledParams::new(v0, delta, 0.0)
    }

    #[test]
    fn three_by_three_matrix() {
        let b = build_bloch_matrix(0.0, &p(0.2, 0.0), 1).unwrap();
        let e = &b.entries;
        assert_eq!((e[(0, 0)], e[(1, 1)], e[(2, 2)]), (1.0, 0.0, 1.0));
        assert_eq!((e[(0, 1)], e[(1, 2)], e[(0, 2)]), (0.1, 0.1, 0.0));
        assert!((e - e.transpose()).amax() == 0.0);
    }

    #[test]
    fn bare_entry_sign() {
        let b = build_bloch_matrix(0.5, &p(0.2, 0.7), 3).unwrap();
        assert!((b.entries[(3, 3)] - (-0.10)).abs() < 1e-15);
        let z = build_bloch_matrix(0.3, &p(0.0, 0.7), 3).unwrap();
        assert!(z.entries.iter().enumerate().all(|(i, &v)| i % 8 == 0 || v == 0.0));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(build_bloch_matrix(0.0, &p(0.2, 0.0), 0), Err(Error::Truncation(_))));
        assert!(build_bloch_matrix(-1.0, &p(0.2, 0.0), 4).is_err());
        assert!(build_bloch_matrix(1.0, &p(0.2, 0.0), 4).is_ok());
        assert!(dispersion(&p(0.2, 0.0), &[0.0], 10, 4).is_err());
    }

    #[test]
    fn characteristic_roots() {
        // det = (1 - E)(E^2 - E - 0.02); roots 1 and (1 +- sqrt(1.08))/2.
        let s = solve_bands(0.0, &p(0.2, 0.0), 1).unwrap();
        let r = 1.08_f64.sqrt();
        let expect = [(1.0 - r) / 2.0, 1.0, (1.0 + r) / 2.0];
        for (a, b) in s.energies.iter().zip(expect) {
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        }
    }

    #[test]
    fn zero_coupling_is_permutation() {
        let s = solve_bands(0.37, &p(0.0, 0.4), 4).unwrap();
        let mut bare: Vec<f64> = (-4..=4).map(|mu| bare_energy(0.37, mu, 0.4)).collect();
        bare.sort_by(f64::total_cmp);
        for (a, b) in s.energies.iter().zip(&bare) {
            assert!((a - b).abs() < 1e-14);
        }
        for col in 0..9 {
            let c = s.coefficients.column(col);
            assert_eq!(c.iter().filter(|&&x| x == 1.0).count(), 1);
            assert_eq!(c.iter().filter(|&&x| x == 0.0).count(), 8);
        }
    }

    #[test]
    fn unitary_with_phase_convention() {
        let s = solve_bands(0.2, &p(0.8, 0.3), 12).unwrap();
        let c = &s.coefficients;
        let err = (c * c.transpose() - DMatrix::<f64>::identity(25, 25)).amax();
        assert!(err < 1e-10);
        for col in c.column_iter() {
            let lead = col.iter().cloned().fold(0.0_f64, |a, x| if x.abs() > a.abs() { x } else { a });
            assert!(lead > 0.0);
        }
    }

    #[test]
    fn effective_parameters_free() {
        let e = effective_parameters(&p(0.0, 0.0), 1, 0.3, 12, 1e-4).unwrap();
        assert!((e.group_velocity - 0.6).abs() < 1e-8);
        assert!((e.inverse_mass - 2.0).abs() < 1e-5);
        assert!(!e.ill_conditioned);
        let g = effective_parameters(&p(0.2, 0.0), 1, 0.0, 12, 1e-4).unwrap();
        assert!(g.group_velocity.abs() < 1e-10);
    }

    #[test]
    fn effective_parameters_flags_degeneracy() {
        let e = effective_parameters(&p(0.0, 0.0), 1, 0.5, 12, 1e-3).unwrap();
        assert!(e.ill_conditioned);
    }

    #[test]
    fn crossings_at_zero_detuning() {
        let c = classify_crossings(0.0);
        let low: Vec<&Crossing> = c.iter().filter(|c| c.energy < 1.1).collect();
        let dop: Vec<_> = low.iter().filter(|c| c.kind == CrossingKind::Doppleron).collect();
        assert!(dop.iter().any(|c| (c.k - 0.5).abs() < 1e-12 && c.mus == vec![-1, 0]));
        assert!(dop.iter().any(|c| (c.k + 0.5).abs() < 1e-12 && c.mus == vec![0, 1]));
        assert!(low
            .iter()
            .any(|c| c.kind == CrossingKind::Bragg && c.k.abs() < 1e-12 && c.mus == vec![-1, 1]));
    }

    #[test]
    fn triple_at_minus_one() {
        let c = classify_crossings_with(-1.0, 12, Some(0.2));
        let t: Vec<_> = c.iter().filter(|c| c.kind == CrossingKind::Triple).collect();
        assert!(!t.is_empty());
        let first = t[0];
        assert!(first.k.abs() < 1e-12);
        assert!((first.energy - 0.5).abs() < 1e-12);
        assert_eq!(first.mus, vec![-1, 0, 1]);
        assert!(first.energy_spread < 1e-12);
        assert!(first.gap.unwrap() > 0.1);
    }

    #[test]
    fn zone_grid_ends_at_one() {
        let g = zone_grid(41);
        assert_eq!(g.len(), 41);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert!(g[0] > -1.0);
    }

    #[test]
    fn wrap_zone_range() {
        assert_eq!(wrap_zone(1.5), -0.5);
        assert_eq!(wrap_zone(-1.0), 1.0);
        assert_eq!(wrap_zone(0.25), 0.25);
    }
}
