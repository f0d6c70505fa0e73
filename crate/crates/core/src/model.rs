//! Unit system, bare-state bookkeeping, spatial grid and Gaussian profiles.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Reduced Planck constant in J s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Unscaled model parameters in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Atomic mass in kg.
    pub atomic_mass: f64,
    /// Mode wavenumber q in 1/m.
    pub wavenumber: f64,
    /// Vacuum Rabi coupling g0 in rad/s.
    pub coupling: f64,
    /// Atom-field detuning in rad/s.
    pub detuning: f64,
    /// Constant external force in N.
    pub force: f64,
    /// Planck constant used for the conversion, normally [`HBAR`].
    pub hbar: f64,
}

impl PhysicalParams {
    pub fn recoil_energy(&self) -> f64 {
        self.hbar * self.hbar * self.wavenumber * self.wavenumber / (2.0 * self.atomic_mass)
    }
}

/// Dimensionless model parameters.
///
/// `v0` is the full effective off-diagonal amplitude, so every matrix
/// coupling is `v0 / 2`. A photon-number factor has to be folded in by the
/// caller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledParams {
    pub v0: f64,
    pub delta0: f64,
    pub force: f64,
    pub n: u32,
    pub kappa: f64,
    pub omega: f64,
    pub chirped: bool,
}

impl Default for ScaledParams {
    fn default() -> Self {
        ScaledParams {
            v0: 0.2,
            delta0: 0.0,
            force: 0.0,
            n: 1,
            kappa: 0.0,
            omega: 0.0,
            chirped: false,
        }
    }
}

impl ScaledParams {
    pub fn new(v0: f64, delta0: f64, force: f64) -> Self {
        ScaledParams {
            v0,
            delta0,
            force,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.v0, self.delta0, self.force, self.kappa, self.omega]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("parameters must be finite"));
        }
        if self.v0 < 0.0 {
            return Err(Error::invalid(format!("V0 must be nonnegative, got {}", self.v0)));
        }
        if self.kappa < 0.0 {
            return Err(Error::invalid(format!("kappa must be nonnegative, got {}", self.kappa)));
        }
        if self.omega < 0.0 {
            return Err(Error::invalid(format!("omega must be nonnegative, got {}", self.omega)));
        }
        Ok(())
    }

    /// Detuning at scaled time `t`.
    pub fn delta_at(&self, t: f64) -> f64 {
        if self.chirped {
            self.delta0 * (self.omega * t).cos()
        } else {
            self.delta0
        }
    }

    /// Coupling at scaled time `t`.
    pub fn coupling_at(&self, t: f64) -> f64 {
        if self.kappa > 0.0 {
            self.v0 * (-self.kappa * t).exp()
        } else {
            self.v0
        }
    }

    /// Static parameters frozen at time `t`.
    pub fn at_time(&self, t: f64) -> ScaledParams {
        ScaledParams {
            v0: self.coupling_at(t),
            delta0: self.delta_at(t),
            kappa: 0.0,
            chirped: false,
            ..*self
        }
    }
}

/// Result of [`scale_parameters`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledUnits {
    pub params: ScaledParams,
    /// Recoil energy in J.
    pub recoil_energy: f64,
    /// Time unit hbar/E_R in s.
    pub time_unit: f64,
    /// Length unit 1/q in m.
    pub length_unit: f64,
}

impl ScaledUnits {
    pub fn physical_time(&self, t: f64) -> f64 {
        t * self.time_unit
    }
}

pub fn scale_parameters(p: &PhysicalParams) -> Result<ScaledUnits> {
    if !(p.atomic_mass > 0.0) {
        return Err(Error::invalid("atomic mass must be positive"));
    }
    if !(p.wavenumber > 0.0) {
        return Err(Error::invalid("wavenumber must be positive"));
    }
    if !(p.hbar > 0.0) {
        return Err(Error::invalid("hbar must be positive"));
    }
    if p.coupling < 0.0 {
        return Err(Error::invalid("coupling must be nonnegative"));
    }
    let er = p.recoil_energy();
    let params = ScaledParams {
        v0: 2.0 * p.hbar * p.coupling / er,
        delta0: p.hbar * p.detuning / er,
        force: p.force / (p.wavenumber * er),
        ..Default::default()
    };
    Ok(ScaledUnits {
        params,
        recoil_energy: er,
        time_unit: p.hbar / er,
        length_unit: 1.0 / p.wavenumber,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InternalState {
    /// |n-1>|up>
    Plus,
    /// |n>|down>
    Minus,
}

impl InternalState {
    pub fn sigma_z(self) -> f64 {
        match self {
            InternalState::Plus => 1.0,
            InternalState::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            InternalState::Plus => InternalState::Minus,
            InternalState::Minus => InternalState::Plus,
        }
    }
}

impl std::str::FromStr for InternalState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "plus" | "+" | "up" => Ok(InternalState::Plus),
            "minus" | "-" | "down" => Ok(InternalState::Minus),
            other => Err(Error::invalid(format!("unknown internal state `{other}`"))),
        }
    }
}

/// Internal state of the bare state |k+mu> in the manifold seeded by |k>|->.
pub fn bare_internal_state(mu: i64) -> InternalState {
    if mu.rem_euclid(2) == 0 {
        InternalState::Minus
    } else {
        InternalState::Plus
    }
}

/// Sign of the detuning term in the bare energy of index `mu`.
pub fn bare_detuning_sign(mu: i64) -> f64 {
    bare_internal_state(mu).sigma_z()
}

/// Periodic grid of `n_points` samples covering `n_cells` potential periods.
///
/// Points are `x_j = -L/2 + j dx`, `L = 2 pi n_cells`. Momenta live on the
/// lattice `p = m / n_cells`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpatialGrid {
    pub n_cells: usize,
    pub n_points: usize,
}

impl Default for SpatialGrid {
    fn default() -> Self {
        SpatialGrid {
            n_cells: 256,
            n_points: 8192,
        }
    }
}

impl SpatialGrid {
    pub fn new(n_cells: usize, n_points: usize) -> Result<Self> {
        let g = SpatialGrid { n_cells, n_points };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_cells == 0 {
            return Err(Error::invalid("grid needs at least one cell"));
        }
        if !self.n_points.is_power_of_two() {
            return Err(Error::invalid(format!(
                "number of grid points must be a power of two, got {}",
                self.n_points
            )));
        }
        if self.n_points % self.n_cells != 0 || self.n_points / self.n_cells < 4 {
            return Err(Error::invalid(format!(
                "{} points cannot be split evenly into {} cells with at least 4 points each",
                self.n_points, self.n_cells
            )));
        }
        Ok(())
    }

    pub fn points_per_cell(&self) -> usize {
        self.n_points / self.n_cells
    }

    pub fn length(&self) -> f64 {
        2.0 * PI * self.n_cells as f64
    }

    pub fn dx(&self) -> f64 {
        self.length() / self.n_points as f64
    }

    pub fn x0(&self) -> f64 {
        -0.5 * self.length()
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x0() + j as f64 * self.dx()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.x(j)).collect()
    }

    /// Momentum lattice spacing 2 pi / L.
    pub fn dp(&self) -> f64 {
        1.0 / self.n_cells as f64
    }

    pub fn p_max(&self) -> f64 {
        PI / self.dx()
    }

    /// Signed lattice index of FFT bin `j` (momentum `index / n_cells`).
    pub fn momentum_index(&self, j: usize) -> i64 {
        let n = self.n_points as i64;
        let j = j as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    /// FFT bin holding lattice index `m`, if it is on the grid.
    pub fn bin_of_index(&self, m: i64) -> Option<usize> {
        let n = self.n_points as i64;
        if m < -n / 2 || m >= n / 2 {
            None
        } else {
            Some(m.rem_euclid(n) as usize)
        }
    }

    /// Momenta in FFT order.
    pub fn momenta(&self) -> Vec<f64> {
        (0..self.n_points)
            .map(|j| self.momentum_index(j) as f64 * self.dp())
            .collect()
    }

    /// Largest stable split-operator step.
    pub fn max_dt(&self) -> f64 {
        0.5 / (self.p_max() * self.p_max())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PacketKind {
    Bare(InternalState),
    /// Dressed packet in band `nu` (1-based).
    Dressed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub k0: f64,
    pub width_x2: f64,
    pub kind: PacketKind,
    pub center: f64,
}

impl GaussianSpec {
    pub fn bare(k0: f64, width_x2: f64, internal: InternalState) -> Self {
        GaussianSpec {
            k0,
            width_x2,
            kind: PacketKind::Bare(internal),
            center: 0.0,
        }
    }

    pub fn dressed(k0: f64, width_x2: f64, nu: usize) -> Self {
        GaussianSpec {
            k0,
            width_x2,
            kind: PacketKind::Dressed(nu),
            center: 0.0,
        }
    }

    /// Momentum-space variance 1/(4 width_x2).
    pub fn width_k2(&self) -> f64 {
        0.25 / self.width_x2
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width_x2 > 0.0) || !self.width_x2.is_finite() {
            return Err(Error::invalid(format!(
                "packet width must be positive, got {}",
                self.width_x2
            )));
        }
        if !(self.k0 > -1.0 && self.k0 <= 1.0) {
            return Err(Error::invalid(format!(
                "k0 = {} lies outside the zone (-1, 1]",
                self.k0
            )));
        }
        if self.width_k2() >= 1.0 {
            return Err(Error::invalid(format!(
                "momentum spread {} exceeds the zone half-width",
                self.width_k2().sqrt()
            )));
        }
        if let PacketKind::Dressed(0) = self.kind {
            return Err(Error::invalid("bands are numbered from 1"));
        }
        Ok(())
    }
}

/// Probability mass of the continuous packet lying outside the grid.
pub fn gaussian_truncation(spec: &GaussianSpec, grid: &SpatialGrid) -> f64 {
    let sigma = spec.width_x2.sqrt();
    let lo = grid.x0();
    let hi = grid.x0() + grid.length();
    let s2 = std::f64::consts::SQRT_2 * sigma;
    0.5 * statrs::function::erf::erfc((hi - spec.center) / s2)
        + 0.5 * statrs::function::erf::erfc((spec.center - lo) / s2)
}

/// Sampled Gaussian `exp(-(x-c)^2 / (4 width_x2) + i k0 x)`, normalized so that
/// `sum |chi|^2 dx = 1`.
pub fn gaussian_profile(spec: &GaussianSpec, grid: &SpatialGrid) -> Result<Vec<C64>> {
    spec.validate()?;
    grid.validate()?;
    let lost = gaussian_truncation(spec, grid);
    if lost > 1e-8 {
        return Err(Error::Truncation(format!(
            "grid of length {:.1} loses {lost:.2e} of the packet norm",
            grid.length()
        )));
    }
    let mut out: Vec<C64> = (0..grid.n_points)
        .map(|j| {
            let x = grid.x(j);
            let d = x - spec.center;
            C64::from_polar((-d * d / (4.0 * spec.width_x2)).exp(), spec.k0 * x)
        })
        .collect();
    let norm: f64 = out.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.dx();
    let s = 1.0 / norm.sqrt();
    out.iter_mut().for_each(|z| *z *= s);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parity_rule() {
        assert_eq!(bare_internal_state(0), InternalState::Minus);
        assert_eq!(bare_internal_state(1), InternalState::Plus);
        assert_eq!(bare_internal_state(-3), InternalState::Plus);
        assert_eq!(bare_internal_state(-2), InternalState::Minus);
        for mu in -20..20 {
            assert_eq!(bare_internal_state(mu), bare_internal_state(mu + 2));
        }
    }

    #[test]
    fn scaling_definitions() {
        let base = PhysicalParams {
            atomic_mass: 1.443e-25,
            wavenumber: 2.0 * PI / 780e-9,
            coupling: 0.0,
            detuning: 0.0,
            force: 0.0,
            hbar: HBAR,
        };
        let er = base.recoil_energy();
        let s = scale_parameters(&PhysicalParams {
            coupling: er / (2.0 * HBAR),
            ..base
        })
        .unwrap();
        assert!((s.params.v0 - 1.0).abs() < 1e-12);
        assert_eq!(s.params.delta0, 0.0);
        assert!((s.time_unit - HBAR / er).abs() < 1e-24);
    }

    #[test]
    fn recoil_time_unit() {
        // E_R = 1.03e-10 eV; t = 200 scaled should be about a millisecond.
        let er_joule = 1.03e-10 * 1.602_176_634e-19;
        let q = 1.0e7;
        let m = HBAR * HBAR * q * q / (2.0 * er_joule);
        let s = scale_parameters(&PhysicalParams {
            atomic_mass: m,
            wavenumber: q,
            coupling: 1.0,
            detuning: 0.0,
            force: 0.0,
            hbar: HBAR,
        })
        .unwrap();
        let t = s.physical_time(200.0);
        assert!(t > 1.0e-3 && t < 1.5e-3, "t = {t}");
    }

    #[test]
    fn unit_scaling_is_identity() {
        let p = PhysicalParams {
            atomic_mass: 0.5,
            wavenumber: 1.0,
            coupling: 0.35,
            detuning: -1.25,
            force: 0.0075,
            hbar: 1.0,
        };
        let s = scale_parameters(&p).unwrap();
        assert_eq!(s.recoil_energy, 1.0);
        assert_eq!(s.params.v0, 0.7);
        assert_eq!(s.params.delta0, -1.25);
        assert_eq!(s.params.force, 0.0075);
    }

    #[test]
    fn scaling_rejects_bad_input() {
        let p = PhysicalParams {
            atomic_mass: 0.0,
            wavenumber: 1.0,
            coupling: 1.0,
            detuning: 0.0,
            force: 0.0,
            hbar: 1.0,
        };
        assert!(scale_parameters(&p).is_err());
        assert!(scale_parameters(&PhysicalParams {
            atomic_mass: 1.0,
            wavenumber: -1.0,
            ..p
        })
        .is_err());
    }

    #[test]
    fn grid_geometry() {
        let g = SpatialGrid::new(64, 1024).unwrap();
        assert_eq!(g.points_per_cell(), 16);
        assert!((g.p_max() - 8.0).abs() < 1e-12);
        assert_eq!(g.momentum_index(512), -512);
        assert_eq!(g.bin_of_index(-1), Some(1023));
        assert_eq!(g.bin_of_index(512), None);
        assert!(SpatialGrid::new(64, 1000).is_err());
        assert!(SpatialGrid::new(3, 1024).is_err());
    }

    #[test]
    fn profile_normalized() {
        let g = SpatialGrid::new(64, 1024).unwrap();
        for (k0, w) in [(0.0, 50.0), (0.5, 50.0), (-0.3, 12.0)] {
            let chi = gaussian_profile(&GaussianSpec::bare(k0, w, InternalState::Minus), &g).unwrap();
            let n: f64 = chi.iter().map(|z| z.norm_sqr()).sum::<f64>() * g.dx();
            assert!((n - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn profile_truncation_detected() {
        let g = SpatialGrid::new(4, 256).unwrap();
        let spec = GaussianSpec::bare(0.0, 50.0, InternalState::Minus);
        assert!(matches!(gaussian_profile(&spec, &g), Err(Error::Truncation(_))));
    }

    #[test]
    fn spec_validation() {
        assert!(GaussianSpec::bare(0.0, 0.0, InternalState::Plus).validate().is_err());
        assert!(GaussianSpec::bare(-1.0, 50.0, InternalState::Plus).validate().is_err());
        assert!(GaussianSpec::bare(0.0, 0.2, InternalState::Plus).validate().is_err());
        assert!(GaussianSpec::dressed(0.0, 50.0, 0).validate().is_err());
        assert!(GaussianSpec::dressed(1.0, 50.0, 2).validate().is_ok());
    }
}
