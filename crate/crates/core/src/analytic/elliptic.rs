//! Carlson symmetric forms and the incomplete elliptic integral of the
//! second kind.

use std::f64::consts::FRAC_PI_2;

/// `R_F(x, y, z)`.
pub fn carlson_rf(x: f64, y: f64, z: f64) -> f64 {
    let (mut x, mut y, mut z) = (x, y, z);
    for _ in 0..200 {
        let a = (x + y + z) / 3.0;
        let dx = 1.0 - x / a;
        let dy = 1.0 - y / a;
        let dz = 1.0 - z / a;
        if dx.abs().max(dy.abs()).max(dz.abs()) < 1e-4 {
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            return (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / a.sqrt();
        }
        let lam = (x * y).sqrt() + (y * z).sqrt() + (z * x).sqrt();
        x = 0.25 * (x + lam);
        y = 0.25 * (y + lam);
        z = 0.25 * (z + lam);
    }
    f64::NAN
}

/// `R_D(x, y, z)`.
pub fn carlson_rd(x: f64, y: f64, z: f64) -> f64 {
    let (mut x, mut y, mut z) = (x, y, z);
    let mut sum = 0.0;
    let mut fac = 1.0;
    for _ in 0..200 {
        let a = (x + y + 3.0 * z) / 5.0;
        let dx = 1.0 - x / a;
        let dy = 1.0 - y / a;
        let dz = 1.0 - z / a;
        if dx.abs().max(dy.abs()).max(dz.abs()) < 1e-4 {
            let ea = dx * dy;
            let eb = dz * dz;
            let ec = ea - eb;
            let ed = ea - 6.0 * eb;
            let ee = ed + ec + ec;
            let s = 1.0 + ed * (-3.0 / 14.0 + 9.0 / 88.0 * ed - 4.5 / 26.0 * dz * ee)
                + dz * (ee / 6.0 + dz * (-9.0 / 22.0 * ec + dz * 3.0 / 26.0 * ea));
            return 3.0 * sum + fac * s / (a * a.sqrt());
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lam = sx * (sy + sz) + sy * sz;
        sum += fac / (sz * (z + lam));
        fac *= 0.25;
        x = 0.25 * (x + lam);
        y = 0.25 * (y + lam);
        z = 0.25 * (z + lam);
    }
    f64::NAN
}

/// Complete `E(m)` for `m <= 1`.
pub fn complete_e(m: f64) -> f64 {
    incomplete_e_principal(FRAC_PI_2, m)
}

fn incomplete_e_principal(phi: f64, m: f64) -> f64 {
    let s = phi.sin();
    let c = phi.cos();
    let s2 = s * s;
    let y = 1.0 - m * s2;
    s * carlson_rf(c * c, y, 1.0) - m * s * s2 * carlson_rd(c * c, y, 1.0) / 3.0
}

/// `E(phi | m) = int_0^phi sqrt(1 - m sin^2 t) dt` for real `phi` and
/// `m <= 1`, using `E(phi + j pi) = E(phi) + 2 j E(m)`.
pub fn incomplete_e(phi: f64, m: f64) -> Option<f64> {
    if !(m <= 1.0) || !phi.is_finite() {
        return None;
    }
    let j = (phi / std::f64::consts::PI).round();
    let r = phi - j * std::f64::consts::PI;
    Some(incomplete_e_principal(r, m) + 2.0 * j * complete_e(m))
}
