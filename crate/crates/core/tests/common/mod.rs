//! Reference computations shared by the integration tests. None of them
//! call into the library's solvers.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Eigenvalues of a symmetric tridiagonal matrix below `count`, found by
/// Sturm-sequence bisection.
pub fn tridiagonal_lowest(diag: &[f64], off: &[f64], count: usize) -> Vec<f64> {
    let below = |x: f64| -> usize {
        let mut n = 0;
        let mut q = diag[0] - x;
        if q < 0.0 {
            n += 1;
        }
        for i in 1..diag.len() {
            let q_prev = if q == 0.0 { 1e-300 } else { q };
            q = diag[i] - x - off[i - 1] * off[i - 1] / q_prev;
            if q < 0.0 {
                n += 1;
            }
        }
        n
    };
    let bound = diag.iter().map(|d| d.abs()).fold(0.0, f64::max)
        + 2.0 * off.iter().map(|e| e.abs()).fold(0.0, f64::max)
        + 1.0;
    (0..count)
        .map(|i| {
            let (mut lo, mut hi) = (-bound, bound);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if below(mid) > i {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo < 1e-14 * (1.0 + mid.abs()) {
                    break;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// Lowest `count` eigenvalues of the scalar operator `p^2 + v cos x` at quasi
/// momentum `k`, expanded in `e^{i(k+n)x}` for `|n| <= 40`.
pub fn scalar_cosine_bands(k: f64, v: f64, count: usize) -> Vec<f64> {
    let n = 40i64;
    let diag: Vec<f64> = (-n..=n).map(|j| (k + j as f64).powi(2)).collect();
    let off = vec![0.5 * v; diag.len() - 1];
    tridiagonal_lowest(&diag, &off, count)
}

/// Composite Simpson rule with `n` (even) intervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    assert!(n % 2 == 0);
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Classic fixed-step fourth-order Runge-Kutta for a complex linear system
/// `i dy/dt = H(t) y`, with `y` split into real and imaginary parts.
pub fn rk4_schrodinger<const N: usize, H>(h: H, t0: f64, t1: f64, y0: [(f64, f64); N], steps: usize) -> [(f64, f64); N]
where
    H: Fn(f64) -> [[f64; N]; N],
{
    let deriv = |t: f64, y: &[(f64, f64); N]| -> [(f64, f64); N] {
        let m = h(t);
        let mut out = [(0.0, 0.0); N];
        for i in 0..N {
            let (mut re, mut im) = (0.0, 0.0);
            for j in 0..N {
                re += m[i][j] * y[j].0;
                im += m[i][j] * y[j].1;
            }
            // -i (re + i im) = im - i re
            out[i] = (im, -re);
        }
        out
    };
    let dt = (t1 - t0) / steps as f64;
    let mut y = y0;
    let axpy = |y: &[(f64, f64); N], k: &[(f64, f64); N], s: f64| -> [(f64, f64); N] {
        let mut o = *y;
        for i in 0..N {
            o[i].0 += s * k[i].0;
            o[i].1 += s * k[i].1;
        }
        o
    };
    for n in 0..steps {
        let t = t0 + n as f64 * dt;
        let k1 = deriv(t, &y);
        let k2 = deriv(t + 0.5 * dt, &axpy(&y, &k1, 0.5 * dt));
        let k3 = deriv(t + 0.5 * dt, &axpy(&y, &k2, 0.5 * dt));
        let k4 = deriv(t + dt, &axpy(&y, &k3, dt));
        for i in 0..N {
            y[i].0 += dt / 6.0 * (k1[i].0 + 2.0 * k2[i].0 + 2.0 * k3[i].0 + k4[i].0);
            y[i].1 += dt / 6.0 * (k1[i].1 + 2.0 * k2[i].1 + 2.0 * k3[i].1 + k4[i].1);
        }
    }
    y
}

/// Width of a free Gaussian under `H = p^2` with initial `Delta_x^2 = w0`.
pub fn free_width_sq(w0: f64, t: f64) -> f64 {
    w0 + t * t / w0
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

pub const TWO_PI: f64 = 2.0 * PI;
