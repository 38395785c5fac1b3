//! Basis functions sampled from their own recurrences (associated Legendre
//! for the two-sphere, Jacobi polynomials for Wigner's small d).

use num_complex::Complex64;

use super::grid::QuadratureGrid;
use crate::modes::ModeLabel;

/// `P̄_{lm}(cos θ)` for `m ≥ 0`, normalised so that `P̄_{lm} e^{imφ}` has
/// unit mean square on the sphere; Condon-Shortley phase included.
pub fn normalized_legendre(l: u32, m: u32, theta: f64) -> f64 {
    if m > l {
        return 0.0;
    }
    let (x, s) = (theta.cos(), theta.sin());
    let mut pmm = 1.0;
    for k in 1..=m {
        let k = k as f64;
        pmm *= -((2.0 * k + 1.0) / (2.0 * k)).sqrt() * s;
    }
    if l == m {
        return pmm;
    }
    let mut prev = pmm;
    let mut cur = (2.0 * m as f64 + 3.0).sqrt() * x * pmm;
    let mf = m as f64;
    for ll in (m + 2)..=l {
        let lf = ll as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
        let next = a * (x * cur - b * prev);
        prev = cur;
        cur = next;
    }
    cur
}

/// Jacobi polynomial `P_n^{(a,b)}(x)` by the three-term recurrence.
pub fn jacobi(n: u32, a: f64, b: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut p0 = 1.0;
    let mut p1 = (a + 1.0) + (a + b + 2.0) * (x - 1.0) / 2.0;
    for k in 2..=n {
        let k = k as f64;
        let c = 2.0 * k + a + b;
        let lhs = 2.0 * k * (k + a + b) * (c - 2.0);
        let p2 = ((c - 1.0) * (c * (c - 2.0) * x + a * a - b * b) * p1
            - 2.0 * (k + a - 1.0) * (k + b - 1.0) * c * p0)
            / lhs;
        p0 = p1;
        p1 = p2;
    }
    p1
}

fn binomial(n: i64, k: i64) -> f64 {
    if k < 0 || k > n {
        return 0.0;
    }
    (0..k.min(n - k)).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Wigner small-d `d^j_{rc}(β)` with doubled labels `dj = 2j`, `dr = 2r`,
/// `dc = 2c`.
pub fn wigner_small_d(dj: u32, dr: i32, dc: i32, beta: f64) -> f64 {
    let j2 = dj as i64;
    let (r2, c2) = (dr as i64, dc as i64);
    if r2.abs() > j2 || c2.abs() > j2 || (j2 + r2) % 2 != 0 || (j2 + c2) % 2 != 0 {
        return 0.0;
    }
    let (jpc, jmc, jpr, jmr) = ((j2 + c2) / 2, (j2 - c2) / 2, (j2 + r2) / 2, (j2 - r2) / 2);
    let k = jpc.min(jmc).min(jpr).min(jmr);
    let rmc = (r2 - c2) / 2;
    let (a, lambda) = if k == jpc {
        (rmc, rmc)
    } else if k == jmc || k == jpr {
        (-rmc, 0)
    } else {
        (rmc, rmc)
    };
    let b = j2 - 2 * k - a;
    let sign = if lambda.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let norm = (binomial(j2 - k, k + a) / binomial(k + b, b)).sqrt();
    let (sh, ch) = ((beta / 2.0).sin(), (beta / 2.0).cos());
    sign * norm
        * sh.powi(a as i32)
        * ch.powi(b as i32)
        * jacobi(k as u32, a as f64, b as f64, beta.cos())
}

fn phase(freq: f64, x: f64) -> Complex64 {
    Complex64::from_polar(1.0, freq * x)
}

/// Per-axis factors of a basis function on the grid.
pub fn axis_factors(grid: &QuadratureGrid, mode: &ModeLabel) -> Vec<Vec<Complex64>> {
    let ax = &grid.axes;
    match mode {
        ModeLabel::Torus(m) => m
            .iter()
            .zip(ax)
            .map(|(&mk, axis)| axis.points.iter().map(|&p| phase(mk as f64, p)).collect())
            .collect(),
        ModeLabel::Sphere2 { l, m } => {
            let am = m.unsigned_abs();
            let sign = if *m < 0 && am % 2 == 1 { -1.0 } else { 1.0 };
            let polar = ax[0]
                .points
                .iter()
                .map(|&t| Complex64::new(sign * normalized_legendre(*l, am, t), 0.0))
                .collect();
            let azimuth = ax[1].points.iter().map(|&p| phase(*m as f64, p)).collect();
            vec![polar, azimuth]
        }
        ModeLabel::Sphere3 { dj, dm, dmp } => {
            let scale = ((dj + 1) as f64).sqrt();
            let alpha = ax[0].points.iter().map(|&p| phase(*dm as f64 / 2.0, p)).collect();
            let beta = ax[1]
                .points
                .iter()
                .map(|&b| Complex64::new(scale * wigner_small_d(*dj, *dm, *dmp, b), 0.0))
                .collect();
            let gamma = ax[2].points.iter().map(|&p| phase(*dmp as f64 / 2.0, p)).collect();
            vec![alpha, beta, gamma]
        }
    }
}

/// Values of `ρ_I` at every grid node, row-major.
pub fn evaluate(grid: &QuadratureGrid, mode: &ModeLabel) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(1.0, 0.0)];
    for factor in axis_factors(grid, mode) {
        out = out.iter().flat_map(|v| factor.iter().map(move |f| v * f)).collect();
    }
    out
}
