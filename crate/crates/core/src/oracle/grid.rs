use std::f64::consts::PI;

use crate::modes::Manifold;

/// One tensor factor of a grid: sample points along a coordinate, their
/// weights (summing to 1) and, for periodic coordinates, the period.
#[derive(Debug, Clone)]
pub struct Axis {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub period: Option<f64>,
}

impl Axis {
    fn uniform(n: usize, period: f64) -> Self {
        let points = (0..n).map(|k| period * k as f64 / n as f64).collect();
        Self { points, weights: vec![1.0 / n as f64; n], period: Some(period) }
    }

    /// Polar angle with Gauss-Legendre nodes in its cosine.
    fn polar(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        Self {
            points: x.iter().map(|c| c.acos()).collect(),
            weights: w.iter().map(|w| w / 2.0).collect(),
            period: None,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [-1, 1],
/// nodes in decreasing order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let dp = legendre_with_derivative(n, z).1;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (z * p1 - p0) / (z * z - 1.0))
}

/// Tensor-product quadrature on a manifold with unit total mass.
///
/// A grid of band `B` integrates exactly every product of basis functions
/// whose truncation degrees sum to at most `2B`.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub manifold: Manifold,
    pub band: u32,
    pub axes: Vec<Axis>,
    weights: Vec<f64>,
}

/// Torus: `2B+1` uniform points per circle. Two-sphere: `B+1` Gauss-Legendre
/// nodes in `cos θ` times `2B+1` points in `φ`. SU(2): Euler angles
/// `(α, β, γ)` with `α, γ` uniform on `[0, 4π)` and Gauss-Legendre in `cos β`.
pub fn make_grid(manifold: &Manifold, band: u32) -> QuadratureGrid {
    let b = band.max(1) as usize;
    let axes = match manifold {
        Manifold::Torus { n } => vec![Axis::uniform(2 * b + 1, 2.0 * PI); *n],
        Manifold::Sphere2 => vec![Axis::polar(b + 1), Axis::uniform(2 * b + 1, 2.0 * PI)],
        Manifold::Sphere3 { .. } => vec![
            Axis::uniform(2 * b + 1, 4.0 * PI),
            Axis::polar(b + 1),
            Axis::uniform(2 * b + 1, 4.0 * PI),
        ],
    };
    let mut weights = vec![1.0];
    for axis in &axes {
        weights = weights.iter().flat_map(|w| axis.weights.iter().map(move |v| w * v)).collect();
    }
    QuadratureGrid { manifold: *manifold, band: band.max(1), axes, weights }
}

impl QuadratureGrid {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Weights in row-major node order (first axis slowest).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Coordinate tuples in the same order as [`weights`](Self::weights).
    pub fn nodes(&self) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::new()];
        for axis in &self.axes {
            out = out
                .iter()
                .flat_map(|p| {
                    axis.points.iter().map(move |x| {
                        let mut q = p.clone();
                        q.push(*x);
                        q
                    })
                })
                .collect();
        }
        out
    }

    /// Largest sum of truncation degrees integrated exactly.
    pub fn capacity(&self) -> u32 {
        2 * self.band
    }
}
