//! Floating-point quadrature oracle. Basis functions are sampled from
//! independent recurrences and integrated on grids that are exact for
//! band-limited integrands, so every exact table entry can be recomputed
//! directly from its defining integral.

pub mod basis;
pub mod grid;

use std::sync::Arc;

use dashmap::DashMap;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

pub use basis::{evaluate, jacobi, normalized_legendre, wigner_small_d};
pub use grid::{gauss_legendre, make_grid, Axis, QuadratureGrid};

use crate::error::{GkmError, Result};
use crate::modes::{ModeLabel, ModeSystem};
use crate::report::{CheckResult, OracleSummary, Regime, Witness};
use crate::sampling::CaseSet;
use crate::scalar::{Rational, SurdScalar};

/// Absolute tolerance for exact-versus-quadrature comparisons.
pub const ORACLE_TOLERANCE: f64 = 1e-10;
/// Allowed drift of oracle values when the grid resolution is doubled.
pub const DOUBLING_TOLERANCE: f64 = 1e-12;

fn pairwise_sum(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// A grid together with memoised basis-function samples.
pub struct Oracle {
    grid: QuadratureGrid,
    samples: DashMap<ModeLabel, Arc<Vec<Complex64>>>,
}

impl Oracle {
    pub fn new(grid: QuadratureGrid) -> Self {
        Self { grid, samples: DashMap::new() }
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    fn require(&self, need: u32) -> Result<()> {
        if need > self.grid.capacity() {
            return Err(GkmError::BandLimit { have: self.grid.capacity() as usize, need: need as usize });
        }
        Ok(())
    }

    pub fn values(&self, mode: &ModeLabel) -> Result<Arc<Vec<Complex64>>> {
        mode.validate(&self.grid.manifold)?;
        if let Some(v) = self.samples.get(mode) {
            return Ok(v.clone());
        }
        let v = Arc::new(evaluate(&self.grid, mode));
        self.samples.insert(mode.clone(), v.clone());
        Ok(v)
    }

    fn integrate<F: Fn(usize) -> Complex64>(&self, f: F) -> Complex64 {
        let terms: Vec<Complex64> = self.grid.weights().iter().enumerate().map(|(k, w)| f(k) * w).collect();
        pairwise_sum(&terms)
    }

    /// `∫ ρ_I ρ_J ρ̄_K dμ`, the coefficient of `ρ_K` in `ρ_I ρ_J`.
    pub fn product_coefficient(&self, i: &ModeLabel, j: &ModeLabel, k: &ModeLabel) -> Result<Complex64> {
        self.require(i.degree() + j.degree() + k.degree())?;
        let (a, b, c) = (self.values(i)?, self.values(j)?, self.values(k)?);
        Ok(self.integrate(|n| a[n] * b[n] * c[n].conj()))
    }

    /// `⟨ρ_I, ρ_J⟩ = ∫ ρ̄_I ρ_J dμ`.
    pub fn inner(&self, i: &ModeLabel, j: &ModeLabel) -> Result<Complex64> {
        self.require(i.degree() + j.degree())?;
        let (a, b) = (self.values(i)?, self.values(j)?);
        Ok(self.integrate(|n| a[n].conj() * b[n]))
    }

    /// `∫ ρ_I ρ_J dμ`, which reconstructs `η_IJ`.
    pub fn bilinear(&self, i: &ModeLabel, j: &ModeLabel) -> Result<Complex64> {
        self.require(i.degree() + j.degree())?;
        let (a, b) = (self.values(i)?, self.values(j)?);
        Ok(self.integrate(|n| a[n] * b[n]))
    }

    /// `∫ |ρ_I ρ_J|² dμ`, equal to the sum of squared product coefficients.
    pub fn product_norm(&self, i: &ModeLabel, j: &ModeLabel) -> Result<f64> {
        self.require(2 * (i.degree() + j.degree()))?;
        let (a, b) = (self.values(i)?, self.values(j)?);
        Ok(self.integrate(|n| Complex64::new((a[n] * b[n]).norm_sqr(), 0.0)).re)
    }

    fn operator_axis(&self, op: usize) -> Result<usize> {
        use crate::modes::Manifold;
        let axis = match (&self.grid.manifold, op) {
            (Manifold::Torus { n }, j) if j < *n => j,
            (Manifold::Sphere2, 0) => 1,
            (Manifold::Sphere3 { .. }, 0) => 0,
            (Manifold::Sphere3 { .. }, 1) => 2,
            _ => return Err(GkmError::InvalidInput(format!("no operator D{} on {}", op + 1, self.grid.manifold))),
        };
        Ok(axis)
    }

    /// `D_j ρ_I` as `−i ∂` along the periodic coordinate of operator `op`
    /// (zero-based), by FFT differentiation.
    pub fn apply_operator(&self, op: usize, mode: &ModeLabel) -> Result<Vec<Complex64>> {
        self.require(2 * mode.degree())?;
        let axis = self.operator_axis(op)?;
        let values = self.values(mode)?;
        let dims: Vec<usize> = self.grid.axes.iter().map(|a| a.len()).collect();
        let len = dims[axis];
        let stride: usize = dims[axis + 1..].iter().product();
        let period = self.grid.axes[axis].period.expect("operator axis is periodic");
        let mut planner = FftPlanner::<f64>::new();
        let (fwd, inv) = (planner.plan_fft_forward(len), planner.plan_fft_inverse(len));
        let mut out = vec![Complex64::new(0.0, 0.0); values.len()];
        let mut line = vec![Complex64::new(0.0, 0.0); len];
        for base in 0..values.len() {
            if (base / stride) % len != 0 {
                continue;
            }
            for (t, slot) in line.iter_mut().enumerate() {
                *slot = values[base + t * stride];
            }
            fwd.process(&mut line);
            for (q, slot) in line.iter_mut().enumerate() {
                let k = if q <= len / 2 { q as f64 } else { q as f64 - len as f64 };
                *slot *= k * 2.0 * std::f64::consts::PI / period / len as f64;
            }
            inv.process(&mut line);
            for (t, v) in line.iter().enumerate() {
                out[base + t * stride] = *v;
            }
        }
        Ok(out)
    }

    /// Rayleigh quotient `⟨ρ_I, D_j ρ_I⟩ / ⟨ρ_I, ρ_I⟩`.
    pub fn eigenvalue(&self, op: usize, mode: &ModeLabel) -> Result<f64> {
        let d = self.apply_operator(op, mode)?;
        let v = self.values(mode)?;
        let num = self.integrate(|n| v[n].conj() * d[n]);
        let den = self.integrate(|n| Complex64::new(v[n].norm_sqr(), 0.0));
        Ok(num.re / den.re)
    }

    /// `∫ ρ_I (D_j ρ_J) dμ`, the mode-level cocycle pairing.
    pub fn cocycle(&self, op: usize, i: &ModeLabel, j: &ModeLabel) -> Result<Complex64> {
        self.require(i.degree() + j.degree())?;
        let d = self.apply_operator(op, j)?;
        let a = self.values(i)?;
        Ok(self.integrate(|n| a[n] * d[n]))
    }
}

pub fn numeric_product_coefficient(
    grid: &QuadratureGrid,
    i: &ModeLabel,
    j: &ModeLabel,
    k: &ModeLabel,
) -> Result<Complex64> {
    Oracle::new(grid.clone()).product_coefficient(i, j, k)
}

pub fn numeric_orthonormality(grid: &QuadratureGrid, i: &ModeLabel, j: &ModeLabel) -> Result<Complex64> {
    Oracle::new(grid.clone()).inner(i, j)
}

/// Eigenvalue of the zero-based operator `op` on `ρ_I`.
pub fn numeric_eigencheck(grid: &QuadratureGrid, op: usize, i: &ModeLabel) -> Result<f64> {
    Oracle::new(grid.clone()).eigenvalue(op, i)
}

/// Band that resolves every product and norm appearing in the checks of a
/// mode system truncated at `cutoff`.
pub fn band_for_cutoff(cutoff: u32) -> u32 {
    (2 * cutoff).max(1)
}

fn rational_f64(q: &Rational) -> f64 {
    SurdScalar::from_rational(q.clone()).to_f64()
}

struct Comparison {
    labels: Vec<String>,
    exact: f64,
    numeric: Complex64,
}

impl Comparison {
    fn new(labels: Vec<String>, exact: f64, numeric: Complex64) -> Self {
        Self { labels, exact, numeric }
    }

    fn delta(&self) -> f64 {
        (self.numeric - Complex64::new(self.exact, 0.0)).norm()
    }
}

/// Running tally of oracle comparisons across checks.
#[derive(Debug, Clone)]
pub struct OracleTally {
    pub compared: usize,
    pub max_abs_delta: f64,
}

impl Default for OracleTally {
    fn default() -> Self {
        Self { compared: 0, max_abs_delta: 0.0 }
    }
}

impl OracleTally {
    pub fn summary(&self) -> OracleSummary {
        OracleSummary { compared: self.compared, max_abs_delta: self.max_abs_delta, tolerance: ORACLE_TOLERANCE }
    }
}

fn compare_run<T, F>(
    name: &str,
    cases: &CaseSet<T>,
    tolerance: f64,
    tally: &mut OracleTally,
    case: F,
) -> CheckResult
where
    T: Sync,
    F: Fn(&T) -> Result<Vec<Comparison>> + Sync + Send,
{
    let start = std::time::Instant::now();
    let results: Vec<Result<Vec<Comparison>>> = cases.items.par_iter().map(case).collect();
    let mut witness = None;
    for r in results {
        match r {
            Ok(list) => {
                for c in list {
                    let d = c.delta();
                    tally.compared += 1;
                    tally.max_abs_delta = tally.max_abs_delta.max(d);
                    if witness.is_none() && !(d <= tolerance) {
                        witness = Some(Witness::new(
                            c.labels,
                            format!("{:.3e}", d),
                            format!("exact {} vs quadrature {}", c.exact, c.numeric),
                        ));
                    }
                }
            }
            Err(e) => {
                if witness.is_none() {
                    witness = Some(Witness::new(vec![], "error", e.to_string()));
                }
            }
        }
    }
    CheckResult {
        name: name.to_string(),
        regime: cases.regime,
        seed: cases.seed,
        passed: witness.is_none(),
        checked: cases.len(),
        witness,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

/// Compares every exact table of `modes` (products, conjugation, eigenvalues
/// and cocycle pairings) with the quadrature oracle.
pub fn oracle_checks(modes: &ModeSystem, budget: usize, seed: u64, tally: &mut OracleTally) -> Vec<CheckResult> {
    let band = band_for_cutoff(modes.cutoff());
    let oracle = Oracle::new(make_grid(modes.manifold(), band));
    let list = modes.modes();
    let n = list.len();
    let pairs = CaseSet::pairs(n, budget, seed);
    let singles = CaseSet { items: (0..n).collect::<Vec<_>>(), regime: Regime::Exhaustive, seed: None };
    let mut out = Vec::new();

    out.push(compare_run("oracle_orthonormality", &pairs, ORACLE_TOLERANCE, tally, |&(a, b)| {
        let (i, j) = (&list[a], &list[b]);
        let want = if a == b { 1.0 } else { 0.0 };
        Ok(vec![Comparison::new(vec![i.to_string(), j.to_string()], want, oracle.inner(i, j)?)])
    }));

    out.push(compare_run("oracle_products", &pairs, ORACLE_TOLERANCE, tally, |&(a, b)| {
        let (i, j) = (&list[a], &list[b]);
        let expansion = modes.product(i, j);
        let mut cmp = Vec::new();
        let mut total = 0.0;
        for (k, c) in expansion.iter() {
            let exact = c.to_f64();
            total += exact * exact;
            let labels = vec![i.to_string(), j.to_string(), k.to_string()];
            cmp.push(Comparison::new(labels, exact, oracle.product_coefficient(i, j, k)?));
        }
        let labels = vec![i.to_string(), j.to_string(), "norm".to_string()];
        cmp.push(Comparison::new(labels, total, Complex64::new(oracle.product_norm(i, j)?, 0.0)));
        Ok(cmp)
    }));

    out.push(compare_run("oracle_conjugation", &pairs, ORACLE_TOLERANCE, tally, |&(a, b)| {
        let (i, j) = (&list[a], &list[b]);
        let labels = vec![i.to_string(), j.to_string()];
        Ok(vec![Comparison::new(labels, modes.eta(i, j) as f64, oracle.bilinear(i, j)?)])
    }));

    out.push(compare_run("oracle_eigenvalues", &singles, ORACLE_TOLERANCE, tally, |&a| {
        let i = &list[a];
        (0..modes.rank())
            .map(|op| {
                let exact = rational_f64(&modes.eigenvalue(i, op));
                let labels = vec![format!("D{}", op + 1), i.to_string()];
                Ok(Comparison::new(labels, exact, Complex64::new(oracle.eigenvalue(op, i)?, 0.0)))
            })
            .collect()
    }));

    out.push(compare_run("oracle_cocycle", &pairs, ORACLE_TOLERANCE, tally, |&(a, b)| {
        let (i, j) = (&list[a], &list[b]);
        (0..modes.rank())
            .map(|op| {
                let exact = rational_f64(&modes.cocycle_pairing(op, i, j));
                let labels = vec![format!("D{}", op + 1), i.to_string(), j.to_string()];
                Ok(Comparison::new(labels, exact, oracle.cocycle(op, i, j)?))
            })
            .collect()
    }));

    let fine = Oracle::new(make_grid(modes.manifold(), 2 * band));
    let mut sub = pairs.clone();
    sub.items.truncate(64);
    out.push(compare_run("oracle_grid_doubling", &sub, DOUBLING_TOLERANCE, &mut OracleTally::default(), |&(a, b)| {
        let (i, j) = (&list[a], &list[b]);
        let mut cmp = Vec::new();
        for k in modes.product(i, j).keys() {
            let coarse = oracle.product_coefficient(i, j, k)?;
            let labels = vec![i.to_string(), j.to_string(), k.to_string()];
            let d = fine.product_coefficient(i, j, k)? - coarse;
            cmp.push(Comparison::new(labels, 0.0, d));
        }
        Ok(cmp)
    }));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::Manifold;

    fn s2(l: u32, m: i32) -> ModeLabel {
        ModeLabel::Sphere2 { l, m }
    }

    #[test]
    fn grid_weights_normalised() {
        for manifold in [Manifold::Torus { n: 2 }, Manifold::Sphere2, Manifold::Sphere3 { half_integers: true }] {
            let g = make_grid(&manifold, 3);
            let total: f64 = g.weights().iter().sum();
            assert!((total - 1.0).abs() < 1e-14, "{manifold}");
            assert_eq!(g.nodes().len(), g.len());
        }
        let t1 = make_grid(&Manifold::Torus { n: 1 }, 4);
        assert_eq!(t1.len(), 9);
        assert!(t1.weights().iter().all(|w| (w - 1.0 / 9.0).abs() < 1e-16));
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(5);
        for deg in 0..10 {
            let num: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((num - exact).abs() < 1e-14, "degree {deg}");
        }
    }

    #[test]
    fn sphere_product_coefficients() {
        let g = make_grid(&Manifold::Sphere2, 4);
        let c = numeric_product_coefficient(&g, &s2(1, 0), &s2(1, 0), &s2(2, 0)).unwrap();
        assert!((c.re - 0.894_427_190_999_915_9).abs() < 1e-13);
        let parity = numeric_product_coefficient(&g, &s2(1, 0), &s2(1, 0), &s2(1, 0)).unwrap();
        assert!(parity.norm() < 1e-13);
        let t = make_grid(&Manifold::Torus { n: 1 }, 5);
        let c = numeric_product_coefficient(&t, &ModeLabel::Torus(vec![2]), &ModeLabel::Torus(vec![3]), &ModeLabel::Torus(vec![5]))
            .unwrap();
        assert!((c.re - 1.0).abs() < 1e-13);
    }

    #[test]
    fn band_limit_is_enforced() {
        let g = make_grid(&Manifold::Sphere2, 1);
        let err = numeric_product_coefficient(&g, &s2(1, 0), &s2(1, 0), &s2(2, 0)).unwrap_err();
        assert!(matches!(err, GkmError::BandLimit { have: 2, need: 4 }));
    }

    #[test]
    fn orthonormality_on_sphere() {
        let g = make_grid(&Manifold::Sphere2, 4);
        let modes = crate::modes::enumerate_modes(&Manifold::Sphere2, 4);
        let oracle = Oracle::new(g);
        for i in &modes {
            for j in &modes {
                let v = oracle.inner(i, j).unwrap();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((v - Complex64::new(want, 0.0)).norm() < 1e-12, "{i} {j}");
            }
        }
    }

    #[test]
    fn eigenvalues_by_spectral_differentiation() {
        let t = make_grid(&Manifold::Torus { n: 1 }, 3);
        assert!((numeric_eigencheck(&t, 0, &ModeLabel::Torus(vec![3])).unwrap() - 3.0).abs() < 1e-10);
        let g = make_grid(&Manifold::Sphere2, 2);
        assert!((numeric_eigencheck(&g, 0, &s2(2, -1)).unwrap() + 1.0).abs() < 1e-10);
        let h = make_grid(&Manifold::Sphere3 { half_integers: true }, 2);
        let mode = ModeLabel::Sphere3 { dj: 2, dm: 2, dmp: 0 };
        assert!((numeric_eigencheck(&h, 0, &mode).unwrap() - 1.0).abs() < 1e-10);
        assert!(numeric_eigencheck(&h, 1, &mode).unwrap().abs() < 1e-10);
    }

    #[test]
    fn conjugation_phase_on_sphere() {
        let oracle = Oracle::new(make_grid(&Manifold::Sphere2, 2));
        let v = oracle.bilinear(&s2(2, 1), &s2(2, -1)).unwrap();
        assert!((v.re + 1.0).abs() < 1e-12 && v.im.abs() < 1e-12);
    }

    #[test]
    fn small_d_matches_explicit_sum() {
        fn fact(n: i64) -> f64 {
            (1..=n).map(|k| k as f64).product()
        }
        // Wigner's closed-form sum, doubled labels.
        fn explicit(dj: i64, dr: i64, dc: i64, beta: f64) -> f64 {
            let (jpc, jmc, jpr, jmr) = ((dj + dc) / 2, (dj - dc) / 2, (dj + dr) / 2, (dj - dr) / 2);
            let rmc = (dr - dc) / 2;
            let pre = (fact(jpr) * fact(jmr) * fact(jpc) * fact(jmc)).sqrt();
            let mut total = 0.0;
            for s in 0..=dj {
                if jpc - s < 0 || rmc + s < 0 || jmr - s < 0 {
                    continue;
                }
                let sign = if (rmc + s).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                total += sign * pre / (fact(jpc - s) * fact(s) * fact(rmc + s) * fact(jmr - s))
                    * (beta / 2.0).cos().powi((dj - rmc - 2 * s) as i32)
                    * (beta / 2.0).sin().powi((rmc + 2 * s) as i32);
            }
            total
        }
        for dj in 0..=6i64 {
            for dr in (-dj..=dj).step_by(2) {
                for dc in (-dj..=dj).step_by(2) {
                    for beta in [0.3, 1.1, 2.0, 2.9] {
                        let a = wigner_small_d(dj as u32, dr as i32, dc as i32, beta);
                        let b = explicit(dj, dr, dc, beta);
                        assert!((a - b).abs() < 1e-12, "dj={dj} dr={dr} dc={dc} beta={beta}: {a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn exact_tables_agree_with_quadrature() {
        let cases = [
            (Manifold::Torus { n: 1 }, 3),
            (Manifold::Torus { n: 2 }, 2),
            (Manifold::Sphere2, 3),
            (Manifold::Sphere3 { half_integers: true }, 3),
            (Manifold::Sphere3 { half_integers: false }, 2),
        ];
        for (manifold, cutoff) in cases {
            let modes = ModeSystem::build(manifold, cutoff).unwrap();
            let mut tally = OracleTally::default();
            for check in oracle_checks(&modes, 100_000, 1, &mut tally) {
                assert!(check.passed, "{manifold} {}: {:?}", check.name, check.witness);
            }
            assert!(tally.max_abs_delta <= ORACLE_TOLERANCE);
            assert!(tally.compared > 0);
        }
    }

    #[test]
    fn corrupted_tables_are_caught() {
        let mut modes = ModeSystem::build(Manifold::Sphere2, 2).unwrap();
        let (i, j) = (s2(1, 0), s2(1, 0));
        let mut bad = (*modes.product(&i, &j)).clone();
        bad.insert(s2(2, 0), SurdScalar::from_int(1));
        modes.set_product(i, j, bad);
        modes.set_conjugation(s2(2, 1), s2(2, -1), 1);
        let mut tally = OracleTally::default();
        let failed: Vec<String> = oracle_checks(&modes, 100_000, 1, &mut tally)
            .into_iter()
            .filter(|c| !c.passed)
            .map(|c| c.name)
            .collect();
        assert_eq!(failed, ["oracle_products", "oracle_conjugation", "oracle_cocycle"]);
    }
}
