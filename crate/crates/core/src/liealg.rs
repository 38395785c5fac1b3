//! Finite-dimensional base algebras `[T_a, T_b] = i f_ab^c T_c`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{GkmError, Result};
use crate::report::{CheckResult, Regime, Witness};
use crate::scalar::{rational, ComplexSurd, Rational, SurdScalar};

/// Coordinates of an element in the `T_a` basis.
pub type Coords = Vec<ComplexSurd>;

/// Sparse structure tensor: `(a, b) → {c → f_ab^c}`, zero-based indices.
pub type StructureTensor = BTreeMap<(usize, usize), BTreeMap<usize, SurdScalar>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BaseKind {
    Su2,
    Su3,
    U1 { n: usize },
}

impl BaseKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "su2" | "su(2)" => Ok(Self::Su2),
            "su3" | "su(3)" => Ok(Self::Su3),
            "u1" => Ok(Self::U1 { n: 1 }),
            other => {
                let n = other
                    .strip_prefix("u1^")
                    .and_then(|n| n.parse::<usize>().ok())
                    .filter(|&n| n >= 1)
                    .ok_or_else(|| GkmError::UnknownAlgebra(name.to_string()))?;
                Ok(Self::U1 { n })
            }
        }
    }

    pub fn is_abelian(&self) -> bool {
        matches!(self, Self::U1 { .. })
    }
}

impl fmt::Display for BaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Su2 => f.write_str("su2"),
            Self::Su3 => f.write_str("su3"),
            Self::U1 { n } => write!(f, "u1^{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteAlgebra {
    pub kind: BaseKind,
    pub dim: usize,
    f: StructureTensor,
    g: Vec<Vec<SurdScalar>>,
}

fn su2_constants() -> Vec<(usize, usize, usize, SurdScalar)> {
    vec![(1, 2, 3, SurdScalar::one())]
}

/// Gell-Mann constants for `T_a = λ_a / 2`, one entry per totally
/// antisymmetric orbit, one-based.
fn su3_constants() -> Vec<(usize, usize, usize, SurdScalar)> {
    let half = SurdScalar::from_rational(rational(1, 2));
    let neg_half = -&half;
    let root3_half = SurdScalar::normalize(3u32, rational(1, 2));
    vec![
        (1, 2, 3, SurdScalar::one()),
        (1, 4, 7, half.clone()),
        (1, 5, 6, neg_half.clone()),
        (2, 4, 6, half.clone()),
        (2, 5, 7, half.clone()),
        (3, 4, 5, half.clone()),
        (3, 6, 7, neg_half),
        (4, 5, 8, root3_half.clone()),
        (6, 7, 8, root3_half),
    ]
}

/// Expands totally antisymmetric one-based entries into the sparse tensor.
fn antisymmetrize(entries: &[(usize, usize, usize, SurdScalar)]) -> StructureTensor {
    let mut f = StructureTensor::new();
    for (a, b, c, v) in entries {
        let (a, b, c) = (a - 1, b - 1, c - 1);
        let neg = -v;
        for (x, y, z, val) in [
            (a, b, c, v),
            (b, c, a, v),
            (c, a, b, v),
            (b, a, c, &neg),
            (a, c, b, &neg),
            (c, b, a, &neg),
        ] {
            f.entry((x, y)).or_default().insert(z, val.clone());
        }
    }
    f
}

/// `g_ab = Tr(ad T_a · ad T_b)` with `(ad T_a)_b^c = i f_ab^c`, i.e.
/// `g_ab = −Σ_{c,d} f_ac^d f_bd^c`.
pub fn killing_form(f: &StructureTensor, dim: usize) -> Vec<Vec<SurdScalar>> {
    let get = |a: usize, b: usize, c: usize| f.get(&(a, b)).and_then(|m| m.get(&c));
    let mut g = vec![vec![SurdScalar::zero(); dim]; dim];
    for a in 0..dim {
        for b in 0..dim {
            let mut acc = SurdScalar::zero();
            for c in 0..dim {
                let Some(row) = f.get(&(a, c)) else { continue };
                for (d, fac) in row {
                    if let Some(fbd) = get(b, *d, c) {
                        acc -= &(fac * fbd);
                    }
                }
            }
            g[a][b] = acc;
        }
    }
    g
}

/// `Σ_cyclic f_ab^d f_dc^e = 0` for every `(a, b, c, e)`.
pub fn jacobi_check_finite(f: &StructureTensor, dim: usize) -> CheckResult {
    let mut tuples = Vec::with_capacity(dim * dim * dim);
    for a in 0..dim {
        for b in 0..dim {
            for c in 0..dim {
                tuples.push((a, b, c));
            }
        }
    }
    let get_row = |a: usize, b: usize| f.get(&(a, b));
    CheckResult::run("finite_jacobi", Regime::Exhaustive, None, &tuples, |&(a, b, c)| {
        let mut out: BTreeMap<usize, SurdScalar> = BTreeMap::new();
        for (x, y, z) in [(a, b, c), (b, c, a), (c, a, b)] {
            let Some(row) = get_row(x, y) else { continue };
            for (d, fxy) in row {
                if let Some(row2) = get_row(*d, z) {
                    for (e, fdz) in row2 {
                        *out.entry(*e).or_default() += &(fxy * fdz);
                    }
                }
            }
        }
        out.into_iter().find(|(_, v)| !v.is_zero()).map(|(e, v)| {
            Witness::new(
                vec![format!("a={}", a + 1), format!("b={}", b + 1), format!("c={}", c + 1), format!("e={}", e + 1)],
                v,
                "cyclic sum of f_ab^d f_dc^e is nonzero",
            )
        })
    })
}

impl FiniteAlgebra {
    /// Validated construction: antisymmetry and Jacobi must hold; the
    /// metric is computed from `f`.
    pub fn new(kind: BaseKind, dim: usize, f: StructureTensor) -> Result<Self> {
        let g = killing_form(&f, dim);
        let alg = Self { kind, dim, f, g };
        let anti = alg.antisymmetry_check();
        if let Some(w) = anti.witness {
            return Err(GkmError::Construction(format!("f not antisymmetric at {:?}", w.generators)));
        }
        let jac = jacobi_check_finite(&alg.f, dim);
        if let Some(w) = jac.witness {
            return Err(GkmError::Construction(format!("Jacobi fails at {:?}: {}", w.generators, w.value)));
        }
        Ok(alg)
    }

    /// Assembles an algebra from persisted data without validation; the
    /// verification suites report any inconsistency.
    pub fn from_parts(kind: BaseKind, dim: usize, f: StructureTensor, g: Vec<Vec<SurdScalar>>) -> Self {
        Self { kind, dim, f, g }
    }

    pub fn make(name: &str) -> Result<Self> {
        Self::from_kind(BaseKind::parse(name)?)
    }

    pub fn from_kind(kind: BaseKind) -> Result<Self> {
        match kind {
            BaseKind::Su2 => Self::new(kind, 3, antisymmetrize(&su2_constants())),
            BaseKind::Su3 => Self::new(kind, 8, antisymmetrize(&su3_constants())),
            BaseKind::U1 { n } => Self::new(kind, n, StructureTensor::new()),
        }
    }

    pub fn name(&self) -> String {
        self.kind.to_string()
    }

    pub fn structure_tensor(&self) -> &StructureTensor {
        &self.f
    }

    /// `f_ab^c`, zero-based.
    pub fn f(&self, a: usize, b: usize, c: usize) -> SurdScalar {
        self.f
            .get(&(a, b))
            .and_then(|m| m.get(&c))
            .cloned()
            .unwrap_or_default()
    }

    pub fn f_row(&self, a: usize, b: usize) -> Option<&BTreeMap<usize, SurdScalar>> {
        self.f.get(&(a, b))
    }

    pub fn metric(&self) -> &[Vec<SurdScalar>] {
        &self.g
    }

    pub fn g(&self, a: usize, b: usize) -> &SurdScalar {
        &self.g[a][b]
    }

    pub fn antisymmetry_check(&self) -> CheckResult {
        let keys: Vec<_> = self.f.keys().copied().collect();
        CheckResult::run("finite_antisymmetry", Regime::Exhaustive, None, &keys, |&(a, b)| {
            for c in 0..self.dim {
                let s = &self.f(a, b, c) + &self.f(b, a, c);
                if !s.is_zero() {
                    return Some(Witness::new(
                        vec![format!("a={}", a + 1), format!("b={}", b + 1), format!("c={}", c + 1)],
                        s,
                        "f_ab^c + f_ba^c is nonzero",
                    ));
                }
            }
            None
        })
    }

    pub fn jacobi_check(&self) -> CheckResult {
        jacobi_check_finite(&self.f, self.dim)
    }

    /// Stored metric equals the trace form recomputed from `f`.
    pub fn killing_consistency_check(&self) -> CheckResult {
        let recomputed = killing_form(&self.f, self.dim);
        let pairs: Vec<_> = (0..self.dim)
            .flat_map(|a| (0..self.dim).map(move |b| (a, b)))
            .collect();
        CheckResult::run("finite_killing_form", Regime::Exhaustive, None, &pairs, |&(a, b)| {
            let d = &self.g[a][b] - &recomputed[a][b];
            (!d.is_zero()).then(|| {
                Witness::new(
                    vec![format!("a={}", a + 1), format!("b={}", b + 1)],
                    d,
                    "stored g_ab differs from Tr(ad T_a ad T_b)",
                )
            })
        })
    }

    /// `[x, y] = Σ x^a y^b i f_ab^c T_c`.
    pub fn bracket(&self, x: &[ComplexSurd], y: &[ComplexSurd]) -> Coords {
        let mut out = vec![ComplexSurd::zero(); self.dim];
        for (a, xa) in x.iter().enumerate() {
            if xa.is_zero() {
                continue;
            }
            for (b, yb) in y.iter().enumerate() {
                if yb.is_zero() {
                    continue;
                }
                let Some(row) = self.f.get(&(a, b)) else { continue };
                let coeff = (xa * yb).times_i();
                for (c, fab) in row {
                    out[*c] += &coeff.scale_real(fab);
                }
            }
        }
        out
    }

    /// Bilinear `⟨x, y⟩₀ = Σ x^a y^b g_ab`.
    pub fn killing(&self, x: &[ComplexSurd], y: &[ComplexSurd]) -> ComplexSurd {
        let mut acc = ComplexSurd::zero();
        for (a, xa) in x.iter().enumerate() {
            if xa.is_zero() {
                continue;
            }
            for (b, yb) in y.iter().enumerate() {
                if yb.is_zero() || self.g[a][b].is_zero() {
                    continue;
                }
                acc += &(xa * yb).scale_real(&self.g[a][b]);
            }
        }
        acc
    }

    pub fn basis_vector(&self, a: usize) -> Coords {
        let mut v = vec![ComplexSurd::zero(); self.dim];
        v[a] = ComplexSurd::one();
        v
    }

    fn commutes(&self, a: usize, b: usize) -> bool {
        self.f.get(&(a, b)).is_none_or(|row| row.values().all(|v| v.is_zero()))
    }

    fn is_semisimple(&self) -> bool {
        !self.kind.is_abelian() && self.g.iter().all(|row| row.iter().any(|v| !v.is_zero()))
    }
}

/// A root as a rational vector over the Cartan elements.
pub type Root = Vec<Rational>;

#[derive(Debug, Clone, PartialEq)]
pub struct CartanWeylData {
    /// Basis indices spanning the Cartan subalgebra.
    pub cartan_indices: Vec<usize>,
    /// `H^i` in the `T_a` basis (rescaled basis elements).
    pub cartan: Vec<Coords>,
    pub roots: Vec<Root>,
    pub root_vectors: BTreeMap<Root, Coords>,
}

impl CartanWeylData {
    pub fn rank(&self) -> usize {
        self.cartan.len()
    }

    pub fn zero_root(&self) -> Root {
        vec![Rational::zero(); self.rank()]
    }

    pub fn is_root(&self, alpha: &Root) -> bool {
        self.root_vectors.contains_key(alpha)
    }

    /// Support of `v` lies in the Cartan subalgebra.
    pub fn in_cartan_span(&self, v: &[ComplexSurd]) -> bool {
        v.iter()
            .enumerate()
            .all(|(a, x)| x.is_zero() || self.cartan_indices.contains(&a))
    }
}

fn format_root(r: &Root) -> String {
    let parts: Vec<String> = r.iter().map(crate::scalar::format_rational).collect();
    format!("({})", parts.join(","))
}

/// Cartan-Weyl basis for a basis-aligned compact algebra.
///
/// Searches the maximal pairwise-commuting subsets of basis elements for
/// one whose adjoint action pairs every remaining basis element with a
/// single partner, `[H, T_p] = i λ T_q`, `[H, T_q] = −i λ T_p`. Then
/// `T_p ± i T_q` are root vectors with eigenvalues `±λ`. Each `H^i` is
/// rescaled by `1/√d` so that roots are rational, and root vectors are
/// normalised by `⟨E_α, E_{−α}⟩₀ = 1`.
pub fn cartan_weyl(alg: &FiniteAlgebra) -> Result<CartanWeylData> {
    if !alg.is_semisimple() {
        return Err(GkmError::NotSemisimple(alg.name()));
    }
    let dim = alg.dim;
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    for mask in 1u32..(1u32 << dim) {
        let s: Vec<usize> = (0..dim).filter(|i| mask & (1 << i) != 0).collect();
        let commuting = s.iter().all(|&a| s.iter().all(|&b| alg.commutes(a, b)));
        if !commuting {
            continue;
        }
        let maximal = (0..dim)
            .filter(|i| !s.contains(i))
            .all(|i| s.iter().any(|&a| !alg.commutes(a, i)));
        if maximal {
            subsets.push(s);
        }
    }
    subsets.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| b.cmp(a)));
    for cartan in subsets {
        if let Some(data) = try_pairing(alg, &cartan) {
            return Ok(data);
        }
    }
    Err(GkmError::Construction(format!(
        "no basis-aligned Cartan subalgebra found for {}",
        alg.name()
    )))
}

fn try_pairing(alg: &FiniteAlgebra, cartan: &[usize]) -> Option<CartanWeylData> {
    let dim = alg.dim;
    let rest: Vec<usize> = (0..dim).filter(|i| !cartan.contains(i)).collect();
    let mut partner: BTreeMap<usize, usize> = BTreeMap::new();
    for &p in &rest {
        let mut q_found: Option<usize> = None;
        for &h in cartan {
            let Some(row) = alg.f_row(h, p) else { continue };
            let support: Vec<usize> = row.iter().filter(|(_, v)| !v.is_zero()).map(|(c, _)| *c).collect();
            match support.as_slice() {
                [] => {}
                [q] if !cartan.contains(q) => match q_found {
                    None => q_found = Some(*q),
                    Some(prev) if prev == *q => {}
                    Some(_) => return None,
                },
                _ => return None,
            }
        }
        partner.insert(p, q_found?);
    }
    if partner.iter().any(|(p, q)| partner.get(q) != Some(p) || p == q) {
        return None;
    }

    // Raw eigenvalues λ_i(p) = f_{h_i p}^q for each pair p < q.
    let pairs: Vec<(usize, usize)> = partner.iter().filter(|(p, q)| p < q).map(|(p, q)| (*p, *q)).collect();
    let mut scales = Vec::with_capacity(cartan.len());
    for &h in cartan {
        let first = pairs.iter().map(|&(p, q)| alg.f(h, p, q)).find(|v| !v.is_zero())?;
        if first.num_terms() != 1 {
            return None;
        }
        let (d, _) = first.terms().next()?;
        let root_d = SurdScalar::normalize(d.clone(), Rational::one());
        scales.push(root_d.inverse()?);
    }
    let cartan_vecs: Vec<Coords> = cartan
        .iter()
        .zip(&scales)
        .map(|(&h, s)| {
            let mut v = vec![ComplexSurd::zero(); dim];
            v[h] = ComplexSurd::real(s.clone());
            v
        })
        .collect();

    let mut roots = Vec::new();
    let mut root_vectors = BTreeMap::new();
    for &(p, q) in &pairs {
        let mut alpha: Root = Vec::with_capacity(cartan.len());
        for (&h, s) in cartan.iter().zip(&scales) {
            alpha.push((&alg.f(h, p, q) * s).as_rational()?);
        }
        let norm_sq = (alg.g(p, p) + alg.g(q, q)).as_rational()?;
        if norm_sq <= Rational::zero() {
            return None;
        }
        let inv_norm = SurdScalar::sqrt_rational(&norm_sq).ok()?.inverse()?;
        for sign in [1i64, -1] {
            let mut e = vec![ComplexSurd::zero(); dim];
            e[p] = ComplexSurd::real(inv_norm.clone());
            e[q] = ComplexSurd::imag(inv_norm.scale(&rational(sign, 1)));
            let a: Root = alpha.iter().map(|x| x * rational(sign, 1)).collect();
            roots.push(a.clone());
            root_vectors.insert(a, e);
        }
    }
    roots.sort();
    let data = CartanWeylData { cartan_indices: cartan.to_vec(), cartan: cartan_vecs, roots, root_vectors };
    if data.roots.len() + data.rank() != dim || !cartan_weyl_invariants_hold(alg, &data) {
        return None;
    }
    Some(data)
}

/// `[H^i, E_α] = α(i) E_α`, `Σ = −Σ`, `[E_α, E_{−α}] ∈ 𝔥`, and
/// `⟨E_α, E_{−α}⟩₀ = 1`.
pub fn cartan_weyl_invariants_hold(alg: &FiniteAlgebra, cw: &CartanWeylData) -> bool {
    for (alpha, e) in &cw.root_vectors {
        for (i, h) in cw.cartan.iter().enumerate() {
            let lhs = alg.bracket(h, e);
            let scale = alpha[i].clone();
            if lhs.iter().zip(e).any(|(l, x)| !(l - &x.scale_rational(&scale)).is_zero()) {
                return false;
            }
        }
        let neg: Root = alpha.iter().map(|x| -x).collect();
        let Some(f) = cw.root_vectors.get(&neg) else { return false };
        if !cw.in_cartan_span(&alg.bracket(e, f)) {
            return false;
        }
        if alg.killing(e, f) != ComplexSurd::one() {
            return false;
        }
    }
    true
}

pub fn root_to_string(r: &Root) -> String {
    format_root(r)
}
