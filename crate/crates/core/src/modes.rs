//! Orthonormal function bases on the supported manifolds and their exact
//! multiplication tables.
//!
//! Conventions: `e^{i m·φ}` on tori, `ρ_{lm} = √(4π) Y_{lm}` on the
//! two-sphere and `ρ^j_{mm'} = √(2j+1) D̄^j_{mm'}` on SU(2) ≅ 𝕊³, all with
//! unit-mass measures. Conjugation is then a signed permutation of the
//! basis, and the commuting operators `D_j` act diagonally.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use dashmap::DashMap;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GkmError, Result};
use crate::report::{CheckResult, Regime, Witness};
use crate::sampling::{ordered_pairs, CaseSet};
use crate::scalar::{format_rational, rational, Rational, SurdScalar};
use crate::wigner::{clebsch_gordan, gaunt_normalized, SpinTriple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Manifold {
    Torus { n: usize },
    Sphere2,
    /// SU(2); `half_integers = false` keeps only integer `j`.
    Sphere3 { half_integers: bool },
}

impl Manifold {
    /// Accepts `s1`, `t<n>`, `torus<n>`, `s2`, `s3`, `s3-integer`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "s1" | "circle" => return Ok(Self::Torus { n: 1 }),
            "s2" | "sphere2" => return Ok(Self::Sphere2),
            "s3" | "sphere3" | "su2" => return Ok(Self::Sphere3 { half_integers: true }),
            "s3-integer" | "s3int" | "so4/so3" => return Ok(Self::Sphere3 { half_integers: false }),
            _ => {}
        }
        let n = s
            .strip_prefix("torus")
            .or_else(|| s.strip_prefix('t'))
            .and_then(|n| n.parse::<usize>().ok())
            .filter(|&n| n >= 1);
        match n {
            Some(n) => Ok(Self::Torus { n }),
            None => Err(GkmError::UnsupportedManifold(s)),
        }
    }

    /// Number of commuting Hermitean operators `r`.
    pub fn rank(&self) -> usize {
        match self {
            Self::Torus { n } => *n,
            Self::Sphere2 => 1,
            Self::Sphere3 { .. } => 2,
        }
    }

    pub fn unit_mode(&self) -> ModeLabel {
        match self {
            Self::Torus { n } => ModeLabel::Torus(vec![0; *n]),
            Self::Sphere2 => ModeLabel::Sphere2 { l: 0, m: 0 },
            Self::Sphere3 { .. } => ModeLabel::Sphere3 { dj: 0, dm: 0, dmp: 0 },
        }
    }
}

impl fmt::Display for Manifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Torus { n: 1 } => f.write_str("s1"),
            Self::Torus { n } => write!(f, "t{n}"),
            Self::Sphere2 => f.write_str("s2"),
            Self::Sphere3 { half_integers: true } => f.write_str("s3"),
            Self::Sphere3 { half_integers: false } => f.write_str("s3-integer"),
        }
    }
}

/// Basis-function label. Sphere3 labels are doubled: `dj = 2j`,
/// `dm = 2m`, `dmp = 2m'`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeLabel {
    Torus(Vec<i64>),
    Sphere2 { l: u32, m: i32 },
    Sphere3 { dj: u32, dm: i32, dmp: i32 },
}

fn half(x: i64) -> String {
    if x % 2 == 0 {
        (x / 2).to_string()
    } else {
        format!("{x}/2")
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Torus(m) => {
                let parts: Vec<String> = m.iter().map(|x| x.to_string()).collect();
                write!(f, "({})", parts.join(","))
            }
            Self::Sphere2 { l, m } => write!(f, "(l={l},m={m})"),
            Self::Sphere3 { dj, dm, dmp } => {
                write!(f, "(j={},m={},m'={})", half(*dj as i64), half(*dm as i64), half(*dmp as i64))
            }
        }
    }
}

impl ModeLabel {
    pub fn validate(&self, manifold: &Manifold) -> Result<()> {
        let ok = match (self, manifold) {
            (Self::Torus(m), Manifold::Torus { n }) => m.len() == *n,
            (Self::Sphere2 { l, m }, Manifold::Sphere2) => m.unsigned_abs() <= *l,
            (Self::Sphere3 { dj, dm, dmp }, Manifold::Sphere3 { half_integers }) => {
                dm.unsigned_abs() <= *dj
                    && dmp.unsigned_abs() <= *dj
                    && (*dj as i64 + *dm as i64) % 2 == 0
                    && (*dj as i64 + *dmp as i64) % 2 == 0
                    && (*half_integers || dj % 2 == 0)
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(GkmError::InvalidInput(format!("mode {self} is not valid on {manifold}")))
        }
    }

    /// Truncation degree: `‖m‖_∞`, `l`, or `2j`.
    pub fn degree(&self) -> u32 {
        match self {
            Self::Torus(m) => m.iter().map(|x| x.unsigned_abs() as u32).max().unwrap_or(0),
            Self::Sphere2 { l, .. } => *l,
            Self::Sphere3 { dj, .. } => *dj,
        }
    }
}

/// Sparse expansion `{K → c}` of a product of basis functions.
pub type Expansion = BTreeMap<ModeLabel, SurdScalar>;

/// All basis labels with truncation degree at most `cutoff`, in canonical
/// order.
pub fn enumerate_modes(manifold: &Manifold, cutoff: u32) -> Vec<ModeLabel> {
    let c = cutoff as i64;
    match manifold {
        Manifold::Torus { n } => {
            let mut out = vec![Vec::new()];
            for _ in 0..*n {
                out = out
                    .into_iter()
                    .flat_map(|prefix| {
                        (-c..=c).map(move |x| {
                            let mut v = prefix.clone();
                            v.push(x);
                            v
                        })
                    })
                    .collect();
            }
            out.into_iter().map(ModeLabel::Torus).collect()
        }
        Manifold::Sphere2 => (0..=cutoff)
            .flat_map(|l| (-(l as i32)..=l as i32).map(move |m| ModeLabel::Sphere2 { l, m }))
            .collect(),
        Manifold::Sphere3 { half_integers } => {
            let step = if *half_integers { 1 } else { 2 };
            (0..=cutoff)
                .step_by(step)
                .flat_map(|dj| {
                    let r = dj as i32;
                    (-r..=r).step_by(2).flat_map(move |dm| {
                        (-r..=r).step_by(2).map(move |dmp| ModeLabel::Sphere3 { dj, dm, dmp })
                    })
                })
                .collect()
        }
    }
}

/// Exact expansion of `ρ_I · ρ_J` from the closed-form coupling rules.
pub fn product_formula(i: &ModeLabel, j: &ModeLabel) -> Result<Expansion> {
    let mut out = Expansion::new();
    match (i, j) {
        (ModeLabel::Torus(a), ModeLabel::Torus(b)) if a.len() == b.len() => {
            let k = a.iter().zip(b).map(|(x, y)| x + y).collect();
            out.insert(ModeLabel::Torus(k), SurdScalar::one());
        }
        (ModeLabel::Sphere2 { l: l1, m: m1 }, ModeLabel::Sphere2 { l: l2, m: m2 }) => {
            let m3 = m1 + m2;
            for l3 in l1.abs_diff(*l2)..=l1 + l2 {
                if m3.unsigned_abs() > l3 {
                    continue;
                }
                let c = gaunt_normalized(*l1, *m1, *l2, *m2, l3, m3)?;
                if !c.is_zero() {
                    out.insert(ModeLabel::Sphere2 { l: l3, m: m3 }, c);
                }
            }
        }
        (
            ModeLabel::Sphere3 { dj: j1, dm: m1, dmp: p1 },
            ModeLabel::Sphere3 { dj: j2, dm: m2, dmp: p2 },
        ) => {
            let (m3, p3) = (m1 + m2, p1 + p2);
            for j3 in (j1.abs_diff(*j2)..=j1 + j2).step_by(2) {
                if m3.unsigned_abs() > j3 || p3.unsigned_abs() > j3 {
                    continue;
                }
                let left = clebsch_gordan(&SpinTriple::doubled(*j1, *j2, j3, *m1, *m2, m3)?)?;
                if left.is_zero() {
                    continue;
                }
                let right = clebsch_gordan(&SpinTriple::doubled(*j1, *j2, j3, *p1, *p2, p3)?)?;
                if right.is_zero() {
                    continue;
                }
                let dims = Rational::new(
                    (((j1 + 1) * (j2 + 1)) as i64).into(),
                    ((j3 + 1) as i64).into(),
                );
                let c = &SurdScalar::sqrt_rational(&dims)? * &(&left * &right);
                if !c.is_zero() {
                    out.insert(ModeLabel::Sphere3 { dj: j3, dm: m3, dmp: p3 }, c);
                }
            }
        }
        _ => {
            return Err(GkmError::InvalidInput(format!("cannot multiply modes {i} and {j}")));
        }
    }
    Ok(out)
}

/// `ρ_I = η ρ̄_J`: the partner label `J` and the phase `η_IJ = ±1`.
pub fn conjugation_formula(i: &ModeLabel) -> (ModeLabel, i8) {
    match i {
        ModeLabel::Torus(m) => (ModeLabel::Torus(m.iter().map(|x| -x).collect()), 1),
        ModeLabel::Sphere2 { l, m } => {
            (ModeLabel::Sphere2 { l: *l, m: -m }, if m.rem_euclid(2) == 0 { 1 } else { -1 })
        }
        ModeLabel::Sphere3 { dj, dm, dmp } => {
            let phase = if ((dm - dmp) / 2).rem_euclid(2) == 0 { 1 } else { -1 };
            (ModeLabel::Sphere3 { dj: *dj, dm: -dm, dmp: -dmp }, phase)
        }
    }
}

/// Eigenvalues of the commuting operators `D_1..D_r` on `ρ_I`.
pub fn eigen_formula(i: &ModeLabel) -> Vec<Rational> {
    match i {
        ModeLabel::Torus(m) => m.iter().map(|&x| rational(x, 1)).collect(),
        ModeLabel::Sphere2 { m, .. } => vec![rational(*m as i64, 1)],
        ModeLabel::Sphere3 { dm, dmp, .. } => vec![rational(*dm as i64, 2), rational(*dmp as i64, 2)],
    }
}

/// Truncated basis with its exact tables. Tables are materialised for all
/// labels within the cutoff; lookups outside fall back to the closed forms
/// and are memoised, so products never truncate.
#[derive(Debug)]
pub struct ModeSystem {
    manifold: Manifold,
    cutoff: u32,
    modes: Vec<ModeLabel>,
    products: HashMap<(ModeLabel, ModeLabel), Arc<Expansion>>,
    eta: BTreeMap<ModeLabel, (ModeLabel, i8)>,
    eigen: BTreeMap<ModeLabel, Vec<Rational>>,
    extended: DashMap<(ModeLabel, ModeLabel), Arc<Expansion>>,
}

impl Clone for ModeSystem {
    fn clone(&self) -> Self {
        Self {
            manifold: self.manifold,
            cutoff: self.cutoff,
            modes: self.modes.clone(),
            products: self.products.clone(),
            eta: self.eta.clone(),
            eigen: self.eigen.clone(),
            extended: DashMap::new(),
        }
    }
}

impl ModeSystem {
    /// Builds the tables for all labels within `cutoff`. Pair products are
    /// computed in parallel and merged once.
    pub fn build(manifold: Manifold, cutoff: u32) -> Result<Self> {
        let modes = enumerate_modes(&manifold, cutoff);
        let pairs = ordered_pairs(modes.len());
        let computed: Vec<((ModeLabel, ModeLabel), Arc<Expansion>)> = pairs
            .par_iter()
            .map(|&(a, b)| {
                let (i, j) = (&modes[a], &modes[b]);
                product_formula(i, j).map(|p| ((i.clone(), j.clone()), Arc::new(p)))
            })
            .collect::<Result<_>>()?;
        let products = computed.into_iter().collect();
        let eta = modes.iter().map(|m| (m.clone(), conjugation_formula(m))).collect();
        let eigen = modes.iter().map(|m| (m.clone(), eigen_formula(m))).collect();
        Ok(Self { manifold, cutoff, modes, products, eta, eigen, extended: DashMap::new() })
    }

    /// Reassembles a system from persisted tables. No consistency checks
    /// are made here; the verification suites detect tampering.
    pub fn from_tables(
        manifold: Manifold,
        cutoff: u32,
        products: HashMap<(ModeLabel, ModeLabel), Expansion>,
        eta: BTreeMap<ModeLabel, (ModeLabel, i8)>,
        eigen: BTreeMap<ModeLabel, Vec<Rational>>,
    ) -> Result<Self> {
        let modes = enumerate_modes(&manifold, cutoff);
        for m in eta.keys().chain(eigen.keys()) {
            m.validate(&manifold)?;
        }
        for v in eigen.values() {
            if v.len() != manifold.rank() {
                return Err(GkmError::Parse(format!(
                    "eigenvalue vector of length {} on {manifold} (expected {})",
                    v.len(),
                    manifold.rank()
                )));
            }
        }
        let products = products.into_iter().map(|(k, v)| (k, Arc::new(v))).collect();
        Ok(Self { manifold, cutoff, modes, products, eta, eigen, extended: DashMap::new() })
    }

    pub fn manifold(&self) -> &Manifold {
        &self.manifold
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn rank(&self) -> usize {
        self.manifold.rank()
    }

    pub fn modes(&self) -> &[ModeLabel] {
        &self.modes
    }

    pub fn unit_mode(&self) -> ModeLabel {
        self.manifold.unit_mode()
    }

    /// `c_IJ^K` for all `K`.
    pub fn product(&self, i: &ModeLabel, j: &ModeLabel) -> Arc<Expansion> {
        if let Some(p) = self.products.get(&(i.clone(), j.clone())) {
            return p.clone();
        }
        let key = (i.clone(), j.clone());
        if let Some(p) = self.extended.get(&key) {
            return p.clone();
        }
        let p = Arc::new(product_formula(i, j).unwrap_or_default());
        self.extended.insert(key, p.clone());
        p
    }

    pub fn product_coefficient(&self, i: &ModeLabel, j: &ModeLabel, k: &ModeLabel) -> SurdScalar {
        self.product(i, j).get(k).cloned().unwrap_or_default()
    }

    pub fn conjugation(&self, i: &ModeLabel) -> (ModeLabel, i8) {
        self.eta.get(i).cloned().unwrap_or_else(|| conjugation_formula(i))
    }

    /// `η_IJ`: the phase if `J` is the conjugation partner of `I`, else 0.
    pub fn eta(&self, i: &ModeLabel, j: &ModeLabel) -> i8 {
        let (partner, phase) = self.conjugation(i);
        if &partner == j {
            phase
        } else {
            0
        }
    }

    pub fn eigenvalues(&self, i: &ModeLabel) -> Vec<Rational> {
        self.eigen.get(i).cloned().unwrap_or_else(|| eigen_formula(i))
    }

    /// `I(j)` for a zero-based operator index.
    pub fn eigenvalue(&self, i: &ModeLabel, op: usize) -> Rational {
        self.eigenvalues(i).swap_remove(op)
    }

    /// Mode-level cocycle factor `J(j)·η_IJ` for a zero-based operator index.
    pub fn cocycle_pairing(&self, op: usize, i: &ModeLabel, j: &ModeLabel) -> Rational {
        let eta = self.eta(i, j);
        if eta == 0 {
            return Rational::zero();
        }
        self.eigenvalue(j, op) * rational(eta as i64, 1)
    }

    /// Materialised product table entries, in label order.
    pub fn product_table(&self) -> Vec<(&(ModeLabel, ModeLabel), &Expansion)> {
        let mut v: Vec<_> = self.products.iter().map(|(k, v)| (k, v.as_ref())).collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }

    pub fn eta_table(&self) -> &BTreeMap<ModeLabel, (ModeLabel, i8)> {
        &self.eta
    }

    pub fn eigen_table(&self) -> &BTreeMap<ModeLabel, Vec<Rational>> {
        &self.eigen
    }

    /// Replaces one stored product (fault injection and dump loading).
    pub fn set_product(&mut self, i: ModeLabel, j: ModeLabel, value: Expansion) {
        self.extended.clear();
        self.products.insert((i, j), Arc::new(value));
    }

    pub fn set_conjugation(&mut self, i: ModeLabel, partner: ModeLabel, phase: i8) {
        self.eta.insert(i, (partner, phase));
    }

    pub fn set_eigenvalues(&mut self, i: ModeLabel, values: Vec<Rational>) {
        self.eigen.insert(i, values);
    }

    /// Modes within the cutoff with the given eigenvalue vector.
    pub fn modes_with_eigenvalues(&self, n: &[Rational]) -> Vec<ModeLabel> {
        self.modes
            .iter()
            .filter(|m| self.eigenvalues(m).as_slice() == n)
            .cloned()
            .collect()
    }

    fn mode_pairs(&self, budget: usize, seed: u64) -> CaseSet<(usize, usize)> {
        CaseSet::pairs(self.modes.len(), budget, seed)
    }

    pub fn commutativity_check(&self, budget: usize, seed: u64) -> CheckResult {
        let cases = self.mode_pairs(budget, seed);
        cases.run("product_commutativity", |&(a, b)| {
            let (i, j) = (&self.modes[a], &self.modes[b]);
            let (ij, ji) = (self.product(i, j), self.product(j, i));
            (ij != ji).then(|| {
                let k = first_difference(&ij, &ji);
                Witness::new(
                    vec![i.to_string(), j.to_string(), k.to_string()],
                    &self.product_coefficient(i, j, &k) - &self.product_coefficient(j, i, &k),
                    "c_IJ^K − c_JI^K is nonzero",
                )
            })
        })
    }

    /// `Σ_L c_IJ^L c_LK^M = Σ_L c_JK^L c_LI^M` for every `M`.
    pub fn associativity_check(&self, budget: usize, seed: u64) -> CheckResult {
        let cases = CaseSet::triples(self.modes.len(), budget, seed);
        cases.run("product_associativity", |&(a, b, c)| {
            let (i, j, k) = (&self.modes[a], &self.modes[b], &self.modes[c]);
            let left = self.compose(i, j, k);
            let right = self.compose(j, k, i);
            (left != right).then(|| {
                let m = first_difference(&left, &right);
                let diff = &left.get(&m).cloned().unwrap_or_default() - &right.get(&m).cloned().unwrap_or_default();
                Witness::new(
                    vec![i.to_string(), j.to_string(), k.to_string(), m.to_string()],
                    diff,
                    "(ρ_I ρ_J) ρ_K and (ρ_J ρ_K) ρ_I differ at this mode",
                )
            })
        })
    }

    /// `Σ_L c_IJ^L c_LK^M` as an expansion in `M`.
    fn compose(&self, i: &ModeLabel, j: &ModeLabel, k: &ModeLabel) -> Expansion {
        let mut out = Expansion::new();
        for (l, c1) in self.product(i, j).iter() {
            for (m, c2) in self.product(l, k).iter() {
                *out.entry(m.clone()).or_default() += &(c1 * c2);
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    pub fn unit_check(&self) -> CheckResult {
        let unit = self.unit_mode();
        let idx: Vec<usize> = (0..self.modes.len()).collect();
        CheckResult::run("product_unit", Regime::Exhaustive, None, &idx, |&a| {
            let i = &self.modes[a];
            let mut want = Expansion::new();
            want.insert(i.clone(), SurdScalar::one());
            for got in [self.product(&unit, i), self.product(i, &unit)] {
                if *got != want {
                    let k = first_difference(&got, &want);
                    return Some(Witness::new(
                        vec![unit.to_string(), i.to_string(), k.to_string()],
                        got.get(&k).cloned().unwrap_or_default(),
                        "constant mode does not act as the identity",
                    ));
                }
            }
            None
        })
    }

    /// `c_IJ^K ≠ 0 ⇒ eigen(K) = eigen(I) + eigen(J)`.
    pub fn eigen_additivity_check(&self, budget: usize, seed: u64) -> CheckResult {
        let cases = self.mode_pairs(budget, seed);
        cases.run("eigenvalue_additivity", |&(a, b)| {
            let (i, j) = (&self.modes[a], &self.modes[b]);
            let (ei, ej) = (self.eigenvalues(i), self.eigenvalues(j));
            for (k, c) in self.product(i, j).iter() {
                let ek = self.eigenvalues(k);
                if ek.iter().zip(ei.iter().zip(&ej)).any(|(x, (y, z))| *x != y + z) {
                    return Some(Witness::new(
                        vec![i.to_string(), j.to_string(), k.to_string()],
                        c,
                        format!("eigen(K) = {} but eigen(I) + eigen(J) = {}", fmt_vec(&ek), fmt_sum(&ei, &ej)),
                    ));
                }
            }
            None
        })
    }

    /// Conjugating twice returns `(I, +1)`.
    pub fn conjugation_involution_check(&self) -> CheckResult {
        let idx: Vec<usize> = (0..self.modes.len()).collect();
        CheckResult::run("conjugation_involution", Regime::Exhaustive, None, &idx, |&a| {
            let i = &self.modes[a];
            let (j, p1) = self.conjugation(i);
            let (back, p2) = self.conjugation(&j);
            (back != *i || p1 * p2 != 1).then(|| {
                Witness::new(
                    vec![i.to_string(), j.to_string()],
                    p1 * p2,
                    format!("η(η({i})) = ({back}, {})", p1 * p2),
                )
            })
        })
    }

    /// Hermiticity of `D_j` on the truncated basis:
    /// `eigen(I)[j] + eigen(η(I))[j] = 0`. `op` is zero-based.
    pub fn hermiticity_check(&self, op: usize) -> CheckResult {
        let idx: Vec<usize> = (0..self.modes.len()).collect();
        CheckResult::run(&format!("hermiticity_D{}", op + 1), Regime::Exhaustive, None, &idx, |&a| {
            let i = &self.modes[a];
            let (j, _) = self.conjugation(i);
            let s = self.eigenvalue(i, op) + self.eigenvalue(&j, op);
            (!s.is_zero()).then(|| {
                Witness::new(
                    vec![i.to_string(), j.to_string()],
                    format_rational(&s),
                    format!("D{} is not Hermitean: eigen(I) + eigen(η(I)) ≠ 0", op + 1),
                )
            })
        })
    }
}

fn first_difference(a: &Expansion, b: &Expansion) -> ModeLabel {
    a.keys()
        .chain(b.keys())
        .filter(|k| a.get(*k) != b.get(*k))
        .min()
        .cloned()
        .expect("expansions differ")
}

fn fmt_vec(v: &[Rational]) -> String {
    let parts: Vec<String> = v.iter().map(format_rational).collect();
    format!("({})", parts.join(","))
}

fn fmt_sum(a: &[Rational], b: &[Rational]) -> String {
    let s: Vec<Rational> = a.iter().zip(b).map(|(x, y)| x + y).collect();
    fmt_vec(&s)
}
