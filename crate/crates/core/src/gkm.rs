//! The generalised Kac-Moody algebra ĝ(𝓜) spanned by `T_{aI}`, `D_j`
//! and `k_j`.
//!
//! Non-vanishing brackets:
//!
//! ```text
//! [T_aI, T_bJ] = i f_ab^c c_IJ^K T_cK + g_ab η_IJ Σ_j I(j) k_j
//! [D_j,  T_aI] = I(j) T_aI
//! ```
//!
//! Central charges appear as formal generators `k_j`; folding them against
//! the numeric charge values is a separate step ([`GkmAlgebra::central_value`]).

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{GkmError, Result};
use crate::liealg::{cartan_weyl, CartanWeylData, Coords, FiniteAlgebra, Root};
use crate::modes::{Manifold, ModeLabel, ModeSystem};
use crate::scalar::{ComplexSurd, Rational, SurdScalar};

/// Basis element of ĝ(𝓜). Indices are zero-based; display is one-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Generator {
    T { a: usize, mode: ModeLabel },
    D(usize),
    K(usize),
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::T { a, mode } => write!(f, "T{}{}", a + 1, mode),
            Self::D(j) => write!(f, "D{}", j + 1),
            Self::K(j) => write!(f, "k{}", j + 1),
        }
    }
}

/// Sparse linear combination of generators; zero coefficients are never
/// stored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GkmElement {
    terms: BTreeMap<Generator, ComplexSurd>,
}

impl GkmElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn generator(g: Generator) -> Self {
        let mut e = Self::zero();
        e.terms.insert(g, ComplexSurd::one());
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Generator, &ComplexSurd)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, g: &Generator) -> ComplexSurd {
        self.terms.get(g).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, g: Generator, c: &ComplexSurd) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(g) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &GkmElement, s: &ComplexSurd) {
        for (g, c) in &other.terms {
            self.add_term(g.clone(), &(c * s));
        }
    }

    pub fn add(&mut self, other: &GkmElement) {
        for (g, c) in &other.terms {
            self.add_term(g.clone(), c);
        }
    }

    pub fn neg(&self) -> Self {
        Self { terms: self.terms.iter().map(|(g, c)| (g.clone(), -c)).collect() }
    }

    pub fn scale(&self, s: &ComplexSurd) -> Self {
        let mut out = Self::zero();
        out.add_scaled(self, s);
        out
    }

    /// Terms on `T` generators grouped by mode as base-algebra coordinates.
    pub fn loop_part(&self, dim: usize) -> BTreeMap<ModeLabel, Coords> {
        let mut out: BTreeMap<ModeLabel, Coords> = BTreeMap::new();
        for (g, c) in &self.terms {
            if let Generator::T { a, mode } = g {
                out.entry(mode.clone()).or_insert_with(|| vec![ComplexSurd::zero(); dim])[*a] = c.clone();
            }
        }
        out
    }

    /// Coefficients on the central generators `k_j`.
    pub fn central_part(&self) -> BTreeMap<usize, ComplexSurd> {
        self.terms
            .iter()
            .filter_map(|(g, c)| match g {
                Generator::K(j) => Some((*j, c.clone())),
                _ => None,
            })
            .collect()
    }

    /// Maps every generator through `f`; `None` drops the element into the
    /// error path of the caller.
    pub fn map_generators<F>(&self, mut f: F) -> Option<Self>
    where
        F: FnMut(&Generator) -> Option<Generator>,
    {
        let mut out = Self::zero();
        for (g, c) in &self.terms {
            out.add_term(f(g)?, c);
        }
        Some(out)
    }
}

impl fmt::Display for GkmElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(g, c)| format!("[{c}]·{g}")).collect();
        f.write_str(&parts.join(" + "))
    }
}

/// `(α, n)`: a root of the base algebra (or zero) and an eigenvalue vector
/// of the operators `D_j`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RootSpaceLabel {
    pub alpha: Root,
    pub n: Vec<Rational>,
}

#[derive(Debug, Clone)]
pub struct GkmAlgebra {
    pub base: FiniteAlgebra,
    pub modes: ModeSystem,
    pub cw: Option<CartanWeylData>,
    pub charges: Vec<Rational>,
    /// Value of `⟨D_i, k_i⟩`; 1 for the invariant form.
    pub dk_pairing: Rational,
    generators: Vec<Generator>,
}

impl GkmAlgebra {
    /// Named construction with validated base algebra and exact tables.
    pub fn build(base: &str, manifold: Manifold, cutoff: u32, charges: Vec<Rational>) -> Result<Self> {
        let base = FiniteAlgebra::make(base)?;
        let modes = ModeSystem::build(manifold, cutoff)?;
        Self::assemble(base, modes, charges)
    }

    pub fn assemble(base: FiniteAlgebra, modes: ModeSystem, charges: Vec<Rational>) -> Result<Self> {
        let r = modes.rank();
        if charges.len() != r {
            return Err(GkmError::InvalidInput(format!(
                "{} central charges given, {} needs {r}",
                charges.len(),
                modes.manifold()
            )));
        }
        let cw = if base.kind.is_abelian() { None } else { Some(cartan_weyl(&base)?) };
        let mut generators = Vec::with_capacity(base.dim * modes.modes().len() + 2 * r);
        for mode in modes.modes() {
            for a in 0..base.dim {
                generators.push(Generator::T { a, mode: mode.clone() });
            }
        }
        generators.extend((0..r).map(Generator::D));
        generators.extend((0..r).map(Generator::K));
        Ok(Self { base, modes, cw, charges, dk_pairing: Rational::one(), generators })
    }

    pub fn rank(&self) -> usize {
        self.modes.rank()
    }

    /// Generators within the cutoff: `T_{aI}` in mode order, then `D_j`,
    /// then `k_j`.
    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    fn check_generator(&self, g: &Generator) -> Result<()> {
        let ok = match g {
            Generator::T { a, mode } => *a < self.base.dim && mode.validate(self.modes.manifold()).is_ok(),
            Generator::D(j) | Generator::K(j) => *j < self.rank(),
        };
        if ok {
            Ok(())
        } else {
            Err(GkmError::MixedAlgebras)
        }
    }

    fn check_element(&self, x: &GkmElement) -> Result<()> {
        x.terms.keys().try_for_each(|g| self.check_generator(g))
    }

    /// Bracket of two basis generators. Inputs are assumed to belong to
    /// this algebra.
    pub fn bracket_generators(&self, x: &Generator, y: &Generator) -> GkmElement {
        let mut out = GkmElement::zero();
        match (x, y) {
            (Generator::T { a, mode: i }, Generator::T { a: b, mode: j }) => {
                if let Some(row) = self.base.f_row(*a, *b) {
                    let product = self.modes.product(i, j);
                    for (c, fab) in row {
                        if fab.is_zero() {
                            continue;
                        }
                        for (k, cijk) in product.iter() {
                            let coeff = ComplexSurd::imag(fab * cijk);
                            out.add_term(Generator::T { a: *c, mode: k.clone() }, &coeff);
                        }
                    }
                }
                let g = self.base.g(*a, *b);
                let eta = self.modes.eta(i, j);
                if !g.is_zero() && eta != 0 {
                    let ev = self.modes.eigenvalues(i);
                    for (op, e) in ev.iter().enumerate() {
                        let c = g.scale(&(e * Rational::from_integer(eta.into())));
                        out.add_term(Generator::K(op), &ComplexSurd::real(c));
                    }
                }
            }
            (Generator::D(op), Generator::T { a, mode }) => {
                let e = self.modes.eigenvalue(mode, *op);
                out.add_term(Generator::T { a: *a, mode: mode.clone() }, &ComplexSurd::real(e.into()));
            }
            (Generator::T { a, mode }, Generator::D(op)) => {
                let e = -self.modes.eigenvalue(mode, *op);
                out.add_term(Generator::T { a: *a, mode: mode.clone() }, &ComplexSurd::real(e.into()));
            }
            _ => {}
        }
        out
    }

    /// Bilinear extension of the generator brackets.
    pub fn bracket(&self, x: &GkmElement, y: &GkmElement) -> Result<GkmElement> {
        self.check_element(x)?;
        self.check_element(y)?;
        Ok(self.bracket_unchecked(x, y))
    }

    pub(crate) fn bracket_unchecked(&self, x: &GkmElement, y: &GkmElement) -> GkmElement {
        let mut out = GkmElement::zero();
        for (gx, cx) in &x.terms {
            for (gy, cy) in &y.terms {
                let b = self.bracket_generators(gx, gy);
                if !b.is_zero() {
                    out.add_scaled(&b, &(cx * cy));
                }
            }
        }
        out
    }

    /// Invariant form on generators: `⟨T_aI, T_bJ⟩ = η_IJ g_ab`,
    /// `⟨D_i, k_j⟩ = δ_ij`, everything else zero.
    pub fn killing_generators(&self, x: &Generator, y: &Generator) -> SurdScalar {
        match (x, y) {
            (Generator::T { a, mode: i }, Generator::T { a: b, mode: j }) => {
                let eta = self.modes.eta(i, j);
                if eta == 0 {
                    SurdScalar::zero()
                } else {
                    self.base.g(*a, *b).scale(&Rational::from_integer(eta.into()))
                }
            }
            (Generator::D(i), Generator::K(j)) | (Generator::K(j), Generator::D(i)) if i == j => {
                SurdScalar::from_rational(self.dk_pairing.clone())
            }
            _ => SurdScalar::zero(),
        }
    }

    pub fn killing_form(&self, x: &GkmElement, y: &GkmElement) -> Result<ComplexSurd> {
        self.check_element(x)?;
        self.check_element(y)?;
        Ok(self.killing_unchecked(x, y))
    }

    pub(crate) fn killing_unchecked(&self, x: &GkmElement, y: &GkmElement) -> ComplexSurd {
        let mut acc = ComplexSurd::zero();
        for (gx, cx) in &x.terms {
            for (gy, cy) in &y.terms {
                let k = self.killing_generators(gx, gy);
                if !k.is_zero() {
                    acc += &(cx * cy).scale_real(&k);
                }
            }
        }
        acc
    }

    /// `Σ_j c_j k_j` for the central part of `x`, evaluated at the charges.
    pub fn central_value(&self, x: &GkmElement) -> ComplexSurd {
        let mut acc = ComplexSurd::zero();
        for (j, c) in x.central_part() {
            acc += &c.scale_rational(&self.charges[j]);
        }
        acc
    }

    /// `Σ_a v^a T_{a,I}`.
    pub fn lift(&self, coords: &[ComplexSurd], mode: &ModeLabel) -> GkmElement {
        let mut out = GkmElement::zero();
        for (a, c) in coords.iter().enumerate() {
            out.add_term(Generator::T { a, mode: mode.clone() }, c);
        }
        out
    }

    fn require_cw(&self) -> Result<&CartanWeylData> {
        self.cw.as_ref().ok_or_else(|| GkmError::NotSemisimple(self.base.name()))
    }

    /// Basis of `g_(α, n)` within the cutoff: `E_{αI}` (or `H^i_I` for
    /// `α = 0`) over modes with `eigen(I) = n`.
    pub fn root_space(&self, label: &RootSpaceLabel) -> Result<Vec<GkmElement>> {
        let cw = self.require_cw()?;
        if label.n.len() != self.rank() {
            return Err(GkmError::InvalidInput(format!(
                "eigenvalue vector has length {}, expected {}",
                label.n.len(),
                self.rank()
            )));
        }
        let vectors = self.root_vectors_for(cw, &label.alpha)?;
        let mut out = Vec::new();
        for mode in self.modes.modes_with_eigenvalues(&label.n) {
            for v in &vectors {
                out.push(self.lift(v, &mode));
            }
        }
        Ok(out)
    }

    /// The finer filtration of `g_(α, n)` by truncation degree (`l` on the
    /// two-sphere, `2j` on SU(2)).
    pub fn root_space_by_degree(&self, label: &RootSpaceLabel) -> Result<BTreeMap<u32, Vec<GkmElement>>> {
        let cw = self.require_cw()?;
        let vectors = self.root_vectors_for(cw, &label.alpha)?;
        let mut out: BTreeMap<u32, Vec<GkmElement>> = BTreeMap::new();
        for mode in self.modes.modes_with_eigenvalues(&label.n) {
            let entry = out.entry(mode.degree()).or_default();
            for v in &vectors {
                entry.push(self.lift(v, &mode));
            }
        }
        Ok(out)
    }

    fn root_vectors_for(&self, cw: &CartanWeylData, alpha: &Root) -> Result<Vec<Coords>> {
        if alpha.len() != cw.rank() {
            return Err(GkmError::InvalidInput(format!(
                "root has {} components, base rank is {}",
                alpha.len(),
                cw.rank()
            )));
        }
        if alpha.iter().all(|x| x.is_zero()) {
            Ok(cw.cartan.clone())
        } else if let Some(e) = cw.root_vectors.get(alpha) {
            Ok(vec![e.clone()])
        } else {
            Err(GkmError::InvalidInput(format!(
                "{} is not a root of {}",
                crate::liealg::root_to_string(alpha),
                self.base.name()
            )))
        }
    }

    /// Every root-space basis element within the cutoff, tagged with its
    /// label. Order: modes, then the zero root (`H^i`), then roots.
    pub fn root_space_basis(&self) -> Result<Vec<(RootSpaceLabel, GkmElement)>> {
        let cw = self.require_cw()?;
        let mut out = Vec::new();
        for mode in self.modes.modes() {
            let n = self.modes.eigenvalues(mode);
            for h in &cw.cartan {
                out.push((RootSpaceLabel { alpha: cw.zero_root(), n: n.clone() }, self.lift(h, mode)));
            }
            for alpha in &cw.roots {
                let e = &cw.root_vectors[alpha];
                out.push((RootSpaceLabel { alpha: alpha.clone(), n: n.clone() }, self.lift(e, mode)));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;

    fn t(a: usize, mode: ModeLabel) -> Generator {
        Generator::T { a, mode }
    }

    fn circle(m: i64) -> ModeLabel {
        ModeLabel::Torus(vec![m])
    }

    #[test]
    fn generator_counts() {
        let a = GkmAlgebra::build("su2", Manifold::Sphere2, 1, vec![rational(1, 1)]).unwrap();
        assert_eq!(a.generator_count(), 14);
        let a = GkmAlgebra::build("su2", Manifold::Torus { n: 1 }, 2, vec![rational(1, 1)]).unwrap();
        assert_eq!(a.generator_count(), 17);
        let a = GkmAlgebra::build("u1^2", Manifold::Torus { n: 2 }, 1, vec![rational(1, 1); 2]).unwrap();
        assert_eq!(a.generator_count(), 22);
        assert!(a.cw.is_none());
    }

    #[test]
    fn charge_count_must_match_rank() {
        assert!(GkmAlgebra::build("su2", Manifold::Sphere2, 1, vec![]).is_err());
    }

    #[test]
    fn affine_brackets() {
        let alg = GkmAlgebra::build("su2", Manifold::Torus { n: 1 }, 3, vec![rational(1, 1)]).unwrap();
        let b = alg.bracket_generators(&t(0, circle(1)), &t(1, circle(2)));
        let mut want = GkmElement::zero();
        want.add_term(t(2, circle(3)), &ComplexSurd::i());
        assert_eq!(b, want);

        let b = alg.bracket_generators(&t(0, circle(2)), &t(0, circle(-2)));
        let mut want = GkmElement::zero();
        want.add_term(Generator::K(0), &ComplexSurd::real(SurdScalar::from_int(4)));
        assert_eq!(b, want);
        assert_eq!(alg.central_value(&b), ComplexSurd::real(SurdScalar::from_int(4)));
    }

    #[test]
    fn derivation_and_centre() {
        let alg = GkmAlgebra::build("su2", Manifold::Sphere2, 2, vec![rational(1, 1)]).unwrap();
        let x = t(1, ModeLabel::Sphere2 { l: 2, m: -1 });
        let b = alg.bracket_generators(&Generator::D(0), &x);
        assert_eq!(b.coefficient(&x), ComplexSurd::real(SurdScalar::from_int(-1)));
        for g in alg.generators() {
            assert!(alg.bracket_generators(&Generator::K(0), g).is_zero());
            assert!(alg.bracket_generators(g, &Generator::K(0)).is_zero());
        }
        assert!(alg.bracket_generators(&Generator::D(0), &Generator::D(0)).is_zero());
    }

    #[test]
    fn killing_table() {
        let alg = GkmAlgebra::build("su2", Manifold::Sphere2, 2, vec![rational(1, 1)]).unwrap();
        let x = t(0, ModeLabel::Sphere2 { l: 1, m: 1 });
        let y = t(0, ModeLabel::Sphere2 { l: 1, m: -1 });
        assert_eq!(alg.killing_generators(&x, &y), SurdScalar::from_int(-2));
        assert!(alg.killing_generators(&Generator::D(0), &Generator::K(0)).is_one());
        assert!(alg.killing_generators(&Generator::D(0), &x).is_zero());
        assert!(alg.killing_generators(&Generator::K(0), &Generator::K(0)).is_zero());
    }

    #[test]
    fn mixed_operands_rejected() {
        let alg = GkmAlgebra::build("su2", Manifold::Sphere2, 1, vec![rational(1, 1)]).unwrap();
        let foreign = GkmElement::generator(t(0, circle(1)));
        let own = GkmElement::generator(Generator::D(0));
        assert!(matches!(alg.bracket(&foreign, &own), Err(GkmError::MixedAlgebras)));
        assert!(matches!(alg.killing_form(&own, &GkmElement::generator(Generator::K(3))), Err(GkmError::MixedAlgebras)));
    }

    #[test]
    fn root_space_dimensions() {
        let plus = vec![rational(1, 1)];
        let alg = GkmAlgebra::build("su2", Manifold::Torus { n: 1 }, 3, vec![rational(1, 1)]).unwrap();
        let l = RootSpaceLabel { alpha: plus.clone(), n: vec![rational(2, 1)] };
        assert_eq!(alg.root_space(&l).unwrap().len(), 1);

        let alg = GkmAlgebra::build("su2", Manifold::Sphere2, 2, vec![rational(1, 1)]).unwrap();
        let l = RootSpaceLabel { alpha: plus.clone(), n: vec![rational(0, 1)] };
        assert_eq!(alg.root_space(&l).unwrap().len(), 3);
        let by_degree = alg.root_space_by_degree(&l).unwrap();
        assert_eq!(by_degree.keys().copied().collect::<Vec<_>>(), vec![0, 1, 2]);
        let l = RootSpaceLabel { alpha: vec![rational(0, 1)], n: vec![rational(5, 1)] };
        assert!(alg.root_space(&l).unwrap().is_empty());
        let l = RootSpaceLabel { alpha: vec![rational(2, 1)], n: vec![rational(0, 1)] };
        assert!(alg.root_space(&l).is_err());

        let u = GkmAlgebra::build("u1", Manifold::Torus { n: 1 }, 1, vec![rational(1, 1)]).unwrap();
        let l = RootSpaceLabel { alpha: vec![], n: vec![rational(0, 1)] };
        assert!(matches!(u.root_space(&l), Err(GkmError::NotSemisimple(_))));
    }
}
