//! Verification suites over an assembled algebra.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{GkmError, Result};
use crate::gkm::{Generator, GkmAlgebra, GkmElement};
use crate::liealg::root_to_string;
use crate::modes::{Manifold, ModeLabel};
use crate::oracle::{self, band_for_cutoff, make_grid, Oracle, OracleTally, ORACLE_TOLERANCE};
use crate::report::{CheckResult, Regime, VerificationReport, Witness};
use crate::sampling::{CaseSet, DEFAULT_BUDGET};
use crate::scalar::{format_rational, Rational, SurdScalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    All,
    Jacobi,
    Cocycle,
    Grading,
    Invariance,
    Oracle,
    Modes,
}

impl Suite {
    pub const NAMES: [&'static str; 7] = ["all", "jacobi", "cocycle", "grading", "invariance", "oracle", "modes"];
}

impl FromStr for Suite {
    type Err = GkmError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "all" => Self::All,
            "jacobi" => Self::Jacobi,
            "cocycle" => Self::Cocycle,
            "grading" => Self::Grading,
            "invariance" => Self::Invariance,
            "oracle" => Self::Oracle,
            "modes" => Self::Modes,
            _ => return Err(GkmError::InvalidInput(format!("unknown suite '{s}'"))),
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = *self as usize;
        f.write_str(Self::NAMES[i])
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Maximum number of cases per check before switching to sampling.
    pub budget: usize,
    /// Dump path quoted in replay commands.
    pub source: Option<String>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: 0, budget: DEFAULT_BUDGET, source: None }
    }
}

impl VerifyOptions {
    fn replay(&self, suite: Suite) -> String {
        format!(
            "gkm verify {} --suite {suite} --seed {} --budget {}",
            self.source.as_deref().unwrap_or("<dump>"),
            self.seed,
            self.budget
        )
    }
}

fn gens(xs: &[&Generator]) -> Vec<String> {
    xs.iter().map(|g| g.to_string()).collect()
}

/// First nonzero term of `x`, for witnesses.
fn first_term(x: &GkmElement) -> (String, String) {
    x.terms()
        .next()
        .map(|(g, c)| (g.to_string(), c.to_string()))
        .unwrap_or_else(|| ("-".into(), "0".into()))
}

/// `[x, y] + [y, x] = 0` on all unordered generator pairs.
pub fn antisymmetry_check(alg: &GkmAlgebra, opts: &VerifyOptions) -> CheckResult {
    let g = alg.generators();
    let cases = CaseSet::unordered_pairs(g.len(), opts.budget, opts.seed);
    cases.run("bracket_antisymmetry", |&(a, b)| {
        let mut s = alg.bracket_generators(&g[a], &g[b]);
        s.add(&alg.bracket_generators(&g[b], &g[a]));
        (!s.is_zero()).then(|| {
            let (at, v) = first_term(&s);
            Witness::new(gens(&[&g[a], &g[b]]), v, format!("[x,y] + [y,x] is nonzero on {at}"))
        })
    })
}

/// `[[x,y],z] + [[y,z],x] + [[z,x],y] = 0` including the central terms,
/// over generator multisets (including `D_j` and `k_j`).
pub fn jacobi_check(alg: &GkmAlgebra, opts: &VerifyOptions) -> CheckResult {
    let g = alg.generators();
    let cases = CaseSet::multisets(g.len(), opts.budget, opts.seed);
    cases.run("gkm_jacobi", |&(a, b, c)| {
        let (x, y, z) = (&g[a], &g[b], &g[c]);
        let mut total = GkmElement::zero();
        for (p, q, r) in [(x, y, z), (y, z, x), (z, x, y)] {
            let pq = alg.bracket_generators(p, q);
            if pq.is_zero() {
                continue;
            }
            total.add(&alg.bracket_unchecked(&pq, &GkmElement::generator(r.clone())));
        }
        (!total.is_zero()).then(|| {
            let (at, v) = first_term(&total);
            Witness::new(gens(&[x, y, z]), v, format!("cyclic sum of double brackets is nonzero on {at}"))
        })
    })
}

/// `ω_j(T_aI, T_bJ) + ω_j(T_bJ, T_aI) = 0`; at mode level
/// `J(j) η_IJ + I(j) η_JI = 0` for every pair of modes and every `j`.
pub fn cocycle_antisymmetry_check(alg: &GkmAlgebra, opts: &VerifyOptions) -> CheckResult {
    let modes = alg.modes.modes();
    let cases = CaseSet::unordered_pairs(modes.len(), opts.budget, opts.seed);
    cases.run("cocycle_antisymmetry", |&(a, b)| {
        let (i, j) = (&modes[a], &modes[b]);
        for op in 0..alg.rank() {
            let s = alg.modes.cocycle_pairing(op, i, j) + alg.modes.cocycle_pairing(op, j, i);
            if !s.is_zero() {
                return Some(Witness::new(
                    vec![format!("D{}", op + 1), i.to_string(), j.to_string()],
                    format_rational(&s),
                    "ω(I,J) + ω(J,I) is nonzero",
                ));
            }
        }
        None
    })
}

/// Symmetry of the invariant form and agreement with its defining table:
/// `⟨T_aI, T_bJ⟩ = g_ab η_IJ`, `⟨D_i, k_j⟩ = δ_ij`, everything else zero.
pub fn killing_table_check(alg: &GkmAlgebra, opts: &VerifyOptions) -> CheckResult {
    let g = alg.generators();
    let cases = CaseSet::pairs(g.len(), opts.budget, opts.seed);
    cases.run("killing_table", |&(a, b)| {
        let (x, y) = (&g[a], &g[b]);
        let got = alg.killing_generators(x, y);
        let want = match (x, y) {
            (Generator::T { a, mode: i }, Generator::T { a: b, mode: j }) => {
                let (partner, phase) = alg.modes.conjugation(i);
                if partner == *j {
                    alg.base.g(*a, *b).scale(&Rational::from_integer(phase.into()))
                } else {
                    SurdScalar::zero()
                }
            }
            (Generator::D(i), Generator::K(j)) | (Generator::K(j), Generator::D(i)) if i == j => SurdScalar::one(),
            _ => SurdScalar::zero(),
        };
        if got != want {
            return Some(Witness::new(gens(&[x, y]), &got, format!("form value {got}, table value {want}")));
        }
        let back = alg.killing_generators(y, x);
        (back != got).then(|| Witness::new(gens(&[x, y]), &back, "form is not symmetric"))
    })
}

/// `⟨[x,y],z⟩ + ⟨y,[x,z]⟩ = 0` over ordered generator triples.
pub fn invariance_check(alg: &GkmAlgebra, opts: &VerifyOptions) -> CheckResult {
    let g = alg.generators();
    let cases = CaseSet::triples(g.len(), opts.budget, opts.seed);
    cases.run("killing_invariance", |&(a, b, c)| {
        let (x, y, z) = (&g[a], &g[b], &g[c]);
        let (ey, ez) = (GkmElement::generator(y.clone()), GkmElement::generator(z.clone()));
        let s = &alg.killing_unchecked(&alg.bracket_generators(x, y), &ez)
            + &alg.killing_unchecked(&ey, &alg.bracket_generators(x, z));
        (!s.is_zero()).then(|| Witness::new(gens(&[x, y, z]), &s, "⟨[x,y],z⟩ + ⟨y,[x,z]⟩ is nonzero"))
    })
}

fn add_vec(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn fmt_vec(v: &[Rational]) -> String {
    let parts: Vec<String> = v.iter().map(format_rational).collect();
    format!("({})", parts.join(","))
}

/// `[g_(α,m), g_(β,n)] ⊂ g_(α+β, m+n)`, with a central part only when
/// `α+β = 0` and `m+n = 0`, over all pairs of root-space basis elements.
pub fn grading_check(alg: &GkmAlgebra, opts: &VerifyOptions) -> Result<CheckResult> {
    let basis = alg.root_space_basis()?;
    let cw = alg.cw.as_ref().expect("root_space_basis requires Cartan-Weyl data");
    let cases = CaseSet::pairs(basis.len(), opts.budget, opts.seed);
    let dim = alg.base.dim;
    Ok(cases.run("root_grading", |&(p, q)| {
        let ((lx, x), (ly, y)) = (&basis[p], &basis[q]);
        let alpha = add_vec(&lx.alpha, &ly.alpha);
        let n = add_vec(&lx.n, &ly.n);
        let labels = || {
            vec![
                format!("{}{}", root_to_string(&lx.alpha), fmt_vec(&lx.n)),
                format!("{}{}", root_to_string(&ly.alpha), fmt_vec(&ly.n)),
            ]
        };
        let z = alg.bracket_unchecked(x, y);
        for (mode, v) in z.loop_part(dim) {
            let e = alg.modes.eigenvalues(&mode);
            if e != n {
                return Some(Witness::new(
                    labels(),
                    &mode,
                    format!("bracket has a term on mode {mode} with eigenvalues {}, expected {}", fmt_vec(&e), fmt_vec(&n)),
                ));
            }
            for (i, h) in cw.cartan.iter().enumerate() {
                let hv = alg.base.bracket(h, &v);
                if hv.iter().zip(&v).any(|(l, r)| !(l - &r.scale_rational(&alpha[i])).is_zero()) {
                    return Some(Witness::new(
                        labels(),
                        root_to_string(&alpha),
                        format!("T-part on mode {mode} is not of weight {}", root_to_string(&alpha)),
                    ));
                }
            }
        }
        let central = z.central_part();
        let allowed = alpha.iter().all(|a| a.is_zero()) && n.iter().all(|a| a.is_zero());
        if !allowed {
            if let Some((j, c)) = central.iter().next() {
                return Some(Witness::new(labels(), c, format!("unexpected central term on k{}", j + 1)));
            }
        }
        None
    }))
}

/// Mode-system axioms: commutativity, associativity, unit, eigenvalue
/// additivity, conjugation involution and Hermiticity of every `D_j`.
pub fn mode_checks(alg: &GkmAlgebra, opts: &VerifyOptions) -> Vec<CheckResult> {
    let m = &alg.modes;
    let mut out = vec![
        m.commutativity_check(opts.budget, opts.seed),
        m.associativity_check(opts.budget, opts.seed),
        m.unit_check(),
        m.eigen_additivity_check(opts.budget, opts.seed),
        m.conjugation_involution_check(),
    ];
    out.extend((0..m.rank()).map(|op| m.hermiticity_check(op)));
    out
}

/// Bracket coefficients of `T`-pairs recomputed from quadrature values of
/// `c_IJ^K`, `η_IJ` and the eigenvalues.
pub fn oracle_bracket_check(alg: &GkmAlgebra, opts: &VerifyOptions, tally: &mut OracleTally) -> CheckResult {
    let start = std::time::Instant::now();
    let oracle = Oracle::new(make_grid(alg.modes.manifold(), band_for_cutoff(alg.modes.cutoff())));
    let g: Vec<&Generator> = alg.generators().iter().filter(|g| matches!(g, Generator::T { .. })).collect();
    let cases = CaseSet::pairs(g.len(), opts.budget.min(4096), opts.seed);
    let rows: Vec<Result<Vec<(Vec<String>, f64)>>> = {
        use rayon::prelude::*;
        cases
            .items
            .par_iter()
            .map(|&(p, q)| {
                let (Generator::T { a, mode: i }, Generator::T { a: b, mode: j }) = (g[p], g[q]) else {
                    unreachable!()
                };
                let exact = alg.bracket_generators(g[p], g[q]);
                let mut numeric: Vec<(Generator, Complex64)> = Vec::new();
                if let Some(row) = alg.base.f_row(*a, *b) {
                    for k in alg.modes.product(i, j).keys() {
                        let c = oracle.product_coefficient(i, j, k)?;
                        for (cc, f) in row {
                            numeric.push((
                                Generator::T { a: *cc, mode: k.clone() },
                                Complex64::new(0.0, f.to_f64()) * c,
                            ));
                        }
                    }
                }
                let eta = oracle.bilinear(i, j)?;
                let gab = alg.base.g(*a, *b).to_f64();
                for op in 0..alg.rank() {
                    let ev = oracle.eigenvalue(op, i)?;
                    numeric.push((Generator::K(op), eta * gab * ev));
                }
                let mut out = Vec::new();
                let mut seen = std::collections::BTreeSet::new();
                for (gen, z) in &numeric {
                    seen.insert(gen.clone());
                    let (re, im) = exact.coefficient(gen).to_f64();
                    let d = (z - Complex64::new(re, im)).norm();
                    out.push((vec![g[p].to_string(), g[q].to_string(), gen.to_string()], d));
                }
                for (gen, c) in exact.terms() {
                    if !seen.contains(gen) {
                        let (re, im) = c.to_f64();
                        out.push((vec![g[p].to_string(), g[q].to_string(), gen.to_string()], re.hypot(im)));
                    }
                }
                Ok(out)
            })
            .collect()
    };
    let mut witness = None;
    for r in rows {
        match r {
            Ok(list) => {
                for (labels, d) in list {
                    tally.compared += 1;
                    tally.max_abs_delta = tally.max_abs_delta.max(d);
                    if witness.is_none() && !(d <= ORACLE_TOLERANCE) {
                        witness = Some(Witness::new(labels, format!("{d:.3e}"), "bracket coefficient differs from quadrature"));
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
        name: "oracle_brackets".into(),
        regime: cases.regime,
        seed: cases.seed,
        passed: witness.is_none(),
        checked: cases.len(),
        witness,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

/// Runs the selected suite. Failing checks carry a replay command.
pub fn verify(alg: &GkmAlgebra, suite: Suite, opts: &VerifyOptions) -> VerificationReport {
    let mut report = VerificationReport::default();
    let want = |s: Suite| suite == Suite::All || suite == s;
    let add = |report: &mut VerificationReport, c: CheckResult, s: Suite| {
        report.push(c.with_replay(opts.replay(s)));
    };
    if want(Suite::Modes) {
        for c in mode_checks(alg, opts) {
            add(&mut report, c, Suite::Modes);
        }
    }
    if want(Suite::Jacobi) {
        add(&mut report, antisymmetry_check(alg, opts), Suite::Jacobi);
        add(&mut report, jacobi_check(alg, opts), Suite::Jacobi);
    }
    if want(Suite::Cocycle) {
        add(&mut report, cocycle_antisymmetry_check(alg, opts), Suite::Cocycle);
        add(&mut report, alg.modes.eigen_additivity_check(opts.budget, opts.seed), Suite::Cocycle);
    }
    if want(Suite::Invariance) {
        add(&mut report, killing_table_check(alg, opts), Suite::Invariance);
        add(&mut report, invariance_check(alg, opts), Suite::Invariance);
    }
    if want(Suite::Grading) && alg.cw.is_some() {
        if let Ok(c) = grading_check(alg, opts) {
            add(&mut report, c, Suite::Grading);
        }
    }
    if want(Suite::Oracle) {
        let mut tally = OracleTally::default();
        for c in oracle::oracle_checks(&alg.modes, opts.budget, opts.seed, &mut tally) {
            add(&mut report, c, Suite::Oracle);
        }
        add(&mut report, oracle_bracket_check(alg, opts, &mut tally), Suite::Oracle);
        report.oracle = Some(tally.summary());
    }
    report
}

/// Embedding `ĝ(𝕋ⁿ⁻¹) → ĝ(𝕋ⁿ)`, `T_{a,m} ↦ T_{a,(m,shift)}`, `D_j ↦ D_j`,
/// `k_j ↦ k_j`: the image must close under the bracket and reproduce the
/// structure constants of the smaller algebra.
pub fn torus_hierarchy_check(base: &str, n: usize, cutoff: u32, shift: i64) -> Result<CheckResult> {
    if n < 2 {
        return Err(GkmError::InvalidInput("torus hierarchy needs n ≥ 2".into()));
    }
    let ones = |k: usize| vec![Rational::from_integer(1.into()); k];
    let big = GkmAlgebra::build(base, Manifold::Torus { n }, cutoff, ones(n))?;
    let small = GkmAlgebra::build(base, Manifold::Torus { n: n - 1 }, cutoff, ones(n - 1))?;
    let embed = |g: &Generator| -> Option<Generator> {
        Some(match g {
            Generator::T { a, mode: ModeLabel::Torus(m) } => {
                let mut m = m.clone();
                m.push(shift);
                Generator::T { a: *a, mode: ModeLabel::Torus(m) }
            }
            Generator::T { .. } => return None,
            Generator::D(j) => Generator::D(*j),
            Generator::K(j) => Generator::K(*j),
        })
    };
    let restrict = |g: &Generator| -> Option<Generator> {
        match g {
            Generator::T { a, mode: ModeLabel::Torus(m) } if m.last() == Some(&shift) => {
                Some(Generator::T { a: *a, mode: ModeLabel::Torus(m[..m.len() - 1].to_vec()) })
            }
            Generator::D(j) if *j < n - 1 => Some(Generator::D(*j)),
            Generator::K(j) if *j < n - 1 => Some(Generator::K(*j)),
            _ => None,
        }
    };
    let g = small.generators();
    let pairs: Vec<(usize, usize)> = crate::sampling::ordered_pairs(g.len());
    Ok(CheckResult::run("torus_hierarchy", Regime::Exhaustive, None, &pairs, |&(a, b)| {
        let (x, y) = (&g[a], &g[b]);
        let (ex, ey) = (embed(x)?, embed(y)?);
        let image = big.bracket_generators(&ex, &ey);
        let labels = vec![ex.to_string(), ey.to_string()];
        let Some(pulled) = image.map_generators(restrict) else {
            let outside = image.terms().find(|(g, _)| restrict(g).is_none()).map(|(g, _)| g.to_string());
            return Some(Witness::new(
                labels,
                outside.unwrap_or_default(),
                format!("bracket leaves the embedded subalgebra: {image}"),
            ));
        };
        let want = small.bracket_generators(x, y);
        (pulled != want).then(|| {
            Witness::new(labels, &pulled, format!("structure constants differ from ĝ(𝕋^{}): expected {want}", n - 1))
        })
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;

    fn build(base: &str, manifold: Manifold, cutoff: u32) -> GkmAlgebra {
        let r = manifold.rank();
        GkmAlgebra::build(base, manifold, cutoff, vec![rational(1, 1); r]).unwrap()
    }

    #[test]
    fn suite_names_round_trip() {
        for name in Suite::NAMES {
            assert_eq!(name.parse::<Suite>().unwrap().to_string(), name);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn full_suite_on_circle() {
        let alg = build("su2", Manifold::Torus { n: 1 }, 2);
        let report = verify(&alg, Suite::All, &VerifyOptions::default());
        assert!(report.passed(), "{report}");
        assert!(report.oracle.as_ref().unwrap().max_abs_delta <= ORACLE_TOLERANCE);
    }

    #[test]
    fn full_suite_on_sphere() {
        let alg = build("su2", Manifold::Sphere2, 2);
        let report = verify(&alg, Suite::All, &VerifyOptions::default());
        assert!(report.passed(), "{report}");
        assert!(report.checks.len() >= 5);
    }

    #[test]
    fn su3_on_su2_group() {
        let alg = build("su3", Manifold::Sphere3 { half_integers: true }, 1);
        let opts = VerifyOptions { budget: 20_000, seed: 3, ..Default::default() };
        let report = verify(&alg, Suite::All, &opts);
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn abelian_base_skips_grading() {
        let alg = build("u1^2", Manifold::Torus { n: 2 }, 1);
        let report = verify(&alg, Suite::All, &VerifyOptions::default());
        assert!(report.passed(), "{report}");
        assert!(report.checks.iter().all(|c| c.name != "root_grading"));
    }

    #[test]
    fn broken_dk_pairing_breaks_invariance() {
        let mut alg = build("su2", Manifold::Sphere2, 1);
        alg.dk_pairing = Rational::zero();
        let c = invariance_check(&alg, &VerifyOptions::default());
        assert!(!c.passed);
        let w = c.witness.unwrap();
        assert!(w.generators[0].starts_with('T') && w.generators[1].starts_with('T') && w.generators[2] == "D1");
    }

    #[test]
    fn flipped_eta_breaks_cocycle() {
        let mut alg = build("su2", Manifold::Sphere2, 2);
        let i = ModeLabel::Sphere2 { l: 2, m: 1 };
        let (j, p) = alg.modes.conjugation(&i);
        alg.modes.set_conjugation(i, j, -p);
        let opts = VerifyOptions::default();
        assert!(!cocycle_antisymmetry_check(&alg, &opts).passed);
        assert!(!jacobi_check(&alg, &opts).passed);
    }

    #[test]
    fn corrupted_product_breaks_grading() {
        let mut alg = build("su2", Manifold::Torus { n: 1 }, 2);
        let (i, j) = (ModeLabel::Torus(vec![1]), ModeLabel::Torus(vec![1]));
        let mut bad = crate::modes::Expansion::new();
        bad.insert(ModeLabel::Torus(vec![1]), SurdScalar::one());
        alg.modes.set_product(i, j, bad);
        let c = grading_check(&alg, &VerifyOptions::default()).unwrap();
        assert!(!c.passed);
    }

    #[test]
    fn hierarchy() {
        assert!(torus_hierarchy_check("su2", 2, 2, 0).unwrap().passed);
        assert!(torus_hierarchy_check("u1", 3, 1, 0).unwrap().passed);
        let shifted = torus_hierarchy_check("su2", 2, 2, 1).unwrap();
        assert!(!shifted.passed);
        assert!(shifted.witness.unwrap().value.contains(",2)"));
        assert!(torus_hierarchy_check("su2", 1, 2, 0).is_err());
    }
}
