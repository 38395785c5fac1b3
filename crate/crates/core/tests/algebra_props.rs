use gkm_core::modes::{conjugation_formula, eigen_formula, product_formula};
use gkm_core::oracle::{make_grid, Oracle, ORACLE_TOLERANCE};
use gkm_core::scalar::{rational, ComplexSurd, SurdScalar};
use gkm_core::{Generator, GkmAlgebra, GkmElement, Manifold, ModeLabel};
use proptest::prelude::*;

fn sphere2(max: u32) -> impl Strategy<Value = ModeLabel> {
    (0..=max, any::<u32>()).prop_map(|(l, s)| ModeLabel::Sphere2 { l, m: (s % (2 * l + 1)) as i32 - l as i32 })
}

fn sphere3(max: u32) -> impl Strategy<Value = ModeLabel> {
    (0..=max, any::<u32>(), any::<u32>()).prop_map(|(dj, p, q)| {
        let pick = |s: u32| -(dj as i32) + 2 * (s % (dj + 1)) as i32;
        ModeLabel::Sphere3 { dj, dm: pick(p), dmp: pick(q) }
    })
}

fn torus2(max: i64) -> impl Strategy<Value = ModeLabel> {
    prop::collection::vec(-max..=max, 2).prop_map(ModeLabel::Torus)
}

fn any_mode() -> impl Strategy<Value = ModeLabel> {
    prop_oneof![sphere2(4), sphere3(4), torus2(4)]
}

fn same_manifold() -> impl Strategy<Value = (ModeLabel, ModeLabel, ModeLabel)> {
    prop_oneof![
        (sphere2(3), sphere2(3), sphere2(3)),
        (sphere3(3), sphere3(3), sphere3(3)),
        (torus2(3), torus2(3), torus2(3)),
    ]
}

fn compose(i: &ModeLabel, j: &ModeLabel, k: &ModeLabel) -> std::collections::BTreeMap<ModeLabel, SurdScalar> {
    let mut out = std::collections::BTreeMap::new();
    for (l, c1) in product_formula(i, j).unwrap() {
        for (m, c2) in product_formula(&l, k).unwrap() {
            let e: &mut SurdScalar = out.entry(m).or_default();
            *e = &*e + &(&c1 * &c2);
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn products_commute_and_add_eigenvalues((i, j, _) in same_manifold()) {
        let ij = product_formula(&i, &j).unwrap();
        prop_assert_eq!(&ij, &product_formula(&j, &i).unwrap());
        let (ei, ej) = (eigen_formula(&i), eigen_formula(&j));
        for k in ij.keys() {
            let ek = eigen_formula(k);
            for n in 0..ek.len() {
                prop_assert_eq!(&ek[n], &(&ei[n] + &ej[n]));
            }
        }
    }

    #[test]
    fn products_associate((i, j, k) in same_manifold()) {
        prop_assert_eq!(compose(&i, &j, &k), compose(&j, &k, &i));
    }

    #[test]
    fn conjugation_is_involutive_and_hermitean(i in any_mode()) {
        let (j, p) = conjugation_formula(&i);
        let (back, q) = conjugation_formula(&j);
        prop_assert_eq!(back, i.clone());
        prop_assert_eq!(p * q, 1);
        let (ei, ej) = (eigen_formula(&i), eigen_formula(&j));
        prop_assert!(ei.iter().zip(&ej).all(|(a, b)| (a + b) == rational(0, 1)));
    }

    #[test]
    fn product_matches_quadrature((i, j, _) in same_manifold()) {
        let manifold = match &i {
            ModeLabel::Torus(_) => Manifold::Torus { n: 2 },
            ModeLabel::Sphere2 { .. } => Manifold::Sphere2,
            ModeLabel::Sphere3 { .. } => Manifold::Sphere3 { half_integers: true },
        };
        let oracle = Oracle::new(make_grid(&manifold, 6));
        let mut total = 0.0;
        for (k, c) in product_formula(&i, &j).unwrap() {
            let num = oracle.product_coefficient(&i, &j, &k).unwrap();
            prop_assert!((num - num_complex::Complex64::new(c.to_f64(), 0.0)).norm() <= ORACLE_TOLERANCE);
            total += c.to_f64().powi(2);
        }
        prop_assert!((oracle.product_norm(&i, &j).unwrap() - total).abs() <= ORACLE_TOLERANCE);
    }
}

fn algebra() -> GkmAlgebra {
    GkmAlgebra::build("su2", Manifold::Sphere2, 2, vec![rational(1, 1)]).unwrap()
}

fn element(gens: usize) -> impl Strategy<Value = Vec<(usize, i64, i64)>> {
    prop::collection::vec((0..gens, -2i64..3, -2i64..3), 1..4)
}

fn realise(alg: &GkmAlgebra, terms: &[(usize, i64, i64)]) -> GkmElement {
    let mut e = GkmElement::zero();
    for &(g, re, im) in terms {
        let c = ComplexSurd::new(SurdScalar::from_int(re), SurdScalar::from_int(im));
        e.add_term(alg.generators()[g].clone(), &c);
    }
    e
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bracket_is_a_lie_bracket(x in element(29), y in element(29), z in element(29)) {
        let alg = algebra();
        let (x, y, z) = (realise(&alg, &x), realise(&alg, &y), realise(&alg, &z));
        let xy = alg.bracket(&x, &y).unwrap();
        let mut anti = xy.clone();
        anti.add(&alg.bracket(&y, &x).unwrap());
        prop_assert!(anti.is_zero());
        let mut jac = alg.bracket(&xy, &z).unwrap();
        jac.add(&alg.bracket(&alg.bracket(&y, &z).unwrap(), &x).unwrap());
        jac.add(&alg.bracket(&alg.bracket(&z, &x).unwrap(), &y).unwrap());
        prop_assert!(jac.is_zero(), "Jacobi fails: {}", jac);
        let inv = &alg.killing_form(&xy, &z).unwrap() + &alg.killing_form(&y, &alg.bracket(&x, &z).unwrap()).unwrap();
        prop_assert!(inv.is_zero());
    }

    #[test]
    fn central_generators_commute(x in element(29), j in 0usize..1) {
        let alg = algebra();
        let x = realise(&alg, &x);
        let k = GkmElement::generator(Generator::K(j));
        prop_assert!(alg.bracket(&k, &x).unwrap().is_zero());
    }
}

#[test]
fn mixed_operands_rejected() {
    let alg = algebra();
    let foreign = GkmElement::generator(Generator::T { a: 0, mode: ModeLabel::Torus(vec![1]) });
    let x = GkmElement::generator(alg.generators()[0].clone());
    assert!(alg.bracket(&x, &foreign).is_err());
    assert!(alg.killing_form(&foreign, &x).is_err());
}
