use gkm_core::scalar::{rational, SurdScalar};
use gkm_core::wigner::{clebsch_gordan, gaunt_normalized, wigner3j, SpinTriple};
use proptest::prelude::*;

fn fact(n: i64) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Racah's formula in floating point, doubled labels.
fn racah_float(j: [i64; 3], m: [i64; 3]) -> f64 {
    let [a, b, c] = j;
    let [x, y, z] = m;
    if x + y + z != 0 || c > a + b || c < (a - b).abs() || (a + b + c) % 2 != 0 {
        return 0.0;
    }
    let h = |v: i64| v / 2;
    let tri = fact(h(a + b - c)) * fact(h(a - b + c)) * fact(h(-a + b + c)) / fact(h(a + b + c) + 1);
    let pre = (tri
        * fact(h(a + x))
        * fact(h(a - x))
        * fact(h(b + y))
        * fact(h(b - y))
        * fact(h(c + z))
        * fact(h(c - z)))
    .sqrt();
    let mut sum = 0.0;
    for t in 0..=(a + b + c) {
        let den = [
            t,
            h(c - b + x) + t,
            h(c - a - y) + t,
            h(a + b - c) - t,
            h(a - x) - t,
            h(b + y) - t,
        ];
        if den.iter().any(|&d| d < 0) {
            continue;
        }
        let sign = if t % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign / den.iter().map(|&d| fact(d)).product::<f64>();
    }
    let phase = if h(a - b - z).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    phase * pre * sum
}

fn triples(max: u32) -> Vec<SpinTriple> {
    let mut out = Vec::new();
    for a in 0..=max {
        for b in 0..=max {
            for c in 0..=max {
                for x in (-(a as i32)..=a as i32).step_by(2) {
                    for y in (-(b as i32)..=b as i32).step_by(2) {
                        let z = -x - y;
                        if z.unsigned_abs() <= c && (c as i32 + z) % 2 == 0 {
                            out.push(SpinTriple::doubled(a, b, c, x, y, z).unwrap());
                        }
                    }
                }
            }
        }
    }
    out
}

#[test]
fn agrees_with_float_racah() {
    for t in triples(6) {
        let exact = wigner3j(&t).unwrap().to_f64();
        let j = t.j.map(|v| v as i64);
        let m = t.m.map(|v| v as i64);
        let float = racah_float(j, m);
        assert!((exact - float).abs() < 1e-13, "{t:?}: {exact} vs {float}");
    }
}

#[test]
fn orthogonality_is_exact() {
    for j1 in 0..=4u32 {
        for j2 in 0..=4u32 {
            for j3 in (j1.abs_diff(j2)..=j1 + j2).step_by(2) {
                for j3b in (j1.abs_diff(j2)..=j1 + j2).step_by(2) {
                    for m3 in (-(j3.min(j3b) as i32)..=j3.min(j3b) as i32).step_by(2) {
                        let mut acc = SurdScalar::zero();
                        for m1 in (-(j1 as i32)..=j1 as i32).step_by(2) {
                            let m2 = -m1 - m3;
                            if m2.unsigned_abs() > j2 || (j2 as i32 + m2) % 2 != 0 {
                                continue;
                            }
                            let a = wigner3j(&SpinTriple::doubled(j1, j2, j3, m1, m2, m3).unwrap()).unwrap();
                            let b = wigner3j(&SpinTriple::doubled(j1, j2, j3b, m1, m2, m3).unwrap()).unwrap();
                            acc = &acc + &(&a * &b);
                        }
                        let want = if j3 == j3b {
                            SurdScalar::from_rational(rational(1, (j3 + 1) as i64))
                        } else {
                            SurdScalar::zero()
                        };
                        assert_eq!(acc, want, "j1={j1} j2={j2} j3={j3} j3'={j3b} m3={m3}");
                    }
                }
            }
        }
    }
}

#[test]
fn spot_values() {
    let v = wigner3j(&SpinTriple::integer(1, 1, 0, 0, 0, 0).unwrap()).unwrap();
    assert_eq!(v, SurdScalar::normalize(3u32, rational(-1, 3)));
    assert!(wigner3j(&SpinTriple::integer(1, 1, 1, 0, 0, 0).unwrap()).unwrap().is_zero());
    assert!(wigner3j(&SpinTriple::integer(1, 2, 4, 0, 0, 0).unwrap()).unwrap().is_zero());
    let cg = clebsch_gordan(&SpinTriple::doubled(1, 1, 2, 1, -1, 0).unwrap()).unwrap();
    assert_eq!(cg, SurdScalar::normalize(2u32, rational(1, 2)));
    assert_eq!(gaunt_normalized(1, 0, 1, 0, 2, 0).unwrap(), SurdScalar::normalize(5u32, rational(2, 5)));
    assert!(SpinTriple::integer(1, 1, 1, 2, 0, 0).is_err());
    assert!(SpinTriple::doubled(1, 1, 0, 0, 0, 0).is_err());
}

fn label() -> impl Strategy<Value = SpinTriple> {
    (0u32..7, 0u32..7, 0u32..7, any::<u32>(), any::<u32>(), any::<u32>()).prop_filter_map(
        "valid labels",
        |(a, b, c, p, q, r)| {
            let pick = |j: u32, s: u32| -(j as i32) + 2 * (s % (j + 1)) as i32;
            let (x, y) = (pick(a, p), pick(b, q));
            let z = pick(c, r);
            SpinTriple::doubled(a, b, c, x, y, z).ok()
        },
    )
}

proptest! {
    #[test]
    fn permutation_and_reflection_symmetry(t in label()) {
        let [a, b, c] = t.j;
        let [x, y, z] = t.m;
        let v = wigner3j(&t).unwrap();
        let odd_sign = if ((a + b + c) / 2) % 2 == 0 { v.clone() } else { -&v };
        let cyc = wigner3j(&SpinTriple::doubled(b, c, a, y, z, x).unwrap()).unwrap();
        prop_assert_eq!(&cyc, &v);
        if (a + b + c) % 2 == 0 {
            let swap = wigner3j(&SpinTriple::doubled(b, a, c, y, x, z).unwrap()).unwrap();
            prop_assert_eq!(&swap, &odd_sign);
            let flip = wigner3j(&SpinTriple::doubled(a, b, c, -x, -y, -z).unwrap()).unwrap();
            prop_assert_eq!(&flip, &odd_sign);
        }
    }

    #[test]
    fn clebsch_gordan_relation(t in label()) {
        let [a, b, c] = t.j;
        let [x, y, z] = t.m;
        if let Ok(s) = SpinTriple::doubled(a, b, c, x, y, -z) {
            let cg = clebsch_gordan(&s).unwrap();
            let w = wigner3j(&t).unwrap();
            let expo = (a as i32 - b as i32 - z) / 2;
            let sign = if expo.rem_euclid(2) == 0 { 1i64 } else { -1 };
            let want = &SurdScalar::normalize(c + 1, rational(sign, 1)) * &w;
            prop_assert_eq!(cg, want);
        }
    }
}
