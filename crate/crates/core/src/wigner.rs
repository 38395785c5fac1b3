//! Exact Wigner 3j symbols, Clebsch-Gordan coefficients and normalised
//! triple-product (Gaunt) coefficients.
//!
//! Every 3j symbol is a single surd `q·√d`: Racah's alternating sum is a
//! rational and the factorial prefactor is the square root of a rational,
//! whose squarefree part is read off its prime factorisation.

use std::collections::HashMap;
use std::path::Path;
use std::sync::{OnceLock, RwLock};

use dashmap::DashMap;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{GkmError, Result};
use crate::scalar::{Rational, SurdScalar};

/// Angular-momentum labels `(j1 j2 j3; m1 m2 m3)`, all stored doubled so
/// half-integers are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpinTriple {
    pub j: [u32; 3],
    pub m: [i32; 3],
}

impl SpinTriple {
    /// Labels given as doubled integers (`1` means ½).
    pub fn doubled(j1: u32, j2: u32, j3: u32, m1: i32, m2: i32, m3: i32) -> Result<Self> {
        let t = Self { j: [j1, j2, j3], m: [m1, m2, m3] };
        t.validate()?;
        Ok(t)
    }

    /// Integer labels.
    pub fn integer(j1: u32, j2: u32, j3: u32, m1: i32, m2: i32, m3: i32) -> Result<Self> {
        Self::doubled(2 * j1, 2 * j2, 2 * j3, 2 * m1, 2 * m2, 2 * m3)
    }

    fn validate(&self) -> Result<()> {
        for i in 0..3 {
            let (j, m) = (self.j[i] as i64, self.m[i] as i64);
            if m.abs() > j {
                return Err(GkmError::InvalidInput(format!(
                    "|m{}| > j{} in {}",
                    i + 1,
                    i + 1,
                    self.describe()
                )));
            }
            if (j + m) % 2 != 0 {
                return Err(GkmError::InvalidInput(format!(
                    "j{} and m{} differ by a non-integer in {}",
                    i + 1,
                    i + 1,
                    self.describe()
                )));
            }
        }
        Ok(())
    }

    fn describe(&self) -> String {
        let h = |x: i64| {
            if x % 2 == 0 {
                (x / 2).to_string()
            } else {
                format!("{x}/2")
            }
        };
        format!(
            "({} {} {}; {} {} {})",
            h(self.j[0] as i64),
            h(self.j[1] as i64),
            h(self.j[2] as i64),
            h(self.m[0] as i64),
            h(self.m[1] as i64),
            h(self.m[2] as i64)
        )
    }

    fn selection_rules_hold(&self) -> bool {
        let [j1, j2, j3] = self.j.map(|x| x as i64);
        self.m.iter().map(|&x| x as i64).sum::<i64>() == 0
            && (j1 + j2 + j3) % 2 == 0
            && j3 <= j1 + j2
            && j1 <= j2 + j3
            && j2 <= j1 + j3
    }

    /// Symmetry-reduced representative and the sign relating the two.
    /// Column permutations and the overall flip `m → −m` each contribute
    /// `(−1)^{j1+j2+j3}` when odd.
    fn canonical(&self) -> (SpinTriple, bool) {
        const PERMS: [([usize; 3], bool); 6] = [
            ([0, 1, 2], false),
            ([1, 2, 0], false),
            ([2, 0, 1], false),
            ([1, 0, 2], true),
            ([0, 2, 1], true),
            ([2, 1, 0], true),
        ];
        let odd_total = ((self.j.iter().sum::<u32>() / 2) % 2) == 1;
        let mut best: Option<(SpinTriple, bool)> = None;
        for (p, odd_perm) in PERMS {
            for flip in [false, true] {
                let s = if flip { -1 } else { 1 };
                let cand = SpinTriple {
                    j: [self.j[p[0]], self.j[p[1]], self.j[p[2]]],
                    m: [s * self.m[p[0]], s * self.m[p[1]], s * self.m[p[2]]],
                };
                let negate = odd_total && (odd_perm ^ flip);
                if best.as_ref().is_none_or(|(b, _)| cand < *b) {
                    best = Some((cand, negate));
                }
            }
        }
        best.expect("at least one candidate")
    }
}

fn factorial(n: u32) -> BigUint {
    static TABLE: OnceLock<RwLock<Vec<BigUint>>> = OnceLock::new();
    let table = TABLE.get_or_init(|| RwLock::new(vec![BigUint::one()]));
    {
        let t = table.read().expect("factorial table poisoned");
        if let Some(v) = t.get(n as usize) {
            return v.clone();
        }
    }
    let mut t = table.write().expect("factorial table poisoned");
    while t.len() <= n as usize {
        let k = t.len() as u32;
        let next = &t[t.len() - 1] * BigUint::from(k);
        t.push(next);
    }
    t[n as usize].clone()
}

fn primes_up_to(n: u32) -> Vec<u32> {
    if n < 2 {
        return Vec::new();
    }
    let mut sieve = vec![true; n as usize + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2usize;
    while i * i <= n as usize {
        if sieve[i] {
            for k in (i * i..=n as usize).step_by(i) {
                sieve[k] = false;
            }
        }
        i += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter_map(|(p, &is_p)| is_p.then_some(p as u32))
        .collect()
}

/// Exponent of prime `p` in `n!` (Legendre).
fn legendre_exponent(mut n: u32, p: u32) -> i64 {
    let mut e = 0i64;
    while n >= p {
        n /= p;
        e += n as i64;
    }
    e
}

/// `√(Π num_i! / Π den_i!)` as an exact single-term surd.
fn sqrt_factorial_ratio(num: &[u32], den: &[u32]) -> SurdScalar {
    let max = num.iter().chain(den).copied().max().unwrap_or(0);
    let mut rat_num = BigUint::one();
    let mut rat_den = BigUint::one();
    let mut radicand = BigUint::one();
    for p in primes_up_to(max) {
        let e: i64 = num.iter().map(|&n| legendre_exponent(n, p)).sum::<i64>()
            - den.iter().map(|&n| legendre_exponent(n, p)).sum::<i64>();
        let half = Integer::div_floor(&e, &2);
        let odd = Integer::mod_floor(&e, &2);
        let bp = BigUint::from(p);
        if half > 0 {
            rat_num *= bp.pow(half as u32);
        } else if half < 0 {
            rat_den *= bp.pow((-half) as u32);
        }
        if odd == 1 {
            radicand *= bp;
        }
    }
    SurdScalar::from_squarefree(
        radicand,
        Rational::new(BigInt::from(rat_num), BigInt::from(rat_den)),
    )
}

fn racah_3j(t: &SpinTriple) -> SurdScalar {
    if !t.selection_rules_hold() {
        return SurdScalar::zero();
    }
    // Undoubled integer combinations; all are integers once the selection
    // rules hold.
    let [dj1, dj2, dj3] = t.j.map(|x| x as i64);
    let [dm1, dm2, dm3] = t.m.map(|x| x as i64);
    let h = |x: i64| -> i64 {
        debug_assert!(x % 2 == 0);
        x / 2
    };
    let a = h(dj1 + dj2 - dj3);
    let b = h(dj1 - dj2 + dj3);
    let c = h(-dj1 + dj2 + dj3);
    let big = h(dj1 + dj2 + dj3) + 1;
    let mfacts = [
        h(dj1 + dm1),
        h(dj1 - dm1),
        h(dj2 + dm2),
        h(dj2 - dm2),
        h(dj3 + dm3),
        h(dj3 - dm3),
    ];

    let s1 = h(dj3 - dj2 + dm1);
    let s2 = h(dj3 - dj1 - dm2);
    let s3 = a;
    let s4 = h(dj1 - dm1);
    let s5 = h(dj2 + dm2);
    let kmin = 0.max(-s1).max(-s2);
    let kmax = s3.min(s4).min(s5);
    if kmin > kmax {
        return SurdScalar::zero();
    }
    let mut sum = Rational::zero();
    for k in kmin..=kmax {
        let denom = factorial(k as u32)
            * factorial((s1 + k) as u32)
            * factorial((s2 + k) as u32)
            * factorial((s3 - k) as u32)
            * factorial((s4 - k) as u32)
            * factorial((s5 - k) as u32);
        let sign = if k % 2 == 0 { BigInt::one() } else { -BigInt::one() };
        sum += BigRational::new(sign, BigInt::from(denom));
    }
    if sum.is_zero() {
        return SurdScalar::zero();
    }
    let phase_exp = h(dj1 - dj2 - dm3);
    if phase_exp.rem_euclid(2) == 1 {
        sum = -sum;
    }
    let mut num: Vec<u32> = vec![a as u32, b as u32, c as u32];
    num.extend(mfacts.iter().map(|&x| x as u32));
    let prefactor = sqrt_factorial_ratio(&num, &[big as u32]);
    prefactor.scale(&sum)
}

fn cache() -> &'static DashMap<SpinTriple, SurdScalar> {
    static CACHE: OnceLock<DashMap<SpinTriple, SurdScalar>> = OnceLock::new();
    CACHE.get_or_init(DashMap::new)
}

/// Exact Wigner 3j symbol. Zero whenever the triangle rule, integrality of
/// `j1+j2+j3` or `m1+m2+m3 = 0` fails.
pub fn wigner3j(t: &SpinTriple) -> Result<SurdScalar> {
    t.validate()?;
    if !t.selection_rules_hold() {
        return Ok(SurdScalar::zero());
    }
    let (key, negate) = t.canonical();
    let value = match cache().get(&key) {
        Some(v) => v.clone(),
        None => {
            let v = racah_3j(&key);
            cache().insert(key, v.clone());
            v
        }
    };
    Ok(if negate { -value } else { value })
}

/// `⟨j1 m1; j2 m2 | j3 m3⟩ = (−1)^{j1−j2+m3} √(2j3+1) (j1 j2 j3; m1 m2 −m3)`.
pub fn clebsch_gordan(t: &SpinTriple) -> Result<SurdScalar> {
    t.validate()?;
    if t.m[0] + t.m[1] != t.m[2] {
        return Ok(SurdScalar::zero());
    }
    let threej = wigner3j(&SpinTriple { j: t.j, m: [t.m[0], t.m[1], -t.m[2]] })?;
    if threej.is_zero() {
        return Ok(threej);
    }
    let phase = (t.j[0] as i64 - t.j[1] as i64 + t.m[2] as i64) / 2;
    let dim = SurdScalar::normalize(t.j[2] + 1, Rational::one());
    let v = &dim * &threej;
    Ok(if phase.rem_euclid(2) == 1 { -v } else { v })
}

/// Coefficient of `ρ_{l3 m3}` in `ρ_{l1 m1}·ρ_{l2 m2}` for the orthonormal
/// sphere basis `ρ_{lm} = √(4π)·Y_{lm}` under the unit-mass measure:
/// `(−1)^{m3} √((2l1+1)(2l2+1)(2l3+1)) (l1 l2 l3; 0 0 0)(l1 l2 l3; m1 m2 −m3)`.
pub fn gaunt_normalized(l1: u32, m1: i32, l2: u32, m2: i32, l3: u32, m3: i32) -> Result<SurdScalar> {
    let t = SpinTriple::integer(l1, l2, l3, m1, m2, -m3)?;
    if m1 + m2 != m3 || (l1 + l2 + l3) % 2 == 1 {
        return Ok(SurdScalar::zero());
    }
    let zonal = wigner3j(&SpinTriple::integer(l1, l2, l3, 0, 0, 0)?)?;
    if zonal.is_zero() {
        return Ok(zonal);
    }
    let general = wigner3j(&t)?;
    let dims = SurdScalar::normalize(
        (2 * l1 + 1) * (2 * l2 + 1) * (2 * l3 + 1),
        Rational::one(),
    );
    let v = &(&dims * &zonal) * &general;
    Ok(if m3.rem_euclid(2) == 1 { -v } else { v })
}

/// Number of memoised 3j symbols.
pub fn cache_len() -> usize {
    cache().len()
}

const CACHE_FILE: &str = "wigner3j.json";

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    triple: SpinTriple,
    value: SurdScalar,
}

/// Writes the memoised symbols to `<dir>/wigner3j.json`.
pub fn save_cache(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut entries: Vec<CacheEntry> = cache()
        .iter()
        .map(|e| CacheEntry { triple: *e.key(), value: e.value().clone() })
        .collect();
    entries.sort_by_key(|e| e.triple);
    let file = std::fs::File::create(dir.join(CACHE_FILE))?;
    serde_json::to_writer(std::io::BufWriter::new(file), &entries)?;
    Ok(())
}

/// Loads symbols saved by [`save_cache`]. Entries are recomputed-free but
/// still keyed canonically; a missing file is not an error.
pub fn load_cache(dir: &Path) -> Result<usize> {
    let path = dir.join(CACHE_FILE);
    if !path.exists() {
        return Ok(0);
    }
    let file = std::fs::File::open(path)?;
    let entries: Vec<CacheEntry> = serde_json::from_reader(std::io::BufReader::new(file))?;
    let mut seen = HashMap::new();
    for e in entries {
        e.triple.validate()?;
        let (key, negate) = e.triple.canonical();
        let v = if negate { -e.value } else { e.value };
        seen.insert(key, v);
    }
    let n = seen.len();
    for (k, v) in seen {
        cache().insert(k, v);
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;

    fn surd(d: u64, n: i64, den: i64) -> SurdScalar {
        SurdScalar::normalize(d, rational(n, den))
    }

    #[test]
    fn spot_values() {
        let t = SpinTriple::integer(1, 1, 0, 0, 0, 0).unwrap();
        assert_eq!(wigner3j(&t).unwrap(), surd(3, -1, 3));
        let t = SpinTriple::integer(1, 1, 1, 0, 0, 0).unwrap();
        assert!(wigner3j(&t).unwrap().is_zero());
        let t = SpinTriple::integer(1, 2, 4, 0, 0, 0).unwrap();
        assert!(wigner3j(&t).unwrap().is_zero());
    }

    #[test]
    fn malformed_labels_rejected() {
        assert!(SpinTriple::integer(1, 1, 1, 2, 0, 0).is_err());
        assert!(SpinTriple::doubled(1, 1, 0, 0, 1, -1).is_err());
        assert!(gaunt_normalized(1, 2, 1, 0, 2, 2).is_err());
    }

    #[test]
    fn clebsch_gordan_values() {
        let t = SpinTriple::doubled(1, 1, 2, 1, -1, 0).unwrap();
        assert_eq!(clebsch_gordan(&t).unwrap(), surd(2, 1, 2));
        for j in 0..4u32 {
            for m in -(j as i32)..=(j as i32) {
                let t = SpinTriple::integer(j, 0, j, m, 0, m).unwrap();
                assert!(clebsch_gordan(&t).unwrap().is_one());
            }
        }
        let t = SpinTriple::integer(1, 1, 1, 1, 0, 0).unwrap();
        assert!(clebsch_gordan(&t).unwrap().is_zero());
    }

    #[test]
    fn gaunt_values() {
        assert_eq!(gaunt_normalized(1, 0, 1, 0, 2, 0).unwrap(), surd(5, 2, 5));
        assert!(gaunt_normalized(1, 0, 1, 0, 3, 0).unwrap().is_zero());
        for l in 0..4u32 {
            for m in -(l as i32)..=(l as i32) {
                assert!(gaunt_normalized(0, 0, l, m, l, m).unwrap().is_one());
            }
        }
    }

    #[test]
    fn canonicalisation_preserves_value() {
        // Compare cached (canonical) lookups against direct Racah evaluation.
        for dj1 in 0..5u32 {
            for dj2 in 0..5u32 {
                for dj3 in 0..5u32 {
                    for dm1 in -(dj1 as i32)..=(dj1 as i32) {
                        for dm2 in -(dj2 as i32)..=(dj2 as i32) {
                            let dm3 = -dm1 - dm2;
                            let Ok(t) = SpinTriple::doubled(dj1, dj2, dj3, dm1, dm2, dm3) else {
                                continue;
                            };
                            assert_eq!(wigner3j(&t).unwrap(), racah_3j(&t), "{t:?}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn cache_round_trip_through_disk() {
        let t = SpinTriple::doubled(3, 3, 2, 1, -3, 2).unwrap();
        let v = wigner3j(&t).unwrap();
        let dir = std::env::temp_dir().join(format!("gkm-wigner-{}", std::process::id()));
        save_cache(&dir).unwrap();
        assert!(load_cache(&dir).unwrap() > 0);
        assert_eq!(wigner3j(&t).unwrap(), v);
        let _ = std::fs::remove_dir_all(dir);
    }
}
