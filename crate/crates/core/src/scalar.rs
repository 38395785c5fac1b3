//! Exact scalars: rationals, ℚ-linear combinations of square roots of
//! squarefree integers, and complex values over those.
//!
//! Square roots of distinct squarefree integers are linearly independent
//! over ℚ, so the canonical form (squarefree radicands, no zero
//! coefficients) makes equality and zero-testing structural.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::GkmError;

/// Exact rational number with big-integer numerator and denominator.
pub type Rational = BigRational;

/// Parses `"p"` or `"p/q"` into a rational.
pub fn parse_rational(s: &str) -> Result<Rational, GkmError> {
    let s = s.trim();
    let bad = || GkmError::Parse(format!("invalid rational {s:?}"));
    match s.split_once('/') {
        None => Ok(Rational::from_integer(BigInt::from_str(s).map_err(|_| bad())?)),
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
    }
}

/// Canonical `p` or `p/q` rendering of a rational.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn rational(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rational_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Splits `n` into `(s, f)` with `n = f² · s` and `s` squarefree.
///
/// Trial division; meant for the small radicands that enter from outside.
/// Products of canonical surds never need it (see [`SurdScalar::mul`]).
fn squarefree_split(n: &BigUint) -> (BigUint, BigUint) {
    let mut rest = n.clone();
    let mut square = BigUint::one();
    let mut free = BigUint::one();
    let mut p = BigUint::from(2u32);
    while &p * &p <= rest {
        let mut e = 0u32;
        while (&rest % &p).is_zero() {
            rest /= &p;
            e += 1;
        }
        if e > 0 {
            square *= p.pow(e / 2);
            if e % 2 == 1 {
                free *= &p;
            }
        }
        p += 1u32;
    }
    free *= rest;
    (free, square)
}

/// Finite sum `Σ_d q_d √d` over squarefree radicands `d ≥ 1`.
#[derive(Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct SurdScalar {
    terms: BTreeMap<BigUint, Rational>,
}

impl SurdScalar {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_rational(Rational::one())
    }

    pub fn from_rational(q: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !q.is_zero() {
            terms.insert(BigUint::one(), q);
        }
        Self { terms }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(rational_int(n))
    }

    /// `coeff · √radicand`, with square factors of the radicand pulled into
    /// the coefficient.
    pub fn normalize(radicand: impl Into<BigUint>, coeff: Rational) -> Self {
        let radicand = radicand.into();
        if coeff.is_zero() || radicand.is_zero() {
            return Self::zero();
        }
        let (free, square) = squarefree_split(&radicand);
        let coeff = coeff * Rational::from_integer(BigInt::from(square));
        let mut terms = BTreeMap::new();
        terms.insert(free, coeff);
        Self { terms }
    }

    /// Builds a single term from a radicand already known to be squarefree.
    pub(crate) fn from_squarefree(radicand: BigUint, coeff: Rational) -> Self {
        debug_assert!(!radicand.is_zero());
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(radicand, coeff);
        }
        Self { terms }
    }

    /// Exact `√q` for a nonnegative rational `q`.
    pub fn sqrt_rational(q: &Rational) -> Result<Self, GkmError> {
        if q.is_negative() {
            return Err(GkmError::InvalidInput(format!(
                "square root of negative rational {}",
                format_rational(q)
            )));
        }
        if q.is_zero() {
            return Ok(Self::zero());
        }
        // √(n/d) = √(n·d) / d
        let n = q.numer().magnitude().clone();
        let d = q.denom().magnitude().clone();
        let inv = Rational::new(BigInt::one(), BigInt::from(d.clone()));
        Ok(Self::normalize(n * d, inv))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .get(&BigUint::one())
                .is_some_and(|q| q.is_one())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BigUint, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// The rational value, if the scalar has no irrational part.
    pub fn as_rational(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&BigUint::one()).cloned(),
            _ => None,
        }
    }

    pub fn scale(&self, q: &Rational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(d, c)| (d.clone(), c * q)).collect(),
        }
    }

    /// Multiplicative inverse of a single-term surd `q√d`, i.e. `√d / (q·d)`.
    /// General inversion is not provided.
    pub fn inverse(&self) -> Option<Self> {
        if self.terms.len() != 1 {
            return None;
        }
        let (d, q) = self.terms.iter().next()?;
        let denom = q * Rational::from_integer(BigInt::from(d.clone()));
        Some(Self::from_squarefree(d.clone(), denom.recip()))
    }

    fn add_term(&mut self, radicand: BigUint, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(radicand) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Nearest double, via a 24-digit exact decimal expansion.
    pub fn to_f64(&self) -> f64 {
        if self.terms.is_empty() {
            return 0.0;
        }
        self.to_decimal(24).parse().unwrap_or(f64::NAN)
    }

    /// Exact decimal rounded to `sig` significant digits.
    pub fn to_significant(&self, sig: u32) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let magnitude = self.to_f64().abs().log10().floor() as i64;
        let places = (sig as i64 - 1 - magnitude).max(0) as u32;
        self.to_decimal(places)
    }

    /// Decimal expansion with `digits` places after the point, correctly
    /// rounded. Square roots are taken with integer arithmetic, so the
    /// result does not depend on floating-point precision.
    pub fn to_decimal(&self, digits: u32) -> String {
        let guard = 12u32;
        let max_coeff_digits = self
            .terms
            .values()
            .map(|q| {
                let n = q.numer().magnitude().bits();
                let d = q.denom().magnitude().bits();
                (n.saturating_sub(d) as f64 * std::f64::consts::LOG10_2).ceil() as u32
            })
            .max()
            .unwrap_or(0);
        let p = digits + guard + max_coeff_digits;
        let scale = BigUint::from(10u32).pow(p);
        let mut total = BigInt::zero();
        for (d, q) in &self.terms {
            let root = (d * &scale * &scale).sqrt();
            let scaled = BigInt::from(root) * q.numer();
            total += scaled.div_floor(q.denom());
        }
        // Round from p fractional digits down to `digits`.
        let drop = BigInt::from(10u32).pow(p - digits);
        let half: BigInt = &drop / 2;
        let negative = total.is_negative();
        let mag: BigInt = total.abs();
        let rounded: BigInt = (mag + &half) / &drop;
        let s = rounded.to_string();
        let width = digits as usize + 1;
        let s = format!("{s:0>width$}");
        let (int_part, frac_part) = s.split_at(s.len() - digits as usize);
        let sign = if negative && rounded.is_positive() { "-" } else { "" };
        if digits == 0 {
            format!("{sign}{int_part}")
        } else {
            format!("{sign}{int_part}.{frac_part}")
        }
    }
}

impl fmt::Display for SurdScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (d, q)) in self.terms.iter().enumerate() {
            let neg = q.is_negative();
            let mag = q.abs();
            if i == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            if d.is_one() {
                write!(f, "{}", format_rational(&mag))?;
            } else if mag.is_one() {
                write!(f, "√{d}")?;
            } else if mag.is_integer() {
                write!(f, "{}√{d}", mag.numer())?;
            } else {
                write!(f, "({})√{d}", format_rational(&mag))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for SurdScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Surd({self})")
    }
}

impl Add<&SurdScalar> for &SurdScalar {
    type Output = SurdScalar;
    fn add(self, rhs: &SurdScalar) -> SurdScalar {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for SurdScalar {
    type Output = SurdScalar;
    fn add(mut self, rhs: SurdScalar) -> SurdScalar {
        self += &rhs;
        self
    }
}

impl AddAssign<&SurdScalar> for SurdScalar {
    fn add_assign(&mut self, rhs: &SurdScalar) {
        for (d, q) in &rhs.terms {
            self.add_term(d.clone(), q.clone());
        }
    }
}

impl SubAssign<&SurdScalar> for SurdScalar {
    fn sub_assign(&mut self, rhs: &SurdScalar) {
        for (d, q) in &rhs.terms {
            self.add_term(d.clone(), -q);
        }
    }
}

impl Sub<&SurdScalar> for &SurdScalar {
    type Output = SurdScalar;
    fn sub(self, rhs: &SurdScalar) -> SurdScalar {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for SurdScalar {
    type Output = SurdScalar;
    fn sub(mut self, rhs: SurdScalar) -> SurdScalar {
        self -= &rhs;
        self
    }
}

impl Neg for &SurdScalar {
    type Output = SurdScalar;
    fn neg(self) -> SurdScalar {
        SurdScalar {
            terms: self.terms.iter().map(|(d, q)| (d.clone(), -q)).collect(),
        }
    }
}

impl Neg for SurdScalar {
    type Output = SurdScalar;
    fn neg(mut self) -> SurdScalar {
        for q in self.terms.values_mut() {
            *q = -q.clone();
        }
        self
    }
}

impl Mul<&SurdScalar> for &SurdScalar {
    type Output = SurdScalar;
    /// `(q₁√d₁)(q₂√d₂) = q₁q₂·g·√(d₁d₂/g²)` with `g = gcd(d₁, d₂)`; the
    /// radicand stays squarefree because `d₁/g` and `d₂/g` are coprime.
    fn mul(self, rhs: &SurdScalar) -> SurdScalar {
        let mut out = SurdScalar::zero();
        for (d1, q1) in &self.terms {
            for (d2, q2) in &rhs.terms {
                let g = d1.gcd(d2);
                let radicand = (d1 / &g) * (d2 / &g);
                let coeff = q1 * q2 * Rational::from_integer(BigInt::from(g));
                out.add_term(radicand, coeff);
            }
        }
        out
    }
}

impl Mul for SurdScalar {
    type Output = SurdScalar;
    fn mul(self, rhs: SurdScalar) -> SurdScalar {
        &self * &rhs
    }
}

impl From<Rational> for SurdScalar {
    fn from(q: Rational) -> Self {
        Self::from_rational(q)
    }
}

/// One `{radicand, num, den}` record of the JSON encoding. Numerator and
/// denominator are strings so they survive 64-bit JSON readers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurdRecord {
    pub radicand: RadicandRepr,
    pub num: String,
    pub den: String,
}

/// Radicands are written as JSON integers when they fit in 64 bits.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RadicandRepr {
    Small(u64),
    Big(String),
}

impl SurdScalar {
    pub fn to_records(&self) -> Vec<SurdRecord> {
        self.terms
            .iter()
            .map(|(d, q)| SurdRecord {
                radicand: match d.to_u64() {
                    Some(v) => RadicandRepr::Small(v),
                    None => RadicandRepr::Big(d.to_string()),
                },
                num: q.numer().to_string(),
                den: q.denom().to_string(),
            })
            .collect()
    }

    pub fn from_records(records: &[SurdRecord]) -> Result<Self, GkmError> {
        let mut out = SurdScalar::zero();
        for r in records {
            let d = match &r.radicand {
                RadicandRepr::Small(v) => BigUint::from(*v),
                RadicandRepr::Big(s) => BigUint::from_str(s)
                    .map_err(|_| GkmError::Parse(format!("invalid radicand {s:?}")))?,
            };
            if d.is_zero() {
                return Err(GkmError::Parse("radicand must be positive".into()));
            }
            let q = parse_rational(&format!("{}/{}", r.num, r.den))?;
            out += &SurdScalar::normalize(d, q);
        }
        Ok(out)
    }
}

impl Serialize for SurdScalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_records().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SurdScalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let records = Vec::<SurdRecord>::deserialize(deserializer)?;
        SurdScalar::from_records(&records).map_err(serde::de::Error::custom)
    }
}

/// `re + i·im` with surd components.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ComplexSurd {
    pub re: SurdScalar,
    pub im: SurdScalar,
}

impl ComplexSurd {
    pub fn new(re: SurdScalar, im: SurdScalar) -> Self {
        Self { re, im }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::real(SurdScalar::one())
    }

    pub fn i() -> Self {
        Self::imag(SurdScalar::one())
    }

    pub fn real(re: SurdScalar) -> Self {
        Self { re, im: SurdScalar::zero() }
    }

    pub fn imag(im: SurdScalar) -> Self {
        Self { re: SurdScalar::zero(), im }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: -&self.im }
    }

    pub fn scale_real(&self, s: &SurdScalar) -> Self {
        Self { re: &self.re * s, im: &self.im * s }
    }

    pub fn scale_rational(&self, q: &Rational) -> Self {
        Self { re: self.re.scale(q), im: self.im.scale(q) }
    }

    /// Multiplication by `i`.
    pub fn times_i(&self) -> Self {
        Self { re: -&self.im, im: self.re.clone() }
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

impl fmt::Display for ComplexSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "i·({})", self.im),
            (false, false) => write!(f, "({}) + i·({})", self.re, self.im),
        }
    }
}

impl fmt::Debug for ComplexSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Complex({self})")
    }
}

impl Add<&ComplexSurd> for &ComplexSurd {
    type Output = ComplexSurd;
    fn add(self, rhs: &ComplexSurd) -> ComplexSurd {
        ComplexSurd { re: &self.re + &rhs.re, im: &self.im + &rhs.im }
    }
}

impl AddAssign<&ComplexSurd> for ComplexSurd {
    fn add_assign(&mut self, rhs: &ComplexSurd) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl Sub<&ComplexSurd> for &ComplexSurd {
    type Output = ComplexSurd;
    fn sub(self, rhs: &ComplexSurd) -> ComplexSurd {
        ComplexSurd { re: &self.re - &rhs.re, im: &self.im - &rhs.im }
    }
}

impl Neg for &ComplexSurd {
    type Output = ComplexSurd;
    fn neg(self) -> ComplexSurd {
        ComplexSurd { re: -&self.re, im: -&self.im }
    }
}

impl Mul<&ComplexSurd> for &ComplexSurd {
    type Output = ComplexSurd;
    fn mul(self, rhs: &ComplexSurd) -> ComplexSurd {
        let re = &(&self.re * &rhs.re) - &(&self.im * &rhs.im);
        let im = &(&self.re * &rhs.im) + &(&self.im * &rhs.re);
        ComplexSurd { re, im }
    }
}

impl From<SurdScalar> for ComplexSurd {
    fn from(re: SurdScalar) -> Self {
        Self::real(re)
    }
}
