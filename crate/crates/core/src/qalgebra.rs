//! Exact rationals and univariate polynomials in the deformation parameter `q`.
//!
//! Every moment the engine produces is a [`QPoly`]: a dense polynomial in `q`
//! with arbitrary-precision rational coefficients, constant term first.
//! Quantities carrying an irrational amplitude are wrapped in a [`Surd`].

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Arbitrary-precision rational number, always kept in lowest terms.
pub type Rational = BigRational;

/// Builds the rational `num/den`.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Builds an integral rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"0.3"` or `"-1.25"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        if !whole_digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let digits: BigInt = format!("{whole_digits}{frac}").parse().map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let value = Rational::new(digits, den);
        return Ok(if negative { -value } else { value });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Polynomial in `q` with exact rational coefficients.
///
/// Canonical form: no trailing zero coefficient, so the zero polynomial has an
/// empty coefficient list and [`QPoly::degree`] returns `None` for it.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct QPoly {
    coeffs: Vec<Rational>,
}

impl QPoly {
    pub fn zero() -> Self {
        QPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    /// The polynomial `q`.
    pub fn q() -> Self {
        Self::monomial(Rational::one(), 1)
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// `c * q^degree`.
    pub fn monomial(c: Rational, degree: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); degree + 1];
        coeffs[degree] = c;
        Self::from_coeffs(coeffs)
    }

    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        QPoly { coeffs }
    }

    pub fn from_integers(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| int(c)).collect())
    }

    /// Generating polynomial of a histogram: `sum_d counts[d] * q^d`.
    pub fn from_counts(counts: &[u64]) -> Self {
        Self::from_coeffs(
            counts
                .iter()
                .map(|&c| Rational::from_integer(BigInt::from(c)))
                .collect(),
        )
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Coefficient of `q^i` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Exact evaluation, with the convention `0^0 = 1`.
    pub fn eval(&self, q0: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * q0 + c)
    }

    pub fn eval_f64(&self, q0: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * q0 + rational_to_f64(c))
    }

    pub fn scale(&self, c: &Rational) -> QPoly {
        if c.is_zero() {
            return QPoly::zero();
        }
        QPoly {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> QPoly {
        let mut base = self.clone();
        let mut acc = QPoly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// The polynomial `p(q^k)`.
    pub fn substitute_power(&self, k: usize) -> QPoly {
        if k == 0 {
            let total = self.coeffs.iter().fold(Rational::zero(), |a, c| a + c);
            return QPoly::constant(total);
        }
        let mut coeffs = vec![Rational::zero(); self.coeffs.len().saturating_sub(1) * k + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * k] = c.clone();
        }
        QPoly::from_coeffs(coeffs)
    }

    /// JSON text form: an array of coefficient strings, constant term first.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("string array serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<QPoly> {
        Ok(serde_json::from_str(s)?)
    }

    fn add_into(&mut self, other: &QPoly) {
        if self.coeffs.len() < other.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), Rational::zero());
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
    }
}

impl Serialize for QPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let strings: Vec<String> = self.coeffs.iter().map(ToString::to_string).collect();
        strings.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for QPoly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let strings = Vec::<String>::deserialize(deserializer)?;
        let coeffs = strings
            .iter()
            .map(|s| parse_rational(s).map_err(D::Error::custom))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(QPoly::from_coeffs(coeffs))
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let negative = c.is_negative();
            let mag = c.abs();
            if first {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative { '-' } else { '+' })?;
            }
            first = false;
            let unit = mag.is_one();
            match i {
                0 => write!(f, "{mag}")?,
                _ if unit => {}
                _ => write!(f, "{mag}*")?,
            }
            match i {
                0 => {}
                1 => write!(f, "q")?,
                _ => write!(f, "q^{i}")?,
            }
        }
        Ok(())
    }
}

impl Add<&QPoly> for &QPoly {
    type Output = QPoly;
    fn add(self, rhs: &QPoly) -> QPoly {
        let mut out = self.clone();
        out.add_into(rhs);
        out
    }
}

impl Add for QPoly {
    type Output = QPoly;
    fn add(mut self, rhs: QPoly) -> QPoly {
        self.add_into(&rhs);
        self
    }
}

impl AddAssign<&QPoly> for QPoly {
    fn add_assign(&mut self, rhs: &QPoly) {
        self.add_into(rhs);
    }
}

impl AddAssign for QPoly {
    fn add_assign(&mut self, rhs: QPoly) {
        self.add_into(&rhs);
    }
}

impl Neg for QPoly {
    type Output = QPoly;
    fn neg(self) -> QPoly {
        QPoly {
            coeffs: self.coeffs.into_iter().map(|c| -c).collect(),
        }
    }
}

impl Sub<&QPoly> for &QPoly {
    type Output = QPoly;
    fn sub(self, rhs: &QPoly) -> QPoly {
        self + &(-rhs.clone())
    }
}

impl Sub for QPoly {
    type Output = QPoly;
    fn sub(self, rhs: QPoly) -> QPoly {
        self + (-rhs)
    }
}

impl Mul<&QPoly> for &QPoly {
    type Output = QPoly;
    fn mul(self, rhs: &QPoly) -> QPoly {
        if self.is_zero() || rhs.is_zero() {
            return QPoly::zero();
        }
        let mut coeffs = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        QPoly::from_coeffs(coeffs)
    }
}

impl Mul for QPoly {
    type Output = QPoly;
    fn mul(self, rhs: QPoly) -> QPoly {
        &self * &rhs
    }
}

impl Sum for QPoly {
    fn sum<I: Iterator<Item = QPoly>>(iter: I) -> QPoly {
        iter.fold(QPoly::zero(), |acc, p| acc + p)
    }
}

impl From<Rational> for QPoly {
    fn from(c: Rational) -> Self {
        QPoly::constant(c)
    }
}

/// The q-integer `[n]_q = 1 + q + ... + q^(n-1)`; `n = 0` is rejected.
pub fn q_integer(n: usize) -> Result<QPoly> {
    if n == 0 {
        return Err(Error::ContractViolation("q_integer requires n >= 1".into()));
    }
    Ok(QPoly::from_coeffs(vec![Rational::one(); n]))
}

/// The q-factorial `[n]_q! = [1]_q [2]_q ... [n]_q` (the empty product for `n = 0`).
pub fn q_factorial(n: usize) -> QPoly {
    (1..=n).fold(QPoly::one(), |acc, j| &acc * &q_integer(j).expect("j >= 1"))
}

/// Gaussian binomial coefficient, by the q-Pascal rule
/// `[n, k] = [n-1, k-1] + q^k [n-1, k]`.
pub fn q_binomial(n: usize, k: usize) -> QPoly {
    if k > n {
        return QPoly::zero();
    }
    let mut row = vec![QPoly::one()];
    for i in 1..=n {
        let mut next = vec![QPoly::zero(); i + 1];
        for (j, slot) in next.iter_mut().enumerate() {
            if j >= 1 {
                *slot += &row[j - 1];
            }
            if j < i {
                *slot += &row[j] * &QPoly::monomial(Rational::one(), j);
            }
        }
        row = next;
    }
    row.swap_remove(k)
}

/// Values that can absorb a rational factor: the coefficient types of a [`Surd`].
pub trait Scalable: Clone + PartialEq {
    fn scaled(&self, c: &Rational) -> Self;
    fn is_zero_value(&self) -> bool;
}

impl Scalable for Rational {
    fn scaled(&self, c: &Rational) -> Self {
        self * c
    }
    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }
}

impl Scalable for QPoly {
    fn scaled(&self, c: &Rational) -> Self {
        self.scale(c)
    }
    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }
}

/// `value * sqrt(radicand)` with a positive integral radicand stripped of the
/// square factors it was practical to find.
///
/// Kernels with an irrational amplitude `sqrt(c)` produce these; products of an
/// even number of such kernels come back with radicand 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Surd<T> {
    value: T,
    radicand: BigInt,
}

impl<T: Scalable> Surd<T> {
    /// Canonicalizes `value * sqrt(radicand)`; `radicand` must be nonnegative.
    pub fn new(value: T, radicand: &Rational) -> Self {
        assert!(!radicand.is_negative(), "negative radicand");
        if radicand.is_zero() || value.is_zero_value() {
            return Surd {
                value: value.scaled(&Rational::zero()),
                radicand: BigInt::one(),
            };
        }
        // sqrt(p/q) = sqrt(p*q) / q
        let num = radicand.numer() * radicand.denom();
        let (outer, inner) = square_split(&num);
        let factor = Rational::new(outer, radicand.denom().clone());
        Surd {
            value: value.scaled(&factor),
            radicand: inner,
        }
    }

    pub fn rational(value: T) -> Self {
        Surd {
            value,
            radicand: BigInt::one(),
        }
    }

    pub fn value(&self) -> &T {
        &self.value
    }

    pub fn radicand(&self) -> &BigInt {
        &self.radicand
    }

    pub fn is_rational(&self) -> bool {
        self.radicand.is_one()
    }

    /// The value when no irrational factor remains.
    pub fn as_rational(&self) -> Option<&T> {
        self.is_rational().then_some(&self.value)
    }

    pub fn into_parts(self) -> (T, BigInt) {
        (self.value, self.radicand)
    }
}

impl Surd<QPoly> {
    pub fn eval(&self, q0: &Rational) -> Surd<Rational> {
        Surd {
            value: self.value.eval(q0),
            radicand: self.radicand.clone(),
        }
    }

    pub fn eval_f64(&self, q0: f64) -> f64 {
        self.value.eval_f64(q0) * self.radicand.to_f64().unwrap_or(f64::NAN).sqrt()
    }
}

impl Surd<Rational> {
    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.value) * self.radicand.to_f64().unwrap_or(f64::NAN).sqrt()
    }
}

impl<T: fmt::Display> fmt::Display for Surd<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.radicand.is_one() {
            write!(f, "{}", self.value)
        } else {
            write!(f, "({})*sqrt({})", self.value, self.radicand)
        }
    }
}

/// Splits `n >= 0` as `outer^2 * inner`, removing square factors found by
/// trial division and a final perfect-square test.
fn square_split(n: &BigInt) -> (BigInt, BigInt) {
    debug_assert!(n.sign() != Sign::Minus);
    let mut outer = BigInt::one();
    let mut inner = n.clone();
    let mut d = BigInt::from(2u32);
    let limit = BigInt::from(10_000u32);
    while &d * &d <= inner && d <= limit {
        let sq = &d * &d;
        while (&inner % &sq).is_zero() {
            inner /= &sq;
            outer *= &d;
        }
        d += 1u32;
    }
    let root = inner.sqrt();
    if &root * &root == inner {
        outer *= root;
        inner = BigInt::one();
    }
    (outer, inner)
}
