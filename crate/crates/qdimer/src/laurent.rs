//! Exact Laurent polynomials in a fractional power of `q`.
//!
//! A [`QLaurent`] stores `Σ c_k q^{k/d}` with big-integer coefficients. The
//! denominator `d` is reduced on construction so equal values compare equal.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LaurentError {
    #[error("not divisible: remainder {remainder}")]
    NotDivisible { remainder: QLaurent },
    #[error("division by zero polynomial")]
    DivisionByZero,
    #[error("evaluation at q = 0")]
    ZeroPoint,
    #[error("parse error: {0}")]
    Parse(String),
}

pub type LaurentResult<T> = Result<T, LaurentError>;

/// Exact Laurent polynomial in `q^{1/denom}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QLaurent {
    denom: u32,
    terms: BTreeMap<i64, BigInt>,
}

impl Default for QLaurent {
    fn default() -> Self {
        QLaurent::zero()
    }
}

fn gcd_i64(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

impl QLaurent {
    /// Builds a value from raw `(k, c)` pairs meaning `c q^{k/denom}`; repeated
    /// exponents are summed.
    pub fn from_terms<I>(denom: u32, terms: I) -> Self
    where
        I: IntoIterator<Item = (i64, BigInt)>,
    {
        assert!(denom > 0, "denominator must be positive");
        let mut map: BTreeMap<i64, BigInt> = BTreeMap::new();
        for (k, c) in terms {
            *map.entry(k).or_insert_with(BigInt::zero) += c;
        }
        let mut out = QLaurent { denom, terms: map };
        out.normalize();
        out
    }

    fn normalize(&mut self) {
        self.terms.retain(|_, c| !c.is_zero());
        if self.terms.is_empty() {
            self.denom = 1;
            return;
        }
        let mut g = self.denom as i64;
        for &k in self.terms.keys() {
            g = gcd_i64(g, k);
            if g == 1 {
                return;
            }
        }
        if g > 1 {
            let terms = std::mem::take(&mut self.terms);
            self.terms = terms.into_iter().map(|(k, c)| (k / g, c)).collect();
            self.denom /= g as u32;
        }
    }

    pub fn zero() -> Self {
        QLaurent {
            denom: 1,
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::constant(1)
    }

    pub fn constant<T: Into<BigInt>>(c: T) -> Self {
        Self::from_terms(1, [(0, c.into())])
    }

    /// `c · q^{k/d}`.
    pub fn monomial<T: Into<BigInt>>(c: T, k: i64, d: u32) -> Self {
        Self::from_terms(d, [(k, c.into())])
    }

    /// `q^k` for integer `k`.
    pub fn qpow(k: i64) -> Self {
        Self::monomial(1, k, 1)
    }

    /// The variable `q`.
    pub fn q() -> Self {
        Self::qpow(1)
    }

    pub fn denom(&self) -> u32 {
        self.denom
    }

    /// Terms as `(k, c)` with value `c q^{k/denom}`, ascending in `k`.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigInt)> {
        self.terms.iter().map(|(k, c)| (*k, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&0).is_some_and(|c| c.is_one())
    }

    /// Coefficient of `q^{num/den}`.
    pub fn coeff(&self, num: i64, den: u32) -> BigInt {
        let lhs = num as i128 * self.denom as i128;
        if lhs % den as i128 != 0 {
            return BigInt::zero();
        }
        let k = (lhs / den as i128) as i64;
        self.terms.get(&k).cloned().unwrap_or_default()
    }

    /// Coefficient of `q^k` for integer `k`.
    pub fn coeff_int(&self, k: i64) -> BigInt {
        self.coeff(k, 1)
    }

    /// Smallest and largest exponent, as rationals.
    pub fn degree_range(&self) -> Option<(Ratio<i64>, Ratio<i64>)> {
        let lo = *self.terms.keys().next()?;
        let hi = *self.terms.keys().next_back()?;
        let d = self.denom as i64;
        Some((Ratio::new(lo, d), Ratio::new(hi, d)))
    }

    /// Whether every exponent is an integer.
    pub fn is_integral_in_q(&self) -> bool {
        self.denom == 1
    }

    pub fn all_coeffs_nonnegative(&self) -> bool {
        self.terms.values().all(|c| !c.is_negative())
    }

    /// `Some((c, k, d))` when the value is a single term `c q^{k/d}`.
    pub fn as_monomial(&self) -> Option<(&BigInt, i64, u32)> {
        if self.terms.len() == 1 {
            let (k, c) = self.terms.iter().next().unwrap();
            Some((c, *k, self.denom))
        } else {
            None
        }
    }

    /// Inverse in the Laurent ring, which exists only for `±q^{k/d}`.
    pub fn inverse(&self) -> Option<QLaurent> {
        let (c, k, d) = self.as_monomial()?;
        if c.is_one() || (-c).is_one() {
            Some(QLaurent::monomial(c.clone(), -k, d))
        } else {
            None
        }
    }

    fn rescaled(&self, d: u32) -> BTreeMap<i64, BigInt> {
        let f = (d / self.denom) as i64;
        self.terms.iter().map(|(k, c)| (k * f, c.clone())).collect()
    }

    fn common_denom(a: &QLaurent, b: &QLaurent) -> u32 {
        let (x, y) = (a.denom as u64, b.denom as u64);
        x.lcm(&y) as u32
    }

    /// Multiplies by `q^{num/den}`.
    pub fn scale_by_power(&self, num: i64, den: u32) -> QLaurent {
        let d = (self.denom as u64).lcm(&(den as u64)) as u32;
        let shift = num * (d / den) as i64;
        let f = (d / self.denom) as i64;
        QLaurent::from_terms(
            d,
            self.terms.iter().map(|(k, c)| (k * f + shift, c.clone())),
        )
    }

    /// Multiplies by an integer scalar.
    pub fn scale(&self, c: &BigInt) -> QLaurent {
        if c.is_zero() {
            return QLaurent::zero();
        }
        QLaurent {
            denom: self.denom,
            terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> QLaurent {
        let mut acc = QLaurent::one();
        let mut base = self.clone();
        let mut e = e;
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

    /// The bar involution `q ↦ q^{-1}`.
    pub fn bar(&self) -> QLaurent {
        QLaurent {
            denom: self.denom,
            terms: self.terms.iter().map(|(k, c)| (-*k, c.clone())).collect(),
        }
    }

    /// Invariance of the term map under `k ↦ -k`.
    pub fn is_symmetric(&self) -> bool {
        self.terms
            .iter()
            .all(|(k, c)| self.terms.get(&-k) == Some(c))
    }

    /// The shift `α` with `q^{-α} a` symmetric, if any. Zero yields `Some(0)`.
    pub fn palindromic_shift(&self) -> Option<Ratio<i64>> {
        let (lo, hi) = match (self.terms.keys().next(), self.terms.keys().next_back()) {
            (Some(&lo), Some(&hi)) => (lo, hi),
            _ => return Some(Ratio::from_integer(0)),
        };
        let s = lo + hi;
        let ok = self
            .terms
            .iter()
            .all(|(k, c)| self.terms.get(&(s - k)) == Some(c));
        if ok {
            Some(Ratio::new(s, 2 * self.denom as i64))
        } else {
            None
        }
    }

    /// Exact Laurent division; fails with the remainder when `b ∤ a`.
    pub fn exact_div(&self, b: &QLaurent) -> LaurentResult<QLaurent> {
        if b.is_zero() {
            return Err(LaurentError::DivisionByZero);
        }
        if self.is_zero() {
            return Ok(QLaurent::zero());
        }
        let d = Self::common_denom(self, b);
        let mut rem = self.rescaled(d);
        let div = b.rescaled(d);
        let (&b_lo, _) = div.iter().next().unwrap();
        let (&b_hi, b_lead) = div.iter().next_back().unwrap();
        let a_lo = *rem.keys().next().unwrap();
        let min_q = a_lo - b_lo;
        let mut quot: BTreeMap<i64, BigInt> = BTreeMap::new();
        while let Some((&r_hi, r_lead)) = rem.iter().next_back() {
            let qk = r_hi - b_hi;
            if qk < min_q {
                break;
            }
            let (qc, r) = r_lead.div_rem(b_lead);
            if !r.is_zero() {
                break;
            }
            for (k, c) in div.iter() {
                let e = rem.entry(k + qk).or_insert_with(BigInt::zero);
                *e -= &qc * c;
                if e.is_zero() {
                    rem.remove(&(k + qk));
                }
            }
            quot.insert(qk, qc);
        }
        if rem.is_empty() {
            Ok(QLaurent::from_terms(d, quot))
        } else {
            Err(LaurentError::NotDivisible {
                remainder: QLaurent::from_terms(d, rem),
            })
        }
    }

    /// Evaluates with `root = q^{1/denom}` supplied by the caller.
    pub fn eval_with_root(&self, root: Complex64) -> LaurentResult<Complex64> {
        if root == Complex64::new(0.0, 0.0) {
            return Err(LaurentError::ZeroPoint);
        }
        let (lo, hi) = match (self.terms.keys().next(), self.terms.keys().next_back()) {
            (Some(&lo), Some(&hi)) => (lo, hi),
            _ => return Ok(Complex64::new(0.0, 0.0)),
        };
        // Horner in ascending order on the shifted polynomial, then rescale.
        let mut acc = Complex64::new(0.0, 0.0);
        let mut prev = hi;
        for (k, c) in self.terms.iter().rev() {
            acc *= root.powi((prev - k) as i32);
            acc += Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0);
            prev = *k;
        }
        Ok(acc * root.powi(lo as i32))
    }

    /// Evaluates at `q0`, using the principal branch of `q0^{1/denom}`.
    pub fn eval_complex(&self, q0: Complex64) -> LaurentResult<Complex64> {
        if q0 == Complex64::new(0.0, 0.0) {
            return Err(LaurentError::ZeroPoint);
        }
        let root = if self.denom == 1 {
            q0
        } else {
            q0.powf(1.0 / self.denom as f64)
        };
        self.eval_with_root(root)
    }

    /// Value, first and second derivative at `q = 1`, exactly.
    pub fn derivs_at_one(&self) -> (BigRational, BigRational, BigRational) {
        let d = BigInt::from(self.denom);
        let mut v = BigRational::zero();
        let mut d1 = BigRational::zero();
        let mut d2 = BigRational::zero();
        for (k, c) in &self.terms {
            let e = BigRational::new(BigInt::from(*k), d.clone());
            let cr = BigRational::from_integer(c.clone());
            v += &cr;
            d1 += &cr * &e;
            d2 += &cr * &e * (&e - BigRational::one());
        }
        (v, d1, d2)
    }

    /// Value at `q = 1`.
    pub fn eval_at_one(&self) -> BigInt {
        self.terms.values().fold(BigInt::zero(), |a, c| a + c)
    }

    /// Canonical text: `c*q^(k/d)` terms ascending, joined by ` + `.
    pub fn to_text(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        self.terms
            .iter()
            .map(|(k, c)| format!("{}*q^({}/{})", c, k, self.denom))
            .collect::<Vec<_>>()
            .join(" + ")
    }

    /// Human-oriented rendering such as `q^-1 + 2 + q`.
    pub fn to_pretty(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (k, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let e = Ratio::new(*k, self.denom as i64);
            let var = if e.is_zero() {
                String::new()
            } else if e.is_one() {
                "q".to_string()
            } else if e.is_integer() {
                format!("q^{}", e.numer())
            } else {
                format!("q^({}/{})", e.numer(), e.denom())
            };
            if var.is_empty() {
                out.push_str(&a.to_string());
            } else if a.is_one() {
                out.push_str(&var);
            } else {
                out.push_str(&format!("{a}*{var}"));
            }
        }
        out
    }

    // Quantum numbers.

    /// `[k] = Σ_{i=1..k} q^{-k-1+2i}`, with `[0] = 0`.
    pub fn qint(k: u32) -> QLaurent {
        let k = k as i64;
        QLaurent::from_terms(1, (1..=k).map(|i| (-k - 1 + 2 * i, BigInt::one())))
    }

    /// `[k]! = [1][2]…[k]`.
    pub fn qfact(k: u32) -> QLaurent {
        (1..=k).fold(QLaurent::one(), |acc, j| &acc * &QLaurent::qint(j))
    }

    /// Quantum binomial coefficient by exact division.
    pub fn qbinom(m: u32, k: u32) -> LaurentResult<QLaurent> {
        if k > m {
            return Ok(QLaurent::zero());
        }
        let den = &QLaurent::qfact(k) * &QLaurent::qfact(m - k);
        QLaurent::qfact(m).exact_div(&den)
    }
}

impl fmt::Display for QLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_pretty())
    }
}

impl fmt::Debug for QLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QLaurent({})", self.to_pretty())
    }
}

fn parse_term(t: &str) -> LaurentResult<(BigRational, BigInt)> {
    let err = || LaurentError::Parse(format!("bad term `{t}`"));
    let t = t.strip_prefix('+').unwrap_or(t);
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t),
    };
    if body.is_empty() {
        return Err(err());
    }
    let (coef_s, var_s) = match body.find('q') {
        Some(pos) => {
            let c = body[..pos].trim_end_matches('*');
            (c, Some(&body[pos + 1..]))
        }
        None => (body, None),
    };
    let mut coef = if coef_s.is_empty() {
        BigInt::one()
    } else {
        BigInt::from_str(coef_s).map_err(|_| err())?
    };
    if neg {
        coef = -coef;
    }
    let exp = match var_s {
        None => BigRational::zero(),
        Some("") => BigRational::one(),
        Some(v) => {
            let v = v.strip_prefix('^').ok_or_else(err)?;
            let v = v
                .strip_prefix('(')
                .and_then(|s| s.strip_suffix(')'))
                .unwrap_or(v);
            match v.split_once('/') {
                Some((a, b)) => {
                    let a = BigInt::from_str(a).map_err(|_| err())?;
                    let b = BigInt::from_str(b).map_err(|_| err())?;
                    if b.is_zero() {
                        return Err(err());
                    }
                    BigRational::new(a, b)
                }
                None => BigRational::from_integer(BigInt::from_str(v).map_err(|_| err())?),
            }
        }
    };
    Ok((exp, coef))
}

impl FromStr for QLaurent {
    type Err = LaurentError;

    fn from_str(s: &str) -> LaurentResult<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(LaurentError::Parse("empty input".into()));
        }
        let mut pieces = Vec::new();
        let mut depth = 0i32;
        let mut start = 0usize;
        let bytes = compact.as_bytes();
        for (i, &ch) in bytes.iter().enumerate() {
            match ch {
                b'(' => depth += 1,
                b')' => depth -= 1,
                b'+' | b'-' if depth == 0 && i > start && !matches!(bytes[i - 1], b'^' | b'+') => {
                    pieces.push(&compact[start..i]);
                    start = i;
                }
                _ => {}
            }
        }
        pieces.push(&compact[start..]);
        let parsed = pieces
            .iter()
            .map(|p| parse_term(p))
            .collect::<LaurentResult<Vec<_>>>()?;
        let mut d = BigInt::one();
        for (e, _) in &parsed {
            d = d.lcm(e.denom());
        }
        let d32 = d
            .to_u32()
            .ok_or_else(|| LaurentError::Parse("exponent denominator too large".into()))?;
        let mut terms = Vec::with_capacity(parsed.len());
        for (e, c) in parsed {
            let k = (e * BigRational::from_integer(d.clone())).to_integer();
            let k = k
                .to_i64()
                .ok_or_else(|| LaurentError::Parse("exponent out of range".into()))?;
            terms.push((k, c));
        }
        Ok(QLaurent::from_terms(d32, terms))
    }
}

#[derive(Serialize, Deserialize)]
struct LaurentJson {
    denom: u32,
    terms: Vec<(i64, String)>,
}

impl Serialize for QLaurent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        LaurentJson {
            denom: self.denom,
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (*k, c.to_string()))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QLaurent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = LaurentJson::deserialize(d)?;
        if j.denom == 0 {
            return Err(serde::de::Error::custom("denom must be positive"));
        }
        let mut terms = Vec::with_capacity(j.terms.len());
        for (k, c) in j.terms {
            let c = BigInt::from_str(&c).map_err(serde::de::Error::custom)?;
            terms.push((k, c));
        }
        Ok(QLaurent::from_terms(j.denom, terms))
    }
}

// Ring operations.

impl Add<&QLaurent> for &QLaurent {
    type Output = QLaurent;
    fn add(self, rhs: &QLaurent) -> QLaurent {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl AddAssign<&QLaurent> for QLaurent {
    fn add_assign(&mut self, rhs: &QLaurent) {
        if rhs.is_zero() {
            return;
        }
        let d = QLaurent::common_denom(self, rhs);
        if d != self.denom {
            self.terms = self.rescaled(d);
            self.denom = d;
        }
        let f = (d / rhs.denom) as i64;
        for (k, c) in &rhs.terms {
            let key = k * f;
            let e = self.terms.entry(key).or_insert_with(BigInt::zero);
            *e += c;
            if e.is_zero() {
                self.terms.remove(&key);
            }
        }
        self.normalize();
    }
}

impl SubAssign<&QLaurent> for QLaurent {
    fn sub_assign(&mut self, rhs: &QLaurent) {
        *self += &(-rhs);
    }
}

impl Sub<&QLaurent> for &QLaurent {
    type Output = QLaurent;
    fn sub(self, rhs: &QLaurent) -> QLaurent {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Neg for &QLaurent {
    type Output = QLaurent;
    fn neg(self) -> QLaurent {
        QLaurent {
            denom: self.denom,
            terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect(),
        }
    }
}

impl Neg for QLaurent {
    type Output = QLaurent;
    fn neg(self) -> QLaurent {
        -&self
    }
}

impl Mul<&QLaurent> for &QLaurent {
    type Output = QLaurent;
    fn mul(self, rhs: &QLaurent) -> QLaurent {
        if self.is_zero() || rhs.is_zero() {
            return QLaurent::zero();
        }
        let d = QLaurent::common_denom(self, rhs);
        let fa = (d / self.denom) as i64;
        let fb = (d / rhs.denom) as i64;
        let mut map: BTreeMap<i64, BigInt> = BTreeMap::new();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &rhs.terms {
                *map.entry(ka * fa + kb * fb).or_insert_with(BigInt::zero) += ca * cb;
            }
        }
        let mut out = QLaurent {
            denom: d,
            terms: map,
        };
        out.normalize();
        out
    }
}

impl MulAssign<&QLaurent> for QLaurent {
    fn mul_assign(&mut self, rhs: &QLaurent) {
        *self = &*self * rhs;
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<QLaurent> for QLaurent {
            type Output = QLaurent;
            fn $m(self, rhs: QLaurent) -> QLaurent {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&QLaurent> for QLaurent {
            type Output = QLaurent;
            fn $m(self, rhs: &QLaurent) -> QLaurent {
                (&self).$m(rhs)
            }
        }
        impl $tr<QLaurent> for &QLaurent {
            type Output = QLaurent;
            fn $m(self, rhs: QLaurent) -> QLaurent {
                self.$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl std::iter::Sum for QLaurent {
    fn sum<I: Iterator<Item = QLaurent>>(iter: I) -> Self {
        iter.fold(QLaurent::zero(), |mut a, b| {
            a += &b;
            a
        })
    }
}

impl std::iter::Product for QLaurent {
    fn product<I: Iterator<Item = QLaurent>>(iter: I) -> Self {
        iter.fold(QLaurent::one(), |a, b| &a * &b)
    }
}

/// Dense accumulator for sums of integer-exponent monomials `c q^k`.
#[derive(Clone, Debug, Default)]
pub struct MonomialSum {
    terms: BTreeMap<i64, i128>,
}

impl MonomialSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, k: i64, c: i128) {
        let e = self.terms.entry(k).or_insert(0);
        *e += c;
    }

    pub fn merge(mut self, other: MonomialSum) -> MonomialSum {
        for (k, c) in other.terms {
            self.add(k, c);
        }
        self
    }

    pub fn to_laurent(&self) -> QLaurent {
        QLaurent::from_terms(1, self.terms.iter().map(|(k, c)| (*k, BigInt::from(*c))))
    }
}

/// Number of inversions of a sequence.
pub fn inversions(seq: &[usize]) -> u32 {
    let mut c = 0;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] > seq[j] {
                c += 1;
            }
        }
    }
    c
}

/// `(-q)^l`.
pub fn neg_q_pow(l: u32) -> QLaurent {
    let s = if l.is_multiple_of(2) { 1 } else { -1 };
    QLaurent::monomial(s, l as i64, 1)
}

/// `binom(m, 2)`.
pub fn binom2(m: u32) -> u32 {
    m * m.saturating_sub(1) / 2
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> QLaurent {
        s.parse().unwrap()
    }

    #[test]
    fn quantum_integers() {
        assert_eq!(QLaurent::qint(3), p("q^-2 + 1 + q^2"));
        assert!(QLaurent::qint(0).is_zero());
        assert_eq!(QLaurent::qint(1), QLaurent::one());
        assert_eq!(QLaurent::qfact(2), p("q^-1 + q"));
        assert_eq!(QLaurent::qbinom(2, 1).unwrap(), p("q^-1 + q"));
    }

    #[test]
    fn qbinom_4_2_by_long_division() {
        // Oracle: the q-Pascal rule [m,k] = q^{-k}[m-1,k] + q^{m-k}[m-1,k-1]
        // built up from [m,0] = [m,m] = 1, independent of exact_div.
        fn pascal(m: u32, k: u32) -> QLaurent {
            if k == 0 || k == m {
                return QLaurent::one();
            }
            &QLaurent::qpow(-(k as i64)) * &pascal(m - 1, k)
                + &QLaurent::qpow((m - k) as i64) * &pascal(m - 1, k - 1)
        }
        assert_eq!(pascal(4, 2), p("q^-4 + q^-2 + 2 + q^2 + q^4"));
        assert_eq!(
            QLaurent::qbinom(4, 2).unwrap(),
            p("q^-4 + q^-2 + 2 + q^2 + q^4")
        );
        for m in 0..=8 {
            for k in 0..=m {
                assert_eq!(QLaurent::qbinom(m, k).unwrap(), pascal(m, k));
            }
        }
    }

    #[test]
    fn exact_division_cases() {
        assert_eq!(p("1 + q").exact_div(&QLaurent::q()).unwrap(), p("q^-1 + 1"));
        match p("1 + q^2").exact_div(&p("1 + q")) {
            Err(LaurentError::NotDivisible { remainder }) => assert!(!remainder.is_zero()),
            other => panic!("expected not divisible, got {other:?}"),
        }
        assert_eq!(
            p("2 + 2*q").exact_div(&p("1 + q")).unwrap(),
            QLaurent::constant(2)
        );
        assert!(p("1 + 2*q").exact_div(&p("2")).is_err());
        assert_eq!(
            QLaurent::one().exact_div(&QLaurent::zero()),
            Err(LaurentError::DivisionByZero)
        );
    }

    #[test]
    fn symmetry_and_shift() {
        assert!(QLaurent::qint(3).is_symmetric());
        assert_eq!(
            p("q + q^3").palindromic_shift(),
            Some(Ratio::from_integer(2))
        );
        assert_eq!(p("1 + q").palindromic_shift(), Some(Ratio::new(1, 2)));
        assert_eq!(p("1 + 2*q").palindromic_shift(), None);
        assert!(!p("1 + q").is_symmetric());
    }

    #[test]
    fn evaluation() {
        let (v, d1, d2) = QLaurent::qint(2).derivs_at_one();
        assert_eq!(v, BigRational::from_integer(2.into()));
        assert!(d1.is_zero());
        assert_eq!(d2, BigRational::from_integer(2.into()));
        let w = Complex64::from_polar(1.0, std::f64::consts::PI / 3.0);
        let z = QLaurent::qint(2).eval_complex(w).unwrap();
        assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert_eq!(
            QLaurent::one().eval_complex(Complex64::new(0.0, 0.0)),
            Err(LaurentError::ZeroPoint)
        );
        let shifted = QLaurent::qint(4).scale_by_power(3, 1);
        let a = shifted.palindromic_shift().unwrap();
        let back = shifted.scale_by_power(-*a.numer(), *a.denom() as u32);
        assert!(back.derivs_at_one().1.is_zero());
    }

    #[test]
    fn fractional_powers_reduce() {
        let a = QLaurent::monomial(1, 2, 4);
        assert_eq!(a.denom(), 2);
        let b = &a * &a;
        assert_eq!(b, QLaurent::q());
        let r = QLaurent::monomial(1, 1, 3) + QLaurent::monomial(1, 1, 2);
        assert_eq!(r.denom(), 6);
        assert_eq!(r.to_text(), "1*q^(2/6) + 1*q^(3/6)");
    }

    #[test]
    fn text_and_json_round_trip() {
        let a = p("-3*q^(1/2) + 7 + 12345678901234567890123*q^(5/2)");
        assert_eq!(a.to_text().parse::<QLaurent>().unwrap(), a);
        assert_eq!(a.to_pretty().parse::<QLaurent>().unwrap(), a);
        let j = serde_json::to_string(&a).unwrap();
        assert_eq!(
            j,
            r#"{"denom":2,"terms":[[0,"7"],[1,"-3"],[5,"12345678901234567890123"]]}"#
        );
        let back: QLaurent = serde_json::from_str(&j).unwrap();
        assert_eq!(back, a);
        assert_eq!(QLaurent::zero().to_text(), "0");
        assert_eq!("0".parse::<QLaurent>().unwrap(), QLaurent::zero());
        assert_eq!(p("q^-1 - q^(-1)"), QLaurent::zero());
    }

    #[test]
    fn qint_times_q_minus_qinv() {
        let d = p("q - q^-1");
        for k in 0..=20u32 {
            let lhs = &QLaurent::qint(k) * &d;
            let rhs = QLaurent::qpow(k as i64) - QLaurent::qpow(-(k as i64));
            assert_eq!(lhs, rhs, "k = {k}");
        }
    }

    fn permutations(k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(k - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, k - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn permutation_length_generating_function() {
        for k in 0..=6u32 {
            let lhs: QLaurent = permutations(k as usize)
                .iter()
                .map(|s| QLaurent::qpow(2 * inversions(s) as i64))
                .sum();
            let rhs = QLaurent::qpow(binom2(k) as i64) * QLaurent::qfact(k);
            assert_eq!(lhs, rhs, "k = {k}");
        }
    }

    #[test]
    fn qbinom_symmetric() {
        for m in 0..=8 {
            for k in 0..=m {
                assert!(QLaurent::qbinom(m, k).unwrap().is_symmetric());
            }
        }
    }
}
