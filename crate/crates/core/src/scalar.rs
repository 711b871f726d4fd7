//! Exact complex scalars of the form `Σ (a_d + i b_d) √d` with `a_d, b_d`
//! rational and `d` squarefree, plus the float conversion used by every
//! certification step.
//!
//! Multiplication never factors anything: for squarefree `a`, `b` with
//! `g = gcd(a, b)` we have `√a·√b = g·√((a/g)(b/g))` and the cofactor is
//! again squarefree. Factoring only happens when a square root of an
//! arbitrary integer is requested.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_complex::Complex64;
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Unit roundoff of IEEE binary64 (half of machine epsilon).
pub const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

/// Machine epsilon `2^-52`, the `ε` of every round-off formula here.
pub const MACHINE_EPS: f64 = f64::EPSILON;

/// Working epsilon of the certification formulas: `16ε`.
pub const EPS_EFF: f64 = 16.0 * f64::EPSILON;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarError {
    #[error("cannot invert a value with {0} radicand terms")]
    MultiTermInverse(usize),
    #[error("cannot invert zero")]
    ZeroInverse,
    #[error("value exceeds the double range")]
    Overflow,
    #[error("square root of a negative rational")]
    NegativeSqrt,
    #[error("radicand {0} is not squarefree")]
    NotSquarefree(u64),
    #[error("parse error: {0}")]
    Parse(String),
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Writes `n = k²·d` with `d` squarefree and returns `(k, d)`.
pub fn squarefree_decompose(n: u64) -> (u64, u64) {
    assert!(n > 0, "squarefree decomposition of zero");
    let mut r = n;
    let mut k = 1u64;
    let mut d = 1u64;
    let mut p = 2u64;
    while (p as u128) * (p as u128) * (p as u128) <= r as u128 {
        if r % p == 0 {
            let mut e = 0;
            while r % p == 0 {
                r /= p;
                e += 1;
            }
            for _ in 0..e / 2 {
                k *= p;
            }
            if e % 2 == 1 {
                d *= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    // r now has at most two prime factors, each at least p
    if r > 1 {
        let s = r.sqrt();
        if s * s == r {
            k *= s;
        } else {
            d *= r;
        }
    }
    (k, d)
}

pub fn is_squarefree(n: u64) -> bool {
    n > 0 && squarefree_decompose(n).0 == 1
}

/// Gaussian rational `re + i·im`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gauss {
    pub re: BigRational,
    pub im: BigRational,
}

impl Gauss {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Gauss { re, im }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn add(&self, o: &Gauss) -> Gauss {
        Gauss::new(&self.re + &o.re, &self.im + &o.im)
    }

    fn mul(&self, o: &Gauss) -> Gauss {
        Gauss::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }

    fn scale(&self, q: &BigRational) -> Gauss {
        Gauss::new(&self.re * q, &self.im * q)
    }

    fn conj(&self) -> Gauss {
        Gauss::new(self.re.clone(), -&self.im)
    }

    fn abs_sq(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }
}

/// Exact element of `Q(i)(√2, √3, √5, ...)`; the zero value is the empty map.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct RadicalComplex {
    terms: BTreeMap<u64, Gauss>,
}

impl RadicalComplex {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_rational(BigRational::one())
    }

    pub fn i() -> Self {
        Self::term(1, BigRational::zero(), BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(n.into()))
    }

    pub fn from_rational(q: BigRational) -> Self {
        Self::term(1, q, BigRational::zero())
    }

    /// `(re + i·im)·√d`. Panics if `d` is not squarefree.
    pub fn term(d: u64, re: BigRational, im: BigRational) -> Self {
        assert!(is_squarefree(d), "radicand {d} is not squarefree");
        let mut terms = BTreeMap::new();
        let g = Gauss::new(re, im);
        if !g.is_zero() {
            terms.insert(d, g);
        }
        RadicalComplex { terms }
    }

    /// Checked form of [`RadicalComplex::term`].
    pub fn try_term(d: u64, re: BigRational, im: BigRational) -> Result<Self, ScalarError> {
        if !is_squarefree(d) {
            return Err(ScalarError::NotSquarefree(d));
        }
        Ok(Self::term(d, re, im))
    }

    /// `√n` reduced to `k√d`.
    pub fn sqrt_int(n: u64) -> Self {
        if n == 0 {
            return Self::zero();
        }
        let (k, d) = squarefree_decompose(n);
        Self::term(d, BigRational::from_integer(k.into()), BigRational::zero())
    }

    /// `√(p/q)` for a non-negative rational with numerator and denominator below 2^64.
    pub fn sqrt_rational(q: &BigRational) -> Result<Self, ScalarError> {
        if q.is_negative() {
            return Err(ScalarError::NegativeSqrt);
        }
        if q.is_zero() {
            return Ok(Self::zero());
        }
        let p = q.numer().to_u64().ok_or(ScalarError::Overflow)?;
        let d = q.denom().to_u64().ok_or(ScalarError::Overflow)?;
        // √(p/q) = a·b·√(p'q')/q with p = a²p', q = b²q'
        let (a, ps) = squarefree_decompose(p);
        let (b, ds) = squarefree_decompose(d);
        let g = ps.gcd(&ds);
        let rad = u64::try_from((ps / g) as u128 * (ds / g) as u128).map_err(|_| ScalarError::Overflow)?;
        let k = BigRational::new(BigInt::from(a) * BigInt::from(b) * BigInt::from(g), BigInt::from(d));
        Ok(Self::term(rad, k, BigRational::zero()))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, &Gauss)> {
        self.terms.iter().map(|(d, g)| (*d, g))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// The value as a rational, if it is one.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let g = self.terms.get(&1)?;
                g.im.is_zero().then(|| g.re.clone())
            }
            _ => None,
        }
    }

    /// True when every imaginary coefficient vanishes.
    pub fn is_real(&self) -> bool {
        self.terms.values().all(|g| g.im.is_zero())
    }

    fn insert_add(&mut self, d: u64, g: Gauss) {
        if g.is_zero() {
            return;
        }
        match self.terms.get_mut(&d) {
            Some(e) => {
                *e = e.add(&g);
                if e.is_zero() {
                    self.terms.remove(&d);
                }
            }
            None => {
                self.terms.insert(d, g);
            }
        }
    }

    pub fn add_assign_ref(&mut self, o: &RadicalComplex) {
        for (d, g) in &o.terms {
            self.insert_add(*d, g.clone());
        }
    }

    /// `self += a·b` without materializing the product.
    pub fn add_product(&mut self, a: &RadicalComplex, b: &RadicalComplex) {
        for (da, ga) in &a.terms {
            for (db, gb) in &b.terms {
                let (k, d) = radical_product(*da, *db);
                let mut g = ga.mul(gb);
                if k != 1 {
                    g = g.scale(&BigRational::from_integer(k.into()));
                }
                self.insert_add(d, g);
            }
        }
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        RadicalComplex {
            terms: self.terms.iter().map(|(d, g)| (*d, g.scale(q))).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        RadicalComplex {
            terms: self.terms.iter().map(|(d, g)| (*d, g.conj())).collect(),
        }
    }

    /// Real part `(z + z̄)/2`.
    pub fn real_part(&self) -> Self {
        RadicalComplex {
            terms: self
                .terms
                .iter()
                .filter(|(_, g)| !g.re.is_zero())
                .map(|(d, g)| (*d, Gauss::new(g.re.clone(), BigRational::zero())))
                .collect(),
        }
    }

    /// `|z|²`, exact.
    pub fn abs_sq(&self) -> Self {
        self * &self.conj()
    }

    /// Inverse of a single-term value `q√d`: `conj(q)/|q|² · √d/d`.
    pub fn invert(&self) -> Result<Self, ScalarError> {
        match self.terms.len() {
            0 => Err(ScalarError::ZeroInverse),
            1 => {
                let (d, g) = self.terms.iter().next().unwrap();
                let s = g.abs_sq() * BigRational::from_integer((*d).into());
                let inv = g.conj().scale(&s.recip());
                Ok(RadicalComplex {
                    terms: BTreeMap::from([(*d, inv)]),
                })
            }
            n => Err(ScalarError::MultiTermInverse(n)),
        }
    }

    /// Double approximation with a rigorous error bound.
    pub fn to_float(&self) -> Result<FloatApprox, ScalarError> {
        let u = UNIT_ROUNDOFF;
        let (mut sre, mut sim) = (0.0f64, 0.0f64);
        let (mut ere, mut eim) = (0.0f64, 0.0f64);
        for (d, g) in &self.terms {
            let (sd, esd) = if *d == 1 {
                (1.0, 0.0)
            } else if *d <= 1u64 << 53 {
                ((*d as f64).sqrt(), u)
            } else {
                ((*d as f64).sqrt(), 2.0 * u)
            };
            for (part, sum, err) in [(&g.re, &mut sre, &mut ere), (&g.im, &mut sim, &mut eim)] {
                if part.is_zero() {
                    continue;
                }
                let (q, eq) = rational_to_f64(part)?;
                let t = q * sd;
                if !t.is_finite() {
                    return Err(ScalarError::Overflow);
                }
                let emul = if *d == 1 { 0.0 } else { u };
                // (1+eq)(1+esd)(1+emul) − 1, formed without cancelling against 1
                let gamma = (eq + esd + emul) * (1.0 + 1e-12);
                // bound is relative to the exact term; restate against |t| computed
                *err += t.abs() * gamma * (1.0 + 2.0 * gamma) * (1.0 + 4.0 * u);
                let prev = *sum;
                *sum += t;
                // two-sum: the addition error is exactly recoverable, so only
                // inexact additions are charged
                let bb = *sum - prev;
                let e = (prev - (*sum - bb)) + (t - bb);
                if e != 0.0 {
                    *err += u * sum.abs();
                }
            }
        }
        if !sre.is_finite() || !sim.is_finite() {
            return Err(ScalarError::Overflow);
        }
        let value = Complex64::new(sre, sim);
        let abs_err = (ere + eim) * (1.0 + 8.0 * u);
        let mag = value.norm();
        let rel_err = if abs_err == 0.0 {
            0.0
        } else if mag > 0.0 {
            abs_err / mag * (1.0 + 8.0 * u)
        } else {
            f64::INFINITY
        };
        Ok(FloatApprox {
            value,
            abs_err,
            rel_err,
        })
    }

    /// Double approximation without the error bound.
    pub fn to_c64(&self) -> Complex64 {
        self.to_float().map(|f| f.value).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    }
}

/// `√a·√b = k·√d` for squarefree `a`, `b`.
/// `√a·√b = k√d` for squarefree `a`, `b`; returns `(k, d)`.
pub(crate) fn radical_product(a: u64, b: u64) -> (u64, u64) {
    if a == 1 {
        return (1, b);
    }
    if b == 1 {
        return (1, a);
    }
    let g = a.gcd(&b);
    let c = ((a / g) as u128) * ((b / g) as u128);
    let c = u64::try_from(c).expect("radicand exceeds 64 bits");
    (g, c)
}

/// Truncates `q` to a double; returns the value and a relative error bound
/// (zero when the conversion is exact).
pub fn rational_to_f64(q: &BigRational) -> Result<(f64, f64), ScalarError> {
    if q.is_zero() {
        return Ok((0.0, 0.0));
    }
    let neg = q.is_negative();
    let n = q.numer().abs();
    let d = q.denom().clone();
    // choose shift s with 2^52 <= floor(n·2^s/d) < 2^54
    let s = 53i64 - (n.bits() as i64 - d.bits() as i64);
    let (num, den) = if s >= 0 {
        (n << (s as usize), d)
    } else {
        (n, d << ((-s) as usize))
    };
    let (mut m, r) = num.div_rem(&den);
    let mut s = s;
    let mut exact = r.is_zero();
    // normalize to at most 53 significant bits so the integer converts exactly
    while m.bits() > 53 {
        if m.is_odd() {
            exact = false;
        }
        m >>= 1;
        s -= 1;
    }
    let mf = m.to_u64().ok_or(ScalarError::Overflow)? as f64;
    let v = ldexp(mf, -s);
    if !v.is_finite() {
        return Err(ScalarError::Overflow);
    }
    if v == 0.0 || v.abs() < f64::MIN_POSITIVE {
        // subnormal range never occurs for this problem; refuse rather than mis-bound
        return Err(ScalarError::Overflow);
    }
    let v = if neg { -v } else { v };
    Ok((v, if exact { 0.0 } else { MACHINE_EPS }))
}

fn ldexp(x: f64, e: i64) -> f64 {
    let mut x = x;
    let mut e = e;
    while e > 0 {
        let step = e.min(1000);
        x *= 2f64.powi(step as i32);
        e -= step;
    }
    while e < 0 {
        let step = (-e).min(1000);
        x /= 2f64.powi(step as i32);
        e += step;
    }
    x
}

/// A double value together with a guaranteed error bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FloatApprox {
    #[serde(with = "complex_serde")]
    pub value: Complex64,
    pub abs_err: f64,
    pub rel_err: f64,
}

mod complex_serde {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(c: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq([c.re, c.im])
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

impl Add for &RadicalComplex {
    type Output = RadicalComplex;
    fn add(self, o: &RadicalComplex) -> RadicalComplex {
        let mut r = self.clone();
        r.add_assign_ref(o);
        r
    }
}

impl Add for RadicalComplex {
    type Output = RadicalComplex;
    fn add(mut self, o: RadicalComplex) -> RadicalComplex {
        self.add_assign_ref(&o);
        self
    }
}

impl Neg for &RadicalComplex {
    type Output = RadicalComplex;
    fn neg(self) -> RadicalComplex {
        RadicalComplex {
            terms: self
                .terms
                .iter()
                .map(|(d, g)| (*d, Gauss::new(-&g.re, -&g.im)))
                .collect(),
        }
    }
}

impl Neg for RadicalComplex {
    type Output = RadicalComplex;
    fn neg(self) -> RadicalComplex {
        -&self
    }
}

impl Sub for &RadicalComplex {
    type Output = RadicalComplex;
    fn sub(self, o: &RadicalComplex) -> RadicalComplex {
        self + &(-o)
    }
}

impl Sub for RadicalComplex {
    type Output = RadicalComplex;
    fn sub(self, o: RadicalComplex) -> RadicalComplex {
        &self - &o
    }
}

impl Mul for &RadicalComplex {
    type Output = RadicalComplex;
    fn mul(self, o: &RadicalComplex) -> RadicalComplex {
        let mut r = RadicalComplex::zero();
        r.add_product(self, o);
        r
    }
}

impl Mul for RadicalComplex {
    type Output = RadicalComplex;
    fn mul(self, o: RadicalComplex) -> RadicalComplex {
        &self * &o
    }
}

impl fmt::Display for RadicalComplex {
    /// `(p/q + r/s i)·sqrt(d) + ...`, or `0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (d, g)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({} + {} i)·sqrt({})", g.re, g.im, d)?;
        }
        Ok(())
    }
}

impl FromStr for RadicalComplex {
    type Err = ScalarError;

    fn from_str(s: &str) -> Result<Self, ScalarError> {
        let bad = |m: &str| ScalarError::Parse(format!("{m} in {s:?}"));
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact == "0" {
            return Ok(Self::zero());
        }
        let compact = compact.replace('·', "*");
        let mut out = Self::zero();
        let mut rest = compact.as_str();
        loop {
            rest = rest.strip_prefix('(').ok_or_else(|| bad("expected '('"))?;
            let close = rest.find(')').ok_or_else(|| bad("missing ')'"))?;
            let inner = &rest[..close];
            rest = &rest[close + 1..];
            rest = rest.strip_prefix("*sqrt(").ok_or_else(|| bad("expected '*sqrt('"))?;
            let close = rest.find(')').ok_or_else(|| bad("missing ')'"))?;
            let d: u64 = rest[..close].parse().map_err(|_| bad("bad radicand"))?;
            rest = &rest[close + 1..];
            let inner = inner.strip_suffix('i').ok_or_else(|| bad("missing 'i'"))?;
            let plus = inner.rfind('+').ok_or_else(|| bad("missing '+'"))?;
            let re = parse_rational(&inner[..plus]).ok_or_else(|| bad("bad real part"))?;
            let im = parse_rational(&inner[plus + 1..]).ok_or_else(|| bad("bad imaginary part"))?;
            out.add_assign_ref(&Self::try_term(d, re, im)?);
            if rest.is_empty() {
                return Ok(out);
            }
            rest = rest.strip_prefix('+').ok_or_else(|| bad("expected '+'"))?;
        }
    }
}

/// Parses `p` or `p/q`.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.parse::<BigInt>().ok()?, d.parse::<BigInt>().ok()?),
        None => (s.parse::<BigInt>().ok()?, BigInt::one()),
    };
    if d.is_zero() {
        return None;
    }
    Some(BigRational::new(n, d))
}

/// `"p/q"` (or `"p"`), the serialization used for every exact rational in reports.
pub fn rational_string(q: &BigRational) -> String {
    q.to_string()
}

/// Serde adapter writing a `BigRational` as its `"p/q"` string.
pub mod rational_str {
    use num_rational::BigRational;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::rational_string(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        super::parse_rational(&s).ok_or_else(|| D::Error::custom(format!("bad rational {s:?}")))
    }
}

/// Sign of a rational as -1, 0, 1.
pub fn rational_sign(q: &BigRational) -> i32 {
    match q.numer().sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}
