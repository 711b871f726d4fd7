//! Exact univariate polynomials in α.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::scalar::{rational_to_f64, RadicalComplex, ScalarError};

/// Polynomial with exact rational coefficients; `coeffs[k]` multiplies `α^k`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RationalPoly {
    coeffs: Vec<BigRational>,
}

impl RationalPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        RationalPoly { coeffs }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    /// `c·α^k`
    pub fn monomial(c: BigRational, k: usize) -> Self {
        let mut v = vec![BigRational::zero(); k + 1];
        v[k] = c;
        Self::new(v)
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| BigRational::from_integer(x.into())).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * q).collect())
    }

    /// Drops every power above `k`.
    pub fn truncate(&self, k: usize) -> Self {
        Self::new(self.coeffs.iter().take(k + 1).cloned().collect())
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Horner in double precision from truncated double coefficients.
    pub fn eval_f64(&self, x: f64) -> f64 {
        self.to_f64_coeffs().iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn to_f64_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
    }

    /// Coefficients as doubles with their absolute conversion errors.
    pub fn to_f64_bounded(&self) -> Result<Vec<(f64, f64)>, ScalarError> {
        self.coeffs
            .iter()
            .map(|c| rational_to_f64(c).map(|(v, e)| (v, v.abs() * e * (1.0 + e))))
            .collect()
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * BigRational::from_integer(k.into()))
                .collect(),
        )
    }

    pub fn to_radical(&self) -> RadicalPoly {
        RadicalPoly::new(self.coeffs.iter().cloned().map(RadicalComplex::from_rational).collect())
    }
}

impl Add for &RationalPoly {
    type Output = RationalPoly;
    fn add(self, o: &RationalPoly) -> RationalPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        RationalPoly::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }
}

impl Sub for &RationalPoly {
    type Output = RationalPoly;
    fn sub(self, o: &RationalPoly) -> RationalPoly {
        self + &(-o)
    }
}

impl Neg for &RationalPoly {
    type Output = RationalPoly;
    fn neg(self) -> RationalPoly {
        RationalPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &RationalPoly {
    type Output = RationalPoly;
    fn mul(self, o: &RationalPoly) -> RationalPoly {
        if self.is_zero() || o.is_zero() {
            return RationalPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RationalPoly::new(out)
    }
}

impl fmt::Display for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})·α")?,
                _ => write!(f, "({c})·α^{k}")?,
            }
        }
        Ok(())
    }
}

/// Polynomial whose coefficients are exact radicals.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RadicalPoly {
    coeffs: Vec<RadicalComplex>,
}

impl RadicalPoly {
    pub fn new(mut coeffs: Vec<RadicalComplex>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        RadicalPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[RadicalComplex] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> RadicalComplex {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn scale(&self, c: &RadicalComplex) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    /// Multiplies by `α^k`.
    pub fn shift(&self, k: usize) -> Self {
        let mut v = vec![RadicalComplex::zero(); k];
        v.extend(self.coeffs.iter().cloned());
        Self::new(v)
    }

    pub fn eval(&self, x: &BigRational) -> RadicalComplex {
        let mut acc = RadicalComplex::zero();
        let xr = RadicalComplex::from_rational(x.clone());
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * &xr) + c;
        }
        acc
    }

    pub fn mul_rational(&self, p: &RationalPoly) -> Self {
        self * &p.to_radical()
    }
}

impl Add for &RadicalPoly {
    type Output = RadicalPoly;
    fn add(self, o: &RadicalPoly) -> RadicalPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        RadicalPoly::new((0..n).map(|k| &self.coeff(k) + &o.coeff(k)).collect())
    }
}

impl Sub for &RadicalPoly {
    type Output = RadicalPoly;
    fn sub(self, o: &RadicalPoly) -> RadicalPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        RadicalPoly::new((0..n).map(|k| &self.coeff(k) - &o.coeff(k)).collect())
    }
}

impl Mul for &RadicalPoly {
    type Output = RadicalPoly;
    fn mul(self, o: &RadicalPoly) -> RadicalPoly {
        if self.coeffs.is_empty() || o.coeffs.is_empty() {
            return RadicalPoly::default();
        }
        let mut out = vec![RadicalComplex::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j].add_product(a, b);
            }
        }
        RadicalPoly::new(out)
    }
}

/// `α`, as a polynomial.
pub fn alpha() -> RationalPoly {
    RationalPoly::new(vec![BigRational::zero(), BigRational::one()])
}
