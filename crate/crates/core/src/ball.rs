//! Midpoint-radius arithmetic in double precision.
//!
//! A ball `(m, r)` stands for every number within `r` of `m`. Each operation
//! returns a ball that contains every exact result, charging `ε = 2⁻⁵²` per
//! rounding on top of the propagated radii, then inflating the radius by a
//! small factor so the rounding of the radius arithmetic itself is covered.

use std::fmt;

use num_complex::Complex64;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::scalar::{rational_to_f64, RadicalComplex, ScalarError, MACHINE_EPS};

const E: f64 = MACHINE_EPS;
const INFLATE: f64 = 1.0 + 8.0 * MACHINE_EPS;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RBall {
    pub mid: f64,
    pub rad: f64,
}

impl RBall {
    pub const fn exact(x: f64) -> Self {
        RBall { mid: x, rad: 0.0 }
    }

    pub fn new(mid: f64, rad: f64) -> Self {
        RBall { mid, rad }
    }

    pub fn from_rational(q: &BigRational) -> Result<Self, ScalarError> {
        let (v, e) = rational_to_f64(q)?;
        Ok(RBall { mid: v, rad: v.abs() * e * INFLATE })
    }

    /// Real part of an exact radical.
    pub fn from_radical(x: &RadicalComplex) -> Result<Self, ScalarError> {
        let f = x.to_float()?;
        Ok(RBall { mid: f.value.re, rad: f.abs_err })
    }

    pub fn lo(&self) -> f64 {
        self.mid - self.rad
    }

    pub fn hi(&self) -> f64 {
        self.mid + self.rad
    }

    pub fn contains(&self, x: f64) -> bool {
        (x - self.mid).abs() <= self.rad
    }

    /// `+1` or `−1` when the ball excludes zero.
    pub fn sign(&self) -> Option<i8> {
        if self.mid.abs() > self.rad {
            Some(if self.mid > 0.0 { 1 } else { -1 })
        } else {
            None
        }
    }

    pub fn add(self, o: RBall) -> RBall {
        let mid = self.mid + o.mid;
        RBall { mid, rad: (self.rad + o.rad + E * mid.abs()) * INFLATE }
    }

    pub fn sub(self, o: RBall) -> RBall {
        self.add(o.neg())
    }

    pub fn neg(self) -> RBall {
        RBall { mid: -self.mid, rad: self.rad }
    }

    pub fn mul(self, o: RBall) -> RBall {
        let mid = self.mid * o.mid;
        let prop = self.mid.abs() * o.rad + self.rad * o.mid.abs() + self.rad * o.rad;
        RBall { mid, rad: (prop + E * mid.abs()) * INFLATE }
    }

    pub fn scale(self, k: f64) -> RBall {
        self.mul(RBall::exact(k))
    }

    /// Panics if `o` contains zero.
    pub fn div(self, o: RBall) -> RBall {
        let den = o.mid.abs() - o.rad;
        assert!(den > 0.0, "division by a ball containing zero");
        let mid = self.mid / o.mid;
        let prop = (self.rad + self.mid.abs() * o.rad / o.mid.abs()) / den;
        RBall { mid, rad: (prop * INFLATE + E * mid.abs()) * INFLATE }
    }

    pub fn powi(self, k: u32) -> RBall {
        let mut acc = RBall::exact(1.0);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }
}

impl fmt::Display for RBall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} ± {:e}", self.mid, self.rad)
    }
}

/// Complex ball: a disc of radius `rad` about `mid`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CBall {
    pub mid: Complex64,
    pub rad: f64,
}

#[inline]
fn l1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

impl CBall {
    pub const ZERO: CBall = CBall { mid: Complex64::new(0.0, 0.0), rad: 0.0 };

    pub const fn exact(z: Complex64) -> Self {
        CBall { mid: z, rad: 0.0 }
    }

    pub fn from_radical(x: &RadicalComplex) -> Result<Self, ScalarError> {
        let f = x.to_float()?;
        Ok(CBall { mid: f.value, rad: f.abs_err })
    }

    pub fn from_real(b: RBall) -> Self {
        CBall { mid: Complex64::new(b.mid, 0.0), rad: b.rad }
    }

    pub fn is_zero(&self) -> bool {
        self.rad == 0.0 && self.mid.re == 0.0 && self.mid.im == 0.0
    }

    #[inline]
    pub fn add(self, o: CBall) -> CBall {
        let mid = self.mid + o.mid;
        CBall { mid, rad: (self.rad + o.rad + E * l1(mid)) * INFLATE }
    }

    #[inline]
    pub fn sub(self, o: CBall) -> CBall {
        self.add(o.neg())
    }

    #[inline]
    pub fn neg(self) -> CBall {
        CBall { mid: -self.mid, rad: self.rad }
    }

    #[inline]
    pub fn conj(self) -> CBall {
        CBall { mid: self.mid.conj(), rad: self.rad }
    }

    /// Each component of the product takes two multiplications and one
    /// addition, so the rounding error is at most `ε·|a|₁|b|₁` in modulus.
    #[inline]
    pub fn mul(self, o: CBall) -> CBall {
        let mid = self.mid * o.mid;
        let prop = self.mid.norm() * o.rad + self.rad * o.mid.norm() + self.rad * o.rad;
        // the moduli above are themselves rounded; l1 ≥ modulus, so use it
        let prop = prop.max(l1(self.mid) * o.rad + self.rad * l1(o.mid) + self.rad * o.rad);
        CBall { mid, rad: (prop + E * (1.0 + E) * l1(self.mid) * l1(o.mid)) * INFLATE }
    }

    #[inline]
    pub fn mul_real(self, o: RBall) -> CBall {
        self.mul(CBall::from_real(o))
    }
}
