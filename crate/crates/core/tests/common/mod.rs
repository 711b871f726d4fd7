//! Test-only reference arithmetic.

#![allow(dead_code)]

pub mod hermitian;
pub mod plane_wave;

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

/// Double-double: an unevaluated sum `hi + lo` with about 106 bits of mantissa.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn sqrt(self) -> Dd {
        if self.hi <= 0.0 {
            return Dd::ZERO;
        }
        let x = self.hi.sqrt();
        let y = Dd::from(x);
        quick_two_sum(x, (self - y * y).hi / (2.0 * x))
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let r = quick_two_sum(s1, s2 + t1);
        quick_two_sum(r.hi, r.lo + t2)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let p = self.hi * b.hi;
        let e = self.hi.mul_add(b.hi, -p);
        quick_two_sum(p, e + (self.hi * b.lo + self.lo * b.hi))
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * Dd::from(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * Dd::from(q2);
        let q3 = r.hi / b.hi;
        let q = quick_two_sum(q1, q2);
        q + Dd::from(q3)
    }
}

/// Eigenvalues of a Hermitian matrix (row-major, `n × n`) in double-double,
/// ascending. Cyclic Jacobi on the real symmetric embedding
/// `[[Re, −Im], [Im, Re]]`, whose spectrum is that of `A` twice over.
pub fn dd_eigenvalues(a: &[Complex64], n: usize) -> Vec<Dd> {
    let m = 2 * n;
    let mut s = vec![Dd::ZERO; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = a[i * n + j];
            s[i * m + j] = Dd::from(z.re);
            s[(i + n) * m + j + n] = Dd::from(z.re);
            s[i * m + j + n] = Dd::from(-z.im);
            s[(i + n) * m + j] = Dd::from(z.im);
        }
    }
    let scale: f64 = s.iter().map(|x| x.hi * x.hi).sum::<f64>().sqrt().max(1e-300);
    for _ in 0..100 {
        let off: f64 = (0..m).flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| s[i * m + j].hi.powi(2)).sum();
        if off.sqrt() < 1e-34 * scale {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = s[p * m + q];
                if apq.hi.abs() < 1e-40 * scale {
                    continue;
                }
                let theta = (s[q * m + q] - s[p * m + p]) / (Dd::from(2.0) * apq);
                let t = if theta.hi.abs() > 1e30 {
                    Dd::ONE / (Dd::from(2.0) * theta)
                } else {
                    let root = (theta * theta + Dd::ONE).sqrt();
                    if theta.hi >= 0.0 {
                        Dd::ONE / (theta + root)
                    } else {
                        -(Dd::ONE / (root - theta))
                    }
                };
                let c = Dd::ONE / (t * t + Dd::ONE).sqrt();
                let sn = t * c;
                for k in 0..m {
                    let (akp, akq) = (s[k * m + p], s[k * m + q]);
                    s[k * m + p] = c * akp - sn * akq;
                    s[k * m + q] = sn * akp + c * akq;
                }
                for k in 0..m {
                    let (apk, aqk) = (s[p * m + k], s[q * m + k]);
                    s[p * m + k] = c * apk - sn * aqk;
                    s[q * m + k] = sn * apk + c * aqk;
                }
            }
        }
    }
    let mut d: Vec<Dd> = (0..m).map(|i| s[i * m + i]).collect();
    d.sort_by(|x, y| x.partial_cmp(y).unwrap());
    d.into_iter().step_by(2).collect()
}
