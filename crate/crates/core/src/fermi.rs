//! Rigorous sign checks of the Fermi-velocity envelopes at α = 0.57 and
//! α = 0.61, which bracket the first magic angle.
//!
//! With `Σ(α) = Σₙ αⁿ‖Ψⁿ‖` and `E(α) = 6α⁹Σ(α)/(15−20α) + 9α¹⁸/(15−20α)²`,
//! the true numerator lies between `base − E` and `base + E` for α ≤ 7/10,
//! where `base` is the order-8 numerator truncated at α¹⁶.

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ball::RBall;
use crate::poly::{RadicalPoly, RationalPoly};
use crate::scalar::{rat, rational_str, rational_to_f64, RadicalComplex, ScalarError, EPS_EFF};
use crate::series::{PerturbationSeries, SeriesError};

/// The order the error theorem is stated for.
pub const ENVELOPE_ORDER: usize = 8;

/// Coefficient bound quoted for the cleared polynomial; checked, never relied on.
pub const PAPER_COEFF_BOUND: f64 = 1000.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FermiError {
    #[error("envelopes need an order-8 series, got order {0}")]
    WrongOrder(usize),
    #[error("evaluation point {0} lies outside [-1, 1]")]
    OutOfRange(String),
    #[error("sign at α = {alpha} is inconclusive: value {value:e}, round-off bound {bound:e}")]
    Inconclusive { alpha: String, value: f64, bound: f64 },
    #[error("certified sign at α = {alpha} is {found:?}, expected {expected:?}")]
    SignMismatch { alpha: String, found: CertifiedSign, expected: CertifiedSign },
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertifiedSign {
    Positive,
    Negative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnvelopeKind {
    /// `base + E`, an upper bound.
    Worst,
    /// `base − E`, a lower bound.
    Best,
}

/// Which of the two equivalent forms was evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EvaluationForm {
    /// The degree-18 polynomial `(15−20α)²·(base ± E)`, Oliver bound.
    Cleared,
    /// `base ± E` as written, Oliver bound on `base` and ball arithmetic on `E`.
    Expression,
}

#[derive(Clone, Debug)]
pub struct EnvelopePolynomial {
    pub kind: EnvelopeKind,
    pub base: RationalPoly,
    /// `‖Ψⁿ‖` for `n = 0..=8`, exact.
    pub norms: Vec<RadicalComplex>,
    /// Multiplier on `E`; 1 for the real envelopes.
    pub error_scale: BigRational,
    sum: RadicalPoly,
    cleared: RadicalPoly,
}

fn sign_of(kind: EnvelopeKind) -> BigRational {
    match kind {
        EnvelopeKind::Worst => BigRational::one(),
        EnvelopeKind::Best => -BigRational::one(),
    }
}

/// `(15 − 20α)²`
pub fn clearing_factor() -> RationalPoly {
    RationalPoly::from_ints(&[225, -600, 400])
}

impl EnvelopePolynomial {
    pub fn new(kind: EnvelopeKind, base: RationalPoly, norms: Vec<RadicalComplex>, error_scale: BigRational) -> Self {
        let sum = RadicalPoly::new(norms.clone());
        let k = &sign_of(kind) * &error_scale;
        // 6α⁹(15−20α)Σ + 9α¹⁸
        let lin = RationalPoly::from_ints(&[15, -20]).scale(&rat(6, 1)).to_radical();
        let e = &(&sum * &lin).shift(9) + &RadicalPoly::new(vec![RadicalComplex::from_int(9)]).shift(18);
        let e = e.scale(&RadicalComplex::from_rational(k));
        let cleared = &(&base * &clearing_factor()).to_radical() + &e;
        EnvelopePolynomial { kind, base, norms, error_scale, sum, cleared }
    }

    /// Same envelope with `E` multiplied by `k`.
    pub fn with_error_scale(&self, k: BigRational) -> Self {
        Self::new(self.kind, self.base.clone(), self.norms.clone(), k)
    }

    /// `Σ(α) = Σₙ αⁿ‖Ψⁿ‖`.
    pub fn norm_sum(&self) -> &RadicalPoly {
        &self.sum
    }

    /// `(15−20α)²` times the envelope, degree 18.
    pub fn cleared(&self) -> &RadicalPoly {
        &self.cleared
    }

    /// `E(α)` exactly, unscaled. α must differ from 3/4.
    pub fn error_term(&self, alpha: &BigRational) -> RadicalComplex {
        let d = rat(15, 1) - rat(20, 1) * alpha;
        let a9 = pow(alpha, 9);
        let first = self.sum.eval(alpha).scale(&(rat(6, 1) * &a9 / &d));
        let second = rat(9, 1) * &a9 * &a9 / (&d * &d);
        &first + &RadicalComplex::from_rational(second)
    }

    /// `base(α) ± k·E(α)` exactly.
    pub fn eval_exact(&self, alpha: &BigRational) -> RadicalComplex {
        let k = &sign_of(self.kind) * &self.error_scale;
        &RadicalComplex::from_rational(self.base.eval(alpha)) + &self.error_term(alpha).scale(&k)
    }

    /// Plain double-precision evaluation of the expression form, for plots and roots.
    pub fn eval_f64(&self, alpha: f64) -> f64 {
        let horner = |c: &[f64]| c.iter().rev().fold(0.0, |acc, x| acc * alpha + x);
        let base = self.base.eval_f64(alpha);
        let s = horner(&self.norms.iter().map(|x| x.to_c64().re).collect::<Vec<_>>());
        let d = 15.0 - 20.0 * alpha;
        let a9 = alpha.powi(9);
        let e = 6.0 * a9 * s / d + 9.0 * a9 * a9 / (d * d);
        let k = self.error_scale.to_f64().unwrap_or(f64::NAN);
        match self.kind {
            EnvelopeKind::Worst => base + k * e,
            EnvelopeKind::Best => base - k * e,
        }
    }
}

fn pow(a: &BigRational, k: u32) -> BigRational {
    (0..k).fold(BigRational::one(), |acc, _| acc * a)
}

/// `(worst, best) = base ± E` from an order-8 series.
pub fn build_envelopes(series: &PerturbationSeries) -> Result<(EnvelopePolynomial, EnvelopePolynomial), FermiError> {
    if series.order() != ENVELOPE_ORDER {
        return Err(FermiError::WrongOrder(series.order()));
    }
    let base = series.numerator()?;
    let norms = (0..=ENVELOPE_ORDER)
        .map(|n| Ok(RadicalComplex::sqrt_rational(&series.norm_sq_of_term(n)?)?))
        .collect::<Result<Vec<_>, FermiError>>()?;
    let worst = EnvelopePolynomial::new(EnvelopeKind::Worst, base.clone(), norms.clone(), BigRational::one());
    let best = EnvelopePolynomial::new(EnvelopeKind::Best, base, norms, BigRational::one());
    Ok((worst, best))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignCertificate {
    pub envelope: Option<EnvelopeKind>,
    pub form: EvaluationForm,
    #[serde(with = "rational_str")]
    pub alpha: BigRational,
    pub value: f64,
    /// Total round-off bound: `oliver + conversion + argument + error_term`.
    pub bound: f64,
    pub sign: CertifiedSign,
    /// Degree `n` in the Oliver bound.
    pub degree: usize,
    /// `sup|p_j|` over the float coefficients, inflated by their conversion errors.
    pub sup_coeff: f64,
    pub eps: f64,
    /// `(n+1)[e^{(2n+1)ε} − 1]·sup|p_j|`.
    pub oliver: f64,
    /// Effect of rounding the exact coefficients to doubles.
    pub conversion: f64,
    /// Effect of rounding α to a double.
    pub argument: f64,
    /// Radius of the ball evaluation of `E` (expression form only).
    pub error_term_radius: f64,
    pub paper_coeff_bound_holds: bool,
}

/// Horner value of a polynomial with bounded float coefficients plus the
/// pieces of its round-off bound. `coeffs[j] = (p̃_j, |p_j − p̃_j| bound)`.
struct HornerBound {
    value: f64,
    oliver: f64,
    conversion: f64,
    argument: f64,
    sup_coeff: f64,
}

/// Fixed order: `v ← p̃_n`, then `v ← v·α̃ + p̃_j` for `j = n−1, …, 0`, which
/// is `2n` roundings, inside the `2n+1` the Oliver bound charges.
fn horner_bound(coeffs: &[(f64, f64)], alpha: &BigRational, eps: f64) -> Result<HornerBound, FermiError> {
    let (x, xrel) = rational_to_f64(alpha)?;
    let dx = x.abs() * xrel;
    let n = coeffs.len().saturating_sub(1);
    let mut value = 0.0;
    for (c, _) in coeffs.iter().rev() {
        value = value * x + c;
    }
    let sup_coeff = coeffs.iter().map(|(c, e)| c.abs() + e).fold(0.0, f64::max);
    let nf = n as f64;
    let oliver = (nf + 1.0) * ((2.0 * nf + 1.0) * eps).exp_m1() * sup_coeff;
    // |α̃| ≤ 1, so |α̃|^j ≤ 1 and the derivative on [α − dx, α + dx] is at most Σ j·|p_j|·(1+dx)^{j−1}
    let conversion: f64 = coeffs.iter().map(|(_, e)| e).sum();
    let grow = (1.0 + dx).powi(n as i32);
    let argument = dx * grow * coeffs.iter().enumerate().map(|(j, (c, e))| j as f64 * (c.abs() + e)).sum::<f64>();
    Ok(HornerBound { value, oliver, conversion, argument, sup_coeff })
}

fn check_alpha(alpha: &BigRational) -> Result<(), FermiError> {
    if alpha.abs() > BigRational::one() {
        return Err(FermiError::OutOfRange(alpha.to_string()));
    }
    Ok(())
}

fn decide(alpha: &BigRational, value: f64, bound: f64, expected: CertifiedSign) -> Result<CertifiedSign, FermiError> {
    if !(value.abs() > bound) {
        return Err(FermiError::Inconclusive { alpha: alpha.to_string(), value, bound });
    }
    let found = if value > 0.0 { CertifiedSign::Positive } else { CertifiedSign::Negative };
    if found != expected {
        return Err(FermiError::SignMismatch { alpha: alpha.to_string(), found, expected });
    }
    Ok(found)
}

/// Slack for rounding in the evaluation of the bound itself.
const BOUND_SLACK: f64 = 1.0 + 1e-6;

/// Certifies the sign of a real-coefficient polynomial at `α ∈ [−1, 1]` with
/// the Oliver bound at `ε = ε_eff`.
pub fn certify_polynomial_sign(
    p: &RadicalPoly,
    alpha: &BigRational,
    expected: CertifiedSign,
) -> Result<SignCertificate, FermiError> {
    check_alpha(alpha)?;
    let coeffs = p
        .coeffs()
        .iter()
        .map(|c| RBall::from_radical(c).map(|b| (b.mid, b.rad)))
        .collect::<Result<Vec<_>, _>>()?;
    let h = horner_bound(&coeffs, alpha, EPS_EFF)?;
    let bound = (h.oliver + h.conversion + h.argument) * BOUND_SLACK;
    let sign = decide(alpha, h.value, bound, expected)?;
    Ok(SignCertificate {
        envelope: None,
        form: EvaluationForm::Cleared,
        alpha: alpha.clone(),
        value: h.value,
        bound,
        sign,
        degree: p.degree(),
        sup_coeff: h.sup_coeff,
        eps: EPS_EFF,
        oliver: h.oliver,
        conversion: h.conversion,
        argument: h.argument,
        error_term_radius: 0.0,
        paper_coeff_bound_holds: h.sup_coeff <= PAPER_COEFF_BOUND,
    })
}

/// Sign of the degree-18 cleared form. `(15−20α)² > 0` for α ≠ 3/4, so it
/// carries the sign of the envelope.
pub fn certify_sign(
    p: &EnvelopePolynomial,
    alpha: &BigRational,
    expected: CertifiedSign,
) -> Result<SignCertificate, FermiError> {
    let mut c = certify_polynomial_sign(p.cleared(), alpha, expected)?;
    c.envelope = Some(p.kind);
    Ok(c)
}

/// Sign of `base ± E` evaluated as written.
pub fn certify_sign_expression(
    p: &EnvelopePolynomial,
    alpha: &BigRational,
    expected: CertifiedSign,
) -> Result<SignCertificate, FermiError> {
    check_alpha(alpha)?;
    let coeffs = p
        .base
        .coeffs()
        .iter()
        .map(|c| RBall::from_rational(c).map(|b| (b.mid, b.rad)))
        .collect::<Result<Vec<_>, _>>()?;
    let h = horner_bound(&coeffs, alpha, EPS_EFF)?;

    let a = RBall::from_rational(alpha)?;
    let mut s = RBall::exact(0.0);
    for c in p.norms.iter().rev() {
        s = s.mul(a).add(RBall::from_radical(c)?);
    }
    let d = RBall::exact(15.0).sub(RBall::exact(20.0).mul(a));
    let a9 = a.powi(9);
    let e = RBall::exact(6.0)
        .mul(a9)
        .mul(s)
        .div(d)
        .add(RBall::exact(9.0).mul(a9).mul(a9).div(d.mul(d)));
    let e = e.mul(RBall::from_rational(&(sign_of(p.kind) * &p.error_scale))?);

    let base_bound = (h.oliver + h.conversion + h.argument) * BOUND_SLACK;
    let total = RBall::new(h.value, base_bound).add(e);
    let sign = decide(alpha, total.mid, total.rad, expected)?;
    Ok(SignCertificate {
        envelope: Some(p.kind),
        form: EvaluationForm::Expression,
        alpha: alpha.clone(),
        value: total.mid,
        bound: total.rad,
        sign,
        degree: p.base.degree(),
        sup_coeff: h.sup_coeff,
        eps: EPS_EFF,
        oliver: h.oliver,
        conversion: h.conversion,
        argument: h.argument,
        error_term_radius: e.rad,
        paper_coeff_bound_holds: h.sup_coeff <= PAPER_COEFF_BOUND,
    })
}

/// The certified bracket of the first magic angle together with the four
/// certificates behind it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MagicAngleBracket {
    #[serde(with = "rational_str")]
    pub lo: BigRational,
    #[serde(with = "rational_str")]
    pub hi: BigRational,
    pub certificates: Vec<SignCertificate>,
}

pub fn alpha_lo() -> BigRational {
    rat(57, 100)
}

pub fn alpha_hi() -> BigRational {
    rat(61, 100)
}

/// `worst < 0` at 0.61 and `best > 0` at 0.57, each in both forms.
pub fn bracket_magic_angle(
    worst: &EnvelopePolynomial,
    best: &EnvelopePolynomial,
) -> Result<MagicAngleBracket, FermiError> {
    let (lo, hi) = (alpha_lo(), alpha_hi());
    let certificates = vec![
        certify_sign_expression(worst, &hi, CertifiedSign::Negative)?,
        certify_sign(worst, &hi, CertifiedSign::Negative)?,
        certify_sign_expression(best, &lo, CertifiedSign::Positive)?,
        certify_sign(best, &lo, CertifiedSign::Positive)?,
    ];
    Ok(MagicAngleBracket { lo, hi, certificates })
}

/// Sign changes of `f` on `[lo, hi]`, located on a uniform scan and refined by
/// bisection to the last representable bit. Not rigorous.
pub fn approximate_roots(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Vec<f64> {
    const SCAN: usize = 4000;
    let mut roots = Vec::new();
    let xs: Vec<f64> = (0..=SCAN).map(|k| lo + (hi - lo) * k as f64 / SCAN as f64).collect();
    let mut prev = f(xs[0]);
    for w in xs.windows(2) {
        let fb = f(w[1]);
        if prev == 0.0 {
            roots.push(w[0]);
        } else if prev.signum() != fb.signum() && fb != 0.0 {
            let (mut a, mut b, mut fa) = (w[0], w[1], prev);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                let fm = f(m);
                if fm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if fm.signum() == fa.signum() {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            roots.push(0.5 * (a + b));
        }
        prev = fb;
    }
    roots
}

pub fn approximate_poly_roots(p: &RationalPoly, lo: f64, hi: f64) -> Vec<f64> {
    let c = p.to_f64_coeffs();
    approximate_roots(|x| c.iter().rev().fold(0.0, |acc, k| acc * x + k), lo, hi)
}

/// `(α, worst, base, best)` on `points + 1` equally spaced α in `[lo, hi]`.
pub fn check_zero_rows(
    worst: &EnvelopePolynomial,
    best: &EnvelopePolynomial,
    lo: f64,
    hi: f64,
    points: usize,
) -> Vec<[f64; 4]> {
    (0..=points)
        .map(|k| {
            let a = lo + (hi - lo) * k as f64 / points as f64;
            [a, worst.eval_f64(a), worst.base.eval_f64(a), best.eval_f64(a)]
        })
        .collect()
}
