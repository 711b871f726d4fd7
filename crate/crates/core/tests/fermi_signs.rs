use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use proptest::prelude::*;

use tbg_core::fermi::{
    alpha_hi, alpha_lo, approximate_poly_roots, approximate_roots, certify_sign_expression, check_zero_rows,
    CertifiedSign, EnvelopeKind, FermiError,
};
use tbg_core::scalar::rat;
use tbg_core::series::numerator_series;
use tbg_core::{build_envelopes, bracket_magic_angle, certify_sign, compute_series, EnvelopePolynomial, RationalPoly};

/// Rational interval `[lo, hi]`.
#[derive(Clone, Debug)]
struct Iv {
    lo: BigRational,
    hi: BigRational,
}

const BITS: usize = 160;

/// `√(p/q)` bracketed through an integer square root at `BITS` fractional bits.
fn sqrt_iv(x: &BigRational) -> Iv {
    let (p, q) = (x.numer().clone(), x.denom().clone());
    let scaled: BigInt = (&p * &q) << (2 * BITS);
    let s = scaled.sqrt();
    let d = q << BITS;
    Iv { lo: BigRational::new(s.clone(), d.clone()), hi: BigRational::new(s + 1, d) }
}

/// `base(α) + k·E(α)` as a rational interval, `α > 0`, `k` any sign.
fn envelope_iv(base: &RationalPoly, norms_sq: &[BigRational], alpha: &BigRational, k: &BigRational) -> Iv {
    let mut s_lo = BigRational::zero();
    let mut s_hi = BigRational::zero();
    let mut p = BigRational::one();
    for n in norms_sq {
        let r = sqrt_iv(n);
        s_lo += &p * &r.lo;
        s_hi += &p * &r.hi;
        p *= alpha;
    }
    let d = rat(15, 1) - rat(20, 1) * alpha;
    assert!(d.is_positive());
    let a9 = alpha.pow(9);
    let fixed = rat(9, 1) * &a9 * &a9 / (&d * &d);
    let f = rat(6, 1) * &a9 / &d;
    let e_lo = &f * s_lo + &fixed;
    let e_hi = &f * s_hi + &fixed;
    let b = base.eval(alpha);
    let (x, y) = (&b + k * &e_lo, &b + k * &e_hi);
    if x <= y {
        Iv { lo: x, hi: y }
    } else {
        Iv { lo: y, hi: x }
    }
}

fn iv_sign(iv: &Iv) -> Option<CertifiedSign> {
    if iv.lo.is_positive() {
        Some(CertifiedSign::Positive)
    } else if iv.hi.is_negative() {
        Some(CertifiedSign::Negative)
    } else {
        None
    }
}

fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap()
}

fn setup() -> (EnvelopePolynomial, EnvelopePolynomial, Vec<BigRational>) {
    let s = compute_series(8);
    let (w, b) = build_envelopes(&s).unwrap();
    let norms = (0..=8).map(|n| s.norm_sq_of_term(n).unwrap()).collect();
    (w, b, norms)
}

fn k_of(e: &EnvelopePolynomial) -> BigRational {
    match e.kind {
        EnvelopeKind::Worst => e.error_scale.clone(),
        EnvelopeKind::Best => -e.error_scale.clone(),
    }
}

#[test]
fn bracket_certificates_agree_with_interval_oracle() {
    let (worst, best, norms) = setup();
    let br = bracket_magic_angle(&worst, &best).unwrap();
    assert_eq!(br.certificates.len(), 4);
    for c in &br.certificates {
        let env = if c.envelope == Some(EnvelopeKind::Worst) { &worst } else { &best };
        let iv = envelope_iv(&env.base, &norms, &c.alpha, &k_of(env));
        assert_eq!(iv_sign(&iv), Some(c.sign));
        // the float value and its bound contain the exact value
        let (lo, hi) = (to_f64(&iv.lo), to_f64(&iv.hi));
        let scale = if c.form == tbg_core::fermi::EvaluationForm::Cleared {
            let d = 15.0 - 20.0 * to_f64(&c.alpha);
            d * d
        } else {
            1.0
        };
        assert!((c.value - lo * scale).abs() <= c.bound + 1e-15, "{c:?}");
        assert!((c.value - hi * scale).abs() <= c.bound + 1e-15, "{c:?}");
        assert!(c.bound < c.value.abs());
    }
    let signs: Vec<_> = br.certificates.iter().map(|c| c.sign).collect();
    use CertifiedSign::*;
    assert_eq!(signs, [Negative, Negative, Positive, Positive]);
}

#[test]
fn expression_form_bound_is_below_1e_10() {
    let (worst, best, _) = setup();
    let w = certify_sign_expression(&worst, &alpha_hi(), CertifiedSign::Negative).unwrap();
    let b = certify_sign_expression(&best, &alpha_lo(), CertifiedSign::Positive).unwrap();
    assert!(w.bound < 1e-10 && b.bound < 1e-10);
    assert!((w.value + 0.018830737780969).abs() < 1e-12);
    assert!((b.value - 0.028574943497549).abs() < 1e-12);
}

#[test]
fn envelopes_differ_by_twice_the_error_term() {
    let (worst, best, _) = setup();
    for k in 0..100 {
        let a = 0.5 + 0.15 * k as f64 / 99.0;
        let ar = BigRational::new(BigInt::from(k * 15 + 4950), BigInt::from(9900));
        let e = worst.error_term(&ar).to_c64().re;
        let diff = worst.eval_f64(a) - best.eval_f64(a);
        assert!((diff - 2.0 * e).abs() < 1e-12, "α = {a}");
        let exact = (&worst.eval_exact(&ar) - &best.eval_exact(&ar)).to_c64().re;
        assert!((exact - 2.0 * e).abs() < 1e-14);
    }
}

#[test]
fn envelope_base_is_the_order_eight_numerator() {
    let (worst, best, _) = setup();
    let n = numerator_series(8).unwrap();
    assert_eq!(worst.base, n);
    assert_eq!(best.base, n);
    assert_eq!(worst.cleared().degree(), 18);
}

#[test]
fn scaled_error_term_tracks_the_oracle() {
    let (worst, best, norms) = setup();
    for scale in [rat(0, 1), rat(1, 1), rat(3, 1)] {
        for (env, alpha) in [(&worst, alpha_hi()), (&best, alpha_lo())] {
            let e = env.with_error_scale(scale.clone());
            let iv = envelope_iv(&e.base, &norms, &alpha, &k_of(&e));
            let want = iv_sign(&iv).expect("oracle decides");
            let flip = match want {
                CertifiedSign::Positive => CertifiedSign::Negative,
                CertifiedSign::Negative => CertifiedSign::Positive,
            };
            for form in 0..2 {
                let run = |s| if form == 0 { certify_sign(&e, &alpha, s) } else { certify_sign_expression(&e, &alpha, s) };
                assert_eq!(run(want).unwrap().sign, want);
                assert!(matches!(run(flip), Err(FermiError::SignMismatch { .. })));
            }
        }
    }
}

#[test]
fn check_zero_rows_at_point_six() {
    let (worst, best, _) = setup();
    let rows = check_zero_rows(&worst, &best, 0.5, 0.65, 300);
    assert_eq!(rows.len(), 301);
    let r = rows.iter().find(|r| (r[0] - 0.6).abs() < 1e-12).unwrap();
    let (w, base, b) = (r[1], r[2], r[3]);
    assert!(base < 0.0);
    assert!(b < base && base < w);
}

#[test]
fn approximate_roots_five_figures() {
    let (worst, best, _) = setup();
    let num = approximate_poly_roots(&worst.base, 0.5, 0.65);
    let w = approximate_roots(|a| worst.eval_f64(a), 0.5, 0.65);
    let b = approximate_roots(|a| best.eval_f64(a), 0.5, 0.65);
    assert_eq!((num.len(), w.len(), b.len()), (1, 1, 1));
    assert!((num[0] - 0.58597).abs() < 1e-5, "{num:?}");
    assert!((b[0] - 0.57683).abs() < 1e-5, "{b:?}");
    assert!((w[0] - 0.60177).abs() < 1e-5, "{w:?}");
    // the bracket endpoints sit outside the envelope roots
    assert!(0.57 < b[0] && w[0] < 0.61);
}

#[test]
fn out_of_range_alpha_rejected() {
    let (worst, _, _) = setup();
    assert!(matches!(certify_sign(&worst, &rat(3, 2), CertifiedSign::Negative), Err(FermiError::OutOfRange(_))));
}

fn perturbation() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-1000i64..=1000, 17)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Moving every base coefficient by at most `bound/(n+1)` cannot flip a
    /// certified sign at |α| ≤ 1.
    #[test]
    fn certified_sign_survives_coefficient_noise(u in perturbation(), which in 0usize..2) {
        let (worst, best, norms) = setup();
        let (env, alpha, want) = if which == 0 {
            (&worst, alpha_hi(), CertifiedSign::Negative)
        } else {
            (&best, alpha_lo(), CertifiedSign::Positive)
        };
        let c = certify_sign_expression(env, &alpha, want).unwrap();
        let n = env.base.degree() as i64;
        // δ_j = bound·u_j/(1000(n+1)), made rational through a 2^-80 grid
        let unit = c.bound / (n + 1) as f64 / 1000.0;
        let unit = BigRational::new(BigInt::from((unit * 2f64.powi(80)) as i128), BigInt::one() << 80);
        let coeffs: Vec<BigRational> = env
            .base
            .coeffs()
            .iter()
            .zip(&u)
            .map(|(a, &d)| a + &unit * BigRational::from_integer(BigInt::from(d)))
            .collect();
        let base = RationalPoly::new(coeffs);
        let iv = envelope_iv(&base, &norms, &alpha, &k_of(env));
        prop_assert_eq!(iv_sign(&iv), Some(want));
    }
}

#[test]
fn interval_oracle_is_tight() {
    let two = BigRational::from_integer(BigInt::from(2));
    let r = sqrt_iv(&two);
    assert!(&r.lo * &r.lo <= two && two <= &r.hi * &r.hi);
    let w = &r.hi - &r.lo;
    assert!(w < BigRational::new(BigInt::one(), BigInt::from_biguint(Sign::Plus, num_bigint::BigUint::one() << 150)));
}
