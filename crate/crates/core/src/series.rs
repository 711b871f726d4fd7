//! The expansion `ψ^α = Σ αⁿ Ψⁿ` of the K-point zero mode and the exact
//! numerator and denominator series of the Fermi velocity.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::basis::{apply_h0, apply_h1, apply_step, ChiralVector};
use crate::lattice::OrbitIndex;
use crate::poly::RationalPoly;
use crate::scalar::{radical_product, RadicalComplex};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("term {0} requested but the series was computed to order {1}")]
    OrderExceeded(usize, usize),
    #[error("coefficient of α^{0} is not rational: {1}")]
    NotRational(usize, String),
}

#[derive(Clone, Debug)]
pub struct PerturbationSeries {
    order: usize,
    terms: Vec<ChiralVector>,
}

/// `Ψ⁰ = χ^0`, `Ψⁿ = −P⊥(H⁰)⁻¹P⊥H¹Ψⁿ⁻¹`.
pub fn compute_series(order: usize) -> PerturbationSeries {
    let mut terms = Vec::with_capacity(order + 1);
    terms.push(ChiralVector::unit(OrbitIndex::Origin));
    for n in 1..=order {
        let next = apply_step(&terms[n - 1]);
        terms.push(next);
    }
    PerturbationSeries { order, terms }
}

impl PerturbationSeries {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn terms(&self) -> &[ChiralVector] {
        &self.terms
    }

    pub fn term(&self, n: usize) -> Result<&ChiralVector, SeriesError> {
        self.terms.get(n).ok_or(SeriesError::OrderExceeded(n, self.order))
    }

    /// `‖Ψⁿ‖²`.
    pub fn norm_sq_of_term(&self, n: usize) -> Result<BigRational, SeriesError> {
        let v = self.term(n)?;
        as_rational(n, &v.norm_sq())
    }

    /// `‖H¹Ψⁿ‖²`.
    pub fn h1_norm_sq_of_term(&self, n: usize) -> Result<BigRational, SeriesError> {
        let v = apply_h1(self.term(n)?);
        as_rational(n, &v.norm_sq())
    }

    /// `H⁰Ψⁿ + H¹Ψⁿ⁻¹`, which vanishes identically.
    pub fn residual(&self, n: usize) -> Result<ChiralVector, SeriesError> {
        let a = apply_h0(self.term(n)?);
        let b = apply_h1(self.term(n - 1)?);
        Ok(a.add(&b))
    }

    /// `Σ_k α^k Σ_{m+n=k} Σ_i Ψᵐ_i Ψⁿ_i` over all `m, n ≤ N`.
    pub fn numerator(&self) -> Result<RationalPoly, SeriesError> {
        self.numerator_truncated(2 * self.order)
    }

    /// Numerator restricted to `m + n ≤ max_power`.
    pub fn numerator_truncated(&self, max_power: usize) -> Result<RationalPoly, SeriesError> {
        self.pair_series(max_power, Pairing::Bilinear)
    }

    /// `⟨Σ αⁿΨⁿ, Σ αⁿΨⁿ⟩` over all `m, n ≤ N`.
    pub fn denominator(&self) -> Result<RationalPoly, SeriesError> {
        self.denominator_truncated(2 * self.order)
    }

    pub fn denominator_truncated(&self, max_power: usize) -> Result<RationalPoly, SeriesError> {
        self.pair_series(max_power, Pairing::Inner)
    }

    /// Sums `f(Ψᵐ, Ψⁿ)` into the coefficient of `α^{m+n}`. Odd `m + n` pairs
    /// live on opposite sublattices and vanish, so they are skipped.
    fn pair_series(&self, max_power: usize, pairing: Pairing) -> Result<RationalPoly, SeriesError> {
        let n = self.order;
        let scaled: Vec<ScaledVector> = self.terms.par_iter().map(ScaledVector::new).collect();
        let pairs: Vec<(usize, usize)> = (0..=n)
            .flat_map(|a| (a..=n).map(move |b| (a, b)))
            .filter(|(a, b)| (a + b) % 2 == 0 && a + b <= max_power)
            .collect();
        let values: Vec<(usize, RadicalComplex)> = pairs
            .par_iter()
            .map(|&(a, b)| {
                let x = scaled[a].pair(&scaled[b], pairing);
                // f(Ψᵇ, Ψᵃ) is x itself for the bilinear pairing and conj(x) for
                // the inner product
                let x = match (a == b, pairing) {
                    (true, _) => x,
                    (false, Pairing::Bilinear) => &x + &x,
                    (false, Pairing::Inner) => &x + &x.conj(),
                };
                (a + b, x)
            })
            .collect();
        let top = max_power.min(2 * n);
        let mut acc = vec![RadicalComplex::zero(); top + 1];
        for (k, x) in values {
            acc[k].add_assign_ref(&x);
        }
        let coeffs = acc
            .iter()
            .enumerate()
            .map(|(k, c)| as_rational(k, c))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RationalPoly::new(coeffs))
    }

    /// `Σ_{n ≤ N} αⁿ Ψⁿ` at an exact α.
    pub fn evaluate(&self, alpha: &BigRational) -> ChiralVector {
        let mut acc = ChiralVector::zero();
        let mut p = BigRational::from_integer(1.into());
        for t in &self.terms {
            acc = acc.add(&t.scale(&RadicalComplex::from_rational(p.clone())));
            p *= alpha;
        }
        acc
    }
}

#[derive(Clone, Copy)]
enum Pairing {
    Bilinear,
    Inner,
}

/// A vector over one common denominator, so that pair sums run in integers
/// instead of reducing a rational at every step.
struct ScaledVector {
    denom: BigInt,
    entries: BTreeMap<OrbitIndex, Vec<(u64, BigInt, BigInt)>>,
}

impl ScaledVector {
    fn new(v: &ChiralVector) -> Self {
        let mut denom = BigInt::one();
        for (_, c) in v.iter() {
            for (_, g) in c.terms() {
                denom = denom.lcm(g.re.denom()).lcm(g.im.denom());
            }
        }
        let int = |q: &BigRational| (q.numer() * &denom) / q.denom();
        let entries = v
            .iter()
            .map(|(k, c)| (*k, c.terms().map(|(d, g)| (d, int(&g.re), int(&g.im))).collect()))
            .collect();
        ScaledVector { denom, entries }
    }

    /// `Σ uᵢvᵢ`, or `Σ conj(uᵢ)vᵢ` for the inner product.
    fn pair(&self, o: &ScaledVector, pairing: Pairing) -> RadicalComplex {
        let conj = matches!(pairing, Pairing::Inner);
        let mut acc: BTreeMap<u64, (BigInt, BigInt)> = BTreeMap::new();
        for (k, a) in &self.entries {
            let Some(b) = o.entries.get(k) else { continue };
            for (da, ra, ia) in a {
                for (db, rb, ib) in b {
                    let (m, d) = radical_product(*da, *db);
                    let (re, im) = if conj { (ra * rb + ia * ib, ra * ib - ia * rb) } else { (ra * rb - ia * ib, ra * ib + ia * rb) };
                    let e = acc.entry(d).or_insert_with(|| (BigInt::zero(), BigInt::zero()));
                    e.0 += re * m;
                    e.1 += im * m;
                }
            }
        }
        let den = &self.denom * &o.denom;
        let mut out = RadicalComplex::zero();
        for (d, (re, im)) in acc {
            out.add_assign_ref(&RadicalComplex::term(d, BigRational::new(re, den.clone()), BigRational::new(im, den.clone())));
        }
        out
    }
}

fn as_rational(k: usize, x: &RadicalComplex) -> Result<BigRational, SeriesError> {
    if x.is_zero() {
        return Ok(BigRational::zero());
    }
    x.as_rational().ok_or_else(|| SeriesError::NotRational(k, x.to_string()))
}

/// Numerator series of order `N`.
pub fn numerator_series(n: usize) -> Result<RationalPoly, SeriesError> {
    compute_series(n).numerator()
}

/// Denominator series of order `N`.
pub fn denominator_series(n: usize) -> Result<RationalPoly, SeriesError> {
    compute_series(n).denominator()
}
