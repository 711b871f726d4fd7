//! Sparse vectors in the chiral basis and the exact actions of `H⁰`,
//! `P⊥(H⁰)⁻¹P⊥`, `H¹` and the series step `−P⊥(H⁰)⁻¹P⊥H¹`.
//!
//! Basis functions, in plane-wave components `(ψ₁ᴬ, ψ₁ᴮ, ψ₂ᴬ, ψ₂ᴮ)` sitting on
//! A, B, A, B sites respectively:
//! - `χ^0`: first component at the origin, amplitude 1;
//! - `χ^{s,+1}`: amplitude `1/√3` on every orbit site (component 1 on A, 2 on B);
//! - `χ^{s,−1}`: amplitude `ẑ_t/√3` on every orbit site `t` (component 3 on A, 4 on B).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_rational::BigRational;
use thiserror::Error;

use crate::lattice::{canonicalize, Chirality, LatticeSite, OrbitIndex};
use crate::scalar::{rat, RadicalComplex};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BasisError {
    #[error("vector has a chirality -1 component at {0}")]
    WrongChirality(OrbitIndex),
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ChiralVector {
    entries: BTreeMap<OrbitIndex, RadicalComplex>,
}

impl ChiralVector {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn unit(idx: OrbitIndex) -> Self {
        Self::single(idx, RadicalComplex::one())
    }

    pub fn single(idx: OrbitIndex, c: RadicalComplex) -> Self {
        let mut v = Self::zero();
        v.add_at(idx, c);
        v
    }

    pub fn from_entries(it: impl IntoIterator<Item = (OrbitIndex, RadicalComplex)>) -> Self {
        let mut v = Self::zero();
        for (k, c) in it {
            v.add_at(k, c);
        }
        v
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, idx: &OrbitIndex) -> RadicalComplex {
        self.entries.get(idx).cloned().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&OrbitIndex, &RadicalComplex)> {
        self.entries.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &OrbitIndex> {
        self.entries.keys()
    }

    pub fn add_at(&mut self, idx: OrbitIndex, c: RadicalComplex) {
        if c.is_zero() {
            return;
        }
        let e = self.entries.entry(idx).or_default();
        e.add_assign_ref(&c);
        if e.is_zero() {
            self.entries.remove(&idx);
        }
    }

    fn add_product_at(&mut self, idx: OrbitIndex, a: &RadicalComplex, b: &RadicalComplex) {
        let e = self.entries.entry(idx).or_default();
        e.add_product(a, b);
        if e.is_zero() {
            self.entries.remove(&idx);
        }
    }

    pub fn scale(&self, c: &RadicalComplex) -> Self {
        Self::from_entries(self.entries.iter().map(|(k, v)| (*k, v * c)))
    }

    pub fn add(&self, o: &ChiralVector) -> Self {
        let mut r = self.clone();
        for (k, v) in &o.entries {
            r.add_at(*k, v.clone());
        }
        r
    }

    pub fn sub(&self, o: &ChiralVector) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        ChiralVector {
            entries: self.entries.iter().map(|(k, v)| (*k, -v)).collect(),
        }
    }

    /// `⟨v, v⟩`, real and non-negative.
    pub fn norm_sq(&self) -> RadicalComplex {
        inner(self, self)
    }

    /// Human-readable listing, one `coefficient · χ^{site,chirality}` per line.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{v} · {k}");
        }
        s
    }
}

/// `Σ conj(u_i)·v_i`.
pub fn inner(u: &ChiralVector, v: &ChiralVector) -> RadicalComplex {
    let mut acc = RadicalComplex::zero();
    let (small, large, flip) = if u.len() <= v.len() { (u, v, false) } else { (v, u, true) };
    for (k, a) in &small.entries {
        if let Some(b) = large.entries.get(k) {
            if flip {
                acc.add_product(&b.conj(), a);
            } else {
                acc.add_product(&a.conj(), b);
            }
        }
    }
    acc
}

/// `Σ u_i·v_i`, no conjugation.
pub fn bilinear(u: &ChiralVector, v: &ChiralVector) -> RadicalComplex {
    let mut acc = RadicalComplex::zero();
    let (small, large) = if u.len() <= v.len() { (u, v) } else { (v, u) };
    for (k, a) in &small.entries {
        if let Some(b) = large.entries.get(k) {
            acc.add_product(a, b);
        }
    }
    acc
}

/// `f(r) ↦ f*(−r)`: chirality +1 basis functions are fixed by it, so it
/// conjugates coefficients.
pub fn conj_reflect(v: &ChiralVector) -> Result<ChiralVector, BasisError> {
    if let Some(k) = v.support().find(|k| k.chirality() == Chirality::Minus) {
        return Err(BasisError::WrongChirality(*k));
    }
    Ok(ChiralVector {
        entries: v.entries.iter().map(|(k, c)| (*k, c.conj())).collect(),
    })
}

pub fn apply_h0(v: &ChiralVector) -> ChiralVector {
    let mut out = ChiralVector::zero();
    for (k, c) in v.iter() {
        if let OrbitIndex::Orbit { rep, chirality } = k {
            let s = RadicalComplex::sqrt_int(rep.norm_sq() as u64);
            out.add_product_at(
                OrbitIndex::Orbit { rep: *rep, chirality: chirality.flip() },
                c,
                &s,
            );
        }
    }
    out
}

pub fn apply_h0_inv_perp(v: &ChiralVector) -> ChiralVector {
    let mut out = ChiralVector::zero();
    for (k, c) in v.iter() {
        if let OrbitIndex::Orbit { rep, chirality } = k {
            let s = RadicalComplex::sqrt_int(rep.norm_sq() as u64)
                .invert()
                .expect("orbit norms are positive");
            out.add_product_at(
                OrbitIndex::Orbit { rep: *rep, chirality: chirality.flip() },
                c,
                &s,
            );
        }
    }
    out
}

/// The interlayer phases `1, e^{iφ}, e^{−iφ}` attached to hops along `q₁, q₂, q₃`.
pub fn hop_phases() -> [RadicalComplex; 3] {
    let e_plus = RadicalComplex::term(1, rat(-1, 2), BigRational::from_integer(0.into()))
        + RadicalComplex::sqrt_int(3).scale(&rat(1, 2)) * RadicalComplex::i();
    [RadicalComplex::one(), e_plus.clone(), e_plus.conj()]
}

/// `H¹` applied to one basis function, as (target, coefficient) pairs.
///
/// Every rule comes from one formula: the coefficient onto the orbit of a
/// hop target `t` is `|orbit(s)|·a_s·h·conj(a_t)` computed at the
/// representative `s`, with `a` the basis amplitude on the site and `h` the
/// plane-wave hopping amplitude.
pub fn h1_column(idx: &OrbitIndex) -> Vec<(OrbitIndex, RadicalComplex)> {
    let c = hop_phases();
    let sqrt3 = RadicalComplex::sqrt_int(3);
    let zh = |t: &LatticeSite| t.z_hat().expect("hop targets off the origin");
    let mut out = Vec::with_capacity(3);
    match *idx {
        // H¹χ^0 = √3·conj(ẑ_{q₁})·χ^{q₁,−1}
        OrbitIndex::Origin => {
            let q1 = LatticeSite::b(0, 0);
            out.push((canonicalize(q1, Chirality::Minus), &sqrt3 * &zh(&q1).conj()));
        }
        OrbitIndex::Orbit { rep, chirality: Chirality::Plus } => {
            for (j, t) in rep.neighbors().iter().enumerate() {
                // the three hops of the q₁ orbit onto the origin's second
                // component carry phases summing to zero
                if t.is_origin() {
                    continue;
                }
                out.push((canonicalize(*t, Chirality::Minus), &c[j] * &zh(t).conj()));
            }
        }
        OrbitIndex::Orbit { rep, chirality: Chirality::Minus } => {
            let z = zh(&rep);
            for (j, t) in rep.neighbors().iter().enumerate() {
                let coef = &z * &c[j].conj();
                if t.is_origin() {
                    // target amplitude 1 instead of 1/√3
                    out.push((OrbitIndex::Origin, &coef * &sqrt3));
                } else {
                    out.push((canonicalize(*t, Chirality::Plus), coef));
                }
            }
        }
    }
    out
}

pub fn apply_h1(v: &ChiralVector) -> ChiralVector {
    let mut out = ChiralVector::zero();
    for (k, a) in v.iter() {
        for (t, coef) in h1_column(k) {
            out.add_product_at(t, a, &coef);
        }
    }
    out
}

/// `−P⊥(H⁰)⁻¹P⊥H¹`.
pub fn apply_step(v: &ChiralVector) -> ChiralVector {
    apply_h0_inv_perp(&apply_h1(v)).neg()
}
