//! The momentum-space honeycomb: A sites `m·b₁ + n·b₂` and B sites
//! `q₁ + m·b₁ + n·b₂`, with `b₁ = (√3/2, 3/2)`, `b₂ = (−√3/2, 3/2)` and
//! `q₁ = (0, −1)`. `q₂ = B(1,0)` and `q₃ = B(0,1)`.

use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::RadicalComplex;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("the origin has no phase")]
    OriginHasNoPhase,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sublattice {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeSite {
    pub sub: Sublattice,
    pub m: i64,
    pub n: i64,
}

/// Offsets of `q₁, q₂, q₃` relative to `B(0,0)`.
pub const Q_OFFSETS: [(i64, i64); 3] = [(0, 0), (1, 0), (0, 1)];

impl LatticeSite {
    pub const ORIGIN: LatticeSite = LatticeSite::a(0, 0);

    pub const fn a(m: i64, n: i64) -> Self {
        LatticeSite { sub: Sublattice::A, m, n }
    }

    pub const fn b(m: i64, n: i64) -> Self {
        LatticeSite { sub: Sublattice::B, m, n }
    }

    pub fn is_origin(&self) -> bool {
        *self == Self::ORIGIN
    }

    /// Exact `|v|²`; always an integer on this lattice.
    pub fn norm_sq(&self) -> i64 {
        let (m, n) = (self.m, self.n);
        let a = 3 * (m * m + m * n + n * n);
        match self.sub {
            Sublattice::A => a,
            Sublattice::B => a - 3 * (m + n) + 1,
        }
    }

    pub fn norm_sq_rational(&self) -> BigRational {
        BigRational::from_integer(self.norm_sq().into())
    }

    /// Cartesian coordinates in floating point.
    pub fn vector(&self) -> (f64, f64) {
        let s3 = 3f64.sqrt();
        let (m, n) = (self.m as f64, self.n as f64);
        let x = s3 / 2.0 * (m - n);
        let y = 1.5 * (m + n);
        match self.sub {
            Sublattice::A => (x, y),
            Sublattice::B => (x, y - 1.0),
        }
    }

    /// Rotation by −2π/3.
    pub fn rotate(&self) -> Self {
        let (m, n) = (self.m, self.n);
        match self.sub {
            Sublattice::A => Self::a(n, -m - n),
            Sublattice::B => Self::b(n, 1 - m - n),
        }
    }

    pub fn orbit(&self) -> Vec<LatticeSite> {
        if self.is_origin() {
            return vec![*self];
        }
        let r = self.rotate();
        vec![*self, r, r.rotate()]
    }

    /// Lexicographic minimum of the rotation orbit.
    pub fn canonical(&self) -> Self {
        let r = self.rotate();
        let rr = r.rotate();
        *[*self, r, rr].iter().min().unwrap()
    }

    /// The three nearest neighbours reached by `H¹`: `G + q_j` for A sites,
    /// `p − q_j` for B sites, in the order `j = 1, 2, 3`.
    pub fn neighbors(&self) -> [LatticeSite; 3] {
        Q_OFFSETS.map(|(dm, dn)| match self.sub {
            Sublattice::A => Self::b(self.m + dm, self.n + dn),
            Sublattice::B => Self::a(self.m - dm, self.n - dn),
        })
    }

    /// Exact `v₁ + i v₂`.
    pub fn z(&self) -> RadicalComplex {
        let half = BigRational::new(1.into(), 2.into());
        let x = RadicalComplex::sqrt_int(3).scale(&(BigRational::from_integer((self.m - self.n).into()) * &half));
        let twice_y = 3 * (self.m + self.n)
            - match self.sub {
                Sublattice::A => 0,
                Sublattice::B => 2,
            };
        let y = RadicalComplex::term(1, BigRational::zero(), BigRational::new(twice_y.into(), 2.into()));
        &x + &y
    }

    /// Exact unit complex `(v₁ + i v₂)/|v|`.
    pub fn z_hat(&self) -> Result<RadicalComplex, LatticeError> {
        if self.is_origin() {
            return Err(LatticeError::OriginHasNoPhase);
        }
        let n = self.norm_sq() as u64;
        let inv = RadicalComplex::sqrt_int(n).invert().expect("nonzero norm");
        Ok(&self.z() * &inv)
    }
}

impl fmt::Display for LatticeSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.sub {
            Sublattice::A => 'A',
            Sublattice::B => 'B',
        };
        write!(f, "{s}({},{})", self.m, self.n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Chirality {
    Plus,
    Minus,
}

impl Chirality {
    pub fn flip(self) -> Self {
        match self {
            Chirality::Plus => Chirality::Minus,
            Chirality::Minus => Chirality::Plus,
        }
    }

    pub fn sign(self) -> i32 {
        match self {
            Chirality::Plus => 1,
            Chirality::Minus => -1,
        }
    }
}

/// Label of a chiral basis function: the origin, or a rotation orbit with a chirality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OrbitIndex {
    Origin,
    Orbit { rep: LatticeSite, chirality: Chirality },
}

impl OrbitIndex {
    pub fn rep(&self) -> LatticeSite {
        match self {
            OrbitIndex::Origin => LatticeSite::ORIGIN,
            OrbitIndex::Orbit { rep, .. } => *rep,
        }
    }

    /// The origin counts as chirality +1.
    pub fn chirality(&self) -> Chirality {
        match self {
            OrbitIndex::Origin => Chirality::Plus,
            OrbitIndex::Orbit { chirality, .. } => *chirality,
        }
    }

    pub fn norm_sq(&self) -> i64 {
        self.rep().norm_sq()
    }

    /// Same orbit, other chirality; the origin maps to itself.
    pub fn partner(&self) -> OrbitIndex {
        match self {
            OrbitIndex::Origin => OrbitIndex::Origin,
            OrbitIndex::Orbit { rep, chirality } => OrbitIndex::Orbit {
                rep: *rep,
                chirality: chirality.flip(),
            },
        }
    }
}

impl fmt::Display for OrbitIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrbitIndex::Origin => write!(f, "χ^{{0}}"),
            OrbitIndex::Orbit { rep, chirality } => write!(f, "χ^{{{rep},{:+}}}", chirality.sign()),
        }
    }
}

pub fn canonicalize(site: LatticeSite, chirality: Chirality) -> OrbitIndex {
    if site.is_origin() {
        return OrbitIndex::Origin;
    }
    OrbitIndex::Orbit {
        rep: site.canonical(),
        chirality,
    }
}

/// Every canonical orbit representative with `norm_sq ≤ max_norm_sq`, ordered by
/// norm then representative. The origin comes first.
pub fn orbits_up_to(max_norm_sq: i64) -> Vec<LatticeSite> {
    let r = ((max_norm_sq as f64).sqrt() as i64) + 3;
    let mut v = Vec::new();
    for sub in [Sublattice::A, Sublattice::B] {
        for m in -r..=r {
            for n in -r..=r {
                let s = LatticeSite { sub, m, n };
                if s.norm_sq() <= max_norm_sq && s.canonical() == s {
                    v.push(s);
                }
            }
        }
    }
    v.sort_by_key(|s| (s.norm_sq(), *s));
    v
}
