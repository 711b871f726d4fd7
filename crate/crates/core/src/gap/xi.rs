//! The 81-function subspace Ξ and the combinatorial facts the gap argument
//! needs about it.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::lattice::{orbits_up_to, Chirality, LatticeSite, OrbitIndex};
use crate::series::PerturbationSeries;

use super::GapError;

/// Largest `|G|²` kept wholesale.
pub const XI_MAX_NORM_SQ: i64 = 48;
/// `μ²`: the smallest `H⁰` eigenvalue left out, squared.
pub const MU_SQ: i64 = 49;
pub const XI_DIM: usize = 81;

/// The two norm-49 orbits that are kept. The third, through `q₁ − 2b₁ − 2b₂`,
/// would give a boundary site two hops out of Ξ.
pub fn added_orbits() -> [LatticeSite; 2] {
    [LatticeSite::b(-4, 1).canonical(), LatticeSite::b(1, -4).canonical()]
}

pub fn excluded_orbit() -> LatticeSite {
    LatticeSite::b(-2, -2).canonical()
}

/// The published enumeration of Ξ: `(|G|², lines)` where every line lists
/// members of one rotation orbit.
pub const SUPPLEMENTARY_LISTING: &[(i64, &[&[&str]])] = &[
    (0, &[&["0"]]),
    (1, &[&["q1", "q1 + b1", "q1 + b2"]]),
    (3, &[&["-b1", "b2", "b1 - b2"], &["-b2", "b1", "b2 - b1"]]),
    (4, &[&["q1 + b1 + b2", "q1 + b1 - b2", "q1 + b2 - b1"]]),
    (7, &[&["q1 - b1", "q1 + 2b2", "q1 + 2b1 - b2"], &["q1 - b2", "q1 + 2b1", "q1 + 2b2 - b1"]]),
    (9, &[&["b1 + b2", "b1 - 2b2", "b2 - 2b1"], &["-b1 - b2", "2b2 - b1", "2b1 - b2"]]),
    (12, &[&["-2b1", "2b2", "2b1 - 2b2"], &["-2b2", "2b1", "2b2 - 2b1"]]),
    (
        13,
        &[
            &["q1 + b1 - 2b2", "q1 - 2b1 + 2b2", "q1 + 2b1 + b2"],
            &["q1 + b2 - 2b1", "q1 - 2b2 + 2b1", "q1 + 2b2 + b1"],
        ],
    ),
    (16, &[&["q1 - b1 - b2", "q1 - b1 + 3b2", "q1 + 3b1 - b2"]]),
    (
        19,
        &[&["q1 - 2b1", "q1 + 3b2", "q1 + 3b1 - 2b2"], &["q1 - 2b2", "q1 + 3b1", "q1 + 3b2 - 2b1"]],
    ),
    (
        21,
        &[
            &["-3b1 + b2", "2b1 - 3b2", "b1 + 2b2"],
            &["-3b1 + 2b2", "b1 - 3b2", "2b1 + b2"],
            &["-b1 - 2b2", "-2b1 + 3b2", "3b1 - b2"],
            &["-b2 - 2b1", "-2b2 + 3b1", "3b2 - b1"],
        ],
    ),
    (25, &[&["q1 + 2b1 + 2b2", "q1 + 2b1 - 3b2", "q1 - 3b1 + 2b2"]]),
    (27, &[&["-3b1", "3b2", "3b1 - 3b2"], &["-3b2", "3b1", "3b2 - 3b1"]]),
    (
        28,
        &[&["q1 - 3b1 + b2", "q1 + 3b1 - 3b2", "q1 + b1 + 3b2"], &["q1 - 3b1 + 3b2", "q1 + b1 - 3b2"]],
    ),
    (
        31,
        &[
            &["q1 - 2b1 - b2", "q1 + 4b1 - 2b2", "q1 - b1 + 4b2"],
            &["q1 - 2b1 + 4b2", "q1 - b1 - 2b2", "q1 + 4b1 - b2"],
        ],
    ),
    (36, &[&["-4b1 + 2b2", "2b1 - 4b2", "2b1 + 2b2"], &["-2b1 - 2b2", "4b1 - 2b2", "-2b1 + 4b2"]]),
    (
        37,
        &[&["q1 - 3b1", "q1 + 4b1 - 3b2", "q1 + 4b2"], &["q1 - 3b1 + 4b2", "q1 - 3b2", "q1 + 4b1"]],
    ),
    (
        39,
        &[
            &["-4b1 + b2", "3b1 - 4b2", "b1 + 3b2"],
            &["-4b1 + 3b2", "b1 - 4b2", "3b1 + b2"],
            &["-3b1 - b2", "4b1 - 3b2", "-b1 + 4b2"],
            &["-3b1 + 4b2", "-b1 - 3b2", "4b1 - b2"],
        ],
    ),
    (
        43,
        &[
            &["q1 - 4b1 + 2b2", "q1 + 3b1 - 4b2", "q1 + 2b1 + 3b2"],
            &["q1 - 4b1 + 3b2", "q1 + 2b1 - 4b2", "q1 + 3b1 + 2b2"],
        ],
    ),
    (48, &[&["-4b1", "4b1 - 4b2", "4b2"], &["-4b1 + 4b2", "-4b2", "4b1"]]),
    (
        49,
        &[
            &["q1 - 4b1 + b2", "q1 + 4b1 - 4b2", "q1 + b1 + 4b2"],
            &["q1 - 4b1 + 4b2", "q1 + b1 - 4b2", "q1 + 4b1 + b2"],
        ],
    ),
];

/// Parses `q1 + 2b1 − b2`-style site expressions.
pub fn parse_site(expr: &str) -> Option<LatticeSite> {
    let s: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
    if s == "0" {
        return Some(LatticeSite::ORIGIN);
    }
    let (mut q, mut m, mut n) = (0i64, 0i64, 0i64);
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let mut sign = 1;
        if bytes[i] == b'+' || bytes[i] == b'-' {
            if bytes[i] == b'-' {
                sign = -1;
            }
            i += 1;
        }
        let start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        let k: i64 = if i == start { 1 } else { s[start..i].parse().ok()? };
        let name = s.get(i..i + 2)?;
        i += 2;
        match name {
            "q1" => q += sign * k,
            "b1" => m += sign * k,
            "b2" => n += sign * k,
            _ => return None,
        }
    }
    match q {
        0 => Some(LatticeSite::a(m, n)),
        1 => Some(LatticeSite::b(m, n)),
        _ => None,
    }
}

/// Ξ as an ordered basis: the origin and the chirality +1 functions first,
/// then the chirality −1 partners in the same orbit order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct XiBasis {
    /// Non-origin orbit representatives ordered by norm then representative.
    orbits: Vec<LatticeSite>,
}

impl XiBasis {
    pub fn from_orbits(reps: impl IntoIterator<Item = LatticeSite>) -> Self {
        let set: BTreeSet<LatticeSite> =
            reps.into_iter().filter(|s| !s.is_origin()).map(|s| s.canonical()).collect();
        let mut orbits: Vec<LatticeSite> = set.into_iter().collect();
        orbits.sort_by_key(|s| (s.norm_sq(), *s));
        XiBasis { orbits }
    }

    pub fn orbits(&self) -> &[LatticeSite] {
        &self.orbits
    }

    pub fn with_orbit(&self, site: LatticeSite) -> Self {
        Self::from_orbits(self.orbits.iter().copied().chain([site]))
    }

    pub fn without_orbit(&self, site: LatticeSite) -> Self {
        let c = site.canonical();
        Self::from_orbits(self.orbits.iter().copied().filter(|s| *s != c))
    }

    pub fn len(&self) -> usize {
        1 + 2 * self.orbits.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Size of the chirality +1 block, origin included.
    pub fn plus_len(&self) -> usize {
        1 + self.orbits.len()
    }

    pub fn minus_len(&self) -> usize {
        self.orbits.len()
    }

    pub fn plus_indices(&self) -> Vec<OrbitIndex> {
        std::iter::once(OrbitIndex::Origin)
            .chain(self.orbits.iter().map(|&rep| OrbitIndex::Orbit { rep, chirality: Chirality::Plus }))
            .collect()
    }

    pub fn minus_indices(&self) -> Vec<OrbitIndex> {
        self.orbits.iter().map(|&rep| OrbitIndex::Orbit { rep, chirality: Chirality::Minus }).collect()
    }

    /// All indices in matrix order.
    pub fn indices(&self) -> Vec<OrbitIndex> {
        let mut v = self.plus_indices();
        v.extend(self.minus_indices());
        v
    }

    /// Position of each index in matrix order.
    pub fn positions(&self) -> BTreeMap<OrbitIndex, usize> {
        self.indices().into_iter().enumerate().map(|(i, k)| (k, i)).collect()
    }

    pub fn contains(&self, idx: &OrbitIndex) -> bool {
        match idx {
            OrbitIndex::Origin => true,
            OrbitIndex::Orbit { rep, .. } => self.orbits.binary_search_by_key(&(rep.norm_sq(), *rep), |s| (s.norm_sq(), *s)).is_ok(),
        }
    }

    /// Every lattice site carried by a function in Ξ.
    pub fn sites(&self) -> BTreeSet<LatticeSite> {
        std::iter::once(LatticeSite::ORIGIN).chain(self.orbits.iter().flat_map(|s| s.orbit())).collect()
    }
}

/// All orbits with `|G|² ≤ 48`, plus the two added norm-49 orbits, checked
/// against the published listing.
pub fn build_xi() -> Result<XiBasis, GapError> {
    let added = added_orbits();
    let excluded = excluded_orbit();
    let reps = orbits_up_to(MU_SQ)
        .into_iter()
        .filter(|s| s.norm_sq() <= XI_MAX_NORM_SQ || added.contains(s))
        .filter(|s| *s != excluded);
    let xi = XiBasis::from_orbits(reps);
    if xi.len() != XI_DIM {
        return Err(GapError::CountMismatch(xi.len()));
    }
    check_against_listing(&xi)?;
    Ok(xi)
}

/// Every listed line must be one orbit of the stated norm, and the listed
/// orbits must be exactly those of `xi`.
pub fn check_against_listing(xi: &XiBasis) -> Result<(), GapError> {
    let mut listed = BTreeSet::new();
    for (norm, lines) in SUPPLEMENTARY_LISTING {
        for line in lines.iter() {
            let sites = line
                .iter()
                .map(|e| parse_site(e).ok_or_else(|| GapError::ListingMismatch(format!("cannot parse {e:?}"))))
                .collect::<Result<Vec<_>, _>>()?;
            let canon = sites[0].canonical();
            for (e, s) in line.iter().zip(&sites) {
                if s.norm_sq() != *norm {
                    return Err(GapError::ListingMismatch(format!("{e} has |G|² = {}, listed under {norm}", s.norm_sq())));
                }
                if s.canonical() != canon {
                    return Err(GapError::ListingMismatch(format!("{e} is not in the orbit of {}", line[0])));
                }
            }
            if !canon.is_origin() {
                listed.insert(canon);
            }
        }
    }
    let ours: BTreeSet<LatticeSite> = xi.orbits.iter().copied().collect();
    if let Some(s) = ours.symmetric_difference(&listed).next() {
        return Err(GapError::ListingMismatch(format!("orbit of {s} is in exactly one of the listing and Ξ")));
    }
    Ok(())
}

/// The facts about Ξ the gap argument uses.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MuChoice {
    /// Smallest `|G|²` over orbits outside Ξ.
    pub mu_sq: i64,
    /// Largest number of `H¹` neighbours outside Ξ of a site inside.
    pub max_outgoing: usize,
    /// Largest number of neighbours inside Ξ of a site outside.
    pub max_incoming: usize,
    /// `max_outgoing · max_incoming`, which bounds `‖P_Ξ H¹ P_Ξ⊥‖²`.
    pub boundary_norm_sq: usize,
    /// Number of distinct chiral indices in the support of `Ψ⁰, …, Ψ⁸`.
    pub support_size: usize,
}

/// Checks `μ = 7`, the boundary hopping degree and that `Ψ⁰ … Ψ_N` live in Ξ.
pub fn verify_mu_choice(xi: &XiBasis, series: &PerturbationSeries) -> Result<MuChoice, GapError> {
    let mu_sq = orbits_up_to(2 * MU_SQ)
        .into_iter()
        .filter(|s| !s.is_origin() && !xi.contains(&OrbitIndex::Orbit { rep: *s, chirality: Chirality::Plus }))
        .map(|s| s.norm_sq())
        .min()
        .unwrap_or(i64::MAX);
    if mu_sq < MU_SQ {
        return Err(GapError::MuViolation { mu_sq });
    }

    let inside = xi.sites();
    let mut max_outgoing = 0;
    let mut incoming: BTreeMap<LatticeSite, usize> = BTreeMap::new();
    for s in &inside {
        let mut out = 0;
        for t in s.neighbors() {
            if !inside.contains(&t) {
                out += 1;
                *incoming.entry(t).or_default() += 1;
            }
        }
        if out > 1 {
            return Err(GapError::BoundaryDegreeViolation { site: s.to_string(), degree: out });
        }
        max_outgoing = max_outgoing.max(out);
    }
    let mut max_incoming = 0;
    for (t, k) in &incoming {
        if *k > 1 {
            return Err(GapError::BoundaryDegreeViolation { site: t.to_string(), degree: *k });
        }
        max_incoming = max_incoming.max(*k);
    }

    let mut support = BTreeSet::new();
    for (n, term) in series.terms().iter().enumerate() {
        for idx in term.support() {
            if !xi.contains(idx) {
                return Err(GapError::SupportEscape { term: n, index: idx.to_string() });
            }
            support.insert(*idx);
        }
    }
    Ok(MuChoice {
        mu_sq,
        max_outgoing,
        max_incoming,
        boundary_norm_sq: max_outgoing * max_incoming,
        support_size: support.len(),
    })
}
