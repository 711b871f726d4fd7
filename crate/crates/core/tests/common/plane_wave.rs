//! `H¹` on the full momentum lattice in plane waves.
//!
//! The oracle never touches the orbit rules: basis functions are expanded into
//! their three plane waves (rotations computed from Cartesian coordinates),
//! `H¹` acts by the momentum shifts of `U(±r)`, and the result is projected
//! back onto basis functions by plane-wave inner products.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use tbg_core::basis::h1_column;
use tbg_core::lattice::{orbits_up_to, Q_OFFSETS};
use tbg_core::{canonicalize, Chirality, LatticeSite, OrbitIndex, Sublattice};

pub type Wave = HashMap<(u8, LatticeSite), Complex64>;

const PHI: f64 = 2.0 * PI / 3.0;

/// The lattice site at Cartesian point `(x, y)`, if any.
pub fn site_at(x: f64, y: f64) -> Option<LatticeSite> {
    let s3 = 3f64.sqrt();
    for (sub, dy) in [(Sublattice::A, 0.0), (Sublattice::B, 1.0)] {
        let sum = (y + dy) / 1.5;
        let diff = 2.0 * x / s3;
        let (m, n) = ((sum + diff) / 2.0, (sum - diff) / 2.0);
        if (m - m.round()).abs() < 1e-9 && (n - n.round()).abs() < 1e-9 {
            return Some(LatticeSite { sub, m: m.round() as i64, n: n.round() as i64 });
        }
    }
    None
}

/// `R_φ^*` (the adjoint of the anticlockwise rotation) applied to a site.
pub fn rotate_star(s: LatticeSite) -> LatticeSite {
    let (x, y) = s.vector();
    let (c, sn) = (PHI.cos(), PHI.sin());
    site_at(c * x + sn * y, -sn * x + c * y).expect("rotation preserves the lattice")
}

pub fn zhat(s: LatticeSite) -> Complex64 {
    let (x, y) = s.vector();
    Complex64::new(x, y) / x.hypot(y)
}

pub fn shift(s: LatticeSite, v: (f64, f64), sign: f64) -> LatticeSite {
    let (x, y) = s.vector();
    site_at(x + sign * v.0, y + sign * v.1).expect("shift stays on the lattice")
}

pub fn q_vectors() -> [(f64, f64); 3] {
    Q_OFFSETS.map(|(m, n)| LatticeSite::b(m, n).vector())
}

/// Plane-wave expansion of a chiral basis function (the `1/√V` dropped).
pub fn expand(idx: &OrbitIndex) -> Wave {
    let mut w = Wave::new();
    let OrbitIndex::Orbit { rep, chirality } = *idx else {
        w.insert((1, LatticeSite::ORIGIN), Complex64::new(1.0, 0.0));
        return w;
    };
    let a = rep.sub == Sublattice::A;
    let s = 1.0 / 3f64.sqrt();
    let mut g = rep;
    for k in 0..3 {
        let (comp, amp) = match chirality {
            Chirality::Plus => (if a { 1 } else { 2 }, Complex64::new(s, 0.0)),
            Chirality::Minus => (if a { 3 } else { 4 }, zhat(rep) * Complex64::from_polar(s, -(k as f64) * PHI)),
        };
        *w.entry((comp, g)).or_default() += amp;
        g = rotate_star(g);
    }
    w
}

/// `H¹ = [[0, D¹†], [D¹, 0]]`, `D¹ = [[0, U(r)], [U(−r), 0]]`,
/// `U(r) = Σ_j c_j e^{−i q_j·r}` with `c = (1, e^{iφ}, e^{−iφ})`.
pub fn apply_h1_waves(w: &Wave) -> Wave {
    let c = [Complex64::new(1.0, 0.0), Complex64::from_polar(1.0, PHI), Complex64::from_polar(1.0, -PHI)];
    let q = q_vectors();
    let mut out = Wave::new();
    for (&(comp, k), &a) in w {
        for j in 0..3 {
            // (D¹ψ)₃ = U(r)ψ₂, (D¹ψ)₄ = U(−r)ψ₁, (D¹†φ)₁ = conj(U(−r))φ₄, (D¹†φ)₂ = conj(U(r))φ₃
            let (to, sign, coef) = match comp {
                1 => (4, 1.0, c[j]),
                2 => (3, -1.0, c[j]),
                3 => (2, 1.0, c[j].conj()),
                4 => (1, -1.0, c[j].conj()),
                _ => unreachable!(),
            };
            *out.entry((to, shift(k, q[j], sign))).or_default() += a * coef;
        }
    }
    out.retain(|_, v| v.norm() > 1e-14);
    out
}

pub fn dot(u: &Wave, v: &Wave) -> Complex64 {
    u.iter().filter_map(|(k, a)| v.get(k).map(|b| a.conj() * b)).sum()
}

pub fn basis_label(comp: u8, s: LatticeSite) -> Option<OrbitIndex> {
    match comp {
        1 | 2 => Some(canonicalize(s, Chirality::Plus)),
        _ if s.is_origin() => None,
        _ => Some(canonicalize(s, Chirality::Minus)),
    }
}

pub fn indices_up_to(norm: i64) -> Vec<OrbitIndex> {
    let mut v = vec![OrbitIndex::Origin];
    for rep in orbits_up_to(norm).into_iter().filter(|s| !s.is_origin()) {
        for chirality in [Chirality::Plus, Chirality::Minus] {
            v.push(OrbitIndex::Orbit { rep, chirality });
        }
    }
    v
}

pub fn check_column(idx: &OrbitIndex) {
    let image = apply_h1_waves(&expand(idx));
    let mut oracle: HashMap<OrbitIndex, Complex64> = HashMap::new();
    let mut rebuilt = Wave::new();
    for &(comp, s) in image.keys() {
        let Some(t) = basis_label(comp, s) else {
            panic!("{idx}: image leaves the basis at component {comp} of {s}");
        };
        if oracle.contains_key(&t) {
            continue;
        }
        let chi = expand(&t);
        let c = dot(&chi, &image);
        oracle.insert(t, c);
        for (k, a) in chi {
            *rebuilt.entry(k).or_default() += a * c;
        }
    }
    // the image lies in the span of the basis functions found
    for (k, a) in &image {
        let r = rebuilt.get(k).copied().unwrap_or_default();
        assert!((a - r).norm() < 1e-12, "{idx}: residual at {k:?}");
    }
    let mut column: HashMap<OrbitIndex, Complex64> = HashMap::new();
    for (t, c) in h1_column(idx) {
        *column.entry(t).or_default() += c.to_c64();
    }
    oracle.retain(|_, c| c.norm() > 1e-12);
    column.retain(|_, c| c.norm() > 1e-12);
    assert_eq!(
        {
            let mut k: Vec<_> = oracle.keys().collect();
            k.sort();
            k
        },
        {
            let mut k: Vec<_> = column.keys().collect();
            k.sort();
            k
        },
        "targets of {idx}"
    );
    for (t, c) in &oracle {
        assert!((c - column[t]).norm() < 1e-12, "{idx} → {t}: oracle {c}, column {}", column[t]);
    }
}
