//! Rigorous eigenvalue enclosure from an approximate eigendecomposition.
//!
//! Given approximate pairs `(λ̃ᵢ, ṽᵢ)` of a Hermitian `A` known up to entrywise
//! error `F`, the exact eigenvalues match the `λ̃ᵢ` one to one within
//! `r = 2mR`, where `R` bounds the residual of the exactly orthonormalised vectors:
//!
//! `R = 2^{-1/2}·n(‖A‖₂ + sup|λ̃|)μ + √n·sup‖r̃‖∞
//!    + 1.01·n^{5/2}ε(‖Ã‖max + sup|λ̃|)·sup‖ṽ‖∞ + n^{3/2}·sup|F|·sup‖ṽ‖∞`
//!
//! with `μ = 1.01n²ε·sup‖ṽ‖∞² + sup|⟨ṽᵢ,ṽᵢ⟩ − 1| + sup_{i≠j}|⟨ṽᵢ,ṽⱼ⟩|`,
//! valid while `mμ < 1/2`. Inner products and residuals are formed here in
//! plain floating point; `ε = 16u` covers their rounding.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::scalar::EPS_EFF;

use super::linalg::{CMat, EigenPairs};
use super::projected::ProjectedMatrix;
use super::GapError;

/// Small multiplicative slack on the final radius.
const RADIUS_SLACK: f64 = 1.0 + 1e-6;

pub trait HermitianOp {
    fn dim(&self) -> usize;
    /// `out = Ã x` for the stored floating-point matrix `Ã`.
    fn apply(&self, x: &[Complex64], out: &mut [Complex64]);
    /// `‖Ã‖max`.
    fn max_abs(&self) -> f64;
}

impl HermitianOp for CMat {
    fn dim(&self) -> usize {
        self.rows
    }

    fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    fn max_abs(&self) -> f64 {
        CMat::max_abs(self)
    }
}

impl HermitianOp for ProjectedMatrix {
    fn dim(&self) -> usize {
        ProjectedMatrix::dim(self)
    }

    fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        ProjectedMatrix::apply(self, x, out)
    }

    fn max_abs(&self) -> f64 {
        ProjectedMatrix::max_abs(self)
    }
}

/// A-priori inputs that the enclosure cannot measure itself.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EnclosureConstants {
    /// Upper bound on the operator norm `‖A‖₂` of the exact matrix.
    pub norm2: f64,
    /// Upper bound on `|A_ij − Ã_ij|`.
    pub entry_error: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenEnclosure {
    /// Approximate eigenvalues, ascending.
    pub values: Vec<f64>,
    /// Every exact eigenvalue lies in some `[λ̃ᵢ − radius, λ̃ᵢ + radius]`.
    pub radius: f64,
    pub mu: f64,
    pub residual_bound: f64,
    pub sup_vec_inf: f64,
    pub sup_residual: f64,
    pub sup_lambda: f64,
    pub max_entry: f64,
    pub entry_error: f64,
}

impl EigenEnclosure {
    /// True when each `x` lies within the radius of some approximate value.
    pub fn covers(&self, x: f64) -> bool {
        self.values.iter().any(|l| (x - l).abs() <= self.radius)
    }

    /// Lower bound on `|λ|` over eigenvalues other than the one near zero.
    ///
    /// The enclosure matches exact and approximate eigenvalues one to one.
    /// If the intervals above and below the middle one exclude zero, the
    /// exact zero mode must be the eigenvalue matched to the middle value,
    /// and every other eigenvalue is at least `min(λ̃_{z+1}, −λ̃_{z−1}) − r`
    /// away from zero.
    pub fn gap_lower_bound(&self) -> Option<f64> {
        let z = self.values.len() / 2;
        let (lo, mid, hi) = (self.values[z - 1], self.values[z], self.values[z + 1]);
        let r = self.radius;
        if mid.abs() > r || hi <= r || lo >= -r {
            return None;
        }
        Some(hi.min(-lo) - r)
    }
}

/// Enclosure for a projected matrix with `‖H‖₂ ≤ 10`.
pub fn enclose(m: &ProjectedMatrix, pairs: &EigenPairs) -> Result<EigenEnclosure, GapError> {
    enclose_with(m, pairs, EnclosureConstants { norm2: 10.0, entry_error: m.entry_error })
}

pub fn enclose_with<A: HermitianOp + ?Sized>(
    a: &A,
    pairs: &EigenPairs,
    k: EnclosureConstants,
) -> Result<EigenEnclosure, GapError> {
    let n = a.dim();
    let m = pairs.values.len();
    let nf = n as f64;
    let eps = EPS_EFF;
    let vecs: Vec<Vec<Complex64>> = (0..m).map(|j| pairs.vectors.column(j)).collect();

    let sup_vinf = vecs.iter().flat_map(|v| v.iter().map(|z| z.norm())).fold(0.0, f64::max);
    let mut diag: f64 = 0.0;
    let mut off: f64 = 0.0;
    for i in 0..m {
        for j in i..m {
            let g: Complex64 = vecs[i].iter().zip(&vecs[j]).map(|(x, y)| x.conj() * y).sum();
            if i == j {
                diag = diag.max((g.re - 1.0).hypot(g.im));
            } else {
                off = off.max(g.norm());
            }
        }
    }
    let mu = 1.01 * nf * nf * eps * sup_vinf * sup_vinf + diag + off;
    let m_mu = m as f64 * mu;
    if !(m_mu < 0.5) {
        return Err(GapError::MuTooLarge { m_mu });
    }

    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let mut sup_res: f64 = 0.0;
    for (v, &l) in vecs.iter().zip(&pairs.values) {
        a.apply(v, &mut out);
        for (o, x) in out.iter().zip(v) {
            sup_res = sup_res.max((o - x * l).norm());
        }
    }
    let sup_lambda = pairs.values.iter().fold(0.0_f64, |s, l| s.max(l.abs()));
    let max_entry = a.max_abs();
    let f = k.entry_error.max(eps * max_entry);

    let r = std::f64::consts::FRAC_1_SQRT_2 * nf * (k.norm2 + sup_lambda) * mu
        + nf.sqrt() * sup_res
        + 1.01 * nf.powf(2.5) * eps * (max_entry + sup_lambda) * sup_vinf
        + nf.powf(1.5) * f * sup_vinf;
    let radius = 2.0 * m as f64 * r * RADIUS_SLACK;

    Ok(EigenEnclosure {
        values: pairs.values.clone(),
        radius,
        mu,
        residual_bound: r,
        sup_vec_inf: sup_vinf,
        sup_residual: sup_res,
        sup_lambda,
        max_entry,
        entry_error: f,
    })
}
