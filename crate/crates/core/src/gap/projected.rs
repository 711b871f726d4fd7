//! The projected Hamiltonian `H^α_Ξ = Q⊥ P_Ξ(H⁰ + αH¹)P_Ξ Q⊥`, where `Q`
//! projects onto `v = Σₙ αⁿΨⁿ`.
//!
//! Ordering Ξ as (chirality +1 block, chirality −1 block), `P_Ξ H P_Ξ` is
//! `[[0, B†], [B, 0]]` and `v` lies in the +1 block. Telescoping the series
//! gives `Bv = α⁹h` with `h = P_Ξ H¹Ψ⁸`, so
//!
//! `H^α_Ξ = [[0, C†], [C, 0]]`, `C = B − (α⁹/⟨v,v⟩)·h·v†`,
//!
//! and `Cv = 0` exactly. The fast route assembles `C` in ball arithmetic from
//! exact ingredients; the exact route evaluates `M − QM − MQ + QMQ` on the full
//! matrix and serves as its cross-check.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_rational::BigRational;

use crate::ball::{CBall, RBall};
use crate::basis::{apply_h1, h1_column};
use crate::lattice::OrbitIndex;
use crate::poly::RationalPoly;
use crate::scalar::{RadicalComplex, ScalarError};
use crate::series::PerturbationSeries;

use super::linalg::{jacobi_eigh_from, CMat, EigenError, EigenPairs};
use super::xi::XiBasis;
use super::GapError;

type Sparse<T> = Vec<(usize, usize, T)>;

/// Exact and ball-valued ingredients of `C`, independent of α.
#[derive(Clone, Debug)]
pub struct GapModel {
    xi: XiBasis,
    order: usize,
    plus: Vec<OrbitIndex>,
    minus: Vec<OrbitIndex>,
    /// `(row in −1 block, column in +1 block, entry)`.
    h0: Sparse<RadicalComplex>,
    h1: Sparse<RadicalComplex>,
    /// `psi[n][j]`: coordinate `j` of `Ψⁿ` in the +1 block.
    psi: Vec<Vec<RadicalComplex>>,
    /// `P_Ξ H¹Ψᴺ` in the −1 block.
    h: Vec<RadicalComplex>,
    /// `⟨v, v⟩` as a polynomial in α.
    denom: RationalPoly,
    h0f: Sparse<CBall>,
    h1f: Sparse<CBall>,
    psif: Vec<Vec<CBall>>,
    hf: Vec<CBall>,
}

fn sparse_balls(m: &Sparse<RadicalComplex>) -> Result<Sparse<CBall>, ScalarError> {
    m.iter().map(|(i, j, x)| Ok((*i, *j, CBall::from_radical(x)?))).collect()
}

fn balls(v: &[RadicalComplex]) -> Result<Vec<CBall>, ScalarError> {
    v.iter().map(CBall::from_radical).collect()
}

impl GapModel {
    pub fn new(series: &PerturbationSeries, xi: &XiBasis) -> Result<Self, GapError> {
        let plus = xi.plus_indices();
        let minus = xi.minus_indices();
        let ppos: BTreeMap<OrbitIndex, usize> = plus.iter().enumerate().map(|(i, k)| (*k, i)).collect();
        let mpos: BTreeMap<OrbitIndex, usize> = minus.iter().enumerate().map(|(i, k)| (*k, i)).collect();

        let mut h0 = Vec::new();
        let mut h1: BTreeMap<(usize, usize), RadicalComplex> = BTreeMap::new();
        for (j, idx) in plus.iter().enumerate() {
            if let OrbitIndex::Orbit { rep, .. } = idx {
                h0.push((mpos[&idx.partner()], j, RadicalComplex::sqrt_int(rep.norm_sq() as u64)));
            }
            for (t, c) in h1_column(idx) {
                if let Some(&i) = mpos.get(&t) {
                    h1.entry((i, j)).or_insert_with(RadicalComplex::zero).add_assign_ref(&c);
                }
            }
        }
        let h1: Sparse<RadicalComplex> =
            h1.into_iter().filter(|(_, c)| !c.is_zero()).map(|((i, j), c)| (i, j, c)).collect();

        let mut psi = Vec::with_capacity(series.order() + 1);
        for (n, term) in series.terms().iter().enumerate() {
            let mut col = vec![RadicalComplex::zero(); plus.len()];
            for (k, c) in term.iter() {
                let j = ppos.get(k).ok_or_else(|| GapError::SupportEscape { term: n, index: k.to_string() })?;
                col[*j] = c.clone();
            }
            psi.push(col);
        }
        let last = series.term(series.order())?;
        let mut h = vec![RadicalComplex::zero(); minus.len()];
        for (k, c) in apply_h1(last).iter() {
            if let Some(&i) = mpos.get(k) {
                h[i] = c.clone();
            }
        }
        let denom = series.denominator()?;
        Ok(GapModel {
            xi: xi.clone(),
            order: series.order(),
            h0f: sparse_balls(&h0)?,
            h1f: sparse_balls(&h1)?,
            psif: psi.iter().map(|c| balls(c)).collect::<Result<_, _>>()?,
            hf: balls(&h)?,
            plus,
            minus,
            h0,
            h1,
            psi,
            h,
            denom,
        })
    }

    pub fn xi(&self) -> &XiBasis {
        &self.xi
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.plus.len() + self.minus.len()
    }

    /// `h = P_Ξ H¹Ψᴺ` in the −1 block.
    pub fn boundary_vector(&self) -> &[RadicalComplex] {
        &self.h
    }

    /// `⟨v, v⟩` at α.
    pub fn denominator(&self) -> &RationalPoly {
        &self.denom
    }

    /// `v = Σₙ αⁿΨⁿ` in the +1 block, exactly.
    pub fn zero_mode(&self, alpha: &BigRational) -> Vec<RadicalComplex> {
        let mut v = vec![RadicalComplex::zero(); self.plus.len()];
        let a = RadicalComplex::from_rational(alpha.clone());
        for col in self.psi.iter().rev() {
            for (x, c) in v.iter_mut().zip(col) {
                *x = &(&*x * &a) + c;
            }
        }
        v
    }

    /// Fast route: `C` in ball arithmetic. Entries of the returned block are
    /// the ball midpoints; `entry_error` bounds their distance to the exact `C`.
    pub fn projected(&self, alpha: &BigRational) -> Result<ProjectedMatrix, GapError> {
        let (rows, cols) = (self.minus.len(), self.plus.len());
        let a = RBall::from_rational(alpha)?;
        let ac = CBall::from_real(a);
        let mut v = vec![CBall::ZERO; cols];
        for col in self.psif.iter().rev() {
            for (x, c) in v.iter_mut().zip(col) {
                *x = x.mul(ac).add(*c);
            }
        }
        let s = self.denom.eval(alpha);
        let apow = (0..=self.order).fold(BigRational::from_integer(1.into()), |acc, _| acc * alpha);
        let c = RBall::from_rational(&(apow / s))?;

        let mut m = vec![CBall::ZERO; rows * cols];
        for &(i, j, x) in &self.h0f {
            m[i * cols + j] = m[i * cols + j].add(x);
        }
        for &(i, j, x) in &self.h1f {
            m[i * cols + j] = m[i * cols + j].add(x.mul(ac));
        }
        let vc: Vec<CBall> = v.iter().map(|x| x.conj()).collect();
        for i in 0..rows {
            let ch = self.hf[i].mul_real(c);
            if ch.is_zero() {
                continue;
            }
            for j in 0..cols {
                let k = i * cols + j;
                m[k] = m[k].sub(ch.mul(vc[j]));
            }
        }
        let entry_error = m.iter().map(|b| b.rad).fold(0.0, f64::max);
        let block = CMat { rows, cols, data: m.iter().map(|b| b.mid).collect() };
        Ok(ProjectedMatrix { alpha: alpha.clone(), block, entry_error })
    }

    /// Exact route: `M − QM − MQ + QMQ` on all 81 indices.
    pub fn exact(&self, alpha: &BigRational) -> ExactProjected {
        let np = self.plus.len();
        let n = self.dim();
        let a = RadicalComplex::from_rational(alpha.clone());
        let mut m = vec![RadicalComplex::zero(); n * n];
        for (i, j, x) in &self.h0 {
            let (r, c) = (np + i, *j);
            m[r * n + c].add_assign_ref(x);
            m[c * n + r].add_assign_ref(&x.conj());
        }
        for (i, j, x) in &self.h1 {
            let (r, c) = (np + i, *j);
            let y = x * &a;
            m[c * n + r].add_assign_ref(&y.conj());
            m[r * n + c].add_assign_ref(&y);
        }
        let mut v = self.zero_mode(alpha);
        v.resize(n, RadicalComplex::zero());
        // w = Mv
        let mut w = vec![RadicalComplex::zero(); n];
        for r in 0..n {
            for c in 0..n {
                if !m[r * n + c].is_zero() && !v[c].is_zero() {
                    w[r].add_product(&m[r * n + c], &v[c]);
                }
            }
        }
        let mut s = RadicalComplex::zero();
        let mut vw = RadicalComplex::zero();
        for (x, y) in v.iter().zip(&w) {
            s.add_product(&x.conj(), x);
            vw.add_product(&x.conj(), y);
        }
        let inv_s = s.invert().expect("⟨v,v⟩ is a positive rational");
        let inv_s2 = &inv_s * &inv_s;
        let vc: Vec<RadicalComplex> = v.iter().map(|x| x.conj()).collect();
        let wc: Vec<RadicalComplex> = w.iter().map(|x| x.conj()).collect();
        let vw_s2 = &vw * &inv_s2;
        let mut entries = m;
        for r in 0..n {
            for c in 0..n {
                let mut t = RadicalComplex::zero();
                t.add_product(&v[r], &wc[c]);
                t.add_product(&w[r], &vc[c]);
                let mut e = &t * &inv_s;
                e = -e;
                if !v[r].is_zero() && !v[c].is_zero() {
                    e.add_assign_ref(&(&(&v[r] * &vc[c]) * &vw_s2));
                }
                entries[r * n + c].add_assign_ref(&e);
            }
        }
        ExactProjected { alpha: alpha.clone(), n, plus: np, entries, zero_mode: v }
    }
}

/// `H^α_Ξ` held as its off-diagonal block `C` (rows: −1 block, columns: +1 block).
#[derive(Clone, Debug)]
pub struct ProjectedMatrix {
    pub alpha: BigRational,
    pub block: CMat,
    /// Bound on `|C_ij − C̃_ij|` over all entries.
    pub entry_error: f64,
}

impl ProjectedMatrix {
    pub fn dim(&self) -> usize {
        self.block.rows + self.block.cols
    }

    pub fn max_abs(&self) -> f64 {
        self.block.max_abs()
    }

    /// The full Hermitian 81×81 matrix.
    pub fn dense(&self) -> CMat {
        let (r, c) = (self.block.rows, self.block.cols);
        let mut m = CMat::zeros(r + c, r + c);
        for i in 0..r {
            for j in 0..c {
                let x = self.block[(i, j)];
                m[(c + i, j)] = x;
                m[(j, c + i)] = x.conj();
            }
        }
        m
    }

    /// `out = H x`. Skipping the structurally zero blocks only drops exact
    /// zero terms, so this is one admissible order of the dense product.
    pub fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        let (r, c) = (self.block.rows, self.block.cols);
        let (xp, xm) = x.split_at(c);
        let (op, om) = out.split_at_mut(c);
        op.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for i in 0..r {
            let row = &self.block.data[i * c..(i + 1) * c];
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, b) in row.iter().zip(xp) {
                acc += a * b;
            }
            om[i] = acc;
            let xi = xm[i];
            for (o, a) in op.iter_mut().zip(row) {
                *o += a.conj() * xi;
            }
        }
    }
}

/// The exact matrix with its zero mode `(v, 0)`.
#[derive(Clone, Debug)]
pub struct ExactProjected {
    pub alpha: BigRational,
    pub n: usize,
    /// Size of the +1 block.
    pub plus: usize,
    pub entries: Vec<RadicalComplex>,
    pub zero_mode: Vec<RadicalComplex>,
}

impl ExactProjected {
    pub fn entry(&self, i: usize, j: usize) -> &RadicalComplex {
        &self.entries[i * self.n + j]
    }

    pub fn is_hermitian(&self) -> bool {
        (0..self.n).all(|i| (i..self.n).all(|j| *self.entry(i, j) == self.entry(j, i).conj()))
    }

    /// True when both diagonal blocks vanish identically.
    pub fn is_chiral(&self) -> bool {
        let p = self.plus;
        (0..self.n).all(|i| (0..self.n).all(|j| (i < p) != (j < p) || self.entry(i, j).is_zero()))
    }

    pub fn mat_vec(&self, x: &[RadicalComplex]) -> Vec<RadicalComplex> {
        (0..self.n)
            .map(|i| {
                let mut acc = RadicalComplex::zero();
                for (j, xj) in x.iter().enumerate() {
                    let e = self.entry(i, j);
                    if !e.is_zero() && !xj.is_zero() {
                        acc.add_product(e, xj);
                    }
                }
                acc
            })
            .collect()
    }

    /// Rounds every entry; returns the off-diagonal block and the largest
    /// conversion error.
    pub fn to_projected(&self) -> Result<ProjectedMatrix, GapError> {
        let p = self.plus;
        let rows = self.n - p;
        let mut block = CMat::zeros(rows, p);
        let mut err: f64 = 0.0;
        for i in 0..rows {
            for j in 0..p {
                let f = self.entry(p + i, j).to_float()?;
                block[(i, j)] = f.value;
                err = err.max(f.abs_err);
            }
        }
        Ok(ProjectedMatrix { alpha: self.alpha.clone(), block, entry_error: err })
    }
}

/// Eigenpairs of `[[0, C†], [C, 0]]` through the singular vectors of `C`.
///
/// Jacobi on `C†C` (41×41) gives right singular vectors `uₖ` and `σₖ²`;
/// `wₖ = Cuₖ/‖Cuₖ‖`. The 81 approximate eigenpairs are `±σₖ` with
/// `(uₖ, ±wₖ)/√2` and `0` with `(u₀, 0)`. None of this is trusted; the
/// enclosure re-derives everything from residuals.
pub fn eigensolve(m: &ProjectedMatrix) -> Result<EigenPairs, EigenError> {
    eigensolve_from(m, None).map(|(p, _)| p)
}

/// As [`eigensolve`], starting Jacobi from a previous `U`. Returns the new `U`.
pub fn eigensolve_from(m: &ProjectedMatrix, warm: Option<&CMat>) -> Result<(EigenPairs, CMat), EigenError> {
    let c = &m.block;
    let (r, p) = (c.rows, c.cols);
    assert_eq!(p, r + 1, "C must have one more column than rows");
    let k = c.adjoint_matmul(c);
    let e = jacobi_eigh_from(&k, warm)?;
    let u = e.vectors;
    let cu = c.matmul(&u);
    let n = r + p;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut values = vec![0.0; n];
    let mut vectors = CMat::zeros(n, n);
    // zero mode in the middle
    for i in 0..p {
        vectors[(i, r)] = u[(i, 0)];
    }
    for kk in 1..p {
        let sigma = e.values[kk].max(0.0).sqrt();
        let norm = (0..r).map(|i| cu[(i, kk)].norm_sqr()).sum::<f64>().sqrt();
        let pos = r + kk;
        let neg = r - kk;
        values[pos] = sigma;
        values[neg] = -sigma;
        for i in 0..p {
            let x = u[(i, kk)] * h;
            vectors[(i, pos)] = x;
            vectors[(i, neg)] = x;
        }
        for i in 0..r {
            let y = if norm > 0.0 { cu[(i, kk)] / norm * h } else { Complex64::new(0.0, 0.0) };
            vectors[(p + i, pos)] = y;
            vectors[(p + i, neg)] = -y;
        }
    }
    Ok((EigenPairs { values, vectors }, u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gap::xi::build_xi;
    use crate::scalar::rat;
    use crate::series::compute_series;
    use num_traits::Zero;

    #[test]
    fn alpha_zero_spectrum() {
        let model = GapModel::new(&compute_series(8), &build_xi().unwrap()).unwrap();
        let m = model.projected(&BigRational::zero()).unwrap();
        let e = eigensolve(&m).unwrap();
        let mut norms: Vec<f64> = model.xi().orbits().iter().map(|s| (s.norm_sq() as f64).sqrt()).collect();
        norms.sort_by(f64::total_cmp);
        for (k, x) in norms.iter().enumerate() {
            assert!((e.values[41 + k] - x).abs() < 1e-12);
            assert!((e.values[39 - k] + x).abs() < 1e-12);
        }
        assert_eq!(e.values[40], 0.0);
        assert!(m.block.column(0).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn fast_route_matches_exact() {
        let model = GapModel::new(&compute_series(8), &build_xi().unwrap()).unwrap();
        let a = rat(3, 5);
        let ex = model.exact(&a);
        assert!(ex.is_hermitian());
        assert!(ex.is_chiral());
        assert!(ex.mat_vec(&ex.zero_mode).iter().all(|x| x.is_zero()));
        let fast = model.projected(&a).unwrap();
        let slow = ex.to_projected().unwrap();
        let bound = fast.entry_error + slow.entry_error;
        assert!(fast.block.max_abs_diff(&slow.block) <= bound);
        assert!(fast.entry_error < 1e-13);
    }
}
