//! Dense complex matrices and a cyclic Jacobi eigensolver for Hermitian ones.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("Jacobi iteration did not converge in {sweeps} sweeps (off-diagonal {off:e})")]
    NoConvergence { sweeps: usize, off: f64 },
    #[error("matrix is not square")]
    NotSquare,
}

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, o: &CMat) -> Self {
        assert_eq!(self.cols, o.rows);
        let mut out = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let orow = &o.data[k * o.cols..(k + 1) * o.cols];
                let out_row = &mut out.data[i * o.cols..(i + 1) * o.cols];
                for (x, b) in out_row.iter_mut().zip(orow) {
                    *x += a * b;
                }
            }
        }
        out
    }

    /// `self† · o` without forming the adjoint.
    pub fn adjoint_matmul(&self, o: &CMat) -> Self {
        assert_eq!(self.rows, o.rows);
        let mut out = Self::zeros(self.cols, o.cols);
        for k in 0..self.rows {
            let arow = &self.data[k * self.cols..(k + 1) * self.cols];
            let orow = &o.data[k * o.cols..(k + 1) * o.cols];
            for (i, a) in arow.iter().enumerate() {
                let a = a.conj();
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let out_row = &mut out.data[i * o.cols..(i + 1) * o.cols];
                for (x, b) in out_row.iter_mut().zip(orow) {
                    *x += a * b;
                }
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, o: &CMat) -> f64 {
        self.data.iter().zip(&o.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn hermitian_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                d = d.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        d
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigenvalues in ascending order with eigenvectors as matching columns.
#[derive(Clone, Debug)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

pub const MAX_SWEEPS: usize = 60;

/// Cyclic Jacobi on a Hermitian matrix, rows `p < q` swept in natural order.
/// Only the upper triangle is read.
pub fn jacobi_eigh(a: &CMat) -> Result<EigenPairs, EigenError> {
    jacobi_eigh_from(a, None)
}

/// Jacobi started from a guess `V₀` of the eigenvectors: diagonalizes
/// `V₀† A V₀` and maps back. `V₀` must be unitary to working accuracy.
pub fn jacobi_eigh_from(a: &CMat, v0: Option<&CMat>) -> Result<EigenPairs, EigenError> {
    if a.rows != a.cols {
        return Err(EigenError::NotSquare);
    }
    let n = a.rows;
    let mut m = a.clone();
    // symmetrize from the upper triangle so the iteration sees an exact Hermitian
    for i in 0..n {
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in i + 1..n {
            m[(j, i)] = m[(i, j)].conj();
        }
    }
    let mut v = match v0 {
        Some(v0) => {
            let t = v0.adjoint_matmul(&m.matmul(v0));
            m = t;
            for i in 0..n {
                m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
                for j in i + 1..n {
                    let x = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                    m[(i, j)] = x;
                    m[(j, i)] = x.conj();
                }
            }
            v0.clone()
        }
        None => CMat::identity(n),
    };
    let scale = m.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if scale == 0.0 {
        return Ok(finish(m, v));
    }
    let tol = f64::EPSILON * 1e-2 * scale;
    let mut off = f64::INFINITY;
    for _sweep in 0..MAX_SWEEPS {
        off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off = off.max(m[(p, q)].norm());
            }
        }
        if off <= tol {
            return Ok(finish(m, v));
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut m, &mut v, p, q, tol * 1e-3);
            }
        }
    }
    Err(EigenError::NoConvergence { sweeps: MAX_SWEEPS, off })
}

/// One complex Jacobi rotation annihilating `m[p][q]`.
#[inline]
fn rotate(m: &mut CMat, v: &mut CMat, p: usize, q: usize, skip: f64) {
    let n = m.rows;
    let b = m[(p, q)];
    let babs = b.norm();
    if babs <= skip {
        return;
    }
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let e = b / babs;
    let tau = (aqq - app) / (2.0 * babs);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let ec = e.conj();
    // J = [[c, s], [-s·ē, c·ē]] on columns p, q
    let se = ec * s;
    let ce = ec * c;
    for k in 0..n {
        let akp = m[(k, p)];
        let akq = m[(k, q)];
        m[(k, p)] = akp * c - akq * se;
        m[(k, q)] = akp * s + akq * ce;
    }
    let sec = se.conj();
    let cec = ce.conj();
    for k in 0..n {
        let apk = m[(p, k)];
        let aqk = m[(q, k)];
        m[(p, k)] = apk * c - aqk * sec;
        m[(q, k)] = apk * s + aqk * cec;
    }
    m[(p, p)] = Complex64::new(app - t * babs, 0.0);
    m[(q, q)] = Complex64::new(aqq + t * babs, 0.0);
    m[(p, q)] = Complex64::new(0.0, 0.0);
    m[(q, p)] = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * se;
        v[(k, q)] = vkp * s + vkq * ce;
    }
}

fn finish(m: CMat, v: CMat) -> EigenPairs {
    let n = m.rows;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = CMat::from_fn(n, n, |r, c| v[(r, order[c])]);
    EigenPairs { values, vectors }
}
