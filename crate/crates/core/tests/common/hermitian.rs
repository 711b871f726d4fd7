//! Random Hermitian instances and the enclosure soundness sweep.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tbg_core::gap::{enclose_with, jacobi_eigh, CMat, EigenPairs, EnclosureConstants};

use super::{dd_eigenvalues, Dd};

pub fn random_hermitian(rng: &mut impl Rng, n: usize, scale: f64) -> CMat {
    let mut a = CMat::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = Complex64::new(rng.gen_range(-scale..scale), 0.0);
        for j in i + 1..n {
            let z = Complex64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale));
            a[(i, j)] = z;
            a[(j, i)] = z.conj();
        }
    }
    a
}

/// Hermitian with eigenvalues clustered in pairs `1e-9` apart.
pub fn clustered(rng: &mut impl Rng, n: usize) -> CMat {
    let q = jacobi_eigh(&random_hermitian(rng, n, 1.0)).unwrap().vectors;
    let d = CMat::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new((i / 2) as f64 + (i % 2) as f64 * 1e-9, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let a = q.matmul(&d).matmul(&q.adjoint());
    // make it exactly Hermitian as stored
    CMat::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Less => a[(i, j)],
        std::cmp::Ordering::Equal => Complex64::new(a[(i, i)].re, 0.0),
        std::cmp::Ordering::Greater => a[(j, i)].conj(),
    })
}

pub fn frobenius_bound(a: &CMat) -> f64 {
    a.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() * (1.0 + 1e-12)
}

pub fn check_enclosure(a: &CMat, pairs: &EigenPairs) -> f64 {
    let k = EnclosureConstants { norm2: frobenius_bound(a), entry_error: 0.0 };
    let enc = enclose_with(a, pairs, k).unwrap();
    let exact = dd_eigenvalues(&a.data, a.rows);
    for (j, (x, l)) in exact.iter().zip(&enc.values).enumerate() {
        let d = (*x - Dd::from(*l)).abs();
        assert!(d <= Dd::from(enc.radius), "n = {}, j = {j}: |{} − {l}| > {}", a.rows, x.to_f64(), enc.radius);
    }
    enc.radius
}

/// 100 instances of size at most 20 (every tenth of size 8): plain,
/// entry scale 7, and clustered spectra, some with degraded vectors or
/// shifted values. Returns the largest radius seen.
pub fn soundness_sweep(seed: u64) -> f64 {

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut count = 0;
    let mut worst = 0.0_f64;
    for t in 0..100 {
        let n = if t % 10 == 0 { 8 } else { rng.gen_range(2..=20) };
        let a = match t % 4 {
            0 => clustered(&mut rng, n),
            1 => random_hermitian(&mut rng, n, 7.0),
            _ => random_hermitian(&mut rng, n, 1.0),
        };
        let mut pairs = jacobi_eigh(&a).unwrap();
        if t % 3 == 0 {
            // degrade the vectors so the residual term dominates
            for z in pairs.vectors.data.iter_mut() {
                *z += Complex64::new(rng.gen_range(-1e-9..1e-9), rng.gen_range(-1e-9..1e-9));
            }
        }
        if t % 4 != 0 && t % 5 == 2 {
            // shifted values: the residual has to account for the whole error
            for v in pairs.values.iter_mut() {
                *v += rng.gen_range(-1e-7..1e-7);
            }
            pairs.values.sort_by(f64::total_cmp);
        }
        worst = worst.max(check_enclosure(&a, &pairs));
        count += 1;
    }
    assert_eq!(count, 100);
    worst
}
