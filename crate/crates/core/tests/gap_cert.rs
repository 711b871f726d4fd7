mod common;

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::hermitian::{random_hermitian, soundness_sweep};
use common::{dd_eigenvalues, Dd};
use tbg_core::gap::sweep::{grid_spacing, lipschitz_constant, MIN_FULL_GRID};
use tbg_core::gap::xi::{added_orbits, parse_site, XI_DIM};
use tbg_core::gap::{
    eigensolve, enclose, jacobi_eigh, CMat, GapError, SweepMode, SweepOptions,
};
use tbg_core::scalar::rat;
use tbg_core::{build_xi, compute_series, sweep_and_certify, verify_mu_choice, GapModel, LatticeSite, PerturbationSeries};

fn fixture() -> &'static (PerturbationSeries, GapModel) {
    static F: OnceLock<(PerturbationSeries, GapModel)> = OnceLock::new();
    F.get_or_init(|| {
        let s = compute_series(8);
        let m = GapModel::new(&s, &build_xi().unwrap()).unwrap();
        (s, m)
    })
}

#[test]
fn xi_has_81_functions_and_mu_seven() {
    let (s, _) = fixture();
    let xi = build_xi().unwrap();
    assert_eq!(xi.len(), XI_DIM);
    assert_eq!((xi.plus_len(), xi.minus_len()), (41, 40));
    let m = verify_mu_choice(&xi, s).unwrap();
    assert_eq!(m.mu_sq, 49);
    assert!(m.max_outgoing <= 1 && m.max_incoming <= 1);
    assert_eq!(m.boundary_norm_sq, 1);
    // every orbit below 7 is in, plus the two norm-49 orbits
    let n49 = xi.orbits().iter().filter(|o| o.norm_sq() == 49).count();
    assert_eq!(n49, 2);
    assert!(xi.orbits().iter().all(|o| o.norm_sq() <= 49));
}

#[test]
fn tampered_xi_is_rejected() {
    let (s, _) = fixture();
    let xi = build_xi().unwrap();
    // the third norm-49 orbit straddles the boundary
    let crossed = xi.with_orbit(LatticeSite::b(-2, -2));
    assert_eq!(LatticeSite::b(-2, -2).norm_sq(), 49);
    assert!(matches!(verify_mu_choice(&crossed, s), Err(GapError::BoundaryDegreeViolation { .. })));
    // dropping a norm-48 orbit lowers μ
    let short = xi.without_orbit(parse_site("-4b2").unwrap());
    assert!(matches!(verify_mu_choice(&short, s), Err(GapError::MuViolation { mu_sq: 48 })));
    // without the −4b₂ orbit, Ψ⁸ has weight outside Ξ
    let r = GapModel::new(s, &short).map(|_| ());
    assert!(matches!(r, Err(GapError::SupportEscape { term: 8, .. })), "{r:?}");
    // dropping an added orbit opens a second boundary hop
    for o in added_orbits() {
        let r = verify_mu_choice(&xi.without_orbit(o), s);
        assert!(matches!(r, Err(GapError::BoundaryDegreeViolation { degree: 2, .. })), "{r:?}");
    }
}

#[test]
fn alpha_zero_spectrum_is_the_free_one() {
    let (_, model) = fixture();
    let m = model.projected(&rat(0, 1)).unwrap();
    assert!(m.entry_error < 1e-14);
    let pairs = eigensolve(&m).unwrap();
    let mut want = vec![0.0];
    for o in model.xi().orbits() {
        let r = (o.norm_sq() as f64).sqrt();
        want.push(r);
        want.push(-r);
    }
    want.sort_by(f64::total_cmp);
    assert_eq!(want.len(), 81);
    for (a, b) in pairs.values.iter().zip(&want) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
    let enc = enclose(&m, &pairs).unwrap();
    let g = enc.gap_lower_bound().unwrap();
    assert!(g <= 1.0 && g > 1.0 - 1e-5, "{g}");
}

#[test]
fn entries_and_norm_bounded_at_alpha_max() {
    let (_, model) = fixture();
    let m = model.projected(&rat(7, 10)).unwrap();
    assert!(m.max_abs() <= 7.0, "{}", m.max_abs());
    let enc = enclose(&m, &eigensolve(&m).unwrap()).unwrap();
    assert!(enc.sup_lambda + enc.radius <= 10.0);
}

#[test]
fn chiral_symmetry_and_exact_zero_mode() {
    let (_, model) = fixture();
    for alpha in [rat(1, 5), rat(29, 50), rat(7, 10)] {
        let m = model.projected(&alpha).unwrap();
        let pairs = eigensolve(&m).unwrap();
        let enc = enclose(&m, &pairs).unwrap();
        let z = 40;
        assert!(enc.values[z].abs() <= enc.radius);
        for j in 1..=40 {
            assert!((enc.values[z + j] + enc.values[z - j]).abs() <= 2.0 * enc.radius);
        }
        // C v = 0 with the exact zero mode, in exact arithmetic
        let ex = model.exact(&alpha);
        let v = model.zero_mode(&alpha);
        let mut full = v.clone();
        full.resize(ex.n, tbg_core::RadicalComplex::zero());
        assert!(ex.mat_vec(&full).iter().all(|x| x.is_zero()));
    }
}

#[test]
fn fast_and_exact_routes_agree() {
    let (_, model) = fixture();
    for alpha in [rat(1, 3), rat(7, 10)] {
        let fast = model.projected(&alpha).unwrap();
        let exact = model.exact(&alpha);
        assert!(exact.is_hermitian() && exact.is_chiral());
        let slow = exact.to_projected().unwrap();
        let (a, b) = (fast.dense(), slow.dense());
        let tol = fast.entry_error + slow.entry_error;
        assert!(a.max_abs_diff(&b) <= tol, "{} > {tol}", a.max_abs_diff(&b));
        assert!(fast.entry_error < 1e-13);
    }
}

#[test]
fn jacobi_identity_and_reconstruction() {
    let e = jacobi_eigh(&CMat::identity(6)).unwrap();
    assert!(e.values.iter().all(|v| (v - 1.0).abs() < 1e-15));
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let a = random_hermitian(&mut rng, 10, 1.0);
    let e = jacobi_eigh(&a).unwrap();
    let d = CMat::from_fn(10, 10, |i, j| if i == j { Complex64::new(e.values[i], 0.0) } else { Complex64::new(0.0, 0.0) });
    let r = e.vectors.matmul(&d).matmul(&e.vectors.adjoint());
    assert!(r.max_abs_diff(&a) < 1e-13);
    let g = e.vectors.adjoint_matmul(&e.vectors);
    assert!(g.max_abs_diff(&CMat::identity(10)) < 1e-13);
    assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn enclosure_is_sound_on_random_hermitian_matrices() {
    let worst = soundness_sweep(2024);
    assert!(worst < 1e-2, "radius {worst}");
}

#[test]
fn soundness_sweep_other_seed() {
    assert!(soundness_sweep(99) < 1e-2);
}

#[test]
fn double_double_oracle_is_accurate() {
    // diag(1, 2, 3) conjugated by a rotation with irrational entries
    let (c, s) = (0.6, 0.8);
    let a = [
        Complex64::new(c * c + 2.0 * s * s, 0.0),
        Complex64::new(c * s - 2.0 * s * c, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(c * s - 2.0 * s * c, 0.0),
        Complex64::new(s * s + 2.0 * c * c, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(3.0, 0.0),
    ];
    let e = dd_eigenvalues(&a, 3);
    let x = Dd::from(1.0) / Dd::from(3.0);
    assert!(((x * Dd::from(3.0)) - Dd::ONE).abs().hi < 1e-31);
    for (v, want) in e.iter().zip([1.0, 2.0, 3.0]) {
        assert!((*v - Dd::from(want)).abs().hi < 1e-15);
    }
    let h = [Complex64::new(0.0, 0.0), Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)];
    let e = dd_eigenvalues(&h, 2);
    assert!((e[0] + Dd::ONE).abs().hi < 1e-30 && (e[1] - Dd::ONE).abs().hi < 1e-30);
}

#[test]
fn sweep_is_identical_across_thread_counts() {
    let (s, model) = fixture();
    let run = |t| sweep_and_certify(s, model, &SweepOptions { grid: 150, threads: Some(t), mode: SweepMode::Survey, keep_curves: true }).unwrap();
    let (a, b) = (run(1), run(3));
    assert_eq!(a.lower_bounds, b.lower_bounds);
    assert_eq!(a.min_first_positive.to_bits(), b.min_first_positive.to_bits());
    for (x, y) in a.curves.iter().zip(&b.curves) {
        assert_eq!(x.values, y.values);
        assert_eq!(x.radius.to_bits(), y.radius.to_bits());
    }
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn lipschitz_constant_and_grid_threshold() {
    let (s, model) = fixture();
    let l = lipschitz_constant(s).unwrap();
    assert_eq!(l.constant, 38883);
    assert_eq!(l.index_sum, 648);
    // L·h/2 < 8/10 − 3/4 exactly at the smallest certifying grid
    let gap = rat(1, 20);
    let loss = |n| grid_spacing(n) * BigRational::from_integer(BigInt::from(l.constant)) / rat(2, 1);
    assert!(loss(MIN_FULL_GRID) < gap);
    assert!(loss(MIN_FULL_GRID - 1) >= gap || grid_spacing(MIN_FULL_GRID - 1) >= rat(1, 388831));
    let r = sweep_and_certify(s, model, &SweepOptions::full(MIN_FULL_GRID - 1));
    assert!(matches!(r, Err(GapError::GridTooCoarse { n }) if n == MIN_FULL_GRID - 1));
    assert!(matches!(sweep_and_certify(s, model, &SweepOptions::survey(0)), Err(GapError::GridTooCoarse { n: 0 })));
}

#[test]
fn survey_is_never_a_certificate() {
    let (s, model) = fixture();
    let g = sweep_and_certify(s, model, &SweepOptions::survey(70)).unwrap();
    assert!(!g.verdict);
    assert_eq!(g.verdict_label(), "not certified (survey mode)");
    assert_eq!(g.lower_bounds.len(), 71);
    assert!(g.min_lower_bound.unwrap() >= 0.8);
}
