//! Grid sweep over α ∈ [0, 7/10] and the Lipschitz continuation between grid
//! points.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::scalar::{rat, rational_str};
use crate::series::PerturbationSeries;

use super::enclose::{enclose, EigenEnclosure};
use super::linalg::CMat;
use super::projected::{eigensolve_from, GapModel};
use super::GapError;

/// Largest α covered by the sweep.
pub fn alpha_max() -> BigRational {
    rat(7, 10)
}

/// Required certified lower bound at every grid point.
pub fn point_threshold() -> BigRational {
    rat(4, 5)
}

/// Gap claimed on the whole interval.
pub fn claimed_gap() -> BigRational {
    rat(3, 4)
}

/// Grid spacing must be strictly below `1/MAX_SPACING_INV`.
pub const MAX_SPACING_INV: u64 = 388_831;

/// Smallest grid count that passes the spacing check.
pub const MIN_FULL_GRID: usize = 272_182;

/// A-priori bound on `‖H^α_Ξ‖max`, spot-checked at every point.
pub const MAX_ENTRY_BOUND: f64 = 7.0;

/// A-priori bound on `‖H^α_Ξ‖₂`.
pub const NORM_BOUND: f64 = 10.0;

/// Points per warm-started chain. Chains are fixed by the grid, not by the
/// thread count, so results do not depend on scheduling.
pub const CHAIN_LEN: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    /// Certificate-grade run; refuses coarse grids.
    Full,
    /// Any grid; never issues a certificate.
    Survey,
}

#[derive(Clone, Debug)]
pub struct SweepOptions {
    pub grid: usize,
    /// `None` uses the rayon default.
    pub threads: Option<usize>,
    pub mode: SweepMode,
    /// Keep all 81 eigenvalues and the radius per point.
    pub keep_curves: bool,
}

impl SweepOptions {
    pub fn full(grid: usize) -> Self {
        SweepOptions { grid, threads: None, mode: SweepMode::Full, keep_curves: false }
    }

    pub fn survey(grid: usize) -> Self {
        SweepOptions { grid, threads: None, mode: SweepMode::Survey, keep_curves: true }
    }
}

/// Ingredients of the bound `|∂_α H^α_Ξ| ≤ L`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LipschitzBound {
    #[serde(with = "rational_str")]
    pub max_term_norm_sq: BigRational,
    /// `Σ_{m,n ≤ 8} (m + n)`.
    pub index_sum: u64,
    /// `‖∂_α Q^α‖ ≤ 3·index_sum`.
    pub projector_derivative: u64,
    pub hamiltonian_norm: u64,
    pub h1_norm: u64,
    pub constant: u64,
}

/// `L = 2·‖P_ΞH^αP_Ξ‖·‖∂_αQ^α‖ + ‖H¹‖`, recomputed from the series.
pub fn lipschitz_constant(series: &PerturbationSeries) -> Result<LipschitzBound, GapError> {
    let n = series.order();
    if n != 8 {
        return Err(GapError::WrongOrder(n));
    }
    let mut max_sq = BigRational::zero();
    for j in 0..=n {
        let s = series.norm_sq_of_term(j)?;
        if s > max_sq {
            max_sq = s;
        }
    }
    if max_sq > BigRational::from_integer(3.into()) {
        return Err(GapError::IngredientViolation(format!("max ‖Ψʲ‖² = {max_sq} exceeds 3")));
    }
    let index_sum: u64 = (0..=n as u64).flat_map(|a| (0..=n as u64).map(move |b| a + b)).sum();
    let projector_derivative = 3 * index_sum;
    let (hamiltonian_norm, h1_norm) = (NORM_BOUND as u64, 3);
    Ok(LipschitzBound {
        max_term_norm_sq: max_sq,
        index_sum,
        projector_derivative,
        hamiltonian_norm,
        h1_norm,
        constant: 2 * hamiltonian_norm * projector_derivative + h1_norm,
    })
}

/// Grid spacing `h = 7/(10N)`.
pub fn grid_spacing(n: usize) -> BigRational {
    alpha_max() / BigRational::from_integer(BigInt::from(n))
}

/// `α_k = k·h`.
pub fn grid_alpha(n: usize, k: usize) -> BigRational {
    BigRational::new(BigInt::from(7 * k as u64), BigInt::from(10 * n as u64))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointResult {
    pub k: usize,
    pub alpha: f64,
    /// Numerically computed first positive eigenvalue.
    pub first_positive: f64,
    /// Certified lower bound; `None` when the enclosure cannot isolate zero.
    pub lower_bound: Option<f64>,
    pub radius: f64,
    pub mu: f64,
    pub sup_residual: f64,
    pub sup_vec_inf: f64,
    pub sup_lambda: f64,
    pub max_entry: f64,
    pub entry_error: f64,
}

/// One row of the eigenvalue-curve table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurveRow {
    pub alpha: f64,
    pub values: Vec<f64>,
    pub radius: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GapCertificate {
    pub mode: SweepMode,
    pub grid: usize,
    #[serde(with = "rational_str")]
    pub spacing: BigRational,
    #[serde(with = "rational_str")]
    pub alpha_max: BigRational,
    #[serde(with = "rational_str")]
    pub point_threshold: BigRational,
    #[serde(with = "rational_str")]
    pub claimed_gap: BigRational,
    pub lipschitz: LipschitzBound,
    /// `L·h/2`, exact.
    #[serde(with = "rational_str")]
    pub continuation_loss: BigRational,
    pub continuation_ok: bool,
    /// Per-point certified lower bounds, in grid order.
    pub lower_bounds: Vec<Option<f64>>,
    /// `None` when some point could not isolate the zero mode.
    pub min_lower_bound: Option<f64>,
    pub min_first_positive: f64,
    pub min_first_positive_alpha: f64,
    pub max_radius: f64,
    pub max_mu: f64,
    pub max_residual: f64,
    pub max_vec_inf: f64,
    pub max_lambda: f64,
    pub max_entry: f64,
    pub max_entry_error: f64,
    /// True only for a full run where every point passes and the
    /// continuation loss fits between 8/10 and 3/4.
    pub verdict: bool,
    #[serde(skip)]
    pub curves: Vec<CurveRow>,
}

impl GapCertificate {
    pub fn verdict_label(&self) -> &'static str {
        match (self.mode, self.verdict) {
            (SweepMode::Survey, _) => "not certified (survey mode)",
            (SweepMode::Full, true) => "certified",
            (SweepMode::Full, false) => "not certified",
        }
    }
}

struct PointOutcome {
    result: PointResult,
    curve: Option<CurveRow>,
    failure: Option<String>,
}

fn run_point(
    model: &GapModel,
    n: usize,
    k: usize,
    warm: Option<&CMat>,
    keep_curve: bool,
) -> Result<(PointOutcome, CMat), GapError> {
    let alpha = grid_alpha(n, k);
    let m = model.projected(&alpha)?;
    let (pairs, u) = eigensolve_from(&m, warm)?;
    let enc: EigenEnclosure = enclose(&m, &pairs)?;
    let z = enc.values.len() / 2;
    let lower = enc.gap_lower_bound();
    let mut failure = None;
    if enc.max_entry > MAX_ENTRY_BOUND {
        failure = Some(format!("‖H‖max = {} exceeds {MAX_ENTRY_BOUND}", enc.max_entry));
    } else if enc.sup_lambda > NORM_BOUND {
        failure = Some(format!("sup|λ̃| = {} exceeds {NORM_BOUND}", enc.sup_lambda));
    } else {
        match lower {
            None => failure = Some(format!("enclosure radius {:e} does not isolate the zero mode", enc.radius)),
            Some(g) if g < 0.8 => failure = Some(format!("certified lower bound {g} below 8/10")),
            _ => {}
        }
    }
    let alpha_f = 0.7 * k as f64 / n as f64;
    let curve = keep_curve.then(|| CurveRow { alpha: alpha_f, values: enc.values.clone(), radius: enc.radius });
    let result = PointResult {
        k,
        alpha: alpha_f,
        first_positive: enc.values[z + 1],
        lower_bound: lower,
        radius: enc.radius,
        mu: enc.mu,
        sup_residual: enc.sup_residual,
        sup_vec_inf: enc.sup_vec_inf,
        sup_lambda: enc.sup_lambda,
        max_entry: enc.max_entry,
        entry_error: enc.entry_error,
    };
    Ok((PointOutcome { result, curve, failure }, u))
}

fn run_chain(model: &GapModel, n: usize, start: usize, end: usize, keep: bool) -> Result<Vec<PointOutcome>, GapError> {
    let mut out = Vec::with_capacity(end - start);
    let mut warm: Option<CMat> = None;
    for k in start..end {
        let (p, u) = run_point(model, n, k, warm.as_ref(), keep)?;
        out.push(p);
        warm = Some(u);
    }
    Ok(out)
}

/// Evaluates every grid point `α_k = 7k/(10N)`, `k = 0..=N`.
pub fn sweep_and_certify(
    series: &PerturbationSeries,
    model: &GapModel,
    opts: &SweepOptions,
) -> Result<GapCertificate, GapError> {
    let n = opts.grid;
    if n == 0 {
        return Err(GapError::GridTooCoarse { n });
    }
    let h = grid_spacing(n);
    if opts.mode == SweepMode::Full && h >= rat(1, MAX_SPACING_INV as i64) {
        return Err(GapError::GridTooCoarse { n });
    }
    let lipschitz = lipschitz_constant(series)?;
    let loss = &h * BigRational::from_integer(lipschitz.constant.into()) / rat(2, 1);
    let continuation_ok = loss < point_threshold() - claimed_gap();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads.unwrap_or(0))
        .build()
        .map_err(|e| GapError::IngredientViolation(format!("thread pool: {e}")))?;
    let chains: Vec<(usize, usize)> = (0..=n).step_by(CHAIN_LEN).map(|s| (s, (s + CHAIN_LEN).min(n + 1))).collect();
    let keep = opts.keep_curves;
    let outcomes: Vec<Vec<PointOutcome>> =
        pool.install(|| chains.par_iter().map(|&(s, e)| run_chain(model, n, s, e, keep)).collect::<Result<_, _>>())?;
    let outcomes: Vec<PointOutcome> = outcomes.into_iter().flatten().collect();

    if opts.mode == SweepMode::Full {
        if let Some(p) = outcomes.iter().find(|p| p.failure.is_some()) {
            return Err(GapError::PointFailure {
                k: p.result.k,
                alpha: crate::scalar::rational_string(&grid_alpha(n, p.result.k)),
                reason: p.failure.clone().unwrap_or_default(),
            });
        }
    }

    let fold = |f: fn(&PointResult) -> f64| outcomes.iter().map(|p| f(&p.result)).fold(0.0, f64::max);
    let lower_bounds: Vec<Option<f64>> = outcomes.iter().map(|p| p.result.lower_bound).collect();
    let min_lower_bound = lower_bounds.iter().try_fold(f64::INFINITY, |m, g| g.map(|g| m.min(g)));
    let argmin = outcomes
        .iter()
        .min_by(|a, b| a.result.first_positive.total_cmp(&b.result.first_positive))
        .map(|p| &p.result)
        .expect("grid is non-empty");
    let all_pass = outcomes.iter().all(|p| p.failure.is_none());
    let verdict = opts.mode == SweepMode::Full && all_pass && continuation_ok;

    Ok(GapCertificate {
        mode: opts.mode,
        grid: n,
        spacing: h,
        alpha_max: alpha_max(),
        point_threshold: point_threshold(),
        claimed_gap: claimed_gap(),
        lipschitz,
        continuation_loss: loss,
        continuation_ok,
        min_lower_bound,
        min_first_positive: argmin.first_positive,
        min_first_positive_alpha: argmin.alpha,
        max_radius: fold(|p| p.radius),
        max_mu: fold(|p| p.mu),
        max_residual: fold(|p| p.sup_residual),
        max_vec_inf: fold(|p| p.sup_vec_inf),
        max_lambda: fold(|p| p.sup_lambda),
        max_entry: fold(|p| p.max_entry),
        max_entry_error: fold(|p| p.entry_error),
        lower_bounds,
        verdict,
        curves: outcomes.into_iter().filter_map(|p| p.curve).collect(),
    })
}
