//! End-to-end pipeline and the machine-readable certification report.

use std::time::{Instant, SystemTime, UNIX_EPOCH};

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::fermi::{approximate_poly_roots, approximate_roots, bracket_magic_angle, build_envelopes, MagicAngleBracket};
use crate::gap::sweep::{lipschitz_constant, sweep_and_certify, GapCertificate, SweepMode, SweepOptions};
use crate::gap::xi::{build_xi, verify_mu_choice, MuChoice, XiBasis};
use crate::gap::GapModel;
use crate::scalar::{rational_str, EPS_EFF};
use crate::series::{compute_series, numerator_series};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Which certificates a run produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scope {
    /// Sign certificates only.
    Zero,
    /// Ξ checks and the gap sweep only.
    Gap,
    All,
}

#[derive(Clone, Debug)]
pub struct PipelineOptions {
    pub scope: Scope,
    pub sweep: SweepOptions,
    /// Replaces the standard Ξ; used to exercise the failure paths.
    pub xi: Option<XiBasis>,
    /// Also locate the root of the numerator series at this order.
    pub high_order_root: Option<usize>,
}

impl PipelineOptions {
    pub fn new(scope: Scope, sweep: SweepOptions) -> Self {
        PipelineOptions { scope, sweep, xi: None, high_order_root: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ingredients {
    pub mu: i64,
    pub mu_sq: i64,
    pub boundary_norm_sq: usize,
    #[serde(with = "rational_str")]
    pub h1_psi8_norm_sq: BigRational,
    pub lipschitz: u64,
    pub eps_eff: f64,
    pub xi_dim: usize,
}

/// Floating-point root locations. Not part of any certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproximateRoots {
    pub note: String,
    pub numerator: Vec<f64>,
    pub worst: Vec<f64>,
    pub best: Vec<f64>,
    pub high_order: Option<(usize, Vec<f64>)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageFailure {
    pub stage: String,
    pub message: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// Everything that may differ between otherwise identical runs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunInfo {
    pub started_unix: u64,
    pub finished_unix: u64,
    pub threads: usize,
    pub stages: Vec<StageTiming>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificationReport {
    pub tool: String,
    pub version: String,
    pub scope: Scope,
    pub series_order: usize,
    pub mu_choice: Option<MuChoice>,
    pub bracket: Option<MagicAngleBracket>,
    pub gap: Option<GapCertificate>,
    pub approximate_roots: Option<ApproximateRoots>,
    pub ingredients: Option<Ingredients>,
    pub failure: Option<StageFailure>,
    pub verdict: bool,
    pub verdict_label: String,
    pub run: RunInfo,
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

struct Stages {
    timings: Vec<StageTiming>,
}

impl Stages {
    fn run<T, E: std::fmt::Display>(&mut self, name: &str, f: impl FnOnce() -> Result<T, E>) -> Result<T, StageFailure> {
        let t = Instant::now();
        let r = f();
        self.timings.push(StageTiming { stage: name.into(), seconds: t.elapsed().as_secs_f64() });
        r.map_err(|e| StageFailure { stage: name.into(), message: e.to_string() })
    }
}

/// Runs the stages in `opts.scope` in order and stops at the first failure.
pub fn run_pipeline(opts: &PipelineOptions) -> CertificationReport {
    let started = unix_now();
    let mut stages = Stages { timings: Vec::new() };
    let series = compute_series(8);
    let mut report = CertificationReport {
        tool: "tbg".into(),
        version: TOOL_VERSION.into(),
        scope: opts.scope,
        series_order: series.order(),
        mu_choice: None,
        bracket: None,
        gap: None,
        approximate_roots: None,
        ingredients: None,
        failure: None,
        verdict: false,
        verdict_label: String::new(),
        run: RunInfo { started_unix: started, finished_unix: started, threads: 0, stages: Vec::new() },
    };
    let result = (|| -> Result<(), StageFailure> {
        if opts.scope != Scope::Zero {
            let xi = match &opts.xi {
                Some(x) => x.clone(),
                None => stages.run("build_xi", build_xi)?,
            };
            let mu = stages.run("verify_mu_choice", || verify_mu_choice(&xi, &series))?;
            let lip = stages.run("lipschitz_constant", || lipschitz_constant(&series))?;
            let h1 = stages.run("ingredients", || series.h1_norm_sq_of_term(8))?;
            report.ingredients = Some(Ingredients {
                mu: (mu.mu_sq as f64).sqrt() as i64,
                mu_sq: mu.mu_sq,
                boundary_norm_sq: mu.boundary_norm_sq,
                h1_psi8_norm_sq: h1,
                lipschitz: lip.constant,
                eps_eff: EPS_EFF,
                xi_dim: xi.plus_len() + xi.minus_len(),
            });
            report.mu_choice = Some(mu);
            let gap = stages.run("sweep_and_certify", || {
                let model = GapModel::new(&series, &xi)?;
                sweep_and_certify(&series, &model, &opts.sweep)
            })?;
            report.gap = Some(gap);
        }
        if opts.scope != Scope::Gap {
            let (worst, best) = stages.run("build_envelopes", || build_envelopes(&series))?;
            let (lo, hi) = (0.5, 0.65);
            let mut roots = ApproximateRoots {
                note: "non-rigorous floating-point root location".into(),
                numerator: approximate_poly_roots(&worst.base, lo, hi),
                worst: approximate_roots(|a| worst.eval_f64(a), lo, hi),
                best: approximate_roots(|a| best.eval_f64(a), lo, hi),
                high_order: None,
            };
            if let Some(n) = opts.high_order_root {
                let p = stages.run("numerator_series", || numerator_series(n))?;
                roots.high_order = Some((n, approximate_poly_roots(&p, lo, hi)));
            }
            report.approximate_roots = Some(roots);
            report.bracket = Some(stages.run("certify_sign", || bracket_magic_angle(&worst, &best))?);
        }
        Ok(())
    })();
    if let Err(f) = result {
        report.failure = Some(f);
    }
    let gap_ok = report.gap.as_ref().is_some_and(|g| g.verdict);
    let zero_ok = report.bracket.is_some();
    let survey = opts.scope != Scope::Zero && opts.sweep.mode == SweepMode::Survey;
    report.verdict = report.failure.is_none()
        && match opts.scope {
            Scope::Zero => zero_ok,
            Scope::Gap => gap_ok,
            Scope::All => zero_ok && gap_ok,
        };
    report.verdict_label = if survey && report.failure.is_none() {
        "not certified (survey mode)".into()
    } else if !report.verdict {
        match &report.failure {
            Some(f) => format!("not certified: {} failed", f.stage),
            None => "not certified".into(),
        }
    } else {
        match opts.scope {
            Scope::Zero => "sign certificates hold at 0.57 and 0.61".into(),
            Scope::Gap => "gap of 3/4 certified on [0, 7/10]".into(),
            Scope::All => "first magic angle certified in (0.57, 0.61)".into(),
        }
    };
    report.run = RunInfo {
        started_unix: started,
        finished_unix: unix_now(),
        threads: opts.sweep.threads.unwrap_or_else(rayon::current_num_threads),
        stages: stages.timings,
    };
    report
}
