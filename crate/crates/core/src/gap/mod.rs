//! Certified lower bound on the spectral gap of the Hamiltonian projected onto
//! Ξ and orthogonally to the approximate zero mode, for α ∈ [0, 7/10].

pub mod enclose;
pub mod linalg;
pub mod projected;
pub mod sweep;
pub mod xi;

use thiserror::Error;

use crate::scalar::ScalarError;
use crate::series::SeriesError;

pub use enclose::{enclose, enclose_with, EigenEnclosure, EnclosureConstants, HermitianOp};
pub use linalg::{jacobi_eigh, jacobi_eigh_from, CMat, EigenError, EigenPairs};
pub use projected::{eigensolve, eigensolve_from, ExactProjected, GapModel, ProjectedMatrix};
pub use sweep::{
    lipschitz_constant, sweep_and_certify, CurveRow, GapCertificate, LipschitzBound, PointResult, SweepMode, SweepOptions,
};
pub use xi::{build_xi, verify_mu_choice, MuChoice, XiBasis};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GapError {
    #[error("Ξ has {0} functions, expected 81")]
    CountMismatch(usize),
    #[error("Ξ disagrees with the published listing: {0}")]
    ListingMismatch(String),
    #[error("an orbit with |G|² = {mu_sq} < 49 lies outside Ξ")]
    MuViolation { mu_sq: i64 },
    #[error("lattice site {site} has {degree} boundary hops across Ξ")]
    BoundaryDegreeViolation { site: String, degree: usize },
    #[error("Ψ^{term} has weight on {index}, outside Ξ")]
    SupportEscape { term: usize, index: String },
    #[error("orthonormality defect too large: m·μ = {m_mu:e} ≥ 1/2")]
    MuTooLarge { m_mu: f64 },
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error("grid N = {n} gives spacing 7/(10N) ≥ 1/388831; no certificate is issued")]
    GridTooCoarse { n: usize },
    #[error("grid point k = {k} (α = {alpha}) failed: {reason}")]
    PointFailure { k: usize, alpha: String, reason: String },
    #[error("ingredient out of bounds: {0}")]
    IngredientViolation(String),
    #[error("the gap construction needs an order-8 series, got {0}")]
    WrongOrder(usize),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}
