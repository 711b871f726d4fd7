//! Exact arithmetic, the chiral plane-wave model of twisted bilayer graphene
//! and the two certificates that bracket its first magic angle.

pub mod ball;
pub mod basis;
pub mod fermi;
pub mod gap;
pub mod lattice;
pub mod poly;
pub mod report;
pub mod scalar;
pub mod series;

pub use fermi::{build_envelopes, bracket_magic_angle, certify_sign, EnvelopePolynomial, FermiError, MagicAngleBracket, SignCertificate};
pub use gap::{build_xi, sweep_and_certify, verify_mu_choice, GapCertificate, GapError, GapModel, ProjectedMatrix, XiBasis};
pub use report::{run_pipeline, CertificationReport, PipelineOptions, Scope};
pub use basis::{apply_h0, apply_h0_inv_perp, apply_h1, apply_step, conj_reflect, inner, ChiralVector};
pub use lattice::{canonicalize, Chirality, LatticeSite, OrbitIndex, Sublattice};
pub use poly::{RadicalPoly, RationalPoly};
pub use scalar::{FloatApprox, RadicalComplex, ScalarError};
pub use series::{compute_series, PerturbationSeries, SeriesError};
