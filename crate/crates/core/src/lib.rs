//! Reflection-coefficient design of a 1-D impedance-boundary surface by
//! sequential convex programming.
//!
//! * [`em`]: grid, γ↔z maps, Helmholtz residual, net power flow, flux.
//! * [`benchmarks`]: GO and GO-RI closed forms.
//! * [`convexify`]: tangent under-estimators and reactive constraints.
//! * [`builders`]: the five per-iteration conic subproblems.
//! * [`scp`]: the outer loop.
//! * [`verification`]: audits, gradient checks, tangent sampling.

pub mod benchmarks;
pub mod builders;
pub mod convexify;
pub mod em;
pub mod scp;
pub mod verification;

pub use benchmarks::{go_profile, go_ri_profile, BenchmarkKind};
pub use builders::{build, ProblemKind, ToleranceSet, VarLayout};
pub use convexify::LinearizationPoint;
pub use em::{build_grid, ImpedanceProfile, ReflectionProfile, Scenario, SurfaceGrid};
pub use scp::{run_scp, ScpOptions, ScpOutcome, ScpSchedule, ScpState, TraceRecord};
pub use verification::{audit, AuditTolerances, FeasibilityReport};

#[derive(Debug, thiserror::Error)]
pub enum CoreError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid linearization point: {0}")]
    InvalidPoint(String),
    #[error("length mismatch: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },
    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },
    #[error("singular denominator {what} at index {index}")]
    Singular { index: usize, what: &'static str },
    #[error("|γ_n| vanishes at index {index}")]
    Degenerate { index: usize },
    #[error("index {index} out of range (valid: 0..{len})")]
    Index { index: usize, len: usize },
    #[error("nonsmooth point: {0}")]
    Nonsmooth(String),
    #[error("warm start violates {family} by {violation:e}")]
    InfeasibleWarmStart { family: String, violation: f64 },
    #[error("first subproblem is infeasible: {0}")]
    FirstIterationInfeasible(String),
    #[error(transparent)]
    Conic(#[from] risopt_conic::ConicError),
}
