//! Conic programs over real variables and an interior-point backend.
//!
//! [`ConicProgram`] is the solver-agnostic intermediate form: a linear
//! objective with affine (`≤ 0`), second-order-cone and PSD blocks.
//! [`solve`] runs the built-in homogeneous self-dual interior-point method;
//! other backends plug in through [`ConicSolver`].

pub mod cones;
pub mod dense;
pub mod dump;
pub mod exec;
pub mod ipm;
pub mod lift;
pub mod program;

pub use exec::Exec;
pub use ipm::{solve, ConicSolution, ConicSolver, InteriorPoint, Settings, Status};
pub use lift::{embed_hermitian_matrix, embed_hermitian_psd, lift_complex_vector, unlift_complex_vector, HermitianAffine};
pub use program::{Block, CheckReport, ConicProgram, LinExpr, NamedBlock, PsdBlock};

#[derive(Debug, thiserror::Error)]
pub enum ConicError {
    #[error("malformed program: {0}")]
    Malformed(String),
    #[error("dump parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}
