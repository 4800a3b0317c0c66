//! Inexact augmented Lagrangian solver for conic convex programs
//!
//! ```text
//! min { ρ(x) + γ(x) : Ax - b ∈ K, x ∈ χ }
//! ```
//!
//! where `K` is a product of zero, nonnegative, second-order and PSD cones,
//! `χ` is a simple compact set, `ρ` is zero or an ℓ1 penalty, and `γ` is
//! smooth. Subproblems are solved with an accelerated proximal gradient
//! method.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the aliases at the
//! crate root fix the scalar to `f64`.

pub mod apg;
pub mod audit;
pub mod cones;
pub mod error;
pub mod format;
pub mod linalg;
pub mod problems;
pub mod scalar;
pub mod sets;
pub mod smooth;
pub mod solver;
pub mod trace;

pub use crate::solver::{
    kkt_certificate, solve, Alcc, Certificate, OuterIterate, Reference, ScheduleConfig,
    SolveStatus, SolveTrace,
};
pub use crate::cones::Cone;
pub use crate::error::{Error, Result};
pub use crate::scalar::Scalar;
pub use crate::sets::{Regularizer, SetKind, SimpleSetProx};

pub type ConicProgram = solver::ConicProgram<f64>;
pub type ConicProgram32 = solver::ConicProgram<f32>;
pub type Schedule = solver::ScheduleConfig<f64>;
pub type Trace = solver::SolveTrace<f64>;
pub type DenseMatrix = linalg::DenseMatrix<f64>;
pub type LinearMap = linalg::LinearMap<f64>;
pub type SymMatrix = linalg::SymMatrix<f64>;
pub type SimpleSet = sets::SimpleSetProx<f64>;
