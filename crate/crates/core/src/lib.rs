//! Numerical laboratory for a family of solvable, integrable, and
//! linearizable matrix ODEs and the rotation-invariant N-body problems in
//! three-dimensional space obtained from them by encoding matrices as
//! 3-vectors.
//!
//! The crate is organized in layers:
//!
//! - [`algebra`]: dense complex square matrices and the matrix functions the
//!   closed-form solvers need (inverse, exponential, eigendecomposition,
//!   fractional powers, flattened linear solves).
//! - [`param`]: the matrix ↔ 3-vector encodings, their closed-form closure
//!   maps (sandwich, commutator, product), analytic functions of encoded
//!   matrices, and a general linear 3-vector solve.
//! - [`models`]: the catalog of matrix and vector evolution equations, the
//!   generic lift that turns a matrix model into an N-body model, and
//!   trajectory residual checks.
//! - [`integrate`]: an independent Runge-Kutta oracle (fixed-step and
//!   embedded adaptive) used to cross-check every closed form.
//! - [`closedform`]: explicit and semi-explicit solvers plus periodicity
//!   classification.
//! - [`transforms`]: model-to-model constructors (complexification,
//!   association, block duplication, cyclic-algebra multiplication with DFT
//!   reconstruction, decoupling, barycentric reduction).
//! - [`verify`]: conserved-quantity monitors, closed-form vs. numeric
//!   comparison, periodicity confirmation, and deterministic report suites.

pub mod algebra;
pub mod closedform;
pub mod integrate;
pub mod models;
pub mod param;
pub mod tol;
pub mod transforms;
pub mod verify;

pub use algebra::{CMatrix, Complex};
pub use models::{ModelSpec, ModelState, Trajectory};
pub use param::{ParamId, ScalarVec, Vec3};
