//! Centralized numeric tolerances.
//!
//! Every default here is a relative tolerance unless stated otherwise.
//! Operations that accept an explicit tolerance treat these as fallbacks, so
//! callers can tighten or relax individual checks without recompiling.

/// Default relative tolerance for algebraic post-condition checks
/// (inverse residual, eigendecomposition residual, flattened-solve residual).
pub const DEFAULT_REL: f64 = 1e-10;

/// Condition-number estimate above which a matrix is reported singular.
/// Solutions of several catalog models genuinely blow up in finite time;
/// failing loudly here is the intended behavior.
pub const SINGULARITY_COND: f64 = 1e12;

/// Condition bound on the eigenvector matrix; above this the matrix is
/// treated as defective (not reliably diagonalizable in double precision).
pub const EIG_COND_MAX: f64 = 1e12;

/// Relative half-width of the wedge around the closed negative real axis
/// inside which fractional matrix powers refuse to pick a branch.
pub const BRANCH_CUT_REL: f64 = 1e-12;

/// Tolerance for membership tests of a matrix in the image of an encoding
/// (looser than `DEFAULT_REL` so integrator drift does not spuriously reject
/// states that started on the image).
pub const DECODE_IMAGE_REL: f64 = 1e-9;

/// Default relative tolerance used when comparing two evaluation routes of
/// the same quantity in verification suites.
pub const CROSSCHECK_REL: f64 = 1e-10;
