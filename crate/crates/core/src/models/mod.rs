//! The model catalog: matrix evolution equations, hand-coded N-body vector
//! models, the generic matrix-to-vector lift, trajectory containers, and
//! finite-difference residual checks.
//!
//! Matrix models come in first order (flows) and second order (positions
//! and velocities). Each model declares the structural operations its
//! right-hand side performs ([`Caps`]); the lift refuses parameterizations
//! that are not closed under those operations and additionally verifies
//! every decode against the encoding's image at run time.

mod lift;
mod matrix;
mod random;
mod registry;
mod residual;
mod spec;
mod state;
mod trajectory;
mod vector;

pub use lift::{body_state, caps_satisfied, lift, lift_with_id, param_caps, roundtrip_state};
pub use random::seeded_state;
pub use registry::{construct, registry, BuildOptions, MODEL_IDS};
pub use residual::{residual, residual_profile};
pub use spec::{
    site, BlockDesc, Boundary, Caps, FirstOrderFn, ModelSpec, ParamDesc, ParamKind, ParamValue,
    Params, Rhs, SecondOrderFn, Shape,
};
pub use state::{BlockKind, ModelState, StateBlock};
pub use trajectory::Trajectory;

use crate::algebra::AlgebraError;
use crate::param::ParamError;

/// Errors surfaced while building or evaluating models.
#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    /// State layout disagrees with the model's shape.
    #[error("state shape mismatch: {0}")]
    Shape(String),

    /// A named constant is missing or has the wrong kind or size.
    #[error("parameter {name}: {why}")]
    Param { name: String, why: String },

    /// A state reached a configuration where the model is undefined
    /// (vanishing norms, coincident bodies, zero denominators).
    #[error("degenerate configuration at block {block}: {what}")]
    Degenerate { block: String, what: String },

    /// The requested encoding is not closed under the operations the model
    /// performs.
    #[error("model {model} needs {needs}; parameterization {param} is not closed under that")]
    IncompatibleParameterization {
        model: String,
        param: &'static str,
        needs: String,
    },

    /// Residual checks need enough samples for the difference stencil.
    #[error("residual needs at least {min} uniform samples, got {got}")]
    TooFewSamples { min: usize, got: usize },

    /// A matrix operation failed inside a specific block.
    #[error("block {block}: {source}")]
    Block {
        block: String,
        source: AlgebraError,
    },

    #[error(transparent)]
    Algebra(#[from] AlgebraError),

    #[error(transparent)]
    Encoding(#[from] ParamError),
}

impl ModelError {
    pub fn shape(msg: impl Into<String>) -> Self {
        ModelError::Shape(msg.into())
    }

    pub fn param(name: impl Into<String>, why: impl Into<String>) -> Self {
        ModelError::Param {
            name: name.into(),
            why: why.into(),
        }
    }

    pub fn degenerate(block: impl Into<String>, what: impl Into<String>) -> Self {
        ModelError::Degenerate {
            block: block.into(),
            what: what.into(),
        }
    }

    /// Wraps an algebra error with the name of the block it occurred in.
    pub fn in_block(block: impl Into<String>) -> impl FnOnce(AlgebraError) -> ModelError {
        let block = block.into();
        move |source| ModelError::Block { block, source }
    }
}
