//! Closed-form and reduced-form trajectory solvers.
//!
//! Each solver produces the exact solution of one catalog family, up to
//! quadrature: a few families reduce to a scalar or small linear ODE that is
//! integrated at much tighter tolerance than any trajectory comparison uses,
//! so the result still serves as an independent oracle for the general-purpose
//! integrator. [`evaluate`] dispatches a catalog spec to its solver by the
//! spec's `closed_form` tag.

mod lemma;
mod master;
mod one_body;
mod pairs;
mod periodicity;
mod wedge;

pub use lemma::{similarity_transform, Channel, SimilarityOutput, SimilarityProblem};
pub use master::{solve_gyro, solve_linear, solve_master};
pub use one_body::solve_one_body;
pub use pairs::{solve_anchored_pair, solve_tethered_pair, AnchorCase};
pub use periodicity::{classify_periodicity, Condition, PeriodicityVerdict};
pub use wedge::{reduce_drift, solve_wedge_kernel, DriftVariant, WedgeSolution};

use crate::algebra::{AlgebraError, CMatrix, Complex};
use crate::integrate::IntegrateError;
use crate::models::{ModelError, ModelSpec, ModelState, Params, StateBlock};
use crate::param::{self, Block, ParamId, Vec3};
use thiserror::Error;

/// Failure modes shared by the solvers in this module.
#[derive(Debug, Error)]
pub enum ClosedFormError {
    /// Matrix algebra failed inside a specific solver branch.
    #[error("{branch} branch: {source}")]
    Branch {
        branch: &'static str,
        #[source]
        source: AlgebraError,
    },
    /// Parameters do not satisfy the precondition the solver relies on.
    #[error("constraint violated: {0}")]
    ConstraintViolation(String),
    /// Initial data sits where the solution formula is undefined.
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),
    /// The auxiliary tight-tolerance integration inside a solver failed.
    #[error("auxiliary integration failed: {0}")]
    Auxiliary(String),
    /// The model has no registered closed form.
    #[error("model {0} has no registered closed form")]
    Unsupported(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl From<IntegrateError> for ClosedFormError {
    fn from(e: IntegrateError) -> Self {
        ClosedFormError::Auxiliary(e.to_string())
    }
}

impl From<param::ParamError> for ClosedFormError {
    fn from(e: param::ParamError) -> Self {
        ClosedFormError::Model(ModelError::from(e))
    }
}

type Result<T> = std::result::Result<T, ClosedFormError>;

/// Evaluates the registered closed form of `spec` at the requested times.
///
/// `init` uses the same full-state layout as the integrator (position blocks,
/// then velocity blocks for second-order models), and each returned state
/// matches it, so trajectories and closed forms compare directly.
pub fn evaluate(
    spec: &ModelSpec,
    params: &Params,
    init: &ModelState,
    times: &[f64],
) -> Result<Vec<ModelState>> {
    let form = spec
        .closed_form
        .as_deref()
        .ok_or_else(|| ClosedFormError::Unsupported(spec.id.clone()))?;
    spec.check_state(init)?;
    match form {
        "master" => eval_master(params, init, times),
        "gyro" => eval_gyro(spec, params, init, times),
        "one-body" => eval_one_body(params, init, times),
        "wedge-kernel" => eval_wedge(spec, params, init, times),
        "anchored-pair" => eval_anchored(params, init, times),
        "tethered-pair" => eval_tethered(params, init, times),
        _ => Err(ClosedFormError::Unsupported(spec.id.clone())),
    }
}

fn scalar3(params: &Params) -> Result<(Complex, Complex, Complex)> {
    Ok((params.scalar("a")?, params.scalar("b")?, params.scalar("c")?))
}

fn eval_master(params: &Params, init: &ModelState, times: &[f64]) -> Result<Vec<ModelState>> {
    let (a, b, cq) = scalar3(params)?;
    let m0 = init.matrix(0)?.clone();
    let md0 = init.matrix(1)?.clone();
    times
        .iter()
        .map(|&t| {
            let (m, md) = solve_master(a, b, cq, &m0, &md0, t)?;
            Ok(pack(init, vec![StateBlock::Matrix(m), StateBlock::Matrix(md)]))
        })
        .collect()
}

fn eval_gyro(
    spec: &ModelSpec,
    params: &Params,
    init: &ModelState,
    times: &[f64],
) -> Result<Vec<ModelState>> {
    let (a, b, cq) = scalar3(params)?;
    match init.block(0)? {
        StateBlock::Matrix(_) => {
            let u0 = init.matrix(0)?.clone();
            let ud0 = init.matrix(1)?.clone();
            let sol = solve_gyro(a, b, cq, &u0, &ud0, times)?;
            Ok(sol
                .into_iter()
                .map(|(u, ud)| pack(init, vec![StateBlock::Matrix(u), StateBlock::Matrix(ud)]))
                .collect())
        }
        StateBlock::Vector(_) => {
            // The vector flow r'' = 2a r' + b r + c r x r' is the image of the
            // matrix flow with a halved commutator weight.
            let r0 = *init.vector(0)?;
            let v0 = *init.vector(1)?;
            let u0 = param::encode(&ParamId::Traceless2, &[Block::Vector(r0)])?;
            let ud0 = param::encode(&ParamId::Traceless2, &[Block::Vector(v0)])?;
            let sol = solve_gyro(a, b, cq * 0.5, &u0, &ud0, times)?;
            sol.into_iter()
                .map(|(u, ud)| {
                    let r = decode_vector(&u)?;
                    let v = decode_vector(&ud)?;
                    Ok(pack(init, vec![StateBlock::Vector(r), StateBlock::Vector(v)]))
                })
                .collect()
        }
        _ => Err(ClosedFormError::Unsupported(spec.id.clone())),
    }
}

fn eval_one_body(params: &Params, init: &ModelState, times: &[f64]) -> Result<Vec<ModelState>> {
    let (a, b, cq) = scalar3(params)?;
    let r0 = *init.vector(0)?;
    let v0 = *init.vector(1)?;
    times
        .iter()
        .map(|&t| {
            let (r, v) = solve_one_body(a, b, cq, &r0, &v0, t)?;
            Ok(pack(init, vec![StateBlock::Vector(r), StateBlock::Vector(v)]))
        })
        .collect()
}

fn eval_wedge(
    spec: &ModelSpec,
    params: &Params,
    init: &ModelState,
    times: &[f64],
) -> Result<Vec<ModelState>> {
    let k = params.scalar("k")?;
    let p = match spec.id.as_str() {
        "uniform-gyro" => 0.0,
        "inverse-square-gyro" => -2.0,
        "monopole-gyro" => -3.0,
        _ => params.real("p")?,
    };
    if k.im.abs() > 1e-12 * (1.0 + k.norm()) {
        return Err(ClosedFormError::ConstraintViolation(
            "angular kernel strength must be real for the rotating-frame route".into(),
        ));
    }
    let r0 = real3(init.vector(0)?, "r")?;
    let v0 = real3(init.vector(1)?, "r'")?;
    let kr = k.re;
    let hhat = move |s: f64| kr * s.powf(p / 2.0);
    let hhat_prime = move |s: f64| {
        if p == 0.0 {
            0.0
        } else {
            kr * (p / 2.0) * s.powf(p / 2.0 - 1.0)
        }
    };
    let sol = solve_wedge_kernel(&hhat, &hhat_prime, r0, v0, times)?;
    Ok(sol
        .positions
        .iter()
        .zip(&sol.velocities)
        .map(|(r, v)| {
            pack(
                init,
                vec![
                    StateBlock::Vector(Vec3::from_real(r[0], r[1], r[2])),
                    StateBlock::Vector(Vec3::from_real(v[0], v[1], v[2])),
                ],
            )
        })
        .collect())
}

fn eval_anchored(params: &Params, init: &ModelState, times: &[f64]) -> Result<Vec<ModelState>> {
    times
        .iter()
        .map(|&t| solve_anchored_pair(AnchorCase::BalancedCoupling, params, init, t))
        .collect()
}

fn eval_tethered(params: &Params, init: &ModelState, times: &[f64]) -> Result<Vec<ModelState>> {
    times.iter().map(|&t| solve_tethered_pair(params, init, t)).collect()
}

pub(super) fn pack(template: &ModelState, blocks: Vec<StateBlock>) -> ModelState {
    ModelState::new(
        template
            .names()
            .iter()
            .zip(blocks)
            .map(|(n, b)| (n.clone(), b))
            .collect(),
    )
}

/// Reads the 3-vector out of a 2x2 traceless encoding.
pub(super) fn decode_vector(m: &CMatrix) -> Result<Vec3> {
    let blocks = param::decode(&ParamId::Traceless2, m)?;
    match blocks.into_iter().next() {
        Some(Block::Vector(v)) => Ok(v),
        _ => Err(ClosedFormError::DegenerateConfiguration(
            "conjugated matrix left the traceless image".into(),
        )),
    }
}

fn real3(v: &Vec3, what: &str) -> Result<[f64; 3]> {
    let scale = 1.0 + v.abs();
    for z in [v.x, v.y, v.z] {
        if z.im.abs() > 1e-12 * scale {
            return Err(ClosedFormError::ConstraintViolation(format!(
                "block {what} must be real for the rotating-frame route"
            )));
        }
    }
    Ok([v.x.re, v.y.re, v.z.re])
}
