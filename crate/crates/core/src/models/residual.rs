//! Independent consistency check of a stored trajectory against a model's
//! right-hand side.
//!
//! The time derivative is estimated from the stored states alone with the
//! five-point fourth-order central stencil, so agreement with the model's
//! own derivative is evidence about the trajectory, not a tautology.

use super::spec::{ModelSpec, Params};
use super::trajectory::Trajectory;
use super::ModelError;

const MIN_SAMPLES: usize = 5;

fn spacing(times: &[f64]) -> Result<f64, ModelError> {
    let h = times[1] - times[0];
    for w in times.windows(2) {
        let step = w[1] - w[0];
        if (step - h).abs() > 1e-9 * (1.0 + h.abs()) {
            return Err(ModelError::shape(
                "residual needs a uniformly spaced trajectory",
            ));
        }
    }
    if h == 0.0 {
        return Err(ModelError::shape("residual needs distinct sample times"));
    }
    Ok(h)
}

/// Per-interior-sample residuals `max_i |fd_i - rhs_i| / (1 + |rhs|_inf)`,
/// where `fd` is the five-point stencil derivative of the stored states.
pub fn residual_profile(
    spec: &ModelSpec,
    traj: &Trajectory,
    params: &Params,
) -> Result<Vec<(f64, f64)>, ModelError> {
    let n = traj.times.len();
    if n < MIN_SAMPLES {
        return Err(ModelError::TooFewSamples {
            min: MIN_SAMPLES,
            got: n,
        });
    }
    let h = spacing(&traj.times)?;
    let template = spec.template_state();
    let dim = traj.states[0].len();
    let mut out = Vec::with_capacity(n - 4);
    for k in 2..n - 2 {
        let rhs = spec.flat_derivative(traj.times[k], &traj.states[k], params, &template)?;
        let mut num = 0.0_f64;
        let mut den = 0.0_f64;
        for i in 0..dim {
            let fd = (traj.states[k - 2][i] - 8.0 * traj.states[k - 1][i]
                + 8.0 * traj.states[k + 1][i]
                - traj.states[k + 2][i])
                / (12.0 * h);
            num = num.max((fd - rhs[i]).abs());
            den = den.max(rhs[i].abs());
        }
        out.push((traj.times[k], num / (1.0 + den)));
    }
    Ok(out)
}

/// Largest interior residual of [`residual_profile`].
pub fn residual(spec: &ModelSpec, traj: &Trajectory, params: &Params) -> Result<f64, ModelError> {
    Ok(residual_profile(spec, traj, params)?
        .into_iter()
        .map(|(_, v)| v)
        .fold(0.0, f64::max))
}
