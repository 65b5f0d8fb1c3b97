//! Time integration over flat real state vectors.
//!
//! Two methods: classical fixed-step RK4 and an adaptive embedded 5(4) pair
//! with the usual step controller. Both record the derivative at every
//! accepted sample so trajectories support cubic Hermite interpolation, and
//! both run in either time direction. Everything here is deterministic.

use crate::models::{ModelError, ModelSpec, ModelState, Params, Trajectory};

/// Stage coefficients of the embedded 5(4) pair.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights (the last stage row doubles as the solution).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
/// Embedded fourth-order weights.
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Classical fixed-step fourth-order Runge-Kutta; the step is `h_init`.
    Rk4,
    /// Adaptive embedded 5(4) pair with scaled-RMS error control.
    Adaptive54,
}

#[derive(Clone, Copy, Debug)]
pub struct IntegratorConfig {
    pub method: Method,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Initial (and, for `Rk4`, fixed) step magnitude.
    pub h_init: f64,
    /// Smallest allowed step magnitude before giving up.
    pub h_min: f64,
    /// Largest allowed step magnitude; 0 means the whole span.
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::Adaptive54,
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            h_init: 1e-3,
            h_min: 1e-14,
            h_max: 0.0,
            max_steps: 1_000_000,
        }
    }
}

impl IntegratorConfig {
    /// Fixed-step RK4 with step `h`.
    pub fn rk4(h: f64) -> Self {
        IntegratorConfig {
            method: Method::Rk4,
            h_init: h,
            ..IntegratorConfig::default()
        }
    }

    /// Adaptive pair with equal absolute and relative tolerance.
    pub fn adaptive(tol: f64) -> Self {
        IntegratorConfig {
            method: Method::Adaptive54,
            abs_tol: tol,
            rel_tol: tol,
            ..IntegratorConfig::default()
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum IntegrateError {
    /// The controller drove the step below `h_min`; the samples accepted so
    /// far are preserved.
    #[error("step size underflow at t = {t:.6e} (limit {h_min:.3e})")]
    StepSizeUnderflow {
        t: f64,
        h_min: f64,
        partial: Box<Trajectory>,
    },
    /// The step budget ran out before reaching the end of the span.
    #[error("step budget of {max_steps} exhausted at t = {t:.6e}")]
    MaxSteps {
        t: f64,
        max_steps: usize,
        partial: Box<Trajectory>,
    },
    #[error("integrator configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl IntegrateError {
    /// Samples accepted before the failure, when any were.
    pub fn partial(&self) -> Option<&Trajectory> {
        match self {
            IntegrateError::StepSizeUnderflow { partial, .. }
            | IntegrateError::MaxSteps { partial, .. } => Some(partial),
            _ => None,
        }
    }
}

/// Scaled-RMS size of the error estimate `e` against the pointwise scale
/// `abs_tol + rel_tol * max(|y_i|, |z_i|)`; acceptable when at most 1.
fn error_norm(e: &[f64], y: &[f64], z: &[f64], abs_tol: f64, rel_tol: f64) -> f64 {
    if e.is_empty() {
        return 0.0;
    }
    let mut sum = 0.0;
    for i in 0..e.len() {
        let scale = abs_tol + rel_tol * y[i].abs().max(z[i].abs());
        let q = e[i] / scale;
        sum += q * q;
    }
    (sum / e.len() as f64).sqrt()
}

fn axpy(y: &[f64], h: f64, slopes: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = y.to_vec();
    for (w, k) in slopes {
        if *w == 0.0 {
            continue;
        }
        for i in 0..out.len() {
            out[i] += h * w * k[i];
        }
    }
    out
}

/// Integrates `f` from `t0` to `t1`, returning `(times, states, derivatives)`
/// at every accepted step. Runs backwards when `t1 < t0`.
pub fn integrate_raw<F>(
    mut f: F,
    y0: &[f64],
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<(Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>), IntegrateError>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>, ModelError>,
{
    if !(cfg.h_init > 0.0) {
        return Err(IntegrateError::BadConfig("h_init must be positive".into()));
    }
    if cfg.abs_tol <= 0.0 || cfg.rel_tol < 0.0 {
        return Err(IntegrateError::BadConfig("tolerances must be positive".into()));
    }
    let span = t1 - t0;
    let dir = if span < 0.0 { -1.0 } else { 1.0 };
    let mut times = vec![t0];
    let mut states = vec![y0.to_vec()];
    let mut k1 = f(t0, y0)?;
    let mut derivs = vec![k1.clone()];
    if span == 0.0 {
        return Ok((times, states, derivs));
    }
    let h_cap = if cfg.h_max > 0.0 {
        cfg.h_max.min(span.abs())
    } else {
        span.abs()
    };
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut h = cfg.h_init.min(h_cap) * dir;

    let partial = |times: Vec<f64>, states: Vec<Vec<f64>>, derivs: Vec<Vec<f64>>| {
        let mut tr = Trajectory::new("", Params::new());
        for ((t, s), d) in times.into_iter().zip(states).zip(derivs) {
            tr.push(t, s, d);
        }
        Box::new(tr)
    };

    match cfg.method {
        Method::Rk4 => {
            let steps = (span / h).abs().ceil() as usize;
            if steps > cfg.max_steps {
                return Err(IntegrateError::MaxSteps {
                    t: t0,
                    max_steps: cfg.max_steps,
                    partial: partial(times, states, derivs),
                });
            }
            let h = span / steps as f64;
            for s in 0..steps {
                let k2 = f(t + 0.5 * h, &axpy(&y, h, &[(0.5, &k1)]))?;
                let k3 = f(t + 0.5 * h, &axpy(&y, h, &[(0.5, &k2)]))?;
                let k4 = f(t + h, &axpy(&y, h, &[(1.0, &k3)]))?;
                y = axpy(
                    &y,
                    h / 6.0,
                    &[(1.0, &k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)],
                );
                t = if s + 1 == steps { t1 } else { t0 + (s + 1) as f64 * h };
                k1 = f(t, &y)?;
                times.push(t);
                states.push(y.clone());
                derivs.push(k1.clone());
            }
            Ok((times, states, derivs))
        }
        Method::Adaptive54 => {
            let mut steps = 0usize;
            while (t1 - t) * dir > 0.0 {
                if steps >= cfg.max_steps {
                    return Err(IntegrateError::MaxSteps {
                        t,
                        max_steps: cfg.max_steps,
                        partial: partial(times, states, derivs),
                    });
                }
                steps += 1;
                if (t + h - t1) * dir > 0.0 {
                    h = t1 - t;
                }
                // One attempted step; k1 is fresh from the last acceptance.
                let mut k = Vec::with_capacity(7);
                k.push(k1.clone());
                let mut failed = false;
                for stage in 1..7 {
                    let weights: Vec<(f64, &[f64])> = (0..stage)
                        .map(|j| (A[stage][j], k[j].as_slice()))
                        .collect();
                    let ys = axpy(&y, h, &weights);
                    match f(t + C[stage] * h, &ys) {
                        Ok(ki) => k.push(ki),
                        Err(_) => {
                            failed = true;
                            break;
                        }
                    }
                }
                let (accept, err, y5) = if failed {
                    (false, f64::INFINITY, Vec::new())
                } else {
                    let w5: Vec<(f64, &[f64])> =
                        (0..7).map(|j| (B5[j], k[j].as_slice())).collect();
                    let y5 = axpy(&y, h, &w5);
                    let mut e = vec![0.0; y.len()];
                    for j in 0..7 {
                        let w = B5[j] - B4[j];
                        if w == 0.0 {
                            continue;
                        }
                        for i in 0..e.len() {
                            e[i] += h * w * k[j][i];
                        }
                    }
                    if y5.iter().any(|v| !v.is_finite()) {
                        (false, f64::INFINITY, Vec::new())
                    } else {
                        let err = error_norm(&e, &y, &y5, cfg.abs_tol, cfg.rel_tol);
                        (err <= 1.0, err, y5)
                    }
                };
                if accept {
                    t += h;
                    y = y5;
                    // The last stage is evaluated at (t+h, y5): reuse it.
                    k1 = k.pop().expect("seven stages");
                    times.push(t);
                    states.push(y.clone());
                    derivs.push(k1.clone());
                    let grow = if err == 0.0 {
                        5.0
                    } else {
                        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                    };
                    h = (h.abs() * grow).min(h_cap) * dir;
                } else {
                    let shrink = if err.is_finite() {
                        (0.9 * err.powf(-0.2)).clamp(0.1, 0.5)
                    } else {
                        0.1
                    };
                    h = h.abs() * shrink * dir;
                }
                if h.abs() < cfg.h_min {
                    return Err(IntegrateError::StepSizeUnderflow {
                        t,
                        h_min: cfg.h_min,
                        partial: partial(times, states, derivs),
                    });
                }
            }
            Ok((times, states, derivs))
        }
    }
}

/// Integrates a model from a full initial state over `[t0, t1]`.
pub fn integrate(
    spec: &ModelSpec,
    init: &ModelState,
    params: &Params,
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, IntegrateError> {
    spec.check_state(init)?;
    let template = spec.template_state();
    let y0 = init.flatten();
    let wrap_partial = |tr: Box<Trajectory>| -> Box<Trajectory> {
        let mut tr = tr;
        tr.model_id = spec.id.clone();
        tr.params = params.clone();
        tr
    };
    match integrate_raw(
        |t, y| spec.flat_derivative(t, y, params, &template),
        &y0,
        t0,
        t1,
        cfg,
    ) {
        Ok((times, states, derivs)) => {
            let mut tr = Trajectory::new(&spec.id, params.clone());
            for ((t, s), d) in times.into_iter().zip(states).zip(derivs) {
                tr.push(t, s, d);
            }
            Ok(tr)
        }
        Err(IntegrateError::StepSizeUnderflow { t, h_min, partial }) => {
            Err(IntegrateError::StepSizeUnderflow {
                t,
                h_min,
                partial: wrap_partial(partial),
            })
        }
        Err(IntegrateError::MaxSteps {
            t,
            max_steps,
            partial,
        }) => Err(IntegrateError::MaxSteps {
            t,
            max_steps,
            partial: wrap_partial(partial),
        }),
        Err(e) => Err(e),
    }
}

/// Final state of an integration over `[t0, t1]`.
pub fn propagate(
    spec: &ModelSpec,
    init: &ModelState,
    params: &Params,
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<ModelState, IntegrateError> {
    let tr = integrate(spec, init, params, t0, t1, cfg)?;
    Ok(tr.last_state(&spec.template_state())?)
}

/// Observed order of convergence of fixed-step RK4 on `spec` over the span,
/// from a Richardson triplet at steps `h`, `h/2`, `h/4`.
pub fn convergence_order(
    spec: &ModelSpec,
    init: &ModelState,
    params: &Params,
    t0: f64,
    t1: f64,
    h: f64,
) -> Result<f64, IntegrateError> {
    let run = |step: f64| -> Result<Vec<f64>, IntegrateError> {
        let tr = integrate(spec, init, params, t0, t1, &IntegratorConfig::rk4(step))?;
        Ok(tr.states.last().expect("nonempty trajectory").clone())
    };
    let y1 = run(h)?;
    let y2 = run(h / 2.0)?;
    let y4 = run(h / 4.0)?;
    let d12: f64 = y1
        .iter()
        .zip(&y2)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let d24: f64 = y2
        .iter()
        .zip(&y4)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    if d24 == 0.0 || d12 == 0.0 {
        return Err(IntegrateError::BadConfig(
            "differences vanished; use a larger base step".into(),
        ));
    }
    Ok((d12 / d24).log2())
}
