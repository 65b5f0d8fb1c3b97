//! Trajectories: sampled states with matching derivatives, supporting
//! cubic Hermite interpolation and uniform resampling.

use serde::{Deserialize, Serialize};

use super::spec::Params;
use super::state::ModelState;
use super::ModelError;

/// A computed trajectory in flat coordinates. `states[k]` and
/// `derivatives[k]` belong to `times[k]`; times are strictly monotone
/// (increasing or decreasing).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Trajectory {
    pub model_id: String,
    pub params: Params,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub derivatives: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn new(model_id: &str, params: Params) -> Self {
        Trajectory {
            model_id: model_id.to_string(),
            params,
            times: Vec::new(),
            states: Vec::new(),
            derivatives: Vec::new(),
        }
    }

    pub fn push(&mut self, t: f64, state: Vec<f64>, derivative: Vec<f64>) {
        self.times.push(t);
        self.states.push(state);
        self.derivatives.push(derivative);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// State at sample `k`, unflattened with the given template.
    pub fn state_at(&self, k: usize, template: &ModelState) -> Result<ModelState, ModelError> {
        let flat = self.states.get(k).ok_or_else(|| {
            ModelError::shape(format!("sample {k} out of range ({} samples)", self.len()))
        })?;
        template.unflatten_like(flat)
    }

    pub fn last_state(&self, template: &ModelState) -> Result<ModelState, ModelError> {
        if self.is_empty() {
            return Err(ModelError::shape("empty trajectory"));
        }
        self.state_at(self.len() - 1, template)
    }

    /// True when times advance with `t_end > t_start`.
    fn forward(&self) -> bool {
        self.times.len() < 2 || self.times[1] >= self.times[0]
    }

    /// Index of the sample interval containing `t`.
    fn bracket(&self, t: f64) -> Result<usize, ModelError> {
        if self.len() < 2 {
            return Err(ModelError::TooFewSamples {
                min: 2,
                got: self.len(),
            });
        }
        let fw = self.forward();
        let (lo, hi) = if fw {
            (self.times[0], self.times[self.len() - 1])
        } else {
            (self.times[self.len() - 1], self.times[0])
        };
        let eps = 1e-9 * (1.0 + lo.abs().max(hi.abs()));
        if t < lo - eps || t > hi + eps {
            return Err(ModelError::shape(format!(
                "time {t} outside the sampled range [{lo}, {hi}]"
            )));
        }
        // Binary search for the last sample not past t.
        let mut a = 0usize;
        let mut b = self.len() - 1;
        while b - a > 1 {
            let mid = (a + b) / 2;
            let before = if fw {
                self.times[mid] <= t
            } else {
                self.times[mid] >= t
            };
            if before {
                a = mid;
            } else {
                b = mid;
            }
        }
        Ok(a)
    }

    /// Cubic Hermite interpolation of the state at time `t`, using the
    /// stored derivatives. Third-order accurate between samples.
    pub fn sample(&self, t: f64) -> Result<Vec<f64>, ModelError> {
        let k = self.bracket(t)?;
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let h = t1 - t0;
        if h == 0.0 {
            return Ok(self.states[k].clone());
        }
        let s = (t - t0) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let y0 = &self.states[k];
        let y1 = &self.states[k + 1];
        let d0 = &self.derivatives[k];
        let d1 = &self.derivatives[k + 1];
        Ok((0..y0.len())
            .map(|i| h00 * y0[i] + h10 * h * d0[i] + h01 * y1[i] + h11 * h * d1[i])
            .collect())
    }

    /// Resamples onto a uniform grid with spacing `h` (sign following the
    /// trajectory direction), interpolating states; derivatives are left
    /// empty and must be refilled by the caller if needed.
    pub fn resample_uniform(&self, h: f64) -> Result<Trajectory, ModelError> {
        if self.len() < 2 {
            return Err(ModelError::TooFewSamples {
                min: 2,
                got: self.len(),
            });
        }
        let t0 = self.times[0];
        let t1 = self.times[self.len() - 1];
        let span = t1 - t0;
        let step = if span >= 0.0 { h.abs() } else { -h.abs() };
        let count = (span / step).round() as usize;
        if count < 1 {
            return Err(ModelError::shape(format!(
                "step {h} larger than the sampled span {span}"
            )));
        }
        let mut out = Trajectory::new(&self.model_id, self.params.clone());
        for k in 0..=count {
            // Hit the final time exactly to avoid extrapolation.
            let t = if k == count { t1 } else { t0 + step * k as f64 };
            let state = self.sample(t)?;
            out.push(t, state, Vec::new());
        }
        Ok(out)
    }
}
