//! Sufficient conditions under which every orbit of a flow is periodic,
//! together with the smallest period those conditions certify.

use super::Result;
use crate::algebra::Complex;
use crate::models::{ModelSpec, Params};

/// Relative tolerance for deciding that a coefficient sits exactly on a
/// periodicity locus. Scaled by 1 + |a| + |b|.
const REL: f64 = 1e-9;

/// Largest resonance index searched for rational frequency ratios.
const MAX_INDEX: i64 = 24;

/// A recognised coefficient pattern that forces all orbits to close.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    /// Quadratic-velocity flow with no drift term and a restoring
    /// combination b(c-1) > 0.
    DriftFreeRestoring,
    /// Drift and oscillation frequencies in rational ratio: a/(1-c) = i m w
    /// and [a² + b(1-c)]^{1/2} = i n w for integers m, n.
    ParameterResonance,
    /// Unit commutator weight c = 1 with imaginary drift a = i m w and real
    /// b = 2 n m w².
    IsochronousSpiral,
    /// Commutator-driven flow with a = (3/2) i w and b = 2 w².
    GaugedCommutator,
    /// Commutator-driven flow with b = 0 and a = i w / 2.
    RescaledCommutator,
    /// Single-body flow with no drift term and b(c-1) > 0.
    OneBodyRestoring,
}

impl Condition {
    pub fn name(&self) -> &'static str {
        match self {
            Condition::DriftFreeRestoring => "drift-free-restoring",
            Condition::ParameterResonance => "parameter-resonance",
            Condition::IsochronousSpiral => "isochronous-spiral",
            Condition::GaugedCommutator => "gauged-commutator",
            Condition::RescaledCommutator => "rescaled-commutator",
            Condition::OneBodyRestoring => "one-body-restoring",
        }
    }
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Outcome of a periodicity classification. `conditions` lists every
/// recognised pattern the coefficients satisfy; `period` is the smallest
/// certified period when any matched.
#[derive(Debug, Clone)]
pub struct PeriodicityVerdict {
    pub periodic: bool,
    pub period: Option<f64>,
    pub conditions: Vec<Condition>,
}

/// Classifies the coefficients of a model against the known isochrony
/// conditions for its closed-form family. Models without such a family
/// yield an empty (non-periodic) verdict rather than an error.
pub fn classify_periodicity(spec: &ModelSpec, params: &Params) -> Result<PeriodicityVerdict> {
    let mut conditions = Vec::new();
    let mut periods: Vec<f64> = Vec::new();
    match spec.closed_form.as_deref() {
        Some("master") => {
            let a = params.scalar("a")?;
            let b = params.scalar("b")?;
            let c = params.scalar("c")?;
            let scale = 1.0 + a.norm() + b.norm();
            if let Some(t) = restoring_period(a, b, c, scale) {
                conditions.push(Condition::DriftFreeRestoring);
                periods.push(t);
            }
            if let Some(t) = resonance_period(a, b, c, scale) {
                conditions.push(Condition::ParameterResonance);
                periods.push(t);
            }
            if let Some(t) = spiral_period(a, b, c, scale) {
                conditions.push(Condition::IsochronousSpiral);
                periods.push(t);
            }
        }
        Some("gyro") => {
            let a = params.scalar("a")?;
            let b = params.scalar("b")?;
            let scale = 1.0 + a.norm() + b.norm();
            if let Some(t) = gauged_period(a, b, scale) {
                conditions.push(Condition::GaugedCommutator);
                periods.push(t);
            }
            if let Some(t) = rescaled_period(a, b, scale) {
                conditions.push(Condition::RescaledCommutator);
                periods.push(t);
            }
        }
        Some("one-body") => {
            let a = params.scalar("a")?;
            let b = params.scalar("b")?;
            let c = params.scalar("c")?;
            let scale = 1.0 + a.norm() + b.norm();
            if let Some(t) = restoring_period(a, b, c, scale) {
                conditions.push(Condition::OneBodyRestoring);
                periods.push(t);
            }
        }
        _ => {}
    }
    let period = periods.into_iter().reduce(f64::min);
    Ok(PeriodicityVerdict {
        periodic: !conditions.is_empty(),
        period,
        conditions,
    })
}

/// a = 0 and b(c-1) real positive: period 2π [b(c-1)]^{-1/2}.
fn restoring_period(a: Complex, b: Complex, c: Complex, scale: f64) -> Option<f64> {
    if a.norm() > REL * scale {
        return None;
    }
    let w = b * (c - 1.0);
    if w.im.abs() > REL * (1.0 + w.norm()) || w.re <= REL * (1.0 + w.norm()) {
        return None;
    }
    Some(2.0 * std::f64::consts::PI / w.re.sqrt())
}

/// a γ = i m ω and Δ = i n ω with γ = 1/(1-c), Δ = [a² + b(1-c)]^{1/2} and
/// integers m, n ≥ 1 (m = 0 when a = 0): period 2π/ω. The search scans
/// n up to [`MAX_INDEX`] and keeps the smallest matching period.
fn resonance_period(a: Complex, b: Complex, c: Complex, scale: f64) -> Option<f64> {
    let one = Complex::new(1.0, 0.0);
    let omc = one - c;
    if omc.norm() < REL {
        return None;
    }
    let gamma = one / omc;
    let ag = a * gamma;
    let delta = (a * a + b * omc).sqrt();
    if ag.re.abs() > REL * scale || delta.re.abs() > REL * scale {
        return None;
    }
    let di = delta.im.abs();
    if di <= REL * scale {
        return None;
    }
    if ag.im.abs() <= REL * scale {
        return Some(2.0 * std::f64::consts::PI / di);
    }
    let ratio = ag.im.abs() / di;
    for n in 1..=MAX_INDEX {
        let mf = ratio * n as f64;
        let m = mf.round();
        if m >= 1.0 && (mf - m).abs() <= REL * (1.0 + mf) {
            let omega = di / n as f64;
            return Some(2.0 * std::f64::consts::PI / omega);
        }
    }
    None
}

/// c = 1, a = i m ω, b = 2 n m ω² real, integers m ≥ 1, n ≥ 0:
/// period 2π/|ω|.
fn spiral_period(a: Complex, b: Complex, c: Complex, scale: f64) -> Option<f64> {
    let one = Complex::new(1.0, 0.0);
    if (one - c).norm() > REL * scale {
        return None;
    }
    if a.re.abs() > REL * scale || a.im.abs() <= REL * scale || b.im.abs() > REL * scale {
        return None;
    }
    for m in 1..=MAX_INDEX {
        let nf = b.re * m as f64 / (2.0 * a.im * a.im);
        let n = nf.round();
        if n >= 0.0 && (nf - n).abs() <= REL * (1.0 + nf.abs()) {
            let omega = a.im.abs() / m as f64;
            return Some(2.0 * std::f64::consts::PI / omega);
        }
    }
    None
}

/// a = (3/2) i ω and b = 2 ω²: period 2π/|ω|.
fn gauged_period(a: Complex, b: Complex, scale: f64) -> Option<f64> {
    if a.re.abs() > REL * scale {
        return None;
    }
    let omega = 2.0 * a.im / 3.0;
    if omega.abs() <= REL * scale {
        return None;
    }
    let target = Complex::new(2.0 * omega * omega, 0.0);
    if (b - target).norm() > REL * scale {
        return None;
    }
    Some(2.0 * std::f64::consts::PI / omega.abs())
}

/// b = 0 and a = i ω / 2: period 2π/|ω|.
fn rescaled_period(a: Complex, b: Complex, scale: f64) -> Option<f64> {
    if b.norm() > REL * scale || a.re.abs() > REL * scale {
        return None;
    }
    let omega = 2.0 * a.im;
    if omega.abs() <= REL * scale {
        return None;
    }
    Some(2.0 * std::f64::consts::PI / omega.abs())
}
