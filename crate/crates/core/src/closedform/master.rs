//! The quadratic-velocity master flow, its linear base case, and the
//! commutator-driven flow solved through a moving conjugation.

use super::{ClosedFormError, Result};
use crate::algebra::{expm, inverse, matpow, CMatrix, Complex};
use crate::integrate::{integrate_raw, IntegratorConfig};

/// Threshold on |1-c| below which the quadratic-velocity flow switches to the
/// spiral branch; the generic exponent 1/(1-c) is useless closer than this.
pub const UNIT_C_SWITCH: f64 = 1e-8;

/// sinh(z t)/z, with the series limit taking over when |z t| is small enough
/// for the quotient to lose digits.
pub(super) fn sinc_hyp(z: Complex, t: f64) -> Complex {
    let zt = z * t;
    if zt.norm() < 1e-6 {
        let q = zt * zt;
        (Complex::new(1.0, 0.0) + q / 6.0 + q * q / 120.0) * t
    } else {
        zt.sinh() / z
    }
}

/// (e^z - 1)/z with a series guard near z = 0.
fn phi_ratio(z: Complex) -> Complex {
    if z.norm() < 1e-4 {
        Complex::new(1.0, 0.0) + z / 2.0 + z * z / 6.0 + z * z * z / 24.0 + z * z * z * z / 120.0
    } else {
        (z.exp() - 1.0) / z
    }
}

/// (e^z - 1 - z)/z² with a series guard near z = 0.
fn psi_ratio(z: Complex) -> Complex {
    if z.norm() < 1e-4 {
        Complex::new(0.5, 0.0) + z / 6.0 + z * z / 24.0 + z * z * z / 120.0 + z * z * z * z / 720.0
    } else {
        (z.exp() - 1.0 - z) / (z * z)
    }
}

/// Solves M'' = 2a M' + b M + c M' M⁻¹ M' for (M(t), M'(t)).
///
/// The generic branch raises a matrix built from M'(0)M(0)⁻¹ to the power
/// 1/(1-c); when |1-c| < [`UNIT_C_SWITCH`] the flow is an exponential spiral
/// handled separately, and both branches take the sinh(Δt)/Δ series limit for
/// small |Δt|. Algebra failures carry the branch name.
pub fn solve_master(
    a: Complex,
    b: Complex,
    cq: Complex,
    m0: &CMatrix,
    md0: &CMatrix,
    t: f64,
) -> Result<(CMatrix, CMatrix)> {
    let one = Complex::new(1.0, 0.0);
    if (one - cq).norm() < UNIT_C_SWITCH {
        return spiral_branch(a, b, m0, md0, t);
    }
    let branch = "generic";
    let wrap = |e| ClosedFormError::Branch { branch, source: e };
    let gamma = one / (one - cq);
    let delta = (a * a + b * (one - cq)).sqrt();
    let inv0 = inverse(m0).map_err(wrap)?;
    let v = md0 * &inv0;
    let core = v.scale(one - cq).add_scalar(-a);
    let ch = (delta * t).cosh();
    let sl = sinc_hyp(delta, t);
    let g = core.scale(sl).add_scalar(ch);
    let gdot = core.scale(ch).add_scalar(delta * delta * sl);
    let drift = (a * gamma * t).exp();
    let pow_g = matpow(&g, gamma).map_err(wrap)?;
    let m_t = (&pow_g * m0).scale(drift);
    let pow_gm1 = matpow(&g, gamma - one).map_err(wrap)?;
    let md_t = &m_t.scale(a * gamma) + &(&(&pow_gm1 * &gdot) * m0).scale(drift * gamma);
    Ok((m_t, md_t))
}

/// c = 1: M(t) = exp(b t² ψ(2at)) exp(t φ(2at) V) M(0) with V = M'(0)M(0)⁻¹,
/// M'(t) = [e^{2at} V + b t φ(2at)] M(t). Smooth in a, including a = 0.
fn spiral_branch(
    a: Complex,
    b: Complex,
    m0: &CMatrix,
    md0: &CMatrix,
    t: f64,
) -> Result<(CMatrix, CMatrix)> {
    let branch = "spiral";
    let wrap = |e| ClosedFormError::Branch { branch, source: e };
    let inv0 = inverse(m0).map_err(wrap)?;
    let v = md0 * &inv0;
    let z = 2.0 * a * t;
    let phi = phi_ratio(z);
    let s = (b * t * t * psi_ratio(z)).exp();
    let e = expm(&v.scale(phi * t)).map_err(wrap)?;
    let m_t = (&e * m0).scale(s);
    let w = v.scale(z.exp()).add_scalar(b * t * phi);
    let md_t = &w * &m_t;
    Ok((m_t, md_t))
}

/// Solves u'' = 2a u' + b u for (u(t), u'(t)). Never fails.
pub fn solve_linear(
    a: Complex,
    b: Complex,
    u0: &CMatrix,
    ud0: &CMatrix,
    t: f64,
) -> (CMatrix, CMatrix) {
    let delta = (a * a + b).sqrt();
    let ch = (delta * t).cosh();
    let sl = sinc_hyp(delta, t);
    let e = (a * t).exp();
    let q = ud0 - &u0.scale(a);
    let u = (&u0.scale(ch) + &q.scale(sl)).scale(e);
    let ud = (&ud0.scale(ch) + &(&q.scale(a) + &u0.scale(delta * delta)).scale(sl)).scale(e);
    (u, ud)
}

/// Solves U'' = 2a U' + b U + c [U', U] on a time grid.
///
/// The base flow u(t) obeys the same equation without the commutator and is
/// known in closed form; a gauge W with W' = c u(t) W carries it onto the
/// full flow as U = W⁻¹ u W, U' = W⁻¹ u' W. W(0) = 1 makes the gauge match
/// the initial data directly: u(0) = U(0) and u'(0) = U'(0), because the
/// gauge generator at t = 0 commutes with U(0). The gauge transport is the
/// one quadrature here; it runs far below the comparison tolerances.
pub fn solve_gyro(
    a: Complex,
    b: Complex,
    cq: Complex,
    u0: &CMatrix,
    ud0: &CMatrix,
    times: &[f64],
) -> Result<Vec<(CMatrix, CMatrix)>> {
    let n = u0.order();
    let q = ud0 - &u0.scale(a);
    let base = |t: f64| -> (CMatrix, CMatrix) {
        let delta = (a * a + b).sqrt();
        let ch = (delta * t).cosh();
        let sl = sinc_hyp(delta, t);
        let e = (a * t).exp();
        let u = (&u0.scale(ch) + &q.scale(sl)).scale(e);
        let ud = (&ud0.scale(ch) + &(&q.scale(a) + &u0.scale(delta * delta)).scale(sl)).scale(e);
        (u, ud)
    };
    let mut rhs = |t: f64, w_flat: &[f64]| -> std::result::Result<Vec<f64>, crate::models::ModelError> {
        let w = unflatten(w_flat, n);
        let (u, _) = base(t);
        Ok(flatten(&(&u.scale(cq) * &w)))
    };
    let cfg = IntegratorConfig::adaptive(1e-12);
    let mut out = Vec::with_capacity(times.len());
    let mut t_cur = 0.0;
    let mut w_flat = flatten(&CMatrix::identity(n));
    for &t in times {
        if t != t_cur {
            let (_, states, _) = integrate_raw(&mut rhs, &w_flat, t_cur, t, &cfg)?;
            w_flat = states.last().expect("integration yields at least one state").clone();
            t_cur = t;
        }
        let w = unflatten(&w_flat, n);
        let w_inv = inverse(&w).map_err(|e| ClosedFormError::Branch {
            branch: "gauge",
            source: e,
        })?;
        let (u, ud) = base(t);
        out.push((&(&w_inv * &u) * &w, &(&w_inv * &ud) * &w));
    }
    Ok(out)
}

fn flatten(m: &CMatrix) -> Vec<f64> {
    let n = m.order();
    let mut out = Vec::with_capacity(2 * n * n);
    for i in 0..n {
        for j in 0..n {
            out.push(m[(i, j)].re);
            out.push(m[(i, j)].im);
        }
    }
    out
}

fn unflatten(flat: &[f64], n: usize) -> CMatrix {
    CMatrix::from_fn(n, |i, j| {
        let k = 2 * (i * n + j);
        Complex::new(flat[k], flat[k + 1])
    })
}
