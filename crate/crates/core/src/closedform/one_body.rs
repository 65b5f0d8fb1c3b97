//! Single-body flow with drift, restoring force, and a velocity-quadratic
//! radial coupling, solved by two scalar powers built from the initial data.

use super::master::{sinc_hyp, solve_master, UNIT_C_SWITCH};
use super::{decode_vector, ClosedFormError, Result};
use crate::algebra::Complex;
use crate::param::{self, Block, ParamId, Vec3};

/// Solves r'' = 2a r' + b r + c [2 r'(r'·r) - r(r'·r')] / (r·r) for
/// (r(t), r'(t)).
///
/// The orbit stays in the plane of r(0) and r'(0); its shape is carried by
/// two scalar combinations of principal-branch powers, so the solution is
/// closed-form for any complex coefficients. Initial data with r·r = 0 or
/// r'∧r bilinearly null sit outside the formula's domain. Near c = 1 the
/// exponent 1/(1-c) degenerates and the flow is handled as the equivalent
/// 2x2 matrix flow, whose spiral branch is smooth there.
pub fn solve_one_body(
    a: Complex,
    b: Complex,
    cq: Complex,
    r0: &Vec3,
    v0: &Vec3,
    t: f64,
) -> Result<(Vec3, Vec3)> {
    let one = Complex::new(1.0, 0.0);
    let i = Complex::new(0.0, 1.0);
    let rr = r0.dot(r0);
    if rr.norm() <= 1e-12 * (1.0 + r0.abs() * r0.abs()) {
        return Err(ClosedFormError::DegenerateConfiguration(
            "r(0)·r(0) vanishes".into(),
        ));
    }
    if (one - cq).norm() < UNIT_C_SWITCH {
        return via_matrix(a, b, cq, r0, v0, t);
    }
    let wedge = v0.cross(r0);
    let wsq = wedge.dot(&wedge);
    let wscale = r0.abs() * v0.abs();
    if wsq.norm() <= 1e-12 * (1.0 + wscale * wscale) {
        return Err(ClosedFormError::DegenerateConfiguration(
            "r'(0)∧r(0) is bilinearly null".into(),
        ));
    }
    let wn = wsq.sqrt();
    let vr = v0.dot(r0);
    let omc = one - cq;
    let big_a = -a + omc * vr / rr;
    let big_b = vr / wn;
    let big_c = wn / rr;
    let gamma = one / omc;
    let delta = (a * a + b * omc).sqrt();
    let ch = (delta * t).cosh();
    let sl = sinc_hyp(delta, t);
    let mu_p = big_a + i * omc * big_c;
    let mu_m = big_a - i * omc * big_c;
    let lam_p = ch + mu_p * sl;
    let lam_m = ch + mu_m * sl;
    let lamd_p = delta * delta * sl + mu_p * ch;
    let lamd_m = delta * delta * sl + mu_m * ch;
    let drift = (a * gamma * t).exp();
    let pow_p = lam_p.powc(gamma);
    let pow_m = lam_m.powc(gamma);
    let phi_plus = drift * (pow_p + pow_m) * 0.5;
    let phi_minus = drift * (pow_p - pow_m) * 0.5;
    let dp = lam_p.powc(gamma - one) * lamd_p;
    let dm = lam_m.powc(gamma - one) * lamd_m;
    let phid_plus = a * gamma * phi_plus + drift * gamma * 0.5 * (dp + dm);
    let phid_minus = a * gamma * phi_minus + drift * gamma * 0.5 * (dp - dm);
    let r = r0.scale(phi_plus + i * big_b * phi_minus) - v0.scale(i * phi_minus / big_c);
    let v = r0.scale(phid_plus + i * big_b * phid_minus) - v0.scale(i * phid_minus / big_c);
    Ok((r, v))
}

/// c ≈ 1: the flow is the traceless 2x2 image of the quadratic-velocity
/// matrix flow with the same coefficients, so solve that and decode.
fn via_matrix(
    a: Complex,
    b: Complex,
    cq: Complex,
    r0: &Vec3,
    v0: &Vec3,
    t: f64,
) -> Result<(Vec3, Vec3)> {
    let m0 = param::encode(&ParamId::Traceless2, &[Block::Vector(*r0)])?;
    let md0 = param::encode(&ParamId::Traceless2, &[Block::Vector(*v0)])?;
    let (m, md) = solve_master(a, b, cq, &m0, &md0, t)?;
    Ok((decode_vector(&m)?, decode_vector(&md)?))
}
