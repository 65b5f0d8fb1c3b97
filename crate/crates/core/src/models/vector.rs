//! The vector-model catalog: rotation-invariant evolution equations for
//! 3-vectors (and scalar/vector pairs) in ordinary space.
//!
//! States carry complex components so that the complexification transform
//! applies uniformly; with real parameters and real initial data every model
//! here stays real. Dot and cross products are bilinear throughout.

use crate::algebra::{c, Complex};
use crate::param::{vec_solve, ScalarVec, SolveBranch, Vec3};

use super::spec::{site, Boundary, Caps, ModelSpec, ParamDesc, ParamKind, Params, Rhs, Shape};
use super::state::{ModelState, StateBlock};
use super::ModelError;

fn z0() -> Complex {
    Complex::new(0.0, 0.0)
}

fn vecs(state: &ModelState) -> Result<Vec<Vec3>, ModelError> {
    state
        .blocks()
        .iter()
        .map(|b| b.as_vector().copied())
        .collect()
}

fn like_vectors(positions: &ModelState, out: Vec<Vec3>) -> ModelState {
    ModelState::new(
        positions
            .names()
            .iter()
            .cloned()
            .zip(out.into_iter().map(StateBlock::Vector))
            .collect(),
    )
}

fn site_grid(params: &Params, name: &str, count: usize) -> Result<Vec<Complex>, ModelError> {
    let g = params.grid(name)?;
    if g.len() != count {
        return Err(ModelError::param(
            name,
            format!("expected {count} entries, got {}", g.len()),
        ));
    }
    Ok(g.to_vec())
}

fn scalar_doc(name: &str, doc: &str) -> ParamDesc {
    ParamDesc::new(name, ParamKind::Scalar, doc)
}

fn grid_doc(name: &str, doc: &str) -> ParamDesc {
    ParamDesc::new(name, ParamKind::Grid, doc)
}

/// The radial force of one body: c [2 r'(r'·r) - r (r'·r')] / r·r.
/// Shared by several models below; errors when r·r is negligible.
fn radial_force(cq: Complex, r: &Vec3, v: &Vec3, block: &str) -> Result<Vec3, ModelError> {
    let r2 = r.norm_sq();
    if r2.norm() == 0.0 {
        return Err(ModelError::degenerate(block, "r·r vanishes"));
    }
    let num = v.scale(2.0 * v.dot(r)) - r.scale(v.dot(v));
    Ok(num.scale(cq / r2))
}

/// r'' = 2a r' + b r + c [2 r'(r'·r) - r (r'·r')] / r·r.
/// The one-body image of the master matrix oscillator.
pub fn radial_drag_oscillator() -> ModelSpec {
    let rhs = Rhs::second(|_t, pos, vel, params: &Params| {
        let a = params.scalar("a")?;
        let b = params.scalar("b")?;
        let cq = params.scalar("c")?;
        let r = pos.vector(0)?;
        let v = vel.vector(0)?;
        let acc = v.scale(2.0 * a) + r.scale(b) + radial_force(cq, r, v, "r")?;
        Ok(like_vectors(pos, vec![acc]))
    });
    ModelSpec::new(
        "radial-drag-oscillator",
        "One-body oscillator with a radial quadratic-velocity force",
        Shape::vectors("r", 1),
        rhs,
    )
    .with_tags(&["vector", "solvable", "one-body"])
    .with_caps(Caps::linear())
    .with_closed_form("one-body")
    .with_monitors(&["quadratic-radius"])
    .with_defaults(
        Params::new()
            .with_real("a", 0.1)
            .with_real("b", -0.6)
            .with_real("c", 0.3),
    )
    .with_schema(vec![
        scalar_doc("a", "velocity drift coefficient"),
        scalar_doc("b", "linear restoring coefficient"),
        scalar_doc("c", "radial force coefficient"),
    ])
}

/// r'' = 2a r' + b r + k (radial force) + h(r·r) r x r', with
/// h(s) = 2 sum_j fodd_j (-1)^j s^j.
pub fn kernel_gyro_oscillator() -> ModelSpec {
    let rhs = Rhs::second(|_t, pos, vel, params: &Params| {
        let a = params.scalar("a")?;
        let b = params.scalar("b")?;
        let k = params.scalar("k")?;
        let fodd = params.grid("fodd")?;
        let r = pos.vector(0)?;
        let v = vel.vector(0)?;
        let s = r.norm_sq();
        let mut h = z0();
        let mut pw = Complex::new(1.0, 0.0);
        for (j, cj) in fodd.iter().enumerate() {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            h += 2.0 * sign * *cj * pw;
            pw *= s;
        }
        let acc = v.scale(2.0 * a)
            + r.scale(b)
            + radial_force(k, r, v, "r")?
            + r.cross(v).scale(h);
        Ok(like_vectors(pos, vec![acc]))
    });
    ModelSpec::new(
        "kernel-gyro-oscillator",
        "One-body oscillator with a polynomial angular kernel",
        Shape::vectors("r", 1),
        rhs,
    )
    .with_tags(&["vector", "solvable", "one-body", "gyroscopic"])
    .with_caps(Caps::linear())
    .with_defaults(
        Params::new()
            .with_real("a", 0.0)
            .with_real("b", -0.4)
            .with_real("k", 0.2)
            .with_real_grid("fodd", &[0.5, 0.1]),
    )
    .with_schema(vec![
        scalar_doc("a", "velocity drift coefficient"),
        scalar_doc("b", "linear restoring coefficient"),
        scalar_doc("k", "radial force coefficient"),
        grid_doc("fodd", "odd-power kernel coefficients"),
    ])
}

/// r'' = 2a r' + b r + c r x r'. The one-body gyroscopic oscillator.
pub fn gyro_oscillator() -> ModelSpec {
    let rhs = Rhs::second(|_t, pos, vel, params: &Params| {
        let a = params.scalar("a")?;
        let b = params.scalar("b")?;
        let cq = params.scalar("c")?;
        let r = pos.vector(0)?;
        let v = vel.vector(0)?;
        let acc = v.scale(2.0 * a) + r.scale(b) + r.cross(v).scale(cq);
        Ok(like_vectors(pos, vec![acc]))
    });
    ModelSpec::new(
        "gyro-oscillator",
        "One-body oscillator with a uniform gyroscopic force",
        Shape::vectors("r", 1),
        rhs,
    )
    .with_tags(&["vector", "solvable", "one-body", "gyroscopic"])
    .with_caps(Caps::linear())
    .with_closed_form("gyro")
    .with_defaults(
        Params::new()
            .with_real("a", 0.05)
            .with_real("b", -0.5)
            .with_real("c", 0.8),
    )
    .with_schema(vec![
        scalar_doc("a", "velocity drift coefficient"),
        scalar_doc("b", "linear restoring coefficient"),
        scalar_doc("c", "wedge coupling"),
    ])
}

fn wedge_kernel_model(
    id: &'static str,
    title: &'static str,
    power: f64,
    default_k: f64,
) -> ModelSpec {
    let rhs = Rhs::second(move |_t, pos, vel, params: &Params| {
        let k = params.scalar("k")?;
        let r = pos.vector(0)?;
        let v = vel.vector(0)?;
        let phi = if power == 0.0 {
            k
        } else {
            let s = r.norm_sq();
            if s.norm() == 0.0 {
                return Err(ModelError::degenerate("r", "r·r vanishes"));
            }
            k * s.powf(power / 2.0)
        };
        let acc = r.cross(v).scale(phi);
        Ok(like_vectors(pos, vec![acc]))
    });
    ModelSpec::new(id, title, Shape::vectors("r", 1), rhs)
        .with_tags(&["vector", "solvable", "one-body", "gyroscopic"])
        .with_caps(Caps::linear())
        .with_closed_form("wedge-kernel")
        .with_monitors(&["speed"])
        .with_defaults(Params::new().with_real("k", default_k))
        .with_schema(vec![scalar_doc("k", "angular kernel strength")])
}

/// r'' = k r x r'. Constant angular kernel; the speed |r'| is conserved.
pub fn uniform_gyro() -> ModelSpec {
    wedge_kernel_model("uniform-gyro", "One body spun by a constant angular kernel", 0.0, 1.0)
}

/// r'' = (k / r·r) r x r'.
pub fn inverse_square_gyro() -> ModelSpec {
    wedge_kernel_model(
        "inverse-square-gyro",
        "One body spun by an inverse-square angular kernel",
        -2.0,
        1.0,
    )
}

/// r'' = (k / |r|³) r x r'.
pub fn monopole_gyro() -> ModelSpec {
    wedge_kernel_model(
        "monopole-gyro",
        "One body spun by an inverse-cube angular kernel",
        -3.0,
        1.0,
    )
}

/// r'' = k (r·r)^(p/2) r x r'. General power-law angular kernel.
pub fn power_gyro() -> ModelSpec {
    let rhs = Rhs::second(|_t, pos, vel, params: &Params| {
        let k = params.scalar("k")?;
        let p = params.real("p")?;
        let r = pos.vector(0)?;
        let v = vel.vector(0)?;
        let phi = if p == 0.0 {
            k
        } else {
            let s = r.norm_sq();
            if s.norm() == 0.0 {
                return Err(ModelError::degenerate("r", "r·r vanishes"));
            }
            k * s.powf(p / 2.0)
        };
        let acc = r.cross(v).scale(phi);
        Ok(like_vectors(pos, vec![acc]))
    });
    ModelSpec::new(
        "power-gyro",
        "One body spun by a power-law angular kernel",
        Shape::vectors("r", 1),
        rhs,
    )
    .with_tags(&["vector", "solvable", "one-body", "gyroscopic"])
    .with_caps(Caps::linear())
    .with_closed_form("wedge-kernel")
    .with_monitors(&["speed"])
    .with_defaults(Params::new().with_real("k", 1.0).with_real("p", -1.0))
    .with_schema(vec![
        scalar_doc("k", "angular kernel strength"),
        scalar_doc("p", "power of |r| in the kernel (real)"),
    ])
}

/// Two bodies driven by their separation:
/// r''_± = [(α/2) ± a] r'_+ + [(α/2) ∓ a] r'_-
///         ± { b r + c [2 r'(r'·r) - r (r'·r')] / r·r } / 2,
/// with r = r_+ - r_-. Translation-invariant.
pub fn associated_drag_pair() -> ModelSpec {
    let rhs = Rhs::second(|_t, pos, vel, params: &Params| {
        let alpha = params.scalar("alpha")?;
        let a = params.scalar("a")?;
        let b = params.scalar("b")?;
        let cq = params.scalar("c")?;
        let rp = *pos.vector(0)?;
        let rm = *pos.vector(1)?;
        let vp = *vel.vector(0)?;
        let vm = *vel.vector(1)?;
        let r = rp - rm;
        let v = vp - vm;
        let half = alpha * 0.5;
        let force = (r.scale(b) + radial_force(cq, &r, &v, "r+ - r-")?).scale(c(0.5, 0.0));
        let accp = vp.scale(half + a) + vm.scale(half - a) + force;
        let accm = vp.scale(half + a) + vm.scale(half - a) - force;
        Ok(like_vectors(pos, vec![accp, accm]))
    });
    ModelSpec::new(
        "associated-drag-pair",
        "Two-body extension of the radial oscillator driven by the separation",
        Shape::vectors("rplus", 1).join(Shape::vectors("rminus", 1)),
        rhs,
    )
    .with_tags(&["vector", "solvable", "two-body", "translation-invariant"])
    .with_caps(Caps::linear())
    .with_defaults(
        Params::new()
            .with_real("alpha", 0.2)
            .with_real("a", 0.1)
            .with_real("b", -0.5)
            .with_real("c", 0.3),
    )
    .with_schema(vec![
        scalar_doc("alpha", "common drift rate"),
        scalar_doc("a", "antisymmetric drift rate"),
        scalar_doc("b", "separation restoring coefficient"),
        scalar_doc("c", "separation radial coefficient"),
    ])
}

/// r''_± = { α (r'_+ + r'_-) ± c [(r_+ - r_-) x (r'_+ - r'_-)] } / 2.
pub fn gyro_pair() -> ModelSpec {
    let rhs = Rhs::second(|_t, pos, vel, params: &Params| {
        let alpha = params.scalar("alpha")?;
        let cq = params.scalar("c")?;
        let rp = *pos.vector(0)?;
        let rm = *pos.vector(1)?;
        let vp = *vel.vector(0)?;
        let vm = *vel.vector(1)?;
        let drift = (vp + vm).scale(alpha * 0.5);
        let wedge = (rp - rm).cross(&(vp - vm)).scale(cq * 0.5);
        Ok(like_vectors(pos, vec![drift + wedge, drift - wedge]))
    });
    ModelSpec::new(
        "gyro-pair",
        "Two bodies spun by their relative motion",
        Shape::vectors("rplus", 1).join(Shape::vectors("rminus", 1)),
        rhs,
    )
    .with_tags(&["vector", "solvable", "two-body", "translation-invariant"])
    .with_caps(Caps::linear())
    .with_defaults(Params::new().with_real("alpha", 0.1).with_real("c", 1.0))
    .with_schema(vec![
        scalar_doc("alpha", "common drift rate"),
        scalar_doc("c", "wedge coupling"),
    ])
}

/// r'' = a r - b (r·r) r. The Hamiltonian quartic oscillator; real states.
pub fn cubic_oscillator() -> ModelSpec {
    let rhs = Rhs::second(|_t, pos, vel, params: &Params| {
        let _ = vel;
        let a = params.scalar("a")?;
        let b = params.scalar("b")?;
        let r = pos.vector(0)?;
        let acc = r.scale(a - b * r.norm_sq());
        Ok(like_vectors(pos, vec![acc]))
    });
    ModelSpec::new(
        "cubic-oscillator",
        "Quartic-potential oscillator",
        Shape::vectors("r", 1),
        rhs,
    )
    .with_tags(&["vector", "integrable", "one-body", "hamiltonian"])
    .with_caps(Caps::linear())
    .with_real_state()
    .with_monitors(&["energy-cubic"])
    .with_defaults(Params::new().with_real("a", 1.0).with_real("b", 1.0))
    .with_schema(vec![
        scalar_doc("a", "linear force coefficient"),
        scalar_doc("b", "quartic stiffness"),
    ])
}

/// The vector Toda chain:
/// r''_n = [2 r'_n (r'_n·r_n) - r_n (r'_n·r'_n)] / r_n·r_n
///         + γ { r_{n+1} - [2 r_n (r_n·r_{n-1}) - r_{n-1} (r_n·r_n)] / r_{n-1}·r_{n-1} }.
pub fn vector_toda(sites: usize, boundary: Boundary) -> ModelSpec {
    let rhs = Rhs::second(move |_t, pos, vel, params: &Params| {
        let gamma = params.scalar("gamma")?;
        let r = vecs(pos)?;
        let v = vecs(vel)?;
        let n_sites = r.len();
        let mut out = Vec::with_capacity(n_sites);
        for n in 0..n_sites {
            let mut acc = radial_force(Complex::new(1.0, 0.0), &r[n], &v[n], "r")?;
            if let Some(np) = site(boundary, n as isize + 1, n_sites) {
                acc = acc + r[np].scale(gamma);
            }
            if let Some(nm) = site(boundary, n as isize - 1, n_sites) {
                let s = r[nm].norm_sq();
                if s.norm() == 0.0 {
                    return Err(ModelError::degenerate("r", "r·r vanishes"));
                }
                let sandwich = r[n].scale(2.0 * r[n].dot(&r[nm])) - r[nm].scale(r[n].norm_sq());
                acc = acc - sandwich.scale(gamma / s);
            }
            out.push(acc);
        }
        Ok(like_vectors(pos, out))
    });
    ModelSpec::new(
        "vector-toda",
        "Vector image of the nonabelian Toda chain",
        Shape::vectors("r", sites),
        rhs,
    )
    .with_tags(&["vector", "integrable", "chain", "nearest-neighbour"])
    .with_caps(Caps::linear())
    .with_boundary(boundary)
    .with_defaults(Params::new().with_real("gamma", 1.0))
    .with_schema(vec![scalar_doc("gamma", "nearest-neighbour coupling")])
}

/// Pair-valued chain driven by second differences:
/// ρ''_n = c [ ρ'_n (ρ_{n+1} - 2ρ_n + ρ_{n-1}) - r'_n·(r_{n+1} - 2r_n + r_{n-1}) ],
/// r''_n = c [ r'_n (ρ_{n+1} - 2ρ_n + ρ_{n-1}) + ρ'_n (r_{n+1} - 2r_n + r_{n-1})
///             - r'_n x (r_{n+1} - r_{n-1}) ].
pub fn paired_difference_chain(sites: usize, boundary: Boundary) -> ModelSpec {
    let rhs = Rhs::second(move |_t, pos, vel, params: &Params| {
        let cq = params.scalar("c")?;
        let n_sites = pos.len();
        let at = |state: &ModelState, k: Option<usize>| -> Result<ScalarVec, ModelError> {
            match k {
                Some(idx) => Ok(*state.pair(idx)?),
                None => Ok(ScalarVec::new(z0(), Vec3::zero())),
            }
        };
        let mut blocks = Vec::with_capacity(n_sites);
        for n in 0..n_sites {
            let qn = *pos.pair(n)?;
            let dqn = *vel.pair(n)?;
            let qp = at(pos, site(boundary, n as isize + 1, n_sites))?;
            let qm = at(pos, site(boundary, n as isize - 1, n_sites))?;
            let rho_diff = qp.rho - 2.0 * qn.rho + qm.rho;
            let r_diff = qp.r - qn.r.scale(Complex::new(2.0, 0.0)) + qm.r;
            let r_gap = qp.r - qm.r;
            let acc_rho = (dqn.rho * rho_diff - dqn.r.dot(&r_diff)) * cq;
            let acc_r = (dqn.r.scale(rho_diff) + r_diff.scale(dqn.rho) - dqn.r.cross(&r_gap))
                .scale(cq);
            blocks.push((
                pos.names()[n].clone(),
                StateBlock::Pair(ScalarVec::new(acc_rho, acc_r)),
            ));
        }
        Ok(ModelState::new(blocks))
    });
    ModelSpec::new(
        "paired-difference-chain",
        "Scalar-vector pairs coupled through neighbour differences",
        Shape::pairs("q", sites),
        rhs,
    )
    .with_tags(&["vector", "integrable", "chain", "nearest-neighbour", "pair-valued"])
    .with_caps(Caps::linear())
    .with_boundary(boundary)
    .with_defaults(Params::new().with_real("c", 1.0))
    .with_schema(vec![scalar_doc("c", "coupling strength")])
}

/// q' = a q + b p + 4λ q x (q x p),  p' = c q - a p + 4λ p x (q x p).
/// Canonical flow of a quadratic Hamiltonian with a wedge-squared term.
pub fn wedge_flow() -> ModelSpec {
    let rhs = Rhs::first(|_t, state, params: &Params| {
        let a = params.scalar("a")?;
        let b = params.scalar("b")?;
        let cq = params.scalar("c")?;
        let lambda = params.scalar("lambda")?;
        let q = *state.vector(0)?;
        let p = *state.vector(1)?;
        let w = q.cross(&p);
        let dq = q.scale(a) + p.scale(b) + q.cross(&w).scale(4.0 * lambda);
        let dp = q.scale(cq) - p.scale(a) + p.cross(&w).scale(4.0 * lambda);
        Ok(like_vectors(state, vec![dq, dp]))
    });
    ModelSpec::new(
        "wedge-flow",
        "One-body canonical flow with a wedge-squared interaction",
        Shape::vectors("q", 1).join(Shape::vectors("p", 1)),
        rhs,
    )
    .with_tags(&["vector", "solvable", "hamiltonian", "first-order"])
    .with_caps(Caps::linear())
    .with_monitors(&["total-wedge", "energy-qp"])
    .with_defaults(
        Params::new()
            .with_real("a", 0.1)
            .with_real("b", 0.5)
            .with_real("c", -0.5)
            .with_real("lambda", 0.25),
    )
    .with_schema(vec![
        scalar_doc("a", "cross rate"),
        scalar_doc("b", "momentum rate (symmetric role)"),
        scalar_doc("c", "position rate (symmetric role)"),
        scalar_doc("lambda", "wedge-squared strength"),
    ])
}

/// Cyclic convolution ring of wedge flows:
/// q'_n = Σ_{n₁} (a_{n-n₁} q_{n₁} + b_{n-n₁} p_{n₁})
///        + 4 Σ λ_{n-n₁-n₂-n₃} (p_{n₁} x q_{n₂}) x q_{n₃},
/// p'_n = Σ_{n₁} (c_{n-n₁} q_{n₁} - a_{n-n₁} p_{n₁})
///        + 4 Σ λ_{n-n₁-n₂-n₃} (p_{n₁} x q_{n₂}) x p_{n₃}, indices mod N.
pub fn wedge_ring(sites: usize) -> ModelSpec {
    let rhs = Rhs::first(move |_t, state, params: &Params| {
        let total = state.len();
        if total % 2 != 0 {
            return Err(ModelError::shape("wedge ring needs q blocks then p blocks"));
        }
        let n_sites = total / 2;
        let a = site_grid(params, "a", n_sites)?;
        let b = site_grid(params, "b", n_sites)?;
        let cg = site_grid(params, "c", n_sites)?;
        let lambda = site_grid(params, "lambda", n_sites)?;
        let all = vecs(state)?;
        let (q, p) = all.split_at(n_sites);
        let idx = |d: isize| d.rem_euclid(n_sites as isize) as usize;
        let mut dq = vec![Vec3::zero(); n_sites];
        let mut dp = vec![Vec3::zero(); n_sites];
        for n in 0..n_sites {
            for n1 in 0..n_sites {
                let off = idx(n as isize - n1 as isize);
                dq[n] = dq[n] + q[n1].scale(a[off]) + p[n1].scale(b[off]);
                dp[n] = dp[n] + q[n1].scale(cg[off]) - p[n1].scale(a[off]);
            }
            for n1 in 0..n_sites {
                for n2 in 0..n_sites {
                    let w = p[n1].cross(&q[n2]);
                    for n3 in 0..n_sites {
                        let off =
                            idx(n as isize - n1 as isize - n2 as isize - n3 as isize);
                        dq[n] = dq[n] + w.cross(&q[n3]).scale(4.0 * lambda[off]);
                        dp[n] = dp[n] + w.cross(&p[n3]).scale(4.0 * lambda[off]);
                    }
                }
            }
        }
        dq.extend(dp);
        Ok(like_vectors(state, dq))
    });
    let decay = |s: f64| {
        (0..sites)
            .map(|k| s / (1.0 + k as f64))
            .collect::<Vec<_>>()
    };
    ModelSpec::new(
        "wedge-ring",
        "Cyclic ring of canonically coupled wedge flows",
        Shape::vectors("q", sites).join(Shape::vectors("p", sites)),
        rhs,
    )
    .with_tags(&["vector", "solvable", "hamiltonian", "ring", "convolution", "first-order"])
    .with_caps(Caps::linear())
    .with_boundary(Boundary::Periodic)
    .with_monitors(&["energy-qp"])
    .with_defaults(
        Params::new()
            .with_real_grid("a", &decay(0.1))
            .with_real_grid("b", &decay(0.4))
            .with_real_grid("c", &decay(-0.4))
            .with_real_grid("lambda", &decay(0.2)),
    )
    .with_schema(vec![
        grid_doc("a", "cross-rate convolution kernel"),
        grid_doc("b", "momentum-rate convolution kernel"),
        grid_doc("c", "position-rate convolution kernel"),
        grid_doc("lambda", "wedge-squared convolution kernel"),
    ])
}

/// r''_n = a_n α_n r'_n + Σ_m b_nm r'_m - γ_n (r'_n x v_n) - γ_n α_n (r_n x r'_n),
/// where v_n solves a_n v_n + γ_n v_n x r_n = r'_n - Σ_m b_nm r_m.
pub fn tethered_gyro(sites: usize) -> ModelSpec {
    let rhs = Rhs::second(move |_t, pos, vel, params: &Params| {
        let n_sites = pos.len();
        let a = site_grid(params, "a", n_sites)?;
        let alpha = site_grid(params, "alpha", n_sites)?;
        let gamma = site_grid(params, "gamma", n_sites)?;
        let b = params.matrix("b")?;
        if b.order() != n_sites {
            return Err(ModelError::param("b", "table size must match the site count"));
        }
        let r = vecs(pos)?;
        let v = vecs(vel)?;
        let mut out = Vec::with_capacity(n_sites);
        for n in 0..n_sites {
            let mut w = v[n];
            for m in 0..n_sites {
                w = w - r[m].scale(b[(n, m)]);
            }
            let aux = vec_solve(
                SolveBranch::CdZero,
                a[n],
                &r[n].scale(gamma[n]),
                &Vec3::zero(),
                &Vec3::zero(),
                &w,
            )
            .map_err(ModelError::Encoding)?;
            let mut acc = v[n].scale(a[n] * alpha[n]);
            for m in 0..n_sites {
                acc = acc + v[m].scale(b[(n, m)]);
            }
            acc = acc - v[n].cross(&aux).scale(gamma[n]);
            acc = acc - r[n].cross(&v[n]).scale(gamma[n] * alpha[n]);
            out.push(acc);
        }
        Ok(like_vectors(pos, out))
    });
    let defaults = Params::new()
        .with_real_grid("a", &vec![1.0; sites])
        .with_real_grid("alpha", &vec![0.5; sites])
        .with_real_grid("gamma", &vec![0.8; sites])
        .with(
            "b",
            super::spec::ParamValue::Matrix(crate::algebra::CMatrix::from_fn(sites, |i, j| {
                Complex::new(0.15 / (1.0 + (i + j) as f64), 0.0)
            })),
        );
    ModelSpec::new(
        "tethered-gyro",
        "Bodies spun against tethered auxiliary axes",
        Shape::vectors("r", sites),
        rhs,
    )
    .with_tags(&["vector", "solvable", "auxiliary-solve"])
    .with_caps(Caps::linear())
    .with_defaults(defaults)
    .with_schema(vec![
        grid_doc("a", "per-body tether stiffness"),
        grid_doc("alpha", "per-body velocity ratio"),
        grid_doc("gamma", "per-body wedge strength"),
        ParamDesc::new("b", ParamKind::Matrix, "position coupling table"),
    ])
}

/// One body driven by nested wedges with an auxiliary axis:
/// r'' = α r' + βγ r + βδ w + 2(aβ - bδ) r x w + 2b w x r'
///       + 4(cδ - ab) r x (r x w) + 4c { r x (r' x w) + r' x (r x w)
///       - β (r x w) x w } + 8ac r x (r x (r x w)) + 8bc r x ((r x w) x w)
///       - 16c² r x (r x ((r x w) x w)),
/// where w solves (β - 4c r·r) w + 2b (w x r) + 4c (w·r) r = r' - α r.
pub fn bracket_body() -> ModelSpec {
    let rhs = Rhs::second(|_t, pos, vel, params: &Params| {
        let alpha = params.scalar("alpha")?;
        let beta = params.scalar("beta")?;
        let gamma = params.scalar("gamma")?;
        let delta = params.scalar("delta")?;
        let a = params.scalar("a")?;
        let b = params.scalar("b")?;
        let cq = params.scalar("c")?;
        let r = *pos.vector(0)?;
        let v = *vel.vector(0)?;
        let w = vec_solve(
            SolveBranch::General,
            beta - 4.0 * cq * r.norm_sq(),
            &r.scale(2.0 * b),
            &r.scale(4.0 * cq),
            &r,
            &(v - r.scale(alpha)),
        )
        .map_err(ModelError::Encoding)?;
        let rw = r.cross(&w);
        let mut acc = v.scale(alpha) + r.scale(beta * gamma) + w.scale(beta * delta);
        acc = acc + rw.scale(2.0 * (a * beta - b * delta));
        acc = acc + w.cross(&v).scale(2.0 * b);
        acc = acc + r.cross(&rw).scale(4.0 * (cq * delta - a * b));
        acc = acc
            + (r.cross(&v.cross(&w)) + v.cross(&rw) - rw.cross(&w).scale(beta)).scale(4.0 * cq);
        acc = acc + r.cross(&r.cross(&rw)).scale(8.0 * a * cq);
        acc = acc + r.cross(&rw.cross(&w)).scale(8.0 * b * cq);
        acc = acc - r.cross(&r.cross(&rw.cross(&w))).scale(16.0 * cq * cq);
        Ok(like_vectors(pos, vec![acc]))
    });
    ModelSpec::new(
        "bracket-body",
        "One body with nested wedge forces and an algebraic auxiliary axis",
        Shape::vectors("r", 1),
        rhs,
    )
    .with_tags(&["vector", "linearizable", "one-body", "auxiliary-solve"])
    .with_caps(Caps::linear())
    .with_defaults(
        Params::new()
            .with_real("alpha", 0.1)
            .with_real("beta", 0.7)
            .with_real("gamma", 0.2)
            .with_real("delta", -0.1)
            .with_real("a", 0.3)
            .with_real("b", 0.25)
            .with_real("c", 0.2),
    )
    .with_schema(vec![
        scalar_doc("alpha", "velocity rate"),
        scalar_doc("beta", "auxiliary rate (must keep the solve regular)"),
        scalar_doc("gamma", "restoring rate"),
        scalar_doc("delta", "auxiliary self-rate"),
        scalar_doc("a", "single-wedge weight (auxiliary side)"),
        scalar_doc("b", "single-wedge weight (body side)"),
        scalar_doc("c", "double-wedge weight"),
    ])
}
