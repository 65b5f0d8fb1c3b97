//! The matrix-model catalog: solvable, integrable, and linearizable matrix
//! evolution equations with dense complex square blocks.
//!
//! Chain models take a site count; all matrix models take the block order.
//! Out-of-range neighbours under free ends contribute nothing: additive
//! references read as zero and any product or inverse touching a missing
//! site is dropped.

use crate::algebra::{c, commutator, inverse, matpow, CMatrix, Complex, LinearTerm};

use super::spec::{site, Boundary, Caps, ModelSpec, ParamDesc, ParamKind, Params, Rhs, Shape};
use super::state::ModelState;
use super::ModelError;

fn one(n: usize) -> CMatrix {
    CMatrix::identity(n)
}

/// All blocks of a state as matrices.
fn mats(state: &ModelState) -> Result<Vec<&CMatrix>, ModelError> {
    state.blocks().iter().map(|b| b.as_matrix()).collect()
}

/// Acceleration (or flow) state mirroring the position block names.
fn like(positions: &ModelState, blocks: Vec<CMatrix>) -> ModelState {
    ModelState::new(
        positions
            .names()
            .iter()
            .cloned()
            .zip(blocks.into_iter().map(super::state::StateBlock::Matrix))
            .collect(),
    )
}

/// Site-indexed complex grid of exactly `count` entries.
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

/// Coupling table of exactly `count` rows.
fn coupling(params: &Params, name: &str, count: usize) -> Result<CMatrix, ModelError> {
    let m = params.matrix(name)?;
    if m.order() != count {
        return Err(ModelError::param(
            name,
            format!("expected a {count}x{count} table, got {}x{}", m.order(), m.order()),
        ));
    }
    Ok(m.clone())
}

fn scalar_doc(name: &str, doc: &str) -> ParamDesc {
    ParamDesc::new(name, ParamKind::Scalar, doc)
}

fn grid_doc(name: &str, doc: &str) -> ParamDesc {
    ParamDesc::new(name, ParamKind::Grid, doc)
}

fn table_doc(name: &str, doc: &str) -> ParamDesc {
    ParamDesc::new(name, ParamKind::Matrix, doc)
}

/// M'' = 2a M' + b M + c M' M^-1 M'. The master second-order solvable
/// equation; every branch of its closed form is exercised by the
/// verification suites.
pub fn matrix_master(order: usize) -> ModelSpec {
    let rhs = Rhs::second(|_t, pos, vel, params: &Params| {
        let a = params.scalar("a")?;
        let b = params.scalar("b")?;
        let cq = params.scalar("c")?;
        let m = pos.matrix(0)?;
        let v = vel.matrix(0)?;
        let inv = inverse(m).map_err(ModelError::in_block("M"))?;
        let acc = &(&v.scale(2.0 * a) + &m.scale(b)) + &(&(v * &inv) * v).scale(cq);
        Ok(like(pos, vec![acc]))
    });
    ModelSpec::new(
        "matrix-master",
        "Master quadratic-velocity matrix oscillator",
        Shape::matrices("M", 1, order),
        rhs,
    )
    .with_tags(&["matrix", "solvable", "one-block"])
    .with_caps(Caps::sandwich())
    .with_closed_form("master")
    .with_defaults(
        Params::new()
            .with_real("a", 0.15)
            .with_real("b", 0.4)
            .with_real("c", 0.3),
    )
    .with_schema(vec![
        scalar_doc("a", "velocity drift coefficient"),
        scalar_doc("b", "linear restoring coefficient"),
        scalar_doc("c", "quadratic-velocity coefficient"),
    ])
}

/// U'' = 2a U' + b U + c [U', U]. Linear flow plus a velocity-position
/// commutator; solvable by conjugation.
pub fn matrix_gyro(order: usize) -> ModelSpec {
    let rhs = Rhs::second(|_t, pos, vel, params: &Params| {
        let a = params.scalar("a")?;
        let b = params.scalar("b")?;
        let cq = params.scalar("c")?;
        let u = pos.matrix(0)?;
        let v = vel.matrix(0)?;
        let acc = &(&v.scale(2.0 * a) + &u.scale(b)) + &commutator(v, u)?.scale(cq);
        Ok(like(pos, vec![acc]))
    });
    ModelSpec::new(
        "matrix-gyro",
        "Linear matrix oscillator with a gyroscopic commutator",
        Shape::matrices("U", 1, order),
        rhs,
    )
    .with_tags(&["matrix", "solvable", "commutator", "one-block"])
    .with_caps(Caps::commutators())
    .with_closed_form("gyro")
    .with_defaults(
        Params::new()
            .with_real("a", 0.1)
            .with_real("b", 0.5)
            .with_real("c", 0.8),
    )
    .with_schema(vec![
        scalar_doc("a", "velocity drift coefficient"),
        scalar_doc("b", "linear restoring coefficient"),
        scalar_doc("c", "commutator coupling"),
    ])
}

/// The all-to-all commutator network
/// U''_n = sum_m { 2 a_nm U'_m + b_nm U_m + 2 c_m [U'_n, U_m]
///                 + c_m [U_n, U'_m] }
///       - sum_{m1,m2} { 2 a_{n m1} c_{m2} [U_{m1}, U_{m2}]
///                       + c_{m1} c_{m2} [[U_n, U_{m1}], U_{m2}] }.
pub fn matrix_gyro_net(sites: usize, order: usize) -> ModelSpec {
    let rhs = Rhs::second(move |_t, pos, vel, params: &Params| {
        let n_sites = pos.len();
        let a = coupling(params, "a", n_sites)?;
        let b = coupling(params, "b", n_sites)?;
        let cg = site_grid(params, "c", n_sites)?;
        let u = mats(pos)?;
        let v = mats(vel)?;
        let dim = u[0].order();
        let mut out = Vec::with_capacity(n_sites);
        for n in 0..n_sites {
            let mut acc = CMatrix::zeros(dim);
            for m in 0..n_sites {
                acc = &acc + &v[m].scale(2.0 * a[(n, m)]);
                acc = &acc + &u[m].scale(b[(n, m)]);
                acc = &acc + &commutator(v[n], u[m])?.scale(2.0 * cg[m]);
                acc = &acc + &commutator(u[n], v[m])?.scale(cg[m]);
            }
            for m1 in 0..n_sites {
                for m2 in 0..n_sites {
                    acc = &acc - &commutator(u[m1], u[m2])?.scale(2.0 * a[(n, m1)] * cg[m2]);
                    let inner = commutator(u[n], u[m1])?;
                    acc = &acc - &commutator(&inner, u[m2])?.scale(cg[m1] * cg[m2]);
                }
            }
            out.push(acc);
        }
        Ok(like(pos, out))
    });
    let mut defaults = Params::new().with_real_grid("c", &vec![0.4; sites]);
    let scale = 0.1;
    defaults.set(
        "a",
        super::spec::ParamValue::Matrix(CMatrix::from_fn(sites, |i, j| {
            c(scale / (1.0 + (i + 2 * j) as f64), 0.0)
        })),
    );
    defaults.set(
        "b",
        super::spec::ParamValue::Matrix(CMatrix::from_fn(sites, |i, j| {
            c(scale / (1.0 + (2 * i + j) as f64), 0.0)
        })),
    );
    ModelSpec::new(
        "matrix-gyro-net",
        "All-to-all commutator network of matrix oscillators",
        Shape::matrices("U", sites, order),
        rhs,
    )
    .with_tags(&["matrix", "linearizable", "commutator", "chain"])
    .with_caps(Caps::commutators())
    .with_defaults(defaults)
    .with_schema(vec![
        table_doc("a", "velocity coupling table"),
        table_doc("b", "position coupling table"),
        grid_doc("c", "per-site commutator strengths"),
    ])
}

/// The nonabelian Toda chain
/// G''_n = G'_n G_n^-1 G'_n + gamma { G_{n+1} - G_n G_{n-1}^-1 G_n }.
pub fn nonabelian_toda(sites: usize, order: usize, boundary: Boundary) -> ModelSpec {
    let rhs = Rhs::second(move |_t, pos, vel, params: &Params| {
        let gamma = params.scalar("gamma")?;
        let g = mats(pos)?;
        let gd = mats(vel)?;
        let n_sites = g.len();
        let mut out = Vec::with_capacity(n_sites);
        for n in 0..n_sites {
            let inv = inverse(g[n])
                .map_err(ModelError::in_block(format!("G{}", n + 1)))?;
            let mut acc = &(gd[n] * &inv) * gd[n];
            if let Some(np) = site(boundary, n as isize + 1, n_sites) {
                acc = &acc + &g[np].scale(gamma);
            }
            if let Some(nm) = site(boundary, n as isize - 1, n_sites) {
                let invm = inverse(g[nm])
                    .map_err(ModelError::in_block(format!("G{}", nm + 1)))?;
                acc = &acc - &(&(g[n] * &invm) * g[n]).scale(gamma);
            }
            out.push(acc);
        }
        Ok(like(pos, out))
    });
    ModelSpec::new(
        "nonabelian-toda",
        "Nonabelian Toda chain",
        Shape::matrices("G", sites, order),
        rhs,
    )
    .with_tags(&["matrix", "integrable", "chain", "nearest-neighbour"])
    .with_caps(Caps::sandwich())
    .with_boundary(boundary)
    .with_defaults(Params::new().with_real("gamma", 1.0))
    .with_schema(vec![scalar_doc("gamma", "nearest-neighbour coupling")])
}

/// Q''_n = c { Q'_n (Q_{n+1} - Q_n) - (Q_n - Q_{n-1}) Q'_n }.
pub fn product_difference_chain(sites: usize, order: usize, boundary: Boundary) -> ModelSpec {
    let rhs = Rhs::second(move |_t, pos, vel, params: &Params| {
        let cq = params.scalar("c")?;
        let q = mats(pos)?;
        let qd = mats(vel)?;
        let n_sites = q.len();
        let dim = q[0].order();
        let mut out = Vec::with_capacity(n_sites);
        for n in 0..n_sites {
            let mut acc = CMatrix::zeros(dim);
            if let Some(np) = site(boundary, n as isize + 1, n_sites) {
                acc = &acc + &(qd[n] * q[np]);
            }
            acc = &acc - &(qd[n] * q[n]);
            acc = &acc - &(q[n] * qd[n]);
            if let Some(nm) = site(boundary, n as isize - 1, n_sites) {
                acc = &acc + &(q[nm] * qd[n]);
            }
            out.push(acc.scale(cq));
        }
        Ok(like(pos, out))
    });
    ModelSpec::new(
        "product-difference-chain",
        "Chain coupling velocities to neighbour differences by one-sided products",
        Shape::matrices("Q", sites, order),
        rhs,
    )
    .with_tags(&["matrix", "integrable", "chain", "nearest-neighbour"])
    .with_caps(Caps::products())
    .with_boundary(boundary)
    .with_defaults(Params::new().with_real("c", 1.0))
    .with_schema(vec![scalar_doc("c", "coupling strength")])
}

/// The nonabelian Volterra flow A'_n = c { A_{n-1} A_n - A_n A_{n+1} }.
pub fn volterra(sites: usize, order: usize, boundary: Boundary) -> ModelSpec {
    let rhs = Rhs::first(move |_t, state, params: &Params| {
        let cq = params.scalar("c")?;
        let a = mats(state)?;
        let n_sites = a.len();
        let dim = a[0].order();
        let mut out = Vec::with_capacity(n_sites);
        for n in 0..n_sites {
            let mut flow = CMatrix::zeros(dim);
            if let Some(nm) = site(boundary, n as isize - 1, n_sites) {
                flow = &flow + &(a[nm] * a[n]);
            }
            if let Some(np) = site(boundary, n as isize + 1, n_sites) {
                flow = &flow - &(a[n] * a[np]);
            }
            out.push(flow.scale(cq));
        }
        Ok(like(state, out))
    });
    ModelSpec::new(
        "volterra",
        "Nonabelian Volterra flow",
        Shape::matrices("A", sites, order),
        rhs,
    )
    .with_tags(&["matrix", "linearizable", "chain", "first-order"])
    .with_caps(Caps::products())
    .with_boundary(boundary)
    .with_defaults(Params::new().with_real("c", 1.0))
    .with_schema(vec![scalar_doc("c", "coupling strength")])
}

fn volterra_chain_rhs(
    damped: bool,
) -> impl Fn(f64, &ModelState, &ModelState, &Params) -> Result<ModelState, ModelError>
       + Send
       + Sync
       + 'static {
    move |_t, pos, vel, params| {
        let cq = params.scalar("c")?;
        let a = if damped {
            params.scalar("a")?
        } else {
            c(0.0, 0.0)
        };
        let u = mats(pos)?;
        let ud = mats(vel)?;
        let n_sites = u.len();
        // Indices wrap; these chains are registered periodic.
        let boundary = Boundary::Periodic;
        let mut out = Vec::with_capacity(n_sites);
        for n in 0..n_sites {
            let inv_n = inverse(u[n])
                .map_err(ModelError::in_block(format!("U{}", n + 1)))?;
            let mut acc = &(ud[n] * &inv_n) * ud[n];
            if damped {
                acc = &acc + &ud[n].scale(a);
            }
            if let Some(nm) = site(boundary, n as isize - 1, n_sites) {
                let inv_m = inverse(u[nm])
                    .map_err(ModelError::in_block(format!("U{}", nm + 1)))?;
                acc = &acc + &(&(ud[nm] * &inv_m) * ud[n]).scale(cq);
            }
            if let Some(np) = site(boundary, n as isize + 1, n_sites) {
                let inv_p = inverse(u[np])
                    .map_err(ModelError::in_block(format!("U{}", np + 1)))?;
                let tail = &(&(&(ud[n] * &inv_n) * ud[np]) * &inv_p) * u[n];
                acc = &acc - &tail.scale(cq);
            }
            out.push(acc);
        }
        Ok(like(pos, out))
    }
}

/// U''_n = U'_n U_n^-1 U'_n
///         + c { U'_{n-1} U_{n-1}^-1 U'_n - U'_n U_n^-1 U'_{n+1} U_{n+1}^-1 U_n }.
/// Second-order form of the Volterra flow.
pub fn volterra_chain(sites: usize, order: usize) -> ModelSpec {
    ModelSpec::new(
        "volterra-chain",
        "Second-order chain generated by the Volterra flow",
        Shape::matrices("U", sites, order),
        Rhs::second(volterra_chain_rhs(false)),
    )
    .with_tags(&["matrix", "linearizable", "chain", "nearest-neighbour"])
    .with_caps(Caps::products())
    .with_boundary(Boundary::Periodic)
    .with_defaults(Params::new().with_real("c", 0.6))
    .with_schema(vec![scalar_doc("c", "coupling strength")])
}

/// The damped variant U''_n = a U'_n + (Volterra chain terms); periodic in
/// time when a = i omega.
pub fn volterra_chain_damped(sites: usize, order: usize) -> ModelSpec {
    ModelSpec::new(
        "volterra-chain-damped",
        "Volterra chain with a linear velocity drift",
        Shape::matrices("U", sites, order),
        Rhs::second(volterra_chain_rhs(true)),
    )
    .with_tags(&["matrix", "linearizable", "chain", "nearest-neighbour"])
    .with_caps(Caps::products())
    .with_boundary(Boundary::Periodic)
    .with_defaults(Params::new().with_real("a", 0.2).with_real("c", 0.6))
    .with_schema(vec![
        scalar_doc("a", "velocity drift coefficient"),
        scalar_doc("c", "coupling strength"),
    ])
}

/// U'' = alpha 1 + beta U + gamma (U' + c U^2) - c (U'U + 2UU' + c U^3).
/// Single-block Riccati-type equation; linearizable through a third-order
/// linear companion.
pub fn matrix_riccati(order: usize) -> ModelSpec {
    let rhs = Rhs::second(|_t, pos, vel, params: &Params| {
        let alpha = params.scalar("alpha")?;
        let beta = params.scalar("beta")?;
        let gamma = params.scalar("gamma")?;
        let cq = params.scalar("c")?;
        let u = pos.matrix(0)?;
        let v = vel.matrix(0)?;
        let u2 = u * u;
        let u3 = &u2 * u;
        let mut acc = one(u.order()).scale(alpha);
        acc = &acc + &u.scale(beta);
        acc = &acc + &(v + &u2.scale(cq)).scale(gamma);
        acc = &acc - &(&(&(v * u) + &(u * v).scale(c(2.0, 0.0))) + &u3.scale(cq)).scale(cq);
        Ok(like(pos, vec![acc]))
    });
    ModelSpec::new(
        "matrix-riccati",
        "Second-order matrix Riccati equation with scalar coefficients",
        Shape::matrices("U", 1, order),
        rhs,
    )
    .with_tags(&["matrix", "solvable", "one-block"])
    .with_caps(Caps::products())
    .with_defaults(
        Params::new()
            .with_real("alpha", 0.1)
            .with_real("beta", 0.2)
            .with_real("gamma", 0.3)
            .with_real("c", 0.5),
    )
    .with_schema(vec![
        scalar_doc("alpha", "constant forcing"),
        scalar_doc("beta", "linear restoring coefficient"),
        scalar_doc("gamma", "drift coefficient"),
        scalar_doc("c", "Riccati coupling"),
    ])
}

/// U''_n = U'_n U_n^-1 U'_n + sum_m a_nm U'_m U_m^-1 U_n. Linearizable via
/// the logarithmic derivatives V_n = U'_n U_n^-1.
pub fn matrix_logderiv_net(sites: usize, order: usize) -> ModelSpec {
    let rhs = Rhs::second(move |_t, pos, vel, params: &Params| {
        let n_sites = pos.len();
        let a = coupling(params, "a", n_sites)?;
        let u = mats(pos)?;
        let ud = mats(vel)?;
        let mut ratios = Vec::with_capacity(n_sites);
        for m in 0..n_sites {
            let inv = inverse(u[m])
                .map_err(ModelError::in_block(format!("U{}", m + 1)))?;
            ratios.push(ud[m] * &inv);
        }
        let mut out = Vec::with_capacity(n_sites);
        for n in 0..n_sites {
            let mut acc = &ratios[n] * ud[n];
            for m in 0..n_sites {
                acc = &acc + &(&ratios[m] * u[n]).scale(a[(n, m)]);
            }
            out.push(acc);
        }
        Ok(like(pos, out))
    });
    let defaults = Params::new().with(
        "a",
        super::spec::ParamValue::Matrix(CMatrix::from_fn(sites, |i, j| {
            c(0.2 / (1.0 + (i + j) as f64), 0.0)
        })),
    );
    ModelSpec::new(
        "matrix-logderiv-net",
        "Network linearized by logarithmic derivatives",
        Shape::matrices("U", sites, order),
        rhs,
    )
    .with_tags(&["matrix", "linearizable", "chain"])
    .with_caps(Caps::products())
    .with_defaults(defaults)
    .with_schema(vec![table_doc("a", "coupling table")])
}

/// U'' = c^2 (2 U^3 + C U + U C) with a constant matrix C.
pub fn matrix_cubic(order: usize) -> ModelSpec {
    let rhs = Rhs::second(|_t, pos, vel, params: &Params| {
        let _ = vel;
        let cq = params.scalar("c")?;
        let cmat = params.matrix("cmat")?;
        let u = pos.matrix(0)?;
        if cmat.order() != u.order() {
            return Err(ModelError::param("cmat", "size must match the state block"));
        }
        let u3 = &(u * u) * u;
        let acc = (&(&u3.scale(c(2.0, 0.0)) + &(cmat * u)) + &(u * cmat)).scale(cq * cq);
        Ok(like(pos, vec![acc]))
    });
    ModelSpec::new(
        "matrix-cubic",
        "Integrable cubic matrix oscillator",
        Shape::matrices("U", 1, order),
        rhs,
    )
    .with_tags(&["matrix", "integrable", "one-block"])
    .with_caps(Caps::linear().and_odd_powers())
    .with_defaults(
        Params::new()
            .with_real("c", 0.5)
            .with_matrix("cmat", CMatrix::identity(order).scale(c(-0.8, 0.0))),
    )
    .with_schema(vec![
        scalar_doc("c", "overall coupling"),
        table_doc("cmat", "constant anisotropy matrix"),
    ])
}

/// U'' = 2a (UU' + U'U) - 2a^2 U^3 - 4ab U^2 + 3b U' - 2b^2 U - 2a S U S
/// with S = (a U^2 + b U - U')^(1/2).
pub fn matrix_radical_drift(order: usize) -> ModelSpec {
    let rhs = Rhs::second(|_t, pos, vel, params: &Params| {
        let a = params.scalar("a")?;
        let b = params.scalar("b")?;
        let u = pos.matrix(0)?;
        let v = vel.matrix(0)?;
        let u2 = u * u;
        let radicand = &(&u2.scale(a) + &u.scale(b)) - v;
        let s = matpow(&radicand, c(0.5, 0.0)).map_err(ModelError::in_block("S"))?;
        let mut acc = (&(u * v) + &(v * u)).scale(2.0 * a);
        acc = &acc - &(&u2 * u).scale(2.0 * a * a);
        acc = &acc - &u2.scale(4.0 * a * b);
        acc = &acc + &v.scale(3.0 * b);
        acc = &acc - &u.scale(2.0 * b * b);
        acc = &acc - &(&(&s * u) * &s).scale(2.0 * a);
        Ok(like(pos, vec![acc]))
    });
    ModelSpec::new(
        "matrix-radical-drift",
        "Solvable oscillator with a matrix square-root force",
        Shape::matrices("U", 1, order),
        rhs,
    )
    .with_tags(&["matrix", "solvable", "one-block", "radical"])
    .with_caps(Caps::products().and_analytic())
    .with_defaults(Params::new().with_real("a", 0.3).with_real("b", 0.7))
    .with_schema(vec![
        scalar_doc("a", "quadratic coefficient"),
        scalar_doc("b", "linear coefficient"),
    ])
}

/// U'' = 2c { c U^3 + T U T } with T = (c U^2 + U')^(1/2).
pub fn matrix_radical_cubic(order: usize) -> ModelSpec {
    let rhs = Rhs::second(|_t, pos, vel, params: &Params| {
        let cq = params.scalar("c")?;
        let u = pos.matrix(0)?;
        let v = vel.matrix(0)?;
        let u2 = u * u;
        let t = matpow(&(&u2.scale(cq) + v), c(0.5, 0.0)).map_err(ModelError::in_block("T"))?;
        let acc = (&(&u2 * u).scale(cq) + &(&(&t * u) * &t)).scale(2.0 * cq);
        Ok(like(pos, vec![acc]))
    });
    ModelSpec::new(
        "matrix-radical-cubic",
        "Integrable cubic oscillator with a square-root velocity coupling",
        Shape::matrices("U", 1, order),
        rhs,
    )
    .with_tags(&["matrix", "integrable", "one-block", "radical"])
    .with_caps(Caps::products().and_analytic())
    .with_defaults(Params::new().with_real("c", 0.4))
    .with_schema(vec![scalar_doc("c", "coupling strength")])
}

/// Auxiliary solve shared by the tethered-pair family: find V with
/// a V + c [U, V] = W.
fn tether_solve(a: Complex, cq: Complex, u: &CMatrix, w: &CMatrix) -> Result<CMatrix, ModelError> {
    let terms = vec![
        LinearTerm::scalar(a),
        LinearTerm::left(cq, u.clone()),
        LinearTerm::right(-cq, u.clone()),
    ];
    crate::algebra::solve_flattened(&terms, w).map_err(ModelError::in_block("V"))
}

/// U''_n = a_n alpha_n U'_n + sum_m b_nm U'_m + c_n [U'_n, V_n]
///         + c_n alpha_n [U_n, U'_n],
/// with V_n recovered from a_n V_n + c_n [U_n, V_n] = U'_n - sum_m b_nm U_m.
pub fn tethered_pair_chain(sites: usize, order: usize) -> ModelSpec {
    let rhs = Rhs::second(move |_t, pos, vel, params: &Params| {
        let n_sites = pos.len();
        let a = site_grid(params, "a", n_sites)?;
        let alpha = site_grid(params, "alpha", n_sites)?;
        let cg = site_grid(params, "c", n_sites)?;
        let b = coupling(params, "b", n_sites)?;
        let u = mats(pos)?;
        let ud = mats(vel)?;
        
        let mut out = Vec::with_capacity(n_sites);
        for n in 0..n_sites {
            let mut w = ud[n].clone();
            for m in 0..n_sites {
                w = &w - &u[m].scale(b[(n, m)]);
            }
            let v = tether_solve(a[n], cg[n], u[n], &w)?;
            let mut acc = ud[n].scale(a[n] * alpha[n]);
            for m in 0..n_sites {
                acc = &acc + &ud[m].scale(b[(n, m)]);
            }
            acc = &acc + &commutator(ud[n], &v)?.scale(cg[n]);
            acc = &acc + &commutator(u[n], ud[n])?.scale(cg[n] * alpha[n]);
            out.push(acc);
        }
        Ok(like(pos, out))
    });
    let defaults = Params::new()
        .with_real_grid("a", &vec![1.0; sites])
        .with_real_grid("alpha", &vec![0.5; sites])
        .with_real_grid("c", &vec![0.4; sites])
        .with(
            "b",
            super::spec::ParamValue::Matrix(CMatrix::from_fn(sites, |i, j| {
                c(0.15 / (1.0 + (i + j) as f64), 0.0)
            })),
        );
    ModelSpec::new(
        "tethered-pair-chain",
        "Second-order network with a tethered auxiliary commutator solve",
        Shape::matrices("U", sites, order),
        rhs,
    )
    .with_tags(&["matrix", "solvable", "chain", "auxiliary-solve"])
    .with_caps(Caps::commutators())
    .with_defaults(defaults)
    .with_schema(vec![
        grid_doc("a", "per-site tether stiffness"),
        grid_doc("alpha", "per-site velocity ratio"),
        grid_doc("c", "per-site commutator strength"),
        table_doc("b", "position coupling table"),
    ])
}

/// U'' = c 1 + a alpha U + (alpha - a) U' + b alpha U^2 - 2b U'U.
pub fn quadratic_drift_single(order: usize) -> ModelSpec {
    let rhs = Rhs::second(|_t, pos, vel, params: &Params| {
        let a = params.scalar("a")?;
        let alpha = params.scalar("alpha")?;
        let b = params.scalar("b")?;
        let cq = params.scalar("c")?;
        let u = pos.matrix(0)?;
        let v = vel.matrix(0)?;
        let mut acc = one(u.order()).scale(cq);
        acc = &acc + &u.scale(a * alpha);
        acc = &acc + &v.scale(alpha - a);
        acc = &acc + &(u * u).scale(b * alpha);
        acc = &acc - &(v * u).scale(2.0 * b);
        Ok(like(pos, vec![acc]))
    });
    ModelSpec::new(
        "quadratic-drift-single",
        "Single-block quadratic equation from a two-term linear flow",
        Shape::matrices("U", 1, order),
        rhs,
    )
    .with_tags(&["matrix", "linearizable", "one-block"])
    .with_caps(Caps::products())
    .with_defaults(
        Params::new()
            .with_real("a", 0.3)
            .with_real("alpha", 0.7)
            .with_real("b", 0.4)
            .with_real("c", 0.2),
    )
    .with_schema(vec![
        scalar_doc("a", "flow drift"),
        scalar_doc("alpha", "companion drift"),
        scalar_doc("b", "quadratic coupling"),
        scalar_doc("c", "constant forcing"),
    ])
}

/// The chain form:
/// U''_n = (a_n - a_{n+1}) ct_n 1 + (a_{n+1} - a_n)(a_n - at_n) U_n
///         + ct_n (b_n U_n - b_{n+1} U_{n+1}) + (a_n - at_n) b_{n+1} U_{n+1} U_n
///         - 2 b_n U'_n U_n
///         + [at_n + a_{n+1} - 2 a_n + b_{n+1} U_{n+1} - b_n U_n] [U'_n + b_n U_n^2].
pub fn quadratic_drift_chain(sites: usize, order: usize) -> ModelSpec {
    let rhs = Rhs::second(move |_t, pos, vel, params: &Params| {
        let n_sites = pos.len();
        let a = site_grid(params, "a", n_sites)?;
        let at = site_grid(params, "atilde", n_sites)?;
        let b = site_grid(params, "b", n_sites)?;
        let ct = site_grid(params, "ctilde", n_sites)?;
        let u = mats(pos)?;
        let ud = mats(vel)?;
        let dim = u[0].order();
        let mut out = Vec::with_capacity(n_sites);
        for n in 0..n_sites {
            let np = (n + 1) % n_sites;
            let mut acc = one(dim).scale((a[n] - a[np]) * ct[n]);
            acc = &acc + &u[n].scale((a[np] - a[n]) * (a[n] - at[n]));
            acc = &acc + &(&u[n].scale(b[n]) - &u[np].scale(b[np])).scale(ct[n]);
            acc = &acc + &(u[np] * u[n]).scale((a[n] - at[n]) * b[np]);
            acc = &acc - &(ud[n] * u[n]).scale(2.0 * b[n]);
            let bracket = &(&one(dim).scale(at[n] + a[np] - 2.0 * a[n]) + &u[np].scale(b[np]))
                - &u[n].scale(b[n]);
            let tail = ud[n] + &(u[n] * u[n]).scale(b[n]);
            acc = &acc + &(&bracket * &tail);
            out.push(acc);
        }
        Ok(like(pos, out))
    });
    let defaults = Params::new()
        .with_real_grid("a", &(0..sites).map(|k| 0.2 + 0.1 * k as f64).collect::<Vec<_>>())
        .with_real_grid("atilde", &(0..sites).map(|k| 0.1 + 0.05 * k as f64).collect::<Vec<_>>())
        .with_real_grid("b", &vec![0.3; sites])
        .with_real_grid("ctilde", &vec![0.2; sites]);
    ModelSpec::new(
        "quadratic-drift-chain",
        "Chain of quadratic equations from a hopping linear flow",
        Shape::matrices("U", sites, order),
        rhs,
    )
    .with_tags(&["matrix", "linearizable", "chain", "nearest-neighbour"])
    .with_caps(Caps::products())
    .with_boundary(Boundary::Periodic)
    .with_defaults(defaults)
    .with_schema(vec![
        grid_doc("a", "per-site flow drift"),
        grid_doc("atilde", "per-site companion drift"),
        grid_doc("b", "per-site quadratic coupling"),
        grid_doc("ctilde", "per-site constant forcing"),
    ])
}

/// M''_n = (a_{n+1} - a_n) M'_n
///         + { (1 - b_n) M'_n M_n^-1 + b_{n+1} M'_{n+1} M_{n+1}^-1 } M'_n
///         + c_{n+1} M_n - c_n M'_n M_n^-1 M_{n-1} M'_{n-1}^-1 M_n.
pub fn neighbor_ratio_chain(sites: usize, order: usize) -> ModelSpec {
    let rhs = Rhs::second(move |_t, pos, vel, params: &Params| {
        let n_sites = pos.len();
        let a = site_grid(params, "a", n_sites)?;
        let b = site_grid(params, "b", n_sites)?;
        let cg = site_grid(params, "c", n_sites)?;
        let m = mats(pos)?;
        let md = mats(vel)?;
        let mut out = Vec::with_capacity(n_sites);
        for n in 0..n_sites {
            let np = (n + 1) % n_sites;
            let nm = (n + n_sites - 1) % n_sites;
            let inv_n = inverse(m[n])
                .map_err(ModelError::in_block(format!("M{}", n + 1)))?;
            let inv_p = inverse(m[np])
                .map_err(ModelError::in_block(format!("M{}", np + 1)))?;
            let invd_m = inverse(md[nm])
                .map_err(ModelError::in_block(format!("M{}'", nm + 1)))?;
            let mut acc = md[n].scale(a[np] - a[n]);
            let brace = &(md[n] * &inv_n).scale(c(1.0, 0.0) - b[n])
                + &(md[np] * &inv_p).scale(b[np]);
            acc = &acc + &(&brace * md[n]);
            acc = &acc + &m[n].scale(cg[np]);
            let tail = &(&(&(md[n] * &inv_n) * m[nm]) * &invd_m) * m[n];
            acc = &acc - &tail.scale(cg[n]);
            out.push(acc);
        }
        Ok(like(pos, out))
    });
    let defaults = Params::new()
        .with_real_grid("a", &(0..sites).map(|k| 0.1 * (k + 1) as f64).collect::<Vec<_>>())
        .with_real_grid("b", &vec![0.25; sites])
        .with_real_grid("c", &vec![0.3; sites]);
    ModelSpec::new(
        "neighbor-ratio-chain",
        "Second-order chain driven by neighbour ratio flows",
        Shape::matrices("M", sites, order),
        rhs,
    )
    .with_tags(&["matrix", "linearizable", "chain", "nearest-neighbour"])
    .with_caps(Caps::products())
    .with_boundary(Boundary::Periodic)
    .with_defaults(defaults)
    .with_schema(vec![
        grid_doc("a", "per-site drift"),
        grid_doc("b", "per-site ratio weight"),
        grid_doc("c", "per-site forcing"),
    ])
}

/// The Nahm system M'_n = c [M_{n+1}, M_{n+2}], indices mod 3.
pub fn nahm(order: usize) -> ModelSpec {
    let rhs = Rhs::first(|_t, state, params: &Params| {
        let cq = params.scalar("c")?;
        let m = mats(state)?;
        let mut out = Vec::with_capacity(3);
        for n in 0..3 {
            out.push(commutator(m[(n + 1) % 3], m[(n + 2) % 3])?.scale(cq));
        }
        Ok(like(state, out))
    });
    ModelSpec::new(
        "nahm",
        "Nahm equations",
        Shape::matrices("M", 3, order),
        rhs,
    )
    .with_tags(&["matrix", "integrable", "first-order"])
    .with_caps(Caps::commutators())
    .with_boundary(Boundary::Periodic)
    .with_defaults(Params::new().with_real("c", 1.0))
    .with_schema(vec![scalar_doc("c", "coupling strength")])
}

/// mu_n U''_n = - sum_m a_nm U'_m
///              + [ mu_{n+1} U'_{n+1} + sum_m a_{n+1,m} U_m ,
///                  mu_{n+2} U'_{n+2} + sum_m a_{n+2,m} U_m ], indices mod 3.
pub fn nahm_second_order(order: usize) -> ModelSpec {
    let rhs = Rhs::second(move |_t, pos, vel, params: &Params| {
        let mu = site_grid(params, "mu", 3)?;
        let a = coupling(params, "a", 3)?;
        let u = mats(pos)?;
        let ud = mats(vel)?;
        let dim = u[0].order();
        let lin = |k: usize| -> CMatrix {
            let mut s = ud[k].scale(mu[k]);
            for m in 0..3 {
                s = &s + &u[m].scale(a[(k, m)]);
            }
            s
        };
        let mut out = Vec::with_capacity(3);
        for n in 0..3 {
            if mu[n].norm() == 0.0 {
                return Err(ModelError::param("mu", "entries must be nonzero"));
            }
            let mut acc = CMatrix::zeros(dim);
            for m in 0..3 {
                acc = &acc - &ud[m].scale(a[(n, m)]);
            }
            acc = &acc + &commutator(&lin((n + 1) % 3), &lin((n + 2) % 3))?;
            out.push(acc.scale(c(1.0, 0.0) / mu[n]));
        }
        Ok(like(pos, out))
    });
    let defaults = Params::new()
        .with_real_grid("mu", &[1.0, 1.0, 1.0])
        .with(
            "a",
            super::spec::ParamValue::Matrix(CMatrix::from_fn(3, |i, j| {
                c(if i == j { 0.3 } else { 0.1 }, 0.0)
            })),
        );
    ModelSpec::new(
        "nahm-second-order",
        "Second-order form of the Nahm system",
        Shape::matrices("U", 3, order),
        rhs,
    )
    .with_tags(&["matrix", "integrable", "commutator"])
    .with_caps(Caps::commutators())
    .with_defaults(defaults)
    .with_schema(vec![
        grid_doc("mu", "per-block masses"),
        table_doc("a", "linear coupling table"),
    ])
}

/// Two coupled copies of the master equation obtained by the block
/// substitution; F and G are the mixing kernels.
pub fn master_pair(order: usize) -> ModelSpec {
    let rhs = Rhs::second(|_t, pos, vel, params: &Params| {
        let a = params.scalar("a")?;
        let b = params.scalar("b")?;
        let cq = params.scalar("c")?;
        let u1 = pos.matrix(0)?;
        let u2 = pos.matrix(1)?;
        let v1 = vel.matrix(0)?;
        let v2 = vel.matrix(1)?;
        let inv1 = inverse(u1).map_err(ModelError::in_block("U1"))?;
        let core = u1 - &(&(u2 * &inv1) * u2);
        let f = inverse(&core).map_err(ModelError::in_block("U1 - U2 U1^-1 U2"))?;
        let g = &(&inv1 * u2) * &f;
        let acc1 = &(&v1.scale(2.0 * a) + &u1.scale(b))
            + &(&(&(&(v1 * &f) * v1) + &(&(v2 * &f) * v2))
                - &(&(&(v1 * &g) * v2) + &(&(v2 * &g) * v1)))
                .scale(cq);
        let acc2 = &(&v2.scale(2.0 * a) + &u2.scale(b))
            + &(&(&(&(v1 * &f) * v2) + &(&(v2 * &f) * v1))
                - &(&(&(v1 * &g) * v1) + &(&(v2 * &g) * v2)))
                .scale(cq);
        Ok(like(pos, vec![acc1, acc2]))
    });
    ModelSpec::new(
        "master-pair",
        "Block-duplicated master oscillator",
        Shape::matrices("U", 2, order),
        rhs,
    )
    .with_tags(&["matrix", "solvable", "two-block"])
    .with_caps(Caps::products())
    .with_defaults(
        Params::new()
            .with_real("a", 0.15)
            .with_real("b", 0.4)
            .with_real("c", 0.3),
    )
    .with_schema(vec![
        scalar_doc("a", "velocity drift coefficient"),
        scalar_doc("b", "linear restoring coefficient"),
        scalar_doc("c", "quadratic-velocity coefficient"),
    ])
}

/// The cyclic convolution ring
/// U''_j = sum_k { 2 a_{j-k} U'_k + b_{j-k} U_k }
///         + sum_{k1,k2} c_{j-k1-k2} [U'_{k1}, U_{k2}], indices mod J.
pub fn matrix_gyro_ring(sites: usize, order: usize) -> ModelSpec {
    let rhs = Rhs::second(move |_t, pos, vel, params: &Params| {
        let j_count = pos.len();
        let a = site_grid(params, "a", j_count)?;
        let b = site_grid(params, "b", j_count)?;
        let cg = site_grid(params, "c", j_count)?;
        let u = mats(pos)?;
        let ud = mats(vel)?;
        let dim = u[0].order();
        let idx = |d: isize| d.rem_euclid(j_count as isize) as usize;
        let mut out = Vec::with_capacity(j_count);
        for j in 0..j_count {
            let mut acc = CMatrix::zeros(dim);
            for k in 0..j_count {
                let off = idx(j as isize - k as isize);
                acc = &acc + &ud[k].scale(2.0 * a[off]);
                acc = &acc + &u[k].scale(b[off]);
            }
            for k1 in 0..j_count {
                for k2 in 0..j_count {
                    let off = idx(j as isize - k1 as isize - k2 as isize);
                    acc = &acc + &commutator(ud[k1], u[k2])?.scale(cg[off]);
                }
            }
            out.push(acc);
        }
        Ok(like(pos, out))
    });
    let defaults = Params::new()
        .with_real_grid("a", &(0..sites).map(|k| 0.1 / (1.0 + k as f64)).collect::<Vec<_>>())
        .with_real_grid("b", &(0..sites).map(|k| 0.3 / (1.0 + k as f64)).collect::<Vec<_>>())
        .with_real_grid("c", &(0..sites).map(|k| 0.4 / (1.0 + k as f64)).collect::<Vec<_>>());
    ModelSpec::new(
        "matrix-gyro-ring",
        "Cyclic convolution ring of gyroscopic matrix oscillators",
        Shape::matrices("U", sites, order),
        rhs,
    )
    .with_tags(&["matrix", "solvable", "ring", "convolution"])
    .with_caps(Caps::commutators())
    .with_boundary(Boundary::Periodic)
    .with_defaults(defaults)
    .with_schema(vec![
        grid_doc("a", "velocity convolution kernel"),
        grid_doc("b", "position convolution kernel"),
        grid_doc("c", "commutator convolution kernel"),
    ])
}

/// M'' = A + M B + M' C + M D M C - M' D M - 2 M D M' - M D M D M, with
/// constant matrices A, B, C, D.
pub fn matrix_riccati_general(order: usize) -> ModelSpec {
    let rhs = Rhs::second(|_t, pos, vel, params: &Params| {
        let m = pos.matrix(0)?;
        let v = vel.matrix(0)?;
        let n = m.order();
        let fetch = |name: &str| -> Result<CMatrix, ModelError> {
            let mm = params.matrix(name)?;
            if mm.order() != n {
                return Err(ModelError::param(name, "size must match the state block"));
            }
            Ok(mm.clone())
        };
        let amat = fetch("amat")?;
        let bmat = fetch("bmat")?;
        let cmat = fetch("cmat")?;
        let dmat = fetch("dmat")?;
        let md = m * &dmat;
        let mut acc = amat;
        acc = &acc + &(m * &bmat);
        acc = &acc + &(v * &cmat);
        acc = &acc + &(&(&md * m) * &cmat);
        acc = &acc - &(&(v * &dmat) * m);
        acc = &acc - &(&md * v).scale(c(2.0, 0.0));
        acc = &acc - &(&(&md * m) * &(&dmat * m));
        Ok(like(pos, vec![acc]))
    });
    let scaled = |s: f64| CMatrix::from_fn(order, |i, j| {
        if i == j {
            c(s, 0.0)
        } else {
            c(0.1 * s, 0.0)
        }
    });
    ModelSpec::new(
        "matrix-riccati-general",
        "Second-order matrix Riccati equation with matrix coefficients",
        Shape::matrices("M", 1, order),
        rhs,
    )
    .with_tags(&["matrix", "linearizable", "one-block"])
    .with_caps(Caps::products())
    .with_defaults(
        Params::new()
            .with_matrix("amat", scaled(0.1))
            .with_matrix("bmat", scaled(0.2))
            .with_matrix("cmat", scaled(0.3))
            .with_matrix("dmat", scaled(0.5)),
    )
    .with_schema(vec![
        table_doc("amat", "constant forcing matrix"),
        table_doc("bmat", "position coefficient matrix"),
        table_doc("cmat", "velocity coefficient matrix"),
        table_doc("dmat", "Riccati coupling matrix (must be invertible)"),
    ])
}

/// Assembles a grid of k x k blocks (row-major) into one big matrix.
fn assemble(blocks: &[&CMatrix], grid: usize, k: usize) -> CMatrix {
    CMatrix::from_fn(grid * k, |i, j| blocks[(i / k) * grid + (j / k)][(i % k, j % k)])
}

fn split_grid(big: &CMatrix, grid: usize, k: usize) -> Vec<CMatrix> {
    (0..grid * grid)
        .map(|idx| {
            let (r, cc) = (idx / grid, idx % grid);
            CMatrix::from_fn(k, |i, j| big[(r * k + i, cc * k + j)])
        })
        .collect()
}

/// Scalar coupling table promoted to a block matrix `table (x) I_k`.
fn promote(table: &CMatrix, k: usize) -> CMatrix {
    let n = table.order();
    CMatrix::from_fn(n * k, |i, j| {
        if i % k == j % k {
            table[(i / k, j / k)]
        } else {
            c(0.0, 0.0)
        }
    })
}

/// The Riccati grid: an N x N array of blocks U_nm evolving entrywise under
/// the matrix Riccati structure with scalar coupling tables a, b, c, d.
pub fn riccati_grid(grid: usize, order: usize) -> ModelSpec {
    let rhs = Rhs::second(move |_t, pos, vel, params: &Params| {
        let count = pos.len();
        let g = (count as f64).sqrt().round() as usize;
        if g * g != count {
            return Err(ModelError::shape("riccati-grid needs a square block count"));
        }
        let k = pos.matrix(0)?.order();
        let a = coupling(params, "a", g)?;
        let b = coupling(params, "b", g)?;
        let cc = coupling(params, "c", g)?;
        let d = coupling(params, "d", g)?;
        let ublocks = mats(pos)?;
        let vblocks = mats(vel)?;
        let u = assemble(&ublocks, g, k);
        let v = assemble(&vblocks, g, k);
        let abig = promote(&a, k);
        let bbig = promote(&b, k);
        let cbig = promote(&cc, k);
        let dbig = promote(&d, k);
        let ud = &u * &dbig;
        let mut acc = abig;
        acc = &acc + &(&u * &bbig);
        acc = &acc + &(&v * &cbig);
        acc = &acc + &(&(&ud * &u) * &cbig);
        acc = &acc - &(&(&v * &dbig) * &u);
        acc = &acc - &(&ud * &v).scale(c(2.0, 0.0));
        acc = &acc - &(&(&ud * &u) * &(&dbig * &u));
        Ok(like(pos, split_grid(&acc, g, k)))
    });
    let names: Vec<(String, super::state::BlockKind)> = (0..grid)
        .flat_map(|r| {
            (0..grid).map(move |cc| {
                (
                    format!("U{}{}", r + 1, cc + 1),
                    super::state::BlockKind::Matrix(order),
                )
            })
        })
        .collect();
    let table = |s: f64| CMatrix::from_fn(grid, |i, j| {
        if i == j {
            c(s, 0.0)
        } else {
            c(0.1 * s, 0.0)
        }
    });
    ModelSpec::new(
        "riccati-grid",
        "Square grid of blocks with entrywise Riccati coupling",
        Shape::new(names),
        rhs,
    )
    .with_tags(&["matrix", "linearizable", "grid"])
    .with_caps(Caps::products())
    .with_defaults(
        Params::new()
            .with_matrix("a", table(0.1))
            .with_matrix("b", table(0.2))
            .with_matrix("c", table(0.3))
            .with_matrix("d", table(0.5)),
    )
    .with_schema(vec![
        table_doc("a", "constant forcing table"),
        table_doc("b", "position coupling table"),
        table_doc("c", "velocity coupling table"),
        table_doc("d", "Riccati coupling table"),
    ])
}

/// The linear hopping chain W'_n = a_n W_n + b_n W_{n+1} + c_n W_{n-1}.
pub fn hopping_chain(sites: usize, order: usize, boundary: Boundary) -> ModelSpec {
    let rhs = Rhs::first(move |_t, state, params: &Params| {
        let n_sites = state.len();
        let a = site_grid(params, "a", n_sites)?;
        let b = site_grid(params, "b", n_sites)?;
        let cg = site_grid(params, "c", n_sites)?;
        let w = mats(state)?;
        let mut out = Vec::with_capacity(n_sites);
        for n in 0..n_sites {
            let mut flow = w[n].scale(a[n]);
            if let Some(np) = site(boundary, n as isize + 1, n_sites) {
                flow = &flow + &w[np].scale(b[n]);
            }
            if let Some(nm) = site(boundary, n as isize - 1, n_sites) {
                flow = &flow + &w[nm].scale(cg[n]);
            }
            out.push(flow);
        }
        Ok(like(state, out))
    });
    let defaults = Params::new()
        .with_real_grid("a", &(0..sites).map(|k| 0.1 * (k + 1) as f64).collect::<Vec<_>>())
        .with_real_grid("b", &vec![0.4; sites])
        .with_real_grid("c", &vec![0.3; sites]);
    ModelSpec::new(
        "hopping-chain",
        "Linear nearest-neighbour hopping chain",
        Shape::matrices("W", sites, order),
        rhs,
    )
    .with_tags(&["matrix", "solvable", "chain", "first-order", "linear"])
    .with_caps(Caps::linear())
    .with_boundary(boundary)
    .with_defaults(defaults)
    .with_schema(vec![
        grid_doc("a", "on-site rates"),
        grid_doc("b", "forward hopping rates"),
        grid_doc("c", "backward hopping rates"),
    ])
}

/// The ratio flow of the hopping chain:
/// V'_n = (a_{n+1} - a_n) V_n + b_{n+1} V_{n+1} V_n - b_n V_n^2
///        + c_{n+1} 1 - c_n V_n V_{n-1}^-1.
pub fn neighbor_ratio_flow(sites: usize, order: usize) -> ModelSpec {
    let rhs = Rhs::first(move |_t, state, params: &Params| {
        let n_sites = state.len();
        let a = site_grid(params, "a", n_sites)?;
        let b = site_grid(params, "b", n_sites)?;
        let cg = site_grid(params, "c", n_sites)?;
        let v = mats(state)?;
        let dim = v[0].order();
        let mut out = Vec::with_capacity(n_sites);
        for n in 0..n_sites {
            let np = (n + 1) % n_sites;
            let nm = (n + n_sites - 1) % n_sites;
            let inv_m = inverse(v[nm])
                .map_err(ModelError::in_block(format!("V{}", nm + 1)))?;
            let mut flow = v[n].scale(a[np] - a[n]);
            flow = &flow + &(v[np] * v[n]).scale(b[np]);
            flow = &flow - &(v[n] * v[n]).scale(b[n]);
            flow = &flow + &one(dim).scale(cg[np]);
            flow = &flow - &(&(v[n] * &inv_m)).scale(cg[n]);
            out.push(flow);
        }
        Ok(like(state, out))
    });
    let defaults = Params::new()
        .with_real_grid("a", &(0..sites).map(|k| 0.1 * (k + 1) as f64).collect::<Vec<_>>())
        .with_real_grid("b", &vec![0.2; sites])
        .with_real_grid("c", &vec![0.15; sites]);
    ModelSpec::new(
        "neighbor-ratio-flow",
        "First-order flow of neighbour ratios of a hopping chain",
        Shape::matrices("V", sites, order),
        rhs,
    )
    .with_tags(&["matrix", "linearizable", "chain", "first-order"])
    .with_caps(Caps::products())
    .with_boundary(Boundary::Periodic)
    .with_defaults(defaults)
    .with_schema(vec![
        grid_doc("a", "on-site rates of the underlying chain"),
        grid_doc("b", "forward hopping rates"),
        grid_doc("c", "backward hopping rates"),
    ])
}

/// Shared body of the conjugation-invariant pair network; `balanced` wires
/// d = -a^T and a common coupling lambda.
fn lax_pair_rhs(
    balanced: bool,
) -> impl Fn(f64, &ModelState, &Params) -> Result<ModelState, ModelError> + Send + Sync + 'static {
    move |_t, state, params| {
        let total = state.len();
        if total % 2 != 0 {
            return Err(ModelError::shape("pair network needs U blocks then V blocks"));
        }
        let n_sites = total / 2;
        let a = coupling(params, "a", n_sites)?;
        let b = coupling(params, "b", n_sites)?;
        let cc = coupling(params, "c", n_sites)?;
        let (d, lambda): (CMatrix, Vec<Complex>) = if balanced {
            let l = params.scalar("lambda")?;
            (a.transpose().scale(c(-1.0, 0.0)), vec![l; n_sites])
        } else {
            (
                coupling(params, "d", n_sites)?,
                site_grid(params, "lambda", n_sites)?,
            )
        };
        let all = mats(state)?;
        let (u, v) = all.split_at(n_sites);
        let dim = u[0].order();
        let mut anchor = CMatrix::zeros(dim);
        for j in 0..n_sites {
            anchor = &anchor + &commutator(u[j], v[j])?.scale(lambda[j]);
        }
        let mut out = Vec::with_capacity(total);
        for n in 0..n_sites {
            let mut flow = CMatrix::zeros(dim);
            for m in 0..n_sites {
                flow = &flow + &u[m].scale(a[(n, m)]);
                flow = &flow + &v[m].scale(b[(n, m)]);
            }
            flow = &flow + &commutator(u[n], &anchor)?;
            out.push(flow);
        }
        for n in 0..n_sites {
            let mut flow = CMatrix::zeros(dim);
            for m in 0..n_sites {
                flow = &flow + &u[m].scale(cc[(n, m)]);
                flow = &flow + &v[m].scale(d[(n, m)]);
            }
            flow = &flow + &commutator(v[n], &anchor)?;
            out.push(flow);
        }
        Ok(like(state, out))
    }
}

fn pair_shape(prefix_u: &str, prefix_v: &str, sites: usize, order: usize) -> Shape {
    Shape::matrices(prefix_u, sites, order).join(Shape::matrices(prefix_v, sites, order))
}

fn sym_table(n: usize, s: f64) -> CMatrix {
    CMatrix::from_fn(n, |i, j| c(s / (1.0 + (i + j) as f64), 0.0))
}

/// First-order pair network with the commutator anchor
/// f = sum_j lambda_j [U_j, V_j]:
/// U'_n = sum_m (a_nm U_m + b_nm V_m) + [U_n, f],
/// V'_n = sum_m (c_nm U_m + d_nm V_m) + [V_n, f].
pub fn lax_pair_net(sites: usize, order: usize) -> ModelSpec {
    let defaults = Params::new()
        .with(
            "a",
            super::spec::ParamValue::Matrix(CMatrix::from_fn(sites, |i, j| {
                c(0.1 / (1.0 + i as f64 + 2.0 * j as f64), 0.0)
            })),
        )
        .with("b", super::spec::ParamValue::Matrix(sym_table(sites, 0.2)))
        .with("c", super::spec::ParamValue::Matrix(sym_table(sites, 0.15)))
        .with(
            "d",
            super::spec::ParamValue::Matrix(CMatrix::from_fn(sites, |i, j| {
                c(-0.1 / (1.0 + j as f64 + 2.0 * i as f64), 0.0)
            })),
        )
        .with_real_grid("lambda", &vec![0.3; sites]);
    ModelSpec::new(
        "lax-pair-net",
        "Pair network driven by a commutator anchor",
        pair_shape("U", "V", sites, order),
        Rhs::first(lax_pair_rhs(false)),
    )
    .with_tags(&["matrix", "solvable", "pair", "first-order"])
    .with_caps(Caps::commutators())
    .with_defaults(defaults)
    .with_schema(vec![
        table_doc("a", "U-to-U coupling table"),
        table_doc("b", "V-to-U coupling table"),
        table_doc("c", "U-to-V coupling table"),
        table_doc("d", "V-to-V coupling table"),
        grid_doc("lambda", "anchor weights"),
    ])
}

/// The balanced pair network: common anchor weight lambda and d = -a^T,
/// which keeps the anchor constant in time when b and c are symmetric.
pub fn lax_pair_net_balanced(sites: usize, order: usize) -> ModelSpec {
    let defaults = Params::new()
        .with(
            "a",
            super::spec::ParamValue::Matrix(CMatrix::from_fn(sites, |i, j| {
                c(0.1 / (1.0 + i as f64 + 2.0 * j as f64), 0.0)
            })),
        )
        .with("b", super::spec::ParamValue::Matrix(sym_table(sites, 0.2)))
        .with("c", super::spec::ParamValue::Matrix(sym_table(sites, 0.15)))
        .with_real("lambda", 0.3);
    ModelSpec::new(
        "lax-pair-net-balanced",
        "Balanced pair network with a conserved commutator anchor",
        pair_shape("U", "V", sites, order),
        Rhs::first(lax_pair_rhs(true)),
    )
    .with_tags(&["matrix", "solvable", "pair", "first-order"])
    .with_caps(Caps::commutators())
    .with_closed_form("anchored-pair")
    .with_defaults(defaults)
    .with_schema(vec![
        table_doc("a", "U-to-U coupling table (V-to-V is -a^T)"),
        table_doc("b", "V-to-U coupling table (symmetric)"),
        table_doc("c", "U-to-V coupling table (symmetric)"),
        scalar_doc("lambda", "anchor weight"),
    ])
}

/// First-order double-bracket pair:
/// U' = alpha U + beta V + b [U,V] + c [U,[U,V]],
/// V' = gamma U + delta V + a [V,U] + c [V,[U,V]].
pub fn double_bracket_pair(order: usize) -> ModelSpec {
    let rhs = Rhs::first(|_t, state, params: &Params| {
        let alpha = params.scalar("alpha")?;
        let beta = params.scalar("beta")?;
        let gamma = params.scalar("gamma")?;
        let delta = params.scalar("delta")?;
        let a = params.scalar("a")?;
        let b = params.scalar("b")?;
        let cq = params.scalar("c")?;
        let u = state.matrix(0)?;
        let v = state.matrix(1)?;
        let uv = commutator(u, v)?;
        let du = &(&(&u.scale(alpha) + &v.scale(beta)) + &uv.scale(b))
            + &commutator(u, &uv)?.scale(cq);
        let dv = &(&(&u.scale(gamma) + &v.scale(delta)) - &uv.scale(a))
            + &commutator(v, &uv)?.scale(cq);
        Ok(like(state, vec![du, dv]))
    });
    ModelSpec::new(
        "double-bracket-pair",
        "Conjugated pair flow with nested commutator couplings",
        Shape::matrices("U", 1, order).join(Shape::matrices("V", 1, order)),
        rhs,
    )
    .with_tags(&["matrix", "linearizable", "pair", "first-order"])
    .with_caps(Caps::commutators())
    .with_defaults(
        Params::new()
            .with_real("alpha", 0.1)
            .with_real("beta", 0.4)
            .with_real("gamma", 0.2)
            .with_real("delta", -0.1)
            .with_real("a", 0.3)
            .with_real("b", 0.25)
            .with_real("c", 0.2),
    )
    .with_schema(vec![
        scalar_doc("alpha", "U self-rate"),
        scalar_doc("beta", "V-to-U rate"),
        scalar_doc("gamma", "U-to-V rate"),
        scalar_doc("delta", "V self-rate"),
        scalar_doc("a", "single-bracket weight in the V flow"),
        scalar_doc("b", "single-bracket weight in the U flow"),
        scalar_doc("c", "double-bracket weight"),
    ])
}

/// Recovers the companion V of the second-order double-bracket equation
/// from beta V - b [V,U] + c [[V,U],U] = U' - alpha U.
pub fn double_bracket_companion(
    params: &Params,
    u: &CMatrix,
    udot: &CMatrix,
) -> Result<CMatrix, ModelError> {
    let alpha = params.scalar("alpha")?;
    let beta = params.scalar("beta")?;
    let b = params.scalar("b")?;
    let cq = params.scalar("c")?;
    let u2 = u * u;
    let terms = vec![
        LinearTerm::scalar(beta),
        LinearTerm::left(b, u.clone()),
        LinearTerm::right(-b, u.clone()),
        LinearTerm::left(cq, u2.clone()),
        LinearTerm::right(cq, u2),
        LinearTerm::sandwich(c(-2.0, 0.0) * cq, u.clone(), u.clone()),
    ];
    let rhs = udot - &u.scale(alpha);
    crate::algebra::solve_flattened(&terms, &rhs).map_err(ModelError::in_block("V"))
}

/// Second-order double-bracket equation: the derivative of the pair flow
/// with V eliminated through [`double_bracket_companion`].
pub fn double_bracket_second(order: usize) -> ModelSpec {
    let rhs = Rhs::second(|_t, pos, vel, params: &Params| {
        let alpha = params.scalar("alpha")?;
        let beta = params.scalar("beta")?;
        let gamma = params.scalar("gamma")?;
        let delta = params.scalar("delta")?;
        let a = params.scalar("a")?;
        let b = params.scalar("b")?;
        let cq = params.scalar("c")?;
        let u = pos.matrix(0)?;
        let ud = vel.matrix(0)?;
        let v = double_bracket_companion(params, u, ud)?;
        let uv = commutator(u, &v)?;
        let udv = commutator(ud, &v)?;
        let u_uv = commutator(u, &uv)?;
        let mut acc = ud.scale(alpha);
        acc = &acc + &u.scale(beta * gamma);
        acc = &acc + &v.scale(beta * delta);
        acc = &acc + &uv.scale(b * delta - a * beta);
        acc = &acc + &udv.scale(b);
        acc = &acc + &u_uv.scale(cq * delta - a * b);
        acc = &acc + &commutator(u, &udv)?.scale(cq);
        acc = &acc + &commutator(ud, &uv)?.scale(cq);
        acc = &acc - &commutator(&uv, &v)?.scale(cq * beta);
        acc = &acc - &commutator(u, &u_uv)?.scale(cq * a);
        let uv_v = commutator(&uv, &v)?;
        acc = &acc - &commutator(u, &uv_v)?.scale(cq * b);
        let inner = commutator(u, &uv_v)?;
        acc = &acc - &commutator(u, &inner)?.scale(cq * cq);
        Ok(like(pos, vec![acc]))
    });
    ModelSpec::new(
        "double-bracket-second",
        "Second-order double-bracket equation with an algebraic companion",
        Shape::matrices("U", 1, order),
        rhs,
    )
    .with_tags(&["matrix", "linearizable", "one-block", "auxiliary-solve"])
    .with_caps(Caps::commutators())
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
        scalar_doc("alpha", "U self-rate"),
        scalar_doc("beta", "companion rate (must keep the solve regular)"),
        scalar_doc("gamma", "U-to-V rate"),
        scalar_doc("delta", "V self-rate"),
        scalar_doc("a", "single-bracket weight in the V flow"),
        scalar_doc("b", "single-bracket weight in the U flow"),
        scalar_doc("c", "double-bracket weight"),
    ])
}

/// First-order tethered pair network:
/// U'_n = sum_m { a_nm V_m + b_nm U_m + c_nm [U_m, V_m] }, V'_n = alpha_n U'_n.
pub fn tethered_pair_flow(sites: usize, order: usize) -> ModelSpec {
    let rhs = Rhs::first(move |_t, state, params: &Params| {
        let total = state.len();
        if total % 2 != 0 {
            return Err(ModelError::shape("pair network needs U blocks then V blocks"));
        }
        let n_sites = total / 2;
        let a = coupling(params, "a", n_sites)?;
        let b = coupling(params, "b", n_sites)?;
        let cc = coupling(params, "c", n_sites)?;
        let alpha = site_grid(params, "alpha", n_sites)?;
        let all = mats(state)?;
        let (u, v) = all.split_at(n_sites);
        let dim = u[0].order();
        let mut du = Vec::with_capacity(n_sites);
        for n in 0..n_sites {
            let mut flow = CMatrix::zeros(dim);
            for m in 0..n_sites {
                flow = &flow + &v[m].scale(a[(n, m)]);
                flow = &flow + &u[m].scale(b[(n, m)]);
                flow = &flow + &commutator(u[m], v[m])?.scale(cc[(n, m)]);
            }
            du.push(flow);
        }
        let mut out = du.clone();
        for n in 0..n_sites {
            out.push(du[n].scale(alpha[n]));
        }
        Ok(like(state, out))
    });
    let defaults = Params::new()
        .with("a", super::spec::ParamValue::Matrix(sym_table(sites, 0.3)))
        .with(
            "b",
            super::spec::ParamValue::Matrix(CMatrix::from_fn(sites, |i, j| {
                c(0.1 / (1.0 + i as f64 + 2.0 * j as f64), 0.0)
            })),
        )
        .with("c", super::spec::ParamValue::Matrix(sym_table(sites, 0.2)))
        .with_real_grid("alpha", &(0..sites).map(|k| 0.5 + 0.1 * k as f64).collect::<Vec<_>>());
    ModelSpec::new(
        "tethered-pair-flow",
        "Pair network whose V blocks follow the U flow proportionally",
        pair_shape("U", "V", sites, order),
        rhs,
    )
    .with_tags(&["matrix", "solvable", "pair", "first-order"])
    .with_caps(Caps::commutators())
    .with_closed_form("tethered-pair")
    .with_defaults(defaults)
    .with_schema(vec![
        table_doc("a", "V-to-U coupling table"),
        table_doc("b", "U-to-U coupling table"),
        table_doc("c", "commutator coupling table"),
        grid_doc("alpha", "per-site tether ratios"),
    ])
}
