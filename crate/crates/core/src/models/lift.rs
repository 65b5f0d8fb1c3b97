//! Lifting matrix models to body models.
//!
//! A matrix model whose right-hand side uses only operations a
//! parameterization is closed under induces a rotation-invariant evolution
//! of the parameterizing scalars and 3-vectors: encode, evaluate the matrix
//! right-hand side, decode. The decode step re-checks that the result lies
//! in the encoding's image, so an operation outside the declared closure
//! class fails loudly rather than silently projecting.

use crate::param::{decode, encode, Block, ParamId, ScalarVec, Vec3};

use super::spec::{Caps, ModelSpec, Params, Rhs};
use super::state::{BlockKind, ModelState, StateBlock};
use super::ModelError;

/// Operations each parameterization is closed under.
pub fn param_caps(p: ParamId) -> Caps {
    match p {
        ParamId::Quaternion => Caps {
            products: true,
            sandwich: true,
            commutators: true,
            odd_powers: true,
            analytic: true,
        },
        ParamId::Traceless2 | ParamId::Antisym4Pair => Caps {
            sandwich: true,
            commutators: true,
            odd_powers: true,
            ..Caps::default()
        },
        ParamId::Antisym4Single { .. } => Caps {
            sandwich: true,
            ..Caps::default()
        },
        ParamId::RowTriple | ParamId::CenteredTriple | ParamId::HomogeneousQuad => Caps {
            sandwich: true,
            ..Caps::default()
        },
        ParamId::Antisym3 => Caps {
            commutators: true,
            odd_powers: true,
            ..Caps::default()
        },
    }
}

/// Whether `available` covers every operation in `required`. Products cover
/// sandwiches, commutators, and odd powers; analytic functions are covered
/// only by analytic closure.
pub fn caps_satisfied(required: Caps, available: Caps) -> bool {
    (!required.products || available.products)
        && (!required.sandwich || available.sandwich || available.products)
        && (!required.commutators || available.commutators || available.products)
        && (!required.odd_powers || available.odd_powers || available.products)
        && (!required.analytic || available.analytic)
}

/// Body-state blocks produced by one matrix block under `p`.
fn lifted_kinds(p: ParamId) -> Vec<BlockKind> {
    match p {
        ParamId::Quaternion => vec![BlockKind::Pair],
        ParamId::Traceless2 | ParamId::Antisym4Single { .. } | ParamId::Antisym3 => {
            vec![BlockKind::Vector]
        }
        ParamId::Antisym4Pair => vec![BlockKind::Vector; 2],
        ParamId::RowTriple | ParamId::CenteredTriple => vec![BlockKind::Vector; 3],
        ParamId::HomogeneousQuad => {
            let mut v = vec![BlockKind::Scalar];
            v.extend(vec![BlockKind::Vector; 4]);
            v
        }
    }
}

fn to_param_block(b: &StateBlock) -> Result<Block, ModelError> {
    Ok(match b {
        StateBlock::Scalar(s) => Block::Scalar(*s),
        StateBlock::Vector(v) => Block::Vector(*v),
        StateBlock::Pair(p) => Block::Pair(*p),
        StateBlock::Matrix(_) => {
            return Err(ModelError::shape("matrix block in a body state"))
        }
    })
}

fn to_state_block(b: Block) -> StateBlock {
    match b {
        Block::Scalar(s) => StateBlock::Scalar(s),
        Block::Vector(v) => StateBlock::Vector(v),
        Block::Pair(p) => StateBlock::Pair(p),
    }
}

/// Groups the flat list of lifted blocks back per matrix block and encodes
/// each group.
fn encode_state(
    p: ParamId,
    group: usize,
    state: &ModelState,
    matrix_names: &[String],
) -> Result<ModelState, ModelError> {
    if state.len() != group * matrix_names.len() {
        return Err(ModelError::shape(format!(
            "expected {} blocks, got {}",
            group * matrix_names.len(),
            state.len()
        )));
    }
    let mut out = Vec::with_capacity(matrix_names.len());
    for (k, name) in matrix_names.iter().enumerate() {
        let blocks = (0..group)
            .map(|j| to_param_block(state.block(k * group + j)?))
            .collect::<Result<Vec<_>, _>>()?;
        let m = encode(&p, &blocks).map_err(ModelError::Encoding)?;
        out.push((name.clone(), StateBlock::Matrix(m)));
    }
    Ok(ModelState::new(out))
}

fn decode_state(
    p: ParamId,
    matrix_state: &ModelState,
    lifted_names: &[String],
) -> Result<ModelState, ModelError> {
    let group = lifted_kinds(p).len();
    let mut out = Vec::with_capacity(lifted_names.len());
    for k in 0..matrix_state.len() {
        let m = matrix_state.matrix(k)?;
        let blocks = decode(&p, m).map_err(ModelError::Encoding)?;
        for (j, b) in blocks.into_iter().enumerate() {
            out.push((lifted_names[k * group + j].clone(), to_state_block(b)));
        }
    }
    Ok(ModelState::new(out))
}

/// Lift a matrix model through a parameterization, giving the derived body
/// model the id `{base-id}-{parameterization}`.
pub fn lift(base: &ModelSpec, p: ParamId) -> Result<ModelSpec, ModelError> {
    let id = format!("{}-{}", base.id, p.name());
    lift_with_id(base, p, &id)
}

/// Lift a matrix model through a parameterization under an explicit id.
pub fn lift_with_id(base: &ModelSpec, p: ParamId, id: &str) -> Result<ModelSpec, ModelError> {
    let available = param_caps(p);
    if !caps_satisfied(base.caps, available) {
        return Err(ModelError::IncompatibleParameterization {
            model: base.id.clone(),
            param: p.name(),
            needs: needs_description(base.caps, available),
        });
    }
    let order = p.order();
    let mut matrix_names = Vec::new();
    for block in &base.shape.blocks {
        match block.kind {
            BlockKind::Matrix(n) if n == order => matrix_names.push(block.name.clone()),
            BlockKind::Matrix(n) => {
                return Err(ModelError::IncompatibleParameterization {
                    model: base.id.clone(),
                    param: p.name(),
                    needs: format!("{n}x{n} blocks, but the encoding yields {order}x{order}"),
                })
            }
            _ => {
                return Err(ModelError::shape(
                    "lift applies to models with matrix blocks only",
                ))
            }
        }
    }

    let kinds = lifted_kinds(p);
    let group = kinds.len();
    let mut lifted_blocks = Vec::with_capacity(matrix_names.len() * group);
    for name in &matrix_names {
        if group == 1 {
            lifted_blocks.push((name.clone(), kinds[0]));
        } else {
            for (j, kind) in kinds.iter().enumerate() {
                lifted_blocks.push((format!("{name}_{}", j + 1), *kind));
            }
        }
    }
    let shape = super::spec::Shape::new(lifted_blocks);
    let lifted_names: Vec<String> = shape.blocks.iter().map(|b| b.name.clone()).collect();

    let base_rhs = base.rhs().clone();
    let names_enc = matrix_names.clone();
    let names_dec = lifted_names.clone();
    let rhs = match base_rhs {
        Rhs::First(f) => {
            let names_enc = names_enc.clone();
            let names_dec = names_dec.clone();
            Rhs::first(move |t: f64, state: &ModelState, params: &Params| {
                let m_state = encode_state(p, group, state, &names_enc)?;
                let m_flow = f(t, &m_state, params)?;
                decode_state(p, &m_flow, &names_dec)
            })
        }
        Rhs::Second(f) => Rhs::second(
            move |t: f64, pos: &ModelState, vel: &ModelState, params: &Params| {
                let m_pos = encode_state(p, group, pos, &names_enc)?;
                let m_vel = encode_state(p, group, vel, &names_enc)?;
                let m_acc = f(t, &m_pos, &m_vel, params)?;
                decode_state(p, &m_acc, &names_dec)
            },
        ),
    };

    let tags: Vec<String> = base
        .tags
        .iter()
        .filter(|t| t.as_str() != "matrix")
        .cloned()
        .chain(["vector".to_string(), "lifted".to_string()])
        .collect();
    let tag_refs: Vec<&str> = tags.iter().map(|s| s.as_str()).collect();

    let mut spec = ModelSpec::new(id, &format!("{} (bodies)", base.title), shape, rhs)
        .with_tags(&tag_refs)
        .with_defaults(base.defaults.clone())
        .with_schema(base.schema.clone())
        .with_caps(base.caps);
    if let Some(b) = base.boundary {
        spec = spec.with_boundary(b);
    }
    for step in &base.provenance {
        spec = spec.with_provenance(step);
    }
    spec = spec.with_provenance(&format!("lift:{}", p.name()));
    Ok(spec)
}

fn needs_description(required: Caps, available: Caps) -> String {
    let mut missing = Vec::new();
    if required.products && !available.products {
        missing.push("products");
    }
    if required.sandwich && !(available.sandwich || available.products) {
        missing.push("sandwiches");
    }
    if required.commutators && !(available.commutators || available.products) {
        missing.push("commutators");
    }
    if required.odd_powers && !(available.odd_powers || available.products) {
        missing.push("odd powers");
    }
    if required.analytic && !available.analytic {
        missing.push("analytic functions");
    }
    missing.join(", ")
}

/// Decoded image of an encoded state; used by tests and the verifier to
/// sanity-check round trips.
pub fn roundtrip_state(p: ParamId, state: &ModelState) -> Result<ModelState, ModelError> {
    let group = lifted_kinds(p).len();
    if state.len() % group != 0 {
        return Err(ModelError::shape("state does not group into encodings"));
    }
    let fake_names: Vec<String> = (0..state.len() / group).map(|k| format!("b{k}")).collect();
    let enc = encode_state(p, group, state, &fake_names)?;
    decode_state(p, &enc, state.names())
}

/// Random body state drawn block-by-block for a lifted shape; thin wrapper
/// kept here so property tests can build states without a spec.
pub fn body_state(p: ParamId, count: usize, entry: impl Fn(usize) -> f64) -> ModelState {
    let kinds = lifted_kinds(p);
    let mut blocks = Vec::new();
    let mut k = 0;
    let mut next = || {
        let v = entry(k);
        k += 1;
        v
    };
    for b in 0..count {
        for (j, kind) in kinds.iter().enumerate() {
            let name = if kinds.len() == 1 {
                format!("b{b}")
            } else {
                format!("b{b}_{}", j + 1)
            };
            let block = match kind {
                BlockKind::Scalar => StateBlock::Scalar(crate::algebra::c(next(), next())),
                BlockKind::Vector => StateBlock::Vector(Vec3::new(
                    crate::algebra::c(next(), next()),
                    crate::algebra::c(next(), next()),
                    crate::algebra::c(next(), next()),
                )),
                BlockKind::Pair => StateBlock::Pair(ScalarVec::new(
                    crate::algebra::c(next(), next()),
                    Vec3::new(
                        crate::algebra::c(next(), next()),
                        crate::algebra::c(next(), next()),
                        crate::algebra::c(next(), next()),
                    ),
                )),
                BlockKind::Matrix(_) => unreachable!("lifted kinds are never matrices"),
            };
            blocks.push((name, block));
        }
    }
    ModelState::new(blocks)
}
