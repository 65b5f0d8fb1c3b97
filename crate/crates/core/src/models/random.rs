//! Deterministic random states for tests and verification suites.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{c, CMatrix, Complex};
use crate::param::{ScalarVec, Vec3};

use super::spec::ModelSpec;
use super::state::{BlockKind, ModelState, StateBlock};
use super::ModelError;

const MAX_ATTEMPTS: usize = 64;
const COND_LIMIT: f64 = 1e6;

fn draw_complex(rng: &mut ChaCha8Rng, real_only: bool) -> Complex {
    // Uniform on the unit disc (or [-1, 1] for real states), kept away from
    // zero so inverses and radial denominators stay well scaled.
    loop {
        let re: f64 = rng.gen_range(-1.0..1.0);
        let im: f64 = if real_only { 0.0 } else { rng.gen_range(-1.0..1.0) };
        let n = (re * re + im * im).sqrt();
        if n <= 1.0 && n >= 0.05 {
            return c(re, im);
        }
    }
}

fn draw_block(rng: &mut ChaCha8Rng, kind: BlockKind, real_only: bool) -> StateBlock {
    match kind {
        BlockKind::Scalar => StateBlock::Scalar(draw_complex(rng, real_only)),
        BlockKind::Vector => StateBlock::Vector(Vec3::new(
            draw_complex(rng, real_only),
            draw_complex(rng, real_only),
            draw_complex(rng, real_only),
        )),
        BlockKind::Pair => StateBlock::Pair(ScalarVec::new(
            draw_complex(rng, real_only),
            Vec3::new(
                draw_complex(rng, real_only),
                draw_complex(rng, real_only),
                draw_complex(rng, real_only),
            ),
        )),
        BlockKind::Matrix(n) => {
            // Unit-disc entries plus a diagonal shift; keeps draws far from
            // the singular set that inverse-bearing models reject anyway.
            let mut m = CMatrix::from_fn(n, |_, _| draw_complex(rng, real_only));
            let shift = c(1.2, if real_only { 0.0 } else { 0.3 });
            m = m.add_scalar(shift);
            StateBlock::Matrix(m)
        }
    }
}

fn acceptable(spec: &ModelSpec, state: &ModelState) -> bool {
    for block in state.blocks() {
        if let StateBlock::Matrix(m) = block {
            let k = crate::algebra::condition_estimate(m);
            if !k.is_finite() || k > COND_LIMIT {
                return false;
            }
        }
    }
    match spec.derivative(0.0, state, &spec.defaults) {
        Ok(d) => d.is_finite() && d.max_abs() < 1e6,
        Err(_) => false,
    }
}

/// Deterministic full state (positions and, for second-order models,
/// velocities) for `spec`, rejecting draws on which the right-hand side is
/// ill-conditioned or fails.
pub fn seeded_state(spec: &ModelSpec, seed: u64) -> Result<ModelState, ModelError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blocks = spec.full_blocks();
    for _ in 0..MAX_ATTEMPTS {
        let state = ModelState::new(
            blocks
                .iter()
                .map(|b| (b.name.clone(), draw_block(&mut rng, b.kind, spec.real_state)))
                .collect(),
        );
        if acceptable(spec, &state) {
            return Ok(state);
        }
    }
    Err(ModelError::degenerate(
        spec.id.clone(),
        format!("no acceptable random state after {MAX_ATTEMPTS} draws"),
    ))
}
