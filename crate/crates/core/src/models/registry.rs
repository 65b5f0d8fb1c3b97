//! Model catalog: construction by id and enumeration.

use crate::param::ParamId;

use super::lift::lift_with_id;
use super::spec::{Boundary, ModelSpec};
use super::{matrix, vector, ModelError};

/// Size knobs for instantiating a model family.
#[derive(Clone, Copy, Debug)]
pub struct BuildOptions {
    /// Order of each square matrix block.
    pub matrix_order: usize,
    /// Number of chain or ring sites (also the grid edge for grid models).
    pub sites: usize,
    /// Boundary rule for chains that support both.
    pub boundary: Boundary,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            matrix_order: 2,
            sites: 3,
            boundary: Boundary::Periodic,
        }
    }
}

/// Every directly constructible model id, in catalog order. Derived ids
/// (lifts registered under their own names) are listed after their bases.
pub const MODEL_IDS: &[&str] = &[
    // Matrix models.
    "matrix-master",
    "matrix-gyro",
    "matrix-gyro-net",
    "nonabelian-toda",
    "product-difference-chain",
    "volterra",
    "volterra-chain",
    "volterra-chain-damped",
    "matrix-riccati",
    "matrix-logderiv-net",
    "matrix-cubic",
    "matrix-radical-drift",
    "matrix-radical-cubic",
    "tethered-pair-chain",
    "quadratic-drift-single",
    "quadratic-drift-chain",
    "neighbor-ratio-chain",
    "nahm",
    "nahm-second-order",
    "master-pair",
    "matrix-gyro-ring",
    "matrix-riccati-general",
    "riccati-grid",
    "hopping-chain",
    "neighbor-ratio-flow",
    "lax-pair-net",
    "lax-pair-net-balanced",
    "double-bracket-pair",
    "double-bracket-second",
    "tethered-pair-flow",
    // Vector models.
    "radial-drag-oscillator",
    "kernel-gyro-oscillator",
    "gyro-oscillator",
    "power-gyro",
    "uniform-gyro",
    "inverse-square-gyro",
    "monopole-gyro",
    "associated-drag-pair",
    "gyro-pair",
    "cubic-oscillator",
    "vector-toda",
    "paired-difference-chain",
    "wedge-flow",
    "wedge-ring",
    "tethered-gyro",
    "bracket-body",
    // Registered lifts.
    "toda-bodies",
    "gyro-net-bodies",
    "volterra-bodies",
    "logderiv-bodies",
    "ratio-chain-bodies",
    "quadratic-drift-bodies",
    "riccati-grid-bodies",
    "nahm-bodies",
    "hopping-bodies",
    "neighbor-ratio-bodies",
    "lax-pair-bodies",
];

/// Builds the model with the given id at the requested sizes.
pub fn construct(id: &str, opts: &BuildOptions) -> Result<ModelSpec, ModelError> {
    let k = opts.matrix_order;
    let n = opts.sites;
    let b = opts.boundary;
    let spec = match id {
        "matrix-master" => matrix::matrix_master(k),
        "matrix-gyro" => matrix::matrix_gyro(k),
        "matrix-gyro-net" => matrix::matrix_gyro_net(n, k),
        "nonabelian-toda" => matrix::nonabelian_toda(n, k, b),
        "product-difference-chain" => matrix::product_difference_chain(n, k, b),
        "volterra" => matrix::volterra(n, k, b),
        "volterra-chain" => matrix::volterra_chain(n, k),
        "volterra-chain-damped" => matrix::volterra_chain_damped(n, k),
        "matrix-riccati" => matrix::matrix_riccati(k),
        "matrix-logderiv-net" => matrix::matrix_logderiv_net(n, k),
        "matrix-cubic" => matrix::matrix_cubic(k),
        "matrix-radical-drift" => matrix::matrix_radical_drift(k),
        "matrix-radical-cubic" => matrix::matrix_radical_cubic(k),
        "tethered-pair-chain" => matrix::tethered_pair_chain(n, k),
        "quadratic-drift-single" => matrix::quadratic_drift_single(k),
        "quadratic-drift-chain" => matrix::quadratic_drift_chain(n, k),
        "neighbor-ratio-chain" => matrix::neighbor_ratio_chain(n, k),
        "nahm" => matrix::nahm(k),
        "nahm-second-order" => matrix::nahm_second_order(k),
        "master-pair" => matrix::master_pair(k),
        "matrix-gyro-ring" => matrix::matrix_gyro_ring(n, k),
        "matrix-riccati-general" => matrix::matrix_riccati_general(k),
        "riccati-grid" => matrix::riccati_grid(2, k),
        "hopping-chain" => matrix::hopping_chain(n, k, b),
        "neighbor-ratio-flow" => matrix::neighbor_ratio_flow(n, k),
        "lax-pair-net" => matrix::lax_pair_net(n, k),
        "lax-pair-net-balanced" => matrix::lax_pair_net_balanced(n, k),
        "double-bracket-pair" => matrix::double_bracket_pair(k),
        "double-bracket-second" => matrix::double_bracket_second(k),
        "tethered-pair-flow" => matrix::tethered_pair_flow(n, k),
        "radial-drag-oscillator" => vector::radial_drag_oscillator(),
        "kernel-gyro-oscillator" => vector::kernel_gyro_oscillator(),
        "gyro-oscillator" => vector::gyro_oscillator(),
        "power-gyro" => vector::power_gyro(),
        "uniform-gyro" => vector::uniform_gyro(),
        "inverse-square-gyro" => vector::inverse_square_gyro(),
        "monopole-gyro" => vector::monopole_gyro(),
        "associated-drag-pair" => vector::associated_drag_pair(),
        "gyro-pair" => vector::gyro_pair(),
        "cubic-oscillator" => vector::cubic_oscillator(),
        "vector-toda" => vector::vector_toda(n, b),
        "paired-difference-chain" => vector::paired_difference_chain(n, b),
        "wedge-flow" => vector::wedge_flow(),
        "wedge-ring" => vector::wedge_ring(n),
        "tethered-gyro" => vector::tethered_gyro(n),
        "bracket-body" => vector::bracket_body(),
        "toda-bodies" => lifted(&matrix::nonabelian_toda(n, 2, b), ParamId::Traceless2, id)?,
        "gyro-net-bodies" => lifted(&matrix::matrix_gyro_net(n, 2), ParamId::Traceless2, id)?,
        "volterra-bodies" => lifted(&matrix::volterra_chain_damped(n, 2), ParamId::Quaternion, id)?,
        "logderiv-bodies" => lifted(&matrix::matrix_logderiv_net(n, 2), ParamId::Quaternion, id)?,
        "ratio-chain-bodies" => {
            lifted(&matrix::neighbor_ratio_chain(n, 2), ParamId::Quaternion, id)?
        }
        "quadratic-drift-bodies" => {
            lifted(&matrix::quadratic_drift_chain(n, 2), ParamId::Quaternion, id)?
        }
        "riccati-grid-bodies" => {
            lifted(&matrix::riccati_grid(2, 2), ParamId::Quaternion, id)?
        }
        "nahm-bodies" => lifted(&matrix::nahm_second_order(2), ParamId::Traceless2, id)?,
        "hopping-bodies" => lifted(&matrix::hopping_chain(n, 2, b), ParamId::Traceless2, id)?,
        "neighbor-ratio-bodies" => {
            lifted(&matrix::neighbor_ratio_flow(n, 2), ParamId::Quaternion, id)?
        }
        "lax-pair-bodies" => {
            let mut spec = lifted(&matrix::lax_pair_net_balanced(n, 2), ParamId::Traceless2, id)?;
            spec.monitors = vec!["total-wedge".to_string(), "energy-qp".to_string()];
            spec
        }
        _ => {
            return Err(ModelError::param(
                "id",
                format!("unknown model id '{id}'"),
            ))
        }
    };
    Ok(spec)
}

fn lifted(base: &ModelSpec, p: ParamId, id: &str) -> Result<ModelSpec, ModelError> {
    lift_with_id(base, p, id)
}

/// The full catalog at default sizes.
pub fn registry() -> Vec<ModelSpec> {
    MODEL_IDS
        .iter()
        .map(|id| {
            construct(id, &BuildOptions::default())
                .expect("every cataloged id constructs at default sizes")
        })
        .collect()
}
