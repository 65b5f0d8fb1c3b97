//! Model descriptions: named parameters, state shapes, right-hand sides,
//! and the capability flags the lift machinery validates against.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{CMatrix, Complex};
use crate::param::Vec3;

use super::state::{BlockKind, ModelState, StateBlock};
use super::ModelError;

/// A named constant of a model.
///
/// Scalars are complex; `grid` holds one complex number per chain site (or
/// per convolution offset), `matrix` holds a square table of complex
/// couplings or a constant matrix, `vector` a constant 3-vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamValueRepr", into = "ParamValueRepr")]
pub enum ParamValue {
    Scalar(Complex),
    Vector(Vec3),
    Grid(Vec<Complex>),
    Matrix(CMatrix),
}

/// Serialized form: complex numbers as `[re, im]` pairs.
#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ParamValueRepr {
    Scalar([f64; 2]),
    Vector([[f64; 2]; 3]),
    Grid(Vec<[f64; 2]>),
    Matrix(Vec<Vec<[f64; 2]>>),
}

fn cx(p: [f64; 2]) -> Complex {
    Complex::new(p[0], p[1])
}

fn px(z: Complex) -> [f64; 2] {
    [z.re, z.im]
}

impl TryFrom<ParamValueRepr> for ParamValue {
    type Error = String;

    fn try_from(r: ParamValueRepr) -> Result<Self, String> {
        Ok(match r {
            ParamValueRepr::Scalar(z) => ParamValue::Scalar(cx(z)),
            ParamValueRepr::Vector([x, y, z]) => {
                ParamValue::Vector(Vec3::new(cx(x), cx(y), cx(z)))
            }
            ParamValueRepr::Grid(g) => ParamValue::Grid(g.into_iter().map(cx).collect()),
            ParamValueRepr::Matrix(rows) => {
                let n = rows.len();
                if rows.iter().any(|r| r.len() != n) {
                    return Err("matrix parameter must be square".into());
                }
                let m = CMatrix::from_fn(n, |i, j| cx(rows[i][j]));
                ParamValue::Matrix(m)
            }
        })
    }
}

impl From<ParamValue> for ParamValueRepr {
    fn from(v: ParamValue) -> Self {
        match v {
            ParamValue::Scalar(z) => ParamValueRepr::Scalar(px(z)),
            ParamValue::Vector(v) => ParamValueRepr::Vector([px(v.x), px(v.y), px(v.z)]),
            ParamValue::Grid(g) => ParamValueRepr::Grid(g.into_iter().map(px).collect()),
            ParamValue::Matrix(m) => {
                let n = m.order();
                ParamValueRepr::Matrix(
                    (0..n)
                        .map(|i| (0..n).map(|j| px(m[(i, j)])).collect())
                        .collect(),
                )
            }
        }
    }
}

/// Named model constants, ordered by name for deterministic serialization.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Params(pub BTreeMap<String, ParamValue>);

impl Params {
    pub fn new() -> Self {
        Params(BTreeMap::new())
    }

    pub fn with(mut self, name: &str, value: ParamValue) -> Self {
        self.0.insert(name.to_string(), value);
        self
    }

    pub fn with_scalar(self, name: &str, z: Complex) -> Self {
        self.with(name, ParamValue::Scalar(z))
    }

    pub fn with_real(self, name: &str, x: f64) -> Self {
        self.with_scalar(name, Complex::new(x, 0.0))
    }

    pub fn with_grid(self, name: &str, g: Vec<Complex>) -> Self {
        self.with(name, ParamValue::Grid(g))
    }

    pub fn with_real_grid(self, name: &str, g: &[f64]) -> Self {
        self.with_grid(name, g.iter().map(|&x| Complex::new(x, 0.0)).collect())
    }

    pub fn with_matrix(self, name: &str, m: CMatrix) -> Self {
        self.with(name, ParamValue::Matrix(m))
    }

    pub fn with_vector(self, name: &str, v: Vec3) -> Self {
        self.with(name, ParamValue::Vector(v))
    }

    pub fn set(&mut self, name: &str, value: ParamValue) {
        self.0.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<&ParamValue> {
        self.0.get(name)
    }

    pub fn scalar(&self, name: &str) -> Result<Complex, ModelError> {
        match self.0.get(name) {
            Some(ParamValue::Scalar(z)) => Ok(*z),
            Some(_) => Err(ModelError::param(name, "expected a scalar")),
            None => Err(ModelError::param(name, "missing")),
        }
    }

    pub fn real(&self, name: &str) -> Result<f64, ModelError> {
        let z = self.scalar(name)?;
        if z.im != 0.0 {
            return Err(ModelError::param(name, "expected a real scalar"));
        }
        Ok(z.re)
    }

    pub fn vector(&self, name: &str) -> Result<Vec3, ModelError> {
        match self.0.get(name) {
            Some(ParamValue::Vector(v)) => Ok(*v),
            Some(_) => Err(ModelError::param(name, "expected a 3-vector")),
            None => Err(ModelError::param(name, "missing")),
        }
    }

    pub fn grid(&self, name: &str) -> Result<&[Complex], ModelError> {
        match self.0.get(name) {
            Some(ParamValue::Grid(g)) => Ok(g),
            Some(_) => Err(ModelError::param(name, "expected a grid")),
            None => Err(ModelError::param(name, "missing")),
        }
    }

    /// Grid entry with cyclic index wrap.
    pub fn grid_at(&self, name: &str, k: isize) -> Result<Complex, ModelError> {
        let g = self.grid(name)?;
        if g.is_empty() {
            return Err(ModelError::param(name, "empty grid"));
        }
        Ok(g[k.rem_euclid(g.len() as isize) as usize])
    }

    pub fn matrix(&self, name: &str) -> Result<&CMatrix, ModelError> {
        match self.0.get(name) {
            Some(ParamValue::Matrix(m)) => Ok(m),
            Some(_) => Err(ModelError::param(name, "expected a matrix")),
            None => Err(ModelError::param(name, "missing")),
        }
    }

    /// Entry of a square coupling table.
    pub fn table_at(&self, name: &str, i: usize, j: usize) -> Result<Complex, ModelError> {
        let m = self.matrix(name)?;
        if i >= m.order() || j >= m.order() {
            return Err(ModelError::param(
                name,
                "coupling table smaller than the chain",
            ));
        }
        Ok(m[(i, j)])
    }

    /// Conjugates every entry (used to evaluate a model on the conjugate
    /// branch during complexification).
    pub fn conjugated(&self) -> Params {
        let map = self
            .0
            .iter()
            .map(|(k, v)| {
                let w = match v {
                    ParamValue::Scalar(z) => ParamValue::Scalar(z.conj()),
                    ParamValue::Vector(v) => {
                        ParamValue::Vector(Vec3::new(v.x.conj(), v.y.conj(), v.z.conj()))
                    }
                    ParamValue::Grid(g) => {
                        ParamValue::Grid(g.iter().map(|z| z.conj()).collect())
                    }
                    ParamValue::Matrix(m) => ParamValue::Matrix(m.map(|z| z.conj())),
                };
                (k.clone(), w)
            })
            .collect();
        Params(map)
    }
}

/// Kind tag for a parameter, used in schemas and the CLI listing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamKind {
    Scalar,
    Vector,
    Grid,
    Matrix,
}

impl fmt::Display for ParamKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ParamKind::Scalar => "scalar",
            ParamKind::Vector => "vector",
            ParamKind::Grid => "grid",
            ParamKind::Matrix => "matrix",
        };
        f.write_str(s)
    }
}

/// One entry of a model's parameter schema.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParamDesc {
    pub name: String,
    pub kind: ParamKind,
    pub doc: String,
}

impl ParamDesc {
    pub fn new(name: &str, kind: ParamKind, doc: &str) -> Self {
        ParamDesc {
            name: name.to_string(),
            kind,
            doc: doc.to_string(),
        }
    }
}

/// Boundary handling for chain models.
///
/// `Periodic` wraps site indices cyclically. `FreeEnds` drops every
/// right-hand-side term that references a site outside the chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    FreeEnds,
    Periodic,
}

/// Structural operations a right-hand side performs on its matrix blocks.
///
/// A parameterization can express a model only if it is closed under every
/// operation the model uses; linear combinations are always available.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Caps {
    /// General products and one-sided inverses, in arbitrary positions.
    pub products: bool,
    /// Symmetric inversion patterns `X Y^-1 X` only.
    pub sandwich: bool,
    /// Commutators `[X, Y]`, possibly nested.
    pub commutators: bool,
    /// Odd integer powers of a single block.
    pub odd_powers: bool,
    /// Analytic functions (square roots, fractional powers) of a block.
    pub analytic: bool,
}

impl Caps {
    pub fn linear() -> Self {
        Caps::default()
    }

    pub fn products() -> Self {
        Caps {
            products: true,
            ..Caps::default()
        }
    }

    pub fn sandwich() -> Self {
        Caps {
            sandwich: true,
            ..Caps::default()
        }
    }

    pub fn commutators() -> Self {
        Caps {
            commutators: true,
            ..Caps::default()
        }
    }

    pub fn and_odd_powers(mut self) -> Self {
        self.odd_powers = true;
        self
    }

    pub fn and_analytic(mut self) -> Self {
        self.analytic = true;
        self
    }
}

/// Description of one state block.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockDesc {
    pub name: String,
    pub kind: BlockKind,
}

/// The position-block layout of a model (velocities, for second-order
/// models, mirror this layout with primed names).
#[derive(Clone, Debug, PartialEq)]
pub struct Shape {
    pub blocks: Vec<BlockDesc>,
}

impl Shape {
    pub fn new(blocks: Vec<(String, BlockKind)>) -> Self {
        Shape {
            blocks: blocks
                .into_iter()
                .map(|(name, kind)| BlockDesc { name, kind })
                .collect(),
        }
    }

    /// `count` matrix blocks of the given order, named `prefix1..prefixN`
    /// (or just `prefix` when `count == 1`).
    pub fn matrices(prefix: &str, count: usize, order: usize) -> Self {
        Shape::numbered(prefix, count, BlockKind::Matrix(order))
    }

    pub fn vectors(prefix: &str, count: usize) -> Self {
        Shape::numbered(prefix, count, BlockKind::Vector)
    }

    pub fn pairs(prefix: &str, count: usize) -> Self {
        Shape::numbered(prefix, count, BlockKind::Pair)
    }

    fn numbered(prefix: &str, count: usize, kind: BlockKind) -> Self {
        let blocks = (0..count)
            .map(|k| {
                let name = if count == 1 {
                    prefix.to_string()
                } else {
                    format!("{prefix}{}", k + 1)
                };
                BlockDesc { name, kind }
            })
            .collect();
        Shape { blocks }
    }

    /// Concatenates two shapes (used for models with mixed block lists).
    pub fn join(mut self, other: Shape) -> Self {
        self.blocks.extend(other.blocks);
        self
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// A zero state with this layout.
    pub fn zero_state(&self) -> ModelState {
        ModelState::new(
            self.blocks
                .iter()
                .map(|b| (b.name.clone(), b.kind.zero()))
                .collect(),
        )
    }
}

/// First-order right-hand side: `(t, state, params) -> d state / dt`.
pub type FirstOrderFn =
    dyn Fn(f64, &ModelState, &Params) -> Result<ModelState, ModelError> + Send + Sync;

/// Second-order right-hand side: `(t, positions, velocities, params) ->
/// accelerations`, with the acceleration state mirroring the position
/// layout.
pub type SecondOrderFn =
    dyn Fn(f64, &ModelState, &ModelState, &Params) -> Result<ModelState, ModelError> + Send + Sync;

/// A model's equations of motion.
#[derive(Clone)]
pub enum Rhs {
    First(Arc<FirstOrderFn>),
    Second(Arc<SecondOrderFn>),
}

impl Rhs {
    pub fn first<F>(f: F) -> Self
    where
        F: Fn(f64, &ModelState, &Params) -> Result<ModelState, ModelError>
            + Send
            + Sync
            + 'static,
    {
        Rhs::First(Arc::new(f))
    }

    pub fn second<F>(f: F) -> Self
    where
        F: Fn(f64, &ModelState, &ModelState, &Params) -> Result<ModelState, ModelError>
            + Send
            + Sync
            + 'static,
    {
        Rhs::Second(Arc::new(f))
    }

    pub fn order(&self) -> usize {
        match self {
            Rhs::First(_) => 1,
            Rhs::Second(_) => 2,
        }
    }
}

/// A complete model: identity, state layout, constants, equations of
/// motion, and verification hooks.
#[derive(Clone)]
pub struct ModelSpec {
    pub id: String,
    pub title: String,
    pub tags: Vec<String>,
    pub shape: Shape,
    pub boundary: Option<Boundary>,
    pub defaults: Params,
    pub schema: Vec<ParamDesc>,
    pub caps: Caps,
    /// True when the model preserves real states (real initial data and
    /// real parameters keep the state real).
    pub real_state: bool,
    /// Identifier of the closed-form solver operation covering this model,
    /// when one exists.
    pub closed_form: Option<String>,
    /// Monitor identifiers the verification layer should track.
    pub monitors: Vec<String>,
    /// Construction chain for derived models (lifts and transforms).
    pub provenance: Vec<String>,
    rhs: Rhs,
}

impl ModelSpec {
    pub fn new(id: &str, title: &str, shape: Shape, rhs: Rhs) -> Self {
        ModelSpec {
            id: id.to_string(),
            title: title.to_string(),
            tags: Vec::new(),
            shape,
            boundary: None,
            defaults: Params::new(),
            schema: Vec::new(),
            caps: Caps::default(),
            real_state: false,
            closed_form: None,
            monitors: Vec::new(),
            provenance: Vec::new(),
            rhs,
        }
    }

    pub fn with_tags(mut self, tags: &[&str]) -> Self {
        self.tags = tags.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn with_defaults(mut self, defaults: Params) -> Self {
        self.defaults = defaults;
        self
    }

    pub fn with_schema(mut self, schema: Vec<ParamDesc>) -> Self {
        self.schema = schema;
        self
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = Some(boundary);
        self
    }

    pub fn with_caps(mut self, caps: Caps) -> Self {
        self.caps = caps;
        self
    }

    pub fn with_real_state(mut self) -> Self {
        self.real_state = true;
        self
    }

    pub fn with_closed_form(mut self, op: &str) -> Self {
        self.closed_form = Some(op.to_string());
        self
    }

    pub fn with_monitors(mut self, monitors: &[&str]) -> Self {
        self.monitors = monitors.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn with_provenance(mut self, step: &str) -> Self {
        self.provenance.push(step.to_string());
        self
    }

    /// 1 for first-order models, 2 for second-order ones.
    pub fn order(&self) -> usize {
        self.rhs.order()
    }

    pub fn rhs(&self) -> &Rhs {
        &self.rhs
    }

    /// Layout of the full integration state: position blocks, then (for
    /// second-order models) velocity blocks with primed names.
    pub fn full_blocks(&self) -> Vec<BlockDesc> {
        let mut blocks = self.shape.blocks.clone();
        if self.order() == 2 {
            blocks.extend(self.shape.blocks.iter().map(|b| BlockDesc {
                name: format!("{}'", b.name),
                kind: b.kind,
            }));
        }
        blocks
    }

    /// A zero state with the full layout, usable as an unflatten template.
    pub fn template_state(&self) -> ModelState {
        ModelState::new(
            self.full_blocks()
                .into_iter()
                .map(|b| (b.name, b.kind.zero()))
                .collect(),
        )
    }

    /// Number of real coordinates in the full state.
    pub fn state_dim(&self) -> usize {
        self.full_blocks().iter().map(|b| b.kind.dim()).sum()
    }

    /// Checks that `state` matches the full layout.
    pub fn check_state(&self, state: &ModelState) -> Result<(), ModelError> {
        let blocks = self.full_blocks();
        if state.len() != blocks.len() {
            return Err(ModelError::shape(format!(
                "model {} expects {} blocks, state has {}",
                self.id,
                blocks.len(),
                state.len()
            )));
        }
        for (desc, got) in blocks.iter().zip(state.blocks()) {
            if desc.kind != got.kind() {
                return Err(ModelError::shape(format!(
                    "model {} block {} expects {}, state has {}",
                    self.id,
                    desc.name,
                    desc.kind,
                    got.kind()
                )));
            }
        }
        Ok(())
    }

    /// Splits a full state into positions and (for second-order models)
    /// velocities.
    pub fn split(&self, state: &ModelState) -> (ModelState, Option<ModelState>) {
        if self.order() == 2 {
            let (pos, vel) = state.split_at(self.shape.len());
            (pos, Some(vel))
        } else {
            (state.clone(), None)
        }
    }

    /// Evaluates the equations of motion. For first-order models this is
    /// the state derivative; for second-order models it is the acceleration
    /// of the position blocks.
    pub fn rhs_blocks(
        &self,
        t: f64,
        state: &ModelState,
        params: &Params,
    ) -> Result<ModelState, ModelError> {
        self.check_state(state)?;
        match &self.rhs {
            Rhs::First(f) => f(t, state, params),
            Rhs::Second(f) => {
                let (pos, vel) = state.split_at(self.shape.len());
                f(t, &pos, &vel, params)
            }
        }
    }

    /// Full time derivative of the integration state: equal to
    /// [`ModelSpec::rhs_blocks`] for first-order models, and to velocities
    /// followed by accelerations for second-order ones.
    pub fn derivative(
        &self,
        t: f64,
        state: &ModelState,
        params: &Params,
    ) -> Result<ModelState, ModelError> {
        self.check_state(state)?;
        match &self.rhs {
            Rhs::First(f) => f(t, state, params),
            Rhs::Second(f) => {
                let (pos, vel) = state.split_at(self.shape.len());
                let acc = f(t, &pos, &vel, params)?;
                if acc.len() != pos.len() {
                    return Err(ModelError::shape(format!(
                        "model {} returned {} acceleration blocks for {} positions",
                        self.id,
                        acc.len(),
                        pos.len()
                    )));
                }
                let names: Vec<String> = state.names().to_vec();
                let blocks: Vec<StateBlock> = vel
                    .blocks()
                    .iter()
                    .chain(acc.blocks().iter())
                    .cloned()
                    .collect();
                Ok(ModelState::new(names.into_iter().zip(blocks).collect()))
            }
        }
    }

    /// Derivative in flat coordinates, as the integrator consumes it.
    pub fn flat_derivative(
        &self,
        t: f64,
        flat: &[f64],
        params: &Params,
        template: &ModelState,
    ) -> Result<Vec<f64>, ModelError> {
        let state = template.unflatten_like(flat)?;
        Ok(self.derivative(t, &state, params)?.flatten())
    }
}

impl fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelSpec")
            .field("id", &self.id)
            .field("order", &self.order())
            .field("blocks", &self.shape.len())
            .finish()
    }
}

/// Chain-site index resolution under a boundary rule. Returns `None` for an
/// out-of-range site under free ends; such terms are dropped.
pub fn site(boundary: Boundary, n: isize, count: usize) -> Option<usize> {
    match boundary {
        Boundary::Periodic => Some(n.rem_euclid(count as isize) as usize),
        Boundary::FreeEnds => {
            if n < 0 || n >= count as isize {
                None
            } else {
                Some(n as usize)
            }
        }
    }
}
