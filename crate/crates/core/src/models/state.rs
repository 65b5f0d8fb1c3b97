//! Model states: ordered collections of named blocks, each a matrix, a
//! scalar/vector pair, a bare 3-vector, or a scalar, with a lossless
//! round-trip to flat `f64` arrays for the integrator.

use std::fmt;

use crate::algebra::{CMatrix, Complex};
use crate::param::{ScalarVec, Vec3};

use super::ModelError;

/// One dynamical variable of a model.
#[derive(Clone, Debug, PartialEq)]
pub enum StateBlock {
    /// A dense complex square matrix.
    Matrix(CMatrix),
    /// A complex scalar paired with a complex 3-vector.
    Pair(ScalarVec),
    /// A complex 3-vector.
    Vector(Vec3),
    /// A single complex scalar.
    Scalar(Complex),
}

impl StateBlock {
    /// Number of real coordinates the block flattens to.
    pub fn dim(&self) -> usize {
        match self {
            StateBlock::Matrix(m) => 2 * m.order() * m.order(),
            StateBlock::Pair(_) => 8,
            StateBlock::Vector(_) => 6,
            StateBlock::Scalar(_) => 2,
        }
    }

    /// The block kind and size, used for shape agreement checks.
    pub fn kind(&self) -> BlockKind {
        match self {
            StateBlock::Matrix(m) => BlockKind::Matrix(m.order()),
            StateBlock::Pair(_) => BlockKind::Pair,
            StateBlock::Vector(_) => BlockKind::Vector,
            StateBlock::Scalar(_) => BlockKind::Scalar,
        }
    }

    pub fn as_matrix(&self) -> Result<&CMatrix, ModelError> {
        match self {
            StateBlock::Matrix(m) => Ok(m),
            other => Err(ModelError::shape(format!(
                "expected a matrix block, found {}",
                other.kind()
            ))),
        }
    }

    pub fn as_pair(&self) -> Result<&ScalarVec, ModelError> {
        match self {
            StateBlock::Pair(p) => Ok(p),
            other => Err(ModelError::shape(format!(
                "expected a scalar/vector pair block, found {}",
                other.kind()
            ))),
        }
    }

    pub fn as_vector(&self) -> Result<&Vec3, ModelError> {
        match self {
            StateBlock::Vector(v) => Ok(v),
            other => Err(ModelError::shape(format!(
                "expected a vector block, found {}",
                other.kind()
            ))),
        }
    }

    pub fn as_scalar(&self) -> Result<Complex, ModelError> {
        match self {
            StateBlock::Scalar(s) => Ok(*s),
            other => Err(ModelError::shape(format!(
                "expected a scalar block, found {}",
                other.kind()
            ))),
        }
    }

    /// True when every coordinate is finite.
    pub fn is_finite(&self) -> bool {
        match self {
            StateBlock::Matrix(m) => m.is_finite(),
            StateBlock::Pair(p) => p.is_finite(),
            StateBlock::Vector(v) => v.is_finite(),
            StateBlock::Scalar(s) => s.re.is_finite() && s.im.is_finite(),
        }
    }

    /// Largest coordinate magnitude, used by scaled error norms.
    pub fn max_abs(&self) -> f64 {
        match self {
            StateBlock::Matrix(m) => m.max_abs(),
            StateBlock::Pair(p) => p.rho.norm().max(p.r.abs()),
            StateBlock::Vector(v) => v.abs(),
            StateBlock::Scalar(s) => s.norm(),
        }
    }

    fn push_flat(&self, out: &mut Vec<f64>) {
        match self {
            StateBlock::Matrix(m) => {
                let n = m.order();
                for i in 0..n {
                    for j in 0..n {
                        let z = m[(i, j)];
                        out.push(z.re);
                        out.push(z.im);
                    }
                }
            }
            StateBlock::Pair(p) => {
                out.push(p.rho.re);
                out.push(p.rho.im);
                for z in [p.r.x, p.r.y, p.r.z] {
                    out.push(z.re);
                    out.push(z.im);
                }
            }
            StateBlock::Vector(v) => {
                for z in [v.x, v.y, v.z] {
                    out.push(z.re);
                    out.push(z.im);
                }
            }
            StateBlock::Scalar(s) => {
                out.push(s.re);
                out.push(s.im);
            }
        }
    }

    fn read_flat(&self, data: &[f64]) -> StateBlock {
        let mut k = 0usize;
        let mut next = || {
            let z = Complex::new(data[k], data[k + 1]);
            k += 2;
            z
        };
        match self {
            StateBlock::Matrix(m) => {
                let n = m.order();
                let mut out = CMatrix::zeros(n);
                for i in 0..n {
                    for j in 0..n {
                        out[(i, j)] = next();
                    }
                }
                StateBlock::Matrix(out)
            }
            StateBlock::Pair(_) => {
                let rho = next();
                StateBlock::Pair(ScalarVec::new(rho, Vec3::new(next(), next(), next())))
            }
            StateBlock::Vector(_) => StateBlock::Vector(Vec3::new(next(), next(), next())),
            StateBlock::Scalar(_) => StateBlock::Scalar(next()),
        }
    }
}

/// Kind and size of a state block, without the data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockKind {
    Matrix(usize),
    Pair,
    Vector,
    Scalar,
}

impl BlockKind {
    pub fn dim(&self) -> usize {
        match self {
            BlockKind::Matrix(n) => 2 * n * n,
            BlockKind::Pair => 8,
            BlockKind::Vector => 6,
            BlockKind::Scalar => 2,
        }
    }

    /// A zero block of this kind.
    pub fn zero(&self) -> StateBlock {
        match self {
            BlockKind::Matrix(n) => StateBlock::Matrix(CMatrix::zeros(*n)),
            BlockKind::Pair => StateBlock::Pair(ScalarVec::new(Complex::new(0.0, 0.0), Vec3::zero())),
            BlockKind::Vector => StateBlock::Vector(Vec3::zero()),
            BlockKind::Scalar => StateBlock::Scalar(Complex::new(0.0, 0.0)),
        }
    }
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockKind::Matrix(n) => write!(f, "matrix({n}x{n})"),
            BlockKind::Pair => write!(f, "pair"),
            BlockKind::Vector => write!(f, "vector"),
            BlockKind::Scalar => write!(f, "scalar"),
        }
    }
}

/// An ordered list of named blocks. For second-order models the velocity
/// blocks follow the position blocks, in the same order.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelState {
    names: Vec<String>,
    blocks: Vec<StateBlock>,
}

impl ModelState {
    pub fn new(entries: Vec<(String, StateBlock)>) -> Self {
        let (names, blocks) = entries.into_iter().unzip();
        ModelState { names, blocks }
    }

    /// Builds a state from blocks with generated names `b0, b1, ...`.
    pub fn anonymous(blocks: Vec<StateBlock>) -> Self {
        let names = (0..blocks.len()).map(|k| format!("b{k}")).collect();
        ModelState { names, blocks }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn blocks(&self) -> &[StateBlock] {
        &self.blocks
    }

    pub fn block(&self, index: usize) -> Result<&StateBlock, ModelError> {
        self.blocks.get(index).ok_or_else(|| {
            ModelError::shape(format!(
                "block index {index} out of range for a state with {} blocks",
                self.blocks.len()
            ))
        })
    }

    pub fn by_name(&self, name: &str) -> Result<&StateBlock, ModelError> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|k| &self.blocks[k])
            .ok_or_else(|| ModelError::shape(format!("no block named {name:?}")))
    }

    /// Replaces the block at `index`, keeping its name.
    pub fn set_block(&mut self, index: usize, block: StateBlock) {
        self.blocks[index] = block;
    }

    pub fn matrix(&self, index: usize) -> Result<&CMatrix, ModelError> {
        self.block(index)?.as_matrix()
    }

    pub fn pair(&self, index: usize) -> Result<&ScalarVec, ModelError> {
        self.block(index)?.as_pair()
    }

    pub fn vector(&self, index: usize) -> Result<&Vec3, ModelError> {
        self.block(index)?.as_vector()
    }

    pub fn scalar(&self, index: usize) -> Result<Complex, ModelError> {
        self.block(index)?.as_scalar()
    }

    /// Total number of real coordinates.
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(StateBlock::dim).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.blocks.iter().all(StateBlock::is_finite)
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().map(StateBlock::max_abs).fold(0.0, f64::max)
    }

    /// Flattens to real coordinates; every complex entry contributes its real
    /// part then its imaginary part, blocks in order.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim());
        for b in &self.blocks {
            b.push_flat(&mut out);
        }
        out
    }

    /// Rebuilds a state with this state's shape and names from flat
    /// coordinates. Inverse of [`ModelState::flatten`].
    pub fn unflatten_like(&self, data: &[f64]) -> Result<ModelState, ModelError> {
        if data.len() != self.dim() {
            return Err(ModelError::shape(format!(
                "flat data has {} coordinates, state needs {}",
                data.len(),
                self.dim()
            )));
        }
        let mut blocks = Vec::with_capacity(self.blocks.len());
        let mut at = 0usize;
        for b in &self.blocks {
            let d = b.dim();
            blocks.push(b.read_flat(&data[at..at + d]));
            at += d;
        }
        Ok(ModelState {
            names: self.names.clone(),
            blocks,
        })
    }

    /// Concatenates two states (used to join positions and velocities).
    pub fn concat(mut self, other: ModelState) -> ModelState {
        self.names.extend(other.names);
        self.blocks.extend(other.blocks);
        self
    }

    /// Splits off the first `n` blocks; the remainder is the second part.
    pub fn split_at(&self, n: usize) -> (ModelState, ModelState) {
        let head = ModelState {
            names: self.names[..n].to_vec(),
            blocks: self.blocks[..n].to_vec(),
        };
        let tail = ModelState {
            names: self.names[n..].to_vec(),
            blocks: self.blocks[n..].to_vec(),
        };
        (head, tail)
    }

    /// Largest coordinate distance to `other`, which must share the shape.
    pub fn max_diff(&self, other: &ModelState) -> f64 {
        let a = self.flatten();
        let b = other.flatten();
        a.iter()
            .zip(&b)
            .map(|(x, y)| (x - y).abs())
            .fold(f64::NAN, f64::max)
    }
}
