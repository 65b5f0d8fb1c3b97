//! Encodings of square matrices by 3-vectors (and scalars), together with
//! the closed-form maps that make each encoding useful: the sandwich map
//! `M̃ M⁻¹ M̃̃`, product and commutator maps, analytic functions of encoded
//! 2×2 matrices, and a general linear 3-vector solve.
//!
//! Conventions: all dot products and squared norms are bilinear (no complex
//! conjugation), so `r·r` may vanish for a nonzero complex vector. The Pauli
//! basis is σx = [[0,1],[1,0]], σy = [[0,-i],[i,0]], σz = [[1,0],[0,-1]].

use crate::algebra::{c, CMatrix, Complex};
use crate::tol;

/// Errors from encoding, decoding, and the closure maps.
#[derive(Debug, thiserror::Error)]
pub enum ParamError {
    /// Block list does not match the encoding's schema.
    #[error("{param}: expected blocks ({expected}), got {got}")]
    BlockMismatch {
        param: &'static str,
        expected: &'static str,
        got: String,
    },
    /// An input violates a structural constraint of the encoding.
    #[error("{param}: constraint violated: {what} (residual {residual:.3e})")]
    ConstraintViolation {
        param: &'static str,
        what: &'static str,
        residual: f64,
    },
    /// Matrix does not lie in the encoding's image.
    #[error("{param}: matrix not in image (residual {residual:.3e})")]
    NotInImage { param: &'static str, residual: f64 },
    /// A denominator of the closed-form map vanishes.
    #[error("degenerate configuration: {what}")]
    DegenerateConfiguration { what: &'static str },
    /// The operation is not defined for this encoding.
    #[error("{op} is not supported for {param}")]
    Unsupported {
        op: &'static str,
        param: &'static str,
    },
}

pub type Result<T> = std::result::Result<T, ParamError>;

/// Complex 3-vector with bilinear dot and cross products.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vec3 {
    pub x: Complex,
    pub y: Complex,
    pub z: Complex,
}

impl Vec3 {
    pub fn new(x: Complex, y: Complex, z: Complex) -> Self {
        Vec3 { x, y, z }
    }

    pub fn zero() -> Self {
        Vec3::new(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0))
    }

    pub fn from_real(x: f64, y: f64, z: f64) -> Self {
        Vec3::new(c(x, 0.0), c(y, 0.0), c(z, 0.0))
    }

    pub fn ex() -> Self {
        Vec3::from_real(1.0, 0.0, 0.0)
    }

    pub fn ey() -> Self {
        Vec3::from_real(0.0, 1.0, 0.0)
    }

    pub fn ez() -> Self {
        Vec3::from_real(0.0, 0.0, 1.0)
    }

    /// Bilinear dot product (no conjugation).
    pub fn dot(&self, o: &Vec3) -> Complex {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(&self, o: &Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    /// Bilinear squared norm r·r; complex in general.
    pub fn norm_sq(&self) -> Complex {
        self.dot(self)
    }

    /// Principal square root of r·r.
    pub fn norm(&self) -> Complex {
        self.norm_sq().sqrt()
    }

    /// Euclidean magnitude sqrt(|x|²+|y|²+|z|²); used for scale thresholds.
    pub fn abs(&self) -> f64 {
        (self.x.norm_sqr() + self.y.norm_sqr() + self.z.norm_sqr()).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        [self.x, self.y, self.z]
            .iter()
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn scale(&self, s: Complex) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl std::ops::Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl std::ops::Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl std::ops::Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl std::ops::Mul<Complex> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: Complex) -> Vec3 {
        self.scale(s)
    }
}

/// Scalar-plus-vector pair (ρ, r); encodes ρ·1 + i r·σ under [`ParamId::Quaternion`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalarVec {
    pub rho: Complex,
    pub r: Vec3,
}

impl ScalarVec {
    pub fn new(rho: Complex, r: Vec3) -> Self {
        ScalarVec { rho, r }
    }

    pub fn is_finite(&self) -> bool {
        self.rho.re.is_finite() && self.rho.im.is_finite() && self.r.is_finite()
    }
}

/// One encoded block: a scalar, a 3-vector, or a scalar-vector pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Block {
    Scalar(Complex),
    Vector(Vec3),
    Pair(ScalarVec),
}

impl Block {
    pub fn as_scalar(&self) -> Option<Complex> {
        match self {
            Block::Scalar(s) => Some(*s),
            _ => None,
        }
    }

    pub fn as_vector(&self) -> Option<Vec3> {
        match self {
            Block::Vector(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_pair(&self) -> Option<ScalarVec> {
        match self {
            Block::Pair(p) => Some(*p),
            _ => None,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Block::Scalar(_) => "scalar",
            Block::Vector(_) => "vector",
            Block::Pair(_) => "pair",
        }
    }
}

/// The matrix ↔ 3-vector encodings.
///
/// Closure classes: `Quaternion` is closed under products (hence everything);
/// `Traceless2`, `Antisym4Pair`, `Antisym4Single`, `RowTriple`,
/// `CenteredTriple`, and `HomogeneousQuad` are closed under the sandwich
/// `M̃ M⁻¹ M̃̃`; `Traceless2`, `Antisym4Pair`, and `Antisym3` are closed under
/// commutators and odd powers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ParamId {
    /// 2×2: M = ρ·1 + i r·σ from one (ρ, r) pair.
    Quaternion,
    /// 2×2 traceless: M = i r·σ from one vector.
    Traceless2,
    /// 4×4 antisymmetric from two vectors.
    Antisym4Pair,
    /// 4×4 antisymmetric from one vector; lower block scaled by λ ≠ 0.
    Antisym4Single { lambda: Complex },
    /// 3×3 from three vectors as rows.
    RowTriple,
    /// 3×3 from three zero-sum vectors as rows (centre of mass at origin).
    CenteredTriple,
    /// 4×4 from a scalar first column and four vectors as row remainders.
    HomogeneousQuad,
    /// 3×3 antisymmetric from one vector.
    Antisym3,
}

impl ParamId {
    pub fn name(&self) -> &'static str {
        match self {
            ParamId::Quaternion => "quaternion",
            ParamId::Traceless2 => "traceless2",
            ParamId::Antisym4Pair => "antisym4-pair",
            ParamId::Antisym4Single { .. } => "antisym4-single",
            ParamId::RowTriple => "row-triple",
            ParamId::CenteredTriple => "centered-triple",
            ParamId::HomogeneousQuad => "homogeneous-quad",
            ParamId::Antisym3 => "antisym3",
        }
    }

    /// Matrix order produced by [`encode`].
    pub fn order(&self) -> usize {
        match self {
            ParamId::Quaternion | ParamId::Traceless2 => 2,
            ParamId::RowTriple | ParamId::CenteredTriple | ParamId::Antisym3 => 3,
            _ => 4,
        }
    }

    /// Human-readable block schema.
    pub fn block_schema(&self) -> &'static str {
        match self {
            ParamId::Quaternion => "1 pair",
            ParamId::Traceless2 | ParamId::Antisym4Single { .. } | ParamId::Antisym3 => "1 vector",
            ParamId::Antisym4Pair => "2 vectors",
            ParamId::RowTriple | ParamId::CenteredTriple => "3 vectors",
            ParamId::HomogeneousQuad => "1 scalar + 4 vectors",
        }
    }
}

impl std::fmt::Display for ParamId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

fn block_mismatch(p: &ParamId, blocks: &[Block]) -> ParamError {
    ParamError::BlockMismatch {
        param: p.name(),
        expected: p.block_schema(),
        got: blocks
            .iter()
            .map(|b| b.kind())
            .collect::<Vec<_>>()
            .join("+"),
    }
}

fn vectors_of<const K: usize>(p: &ParamId, blocks: &[Block]) -> Result<[Vec3; K]> {
    if blocks.len() != K {
        return Err(block_mismatch(p, blocks));
    }
    let mut out = [Vec3::zero(); K];
    for (i, b) in blocks.iter().enumerate() {
        out[i] = b.as_vector().ok_or_else(|| block_mismatch(p, blocks))?;
    }
    Ok(out)
}

fn pair_of(p: &ParamId, blocks: &[Block]) -> Result<ScalarVec> {
    if blocks.len() != 1 {
        return Err(block_mismatch(p, blocks));
    }
    blocks[0].as_pair().ok_or_else(|| block_mismatch(p, blocks))
}

fn quad_of(p: &ParamId, blocks: &[Block]) -> Result<(Complex, [Vec3; 4])> {
    if blocks.len() != 5 {
        return Err(block_mismatch(p, blocks));
    }
    let rho = blocks[0]
        .as_scalar()
        .ok_or_else(|| block_mismatch(p, blocks))?;
    let mut rs = [Vec3::zero(); 4];
    for i in 0..4 {
        rs[i] = blocks[i + 1]
            .as_vector()
            .ok_or_else(|| block_mismatch(p, blocks))?;
    }
    Ok((rho, rs))
}

/// Residual of the zero-sum constraint, relative to the triple's scale.
pub fn zero_sum_residual(vs: &[Vec3]) -> f64 {
    let sum = vs.iter().fold(Vec3::zero(), |a, v| a + *v);
    let scale = vs.iter().map(Vec3::abs).fold(0.0f64, f64::max);
    sum.abs() / (1.0 + scale)
}

/// Subtracts the mean so the triple sums to zero exactly up to rounding.
pub fn project_zero_sum(vs: &[Vec3]) -> Vec<Vec3> {
    let n = vs.len() as f64;
    let mean = vs.iter().fold(Vec3::zero(), |a, v| a + *v) * c(1.0 / n, 0.0);
    vs.iter().map(|v| *v - mean).collect()
}

/// Builds the matrix for the encoding from its blocks.
pub fn encode(p: &ParamId, blocks: &[Block]) -> Result<CMatrix> {
    let zero = c(0.0, 0.0);
    match p {
        ParamId::Quaternion => {
            let sv = pair_of(p, blocks)?;
            Ok(quaternion_matrix(sv.rho, &sv.r))
        }
        ParamId::Traceless2 => {
            let [r] = vectors_of::<1>(p, blocks)?;
            Ok(quaternion_matrix(zero, &r))
        }
        ParamId::Antisym4Pair => {
            let [r1, r2] = vectors_of::<2>(p, blocks)?;
            Ok(CMatrix::from_rows(&[
                vec![zero, r1.x, r1.y, r1.z],
                vec![-r1.x, zero, r2.z, -r2.y],
                vec![-r1.y, -r2.z, zero, r2.x],
                vec![-r1.z, r2.y, -r2.x, zero],
            ]))
        }
        ParamId::Antisym4Single { lambda } => {
            let [r] = vectors_of::<1>(p, blocks)?;
            let l = *lambda;
            Ok(CMatrix::from_rows(&[
                vec![zero, r.x, r.y, r.z],
                vec![-r.x, zero, l * r.z, -(l * r.y)],
                vec![-r.y, -(l * r.z), zero, l * r.x],
                vec![-r.z, l * r.y, -(l * r.x), zero],
            ]))
        }
        ParamId::RowTriple => {
            let rs = vectors_of::<3>(p, blocks)?;
            Ok(rows_matrix(&rs))
        }
        ParamId::CenteredTriple => {
            let rs = vectors_of::<3>(p, blocks)?;
            let res = zero_sum_residual(&rs);
            if res > tol::DECODE_IMAGE_REL {
                return Err(ParamError::ConstraintViolation {
                    param: p.name(),
                    what: "row vectors must sum to zero",
                    residual: res,
                });
            }
            Ok(rows_matrix(&rs))
        }
        ParamId::HomogeneousQuad => {
            let (rho, rs) = quad_of(p, blocks)?;
            Ok(CMatrix::from_fn(4, |i, j| {
                if j == 0 {
                    rho
                } else {
                    [rs[i].x, rs[i].y, rs[i].z][j - 1]
                }
            }))
        }
        ParamId::Antisym3 => {
            let [r] = vectors_of::<1>(p, blocks)?;
            Ok(CMatrix::from_rows(&[
                vec![zero, r.x, r.y],
                vec![-r.x, zero, r.z],
                vec![-r.y, -r.z, zero],
            ]))
        }
    }
}

fn quaternion_matrix(rho: Complex, r: &Vec3) -> CMatrix {
    // ρ·1 + i r·σ with standard Pauli matrices: r·σ = [[z, x−iy], [x+iy, −z]].
    let i = c(0.0, 1.0);
    CMatrix::from_rows(&[
        vec![rho + i * r.z, i * r.x + r.y],
        vec![i * r.x - r.y, rho - i * r.z],
    ])
}

fn rows_matrix(rs: &[Vec3; 3]) -> CMatrix {
    CMatrix::from_rows(&[
        vec![rs[0].x, rs[0].y, rs[0].z],
        vec![rs[1].x, rs[1].y, rs[1].z],
        vec![rs[2].x, rs[2].y, rs[2].z],
    ])
}

/// Reads the blocks back off a matrix in the encoding's image.
///
/// Exact inverse of [`encode`] on its image; rejects matrices whose
/// re-encoding differs by more than a small relative residual.
pub fn decode(p: &ParamId, m: &CMatrix) -> Result<Vec<Block>> {
    if m.order() != p.order() {
        return Err(ParamError::NotInImage {
            param: p.name(),
            residual: f64::INFINITY,
        });
    }
    let blocks = read_blocks(p, m);
    let back = encode(p, &blocks)?;
    let mut residual = 0.0f64;
    for i in 0..m.order() {
        for j in 0..m.order() {
            residual = residual.max((m[(i, j)] - back[(i, j)]).norm());
        }
    }
    let rel = residual / (1.0 + m.max_abs());
    if rel > tol::DECODE_IMAGE_REL {
        return Err(ParamError::NotInImage {
            param: p.name(),
            residual: rel,
        });
    }
    Ok(blocks)
}

fn read_blocks(p: &ParamId, m: &CMatrix) -> Vec<Block> {
    let i = c(0.0, 1.0);
    let half = c(0.5, 0.0);
    match p {
        ParamId::Quaternion | ParamId::Traceless2 => {
            // M = ρ·1 + i r·σ with r·σ = [[z, x−iy], [x+iy, −z]].
            let rho = (m[(0, 0)] + m[(1, 1)]) * half;
            let a00 = -i * (m[(0, 0)] - rho);
            let a01 = -i * m[(0, 1)];
            let a10 = -i * m[(1, 0)];
            let r = Vec3::new((a01 + a10) * half, (a10 - a01) * half * (-i), a00);
            match p {
                ParamId::Quaternion => vec![Block::Pair(ScalarVec::new(rho, r))],
                _ => vec![Block::Vector(r)],
            }
        }
        ParamId::Antisym4Pair => {
            let r1 = Vec3::new(m[(0, 1)], m[(0, 2)], m[(0, 3)]);
            let r2 = Vec3::new(m[(2, 3)], -m[(1, 3)], m[(1, 2)]);
            vec![Block::Vector(r1), Block::Vector(r2)]
        }
        ParamId::Antisym4Single { .. } => {
            vec![Block::Vector(Vec3::new(m[(0, 1)], m[(0, 2)], m[(0, 3)]))]
        }
        ParamId::RowTriple | ParamId::CenteredTriple => (0..3)
            .map(|j| Block::Vector(Vec3::new(m[(j, 0)], m[(j, 1)], m[(j, 2)])))
            .collect(),
        ParamId::HomogeneousQuad => {
            let mut blocks = vec![Block::Scalar(m[(0, 0)])];
            for j in 0..4 {
                blocks.push(Block::Vector(Vec3::new(m[(j, 1)], m[(j, 2)], m[(j, 3)])));
            }
            blocks
        }
        ParamId::Antisym3 => {
            vec![Block::Vector(Vec3::new(m[(0, 1)], m[(0, 2)], m[(1, 2)]))]
        }
    }
}

/// Relative-threshold check for a complex denominator against a scale.
fn guard(denom: Complex, scale: f64, what: &'static str) -> Result<Complex> {
    if denom.norm() <= 1e-12 * scale {
        return Err(ParamError::DegenerateConfiguration { what });
    }
    Ok(denom)
}

/// Closed-form image of `M̃ M⁻¹ M̃̃` in block form.
///
/// `tilde2 = None` means M̃̃ = M̃ (the common case Ṁ M⁻¹ Ṁ). A distinct
/// third factor is only expressible for `Quaternion`, `RowTriple`, and
/// `CenteredTriple`; the other encodings reject it. For `CenteredTriple`
/// the middle factor must be an invertible `RowTriple` element: an exactly
/// zero-sum triple spans a plane, so its matrix is singular and no inverse
/// exists inside the centered class itself.
pub fn sandwich(
    p: &ParamId,
    tilde: &[Block],
    base: &[Block],
    tilde2: Option<&[Block]>,
) -> Result<Vec<Block>> {
    let two_sided_only = |op: &'static str| -> Result<()> {
        if tilde2.is_some() {
            return Err(ParamError::Unsupported {
                op,
                param: p.name(),
            });
        }
        Ok(())
    };
    match p {
        ParamId::Quaternion => {
            let t = pair_of(p, tilde)?;
            let b = pair_of(p, base)?;
            let tt = match tilde2 {
                Some(blocks) => pair_of(p, blocks)?,
                None => t,
            };
            let det = guard(
                b.rho * b.rho + b.r.norm_sq(),
                1.0 + b.rho.norm_sqr() + b.r.abs() * b.r.abs(),
                "quaternion sandwich: ρ² + r² vanishes",
            )?;
            let inv = c(1.0, 0.0) / det;
            let (rho, r, rt, rtt) = (b.rho, b.r, t.r, tt.r);
            let (rhot, rhott) = (t.rho, tt.rho);
            let s = rhot * rho * rhott + rhot * r.dot(&rtt) - rho * rt.dot(&rtt)
                + rhott * r.dot(&rt)
                + r.dot(&rt.cross(&rtt));
            let v = rt * (rho * rhott + r.dot(&rtt)) - r * (rhot * rhott + rt.dot(&rtt))
                + rtt * (rhot * rho + rt.dot(&r))
                + r.cross(&rtt) * rhot
                - rt.cross(&rtt) * rho
                + rt.cross(&r) * rhott;
            Ok(vec![Block::Pair(ScalarVec::new(s * inv, v * inv))])
        }
        ParamId::Traceless2 | ParamId::Antisym4Single { .. } => {
            two_sided_only("three-factor sandwich")?;
            let [rt] = vectors_of::<1>(p, tilde)?;
            let [r] = vectors_of::<1>(p, base)?;
            let r2 = guard(
                r.norm_sq(),
                r.abs() * r.abs(),
                "sandwich: base r·r vanishes",
            )?;
            let inv = c(1.0, 0.0) / r2;
            let v = (rt * (c(2.0, 0.0) * rt.dot(&r)) - r * rt.norm_sq()) * inv;
            Ok(vec![Block::Vector(v)])
        }
        ParamId::Antisym4Pair => {
            two_sided_only("three-factor sandwich")?;
            let [t1, t2] = vectors_of::<2>(p, tilde)?;
            let [r1, r2] = vectors_of::<2>(p, base)?;
            let dot = guard(
                r1.dot(&r2),
                r1.abs() * r2.abs(),
                "sandwich: base vectors are orthogonal",
            )?;
            let inv = c(1.0, 0.0) / dot;
            let bracket = t1.dot(&r2) + t2.dot(&r1);
            let cross = t1.dot(&t2);
            let v1 = (t1 * bracket - r1 * cross) * inv;
            let v2 = (t2 * bracket - r2 * cross) * inv;
            Ok(vec![Block::Vector(v1), Block::Vector(v2)])
        }
        ParamId::RowTriple | ParamId::CenteredTriple => {
            let ts = vectors_of::<3>(p, tilde)?;
            // The middle factor of a centered sandwich is ambient data, so it
            // is read with the generic row-triple schema.
            let bs = vectors_of::<3>(&ParamId::RowTriple, base)?;
            let tts = match tilde2 {
                Some(blocks) => vectors_of::<3>(p, blocks)?,
                None => ts,
            };
            if let ParamId::CenteredTriple = p {
                for (name, triple) in [("tilde", &ts), ("tilde2", &tts)] {
                    let res = zero_sum_residual(triple.as_slice());
                    if res > tol::DECODE_IMAGE_REL {
                        return Err(ParamError::ConstraintViolation {
                            param: p.name(),
                            what: if name == "tilde" {
                                "tilde triple must sum to zero"
                            } else {
                                "tilde2 triple must sum to zero"
                            },
                            residual: res,
                        });
                    }
                }
            }
            let delta = guard(
                bs[0].dot(&bs[1].cross(&bs[2])),
                bs[0].abs() * bs[1].abs() * bs[2].abs(),
                "sandwich: base triple is coplanar",
            )?;
            let inv = c(1.0, 0.0) / delta;
            let mut out = Vec::with_capacity(3);
            for j in 0..3 {
                let mut v = Vec3::zero();
                for k in 0..3 {
                    let u = bs[(k + 1) % 3].cross(&bs[(k + 2) % 3]);
                    v = v + tts[k] * (ts[j].dot(&u) * inv);
                }
                out.push(Block::Vector(v));
            }
            Ok(out)
        }
        ParamId::HomogeneousQuad => {
            two_sided_only("three-factor sandwich")?;
            let (rhot, ts) = quad_of(p, tilde)?;
            let (rho, rs) = quad_of(p, base)?;
            let scale = (rs[1] - rs[0]).abs() * (rs[2] - rs[0]).abs() * (rs[3] - rs[0]).abs();
            let delta = guard(
                (rs[1] - rs[0]).dot(&(rs[2] - rs[0]).cross(&(rs[3] - rs[0]))),
                scale,
                "sandwich: base quad is coplanar",
            )?;
            if rho.norm() == 0.0 {
                return Err(ParamError::DegenerateConfiguration {
                    what: "sandwich: base scalar column vanishes",
                });
            }
            let inv = c(1.0, 0.0) / delta;
            let ratio = rhot / rho;
            let mut out = vec![Block::Scalar(rhot * rhot / rho)];
            for j in 0..4 {
                let mut v = Vec3::zero();
                for k0 in 0..4usize {
                    // Alternating sign follows the 1-based index k = 1..4.
                    let sign = if (k0 + 1) % 2 == 1 {
                        c(-1.0, 0.0)
                    } else {
                        c(1.0, 0.0)
                    };
                    let r1 = rs[(k0 + 1) % 4];
                    let r2 = rs[(k0 + 2) % 4];
                    let r3 = rs[(k0 + 3) % 4];
                    let coeff = ratio * r1.dot(&r2.cross(&r3))
                        + ts[j].dot(&(r1 - r2).cross(&(r2 - r3)));
                    v = v + ts[k0] * (sign * coeff * inv);
                }
                out.push(Block::Vector(v));
            }
            Ok(out)
        }
        ParamId::Antisym3 => Err(ParamError::Unsupported {
            op: "sandwich",
            param: p.name(),
        }),
    }
}

/// Closed-form product map for the product-closed encoding, and the
/// commutator map for the commutator-closed ones.
///
/// `Quaternion`: full product (ρρ̃ − r·r̃, ρr̃ + ρ̃r − r∧r̃).
/// `Traceless2`: commutator ↦ −2 r∧r̃. `Antisym3`: commutator ↦ −r∧r̃.
pub fn product_map(p: &ParamId, a: &[Block], b: &[Block]) -> Result<Vec<Block>> {
    match p {
        ParamId::Quaternion => {
            let x = pair_of(p, a)?;
            let y = pair_of(p, b)?;
            let rho = x.rho * y.rho - x.r.dot(&y.r);
            let r = y.r * x.rho + x.r * y.rho - x.r.cross(&y.r);
            Ok(vec![Block::Pair(ScalarVec::new(rho, r))])
        }
        ParamId::Traceless2 => {
            let [x] = vectors_of::<1>(p, a)?;
            let [y] = vectors_of::<1>(p, b)?;
            Ok(vec![Block::Vector(x.cross(&y) * c(-2.0, 0.0))])
        }
        ParamId::Antisym3 => {
            let [x] = vectors_of::<1>(p, a)?;
            let [y] = vectors_of::<1>(p, b)?;
            Ok(vec![Block::Vector(-x.cross(&y))])
        }
        _ => Err(ParamError::Unsupported {
            op: "product_map",
            param: p.name(),
        }),
    }
}

/// Analytic function of an encoded 2×2 matrix: f(ρ·1 + i r·σ) as a pair.
///
/// Uses the eigenvalue form f(ρ ± i·|r|): the scalar part is the mean of the
/// two values, the vector part rescales r by their difference quotient. At
/// r = 0 this degenerates to (f(ρ), 0). A nonzero r with r·r = 0 makes the
/// matrix a Jordan block, which a pointwise f cannot resolve.
pub fn pauli_fn(f: impl Fn(Complex) -> Complex, rho: Complex, r: &Vec3) -> Result<ScalarVec> {
    let i = c(0.0, 1.0);
    if r.abs() == 0.0 {
        return Ok(ScalarVec::new(f(rho), Vec3::zero()));
    }
    let rn = r.norm();
    if rn.norm() <= 1e-12 * r.abs() {
        return Err(ParamError::DegenerateConfiguration {
            what: "pauli_fn: nonzero vector with r·r = 0 (non-diagonalizable)",
        });
    }
    let fp = f(rho + i * rn);
    let fm = f(rho - i * rn);
    let half = c(0.5, 0.0);
    Ok(ScalarVec::new(
        (fp + fm) * half,
        *r * ((fp - fm) * half / (i * rn)),
    ))
}

/// Which exact-zero pattern of the linear 3-vector equation to use.
///
/// The caller picks the branch from structural knowledge of the inputs;
/// the solver never infers zeroness from magnitudes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveBranch {
    /// a ≠ 0, b ≠ 0, c and d present.
    General,
    /// b = 0.
    BZero,
    /// c = 0 or d = 0 (the (r·d)c term absent).
    CdZero,
    /// a = 0; requires b·c ≠ 0 and b·d ≠ 0.
    AZero,
}

/// Solves a·r + r∧b + (r·d)c = f for r in closed form.
pub fn vec_solve(
    branch: SolveBranch,
    a: Complex,
    b: &Vec3,
    cv: &Vec3,
    d: &Vec3,
    f: &Vec3,
) -> Result<Vec3> {
    let nonzero = |z: Complex, what: &'static str| -> Result<Complex> {
        if z.norm() == 0.0 {
            return Err(ParamError::DegenerateConfiguration { what });
        }
        Ok(z)
    };
    match branch {
        SolveBranch::General => {
            let a2b2 = nonzero(a * a + b.norm_sq(), "vec_solve: a² + b² vanishes")?;
            nonzero(a, "vec_solve: general branch needs a ≠ 0")?;
            let gden = nonzero(
                a * a2b2 + a * a * cv.dot(d) + a * cv.cross(d).dot(b) + cv.dot(b) * d.dot(b),
                "vec_solve: γ denominator vanishes",
            )?;
            let gamma = -(a * a * f.dot(d) + a * f.cross(d).dot(b) + f.dot(b) * d.dot(b)) / gden;
            let r = (*f * a
                + b.cross(f)
                + b.cross(cv) * gamma
                + *cv * (a * gamma)
                + *b * ((f.dot(b) + gamma * cv.dot(b)) / a))
                * (c(1.0, 0.0) / a2b2);
            Ok(r)
        }
        SolveBranch::BZero => {
            nonzero(a, "vec_solve: b = 0 branch needs a ≠ 0")?;
            let den = nonzero(a + cv.dot(d), "vec_solve: a + c·d vanishes")?;
            Ok((*f - *cv * (f.dot(d) / den)) * (c(1.0, 0.0) / a))
        }
        SolveBranch::CdZero => {
            nonzero(a, "vec_solve: c,d = 0 branch needs a ≠ 0")?;
            let a2b2 = nonzero(a * a + b.norm_sq(), "vec_solve: a² + b² vanishes")?;
            Ok((*f * a + b.cross(f) + *b * (f.dot(b) / a)) * (c(1.0, 0.0) / a2b2))
        }
        SolveBranch::AZero => {
            let b2 = nonzero(b.norm_sq(), "vec_solve: b·b vanishes")?;
            let bc = nonzero(b.dot(cv), "vec_solve: b·c vanishes")?;
            let bd = nonzero(b.dot(d), "vec_solve: b·d vanishes")?;
            let bf = b.dot(f);
            let coeff = (b2 * bf - bc * b.cross(f).dot(d) + bf * b.cross(cv).dot(d)) / (bc * bd);
            let r = (b.cross(f) - b.cross(cv) * (bf / bc) + *b * coeff) * (c(1.0, 0.0) / b2);
            Ok(r)
        }
    }
}

/// The three Pauli matrices in the convention used throughout this crate.
pub fn sigma() -> [CMatrix; 3] {
    crate::algebra::pauli()
}
