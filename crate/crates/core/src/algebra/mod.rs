//! Dense complex square-matrix arithmetic.
//!
//! Matrices here are small (orders up to ~12 in practice, ~100 by design
//! limit), so everything is plain dense O(n³) with partial pivoting; no
//! attempt is made at blocking or sparsity. All values are immutable after
//! construction and every operation is pure.

mod eig;

pub use eig::eig;

use crate::tol;
use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

/// Complex scalar. Coupling constants and matrix entries alike.
pub type Complex = num_complex::Complex64;

/// Shorthand constructor.
#[inline]
pub fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

/// Errors from matrix algebra.
#[derive(Debug, Clone, thiserror::Error)]
pub enum AlgebraError {
    #[error("matrix order mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("singular or ill-conditioned matrix (condition estimate {cond:.3e})")]
    SingularMatrix { cond: f64 },
    #[error("matrix is defective or too close to defective to diagonalize")]
    NonDiagonalizable,
    #[error("eigenvalue {0} lies on the closed negative real axis; fractional power has no principal branch there")]
    BranchCut(Complex),
    #[error("non-finite matrix entry")]
    NonFinite,
}

pub type Result<T> = std::result::Result<T, AlgebraError>;

/// Dense square complex matrix, row-major storage.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex>,
}

impl CMatrix {
    /// Zero matrix of order `n`.
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            data: vec![Complex::new(0.0, 0.0); n * n],
        }
    }

    /// Identity matrix of order `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex::new(1.0, 0.0);
        }
        m
    }

    /// Scalar multiple of the identity.
    pub fn scalar(n: usize, z: Complex) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = z;
        }
        m
    }

    /// Build from an entry function.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Build from nested rows; panics unless rows form a square.
    pub fn from_rows(rows: &[Vec<Complex>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "rows must form a square");
        Self::from_fn(n, |i, j| rows[i][j])
    }

    /// Matrix order.
    pub fn order(&self) -> usize {
        self.n
    }

    /// Flat row-major view of the entries.
    pub fn entries(&self) -> &[Complex] {
        &self.data
    }

    /// True when every entry is finite.
    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Entrywise map.
    pub fn map(&self, mut f: impl FnMut(Complex) -> Complex) -> Self {
        CMatrix {
            n: self.n,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    /// Transpose (no conjugation).
    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    /// Trace.
    pub fn trace(&self) -> Complex {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    /// Frobenius norm.
    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Scalar multiple.
    pub fn scale(&self, z: Complex) -> Self {
        self.map(|w| w * z)
    }

    /// self + z·I.
    pub fn add_scalar(&self, z: Complex) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            m[(i, i)] += z;
        }
        m
    }

    fn check_same_order(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            Err(AlgebraError::DimensionMismatch(self.n, other.n))
        } else {
            Ok(())
        }
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex {
        &mut self.data[i * self.n + j]
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{}) [", self.n, self.n)?;
        for i in 0..self.n {
            write!(f, "  ")?;
            for j in 0..self.n {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n, "order mismatch in +");
        CMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n, "order mismatch in -");
        CMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.map(|z| -z)
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n, "order mismatch in *");
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

/// Commutator AB − BA.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    a.check_same_order(b)?;
    Ok(&(a * b) - &(b * a))
}

/// LU factorization with partial pivoting. Stores L (unit diagonal) and U in
/// one matrix plus the row permutation.
struct Lu {
    lu: CMatrix,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(a: &CMatrix) -> Result<Lu> {
        if !a.is_finite() {
            return Err(AlgebraError::NonFinite);
        }
        let n = a.order();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].norm();
            for i in k + 1..n {
                let v = lu[(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                // Exactly singular; report an unbounded condition estimate.
                return Err(AlgebraError::SingularMatrix { cond: f64::INFINITY });
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
            }
            let piv = lu[(k, k)];
            for i in k + 1..n {
                let m = lu[(i, k)] / piv;
                lu[(i, k)] = m;
                for j in k + 1..n {
                    let sub = m * lu[(k, j)];
                    lu[(i, j)] -= sub;
                }
            }
        }
        Ok(Lu { lu, perm })
    }

    /// Solve A x = b for one right-hand side given the factorization.
    fn solve_vec(&self, b: &[Complex]) -> Vec<Complex> {
        let n = self.lu.order();
        let mut x: Vec<Complex> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            for j in 0..i {
                let sub = self.lu[(i, j)] * x[j];
                x[i] -= sub;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let sub = self.lu[(i, j)] * x[j];
                x[i] -= sub;
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }

    fn solve_matrix(&self, b: &CMatrix) -> CMatrix {
        let n = self.lu.order();
        let mut out = CMatrix::zeros(n);
        let mut col = vec![Complex::new(0.0, 0.0); n];
        for j in 0..n {
            for i in 0..n {
                col[i] = b[(i, j)];
            }
            let x = self.solve_vec(&col);
            for i in 0..n {
                out[(i, j)] = x[i];
            }
        }
        out
    }
}

/// Inverse with a condition estimate guard.
///
/// The estimate is ‖A‖₁·‖A⁻¹‖₁; above [`tol::SINGULARITY_COND`] the matrix is
/// reported singular rather than silently returning garbage.
pub fn inverse(a: &CMatrix) -> Result<CMatrix> {
    let lu = Lu::factor(a)?;
    let inv = lu.solve_matrix(&CMatrix::identity(a.order()));
    let cond = a.one_norm() * inv.one_norm();
    if !cond.is_finite() || cond > tol::SINGULARITY_COND {
        return Err(AlgebraError::SingularMatrix { cond });
    }
    Ok(inv)
}

/// Condition estimate ‖A‖₁·‖A⁻¹‖₁ without the guard; ∞ when exactly singular.
pub fn condition_estimate(a: &CMatrix) -> f64 {
    match Lu::factor(a) {
        Ok(lu) => {
            let inv = lu.solve_matrix(&CMatrix::identity(a.order()));
            a.one_norm() * inv.one_norm()
        }
        Err(_) => f64::INFINITY,
    }
}

/// Solve A·X = B.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    a.check_same_order(b)?;
    let lu = Lu::factor(a)?;
    let x = lu.solve_matrix(b);
    let cond = {
        let inv = lu.solve_matrix(&CMatrix::identity(a.order()));
        a.one_norm() * inv.one_norm()
    };
    if !cond.is_finite() || cond > tol::SINGULARITY_COND {
        return Err(AlgebraError::SingularMatrix { cond });
    }
    Ok(x)
}

/// Matrix exponential by scaling and squaring around a truncated Taylor core.
///
/// The argument is scaled by 2^−s until its 1-norm is ≤ 1/4, the series is
/// summed until terms fall below machine precision relative to the partial
/// sum, and the result is squared s times. Exact for the zero matrix.
pub fn expm(a: &CMatrix) -> Result<CMatrix> {
    if !a.is_finite() {
        return Err(AlgebraError::NonFinite);
    }
    let n = a.order();
    let norm = a.one_norm();
    let s = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a.scale(c(1.0 / f64::powi(2.0, s as i32), 0.0));
    let mut sum = CMatrix::identity(n);
    let mut term = CMatrix::identity(n);
    for k in 1..200 {
        term = &term * &scaled;
        term = term.scale(c(1.0 / k as f64, 0.0));
        sum = &sum + &term;
        if term.max_abs() <= f64::EPSILON * sum.max_abs() {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    Ok(sum)
}

/// Principal fractional matrix power via eigendecomposition.
///
/// Requires a diagonalizable argument with no eigenvalue on the closed
/// negative real axis (where the principal branch is undefined or
/// discontinuous). Integer powers agree with repeated multiplication within
/// tolerance but take the same eigenvalue route.
pub fn matpow(a: &CMatrix, gamma: Complex) -> Result<CMatrix> {
    let (vals, vecs) = eig(a)?;
    for &lam in &vals {
        let m = lam.norm();
        if m == 0.0 || (lam.re < 0.0 && lam.im.abs() <= tol::BRANCH_CUT_REL * m) {
            return Err(AlgebraError::BranchCut(lam));
        }
    }
    let vinv = inverse(&vecs).map_err(|_| AlgebraError::NonDiagonalizable)?;
    let n = a.order();
    let mut d = CMatrix::zeros(n);
    for (i, &lam) in vals.iter().enumerate() {
        d[(i, i)] = (gamma * lam.ln()).exp();
    }
    Ok(&(&vecs * &d) * &vinv)
}

/// Analytic function of a matrix via eigendecomposition (same preconditions
/// as [`matpow`] minus the branch restriction; `f` is applied to each
/// eigenvalue).
pub fn matfun(a: &CMatrix, mut f: impl FnMut(Complex) -> Complex) -> Result<CMatrix> {
    let (vals, vecs) = eig(a)?;
    let vinv = inverse(&vecs).map_err(|_| AlgebraError::NonDiagonalizable)?;
    let n = a.order();
    let mut d = CMatrix::zeros(n);
    for (i, &lam) in vals.iter().enumerate() {
        d[(i, i)] = f(lam);
    }
    Ok(&(&vecs * &d) * &vinv)
}

/// One additive term of a linear matrix map X ↦ coeff·L·X·R.
///
/// `None` on either side means the identity there, so e.g. a plain scalar
/// term is `{coeff, None, None}` and a commutator [K, X] is the two terms
/// `{+1, Some(K), None}` and `{−1, None, Some(K)}`.
#[derive(Clone)]
pub struct LinearTerm {
    pub coeff: Complex,
    pub left: Option<CMatrix>,
    pub right: Option<CMatrix>,
}

impl LinearTerm {
    pub fn scalar(coeff: Complex) -> Self {
        LinearTerm {
            coeff,
            left: None,
            right: None,
        }
    }
    pub fn left(coeff: Complex, l: CMatrix) -> Self {
        LinearTerm {
            coeff,
            left: Some(l),
            right: None,
        }
    }
    pub fn right(coeff: Complex, r: CMatrix) -> Self {
        LinearTerm {
            coeff,
            left: None,
            right: Some(r),
        }
    }
    pub fn sandwich(coeff: Complex, l: CMatrix, r: CMatrix) -> Self {
        LinearTerm {
            coeff,
            left: Some(l),
            right: Some(r),
        }
    }

    /// Apply this term to X.
    fn apply(&self, x: &CMatrix) -> CMatrix {
        let mut y = x.clone();
        if let Some(l) = &self.left {
            y = l * &y;
        }
        if let Some(r) = &self.right {
            y = &y * r;
        }
        y.scale(self.coeff)
    }
}

/// Evaluate Σᵢ termᵢ(X).
pub fn apply_linear_map(terms: &[LinearTerm], x: &CMatrix) -> CMatrix {
    let n = x.order();
    let mut out = CMatrix::zeros(n);
    for t in terms {
        out = &out + &t.apply(x);
    }
    out
}

/// Solve the linear matrix equation Σᵢ coeffᵢ·Lᵢ·X·Rᵢ = RHS by flattening it
/// entrywise into an n²×n² dense system.
///
/// Row-major flattening turns L·X·R into (L ⊗ Rᵀ)·vec(X). The residual of
/// the reassembled matrix equation is checked against `rel_tol·‖RHS‖`
/// (default [`tol::DEFAULT_REL`]).
pub fn solve_flattened(terms: &[LinearTerm], rhs: &CMatrix) -> Result<CMatrix> {
    solve_flattened_with_tol(terms, rhs, tol::DEFAULT_REL)
}

pub fn solve_flattened_with_tol(
    terms: &[LinearTerm],
    rhs: &CMatrix,
    rel_tol: f64,
) -> Result<CMatrix> {
    let n = rhs.order();
    for t in terms {
        if let Some(l) = &t.left {
            rhs.check_same_order(l)?;
        }
        if let Some(r) = &t.right {
            rhs.check_same_order(r)?;
        }
    }
    let nn = n * n;
    let mut big = CMatrix::zeros(nn);
    for t in terms {
        for i in 0..n {
            for k in 0..n {
                let lik = match &t.left {
                    Some(l) => l[(i, k)],
                    None => {
                        if i == k {
                            Complex::new(1.0, 0.0)
                        } else {
                            continue;
                        }
                    }
                };
                for j in 0..n {
                    for l_ in 0..n {
                        let rlj = match &t.right {
                            Some(r) => r[(l_, j)],
                            None => {
                                if l_ == j {
                                    Complex::new(1.0, 0.0)
                                } else {
                                    continue;
                                }
                            }
                        };
                        big[(i * n + j, k * n + l_)] += t.coeff * lik * rlj;
                    }
                }
            }
        }
    }
    let lu = Lu::factor(&big)?;
    let x_flat = lu.solve_vec(rhs.entries());
    let x = CMatrix {
        n,
        data: x_flat,
    };
    let residual = &apply_linear_map(terms, &x) - rhs;
    let scale = rhs.fro_norm().max(1e-300);
    if residual.fro_norm() > rel_tol * scale {
        return Err(AlgebraError::SingularMatrix {
            cond: residual.fro_norm() / scale / f64::EPSILON,
        });
    }
    Ok(x)
}

/// The three Pauli matrices σx, σy, σz in the standard convention
/// σy = [[0, −i], [i, 0]], so that σᵢσⱼ = δᵢⱼ·1 + i εᵢⱼₖ σₖ.
pub fn pauli() -> [CMatrix; 3] {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    [
        CMatrix::from_rows(&[vec![z, one], vec![one, z]]),
        CMatrix::from_rows(&[vec![z, -i], vec![i, z]]),
        CMatrix::from_rows(&[vec![one, z], vec![z, -one]]),
    ]
}
