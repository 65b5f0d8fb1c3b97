//! Eigendecomposition of dense complex matrices.
//!
//! Route: Householder reduction to upper Hessenberg form, explicit
//! single-shift QR iteration with Givens rotations (Wilkinson shift,
//! occasional exceptional shift), then eigenvectors of the resulting
//! triangular factor by back-substitution. The unitary similarity is
//! accumulated throughout, so the returned eigenvector matrix is exact up to
//! roundoff for diagonalizable input. Near-defective input is rejected via a
//! condition bound on the eigenvector matrix rather than silently returning
//! an unreliable basis.

use super::{inverse, AlgebraError, CMatrix, Complex, Result};
use crate::tol;

/// Eigenvalues and right-eigenvector matrix P with A·P ≈ P·diag(λ).
///
/// Columns of P are unit vectors with deterministic phase (largest component
/// real positive). Fails with `NonDiagonalizable` when the eigenvector basis
/// is too ill-conditioned to trust, or when the residual check
/// ‖AP − P·diag(λ)‖ ≤ 1e-10·‖A‖ fails.
pub fn eig(a: &CMatrix) -> Result<(Vec<Complex>, CMatrix)> {
    if !a.is_finite() {
        return Err(AlgebraError::NonFinite);
    }
    let n = a.order();
    if n == 0 {
        return Ok((vec![], CMatrix::zeros(0)));
    }
    if n == 1 {
        return Ok((vec![a[(0, 0)]], CMatrix::identity(1)));
    }

    let (mut h, mut q) = hessenberg(a);
    qr_iterate(&mut h, &mut q)?;

    let vals: Vec<Complex> = (0..n).map(|i| h[(i, i)]).collect();
    let p = triangular_eigenvectors(&h, &q);

    let residual = {
        let mut ap = a * &p;
        for j in 0..n {
            for i in 0..n {
                ap[(i, j)] -= p[(i, j)] * vals[j];
            }
        }
        ap.fro_norm()
    };
    let scale = a.fro_norm().max(f64::MIN_POSITIVE);
    if residual > 1e-10 * scale {
        return Err(AlgebraError::NonDiagonalizable);
    }
    match inverse(&p) {
        Ok(pinv) => {
            let cond = p.one_norm() * pinv.one_norm();
            if cond > tol::EIG_COND_MAX {
                return Err(AlgebraError::NonDiagonalizable);
            }
        }
        Err(_) => return Err(AlgebraError::NonDiagonalizable),
    }
    Ok((vals, p))
}

/// Reduce A to upper Hessenberg form H = Qᴴ A Q, returning (H, Q).
fn hessenberg(a: &CMatrix) -> (CMatrix, CMatrix) {
    let n = a.order();
    let mut h = a.clone();
    let mut q = CMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        // Householder vector for column k below the subdiagonal.
        let m = n - k - 1;
        let mut v: Vec<Complex> = (0..m).map(|i| h[(k + 1 + i, k)]).collect();
        let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nrm == 0.0 {
            continue;
        }
        let alpha = v[0];
        let phase = if alpha.norm() > 0.0 {
            alpha / alpha.norm()
        } else {
            Complex::new(1.0, 0.0)
        };
        v[0] += phase * nrm;
        let vnorm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm_sq == 0.0 {
            continue;
        }
        let tau = 2.0 / vnorm_sq;

        // H ← (I − τ v vᴴ) H, rows k+1.., all columns.
        for j in 0..n {
            let dot: Complex = (0..m).map(|i| v[i].conj() * h[(k + 1 + i, j)]).sum();
            let f = dot * tau;
            for i in 0..m {
                let sub = v[i] * f;
                h[(k + 1 + i, j)] -= sub;
            }
        }
        // H ← H (I − τ v vᴴ), columns k+1.., all rows.
        for i in 0..n {
            let dot: Complex = (0..m).map(|j| h[(i, k + 1 + j)] * v[j]).sum();
            let f = dot * tau;
            for j in 0..m {
                let sub = f * v[j].conj();
                h[(i, k + 1 + j)] -= sub;
            }
        }
        // Q ← Q (I − τ v vᴴ).
        for i in 0..n {
            let dot: Complex = (0..m).map(|j| q[(i, k + 1 + j)] * v[j]).sum();
            let f = dot * tau;
            for j in 0..m {
                let sub = f * v[j].conj();
                q[(i, k + 1 + j)] -= sub;
            }
        }
        // Entries below the subdiagonal are now zero by construction.
        for i in k + 2..n {
            h[(i, k)] = Complex::new(0.0, 0.0);
        }
    }
    (h, q)
}

/// Givens rotation G = [[c, s], [−s̄, c]] with real c ≥ 0 and
/// G·(f, g)ᵀ = (r, 0)ᵀ.
fn rotation(f: Complex, g: Complex) -> (f64, Complex) {
    let fa = f.norm();
    let ga = g.norm();
    if ga == 0.0 {
        return (1.0, Complex::new(0.0, 0.0));
    }
    if fa == 0.0 {
        return (0.0, g.conj() / ga);
    }
    let h = (fa * fa + ga * ga).sqrt();
    let c = fa / h;
    let s = (f / fa) * (g.conj() / h);
    (c, s)
}

/// Shifted QR iteration driving H to upper triangular form; Q accumulates
/// the similarity so A = Q H Qᴴ remains true throughout.
fn qr_iterate(h: &mut CMatrix, q: &mut CMatrix) -> Result<()> {
    let n = h.order();
    let mut hi = n - 1;
    let mut iter_this_block = 0usize;
    let mut total_iters = 0usize;
    let max_total = 60 * n.max(4);

    while hi > 0 {
        // Deflate converged subdiagonals at the bottom of the active block.
        let mut deflated = false;
        for i in (0..hi).rev() {
            let sub = h[(i + 1, i)].norm();
            let scale = h[(i, i)].norm() + h[(i + 1, i + 1)].norm();
            let thresh = if scale > 0.0 {
                f64::EPSILON * scale
            } else {
                f64::EPSILON * h.fro_norm().max(f64::MIN_POSITIVE)
            };
            if sub <= thresh {
                h[(i + 1, i)] = Complex::new(0.0, 0.0);
                if i + 1 == hi {
                    // Bottom 1×1 block converged.
                    hi -= 1;
                    iter_this_block = 0;
                    deflated = true;
                    break;
                }
            }
        }
        if deflated {
            continue;
        }
        if hi == 0 {
            break;
        }
        // Active block [lo..=hi] is the trailing unreduced block.
        let mut lo = hi;
        while lo > 0 && h[(lo, lo - 1)].norm() > 0.0 {
            lo -= 1;
        }

        total_iters += 1;
        iter_this_block += 1;
        if total_iters > max_total {
            return Err(AlgebraError::NonDiagonalizable);
        }

        // Wilkinson shift: eigenvalue of the trailing 2×2 closest to the
        // corner entry; exceptional shift every 12 stalled sweeps.
        let mu = if iter_this_block % 12 == 0 {
            h[(hi, hi)] + Complex::new(1.5 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            let a = h[(hi - 1, hi - 1)];
            let b = h[(hi - 1, hi)];
            let cc = h[(hi, hi - 1)];
            let d = h[(hi, hi)];
            let tr2 = (a + d) * 0.5;
            let det = a * d - b * cc;
            let disc = (tr2 * tr2 - det).sqrt();
            let m1 = tr2 + disc;
            let m2 = tr2 - disc;
            if (m1 - d).norm() <= (m2 - d).norm() {
                m1
            } else {
                m2
            }
        };

        // Explicit single-shift QR step on the active block.
        let mut rots: Vec<(f64, Complex)> = Vec::with_capacity(hi - lo);
        for i in lo..=hi {
            h[(i, i)] -= mu;
        }
        for k in lo..hi {
            let (c, s) = rotation(h[(k, k)], h[(k + 1, k)]);
            rots.push((c, s));
            // Left rotation on rows k, k+1 over columns k..n.
            for j in k..n {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + y * s;
                h[(k + 1, j)] = -x * s.conj() + y * c;
            }
            h[(k + 1, k)] = Complex::new(0.0, 0.0);
        }
        for (idx, &(c, s)) in rots.iter().enumerate() {
            let k = lo + idx;
            // Right rotation Gᴴ on columns k, k+1 over rows 0..=k+1.
            for i in 0..=k + 1 {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + y * s.conj();
                h[(i, k + 1)] = -x * s + y * c;
            }
            // Accumulate into Q over all rows.
            for i in 0..n {
                let x = q[(i, k)];
                let y = q[(i, k + 1)];
                q[(i, k)] = x * c + y * s.conj();
                q[(i, k + 1)] = -x * s + y * c;
            }
        }
        for i in lo..=hi {
            h[(i, i)] += mu;
        }
    }
    Ok(())
}

/// Eigenvectors of the upper-triangular factor by back-substitution, mapped
/// back through the accumulated unitary Q and normalized deterministically.
fn triangular_eigenvectors(t: &CMatrix, q: &CMatrix) -> CMatrix {
    let n = t.order();
    let smin = f64::EPSILON * t.fro_norm().max(f64::MIN_POSITIVE);
    let mut p = CMatrix::zeros(n);
    let mut y = vec![Complex::new(0.0, 0.0); n];
    for k in 0..n {
        for v in y.iter_mut() {
            *v = Complex::new(0.0, 0.0);
        }
        y[k] = Complex::new(1.0, 0.0);
        let lam = t[(k, k)];
        for j in (0..k).rev() {
            let mut acc = Complex::new(0.0, 0.0);
            for l in j + 1..=k {
                acc += t[(j, l)] * y[l];
            }
            let mut denom = t[(j, j)] - lam;
            if denom.norm() < smin {
                denom = Complex::new(smin, 0.0);
            }
            y[j] = -acc / denom;
        }
        // Column k of P = Q·y, normalized with deterministic phase.
        let mut col = vec![Complex::new(0.0, 0.0); n];
        for i in 0..n {
            let mut acc = Complex::new(0.0, 0.0);
            for l in 0..=k {
                acc += q[(i, l)] * y[l];
            }
            col[i] = acc;
        }
        let nrm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let mut biggest = 0usize;
        let mut big_val = 0.0f64;
        for (i, z) in col.iter().enumerate() {
            if z.norm() > big_val {
                big_val = z.norm();
                biggest = i;
            }
        }
        let phase = if big_val > 0.0 {
            let z = col[biggest];
            z.conj() / z.norm()
        } else {
            Complex::new(1.0, 0.0)
        };
        let f = phase / nrm.max(f64::MIN_POSITIVE);
        for i in 0..n {
            p[(i, k)] = col[i] * f;
        }
    }
    p
}
