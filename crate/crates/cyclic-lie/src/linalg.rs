//! Shared dense linear-algebra helpers on top of nalgebra.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Eigendecomposition of a symmetric matrix with eigenvalues sorted in
/// ascending order (nalgebra returns them unordered).
pub fn sym_eigen_sorted(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_fn(n, |i, _| eig.eigenvalues[order[i]]);
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Cholesky factorization of a symmetric positive-definite matrix, with a
/// descriptive error when the input fails either property.
pub fn cholesky_spd(g: &DMatrix<f64>, eps: f64) -> Result<Cholesky<f64, Dyn>> {
    let n = g.nrows();
    if g.ncols() != n {
        return Err(Error::NotPositiveDefinite {
            reason: format!("matrix is {}x{}, not square", g.nrows(), g.ncols()),
        });
    }
    let scale = g.amax().max(1.0);
    let asym = (g - g.transpose()).amax();
    if asym > eps * scale {
        return Err(Error::NotPositiveDefinite {
            reason: format!("asymmetry residual {asym:.3e}"),
        });
    }
    Cholesky::new(g.clone()).ok_or_else(|| {
        let (vals, _) = sym_eigen_sorted(g);
        Error::NotPositiveDefinite {
            reason: format!("smallest eigenvalue {:.3e}", vals[0]),
        }
    })
}

/// Symmetric square root and inverse square root of a positive-definite
/// matrix.
pub fn spd_sqrt_inv_sqrt(g: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (vals, vecs) = sym_eigen_sorted(g);
    if vals[0] <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            reason: format!("smallest eigenvalue {:.3e}", vals[0]),
        });
    }
    let sqrt_d = DMatrix::from_diagonal(&vals.map(f64::sqrt));
    let inv_sqrt_d = DMatrix::from_diagonal(&vals.map(|v| 1.0 / v.sqrt()));
    let sqrt = &vecs * sqrt_d * vecs.transpose();
    let inv_sqrt = &vecs * inv_sqrt_d * vecs.transpose();
    Ok((sqrt, inv_sqrt))
}

/// One-sided Jacobi SVD: `m = U · diag(sigma) · Vᵗ` with `sigma` sorted
/// descending, `v` exactly orthogonal (a product of plane rotations) and
/// `u` with orthonormal columns (rank-deficient directions padded with an
/// orthonormal complement). The bidiagonal-QR SVD bundled with nalgebra can
/// lose ~1e-6 of accuracy in the singular vectors of small dense matrices,
/// which is fatal for subspace decisions at 1e-9 tolerances; one-sided
/// Jacobi converges to working precision on these sizes.
pub fn jacobi_svd(m: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let (rows, cols) = m.shape();
    if rows < cols {
        let (u, s, v) = jacobi_svd(&m.transpose());
        return (v, s, u);
    }
    let mut a = m.clone();
    let mut v = DMatrix::<f64>::identity(cols, cols);
    let eps = f64::EPSILON;
    for _ in 0..60 {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let app = a.column(p).norm_squared();
                let aqq = a.column(q).norm_squared();
                let apq = a.column(p).dot(&a.column(q));
                if apq == 0.0 || apq.abs() <= eps * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (aqq - app) / (2.0 * apq);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for i in 0..rows {
                    let x = a[(i, p)];
                    let y = a[(i, q)];
                    a[(i, p)] = cs * x - sn * y;
                    a[(i, q)] = sn * x + cs * y;
                }
                for i in 0..cols {
                    let x = v[(i, p)];
                    let y = v[(i, q)];
                    v[(i, p)] = cs * x - sn * y;
                    v[(i, q)] = sn * x + cs * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..cols).map(|j| a.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let mut sigma = DVector::<f64>::zeros(cols);
    let mut v_sorted = DMatrix::<f64>::zeros(cols, cols);
    let mut u = DMatrix::<f64>::zeros(rows, cols);
    for (dst, &src) in order.iter().enumerate() {
        sigma[dst] = norms[src];
        v_sorted.set_column(dst, &v.column(src));
    }
    let floor = if cols == 0 {
        0.0
    } else {
        sigma[0] * eps * rows.max(1) as f64
    };
    let mut present: Vec<DVector<f64>> = Vec::new();
    let mut missing = Vec::new();
    for (dst, &src) in order.iter().enumerate() {
        if sigma[dst] > floor {
            let col = a.column(src).into_owned() / sigma[dst];
            u.set_column(dst, &col);
            present.push(col);
        } else {
            missing.push(dst);
        }
    }
    if !missing.is_empty() {
        let id = DMatrix::<f64>::identity(rows, rows);
        let kept = present.len();
        let mut candidates = present;
        for i in 0..rows {
            candidates.push(id.column(i).into_owned());
        }
        let full = mgs_orthonormalize(&candidates, &id, 1e-8);
        for (dst, col) in missing.into_iter().zip(full.into_iter().skip(kept)) {
            u.set_column(dst, &col);
        }
    }
    (u, sigma, v_sorted)
}

pub fn singular_values(m: &DMatrix<f64>) -> DVector<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return DVector::zeros(m.nrows().min(m.ncols()));
    }
    jacobi_svd(m).1
}

/// Rank of a matrix: number of singular values above the absolute threshold.
pub fn rank_svd(m: &DMatrix<f64>, tol_abs: f64) -> usize {
    singular_values(m).iter().filter(|&&s| s > tol_abs).count()
}

/// Orthonormal (Euclidean) basis of the right null space `{x : Mx = 0}`.
pub fn null_space(m: &DMatrix<f64>, tol_abs: f64) -> Vec<DVector<f64>> {
    let n = m.ncols();
    if m.nrows() == 0 {
        return (0..n)
            .map(|i| DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 }))
            .collect();
    }
    let (_, sigma, v) = jacobi_svd(m);
    // The null space is the orthogonal complement of the row space, i.e. of
    // the right singular vectors with singular value above the threshold.
    // Small-σ columns of v lead the candidate list (they are already in the
    // complement); identity columns cover directions a thin factor omits.
    let mut candidates: Vec<DVector<f64>> = Vec::new();
    let mut rank = 0usize;
    for j in 0..sigma.len() {
        if sigma[j] > tol_abs {
            candidates.push(v.column(j).into_owned());
            rank += 1;
        }
    }
    for j in 0..sigma.len() {
        if sigma[j] <= tol_abs {
            candidates.push(v.column(j).into_owned());
        }
    }
    let id = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        candidates.push(id.column(i).into_owned());
    }
    let full = mgs_orthonormalize(&candidates, &id, 1e-8);
    full.into_iter().skip(rank).collect()
}

/// Modified Gram–Schmidt with re-orthogonalization, relative to the inner
/// product `⟨u, v⟩ = uᵗ G v`. Vectors whose residual after projection falls
/// at or below `drop_tol` (absolute, in G-norm) are discarded.
pub fn mgs_orthonormalize(
    vectors: &[DVector<f64>],
    gram: &DMatrix<f64>,
    drop_tol: f64,
) -> Vec<DVector<f64>> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        // Two passes of projection keep orthogonality near machine precision
        // even for badly conditioned spanning sets.
        for _ in 0..2 {
            for b in &basis {
                let coef = w.dot(&(gram * b));
                w -= b * coef;
            }
        }
        let norm = w.dot(&(gram * &w)).max(0.0).sqrt();
        if norm > drop_tol {
            basis.push(w / norm);
        }
    }
    basis
}

/// Greedy column pivoting: returns `count` column indices chosen so that each
/// new column has the largest residual norm after projecting out the span of
/// the columns already chosen.
pub fn greedy_pivot_columns(m: &DMatrix<f64>, count: usize) -> Vec<usize> {
    let mut residual: Vec<DVector<f64>> =
        (0..m.ncols()).map(|j| m.column(j).into_owned()).collect();
    let mut chosen: Vec<usize> = Vec::with_capacity(count);
    for _ in 0..count {
        let mut best = None;
        let mut best_norm = 0.0;
        for (j, r) in residual.iter().enumerate() {
            if chosen.contains(&j) {
                continue;
            }
            let norm = r.norm();
            if norm > best_norm {
                best_norm = norm;
                best = Some(j);
            }
        }
        let Some(j) = best else { break };
        let dir = &residual[j] / best_norm;
        for (k, r) in residual.iter_mut().enumerate() {
            if k != j && !chosen.contains(&k) {
                let coef = r.dot(&dir);
                *r -= &dir * coef;
            }
        }
        chosen.push(j);
    }
    chosen.sort_unstable();
    chosen
}

/// Polar decomposition `M = O S` with `O` orthogonal and `S` symmetric
/// positive semidefinite, via the SVD.
pub fn polar_decomposition(m: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let (u, sigma, v) = jacobi_svd(m);
    let o = &u * v.transpose();
    let s = &v * DMatrix::from_diagonal(&sigma) * v.transpose();
    (o, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing;

    fn reconstruction_error(m: &DMatrix<f64>) -> f64 {
        let (u, sigma, v) = jacobi_svd(m);
        let recon = &u * DMatrix::from_diagonal(&sigma) * v.transpose();
        let ortho_v = (v.transpose() * &v - DMatrix::<f64>::identity(v.ncols(), v.ncols())).amax();
        let ortho_u = (u.transpose() * &u - DMatrix::<f64>::identity(u.ncols(), u.ncols())).amax();
        (m - recon).amax().max(ortho_v).max(ortho_u)
    }

    #[test]
    fn jacobi_svd_reconstructs_assorted_shapes() {
        let mut rng = testing::rng(7);
        for (r, c) in [(5, 5), (10, 4), (4, 10), (7, 10), (1, 6), (6, 1)] {
            let m = testing::random_gaussian_matrix(&mut rng, r, c);
            let err = reconstruction_error(&m);
            assert!(err < 1e-12, "({r}, {c}): error {err:.3e}");
        }
        assert_eq!(reconstruction_error(&DMatrix::zeros(4, 3)), 0.0);
    }

    #[test]
    fn jacobi_svd_sorts_descending_and_matches_norms() {
        let mut rng = testing::rng(11);
        let m = testing::random_gaussian_matrix(&mut rng, 6, 6);
        let sigma = singular_values(&m);
        for i in 1..sigma.len() {
            assert!(sigma[i - 1] >= sigma[i]);
        }
        // Frobenius norm identity.
        let fro2: f64 = m.iter().map(|v| v * v).sum();
        let sum2: f64 = sigma.iter().map(|v| v * v).sum();
        assert!((fro2 - sum2).abs() < 1e-12 * fro2.max(1.0));
    }

    #[test]
    fn null_space_is_exact_on_low_rank_matrices() {
        // Regression shape: a 7x10 matrix of rank 3. The stock nalgebra SVD
        // returns singular vectors polluted at the 1e-5 level here, which
        // used to leak into radical/complement computations downstream.
        let mut rng = testing::rng(9268939756632251482);
        for _ in 0..20 {
            let u = testing::random_orthogonal(&mut rng, 7);
            let v = testing::random_orthogonal(&mut rng, 10);
            let mut sigma = DMatrix::zeros(7, 10);
            sigma[(0, 0)] = 6.171;
            sigma[(1, 1)] = 3.772;
            sigma[(2, 2)] = 2.622;
            let m = u * sigma * v.transpose();
            let kernel = null_space(&m, 1e-8);
            assert_eq!(kernel.len(), 7);
            for w in &kernel {
                assert!(
                    (&m * w).norm() < 1e-12,
                    "null residual {:.3e}",
                    (&m * w).norm()
                );
                assert!((w.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn polar_decomposition_factors_correctly() {
        let mut rng = testing::rng(21);
        let m = testing::random_well_conditioned(&mut rng, 5);
        let (o, s) = polar_decomposition(&m);
        assert!((o.transpose() * &o - DMatrix::<f64>::identity(5, 5)).amax() < 1e-12);
        assert!((&s - s.transpose()).amax() < 1e-12);
        assert!((&o * &s - &m).amax() < 1e-12);
    }
}
