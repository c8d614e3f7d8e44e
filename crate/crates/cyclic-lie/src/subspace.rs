//! Subspaces of a metric Lie algebra, stored as orthonormal bases with
//! respect to a caller-supplied gram matrix.

use nalgebra::{DMatrix, DVector};

use crate::linalg;

/// A linear subspace of ℝⁿ carried by an n×d matrix whose columns are
/// orthonormal for the inner product `⟨u, v⟩ = uᵗ G v` used to build it.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: DMatrix<f64>,
}

impl Subspace {
    /// Orthonormalize a spanning set; near-dependent vectors (G-norm residual
    /// at or below `drop_tol`) are dropped.
    pub fn from_spanning(vectors: &[DVector<f64>], gram: &DMatrix<f64>, drop_tol: f64) -> Self {
        let n = gram.nrows();
        let basis_vecs = linalg::mgs_orthonormalize(vectors, gram, drop_tol);
        let mut basis = DMatrix::zeros(n, basis_vecs.len());
        for (j, b) in basis_vecs.iter().enumerate() {
            basis.set_column(j, b);
        }
        Subspace {
            ambient_dim: n,
            basis,
        }
    }

    /// Wrap columns that are already G-orthonormal.
    pub fn from_orthonormal(basis: DMatrix<f64>) -> Self {
        Subspace {
            ambient_dim: basis.nrows(),
            basis,
        }
    }

    pub fn zero(ambient_dim: usize) -> Self {
        Subspace {
            ambient_dim,
            basis: DMatrix::zeros(ambient_dim, 0),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// The stored orthonormal basis, one column per basis vector.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn basis_vectors(&self) -> Vec<DVector<f64>> {
        (0..self.dim())
            .map(|j| self.basis.column(j).into_owned())
            .collect()
    }

    /// G-orthogonal projector onto the subspace: `P = B Bᵗ G`.
    pub fn projector(&self, gram: &DMatrix<f64>) -> DMatrix<f64> {
        &self.basis * self.basis.transpose() * gram
    }

    /// Coordinates of `v` in the stored basis (valid when `v` lies in the
    /// subspace): `Bᵗ G v`.
    pub fn coordinates(&self, v: &DVector<f64>, gram: &DMatrix<f64>) -> DVector<f64> {
        self.basis.transpose() * (gram * v)
    }

    /// Whether `v` lies in the subspace up to the absolute residual `tol`
    /// (Euclidean norm of the projection defect).
    pub fn contains(&self, v: &DVector<f64>, gram: &DMatrix<f64>, tol: f64) -> bool {
        self.projection_defect(v, gram) <= tol
    }

    /// Euclidean norm of `v - P v`.
    pub fn projection_defect(&self, v: &DVector<f64>, gram: &DMatrix<f64>) -> f64 {
        let proj = &self.basis * self.coordinates(v, gram);
        (v - proj).norm()
    }

    /// G-orthogonal complement.
    pub fn orthogonal_complement(&self, gram: &DMatrix<f64>, tol: f64) -> Subspace {
        if self.dim() == 0 {
            // The whole space, G-orthonormalized from the standard basis.
            let id = DMatrix::<f64>::identity(self.ambient_dim, self.ambient_dim);
            let cols: Vec<DVector<f64>> = (0..self.ambient_dim)
                .map(|i| id.column(i).into_owned())
                .collect();
            return Subspace::from_spanning(&cols, gram, tol);
        }
        let constraint = self.basis.transpose() * gram; // d×n, rows ⟂ complement
        let null = linalg::null_space(&constraint, tol);
        Subspace::from_spanning(&null, gram, tol)
    }
}
