//! Small dense tensor containers for covariant-derivative data.
//!
//! Dimensions here stay in the single or low double digits, so flat `Vec`
//! storage with explicit index arithmetic is simpler and faster than anything
//! fancier.

use nalgebra::DMatrix;

/// Dense 3-index tensor `T[a][b][c]`, all indices of the same dimension `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(n: usize) -> Self {
        Tensor3 {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[(a * self.n + b) * self.n + c]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, value: f64) {
        self.data[(a * self.n + b) * self.n + c] = value;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Tensor3) -> f64 {
        assert_eq!(self.n, other.n, "tensor dimensions differ");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().copied()
    }
}

/// Covariant derivative of the curvature tensor: for each direction `a` and
/// argument pair `(b, c)` an operator matrix whose column `d` holds the
/// coordinates of `(∇_{e_a} K)(e_b, e_c) e_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct NablaCurvature {
    n: usize,
    mats: Vec<DMatrix<f64>>,
}

impl NablaCurvature {
    pub fn new(n: usize, mats: Vec<DMatrix<f64>>) -> Self {
        assert_eq!(mats.len(), n * n * n);
        NablaCurvature { n, mats }
    }

    pub fn zeros(n: usize) -> Self {
        NablaCurvature {
            n,
            mats: vec![DMatrix::zeros(n, n); n * n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Operator matrix of `(∇_{e_a} K)(e_b, e_c)`.
    #[inline]
    pub fn operator(&self, a: usize, b: usize, c: usize) -> &DMatrix<f64> {
        &self.mats[(a * self.n + b) * self.n + c]
    }

    #[inline]
    pub fn operator_mut(&mut self, a: usize, b: usize, c: usize) -> &mut DMatrix<f64> {
        &mut self.mats[(a * self.n + b) * self.n + c]
    }

    /// Component `l` of `(∇_{e_a} K)(e_b, e_c) e_d`.
    #[inline]
    pub fn component(&self, a: usize, b: usize, c: usize, d: usize, l: usize) -> f64 {
        self.operator(a, b, c)[(l, d)]
    }

    pub fn max_abs(&self) -> f64 {
        self.mats.iter().fold(0.0, |m, mat| m.max(mat.amax()))
    }

    pub fn max_abs_diff(&self, other: &NablaCurvature) -> f64 {
        assert_eq!(self.n, other.n, "tensor dimensions differ");
        self.mats
            .iter()
            .zip(&other.mats)
            .fold(0.0, |m, (a, b)| m.max((a - b).amax()))
    }
}
