//! Lie algebras with structure constants, inner products, and the structural
//! predicates built from them.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::subspace::Subspace;
use crate::tolerance::ToleranceConfig;

/// A finite-dimensional real Lie algebra given by structure constants
/// `[e_i, e_j] = Σ_k C[i][j][k] e_k`.
///
/// Constants are stored as the adjoint matrices `ad_i` with
/// `(ad_i)[(k, j)] = C[i][j][k]`, i.e. column `j` of `ad_i` holds the
/// coordinates of `[e_i, e_j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebra {
    dim: usize,
    ads: Vec<DMatrix<f64>>,
}

/// Nilpotency / solvability summary computed from the structure constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuralFlags {
    pub abelian: bool,
    pub nilpotent: bool,
    pub solvable: bool,
    /// The derived ideal is abelian (solvability in two steps).
    pub two_solvable: bool,
}

impl LieAlgebra {
    /// Build from adjoint matrices, validating antisymmetry of the bracket.
    pub fn new(ads: Vec<DMatrix<f64>>) -> Result<Self> {
        let alg = Self::new_unchecked(ads)?;
        let residual = alg.antisymmetry_residual();
        let scale = alg.structure_scale();
        if residual > 1e-12 * scale {
            return Err(Error::NotAntisymmetric { residual });
        }
        Ok(alg)
    }

    /// Build without the antisymmetry check. Useful for validating raw input
    /// (`check_jacobi` and friends still work on such data).
    pub fn new_unchecked(ads: Vec<DMatrix<f64>>) -> Result<Self> {
        let dim = ads.len();
        for m in &ads {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: m.nrows().max(m.ncols()),
                });
            }
        }
        Ok(LieAlgebra { dim, ads })
    }

    /// Build from a component function `C(i, j, k)`.
    pub fn from_components(dim: usize, c: impl Fn(usize, usize, usize) -> f64) -> Result<Self> {
        let ads = (0..dim)
            .map(|i| DMatrix::from_fn(dim, dim, |k, j| c(i, j, k)))
            .collect();
        Self::new(ads)
    }

    /// Build from a list of brackets `[e_i, e_j]` for pairs `i < j`; the
    /// antisymmetric counterparts are filled in automatically and omitted
    /// pairs are zero.
    pub fn from_bracket_list(
        dim: usize,
        brackets: &[(usize, usize, DVector<f64>)],
    ) -> Result<Self> {
        let mut ads = vec![DMatrix::zeros(dim, dim); dim];
        let mut seen = std::collections::HashSet::new();
        for (i, j, coeffs) in brackets {
            if *i >= *j {
                return Err(Error::InvalidParameter(format!(
                    "bracket pair ({i}, {j}) must satisfy i < j"
                )));
            }
            if *j >= dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: *j + 1,
                });
            }
            if coeffs.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: coeffs.len(),
                });
            }
            if !seen.insert((*i, *j)) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate bracket pair ({i}, {j})"
                )));
            }
            ads[*i].set_column(*j, coeffs);
            ads[*j].set_column(*i, &(-coeffs));
        }
        Self::new(ads)
    }

    pub fn abelian(dim: usize) -> Self {
        LieAlgebra {
            dim,
            ads: vec![DMatrix::zeros(dim, dim); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Structure constant `C[i][j][k]`.
    pub fn structure(&self, i: usize, j: usize, k: usize) -> f64 {
        self.ads[i][(k, j)]
    }

    /// Adjoint matrix of the basis vector `e_i`.
    pub fn ad(&self, i: usize) -> &DMatrix<f64> {
        &self.ads[i]
    }

    /// Adjoint matrix of an arbitrary vector.
    pub fn ad_of(&self, u: &DVector<f64>) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            if u[i] != 0.0 {
                m += &self.ads[i] * u[i];
            }
        }
        m
    }

    /// Coordinates of `[e_i, e_j]`.
    pub fn bracket_basis(&self, i: usize, j: usize) -> DVector<f64> {
        self.ads[i].column(j).into_owned()
    }

    /// Bracket of two coordinate vectors.
    pub fn bracket(&self, u: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
        if u.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: u.len(),
            });
        }
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        Ok(self.ad_of(u) * v)
    }

    /// Largest |C[i][j][k]|.
    pub fn max_structure_abs(&self) -> f64 {
        self.ads
            .iter()
            .fold(0.0, |m, a| if a.is_empty() { m } else { m.max(a.amax()) })
    }

    /// `max(1, max |C|)` — the scale factor for structure-constant residuals.
    pub fn structure_scale(&self) -> f64 {
        self.max_structure_abs().max(1.0)
    }

    pub fn antisymmetry_residual(&self) -> f64 {
        let mut residual = 0.0f64;
        for i in 0..self.dim {
            for j in 0..=i {
                let defect = (self.ads[i].column(j) + self.ads[j].column(i)).amax();
                residual = residual.max(defect);
            }
        }
        residual
    }

    /// Supremum-norm residual of the Jacobi identity over all ordered basis
    /// triples (no antisymmetry is assumed of the stored constants, so the
    /// scan is a genuine brute-force check).
    pub fn jacobi_residual(&self) -> f64 {
        let mut residual = 0.0f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                for k in 0..self.dim {
                    let jac = &self.ads[i] * self.ads[j].column(k)
                        + &self.ads[j] * self.ads[k].column(i)
                        + &self.ads[k] * self.ads[i].column(j);
                    residual = residual.max(jac.amax());
                }
            }
        }
        residual
    }

    /// Jacobi identity up to `eps_eq` scaled by the squared structure-constant
    /// magnitude (the identity is quadratic in the constants).
    pub fn check_jacobi(&self, tol: &ToleranceConfig) -> bool {
        let scale = self.structure_scale();
        self.jacobi_residual() <= tol.eps_eq * scale * scale
    }

    /// Killing form `B(e_i, e_j) = tr(ad_i ∘ ad_j)`, symmetric by
    /// construction (entries are computed once per unordered pair).
    pub fn killing_form(&self) -> DMatrix<f64> {
        let mut b = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for j in 0..=i {
                let v = (&self.ads[i] * &self.ads[j]).trace();
                b[(i, j)] = v;
                b[(j, i)] = v;
            }
        }
        b
    }

    /// Trace of `ad_{e_i}` for every `i` (the unimodularity defect vector).
    pub fn ad_traces(&self) -> DVector<f64> {
        DVector::from_fn(self.dim, |i, _| self.ads[i].trace())
    }

    /// Transport the structure constants to the basis given by the columns
    /// of `t`: the returned algebra has `[ê_a, ê_b] = T⁻¹ [T ê_a, T ê_b]`.
    pub fn change_basis(&self, t: &DMatrix<f64>) -> Result<LieAlgebra> {
        if t.nrows() != self.dim || t.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: t.nrows().max(t.ncols()),
            });
        }
        let lu = t.clone().lu();
        if lu.try_inverse().is_none() {
            return Err(Error::Degenerate(
                "change-of-basis matrix is singular".to_string(),
            ));
        }
        let mut ads = vec![DMatrix::zeros(self.dim, self.dim); self.dim];
        for (a, ad) in ads.iter_mut().enumerate() {
            let ta = t.column(a).into_owned();
            let ad_ta = self.ad_of(&ta);
            for b in 0..self.dim {
                let w = &ad_ta * t.column(b);
                let coords = lu
                    .solve(&w)
                    .ok_or_else(|| Error::Degenerate("change-of-basis solve failed".into()))?;
                ad.set_column(b, &coords);
            }
        }
        LieAlgebra::new_unchecked(ads)
    }

    /// Span of all brackets `[e_i, e_j]`, orthonormal for `gram`.
    pub fn derived_ideal_with_gram(&self, gram: &DMatrix<f64>, tol: &ToleranceConfig) -> Subspace {
        let mut spanning = Vec::new();
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                spanning.push(self.bracket_basis(i, j));
            }
        }
        let drop = tol.eps_rank * self.structure_scale();
        Subspace::from_spanning(&spanning, gram, drop)
    }

    /// Center `{x : [x, g] = 0}`, orthonormal for `gram`.
    pub fn center_with_gram(&self, gram: &DMatrix<f64>, tol: &ToleranceConfig) -> Subspace {
        // Stack the maps x ↦ [x, e_j]: row block j has entries
        // M[(j,k), i] = C[i][j][k].
        let n = self.dim;
        let mut m = DMatrix::zeros(n * n, n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    m[(j * n + k, i)] = self.structure(i, j, k);
                }
            }
        }
        let null = linalg::null_space(&m, tol.eps_rank * self.structure_scale());
        Subspace::from_spanning(&null, gram, tol.eps_rank)
    }

    /// Span of `[A, B]` for two subspaces, orthonormal for `gram`.
    fn bracket_span(&self, a: &Subspace, b: &Subspace, gram: &DMatrix<f64>, drop: f64) -> Subspace {
        let mut spanning = Vec::new();
        for u in a.basis_vectors() {
            let ad_u = self.ad_of(&u);
            for v in b.basis_vectors() {
                spanning.push(&ad_u * &v);
            }
        }
        Subspace::from_spanning(&spanning, gram, drop)
    }

    /// Abelian / nilpotent / solvable / two-step-solvable flags via the lower
    /// central and derived series (iterated until the dimension stabilizes).
    pub fn structural_flags(&self, tol: &ToleranceConfig) -> StructuralFlags {
        let gram = DMatrix::<f64>::identity(self.dim, self.dim);
        let drop = tol.eps_rank * self.structure_scale();
        let full = Subspace::from_orthonormal(gram.clone());

        let derived = self.derived_ideal_with_gram(&gram, tol);
        let abelian = derived.dim() == 0;

        // Lower central series: g_{s+1} = [g, g_s].
        let mut lower = derived.clone();
        loop {
            if lower.dim() == 0 {
                break;
            }
            let next = self.bracket_span(&full, &lower, &gram, drop);
            if next.dim() >= lower.dim() {
                break;
            }
            lower = next;
        }
        let nilpotent = lower.dim() == 0;

        // Derived series: g^{s+1} = [g^s, g^s].
        let mut series = derived.clone();
        let second = self.bracket_span(&series, &series, &gram, drop);
        let two_solvable = second.dim() == 0;
        let mut current_second = second;
        loop {
            if series.dim() == 0 {
                break;
            }
            if current_second.dim() >= series.dim() {
                break;
            }
            series = current_second;
            current_second = self.bracket_span(&series, &series, &gram, drop);
        }
        let solvable = series.dim() == 0;

        StructuralFlags {
            abelian,
            nilpotent,
            solvable,
            two_solvable,
        }
    }
}

/// A Lie algebra together with a positive-definite inner product given by a
/// gram matrix in the structure-constant basis.
#[derive(Debug, Clone)]
pub struct MetricLieAlgebra {
    algebra: LieAlgebra,
    gram: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
}

impl MetricLieAlgebra {
    pub fn new(algebra: LieAlgebra, gram: DMatrix<f64>) -> Result<Self> {
        if gram.nrows() != algebra.dim() || gram.ncols() != algebra.dim() {
            return Err(Error::DimensionMismatch {
                expected: algebra.dim(),
                got: gram.nrows().max(gram.ncols()),
            });
        }
        let chol = linalg::cholesky_spd(&gram, 1e-12)?;
        Ok(MetricLieAlgebra {
            algebra,
            gram,
            chol,
        })
    }

    /// Euclidean metric on the structure-constant basis.
    pub fn with_identity_gram(algebra: LieAlgebra) -> Self {
        let n = algebra.dim();
        Self::new(algebra, DMatrix::identity(n, n)).expect("identity gram is positive-definite")
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn inner(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        (u.transpose() * &self.gram * v)[(0, 0)]
    }

    pub fn norm(&self, u: &DVector<f64>) -> f64 {
        self.inner(u, u).max(0.0).sqrt()
    }

    /// Solve `G x = rhs`.
    pub fn solve_gram(&self, rhs: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(rhs)
    }

    /// `max(1, max |C|, max |G|)` — the residual scale of this structure.
    pub fn scale(&self) -> f64 {
        self.algebra
            .max_structure_abs()
            .max(self.gram.amax())
            .max(1.0)
    }

    /// Columns of the returned matrix form a gram-orthonormal frame
    /// (`Uᵗ G U = 1`), built from the Cholesky factor.
    pub fn orthonormal_frame(&self) -> DMatrix<f64> {
        let n = self.dim();
        let l_t = self.chol.l().transpose();
        l_t.solve_upper_triangular(&DMatrix::identity(n, n))
            .expect("Cholesky factor is invertible")
    }

    /// Supremum over basis triples `i < j < k` of the cyclic-sum defect
    /// `⟨[e_i,e_j],e_k⟩ + ⟨[e_j,e_k],e_i⟩ + ⟨[e_k,e_i],e_j⟩`.
    ///
    /// The cyclic sum is an alternating trilinear form, so it vanishes
    /// everywhere iff it vanishes on these triples.
    pub fn cyclic_residual(&self) -> f64 {
        let n = self.dim();
        // gc[i][j] = G [e_i, e_j], so ⟨[e_i,e_j], e_k⟩ = gc[i][j][k].
        let gc: Vec<DMatrix<f64>> = (0..n).map(|i| &self.gram * self.algebra.ad(i)).collect();
        let mut residual = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    let sum = gc[i][(k, j)] + gc[j][(i, k)] + gc[k][(j, i)];
                    residual = residual.max(sum.abs());
                }
            }
        }
        residual
    }

    /// Whether the metric is cyclic: the cyclic sum of `⟨[x,y],z⟩` vanishes
    /// (up to `eps_eq` times the structure scale).
    pub fn check_cyclic(&self, tol: &ToleranceConfig) -> bool {
        self.cyclic_residual() <= tol.eps_eq * self.scale()
    }

    pub fn killing_form(&self) -> DMatrix<f64> {
        self.algebra.killing_form()
    }

    /// The vector `H` with `⟨H, u⟩ = tr(ad_u)` for all `u` (the mean
    /// curvature vector of the corresponding left-invariant metric).
    pub fn mean_curvature_vector(&self) -> DVector<f64> {
        self.solve_gram(&self.algebra.ad_traces())
    }

    pub fn derived_ideal(&self, tol: &ToleranceConfig) -> Subspace {
        self.algebra.derived_ideal_with_gram(&self.gram, tol)
    }

    pub fn center(&self, tol: &ToleranceConfig) -> Subspace {
        self.algebra.center_with_gram(&self.gram, tol)
    }

    pub fn structural_flags(&self, tol: &ToleranceConfig) -> StructuralFlags {
        self.algebra.structural_flags(tol)
    }

    /// Transport both the structure constants and the gram matrix to the
    /// basis given by the columns of `t`.
    pub fn change_basis(&self, t: &DMatrix<f64>) -> Result<MetricLieAlgebra> {
        let algebra = self.algebra.change_basis(t)?;
        let gram = t.transpose() * &self.gram * t;
        // Symmetrize away the round-off from the congruence product.
        let gram = (&gram + gram.transpose()) * 0.5;
        MetricLieAlgebra::new(algebra, gram)
    }

    /// Check that `delta` is an invertible antiderivation of the bracket that
    /// is symmetric for the (nondegenerate) bilinear form `k_form`:
    ///
    /// * `k(δx, y) = k(x, δy)`,
    /// * `δ[x, y] = -[δx, y] - [x, δy]`.
    ///
    /// Returns an error when `k_form` is degenerate or `delta` is singular,
    /// since the check is meaningless there.
    pub fn check_anti_derivation(
        &self,
        k_form: &DMatrix<f64>,
        delta: &DMatrix<f64>,
        tol: &ToleranceConfig,
    ) -> Result<bool> {
        let n = self.dim();
        if k_form.nrows() != n || k_form.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: k_form.nrows().max(k_form.ncols()),
            });
        }
        if delta.nrows() != n || delta.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: delta.nrows().max(delta.ncols()),
            });
        }
        let k_scale = k_form.amax().max(1.0);
        let d_scale = delta.amax().max(1.0);
        let k_min = linalg::singular_values(k_form)[n - 1];
        if k_min <= tol.eps_rank * k_scale {
            return Err(Error::Degenerate(format!(
                "bilinear form is degenerate (smallest singular value {k_min:.3e})"
            )));
        }
        let d_min = linalg::singular_values(delta)[n - 1];
        if d_min <= tol.eps_rank * d_scale {
            return Err(Error::Degenerate(format!(
                "candidate map is singular (smallest singular value {d_min:.3e})"
            )));
        }

        // Symmetry for k: k δ must be a symmetric matrix.
        let kd = k_form * delta;
        let sym_residual = (&kd - kd.transpose()).amax();
        if sym_residual > tol.eps_eq * k_scale * d_scale {
            return Ok(false);
        }

        // Antiderivation property on basis pairs.
        let c_scale = self.algebra.structure_scale();
        let mut residual = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                let lhs = delta * self.algebra.bracket_basis(i, j);
                let di = delta.column(i).into_owned();
                let dj = delta.column(j).into_owned();
                let ej = DVector::from_fn(n, |k, _| if k == j { 1.0 } else { 0.0 });
                let ei = DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 });
                let rhs = -(self.algebra.ad_of(&di) * ej) - self.algebra.ad_of(&ei) * dj;
                residual = residual.max((lhs - rhs).amax());
            }
        }
        Ok(residual <= tol.eps_eq * c_scale * d_scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sl2;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    /// Solvable model on basis (h, f) with [h, f] = f.
    fn model_11() -> MetricLieAlgebra {
        let brackets = vec![(0usize, 1usize, DVector::from_vec(vec![0.0, 1.0]))];
        let alg = LieAlgebra::from_bracket_list(2, &brackets).unwrap();
        MetricLieAlgebra::with_identity_gram(alg)
    }

    /// Solvable model on basis (h, f1, f2) with [h, f1] = f1, [h, f2] = 2 f2.
    fn model_12() -> MetricLieAlgebra {
        let brackets = vec![
            (0usize, 1usize, DVector::from_vec(vec![0.0, 1.0, 0.0])),
            (0usize, 2usize, DVector::from_vec(vec![0.0, 0.0, 2.0])),
        ];
        let alg = LieAlgebra::from_bracket_list(3, &brackets).unwrap();
        MetricLieAlgebra::with_identity_gram(alg)
    }

    #[test]
    fn bracket_of_abelian_algebra_vanishes() {
        let alg = LieAlgebra::abelian(3);
        let u = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let v = DVector::from_vec(vec![-1.0, 0.5, 0.0]);
        assert_eq!(alg.bracket(&u, &v).unwrap().amax(), 0.0);
    }

    #[test]
    fn bracket_matches_structure_constants() {
        let mla = model_11();
        let h = DVector::from_vec(vec![1.0, 0.0]);
        let f = DVector::from_vec(vec![0.0, 1.0]);
        let hf = mla.algebra().bracket(&h, &f).unwrap();
        assert_eq!(hf, f);
        let fh = mla.algebra().bracket(&f, &h).unwrap();
        assert_eq!(fh, -f);
    }

    #[test]
    fn bracket_rejects_wrong_dimension() {
        let alg = LieAlgebra::abelian(3);
        let u = DVector::from_vec(vec![1.0, 2.0]);
        let v = DVector::from_vec(vec![0.0, 0.0, 1.0]);
        assert!(matches!(
            alg.bracket(&u, &v),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn jacobi_holds_for_models() {
        assert!(LieAlgebra::abelian(4).check_jacobi(&tol()));
        assert!(model_12().algebra().check_jacobi(&tol()));
        assert!(sl2::sl2_brackets().check_jacobi(&tol()));
    }

    #[test]
    fn jacobi_detects_broken_structure() {
        // Perturbing a single component (without its antisymmetric partner)
        // breaks the identity on triples with a repeated index.
        let mut ads: Vec<DMatrix<f64>> =
            (0..3).map(|i| sl2::sl2_brackets().ad(i).clone()).collect();
        ads[0][(2, 1)] += 0.5;
        let broken = LieAlgebra::new_unchecked(ads).unwrap();
        assert!(!broken.check_jacobi(&tol()));
        assert!(broken.jacobi_residual() > 0.9);
    }

    #[test]
    fn antisymmetry_is_validated() {
        let mut ads = vec![DMatrix::zeros(2, 2); 2];
        ads[0][(0, 1)] = 1.0; // [e0, e1] = e0 but [e1, e0] missing
        assert!(matches!(
            LieAlgebra::new(ads),
            Err(Error::NotAntisymmetric { .. })
        ));
    }

    #[test]
    fn killing_form_of_models() {
        // Abelian: zero.
        assert_eq!(LieAlgebra::abelian(3).killing_form().amax(), 0.0);
        // One-parameter solvable model with weight λ: B = diag(λ², 0).
        for lambda in [1.0, -2.5, 0.75] {
            let brackets = vec![(0usize, 1usize, DVector::from_vec(vec![0.0, lambda]))];
            let alg = LieAlgebra::from_bracket_list(2, &brackets).unwrap();
            let b = alg.killing_form();
            let expected = DMatrix::from_row_slice(2, 2, &[lambda * lambda, 0.0, 0.0, 0.0]);
            assert!((b - expected).amax() < 1e-14);
        }
    }

    #[test]
    fn cyclic_check_on_solvable_models() {
        assert!(model_11().check_cyclic(&tol()));
        assert!(model_12().check_cyclic(&tol()));
    }

    #[test]
    fn mean_curvature_of_models() {
        assert_eq!(
            MetricLieAlgebra::with_identity_gram(LieAlgebra::abelian(3))
                .mean_curvature_vector()
                .amax(),
            0.0
        );
        // Weights 1 and 2 : tr(ad_h) = 3, so H = 3h.
        let h = model_12().mean_curvature_vector();
        assert!((h - DVector::from_vec(vec![3.0, 0.0, 0.0])).amax() < 1e-14);
    }

    #[test]
    fn derived_ideal_and_center_of_models() {
        let t = tol();
        let abelian = MetricLieAlgebra::with_identity_gram(LieAlgebra::abelian(3));
        assert_eq!(abelian.derived_ideal(&t).dim(), 0);
        assert_eq!(abelian.center(&t).dim(), 3);

        let m = model_12();
        let derived = m.derived_ideal(&t);
        assert_eq!(derived.dim(), 2);
        // Spanned by f1, f2.
        let f1 = DVector::from_vec(vec![0.0, 1.0, 0.0]);
        assert!(derived.contains(&f1, m.gram(), 1e-12));
        assert_eq!(m.center(&t).dim(), 0);
    }

    #[test]
    fn zero_weight_column_is_central() {
        // Weights (1,0,0) / (0,1,0) on three generators: the third generator
        // pairs with a zero weight column and is therefore central, and the
        // derived ideal only picks up the first two.
        let brackets = vec![
            (
                0usize,
                2usize,
                DVector::from_vec(vec![0.0, 0.0, 1.0, 0.0, 0.0]),
            ),
            (
                1usize,
                3usize,
                DVector::from_vec(vec![0.0, 0.0, 0.0, 1.0, 0.0]),
            ),
        ];
        let alg = LieAlgebra::from_bracket_list(5, &brackets).unwrap();
        let m = MetricLieAlgebra::with_identity_gram(alg);
        let t = tol();
        assert_eq!(m.derived_ideal(&t).dim(), 2);
        let center = m.center(&t);
        assert_eq!(center.dim(), 1);
        let f3 = DVector::from_vec(vec![0.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(center.contains(&f3, m.gram(), 1e-12));
    }

    #[test]
    fn full_weight_matrix_has_trivial_center() {
        // Weight columns (1,0), (0,1), (1,0): no zero column, so the center
        // is trivial and the derived ideal is the full generator span.
        let brackets = vec![
            (
                0usize,
                2usize,
                DVector::from_vec(vec![0.0, 0.0, 1.0, 0.0, 0.0]),
            ),
            (
                0usize,
                4usize,
                DVector::from_vec(vec![0.0, 0.0, 0.0, 0.0, 1.0]),
            ),
            (
                1usize,
                3usize,
                DVector::from_vec(vec![0.0, 0.0, 0.0, 1.0, 0.0]),
            ),
        ];
        let alg = LieAlgebra::from_bracket_list(5, &brackets).unwrap();
        let m = MetricLieAlgebra::with_identity_gram(alg);
        let t = tol();
        assert_eq!(m.derived_ideal(&t).dim(), 3);
        assert_eq!(m.center(&t).dim(), 0);
    }

    #[test]
    fn structural_flags_of_models() {
        let t = tol();
        let abelian = LieAlgebra::abelian(3).structural_flags(&t);
        assert!(abelian.abelian && abelian.nilpotent && abelian.solvable && abelian.two_solvable);

        let solvable = model_12().structural_flags(&t);
        assert!(!solvable.abelian);
        assert!(!solvable.nilpotent);
        assert!(solvable.solvable && solvable.two_solvable);

        let simple = sl2::sl2_brackets().structural_flags(&t);
        assert!(!simple.abelian && !simple.nilpotent && !simple.solvable && !simple.two_solvable);
    }

    #[test]
    fn gram_validation() {
        let alg = LieAlgebra::abelian(2);
        let not_spd = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            MetricLieAlgebra::new(alg.clone(), not_spd),
            Err(Error::NotPositiveDefinite { .. })
        ));
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(
            MetricLieAlgebra::new(alg, asym),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn orthonormal_frame_is_gram_orthonormal() {
        let alg = LieAlgebra::abelian(3);
        let gram = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, 0.0, 0.5, 1.0, 0.25, 0.0, 0.25, 3.0]);
        let m = MetricLieAlgebra::new(alg, gram.clone()).unwrap();
        let u = m.orthonormal_frame();
        let should_be_id = u.transpose() * &gram * &u;
        assert!((should_be_id - DMatrix::identity(3, 3)).amax() < 1e-12);
    }

    #[test]
    fn change_basis_preserves_jacobi_and_inner_products() {
        let m = model_12();
        let t = DMatrix::from_row_slice(3, 3, &[1.0, 0.2, 0.0, -0.3, 1.0, 0.5, 0.1, 0.0, 1.0]);
        let moved = m.change_basis(&t).unwrap();
        assert!(moved.algebra().check_jacobi(&tol()));
        // ⟨T u, T v⟩_old = ⟨u, v⟩_new
        let u = DVector::from_vec(vec![1.0, -1.0, 2.0]);
        let v = DVector::from_vec(vec![0.0, 3.0, 1.0]);
        let lhs = m.inner(&(&t * &u), &(&t * &v));
        let rhs = moved.inner(&u, &v);
        assert!((lhs - rhs).abs() < 1e-12);
        // Brackets transported consistently: T [u,v]_new = [T u, T v]_old.
        let lhs_b = &t * moved.algebra().bracket(&u, &v).unwrap();
        let rhs_b = m.algebra().bracket(&(&t * u), &(t.clone() * v)).unwrap();
        assert!((lhs_b - rhs_b).amax() < 1e-12);
    }

    #[test]
    fn anti_derivation_for_simple_cyclic_metric() {
        // For the simple 3-dimensional cyclic metric diag(μ+ν, μ, ν) the map
        // δ = B⁻¹G is a k-symmetric invertible antiderivation.
        let m = sl2::build_sl2(&sl2::Sl2CyclicMetric::new(2.0, 1.0).unwrap());
        let b = m.killing_form();
        let delta = b
            .clone()
            .lu()
            .solve(m.gram())
            .expect("Killing form of a simple algebra is invertible");
        assert!(m.check_anti_derivation(&b, &delta, &tol()).unwrap());

        // The identity map is symmetric and invertible but not an
        // antiderivation (the bracket is nonzero).
        let id = DMatrix::identity(3, 3);
        assert!(!m.check_anti_derivation(&b, &id, &tol()).unwrap());

        // Degenerate form is rejected.
        let zero = DMatrix::zeros(3, 3);
        assert!(matches!(
            m.check_anti_derivation(&zero, &delta, &tol()),
            Err(Error::Degenerate(_))
        ));
    }
}
