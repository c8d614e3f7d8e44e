//! Cyclic metrics on the simple 3-dimensional algebra with brackets
//! `[X₁,X₂] = 2X₃`, `[X₂,X₃] = -2X₁`, `[X₃,X₁] = 2X₂`, the two-parameter
//! family `⟨·,·⟩ = diag(μ+ν, μ, ν)` with `μ > ν > 0`, and products of such
//! factors with an abelian part and a solvable model.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::algebra::{LieAlgebra, MetricLieAlgebra};
use crate::error::{Error, Result};
use crate::gqp::{self, OmegaMatrix};
use crate::linalg;
use crate::tolerance::ToleranceConfig;

/// Structure constants of the simple split 3-dimensional algebra in the
/// basis used throughout this module.
pub fn sl2_brackets() -> LieAlgebra {
    let brackets = vec![
        (0usize, 1usize, DVector::from_vec(vec![0.0, 0.0, 2.0])),
        (1usize, 2usize, DVector::from_vec(vec![-2.0, 0.0, 0.0])),
        (0usize, 2usize, DVector::from_vec(vec![0.0, -2.0, 0.0])),
    ];
    LieAlgebra::from_bracket_list(3, &brackets).expect("fixed constants are well-formed")
}

/// Parameters of one cyclic metric on the simple factor: the inner product
/// `diag(μ+ν, μ, ν)` with `μ > ν > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sl2CyclicMetric {
    mu: f64,
    nu: f64,
}

impl Sl2CyclicMetric {
    pub fn new(mu: f64, nu: f64) -> Result<Self> {
        if !mu.is_finite() || !nu.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "parameters must be finite, got mu={mu}, nu={nu}"
            )));
        }
        if !(mu > nu && nu > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "parameters must satisfy mu > nu > 0, got mu={mu}, nu={nu}"
            )));
        }
        Ok(Sl2CyclicMetric { mu, nu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn gram(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_vec(vec![
            self.mu + self.nu,
            self.mu,
            self.nu,
        ]))
    }

    /// Scalar curvature `8/(μ+ν) - 8/μ - 8/ν` (always negative).
    pub fn scalar_curvature(&self) -> f64 {
        8.0 / (self.mu + self.nu) - 8.0 / self.mu - 8.0 / self.nu
    }
}

/// The metric Lie algebra of one simple cyclic factor.
pub fn build_sl2(metric: &Sl2CyclicMetric) -> MetricLieAlgebra {
    MetricLieAlgebra::new(sl2_brackets(), metric.gram())
        .expect("diag(μ+ν, μ, ν) is positive-definite for μ > ν > 0")
}

/// Closed-form Ricci data of one simple cyclic factor: the Ricci form is
/// `-B = 8 diag(1, -1, -1)` independent of the parameters (the algebra is
/// unimodular, so only the Killing term contributes), together with the
/// scalar curvature.
pub fn sl2_closed_ricci(metric: &Sl2CyclicMetric) -> (DMatrix<f64>, f64) {
    let ric = DMatrix::from_diagonal(&DVector::from_vec(vec![8.0, -8.0, -8.0]));
    (ric, metric.scalar_curvature())
}

/// Specification of a product metric Lie algebra: an abelian factor ℝʳ, an
/// optional solvable model G(q, p, Ω), and any number of simple cyclic
/// factors, assembled in that order with a block-diagonal gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductSpec {
    pub r: usize,
    pub omega: Option<OmegaMatrix>,
    pub sl2_factors: Vec<Sl2CyclicMetric>,
}

impl ProductSpec {
    pub fn validate(&self) -> Result<()> {
        if self.r == 0 && self.omega.is_none() && self.sl2_factors.is_empty() {
            return Err(Error::InvalidParameter(
                "product specification is empty".into(),
            ));
        }
        Ok(())
    }

    pub fn total_dim(&self) -> usize {
        self.r + self.omega.as_ref().map_or(0, |o| o.dim()) + 3 * self.sl2_factors.len()
    }
}

/// Assemble the product algebra with its block-diagonal gram matrix.
pub fn build_product(spec: &ProductSpec) -> Result<MetricLieAlgebra> {
    spec.validate()?;
    let n = spec.total_dim();
    let mut ads = vec![DMatrix::zeros(n, n); n];
    let mut gram = DMatrix::identity(n, n);
    let mut offset = spec.r;

    if let Some(omega) = &spec.omega {
        let block = gqp::build(omega);
        let d = omega.dim();
        copy_block(&mut ads, block.algebra(), offset, d);
        offset += d;
    }
    for factor in &spec.sl2_factors {
        let block = build_sl2(factor);
        copy_block(&mut ads, block.algebra(), offset, 3);
        gram.view_mut((offset, offset), (3, 3))
            .copy_from(block.gram());
        offset += 3;
    }
    debug_assert_eq!(offset, n);
    let algebra = LieAlgebra::new(ads)?;
    MetricLieAlgebra::new(algebra, gram)
}

fn copy_block(ads: &mut [DMatrix<f64>], block: &LieAlgebra, offset: usize, d: usize) {
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let v = block.structure(i, j, k);
                if v != 0.0 {
                    ads[offset + i][(offset + k, offset + j)] = v;
                }
            }
        }
    }
}

/// Outcome of the canonical-form recovery on a 3-dimensional factor: the
/// parameters together with the change of basis whose columns map the
/// canonical basis onto the input coordinates.
#[derive(Debug, Clone)]
pub struct Sl2AdaptedBasis {
    pub mu: f64,
    pub nu: f64,
    /// Columns are the canonical basis vectors expressed in input
    /// coordinates; transporting the input through this matrix yields the
    /// canonical brackets and the gram `diag(μ+ν, μ, ν)` exactly.
    pub basis: DMatrix<f64>,
}

/// Recover `(μ, ν)` for a metric on a 3-dimensional algebra isometric to a
/// canonical simple cyclic factor. Errors on wrong dimension or a Killing
/// form that is degenerate or has the wrong signature; returns `None` when
/// the verification against the canonical structure fails (non-cyclic
/// metric, equal parameters).
pub fn sl2_canonical_parameters(
    mla: &MetricLieAlgebra,
    tol: &ToleranceConfig,
) -> Result<Option<(f64, f64)>> {
    Ok(sl2_adapted_basis(mla, tol)?.map(|a| (a.mu, a.nu)))
}

/// Full canonical-form recovery; see [`sl2_canonical_parameters`].
///
/// The map `δ = B⁻¹G` (Killing form inverse times gram) is symmetric for the
/// metric and its eigenvalues are `(-(μ+ν), μ, ν)/8`; its G-orthonormal
/// eigenbasis, after sign normalization, scales into the canonical basis.
pub fn sl2_adapted_basis(
    mla: &MetricLieAlgebra,
    tol: &ToleranceConfig,
) -> Result<Option<Sl2AdaptedBasis>> {
    if mla.dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: mla.dim(),
        });
    }
    let b = mla.killing_form();
    let b_scale = b.amax().max(1.0);
    let b_svals = linalg::singular_values(&b);
    if b_svals[2] <= tol.eps_rank * b_scale {
        return Err(Error::Degenerate(format!(
            "Killing form is degenerate (smallest singular value {:.3e})",
            b_svals[2]
        )));
    }
    let (b_vals, _) = linalg::sym_eigen_sorted(&b);
    let negatives = b_vals.iter().filter(|v| **v < 0.0).count();
    if negatives != 1 {
        return Err(Error::Degenerate(format!(
            "Killing form signature is ({}, {negatives}), expected (2, 1)",
            3 - negatives
        )));
    }

    // Eigenvalues of δ = B⁻¹G via the symmetric reduction G^{1/2} B⁻¹ G^{1/2};
    // the columns of G^{-1/2}W are then a G-orthonormal eigenbasis of δ.
    let (g_sqrt, g_inv_sqrt) = linalg::spd_sqrt_inv_sqrt(mla.gram())?;
    let b_inv = b
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("Killing form inversion failed".into()))?;
    let m = &g_sqrt * b_inv * &g_sqrt;
    let m = (&m + m.transpose()) * 0.5;
    let (vals, w) = linalg::sym_eigen_sorted(&m);
    let scaled: Vec<f64> = vals.iter().map(|v| v * 8.0).collect();

    // Expect exactly one negative eigenvalue (ascending order puts it first)
    // and two positive ones; μ is the larger positive value.
    if !(scaled[0] < 0.0 && scaled[1] > 0.0 && scaled[2] > 0.0) {
        return Ok(None);
    }
    let (mu, nu, mu_col, nu_col) = if scaled[2] >= scaled[1] {
        (scaled[2], scaled[1], 2, 1)
    } else {
        (scaled[1], scaled[2], 1, 2)
    };
    let consistency = (scaled[0] + mu + nu).abs();
    if consistency > tol.eps_cluster * mu.max(1.0) {
        return Ok(None);
    }

    let eigvecs = &g_inv_sqrt * &w;
    let mut v1 = eigvecs.column(0).into_owned();
    let v2 = eigvecs.column(mu_col).into_owned();
    let v3 = eigvecs.column(nu_col).into_owned();

    // Bracket coefficients in the G-orthonormal eigenbasis; the canonical
    // sign pattern is (α, β, γ) = (-, +, +) and a single sign flip of v1
    // negates all three.
    let alpha = mla.inner(&mla.algebra().bracket(&v2, &v3)?, &v1);
    if alpha > 0.0 {
        v1 = -v1;
    }

    let y1 = &v1 * (mu + nu).sqrt();
    let y2 = &v2 * mu.sqrt();
    let y3 = &v3 * nu.sqrt();
    let mut basis = DMatrix::zeros(3, 3);
    basis.set_column(0, &y1);
    basis.set_column(1, &y2);
    basis.set_column(2, &y3);

    // Verify: transporting the input through the basis must reproduce the
    // canonical structure constants and gram exactly.
    let moved = match mla.change_basis(&basis) {
        Ok(m) => m,
        Err(_) => return Ok(None),
    };
    let canonical = sl2_brackets();
    let scale = mla.scale();
    let bound = tol.eps_cluster * scale.max(mu);
    for i in 0..3 {
        if (moved.algebra().ad(i) - canonical.ad(i)).amax() > bound {
            return Ok(None);
        }
    }
    let expected_gram = DMatrix::from_diagonal(&DVector::from_vec(vec![mu + nu, mu, nu]));
    if (moved.gram() - expected_gram).amax() > bound {
        return Ok(None);
    }

    Ok(Some(Sl2AdaptedBasis { mu, nu, basis }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn parameter_validation() {
        assert!(Sl2CyclicMetric::new(2.0, 1.0).is_ok());
        assert!(Sl2CyclicMetric::new(1.0, 1.0).is_err()); // equality excluded
        assert!(Sl2CyclicMetric::new(1.0, 2.0).is_err());
        assert!(Sl2CyclicMetric::new(2.0, 0.0).is_err());
        assert!(Sl2CyclicMetric::new(2.0, -1.0).is_err());
        assert!(Sl2CyclicMetric::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn build_is_cyclic_with_expected_killing_form() {
        let m = build_sl2(&Sl2CyclicMetric::new(3.0, 1.0).unwrap());
        assert!(m.check_cyclic(&tol()));
        assert!(m.algebra().check_jacobi(&tol()));
        let b = m.killing_form();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![-8.0, 8.0, 8.0]));
        assert!((b - expected).amax() < 1e-13);
        // Unimodular: no mean curvature.
        assert!(m.mean_curvature_vector().amax() < 1e-14);
    }

    #[test]
    fn closed_ricci_matches_generic_pipeline() {
        use crate::connection::CurvatureReport;
        for (mu, nu) in [(2.0, 1.0), (3.0, 1.0), (1.5, 0.25)] {
            let metric = Sl2CyclicMetric::new(mu, nu).unwrap();
            let (ric_closed, sigma_closed) = sl2_closed_ricci(&metric);
            let report = CurvatureReport::compute(&build_sl2(&metric), &tol()).unwrap();
            assert!((&report.ricci - ric_closed).amax() < 1e-12);
            assert!((report.scalar - sigma_closed).abs() < 1e-12);
        }
    }

    #[test]
    fn scalar_curvature_value() {
        let m = Sl2CyclicMetric::new(2.0, 1.0).unwrap();
        assert!((m.scalar_curvature() + 28.0 / 3.0).abs() < 1e-14);
        let m = Sl2CyclicMetric::new(3.0, 1.0).unwrap();
        assert!((m.scalar_curvature() + 26.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn product_assembly() {
        let spec = ProductSpec {
            r: 2,
            omega: Some(OmegaMatrix::from_rows(&[vec![1.0, -0.5]]).unwrap()),
            sl2_factors: vec![Sl2CyclicMetric::new(2.0, 1.0).unwrap()],
        };
        let m = build_product(&spec).unwrap();
        assert_eq!(m.dim(), 2 + 3 + 3);
        assert!(m.check_cyclic(&tol()));
        assert!(m.algebra().check_jacobi(&tol()));
        // Abelian block really is abelian.
        for i in 0..2 {
            assert_eq!(m.algebra().ad(i).amax(), 0.0);
        }
        // Brackets stay inside their blocks.
        let b = m.algebra().bracket_basis(2, 3); // [h, f1] of the model block
        assert_eq!(b[3], 1.0);
        let b = m.algebra().bracket_basis(5, 6); // [X1, X2] of the simple block
        assert_eq!(b[7], 2.0);
        // Empty spec is rejected.
        assert!(build_product(&ProductSpec {
            r: 0,
            omega: None,
            sl2_factors: vec![],
        })
        .is_err());
    }

    #[test]
    fn canonical_parameters_roundtrip() {
        for (mu, nu) in [(2.0, 1.0), (3.0, 0.5), (1.2, 1.0)] {
            let metric = Sl2CyclicMetric::new(mu, nu).unwrap();
            let m = build_sl2(&metric);
            let (got_mu, got_nu) = sl2_canonical_parameters(&m, &tol()).unwrap().unwrap();
            assert!((got_mu - mu).abs() < 1e-10, "mu: {got_mu} vs {mu}");
            assert!((got_nu - nu).abs() < 1e-10, "nu: {got_nu} vs {nu}");
        }
    }

    #[test]
    fn canonical_parameters_survive_isometric_scrambling() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        for trial in 0..20 {
            let mu = 1.0 + (trial as f64) * 0.17 + 0.3;
            let nu = 0.2 + (trial as f64) * 0.04;
            let metric = Sl2CyclicMetric::new(mu, nu).unwrap();
            let m = build_sl2(&metric);
            let scrambled = crate::testing::scramble_basis(&m, &mut rng);
            let adapted = sl2_adapted_basis(&scrambled, &tol()).unwrap().unwrap();
            assert!((adapted.mu - mu).abs() < 1e-9);
            assert!((adapted.nu - nu).abs() < 1e-9);
            // The adapted basis really does carry the scrambled algebra back
            // to canonical form.
            let moved = scrambled.change_basis(&adapted.basis).unwrap();
            let canonical = sl2_brackets();
            for i in 0..3 {
                assert!((moved.algebra().ad(i) - canonical.ad(i)).amax() < 1e-9);
            }
        }
    }

    #[test]
    fn canonical_parameters_reject_bad_inputs() {
        // Wrong dimension.
        let flat = MetricLieAlgebra::with_identity_gram(LieAlgebra::abelian(2));
        assert!(sl2_canonical_parameters(&flat, &tol()).is_err());
        // Degenerate Killing form (abelian in dimension 3).
        let flat3 = MetricLieAlgebra::with_identity_gram(LieAlgebra::abelian(3));
        assert!(matches!(
            sl2_canonical_parameters(&flat3, &tol()),
            Err(Error::Degenerate(_))
        ));
        // Compact form: Killing is negative definite, wrong signature.
        let su2 = MetricLieAlgebra::with_identity_gram(crate::testing::su2_brackets());
        assert!(matches!(
            sl2_canonical_parameters(&su2, &tol()),
            Err(Error::Degenerate(ref msg)) if msg.contains("signature")
        ));
        // Non-cyclic metric on the right algebra: verification fails.
        let skew = MetricLieAlgebra::new(
            sl2_brackets(),
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 3.0])),
        )
        .unwrap();
        assert_eq!(sl2_canonical_parameters(&skew, &tol()).unwrap(), None);
    }
}
