//! Levi-Civita product, curvature, Ricci data, and the geometric predicates
//! derived from them, all expressed on the Lie-algebra basis of a
//! left-invariant metric.
//!
//! Conventions: the Levi-Civita product `u ⋆ v = ∇_u v` is determined by the
//! Koszul formula
//!
//! ```text
//! 2 ⟨e_i ⋆ e_j, e_k⟩ = ⟨[e_i, e_j], e_k⟩ + ⟨[e_k, e_i], e_j⟩ + ⟨[e_k, e_j], e_i⟩
//! ```
//!
//! and the curvature operator is `K(u, v) = L_{[u,v]} - [L_u, L_v]`, so that
//! the sectional curvature of a plane is `⟨K(u,v)u, v⟩ / area²`.

use nalgebra::{DMatrix, DVector};

use crate::algebra::MetricLieAlgebra;
use crate::error::{Error, Result};
use crate::linalg;
use crate::subspace::Subspace;
use crate::tensor::{NablaCurvature, Tensor3};
use crate::tolerance::ToleranceConfig;

/// Left-multiplication operators of the Levi-Civita product: `mats[i]` sends
/// `v` to `e_i ⋆ v`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeviCivitaProduct {
    mats: Vec<DMatrix<f64>>,
}

/// Residuals of the two defining properties of the Levi-Civita product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LcResiduals {
    /// `sup |e_i ⋆ e_j - e_j ⋆ e_i - [e_i, e_j]|`
    pub torsion: f64,
    /// `sup |G L_i + L_iᵗ G|` (metric compatibility: each `L_i` is
    /// skew-adjoint for the metric)
    pub metric_skew: f64,
}

impl LeviCivitaProduct {
    /// Wrap precomputed left-multiplication matrices (used by closed-form
    /// constructions; [`levi_civita`] is the generic route).
    pub fn from_matrices(mats: Vec<DMatrix<f64>>) -> Self {
        LeviCivitaProduct { mats }
    }

    pub fn n(&self) -> usize {
        self.mats.len()
    }

    /// Left multiplication by `e_i`.
    pub fn left_mult(&self, i: usize) -> &DMatrix<f64> {
        &self.mats[i]
    }

    /// Left multiplication by an arbitrary vector.
    pub fn left_mult_of(&self, u: &DVector<f64>) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            if u[i] != 0.0 {
                m += &self.mats[i] * u[i];
            }
        }
        m
    }

    /// Coordinates of `e_i ⋆ e_j`.
    pub fn product_basis(&self, i: usize, j: usize) -> DVector<f64> {
        self.mats[i].column(j).into_owned()
    }

    /// Component `S[i][j][k]` of `e_i ⋆ e_j` along `e_k`.
    pub fn component(&self, i: usize, j: usize, k: usize) -> f64 {
        self.mats[i][(k, j)]
    }

    pub fn max_abs(&self) -> f64 {
        self.mats.iter().fold(0.0, |m, a| m.max(a.amax()))
    }

    pub fn residuals(&self, mla: &MetricLieAlgebra) -> LcResiduals {
        let n = self.n();
        let gram = mla.gram();
        let mut torsion = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                let defect = self.product_basis(i, j)
                    - self.product_basis(j, i)
                    - mla.algebra().bracket_basis(i, j);
                torsion = torsion.max(defect.amax());
            }
        }
        let mut metric_skew = 0.0f64;
        for i in 0..n {
            let skew = gram * &self.mats[i] + self.mats[i].transpose() * gram;
            metric_skew = metric_skew.max(skew.amax());
        }
        LcResiduals {
            torsion,
            metric_skew,
        }
    }
}

/// Solve the Koszul formula for every basis pair. One Cholesky factorization
/// of the gram matrix serves all `n²` right-hand sides.
///
/// The construction is verified before returning: the product must be
/// torsion-free and metric-compatible up to `eps_eq` times the input scale.
pub fn levi_civita(mla: &MetricLieAlgebra, tol: &ToleranceConfig) -> Result<LeviCivitaProduct> {
    let n = mla.dim();
    let gram = mla.gram();
    // gc[i] = G ad_i, so ⟨[e_i, e_j], e_k⟩ = gc[i][(k, j)].
    let gc: Vec<DMatrix<f64>> = (0..n).map(|i| gram * mla.algebra().ad(i)).collect();
    let mut mats = vec![DMatrix::zeros(n, n); n];
    for i in 0..n {
        for j in 0..n {
            let rhs = DVector::from_fn(n, |k, _| {
                0.5 * (gc[i][(k, j)] + gc[k][(j, i)] + gc[k][(i, j)])
            });
            let col = mla.solve_gram(&rhs);
            mats[i].set_column(j, &col);
        }
    }
    let lc = LeviCivitaProduct { mats };
    let residuals = lc.residuals(mla);
    let bound = tol.eps_eq * mla.scale().max(lc.max_abs());
    if residuals.torsion > bound || residuals.metric_skew > bound {
        return Err(Error::InvariantViolation(format!(
            "Levi-Civita product failed verification (torsion {:.3e}, metric skew {:.3e})",
            residuals.torsion, residuals.metric_skew
        )));
    }
    Ok(lc)
}

/// Curvature operators `K(e_i, e_j)` stored as matrices; antisymmetry in
/// `(i, j)` is exact by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureTensor {
    n: usize,
    mats: Vec<DMatrix<f64>>,
}

/// Residuals of the symmetry properties a curvature tensor must satisfy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureResiduals {
    /// `sup |⟨K(x,y)z, w⟩ + ⟨K(x,y)w, z⟩|` over basis vectors.
    pub last_pair_skew: f64,
    /// First Bianchi identity `K(x,y)z + K(y,z)x + K(z,x)y = 0`.
    pub bianchi: f64,
}

impl CurvatureTensor {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Operator `K(e_i, e_j)`.
    pub fn operator(&self, i: usize, j: usize) -> &DMatrix<f64> {
        &self.mats[i * self.n + j]
    }

    /// Operator `K(u, v)` for arbitrary vectors.
    pub fn operator_of(&self, u: &DVector<f64>, v: &DVector<f64>) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                let c = u[i] * v[j];
                if c != 0.0 {
                    m += self.operator(i, j) * c;
                }
            }
        }
        m
    }

    /// Component `l` of `K(e_i, e_j) e_k`.
    pub fn component(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.operator(i, j)[(l, k)]
    }

    pub fn max_abs(&self) -> f64 {
        self.mats.iter().fold(0.0, |m, a| m.max(a.amax()))
    }

    pub fn max_abs_diff(&self, other: &CurvatureTensor) -> f64 {
        assert_eq!(self.n, other.n, "curvature dimensions differ");
        self.mats
            .iter()
            .zip(&other.mats)
            .fold(0.0, |m, (a, b)| m.max((a - b).amax()))
    }

    pub fn from_operators(n: usize, mats: Vec<DMatrix<f64>>) -> Self {
        assert_eq!(mats.len(), n * n);
        CurvatureTensor { n, mats }
    }

    pub fn residuals(&self, mla: &MetricLieAlgebra) -> CurvatureResiduals {
        let n = self.n;
        let gram = mla.gram();
        let mut last_pair_skew = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                let k = self.operator(i, j);
                let skew = gram * k + k.transpose() * gram;
                last_pair_skew = last_pair_skew.max(skew.amax());
            }
        }
        let mut bianchi = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    let defect = self.operator(i, j).column(k)
                        + self.operator(j, k).column(i)
                        + self.operator(k, i).column(j);
                    bianchi = bianchi.max(defect.amax());
                }
            }
        }
        CurvatureResiduals {
            last_pair_skew,
            bianchi,
        }
    }
}

/// Curvature `K(e_i, e_j) = L_{[e_i, e_j]} - L_i L_j + L_j L_i` for every
/// basis pair, verified against the curvature symmetries (skew-adjointness
/// in the last pair and the first Bianchi identity).
pub fn curvature(
    mla: &MetricLieAlgebra,
    lc: &LeviCivitaProduct,
    tol: &ToleranceConfig,
) -> Result<CurvatureTensor> {
    let n = mla.dim();
    let mut mats = vec![DMatrix::zeros(n, n); n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let c = mla.algebra().bracket_basis(i, j);
            let mut k = lc.left_mult_of(&c);
            k += lc.left_mult(j) * lc.left_mult(i);
            k -= lc.left_mult(i) * lc.left_mult(j);
            mats[j * n + i] = -&k;
            mats[i * n + j] = k;
        }
    }
    let tensor = CurvatureTensor { n, mats };
    let residuals = tensor.residuals(mla);
    let scale = mla.scale().max(lc.max_abs());
    let bound = tol.eps_eq * scale * scale;
    if residuals.last_pair_skew > bound || residuals.bianchi > bound {
        return Err(Error::InvariantViolation(format!(
            "curvature tensor failed verification (last-pair skew {:.3e}, Bianchi {:.3e})",
            residuals.last_pair_skew, residuals.bianchi
        )));
    }
    Ok(tensor)
}

/// Ricci form `ric(e_i, e_j) = tr(z ↦ K(e_i, z) e_j)`, evaluated in a
/// gram-orthonormal frame and symmetrized. The returned matrix holds the
/// ricci form in the original basis (not the frame).
pub fn ricci(mla: &MetricLieAlgebra, k: &CurvatureTensor) -> DMatrix<f64> {
    let n = mla.dim();
    let frame = mla.orthonormal_frame();
    let gu = mla.gram() * &frame; // column a = G u_a
    let mut ric = DMatrix::zeros(n, n);
    for i in 0..n {
        // For fixed i, sum over the frame: Σ_a ⟨K(e_i, u_a) e_j, u_a⟩.
        for a in 0..n {
            // K(e_i, u_a) = Σ_b (u_a)_b K(e_i, e_b)
            let mut op = DMatrix::zeros(n, n);
            for b in 0..n {
                let c = frame[(b, a)];
                if c != 0.0 {
                    op += k.operator(i, b) * c;
                }
            }
            let weights = op.transpose() * gu.column(a); // entry j = ⟨K(e_i,u_a) e_j, u_a⟩
            for j in 0..n {
                ric[(i, j)] += weights[j];
            }
        }
    }
    // The trace form is symmetric; fold the numerical asymmetry away.
    (&ric + ric.transpose()) * 0.5
}

/// Numerical asymmetry of the raw Ricci trace (diagnostic; the value returned
/// by [`ricci`] is already symmetrized).
pub fn ricci_asymmetry(mla: &MetricLieAlgebra, k: &CurvatureTensor) -> f64 {
    let n = mla.dim();
    let mut raw = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut sum = 0.0;
            for a in 0..n {
                sum += k.component(i, a, j, a);
            }
            raw[(i, j)] = sum;
        }
    }
    (&raw - raw.transpose()).amax()
}

/// Ricci form of a cyclic metric via the closed formula
/// `ric = -B - sym ⟨[H, u], v⟩` with `B` the Killing form and `H` the mean
/// curvature vector. Rejects metrics that are not cyclic.
pub fn ricci_cyclic_formula(mla: &MetricLieAlgebra, tol: &ToleranceConfig) -> Result<DMatrix<f64>> {
    let residual = mla.cyclic_residual();
    if residual > tol.eps_eq * mla.scale() {
        return Err(Error::NotCyclic { residual });
    }
    let b = mla.killing_form();
    let h = mla.mean_curvature_vector();
    let ad_h = mla.algebra().ad_of(&h);
    let m = ad_h.transpose() * mla.gram(); // m[(u,v)] = ⟨[H, e_u], e_v⟩
    let sym = (&m + m.transpose()) * 0.5;
    Ok(-b - sym)
}

/// Scalar curvature `σ = tr(G⁻¹ ric)`.
pub fn scalar_curvature(mla: &MetricLieAlgebra, ric: &DMatrix<f64>) -> f64 {
    let n = mla.dim();
    let mut sigma = 0.0;
    for j in 0..n {
        let col = mla.solve_gram(&ric.column(j).into_owned());
        sigma += col[j];
    }
    sigma
}

/// Sectional curvature of the plane spanned by `u, v`:
/// `⟨K(u,v)u, v⟩ / (|u|²|v|² - ⟨u,v⟩²)`. Degenerate planes are rejected.
pub fn sectional(
    mla: &MetricLieAlgebra,
    k: &CurvatureTensor,
    u: &DVector<f64>,
    v: &DVector<f64>,
    tol: &ToleranceConfig,
) -> Result<f64> {
    if u.len() != mla.dim() || v.len() != mla.dim() {
        return Err(Error::DimensionMismatch {
            expected: mla.dim(),
            got: u.len().max(v.len()),
        });
    }
    let uu = mla.inner(u, u);
    let vv = mla.inner(v, v);
    let uv = mla.inner(u, v);
    let area2 = uu * vv - uv * uv;
    if area2 <= tol.eps_rank * (uu * vv).max(1.0) {
        return Err(Error::Degenerate(format!(
            "plane is degenerate (squared area {area2:.3e})"
        )));
    }
    let kuvu = k.operator_of(u, v) * u;
    let numerator = (kuvu.transpose() * mla.gram() * v)[(0, 0)];
    Ok(numerator / area2)
}

/// Covariant derivative of the Ricci form. For a left-invariant tensor the
/// directional term drops and `(∇_{e_a} ric)(e_b, e_c) =
/// -ric(e_a ⋆ e_b, e_c) - ric(e_b, e_a ⋆ e_c)`, i.e. `-(L_aᵗ ric + ric L_a)`.
pub fn nabla_ricci(lc: &LeviCivitaProduct, ric: &DMatrix<f64>) -> Tensor3 {
    let n = lc.n();
    let mut t = Tensor3::zeros(n);
    for a in 0..n {
        let la = lc.left_mult(a);
        let m = -(la.transpose() * ric + ric * la);
        for b in 0..n {
            for c in 0..n {
                t.set(a, b, c, m[(b, c)]);
            }
        }
    }
    t
}

/// Covariant derivative of the curvature tensor:
/// `(∇_{e_a} K)(e_b, e_c) = L_a K_{bc} - K_{a⋆b, c} - K_{b, a⋆c} - K_{bc} L_a`
/// with bilinear extension over the products `a⋆b = Σ_m S[a][b][m] e_m`.
pub fn nabla_curvature(lc: &LeviCivitaProduct, k: &CurvatureTensor) -> NablaCurvature {
    let n = lc.n();
    let mut out = NablaCurvature::zeros(n);
    for a in 0..n {
        let la = lc.left_mult(a);
        for b in 0..n {
            for c in 0..n {
                let kbc = k.operator(b, c);
                let mut m = la * kbc - kbc * la;
                for e in 0..n {
                    let s_ab = lc.component(a, b, e);
                    if s_ab != 0.0 {
                        m -= k.operator(e, c) * s_ab;
                    }
                    let s_ac = lc.component(a, c, e);
                    if s_ac != 0.0 {
                        m -= k.operator(b, e) * s_ac;
                    }
                }
                *out.operator_mut(a, b, c) = m;
            }
        }
    }
    out
}

/// If the metric has constant sectional curvature `k`, i.e.
/// `K(x, y)z = k (⟨x,z⟩ y - ⟨y,z⟩ x)`, return `k`; otherwise `None`.
///
/// The candidate is taken from the coordinate-plane sectional curvature of
/// largest magnitude and verified against the displayed tensor identity.
pub fn check_constant_curvature(
    mla: &MetricLieAlgebra,
    k: &CurvatureTensor,
    tol: &ToleranceConfig,
) -> Option<f64> {
    let n = mla.dim();
    let gram = mla.gram();
    let mut candidate = 0.0f64;
    for i in 0..n {
        let ei = DVector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 });
        for j in (i + 1)..n {
            let ej = DVector::from_fn(n, |r, _| if r == j { 1.0 } else { 0.0 });
            // Coordinate planes of a positive-definite gram are never
            // degenerate, so this cannot fail.
            let sec = sectional(mla, k, &ei, &ej, tol).ok()?;
            if sec.abs() > candidate.abs() {
                candidate = sec;
            }
        }
    }
    if candidate.abs() <= tol.eps_eq * mla.scale() {
        candidate = 0.0;
    }
    let bound = tol.eps_eq * mla.scale() * candidate.abs().max(1.0);
    for i in 0..n {
        for j in 0..n {
            for m in 0..n {
                for l in 0..n {
                    let expected = candidate
                        * (gram[(i, m)] * if l == j { 1.0 } else { 0.0 }
                            - gram[(j, m)] * if l == i { 1.0 } else { 0.0 });
                    if (k.component(i, j, m, l) - expected).abs() > bound {
                        return None;
                    }
                }
            }
        }
    }
    Some(candidate)
}

/// If the bracket has the vectorial form `[x, y] = ⟨x, h⟩ y - ⟨y, h⟩ x` for
/// some vector `h`, return `h`; otherwise `None`.
///
/// The candidate is seeded from the trace identity `tr(ad_u) = (n-1)⟨u, h⟩`
/// and verified componentwise.
pub fn check_vectorial(mla: &MetricLieAlgebra, tol: &ToleranceConfig) -> Option<DVector<f64>> {
    let n = mla.dim();
    if n == 1 {
        return Some(DVector::zeros(1)); // only the trivial bracket exists
    }
    let traces = mla.algebra().ad_traces();
    let h = mla.solve_gram(&(traces / (n as f64 - 1.0)));
    let w = mla.gram() * &h; // w_i = ⟨e_i, h⟩
    let bound = tol.eps_eq * mla.scale() * w.amax().max(1.0);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let expected =
                    w[i] * if k == j { 1.0 } else { 0.0 } - w[j] * if k == i { 1.0 } else { 0.0 };
                if (mla.algebra().structure(i, j, k) - expected).abs() > bound {
                    return None;
                }
            }
        }
    }
    Some(h)
}

/// Left null space of the product: `{x : x ⋆ g = 0}`.
pub fn left_null(
    mla: &MetricLieAlgebra,
    lc: &LeviCivitaProduct,
    tol: &ToleranceConfig,
) -> Subspace {
    null_of_product(mla, lc, tol, true)
}

/// Right null space of the product: `{x : g ⋆ x = 0}`.
pub fn right_null(
    mla: &MetricLieAlgebra,
    lc: &LeviCivitaProduct,
    tol: &ToleranceConfig,
) -> Subspace {
    null_of_product(mla, lc, tol, false)
}

fn null_of_product(
    mla: &MetricLieAlgebra,
    lc: &LeviCivitaProduct,
    tol: &ToleranceConfig,
    left: bool,
) -> Subspace {
    let n = mla.dim();
    // Row block (j, k), column i: component k of e_i ⋆ e_j (left) or
    // e_j ⋆ e_i (right).
    let mut m = DMatrix::zeros(n * n, n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let s = if left {
                    lc.component(i, j, k)
                } else {
                    lc.component(j, i, k)
                };
                m[(j * n + k, i)] = s;
            }
        }
    }
    let null = linalg::null_space(&m, tol.eps_rank * lc.max_abs().max(1.0));
    Subspace::from_spanning(&null, mla.gram(), tol.eps_rank)
}

/// Residuals recorded while assembling a [`CurvatureReport`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportResiduals {
    pub torsion: f64,
    pub metric_skew: f64,
    pub last_pair_skew: f64,
    pub bianchi: f64,
    pub ricci_asymmetry: f64,
}

/// Everything the generic pipeline computes for one metric Lie algebra.
#[derive(Debug, Clone)]
pub struct CurvatureReport {
    pub lc: LeviCivitaProduct,
    pub curvature: CurvatureTensor,
    pub ricci: DMatrix<f64>,
    pub scalar: f64,
    pub nabla_ricci: Tensor3,
    pub nabla_curvature: NablaCurvature,
    pub residuals: ReportResiduals,
}

impl CurvatureReport {
    pub fn compute(mla: &MetricLieAlgebra, tol: &ToleranceConfig) -> Result<Self> {
        let lc = levi_civita(mla, tol)?;
        let k = curvature(mla, &lc, tol)?;
        let ric = ricci(mla, &k);
        let sigma = scalar_curvature(mla, &ric);
        let nr = nabla_ricci(&lc, &ric);
        let nk = nabla_curvature(&lc, &k);
        let lc_res = lc.residuals(mla);
        let k_res = k.residuals(mla);
        let residuals = ReportResiduals {
            torsion: lc_res.torsion,
            metric_skew: lc_res.metric_skew,
            last_pair_skew: k_res.last_pair_skew,
            bianchi: k_res.bianchi,
            ricci_asymmetry: ricci_asymmetry(mla, &k),
        };
        Ok(CurvatureReport {
            lc,
            curvature: k,
            ricci: ric,
            scalar: sigma,
            nabla_ricci: nr,
            nabla_curvature: nk,
            residuals,
        })
    }
}
