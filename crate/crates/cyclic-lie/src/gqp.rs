//! The solvable model family G(q, p, Ω): an abelian algebra spanned by
//! `h_1..h_q` acting on an abelian ideal spanned by `f_1..f_p` through
//! diagonal weights, `[h_i, f_j] = ω_{ij} f_j`, carrying the Euclidean metric
//! on the basis `(h_1..h_q, f_1..f_p)`.
//!
//! Every curvature quantity of these models has a closed form in the weight
//! matrix Ω; this module materializes those closed forms independently of the
//! generic Koszul pipeline so the two routes can be compared, and implements
//! the classification and equivalence questions that only depend on Ω.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::algebra::{LieAlgebra, MetricLieAlgebra};
use crate::connection::{CurvatureReport, CurvatureTensor, LeviCivitaProduct};
use crate::error::{Error, Result};
use crate::linalg;
use crate::tensor::{NablaCurvature, Tensor3};
use crate::tolerance::ToleranceConfig;

/// The weight matrix of a model G(q, p, Ω): q rows of p weights each, with
/// linearly independent rows (equivalently `rank Ωᵗ = q`).
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaMatrix {
    entries: DMatrix<f64>, // q×p
}

impl OmegaMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let (q, p) = entries.shape();
        if q == 0 || p == 0 {
            return Err(Error::InvalidParameter(format!(
                "weight matrix must have at least one row and one column, got {q}x{p}"
            )));
        }
        let tol = ToleranceConfig::default();
        let scale = entries.amax().max(1.0);
        let svals = linalg::singular_values(&entries);
        let rank = svals.iter().filter(|&&s| s > tol.eps_rank * scale).count();
        if rank < q {
            let list: Vec<String> = svals.iter().map(|s| format!("{s:.3e}")).collect();
            return Err(Error::RankDeficient(format!(
                "weight matrix rows are dependent: rank {rank} < {q} (singular values [{}])",
                list.join(", ")
            )));
        }
        Ok(OmegaMatrix { entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let q = rows.len();
        if q == 0 {
            return Err(Error::InvalidParameter(
                "weight matrix must have at least one row".into(),
            ));
        }
        let p = rows[0].len();
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::InvalidParameter(
                "weight matrix rows have unequal lengths".into(),
            ));
        }
        let entries = DMatrix::from_fn(q, p, |i, j| rows[i][j]);
        Self::new(entries)
    }

    pub fn q(&self) -> usize {
        self.entries.nrows()
    }

    pub fn p(&self) -> usize {
        self.entries.ncols()
    }

    pub fn dim(&self) -> usize {
        self.q() + self.p()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.q())
            .map(|i| self.entries.row(i).iter().copied().collect())
            .collect()
    }

    /// Weight column Ω_j (the weight vector of the generator f_j).
    pub fn col(&self, j: usize) -> DVector<f64> {
        self.entries.column(j).into_owned()
    }

    /// Gram matrix of the weight columns: `⟨Ω_i, Ω_j⟩`.
    pub fn col_gram(&self) -> DMatrix<f64> {
        self.entries.transpose() * &self.entries
    }

    /// Gram matrix of the weight rows: `⟨L_a, L_b⟩`.
    pub fn row_gram(&self) -> DMatrix<f64> {
        &self.entries * self.entries.transpose()
    }

    /// Row sums `tr(L_a) = Σ_j ω_{aj}`.
    pub fn row_sums(&self) -> DVector<f64> {
        DVector::from_fn(self.q(), |a, _| self.entries.row(a).sum())
    }

    pub fn scale(&self) -> f64 {
        self.entries.amax().max(1.0)
    }
}

/// The metric Lie algebra of the model: basis `(h_1..h_q, f_1..f_p)`,
/// brackets `[h_i, f_j] = ω_{ij} f_j`, identity gram.
pub fn build(omega: &OmegaMatrix) -> MetricLieAlgebra {
    let q = omega.q();
    let p = omega.p();
    let n = q + p;
    let mut brackets = Vec::with_capacity(q * p);
    for i in 0..q {
        for j in 0..p {
            let w = omega.entries()[(i, j)];
            if w != 0.0 {
                let mut v = DVector::zeros(n);
                v[q + j] = w;
                brackets.push((i, q + j, v));
            }
        }
    }
    let alg = LieAlgebra::from_bracket_list(n, &brackets)
        .expect("model brackets are well-formed by construction");
    debug_assert!(alg.check_jacobi(&ToleranceConfig::default()));
    let mla = MetricLieAlgebra::with_identity_gram(alg);
    debug_assert!(mla.check_cyclic(&ToleranceConfig::default()));
    mla
}

/// All curvature data of a model, materialized from the closed forms (no
/// Koszul solve, no trace computations — only arithmetic in Ω).
#[derive(Debug, Clone)]
pub struct GqpClosedForms {
    pub q: usize,
    pub p: usize,
    /// `⟨Ω_i, Ω_j⟩` (column gram).
    pub col_gram: DMatrix<f64>,
    /// `⟨L_a, L_b⟩` (row gram).
    pub row_gram: DMatrix<f64>,
    /// `tr(L_a)` per row.
    pub row_sums: DVector<f64>,
    pub lc: LeviCivitaProduct,
    pub curvature: CurvatureTensor,
    pub ricci: DMatrix<f64>,
    pub scalar: f64,
    pub nabla_ricci: Tensor3,
    pub nabla_curvature: NablaCurvature,
}

/// Largest disagreement between the closed forms and a generically computed
/// report, split by whether the closed form declares the component zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    /// Max of `|closed - generic| / max(1, |closed|)` over components with a
    /// nonzero closed form.
    pub rel_nonzero: f64,
    /// Max of `|generic|` over components whose closed form is exactly zero.
    pub abs_zero: f64,
}

impl Discrepancy {
    pub fn max(&self) -> f64 {
        self.rel_nonzero.max(self.abs_zero)
    }

    fn update(&mut self, closed: f64, generic: f64) {
        if closed == 0.0 {
            self.abs_zero = self.abs_zero.max(generic.abs());
        } else {
            self.rel_nonzero = self
                .rel_nonzero
                .max((closed - generic).abs() / closed.abs().max(1.0));
        }
    }
}

/// Materialize every closed-form tensor of the model.
pub fn closed_forms(omega: &OmegaMatrix) -> GqpClosedForms {
    let q = omega.q();
    let p = omega.p();
    let n = q + p;
    let w = omega.entries();
    let col_gram = omega.col_gram();
    let row_gram = omega.row_gram();
    let row_sums = omega.row_sums();
    let f = |j: usize| q + j; // global index of f_j

    // Levi-Civita: f_i ⋆ f_i = H_i (the column weights placed on the h part),
    // f_i ⋆ h_a = -ω_{ai} f_i, everything else zero.
    let mut lc_mats = vec![DMatrix::zeros(n, n); n];
    for i in 0..p {
        for a in 0..q {
            lc_mats[f(i)][(a, f(i))] = w[(a, i)];
            lc_mats[f(i)][(f(i), a)] = -w[(a, i)];
        }
    }
    let lc = LeviCivitaProduct::from_matrices(lc_mats);

    // Curvature: the nonzero operators are
    //   K(f_i, f_j) f_i = -⟨Ω_i,Ω_j⟩ f_j,   K(f_i, f_j) f_j = +⟨Ω_i,Ω_j⟩ f_i,
    //   K(f_i, h_a) f_i = -ω_{ai} H_i,      K(f_i, h_a) h_b = ω_{ai} ω_{bi} f_i,
    // together with the antisymmetry partners in the first pair.
    let mut k_mats = vec![DMatrix::zeros(n, n); n * n];
    for i in 0..p {
        for j in 0..p {
            if i == j {
                continue;
            }
            let g = col_gram[(i, j)];
            k_mats[f(i) * n + f(j)][(f(j), f(i))] = -g;
            k_mats[f(i) * n + f(j)][(f(i), f(j))] = g;
        }
    }
    for i in 0..p {
        for a in 0..q {
            for b in 0..q {
                let v = -w[(a, i)] * w[(b, i)];
                k_mats[f(i) * n + a][(b, f(i))] = v;
                k_mats[a * n + f(i)][(b, f(i))] = -v;
                k_mats[f(i) * n + a][(f(i), b)] = -v;
                k_mats[a * n + f(i)][(f(i), b)] = v;
            }
        }
    }
    let curvature = CurvatureTensor::from_operators(n, k_mats);

    // Ricci: ric(h_a, h_b) = -⟨L_a, L_b⟩, ric(f_j, f_j) = -Σ_l ⟨Ω_l, Ω_j⟩.
    let mut ricci = DMatrix::zeros(n, n);
    for a in 0..q {
        for b in 0..q {
            ricci[(a, b)] = -row_gram[(a, b)];
        }
    }
    for j in 0..p {
        let total: f64 = (0..p).map(|l| col_gram[(l, j)]).sum();
        ricci[(f(j), f(j))] = -total;
    }

    // Scalar curvature: σ = -Σ_a (|L_a|² + tr(L_a)²).
    let scalar = -(0..q)
        .map(|a| row_gram[(a, a)] + row_sums[a] * row_sums[a])
        .sum::<f64>();

    // ∇ric: the only nonzero components are
    //   (∇_{f_i} ric)(f_i, h_a) = (∇_{f_i} ric)(h_a, f_i)
    //     = Σ_l (ω_{al} - ω_{ai}) ⟨Ω_l, Ω_i⟩.
    let mut nabla_ric = Tensor3::zeros(n);
    for i in 0..p {
        for a in 0..q {
            let v: f64 = (0..p)
                .map(|l| (w[(a, l)] - w[(a, i)]) * col_gram[(l, i)])
                .sum();
            nabla_ric.set(f(i), f(i), a, v);
            nabla_ric.set(f(i), a, f(i), v);
        }
    }

    // ∇K: derivatives in h-directions vanish; in the direction f_i the
    // nonzero components are (writing g_ik = ⟨Ω_i,Ω_k⟩, d_m = ω_{mi} - ω_{mk}):
    //   (∇_{f_i} K)(f_i, f_k) f_k =  g_ik Σ_m d_m h_m        (k ≠ i)
    //   (∇_{f_i} K)(f_i, f_k) h_m = -g_ik d_m f_k            (k ≠ i)
    //   (∇_{f_i} K)(f_k, h_m) f_i =  g_ik (ω_{mi} - ω_{mk}) f_k   (k ≠ i)
    //   (∇_{f_i} K)(f_k, h_m) f_k = -g_ik (ω_{mi} - ω_{mk}) f_i   (k ≠ i)
    // plus the antisymmetry partners in the argument pair.
    let mut nk = NablaCurvature::zeros(n);
    for i in 0..p {
        for k in 0..p {
            if k == i {
                continue;
            }
            let g = col_gram[(i, k)];
            for m in 0..q {
                let d = w[(m, i)] - w[(m, k)];
                let v = g * d;
                if v == 0.0 {
                    continue;
                }
                // (∇_{f_i} K)(f_i, f_k) f_k = v h_m; partner swaps (f_i, f_k).
                nk.operator_mut(f(i), f(i), f(k))[(m, f(k))] = v;
                nk.operator_mut(f(i), f(k), f(i))[(m, f(k))] = -v;
                // (∇_{f_i} K)(f_i, f_k) h_m = -v f_k; partner swaps.
                nk.operator_mut(f(i), f(i), f(k))[(f(k), m)] = -v;
                nk.operator_mut(f(i), f(k), f(i))[(f(k), m)] = v;
                // (∇_{f_i} K)(f_k, h_m): sends f_i ↦ v f_k and f_k ↦ -v f_i;
                // partner swaps (f_k, h_m).
                nk.operator_mut(f(i), f(k), m)[(f(k), f(i))] = v;
                nk.operator_mut(f(i), m, f(k))[(f(k), f(i))] = -v;
                nk.operator_mut(f(i), f(k), m)[(f(i), f(k))] = -v;
                nk.operator_mut(f(i), m, f(k))[(f(i), f(k))] = v;
            }
        }
    }

    GqpClosedForms {
        q,
        p,
        col_gram,
        row_gram,
        row_sums,
        lc,
        curvature,
        ricci,
        scalar,
        nabla_ricci: nabla_ric,
        nabla_curvature: nk,
    }
}

impl GqpClosedForms {
    fn n(&self) -> usize {
        self.q + self.p
    }

    /// Compare the closed forms against a generically computed report.
    pub fn discrepancy(&self, report: &CurvatureReport) -> Discrepancy {
        let n = self.n();
        let mut d = Discrepancy {
            rel_nonzero: 0.0,
            abs_zero: 0.0,
        };
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    d.update(self.lc.component(i, j, k), report.lc.component(i, j, k));
                    for l in 0..n {
                        d.update(
                            self.curvature.component(i, j, k, l),
                            report.curvature.component(i, j, k, l),
                        );
                    }
                    d.update(
                        self.nabla_ricci.get(i, j, k),
                        report.nabla_ricci.get(i, j, k),
                    );
                }
                d.update(self.ricci[(i, j)], report.ricci[(i, j)]);
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let closed = self.nabla_curvature.operator(a, b, c);
                    let generic = report.nabla_curvature.operator(a, b, c);
                    for dcol in 0..n {
                        for l in 0..n {
                            d.update(closed[(l, dcol)], generic[(l, dcol)]);
                        }
                    }
                }
            }
        }
        d.update(self.scalar, report.scalar);
        d
    }
}

/// Geometric classification verdicts for one model, all decided by
/// closed-form conditions on Ω.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationFlags {
    /// Models are cyclic by construction; kept for report symmetry.
    pub cyclic: bool,
    /// `Some(k)`: constant sectional curvature `k` (q = 1, all weights equal).
    pub constant_curvature: Option<f64>,
    /// All sectional curvatures negative: q = 1 with all weights nonzero of
    /// the same sign.
    pub negative_sectional: bool,
    /// Ricci form negative definite: `Σ_l ⟨Ω_l, Ω_j⟩ > 0` for every j.
    pub negative_ricci: bool,
    /// `Some(λ)`: Einstein with `ric = λ ⟨·,·⟩` (rows orthogonal with a
    /// common norm that also matches every column total).
    pub einstein: Option<f64>,
    /// `∇ric = 0`: `Σ_l (ω_{al} - ω_{aj}) ⟨Ω_l, Ω_j⟩ = 0` for all (a, j).
    pub ricci_parallel: bool,
    /// `∇K = 0`: distinct weight columns are orthogonal.
    pub locally_symmetric: bool,
    /// `Some(h)`: the bracket is vectorial with mean-curvature direction h
    /// (coordinates on the basis `(h_1..h_q, f_1..f_p)`).
    pub vectorial: Option<Vec<f64>>,
}

/// Decide every classification flag from Ω alone.
pub fn classify(omega: &OmegaMatrix, tol: &ToleranceConfig) -> ClassificationFlags {
    let q = omega.q();
    let p = omega.p();
    let w = omega.entries();
    let scale = omega.scale();
    let col_gram = omega.col_gram();
    let row_gram = omega.row_gram();
    let eps1 = tol.eps_eq * scale;
    let eps2 = tol.eps_eq * scale * scale;

    // Constant curvature and the vectorial property both require q = 1 with
    // all weights equal.
    let mut constant_curvature = None;
    let mut vectorial = None;
    if q == 1 {
        let first = w[(0, 0)];
        let all_equal = (0..p).all(|j| (w[(0, j)] - first).abs() <= eps1);
        if all_equal {
            let mean: f64 = (0..p).map(|j| w[(0, j)]).sum::<f64>() / p as f64;
            constant_curvature = Some(-mean * mean);
            let mut h = vec![0.0; 1 + p];
            h[0] = mean;
            vectorial = Some(h);
        }
    }

    // Strictly negative sectional curvature: q = 1 and all weights nonzero
    // with a common sign.
    let negative_sectional = q == 1 && {
        let signs: Vec<f64> = (0..p).map(|j| w[(0, j)]).collect();
        signs.iter().all(|&v| v > eps1) || signs.iter().all(|&v| v < -eps1)
    };

    // Negative-definite Ricci: every column total Σ_l ⟨Ω_l, Ω_j⟩ positive.
    let negative_ricci = (0..p).all(|j| (0..p).map(|l| col_gram[(l, j)]).sum::<f64>() > eps2);

    // Einstein: rows pairwise orthogonal with equal norms, and each column
    // total equal to that common row norm; then λ = -|L_1|².
    let einstein = {
        let mut ok = true;
        let target = row_gram[(0, 0)];
        for a in 0..q {
            for b in 0..q {
                let expected = if a == b { target } else { 0.0 };
                if (row_gram[(a, b)] - expected).abs() > eps2 {
                    ok = false;
                }
            }
        }
        for j in 0..p {
            let total: f64 = (0..p).map(|l| col_gram[(l, j)]).sum();
            if (total - target).abs() > eps2 {
                ok = false;
            }
        }
        if ok {
            Some(-target)
        } else {
            None
        }
    };

    // Parallel Ricci form.
    let eps3 = tol.eps_eq * scale * scale * scale;
    let ricci_parallel = (0..q).all(|a| {
        (0..p).all(|j| {
            let v: f64 = (0..p)
                .map(|l| (w[(a, l)] - w[(a, j)]) * col_gram[(l, j)])
                .sum();
            v.abs() <= eps3
        })
    });

    // Locally symmetric: weight columns that differ are orthogonal. Cluster
    // the columns by equality, then demand pairwise orthogonal
    // representatives (zero columns are harmless).
    let locally_symmetric = {
        let mut reps: Vec<DVector<f64>> = Vec::new();
        for j in 0..p {
            let col = omega.col(j);
            if !reps.iter().any(|r| (r - &col).amax() <= eps1) {
                reps.push(col);
            }
        }
        let mut ok = true;
        for a in 0..reps.len() {
            for b in (a + 1)..reps.len() {
                if reps[a].dot(&reps[b]).abs() > eps2 {
                    ok = false;
                }
            }
        }
        ok
    };

    let flags = ClassificationFlags {
        cyclic: true,
        constant_curvature,
        negative_sectional,
        negative_ricci,
        einstein,
        ricci_parallel,
        locally_symmetric,
        vectorial,
    };

    // Guard: the verdicts must agree with the generic pipeline. Debug builds
    // recompute; release builds trust the closed forms.
    #[cfg(debug_assertions)]
    verify_flags_against_pipeline(omega, &flags, tol);

    flags
}

#[cfg(debug_assertions)]
fn verify_flags_against_pipeline(
    omega: &OmegaMatrix,
    flags: &ClassificationFlags,
    tol: &ToleranceConfig,
) {
    use crate::connection;
    let mla = build(omega);
    let report = CurvatureReport::compute(&mla, tol).expect("models pass the generic pipeline");
    let scale = omega.scale();
    let guard = 1e-8 * scale * scale * scale;

    // Positive verdicts imply bounds the pipeline must confirm. (The
    // negative direction is not asserted here: arbitrarily close to a flag
    // boundary the pipeline magnitude can be smaller than any fixed floor.
    // Property tests cover that side with margin-aware random models.)
    if let Some(lambda) = flags.einstein {
        let defect = (&report.ricci - mla.gram() * lambda).amax();
        debug_assert!(defect <= guard, "einstein guard failed: {defect:.3e}");
    }
    if flags.ricci_parallel {
        let nr = report.nabla_ricci.max_abs();
        debug_assert!(nr <= guard, "ricci_parallel guard failed: {nr:.3e}");
    }
    if flags.locally_symmetric {
        let nk = report.nabla_curvature.max_abs();
        debug_assert!(nk <= guard, "locally_symmetric guard failed: {nk:.3e}");
    }
    if flags.negative_ricci {
        let (ric_eigs, _) = crate::linalg::sym_eigen_sorted(&report.ricci);
        debug_assert!(
            ric_eigs[ric_eigs.len() - 1] < 0.0,
            "negative_ricci guard failed"
        );
    }
    if let Some(k) = flags.constant_curvature {
        let found = connection::check_constant_curvature(&mla, &report.curvature, tol)
            .expect("constant-curvature guard: detection failed");
        debug_assert!((found - k).abs() <= 1e-8 * k.abs().max(1.0));
    }
    if let Some(h) = &flags.vectorial {
        let found = connection::check_vectorial(&mla, tol).expect("vectorial guard failed");
        let h = DVector::from_vec(h.clone());
        debug_assert!((found - h).amax() <= 1e-8 * scale);
    }
    // Flag implications that hold for every model.
    if flags.locally_symmetric {
        debug_assert!(flags.ricci_parallel, "symmetric must imply parallel Ricci");
    }
    if flags.constant_curvature.is_some_and(|k| k != 0.0) {
        debug_assert!(flags.einstein.is_some() && flags.locally_symmetric);
    }
}

/// Witness of an isometric equivalence `Ω = Q Θ P` with `Q` orthogonal q×q
/// and `P` a column permutation (`permutation[j]` is the column of Θ matched
/// to column j of Ω).
#[derive(Debug, Clone, PartialEq)]
pub struct IsometryWitness {
    pub q_matrix: DMatrix<f64>,
    pub permutation: Vec<usize>,
}

impl IsometryWitness {
    pub fn permutation_matrix(&self) -> DMatrix<f64> {
        let p = self.permutation.len();
        let mut m = DMatrix::zeros(p, p);
        for (j, &s) in self.permutation.iter().enumerate() {
            m[(s, j)] = 1.0;
        }
        m
    }

    /// `sup |Ω - Q Θ P|`.
    pub fn residual(&self, omega: &OmegaMatrix, theta: &OmegaMatrix) -> f64 {
        let rearranged = theta.entries() * self.permutation_matrix();
        (omega.entries() - &self.q_matrix * rearranged).amax()
    }
}

const MAX_ISOMETRY_COLUMNS: usize = 10;

/// Search for an isometric equivalence between two models. Returns `None`
/// when the shapes differ or no `(Q, P)` pair exists; errors only when the
/// column count makes the permutation search unreasonable.
///
/// The search walks column assignments in lexicographic order, pruning with
/// column norms and pairwise inner products (both invariant under Q), so the
/// first complete assignment found is the lexicographically smallest witness.
pub fn isometric(
    omega: &OmegaMatrix,
    theta: &OmegaMatrix,
    tol: &ToleranceConfig,
) -> Result<Option<IsometryWitness>> {
    if omega.q() != theta.q() || omega.p() != theta.p() {
        return Ok(None);
    }
    let p = omega.p();
    if p > MAX_ISOMETRY_COLUMNS {
        return Err(Error::InvalidParameter(format!(
            "isometry search supports at most {MAX_ISOMETRY_COLUMNS} columns, got {p}"
        )));
    }
    let scale = omega.scale().max(theta.scale());
    let eps = tol.eps_eq * scale * scale;

    let gram_a = omega.col_gram();
    let gram_b = theta.col_gram();

    // Quick multiset prune on squared column norms.
    let mut norms_a: Vec<f64> = (0..p).map(|j| gram_a[(j, j)]).collect();
    let mut norms_b: Vec<f64> = (0..p).map(|j| gram_b[(j, j)]).collect();
    norms_a.sort_by(f64::total_cmp);
    norms_b.sort_by(f64::total_cmp);
    if norms_a
        .iter()
        .zip(&norms_b)
        .any(|(a, b)| (a - b).abs() > eps)
    {
        return Ok(None);
    }

    let mut assignment: Vec<usize> = Vec::with_capacity(p);
    let mut used = vec![false; p];
    let found = search_assignment(&gram_a, &gram_b, eps, &mut assignment, &mut used, |cand| {
        finish_witness(omega, theta, cand, tol)
    });
    Ok(found)
}

/// Depth-first search over column assignments; `finish` validates a complete
/// assignment and may reject it (forcing further backtracking).
fn search_assignment(
    gram_a: &DMatrix<f64>,
    gram_b: &DMatrix<f64>,
    eps: f64,
    assignment: &mut Vec<usize>,
    used: &mut [bool],
    finish: impl Fn(&[usize]) -> Option<IsometryWitness> + Copy,
) -> Option<IsometryWitness> {
    let p = gram_a.ncols();
    let j = assignment.len();
    if j == p {
        return finish(assignment);
    }
    for c in 0..p {
        if used[c] {
            continue;
        }
        if (gram_b[(c, c)] - gram_a[(j, j)]).abs() > eps {
            continue;
        }
        if (0..j).any(|k| (gram_b[(assignment[k], c)] - gram_a[(k, j)]).abs() > eps) {
            continue;
        }
        assignment.push(c);
        used[c] = true;
        if let Some(w) = search_assignment(gram_a, gram_b, eps, assignment, used, finish) {
            return Some(w);
        }
        assignment.pop();
        used[c] = false;
    }
    None
}

/// Reconstruct Q from a complete column assignment and verify it.
fn finish_witness(
    omega: &OmegaMatrix,
    theta: &OmegaMatrix,
    assignment: &[usize],
    tol: &ToleranceConfig,
) -> Option<IsometryWitness> {
    let q = omega.q();
    let p = omega.p();
    let scale = omega.scale().max(theta.scale());

    // Columns of Θ rearranged to line up with Ω.
    let mut m = DMatrix::zeros(q, p);
    for (j, &source) in assignment.iter().enumerate() {
        m.set_column(j, &theta.entries().column(source));
    }
    // Q must map a full-rank column subset of M onto the matching columns of
    // Ω; a greedy pivot choice keeps the solve well-conditioned.
    let pivots = linalg::greedy_pivot_columns(&m, q);
    if pivots.len() < q {
        return None;
    }
    let mut m_sub = DMatrix::zeros(q, q);
    let mut o_sub = DMatrix::zeros(q, q);
    for (idx, &jcol) in pivots.iter().enumerate() {
        m_sub.set_column(idx, &m.column(jcol));
        o_sub.set_column(idx, &omega.entries().column(jcol));
    }
    // Solve Q M_sub = O_sub.
    let lu = m_sub.transpose().lu();
    let q_t = lu.solve(&o_sub.transpose())?;
    let q_matrix = q_t.transpose();

    let orth_defect = (q_matrix.transpose() * &q_matrix - DMatrix::identity(q, q)).amax();
    if orth_defect > tol.eps_eq * 100.0 {
        return None;
    }
    let residual = (omega.entries() - &q_matrix * &m).amax();
    if residual > tol.eps_eq * 100.0 * scale {
        return None;
    }
    Some(IsometryWitness {
        q_matrix,
        permutation: assignment.to_vec(),
    })
}

/// For a square invertible Ω, the canonical representative `D Pᵗ` of its
/// equivalence class under Ω ↦ QΩP: polar-decompose Ω = O·S, diagonalize
/// `S = P D Pᵗ`, and return `D Pᵗ` with the eigenvector basis permuted and
/// sign-fixed to lie as close to the identity as possible (so diagonal
/// inputs with positive entries are returned unchanged).
///
/// The output generates the same group up to isomorphism; the singular values
/// of Ω are preserved exactly.
pub fn normalize_square(omega: &OmegaMatrix, tol: &ToleranceConfig) -> Result<OmegaMatrix> {
    let q = omega.q();
    if omega.p() != q {
        return Err(Error::InvalidParameter(format!(
            "normalization requires a square weight matrix, got {}x{}",
            omega.q(),
            omega.p()
        )));
    }
    let svals = linalg::singular_values(omega.entries());
    if svals[q - 1] <= tol.eps_rank * omega.scale() {
        return Err(Error::RankDeficient(format!(
            "weight matrix is singular (smallest singular value {:.3e})",
            svals[q - 1]
        )));
    }
    // S = V Σ Vᵗ: columns of V are eigenvectors of S.
    let (_, sigma, v) = linalg::jacobi_svd(omega.entries());

    // Greedy assignment of eigenvector columns to coordinate rows by largest
    // |entry|, fixing signs so the assigned entries are positive.
    let mut row_of_col = vec![usize::MAX; q];
    let mut row_used = vec![false; q];
    let mut col_used = vec![false; q];
    for _ in 0..q {
        let mut best = (0usize, 0usize, -1.0f64);
        for c in 0..q {
            if col_used[c] {
                continue;
            }
            for r in 0..q {
                if row_used[r] {
                    continue;
                }
                if v[(r, c)].abs() > best.2 {
                    best = (r, c, v[(r, c)].abs());
                }
            }
        }
        let (r, c, _) = best;
        row_of_col[c] = r;
        row_used[r] = true;
        col_used[c] = true;
    }
    let mut p_mat = DMatrix::zeros(q, q);
    let mut d = DVector::zeros(q);
    for c in 0..q {
        let r = row_of_col[c];
        let sign = if v[(r, c)] < 0.0 { -1.0 } else { 1.0 };
        p_mat.set_column(r, &(v.column(c) * sign));
        d[r] = sigma[c];
    }
    let normalized = DMatrix::from_diagonal(&d) * p_mat.transpose();
    OmegaMatrix::new(normalized)
}

/// The left-invariant metric of the model in exponential coordinates
/// `(s, t) ∈ ℝ^q × ℝ^p`: `diag(1_q, e^{-2⟨s, Ω_j⟩})`. The metric depends only
/// on `s`; `t` is accepted to make the coordinate meaning explicit.
pub fn metric_at(omega: &OmegaMatrix, s: &DVector<f64>, t: &DVector<f64>) -> Result<DMatrix<f64>> {
    if s.len() != omega.q() {
        return Err(Error::DimensionMismatch {
            expected: omega.q(),
            got: s.len(),
        });
    }
    if t.len() != omega.p() {
        return Err(Error::DimensionMismatch {
            expected: omega.p(),
            got: t.len(),
        });
    }
    let q = omega.q();
    let p = omega.p();
    let mut diag = DVector::from_element(q + p, 1.0);
    for j in 0..p {
        let pairing = omega.col(j).dot(s);
        diag[q + j] = (-2.0 * pairing).exp();
    }
    Ok(DMatrix::from_diagonal(&diag))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn omega(rows: &[&[f64]]) -> OmegaMatrix {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        OmegaMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn rank_validation() {
        assert!(OmegaMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).is_err());
        assert!(OmegaMatrix::from_rows(&[vec![0.0]]).is_err());
        // q > p can never have independent rows.
        assert!(OmegaMatrix::from_rows(&[vec![1.0], vec![2.0]]).is_err());
        assert!(OmegaMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).is_ok());
    }

    #[test]
    fn build_produces_expected_brackets() {
        let m = build(&omega(&[&[1.0, 2.0]]));
        // Basis (h, f1, f2): [h, f1] = f1, [h, f2] = 2 f2.
        let b01 = m.algebra().bracket_basis(0, 1);
        assert_eq!(b01, DVector::from_vec(vec![0.0, 1.0, 0.0]));
        let b02 = m.algebra().bracket_basis(0, 2);
        assert_eq!(b02, DVector::from_vec(vec![0.0, 0.0, 2.0]));
        assert!(m.check_cyclic(&tol()));
        assert!(m.algebra().check_jacobi(&tol()));
    }

    #[test]
    fn closed_forms_match_generic_pipeline() {
        for (rows, label) in [
            (vec![vec![1.0]], "hyperbolic plane"),
            (vec![vec![1.0, 2.0]], "two weights"),
            (vec![vec![1.0, 0.0], vec![0.0, 1.0]], "orthonormal rows"),
            (
                vec![vec![1.0, 0.5, 0.0], vec![0.0, 1.0, -1.5]],
                "generic 2x3",
            ),
        ] {
            let om = OmegaMatrix::from_rows(&rows).unwrap();
            let closed = closed_forms(&om);
            let report = CurvatureReport::compute(&build(&om), &tol()).unwrap();
            let d = closed.discrepancy(&report);
            assert!(
                d.rel_nonzero < 1e-12 && d.abs_zero < 1e-12,
                "{label}: discrepancy {d:?}"
            );
        }
    }

    #[test]
    fn closed_ricci_and_scalar_for_known_models() {
        // Ω = (1, 2): ric = diag(-5, -3, -6), σ = -14.
        let closed = closed_forms(&omega(&[&[1.0, 2.0]]));
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![-5.0, -3.0, -6.0]));
        assert!((&closed.ricci - expected).amax() < 1e-14);
        assert!((closed.scalar + 14.0).abs() < 1e-14);

        // Ω = (1): ric = -identity, σ = -2.
        let closed = closed_forms(&omega(&[&[1.0]]));
        assert!((&closed.ricci + DMatrix::identity(2, 2)).amax() < 1e-14);
        assert!((closed.scalar + 2.0).abs() < 1e-14);
    }

    #[test]
    fn classify_constant_curvature_family() {
        let flags = classify(&omega(&[&[2.0, 2.0, 2.0]]), &tol());
        assert_eq!(flags.constant_curvature, Some(-4.0));
        assert!(flags.negative_sectional);
        assert!(flags.locally_symmetric && flags.ricci_parallel);
        assert_eq!(flags.einstein, Some(-12.0));
        let h = flags.vectorial.unwrap();
        assert_eq!(h, vec![2.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn classify_orthonormal_rows() {
        let flags = classify(&omega(&[&[1.0, 0.0], &[0.0, 1.0]]), &tol());
        assert_eq!(flags.constant_curvature, None);
        assert!(!flags.negative_sectional); // q > 1 admits flat planes
        assert!(flags.negative_ricci);
        assert_eq!(flags.einstein, Some(-1.0));
        assert!(flags.ricci_parallel && flags.locally_symmetric);
        assert_eq!(flags.vectorial, None);
    }

    #[test]
    fn classify_generic_two_weights() {
        let flags = classify(&omega(&[&[1.0, 2.0]]), &tol());
        assert_eq!(flags.constant_curvature, None);
        assert!(flags.negative_sectional);
        assert!(flags.negative_ricci);
        assert_eq!(flags.einstein, None);
        assert!(!flags.ricci_parallel);
        assert!(!flags.locally_symmetric);
    }

    #[test]
    fn isometry_identity_and_swap() {
        let a = omega(&[&[1.0, 2.0]]);
        let onto_self = isometric(&a, &a, &tol()).unwrap().unwrap();
        assert_eq!(onto_self.permutation, vec![0, 1]);
        assert!(onto_self.residual(&a, &a) < 1e-12);

        let b = omega(&[&[2.0, 1.0]]);
        let w = isometric(&a, &b, &tol()).unwrap().unwrap();
        assert_eq!(w.permutation, vec![1, 0]);
        assert!(w.residual(&a, &b) < 1e-12);
    }

    #[test]
    fn isometry_distinguishes_different_weights() {
        let a = omega(&[&[1.0, 2.0]]);
        let b = omega(&[&[1.0, 3.0]]);
        assert!(isometric(&a, &b, &tol()).unwrap().is_none());
        // Shape mismatch is a clean "no".
        let c = omega(&[&[1.0, 2.0, 3.0]]);
        assert!(isometric(&a, &c, &tol()).unwrap().is_none());
    }

    #[test]
    fn isometry_recovers_orthogonal_mixing() {
        // Θ = Qᵗ Ω with a rotation Q: the models are isometric and the
        // witness must reproduce Ω up to 1e-9.
        let angle: f64 = 0.7;
        let (s, c) = angle.sin_cos();
        let qrot = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        let a = omega(&[&[1.0, 0.5, 0.0], &[0.0, 1.0, -1.5]]);
        let theta = OmegaMatrix::new(qrot.transpose() * a.entries()).unwrap();
        let w = isometric(&a, &theta, &tol()).unwrap().unwrap();
        assert!(w.residual(&a, &theta) < 1e-9);
        // Q recovered as the rotation itself.
        assert!((&w.q_matrix - &qrot).amax() < 1e-9);
    }

    #[test]
    fn normalize_square_keeps_positive_diagonals() {
        let d = omega(&[&[2.0, 0.0], &[0.0, 3.0]]);
        let n = normalize_square(&d, &tol()).unwrap();
        assert!((n.entries() - d.entries()).amax() < 1e-12);

        let id = omega(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let n = normalize_square(&id, &tol()).unwrap();
        assert!((n.entries() - id.entries()).amax() < 1e-12);
    }

    #[test]
    fn normalize_square_strips_rotations() {
        let angle: f64 = std::f64::consts::FRAC_PI_4;
        let (s, c) = angle.sin_cos();
        let rot = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        let d = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let mixed = OmegaMatrix::new(rot * d).unwrap();
        let n = normalize_square(&mixed, &tol()).unwrap();
        // Singular values preserved...
        let mut sv: Vec<f64> = linalg::singular_values(n.entries())
            .iter()
            .copied()
            .collect();
        sv.sort_by(f64::total_cmp);
        assert!((sv[0] - 1.0).abs() < 1e-12 && (sv[1] - 2.0).abs() < 1e-12);
        // ...and the rotation part removed: the result is diag(1, 2) again.
        let expected = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        assert!((n.entries() - expected).amax() < 1e-12);
        // Normalizing twice is idempotent.
        let twice = normalize_square(&n, &tol()).unwrap();
        assert!((twice.entries() - n.entries()).amax() < 1e-12);
    }

    #[test]
    fn metric_at_matches_exponential_weights() {
        let om = omega(&[&[1.0]]);
        let s = DVector::from_vec(vec![std::f64::consts::LN_2]);
        let t = DVector::zeros(1);
        let g = metric_at(&om, &s, &t).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.25]));
        assert!((g - expected).amax() < 1e-14);

        let om = omega(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let s = DVector::from_vec(vec![0.3, -0.2]);
        let t = DVector::zeros(2);
        let g = metric_at(&om, &s, &t).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![
            1.0,
            1.0,
            (-0.6f64).exp(),
            (0.4f64).exp(),
        ]));
        assert!((g - expected).amax() < 1e-14);

        // At the origin the metric is the identity.
        let g0 = metric_at(&om, &DVector::zeros(2), &DVector::zeros(2)).unwrap();
        assert_eq!(g0, DMatrix::identity(4, 4));
    }
}
