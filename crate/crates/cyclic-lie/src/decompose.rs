//! Splitting a cyclic metric Lie algebra into its canonical building
//! blocks: an abelian factor, one solvable model G(q, p, Ω), and simple
//! 3-dimensional factors, all pairwise orthogonal. Also enumerates the
//! families that exist in each dimension.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::algebra::{LieAlgebra, MetricLieAlgebra};
use crate::error::{Error, Result};
use crate::gqp::OmegaMatrix;
use crate::linalg;
use crate::sl2::{self, ProductSpec, Sl2CyclicMetric};
use crate::subspace::Subspace;
use crate::testing;
use crate::tolerance::ToleranceConfig;

/// Result of [`decompose`]: the recovered product data, the adapted basis,
/// and the verification residual.
#[derive(Debug, Clone)]
pub struct Decomposition {
    /// Product data in canonical order: abelian part, solvable model with
    /// sorted weight matrix, simple factors sorted by parameters.
    pub spec: ProductSpec,
    /// Columns are the adapted basis vectors in input coordinates; pushing
    /// the input through this basis reproduces `build_product(&spec)`.
    pub change_of_basis: DMatrix<f64>,
    /// Largest deviation between the transported input and the rebuilt
    /// product (structure constants and gram entries).
    pub residual: f64,
}

/// Number of random attempts for the eigenvalue-splitting steps before the
/// input is declared degenerate.
const MAX_SPLIT_ATTEMPTS: usize = 5;

/// Decompose a cyclic metric Lie algebra into canonical blocks.
///
/// Validates the Jacobi identity and the cyclic condition, computes the
/// radical as the Killing-orthogonal complement of the derived ideal,
/// splits the semisimple complement into simple ideals, recovers canonical
/// parameters on each block, and verifies the assembled answer against the
/// input. The `seed` only influences internal eigenvalue-splitting retries;
/// the recovered data is deterministic for a fixed seed.
pub fn decompose(
    mla: &MetricLieAlgebra,
    tol: &ToleranceConfig,
    seed: u64,
) -> Result<Decomposition> {
    let n = mla.dim();
    if n == 0 {
        return Err(Error::InvalidParameter(
            "cannot decompose a zero-dimensional algebra".into(),
        ));
    }
    let jac = mla.algebra().jacobi_residual();
    let scale = mla.scale();
    if jac > tol.eps_eq * scale * scale {
        return Err(Error::JacobiFailure { residual: jac });
    }
    let cyc = mla.cyclic_residual();
    if cyc > tol.eps_eq * scale * scale {
        return Err(Error::NotCyclic { residual: cyc });
    }
    let mut rng = testing::rng(seed);

    // Radical = Killing-orthogonal complement of the derived ideal; for
    // cyclic metrics the semisimple complement is also G-orthogonal.
    let derived = mla.derived_ideal(tol);
    let rad = radical(mla, &derived, tol);
    let semi = rad.orthogonal_complement(mla.gram(), tol.eps_rank);

    if !semi.dim().is_multiple_of(3) {
        return Err(Error::Degenerate(format!(
            "semisimple part has dimension {}, which is not a sum of 3-dimensional factors",
            semi.dim()
        )));
    }

    // Simple factors: split the semisimple part into minimal ideals, then
    // recover (μ, ν) and the adapted basis on each.
    let mut sl2_blocks: Vec<(Sl2CyclicMetric, DMatrix<f64>)> = Vec::new();
    if semi.dim() > 0 {
        let (semi_mla, defect) = restrict(mla, &semi);
        if defect > tol.eps_eq * scale.max(1.0) {
            return Err(Error::Degenerate(format!(
                "semisimple complement is not closed under the bracket (defect {defect:.3e})"
            )));
        }
        let ideals = split_minimal_ideals(&semi_mla, tol, &mut rng)?;
        for ideal_basis in ideals {
            // Coordinates: ideal basis columns live in semi-coordinates.
            let ambient = semi.basis() * &ideal_basis;
            let sub = Subspace::from_orthonormal(ambient);
            let (factor_mla, defect) = restrict(mla, &sub);
            if defect > tol.eps_eq * scale.max(1.0) {
                return Err(Error::Degenerate(format!(
                    "candidate simple ideal is not closed under the bracket (defect {defect:.3e})"
                )));
            }
            let adapted = sl2::sl2_adapted_basis(&factor_mla, tol)?.ok_or_else(|| {
                Error::Degenerate("simple factor does not carry a canonical cyclic metric".into())
            })?;
            let metric = Sl2CyclicMetric::new(adapted.mu, adapted.nu).map_err(|_| {
                Error::Degenerate(format!(
                    "recovered simple-factor parameters are inadmissible: mu={}, nu={}",
                    adapted.mu, adapted.nu
                ))
            })?;
            sl2_blocks.push((metric, sub.basis() * &adapted.basis));
        }
        sl2_blocks.sort_by(|a, b| {
            (a.0.mu(), a.0.nu())
                .partial_cmp(&(b.0.mu(), b.0.nu()))
                .expect("parameters are finite")
        });
    }

    // Radical: split off the center (the abelian factor), the derived ideal
    // (the f-part of the model), and the remaining h-part.
    let (r_flat, omega, z_ambient, h_ambient, f_ambient) = if rad.dim() == 0 {
        let empty = DMatrix::zeros(n, 0);
        (0usize, None, empty.clone(), empty.clone(), empty)
    } else {
        let (rad_mla, defect) = restrict(mla, &rad);
        if defect > tol.eps_eq * scale.max(1.0) {
            return Err(Error::Degenerate(format!(
                "radical is not closed under the bracket (defect {defect:.3e})"
            )));
        }
        let f_sub = rad_mla.derived_ideal(tol);
        let z_sub = rad_mla.center(tol);
        let p = f_sub.dim();
        let r_flat = z_sub.dim();
        let mut zf_vectors = z_sub.basis_vectors();
        zf_vectors.extend(f_sub.basis_vectors());
        let zf = Subspace::from_spanning(&zf_vectors, rad_mla.gram(), tol.eps_rank);
        if zf.dim() != r_flat + p {
            return Err(Error::Degenerate(
                "center and derived ideal of the radical overlap".into(),
            ));
        }
        let h_sub = zf.orthogonal_complement(rad_mla.gram(), tol.eps_rank);
        let q = h_sub.dim();
        if p == 0 && q != 0 {
            return Err(Error::Degenerate(
                "radical has a non-central part but no derived ideal".into(),
            ));
        }
        let (omega, h_in_rad, f_in_rad) = if p > 0 {
            let (om, h_cols, f_cols) = recover_weights(&rad_mla, &h_sub, &f_sub, tol, &mut rng)?;
            (Some(om), h_cols, f_cols)
        } else {
            (
                None,
                DMatrix::zeros(rad.dim(), 0),
                DMatrix::zeros(rad.dim(), 0),
            )
        };
        (
            r_flat,
            omega,
            rad.basis() * z_sub.basis(),
            rad.basis() * h_in_rad,
            rad.basis() * f_in_rad,
        )
    };

    // Assemble the adapted basis in input coordinates.
    let mut change = DMatrix::zeros(n, n);
    let mut col = 0usize;
    for block in [&z_ambient, &h_ambient, &f_ambient] {
        for j in 0..block.ncols() {
            change.set_column(col, &block.column(j));
            col += 1;
        }
    }
    for (_, basis) in &sl2_blocks {
        for j in 0..3 {
            change.set_column(col, &basis.column(j));
            col += 1;
        }
    }
    if col != n {
        return Err(Error::Degenerate(format!(
            "block dimensions {col} do not fill the algebra dimension {n}"
        )));
    }

    let spec = ProductSpec {
        r: r_flat,
        omega,
        sl2_factors: sl2_blocks.iter().map(|(m, _)| *m).collect(),
    };

    // Verify: the transported input must match the rebuilt product.
    let built = sl2::build_product(&spec)?;
    let moved = mla.change_basis(&change)?;
    let mut residual = (moved.gram() - built.gram()).amax();
    for i in 0..n {
        residual = residual.max((moved.algebra().ad(i) - built.algebra().ad(i)).amax());
    }
    let bound = tol.eps_cluster * scale;
    if residual > bound {
        return Err(Error::Degenerate(format!(
            "decomposition residual {residual:.3e} exceeds {bound:.3e}; \
             the input is not a recognizable product of canonical blocks"
        )));
    }

    Ok(Decomposition {
        spec,
        change_of_basis: change,
        residual,
    })
}

/// The radical as the Killing-orthogonal complement of the derived ideal.
fn radical(mla: &MetricLieAlgebra, derived: &Subspace, tol: &ToleranceConfig) -> Subspace {
    let n = mla.dim();
    if derived.dim() == 0 {
        return Subspace::from_spanning(
            &(0..n)
                .map(|i| DVector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 }))
                .collect::<Vec<_>>(),
            mla.gram(),
            tol.eps_rank,
        );
    }
    let b = mla.killing_form();
    let constraints = derived.basis().transpose() * b;
    let b_scale = constraints.amax().max(1.0);
    let kernel = linalg::null_space(&constraints, tol.eps_rank * b_scale);
    Subspace::from_spanning(&kernel, mla.gram(), tol.eps_rank)
}

/// Restrict a metric Lie algebra to a G-orthonormal subalgebra basis,
/// returning the restricted algebra (with identity gram) and the largest
/// bracket-closure defect observed.
fn restrict(mla: &MetricLieAlgebra, sub: &Subspace) -> (MetricLieAlgebra, f64) {
    let d = sub.dim();
    let basis = sub.basis();
    let gram = mla.gram();
    let proj = basis.transpose() * gram;
    let mut ads = Vec::with_capacity(d);
    let mut defect = 0.0f64;
    for a in 0..d {
        let u = basis.column(a).into_owned();
        let ad_u = mla.algebra().ad_of(&u);
        let full = ad_u * basis; // columns: [u, b_c] in ambient coordinates
        let reduced = &proj * &full;
        let reconstructed = basis * &reduced;
        defect = defect.max((&full - reconstructed).amax());
        ads.push(reduced);
    }
    let algebra = LieAlgebra::new_unchecked(ads).expect("restricted ads are square");
    let restricted = MetricLieAlgebra::new(algebra, DMatrix::identity(d, d))
        .expect("identity gram is positive-definite");
    (restricted, defect)
}

/// Split a semisimple metric Lie algebra (identity gram) into minimal
/// ideals. Returns one orthonormal basis matrix per ideal, each with three
/// columns in the coordinates of the input.
fn split_minimal_ideals<R: Rng>(
    semi: &MetricLieAlgebra,
    tol: &ToleranceConfig,
    rng: &mut R,
) -> Result<Vec<DMatrix<f64>>> {
    let d = semi.dim();
    let m = d / 3;
    if m == 1 {
        return Ok(vec![DMatrix::identity(3, 3)]);
    }

    // The commutant of the adjoint representation is spanned by the
    // orthogonal projectors onto the minimal ideals; its elements are found
    // as the null space of X ↦ (X ad_a - ad_a X for all a).
    let mut system = DMatrix::zeros(d * d * d, d * d);
    for a in 0..d {
        let ad = semi.algebra().ad(a);
        // Row block for equation index (a, i, j): Σ_k X_{ik} ad_{kj} - ad_{ik} X_{kj} = 0.
        for i in 0..d {
            for j in 0..d {
                let row = a * d * d + i * d + j;
                for k in 0..d {
                    system[(row, i * d + k)] += ad[(k, j)]; // X_{ik} ad_{kj}
                    system[(row, k * d + j)] -= ad[(i, k)]; // ad_{ik} X_{kj}
                }
            }
        }
    }
    let ad_scale = (0..d)
        .map(|a| semi.algebra().ad(a).amax())
        .fold(1.0f64, f64::max);
    let kernel = linalg::null_space(&system, tol.eps_rank * ad_scale);
    if kernel.len() != m {
        return Err(Error::Degenerate(format!(
            "adjoint commutant has dimension {}, expected {m}",
            kernel.len()
        )));
    }

    // A random combination of commutant elements separates the ideals as
    // eigenspaces. Commutant elements are symmetric here because the ideals
    // are orthogonal; symmetrize away the numerical noise.
    for _ in 0..MAX_SPLIT_ATTEMPTS {
        let mut y = DMatrix::zeros(d, d);
        for x in &kernel {
            let c: f64 = rng.random_range(-1.0..1.0);
            for i in 0..d {
                for j in 0..d {
                    y[(i, j)] += c * x[i * d + j];
                }
            }
        }
        let y = (&y + y.transpose()) * 0.5;
        let (vals, vecs) = linalg::sym_eigen_sorted(&y);
        let clusters = cluster_indices(vals.as_slice(), tol.eps_cluster * vals.amax().max(1.0));
        if clusters.len() != m || clusters.iter().any(|c| c.len() != 3) {
            continue;
        }
        let mut ideals = Vec::with_capacity(m);
        for cluster in clusters {
            let mut basis = DMatrix::zeros(d, 3);
            for (t, &idx) in cluster.iter().enumerate() {
                basis.set_column(t, &vecs.column(idx));
            }
            ideals.push(basis);
        }
        return Ok(ideals);
    }
    Err(Error::Degenerate(
        "failed to separate the semisimple part into 3-dimensional ideals".into(),
    ))
}

/// Group indices of an ascending value list into clusters with gaps larger
/// than `gap`.
fn cluster_indices(values: &[f64], gap: f64) -> Vec<Vec<usize>> {
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match clusters.last_mut() {
            Some(cluster) if v - values[*cluster.last().unwrap()] <= gap => cluster.push(i),
            _ => clusters.push(vec![i]),
        }
    }
    clusters
}

/// Recover the weight matrix of the solvable block inside the radical:
/// simultaneously diagonalize the action of the h-part on the derived
/// ideal, then order rows and columns canonically. Returns the weight
/// matrix together with the adapted h- and f-bases (columns, in radical
/// coordinates).
fn recover_weights<R: Rng>(
    rad: &MetricLieAlgebra,
    h_sub: &Subspace,
    f_sub: &Subspace,
    tol: &ToleranceConfig,
    rng: &mut R,
) -> Result<(OmegaMatrix, DMatrix<f64>, DMatrix<f64>)> {
    let q = h_sub.dim();
    let p = f_sub.dim();
    if q == 0 || q > p {
        return Err(Error::Degenerate(format!(
            "radical block sizes are inconsistent: q={q}, p={p}"
        )));
    }

    // Operators A_a = ad_{h_a} restricted to the derived ideal, in the
    // orthonormal f-coordinates; they commute and are symmetric for a
    // cyclic metric.
    let f_basis = f_sub.basis();
    let mut ops = Vec::with_capacity(q);
    for a in 0..q {
        let h = h_sub.basis().column(a).into_owned();
        let act = f_basis.transpose() * rad.algebra().ad_of(&h) * f_basis;
        ops.push((&act + act.transpose()) * 0.5);
    }
    let op_scale = ops.iter().map(|o| o.amax()).fold(1.0f64, f64::max);

    let mut found: Option<DMatrix<f64>> = None;
    'attempt: for _ in 0..MAX_SPLIT_ATTEMPTS {
        let mut t = DMatrix::zeros(p, p);
        for op in &ops {
            t += op * rng.random_range(-1.0..1.0f64);
        }
        let (_, vecs) = linalg::sym_eigen_sorted(&t);
        // Accept when every operator is diagonal in the candidate basis.
        for op in &ops {
            let moved = vecs.transpose() * op * &vecs;
            let mut off = 0.0f64;
            for i in 0..p {
                for j in 0..p {
                    if i != j {
                        off = off.max(moved[(i, j)].abs());
                    }
                }
            }
            if off > tol.eps_cluster * op_scale {
                continue 'attempt;
            }
        }
        found = Some(vecs);
        break;
    }
    let f_rot = found.ok_or_else(|| {
        Error::Degenerate(
            "h-action on the derived ideal is not simultaneously diagonalizable".into(),
        )
    })?;

    let mut omega = DMatrix::zeros(q, p);
    for (a, op) in ops.iter().enumerate() {
        let diag = f_rot.transpose() * op * &f_rot;
        for j in 0..p {
            omega[(a, j)] = diag[(j, j)];
        }
    }
    let mut h_cols = h_sub.basis().clone();
    let mut f_cols = f_basis * &f_rot;

    // Column order first: at this point the rows sit in a basis that does
    // not depend on the randomized eigen-splitting, so an ascending
    // (norm, entries) key cancels the arbitrary eigenvector order. Ties can
    // only come from identical columns, where the order is immaterial.
    let col_order = sorted_order(p, |j| {
        let col: Vec<f64> = (0..q).map(|a| omega[(a, j)]).collect();
        (norm_of(&col), col)
    });
    omega = reorder_columns(&omega, &col_order);
    f_cols = reorder_columns(&f_cols, &col_order);
    // Sign normalization: make the first largest-magnitude entry of each
    // row positive (flipping the matching h vector).
    for a in 0..q {
        let mut lead = 0usize;
        for j in 1..p {
            if omega[(a, j)].abs() > omega[(a, lead)].abs() {
                lead = j;
            }
        }
        if omega[(a, lead)] < 0.0 {
            for j in 0..p {
                omega[(a, j)] = -omega[(a, j)];
            }
            let flipped = -h_cols.column(a);
            h_cols.set_column(a, &flipped);
        }
    }
    // Row order: ascending by (norm, entries); carries the h vectors.
    let row_order = sorted_order(q, |a| {
        let row: Vec<f64> = (0..p).map(|j| omega[(a, j)]).collect();
        (norm_of(&row), row)
    });
    let omega_rows: Vec<Vec<f64>> = row_order
        .iter()
        .map(|&a| (0..p).map(|j| omega[(a, j)]).collect())
        .collect();
    h_cols = reorder_columns(&h_cols, &row_order);

    let omega = OmegaMatrix::from_rows(&omega_rows).map_err(|e| {
        Error::Degenerate(format!("recovered weight matrix is not admissible: {e}"))
    })?;
    Ok((omega, h_cols, f_cols))
}

fn norm_of(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Indices 0..count sorted ascending by a (norm, entries) key.
fn sorted_order<F>(count: usize, key: F) -> Vec<usize>
where
    F: Fn(usize) -> (f64, Vec<f64>),
{
    let mut order: Vec<usize> = (0..count).collect();
    order.sort_by(|&x, &y| {
        let (nx, ex) = key(x);
        let (ny, ey) = key(y);
        nx.total_cmp(&ny).then_with(|| {
            for (a, b) in ex.iter().zip(ey.iter()) {
                let c = a.total_cmp(b);
                if c != std::cmp::Ordering::Equal {
                    return c;
                }
            }
            std::cmp::Ordering::Equal
        })
    });
    order
}

fn reorder_columns(m: &DMatrix<f64>, order: &[usize]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(m.nrows(), order.len());
    for (dst, &src) in order.iter().enumerate() {
        out.set_column(dst, &m.column(src));
    }
    out
}

/// One family of non-abelian cyclic metric Lie algebras in a fixed
/// dimension: an abelian factor padding a single non-abelian block (a
/// solvable model or the simple 3-dimensional group), with a textual
/// constraint on the free parameters.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CatalogEntry {
    pub dim: usize,
    pub r: usize,
    pub q: usize,
    pub p: usize,
    pub sl2_count: usize,
    pub label: String,
    pub constraints: String,
}

impl CatalogEntry {
    fn new(dim: usize, r: usize, q: usize, p: usize, sl2_count: usize) -> Self {
        let mut parts = Vec::new();
        if r > 0 {
            parts.push(if r == 1 {
                "R".to_string()
            } else {
                format!("R^{r}")
            });
        }
        if p > 0 {
            parts.push(format!("G({q},{p})"));
        }
        if sl2_count > 0 {
            parts.push("SL2~".to_string());
        }
        let label = parts.join(" x ");
        let constraints = if sl2_count > 0 {
            "mu > nu > 0".to_string()
        } else {
            match (q, p) {
                (1, 1) => "lambda != 0".to_string(),
                (1, p) => format!("(lambda_1, ..., lambda_{p}) != 0"),
                (2, 2) => "det(Omega) != 0".to_string(),
                _ => format!("Omega ({q}x{p}) has linearly independent rows"),
            }
        };
        CatalogEntry {
            dim,
            r,
            q,
            p,
            sl2_count,
            label,
            constraints,
        }
    }

    /// Number of continuous parameters of this family (before isometry
    /// reductions): the weight-matrix entries plus one (μ, ν) pair per
    /// simple factor.
    pub fn parameter_count(&self) -> usize {
        self.q * self.p + 2 * self.sl2_count
    }

    /// Draw one member of the family at random.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> ProductSpec {
        let omega = if self.p > 0 {
            Some(testing::random_omega(rng, self.q, self.p))
        } else {
            None
        };
        ProductSpec {
            r: self.r,
            omega,
            sl2_factors: (0..self.sl2_count)
                .map(|_| testing::random_sl2_metric(rng))
                .collect(),
        }
    }
}

/// Enumerate the non-abelian cyclic families of dimension 2 through 5:
/// one solvable model G(q, p, Ω) with `1 ≤ q ≤ p` padded by an abelian
/// factor, or the simple group padded by an abelian factor. The published
/// low-dimensional list is exactly this shape, so products combining a
/// solvable model with a simple factor are not enumerated here (the first
/// such product appears in dimension 5).
pub fn catalog(dim: usize) -> Result<Vec<CatalogEntry>> {
    if !(2..=5).contains(&dim) {
        return Err(Error::InvalidParameter(format!(
            "catalog covers dimensions 2 through 5, got {dim}"
        )));
    }
    let mut entries = Vec::new();
    for q in 1..=dim / 2 {
        for p in q..=(dim - q) {
            entries.push(CatalogEntry::new(dim, dim - q - p, q, p, 0));
        }
    }
    if dim >= 3 {
        entries.push(CatalogEntry::new(dim, dim - 3, 0, 0, 1));
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gqp::{self, OmegaMatrix};

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn spec_close(a: &ProductSpec, b: &ProductSpec) -> bool {
        if a.r != b.r || a.sl2_factors.len() != b.sl2_factors.len() {
            return false;
        }
        for (x, y) in a.sl2_factors.iter().zip(b.sl2_factors.iter()) {
            if (x.mu() - y.mu()).abs() > 1e-8 || (x.nu() - y.nu()).abs() > 1e-8 {
                return false;
            }
        }
        match (&a.omega, &b.omega) {
            (None, None) => true,
            (Some(x), Some(y)) => {
                x.q() == y.q()
                    && x.p() == y.p()
                    && gqp::isometric(x, y, &tol()).unwrap_or(None).is_some()
            }
            _ => false,
        }
    }

    #[test]
    fn decompose_abelian() {
        let m = MetricLieAlgebra::with_identity_gram(LieAlgebra::abelian(4));
        let d = decompose(&m, &tol(), 0).unwrap();
        assert_eq!(d.spec.r, 4);
        assert!(d.spec.omega.is_none());
        assert!(d.spec.sl2_factors.is_empty());
        assert!(d.residual < 1e-12);
    }

    #[test]
    fn decompose_pure_model() {
        let omega = OmegaMatrix::from_rows(&[vec![1.0, 2.0], vec![0.5, -1.0]]).unwrap();
        let m = gqp::build(&omega);
        let d = decompose(&m, &tol(), 0).unwrap();
        assert_eq!(d.spec.r, 0);
        assert!(d.spec.sl2_factors.is_empty());
        let got = d.spec.omega.as_ref().unwrap();
        assert_eq!((got.q(), got.p()), (2, 2));
        assert!(gqp::isometric(got, &omega, &tol()).unwrap().is_some());
    }

    #[test]
    fn decompose_pure_sl2() {
        let metric = Sl2CyclicMetric::new(2.5, 1.0).unwrap();
        let m = sl2::build_sl2(&metric);
        let d = decompose(&m, &tol(), 0).unwrap();
        assert_eq!(d.spec.r, 0);
        assert!(d.spec.omega.is_none());
        assert_eq!(d.spec.sl2_factors.len(), 1);
        assert!((d.spec.sl2_factors[0].mu() - 2.5).abs() < 1e-10);
        assert!((d.spec.sl2_factors[0].nu() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn decompose_full_product_in_scrambled_basis() {
        let mut rng = testing::rng(42);
        let spec = ProductSpec {
            r: 1,
            omega: Some(OmegaMatrix::from_rows(&[vec![1.0, -0.5, 2.0]]).unwrap()),
            sl2_factors: vec![
                Sl2CyclicMetric::new(2.0, 1.0).unwrap(),
                Sl2CyclicMetric::new(3.5, 0.5).unwrap(),
            ],
        };
        let m = sl2::build_product(&spec).unwrap();
        for trial in 0..5 {
            let scrambled = testing::scramble_basis(&m, &mut rng);
            let d = decompose(&scrambled, &tol(), trial).unwrap();
            assert!(spec_close(&d.spec, &spec), "trial {trial}: {:?}", d.spec);
            assert!(d.residual < 1e-7);
            // The change of basis transports the scrambled input onto the
            // canonical product exactly.
            let rebuilt = sl2::build_product(&d.spec).unwrap();
            let moved = scrambled.change_basis(&d.change_of_basis).unwrap();
            assert!((moved.gram() - rebuilt.gram()).amax() < 1e-7);
        }
    }

    #[test]
    fn decompose_separates_two_equal_sl2_factors() {
        let mut rng = testing::rng(9);
        let spec = ProductSpec {
            r: 0,
            omega: None,
            sl2_factors: vec![
                Sl2CyclicMetric::new(2.0, 1.0).unwrap(),
                Sl2CyclicMetric::new(2.0, 1.0).unwrap(),
            ],
        };
        let m = sl2::build_product(&spec).unwrap();
        let scrambled = testing::scramble_basis(&m, &mut rng);
        let d = decompose(&scrambled, &tol(), 0).unwrap();
        assert_eq!(d.spec.sl2_factors.len(), 2);
        for f in &d.spec.sl2_factors {
            assert!((f.mu() - 2.0).abs() < 1e-9 && (f.nu() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn decompose_canonical_order_is_deterministic() {
        let omega = OmegaMatrix::from_rows(&[vec![2.0, 1.0], vec![-1.0, 1.0]]).unwrap();
        let m = gqp::build(&omega);
        let a = decompose(&m, &tol(), 1).unwrap();
        let b = decompose(&m, &tol(), 99).unwrap();
        let oa = a.spec.omega.unwrap();
        let ob = b.spec.omega.unwrap();
        assert!((oa.entries() - ob.entries()).amax() < 1e-9);
        // Columns sorted ascending by norm.
        let n0 = oa.entries().column(0).norm();
        let n1 = oa.entries().column(1).norm();
        assert!(n0 <= n1 + 1e-12);
    }

    #[test]
    fn decompose_rejects_non_cyclic_and_non_jacobi() {
        let su2 = MetricLieAlgebra::with_identity_gram(testing::su2_brackets());
        assert!(matches!(
            decompose(&su2, &tol(), 0),
            Err(Error::NotCyclic { .. })
        ));

        let mut ads = vec![DMatrix::zeros(3, 3); 3];
        ads[0][(2, 1)] = 1.0;
        ads[1][(2, 2)] = 1.0; // [e1, e2] = e3 while [e2, e3] = e3: Jacobi fails
        let broken = LieAlgebra::new_unchecked(ads).unwrap();
        let m = MetricLieAlgebra::with_identity_gram(broken);
        assert!(matches!(
            decompose(&m, &tol(), 0),
            Err(Error::JacobiFailure { .. })
        ));
    }

    #[test]
    fn catalog_counts_per_dimension() {
        assert_eq!(catalog(2).unwrap().len(), 1);
        assert_eq!(catalog(3).unwrap().len(), 3);
        assert_eq!(catalog(4).unwrap().len(), 5);
        assert_eq!(catalog(5).unwrap().len(), 7);
        assert!(catalog(1).is_err());
        assert!(catalog(6).is_err());
        for entry in catalog(5).unwrap() {
            assert_eq!(entry.dim, 5);
            assert_eq!(entry.r + entry.q + entry.p + 3 * entry.sl2_count, 5);
            if entry.p > 0 {
                assert!(entry.q >= 1 && entry.q <= entry.p);
                assert_eq!(entry.sl2_count, 0);
            } else {
                assert_eq!(entry.q, 0);
                assert_eq!(entry.sl2_count, 1);
            }
        }
        let labels: Vec<String> = catalog(3)
            .unwrap()
            .iter()
            .map(|e| e.label.clone())
            .collect();
        assert_eq!(labels, vec!["R x G(1,1)", "G(1,2)", "SL2~"]);
        assert_eq!(catalog(2).unwrap()[0].constraints, "lambda != 0");
        let dim5: Vec<String> = catalog(5)
            .unwrap()
            .iter()
            .map(|e| e.label.clone())
            .collect();
        assert_eq!(
            dim5,
            vec![
                "R^3 x G(1,1)",
                "R^2 x G(1,2)",
                "R x G(1,3)",
                "G(1,4)",
                "R x G(2,2)",
                "G(2,3)",
                "R^2 x SL2~"
            ]
        );
    }

    #[test]
    fn catalog_samples_build_and_decompose() {
        let mut rng = testing::rng(17);
        for dim in 2..=5 {
            for entry in catalog(dim).unwrap() {
                let spec = entry.sample(&mut rng);
                assert_eq!(spec.total_dim(), dim);
                let m = sl2::build_product(&spec).unwrap();
                assert!(m.check_cyclic(&tol()));
                let d = decompose(&m, &tol(), 3).unwrap();
                assert!(spec_close(&d.spec, &spec), "{}: {:?}", entry.label, d.spec);
            }
        }
    }
}
