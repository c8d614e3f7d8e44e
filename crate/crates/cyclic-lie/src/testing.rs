//! Deterministic random-model generators shared by unit, property, and
//! integration tests. Everything here is seeded explicitly so failures
//! reproduce exactly.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::algebra::{LieAlgebra, MetricLieAlgebra};
use crate::gqp::OmegaMatrix;
use crate::sl2::{ProductSpec, Sl2CyclicMetric};

/// Seeded generator used across the test suites.
pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Compact form with brackets `[X₁,X₂]=X₃`, `[X₂,X₃]=X₁`, `[X₃,X₁]=X₂`;
/// no left-invariant metric on it is cyclic, which makes it a convenient
/// negative fixture.
pub fn su2_brackets() -> LieAlgebra {
    let brackets = vec![
        (0usize, 1usize, DVector::from_vec(vec![0.0, 0.0, 1.0])),
        (1usize, 2usize, DVector::from_vec(vec![1.0, 0.0, 0.0])),
        (0usize, 2usize, DVector::from_vec(vec![0.0, -1.0, 0.0])),
    ];
    LieAlgebra::from_bracket_list(3, &brackets).expect("fixed constants are well-formed")
}

/// One draw from the standard normal distribution (Box–Muller).
pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random::<f64>();
        if u <= f64::MIN_POSITIVE {
            continue;
        }
        let v: f64 = rng.random::<f64>();
        return (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos();
    }
}

/// Matrix with independent standard-normal entries.
pub fn random_gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| standard_normal(rng))
}

/// Haar-ish random orthogonal matrix via QR of a Gaussian matrix.
pub fn random_orthogonal<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let a = random_gaussian_matrix(rng, n, n);
    let qr = a.qr();
    let mut q = qr.q();
    let r = qr.r();
    // Fix the sign convention so the distribution does not depend on the
    // factorization's arbitrary column signs.
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            let col = -q.column(j);
            q.set_column(j, &col);
        }
    }
    q
}

/// Random symmetric positive-definite matrix with eigenvalues in
/// `[lo, hi]` (so the condition number is at most `hi / lo`).
pub fn random_spd<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    let q = random_orthogonal(rng, n);
    let d = DVector::from_fn(n, |_, _| rng.random_range(lo..hi));
    let spd = &q * DMatrix::from_diagonal(&d) * q.transpose();
    (&spd + spd.transpose()) * 0.5
}

/// Random invertible matrix with singular values in `[0.5, 2.0]`.
pub fn random_well_conditioned<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let u = random_orthogonal(rng, n);
    let v = random_orthogonal(rng, n);
    let d = DVector::from_fn(n, |_, _| rng.random_range(0.5..2.0));
    u * DMatrix::from_diagonal(&d) * v.transpose()
}

/// Re-express a metric Lie algebra in a random well-conditioned basis.
/// The result presents the same geometry in scrambled coordinates.
pub fn scramble_basis<R: Rng>(mla: &MetricLieAlgebra, rng: &mut R) -> MetricLieAlgebra {
    let t = random_well_conditioned(rng, mla.dim());
    mla.change_basis(&t)
        .expect("well-conditioned basis change cannot fail")
}

/// Re-express a metric Lie algebra in a random basis that preserves the
/// gram matrix entry-for-entry: `T = G^{-1/2} O G^{1/2}` with `O`
/// orthogonal rotates the structure constants while `TᵗGT = G`.
pub fn conjugate_gram_orthogonal<R: Rng>(mla: &MetricLieAlgebra, rng: &mut R) -> MetricLieAlgebra {
    let o = random_orthogonal(rng, mla.dim());
    let (g_sqrt, g_inv_sqrt) = crate::linalg::spd_sqrt_inv_sqrt(mla.gram())
        .expect("gram of a valid metric algebra is positive-definite");
    let t = g_inv_sqrt * o * g_sqrt;
    mla.change_basis(&t)
        .expect("gram-orthogonal basis change cannot fail")
}

/// Random weight matrix with full row rank and no tiny columns: entries are
/// uniform in `[-2, 2]`, redrawn until the smallest singular value is at
/// least `0.1` and every column norm is at least `0.1`. Those margins keep
/// rank and clustering decisions in downstream code far from tolerance
/// boundaries.
pub fn random_omega<R: Rng>(rng: &mut R, q: usize, p: usize) -> OmegaMatrix {
    assert!(q >= 1 && p >= q, "need p >= q >= 1");
    loop {
        let rows: Vec<Vec<f64>> = (0..q)
            .map(|_| (0..p).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let m = DMatrix::from_fn(q, p, |i, j| rows[i][j]);
        let svals = crate::linalg::singular_values(&m);
        if svals[q - 1] < 0.1 {
            continue;
        }
        if (0..p).any(|j| m.column(j).norm() < 0.1) {
            continue;
        }
        return OmegaMatrix::from_rows(&rows).expect("margins guarantee validity");
    }
}

/// Random simple-factor parameters with a safe separation `μ - ν ≥ 0.15`.
pub fn random_sl2_metric<R: Rng>(rng: &mut R) -> Sl2CyclicMetric {
    let nu = rng.random_range(0.2..1.5);
    let mu = nu + rng.random_range(0.15..1.5);
    Sl2CyclicMetric::new(mu, nu).expect("construction respects mu > nu > 0")
}

/// Random non-empty product specification with small block sizes.
pub fn random_product_spec<R: Rng>(rng: &mut R) -> ProductSpec {
    loop {
        let r = rng.random_range(0..=2);
        let omega = if rng.random_range(0..=1) == 1 {
            let q = rng.random_range(1..=2);
            let p = rng.random_range(q..=q + 2);
            Some(random_omega(rng, q, p))
        } else {
            None
        };
        let n_sl2 = rng.random_range(0..=2);
        let sl2_factors = (0..n_sl2).map(|_| random_sl2_metric(rng)).collect();
        let spec = ProductSpec {
            r,
            omega,
            sl2_factors,
        };
        if spec.validate().is_ok() {
            return spec;
        }
    }
}
