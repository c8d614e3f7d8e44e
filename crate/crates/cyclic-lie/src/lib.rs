//! Curvature and classification toolkit for Lie groups carrying cyclic
//! left-invariant metrics.
//!
//! The crate builds metric Lie algebras from structure constants, computes
//! the Levi-Civita product and the full curvature hierarchy (curvature
//! operator, Ricci form, scalar curvature, first covariant derivatives),
//! and works with two structured families in closed form: the solvable
//! models `G(q, p, Ω)` attached to a weight matrix and the two-parameter
//! cyclic metrics on the simple split 3-dimensional algebra. On top of
//! those it offers classification predicates (constant curvature, Einstein,
//! parallel Ricci, ...), isometry detection between solvable models, and a
//! decomposition pass that splits a general cyclic metric Lie algebra into
//! its flat, solvable, and simple building blocks.

pub mod algebra;
pub mod cli;
pub mod connection;
pub mod decompose;
pub mod error;
pub mod gqp;
pub mod io;
pub mod linalg;
pub mod sl2;
pub mod subspace;
pub mod tensor;
pub mod testing;
pub mod tolerance;

pub use algebra::{LieAlgebra, MetricLieAlgebra, StructuralFlags};
pub use connection::{CurvatureReport, CurvatureTensor, LeviCivitaProduct};
pub use decompose::{catalog, decompose, CatalogEntry, Decomposition};
pub use error::{Error, Result};
pub use gqp::{ClassificationFlags, GqpClosedForms, IsometryWitness, OmegaMatrix};
pub use sl2::{ProductSpec, Sl2CyclicMetric};
pub use tensor::{NablaCurvature, Tensor3};
pub use tolerance::ToleranceConfig;
