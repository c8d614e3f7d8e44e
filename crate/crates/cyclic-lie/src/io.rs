//! JSON file formats for algebras, weight matrices, product specifications,
//! and decomposition results, plus a serializer that writes every float
//! with 17 significant digits so values round-trip bit-faithfully.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::algebra::{LieAlgebra, MetricLieAlgebra};
use crate::decompose::Decomposition;
use crate::error::{Error, Result};
use crate::gqp::OmegaMatrix;
use crate::sl2::{ProductSpec, Sl2CyclicMetric};

/// One bracket `[e_i, e_j] = Σ_k coeffs[k] e_k` with `i < j`; pairs not
/// listed are zero, and `[e_j, e_i]` follows by antisymmetry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketEntry {
    pub i: usize,
    pub j: usize,
    pub coeffs: Vec<f64>,
}

/// Metric Lie algebra input file: structure constants in bracket-list form
/// with 0-based indices and an optional gram matrix (default identity).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraFile {
    pub dim: usize,
    pub brackets: Vec<BracketEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<Vec<Vec<f64>>>,
}

impl AlgebraFile {
    pub fn to_metric_algebra(&self) -> Result<MetricLieAlgebra> {
        let list: Vec<(usize, usize, DVector<f64>)> = self
            .brackets
            .iter()
            .map(|b| {
                if b.coeffs.len() != self.dim {
                    return Err(Error::InvalidParameter(format!(
                        "bracket ({}, {}) has {} coefficients, expected {}",
                        b.i,
                        b.j,
                        b.coeffs.len(),
                        self.dim
                    )));
                }
                Ok((b.i, b.j, DVector::from_vec(b.coeffs.clone())))
            })
            .collect::<Result<_>>()?;
        let algebra = LieAlgebra::from_bracket_list(self.dim, &list)?;
        let gram = match &self.gram {
            None => DMatrix::identity(self.dim, self.dim),
            Some(rows) => rows_to_matrix(rows, self.dim, self.dim, "gram")?,
        };
        MetricLieAlgebra::new(algebra, gram)
    }

    /// Extract the bracket-list presentation of an existing metric algebra.
    pub fn from_metric_algebra(mla: &MetricLieAlgebra) -> Self {
        let n = mla.dim();
        let mut brackets = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let coeffs = mla.algebra().bracket_basis(i, j);
                if coeffs.amax() > 0.0 {
                    brackets.push(BracketEntry {
                        i,
                        j,
                        coeffs: coeffs.iter().copied().collect(),
                    });
                }
            }
        }
        AlgebraFile {
            dim: n,
            brackets,
            gram: Some(matrix_to_rows(mla.gram())),
        }
    }
}

/// Weight matrix input file for the solvable model groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaFile {
    pub q: usize,
    pub p: usize,
    pub rows: Vec<Vec<f64>>,
}

impl OmegaFile {
    pub fn to_omega(&self) -> Result<OmegaMatrix> {
        if self.rows.len() != self.q || self.rows.iter().any(|r| r.len() != self.p) {
            return Err(Error::InvalidParameter(format!(
                "rows field does not match declared shape {}x{}",
                self.q, self.p
            )));
        }
        OmegaMatrix::from_rows(&self.rows)
    }

    pub fn from_omega(omega: &OmegaMatrix) -> Self {
        OmegaFile {
            q: omega.q(),
            p: omega.p(),
            rows: omega.rows(),
        }
    }
}

/// Simple-factor parameters as stored in product and decomposition files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sl2Entry {
    pub mu: f64,
    pub nu: f64,
}

/// Product specification file: abelian rank, optional weight matrix,
/// simple-factor parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductSpecFile {
    pub r: usize,
    pub omega: Option<OmegaFile>,
    pub sl2: Vec<Sl2Entry>,
}

impl ProductSpecFile {
    pub fn to_product_spec(&self) -> Result<ProductSpec> {
        let omega = self.omega.as_ref().map(|o| o.to_omega()).transpose()?;
        let sl2_factors = self
            .sl2
            .iter()
            .map(|e| Sl2CyclicMetric::new(e.mu, e.nu))
            .collect::<Result<Vec<_>>>()?;
        let spec = ProductSpec {
            r: self.r,
            omega,
            sl2_factors,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_product_spec(spec: &ProductSpec) -> Self {
        ProductSpecFile {
            r: spec.r,
            omega: spec.omega.as_ref().map(OmegaFile::from_omega),
            sl2: spec
                .sl2_factors
                .iter()
                .map(|m| Sl2Entry {
                    mu: m.mu(),
                    nu: m.nu(),
                })
                .collect(),
        }
    }
}

/// Decomposition output file: recovered block data plus the adapted basis
/// (row-major) and the verification residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionFile {
    pub r: usize,
    pub omega: Option<OmegaFile>,
    pub sl2: Vec<Sl2Entry>,
    pub basis: Vec<Vec<f64>>,
    pub residual: f64,
}

impl DecompositionFile {
    pub fn from_decomposition(d: &Decomposition) -> Self {
        DecompositionFile {
            r: d.spec.r,
            omega: d.spec.omega.as_ref().map(OmegaFile::from_omega),
            sl2: d
                .spec
                .sl2_factors
                .iter()
                .map(|m| Sl2Entry {
                    mu: m.mu(),
                    nu: m.nu(),
                })
                .collect(),
            basis: matrix_to_rows(&d.change_of_basis),
            residual: d.residual,
        }
    }
}

pub fn rows_to_matrix(
    rows: &[Vec<f64>],
    nrows: usize,
    ncols: usize,
    what: &str,
) -> Result<DMatrix<f64>> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::InvalidParameter(format!(
            "{what} must be a {nrows}x{ncols} array of numbers"
        )));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Read and deserialize a JSON file; malformed content is a parse error
/// (distinct from the validation errors raised by the domain converters).
pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Serialize to a JSON string with every float written using 17 significant
/// digits, which is enough for `f64` values to round-trip exactly.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigFigFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Parse(format!("serialization failed: {e}")))?;
    String::from_utf8(out).map_err(|e| Error::Parse(format!("serialization failed: {e}")))
}

/// Write a value as JSON (17-significant-digit floats) to a file.
pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = to_json_string(value)?;
    let mut file = std::fs::File::create(path)?;
    file.write_all(text.as_bytes())?;
    file.write_all(b"\n")?;
    Ok(())
}

/// Compact JSON formatter that renders `f64` as `{:.16e}` (one digit before
/// the point, sixteen after: 17 significant digits).
struct SigFigFormatter;

impl serde_json::ser::Formatter for SigFigFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tolerance::ToleranceConfig;

    #[test]
    fn algebra_file_roundtrip() {
        let m = crate::sl2::build_sl2(&Sl2CyclicMetric::new(2.0, 1.0).unwrap());
        let file = AlgebraFile::from_metric_algebra(&m);
        assert_eq!(file.dim, 3);
        assert_eq!(file.brackets.len(), 3);
        let back = file.to_metric_algebra().unwrap();
        for i in 0..3 {
            assert!((back.algebra().ad(i) - m.algebra().ad(i)).amax() < 1e-15);
        }
        assert!((back.gram() - m.gram()).amax() < 1e-15);
    }

    #[test]
    fn algebra_file_validation() {
        // Wrong coefficient length.
        let bad = AlgebraFile {
            dim: 2,
            brackets: vec![BracketEntry {
                i: 0,
                j: 1,
                coeffs: vec![1.0],
            }],
            gram: None,
        };
        assert!(matches!(
            bad.to_metric_algebra(),
            Err(Error::InvalidParameter(_))
        ));
        // i >= j is rejected by the loader contract.
        let bad = AlgebraFile {
            dim: 2,
            brackets: vec![BracketEntry {
                i: 1,
                j: 0,
                coeffs: vec![0.0, 1.0],
            }],
            gram: None,
        };
        assert!(bad.to_metric_algebra().is_err());
        // Non-square gram.
        let bad = AlgebraFile {
            dim: 2,
            brackets: vec![],
            gram: Some(vec![vec![1.0, 0.0]]),
        };
        assert!(bad.to_metric_algebra().is_err());
        // Default gram is the identity.
        let ok = AlgebraFile {
            dim: 2,
            brackets: vec![],
            gram: None,
        };
        let m = ok.to_metric_algebra().unwrap();
        assert!((m.gram() - DMatrix::<f64>::identity(2, 2)).amax() == 0.0);
    }

    #[test]
    fn omega_file_roundtrip_and_validation() {
        let omega = OmegaMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        let file = OmegaFile::from_omega(&omega);
        let back = file.to_omega().unwrap();
        assert!((back.entries() - omega.entries()).amax() == 0.0);
        let bad = OmegaFile {
            q: 2,
            p: 2,
            rows: vec![vec![1.0, 2.0]],
        };
        assert!(bad.to_omega().is_err());
    }

    #[test]
    fn product_spec_file_roundtrip() {
        let spec = ProductSpec {
            r: 1,
            omega: Some(OmegaMatrix::from_rows(&[vec![1.5, -0.25]]).unwrap()),
            sl2_factors: vec![Sl2CyclicMetric::new(3.0, 1.0).unwrap()],
        };
        let file = ProductSpecFile::from_product_spec(&spec);
        let text = to_json_string(&file).unwrap();
        let parsed: ProductSpecFile = serde_json::from_str(&text).unwrap();
        let back = parsed.to_product_spec().unwrap();
        assert_eq!(back, spec);
        // Inadmissible sl2 parameters are rejected.
        let bad: ProductSpecFile =
            serde_json::from_str(r#"{"r":0,"omega":null,"sl2":[{"mu":1.0,"nu":2.0}]}"#).unwrap();
        assert!(bad.to_product_spec().is_err());
    }

    #[test]
    fn seventeen_digit_floats_roundtrip_exactly() {
        let values = vec![
            std::f64::consts::PI,
            -28.0 / 3.0,
            1.0e-300,
            -7.123456789012345e17,
            0.1 + 0.2,
        ];
        let text = to_json_string(&values).unwrap();
        assert!(text.contains("e0") || text.contains("e-") || text.contains("e1"));
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        for (a, b) in values.iter().zip(back.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn decomposition_file_shape() {
        let omega = OmegaMatrix::from_rows(&[vec![2.0]]).unwrap();
        let m = crate::gqp::build(&omega);
        let d = crate::decompose::decompose(&m, &ToleranceConfig::default(), 0).unwrap();
        let file = DecompositionFile::from_decomposition(&d);
        assert_eq!(file.r, 0);
        assert_eq!(file.basis.len(), 2);
        let text = to_json_string(&file).unwrap();
        let parsed: DecompositionFile = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed, file);
    }
}
