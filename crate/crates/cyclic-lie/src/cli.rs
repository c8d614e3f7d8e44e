//! Command implementations behind the binary: load JSON inputs, run the
//! library pipelines, and emit reports as JSON (the stable machine
//! interface) or human-readable text. Text and JSON carry identical
//! numeric values: every float is rendered with 17 significant digits.

use std::path::Path;

use serde::Serialize;

use crate::algebra::StructuralFlags;
use crate::connection::{self, CurvatureReport, ReportResiduals};
use crate::decompose;
use crate::error::{Error, Result};
use crate::gqp::{self, ClassificationFlags};
use crate::io::{self, AlgebraFile, DecompositionFile, OmegaFile};
use crate::linalg;
use crate::sl2::{self, Sl2CyclicMetric};
use crate::tolerance::ToleranceConfig;

/// Options shared by every subcommand.
#[derive(Debug, Clone, Copy, Default)]
pub struct CliOptions {
    pub tol: ToleranceConfig,
    pub seed: u64,
    pub json: bool,
}

/// Reports know how to render themselves for terminal consumption; JSON
/// comes from `Serialize`.
pub trait TextRender {
    fn render_text(&self) -> String;
}

/// Render a report in the format selected by the options.
pub fn render<T: Serialize + TextRender>(report: &T, opts: &CliOptions) -> Result<String> {
    if opts.json {
        io::to_json_string(report)
    } else {
        Ok(report.render_text())
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_row(row: &[f64]) -> String {
    let cells: Vec<String> = row.iter().map(|v| fmt(*v)).collect();
    format!("[{}]", cells.join(", "))
}

fn push_matrix(out: &mut String, indent: &str, rows: &[Vec<f64>]) {
    for row in rows {
        out.push_str(indent);
        out.push_str(&fmt_row(row));
        out.push('\n');
    }
}

fn fmt_opt(v: &Option<f64>) -> String {
    match v {
        Some(x) => fmt(*x),
        None => "none".to_string(),
    }
}

/// Residual magnitudes of the internal consistency checks.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResidualSummary {
    pub torsion: f64,
    pub metric_skew: f64,
    pub last_pair_skew: f64,
    pub bianchi: f64,
    pub ricci_asymmetry: f64,
}

impl From<ReportResiduals> for ResidualSummary {
    fn from(r: ReportResiduals) -> Self {
        ResidualSummary {
            torsion: r.torsion,
            metric_skew: r.metric_skew,
            last_pair_skew: r.last_pair_skew,
            bianchi: r.bianchi,
            ricci_asymmetry: r.ricci_asymmetry,
        }
    }
}

/// Curvature data shared by several reports: the Ricci matrix, scalar
/// curvature, covariant-derivative magnitudes, and check residuals.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureSummary {
    pub ricci: Vec<Vec<f64>>,
    pub ricci_eigenvalues: Vec<f64>,
    pub scalar: f64,
    pub nabla_ricci_max: f64,
    pub nabla_curvature_max: f64,
    pub residuals: ResidualSummary,
}

impl CurvatureSummary {
    fn new(mla: &crate::algebra::MetricLieAlgebra, report: &CurvatureReport) -> Result<Self> {
        let (_, g_inv_sqrt) = linalg::spd_sqrt_inv_sqrt(mla.gram())?;
        let weighted = &g_inv_sqrt * &report.ricci * &g_inv_sqrt;
        let weighted = (&weighted + weighted.transpose()) * 0.5;
        let (vals, _) = linalg::sym_eigen_sorted(&weighted);
        Ok(CurvatureSummary {
            ricci: io::matrix_to_rows(&report.ricci),
            ricci_eigenvalues: vals.iter().copied().collect(),
            scalar: report.scalar,
            nabla_ricci_max: report.nabla_ricci.max_abs(),
            nabla_curvature_max: report.nabla_curvature.max_abs(),
            residuals: ResidualSummary::from(report.residuals),
        })
    }

    fn render_into(&self, out: &mut String) {
        out.push_str(&format!("scalar curvature: {}\n", fmt(self.scalar)));
        out.push_str("ricci form:\n");
        push_matrix(out, "  ", &self.ricci);
        let eig: Vec<String> = self.ricci_eigenvalues.iter().map(|v| fmt(*v)).collect();
        out.push_str(&format!("ricci eigenvalues: [{}]\n", eig.join(", ")));
        out.push_str(&format!(
            "covariant derivatives: |nabla ric| = {}, |nabla K| = {}\n",
            fmt(self.nabla_ricci_max),
            fmt(self.nabla_curvature_max)
        ));
        out.push_str(&format!(
            "check residuals: torsion = {}, metric skew = {}, pair skew = {}, bianchi = {}, ricci asymmetry = {}\n",
            fmt(self.residuals.torsion),
            fmt(self.residuals.metric_skew),
            fmt(self.residuals.last_pair_skew),
            fmt(self.residuals.bianchi),
            fmt(self.residuals.ricci_asymmetry)
        ));
    }
}

/// Which computation paths produced the values in a report, and the largest
/// deviation observed between them when more than one ran.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub paths: Vec<String>,
    pub max_discrepancy: Option<f64>,
}

impl Provenance {
    fn render_into(&self, out: &mut String) {
        out.push_str(&format!("computation paths: {}", self.paths.join(" + ")));
        if let Some(d) = self.max_discrepancy {
            out.push_str(&format!(" (max discrepancy {})", fmt(d)));
        }
        out.push('\n');
    }
}

/// Geometry verdicts computed from the generic pipeline for an arbitrary
/// metric Lie algebra.
#[derive(Debug, Clone, Serialize)]
pub struct GeometryVerdicts {
    pub constant_curvature: Option<f64>,
    pub vectorial: Option<Vec<f64>>,
    pub einstein: Option<f64>,
    pub ricci_parallel: bool,
    pub locally_symmetric: bool,
}

impl GeometryVerdicts {
    fn render_into(&self, out: &mut String) {
        out.push_str(&format!(
            "constant curvature: {}\n",
            fmt_opt(&self.constant_curvature)
        ));
        match &self.vectorial {
            Some(h) => out.push_str(&format!("vectorial bracket: h = {}\n", fmt_row(h))),
            None => out.push_str("vectorial bracket: none\n"),
        }
        out.push_str(&format!("einstein: {}\n", fmt_opt(&self.einstein)));
        out.push_str(&format!("ricci parallel: {}\n", self.ricci_parallel));
        out.push_str(&format!("locally symmetric: {}\n", self.locally_symmetric));
    }
}

/// Output of `analyze`: validation verdicts plus the full curvature summary
/// of one metric Lie algebra given by structure constants.
#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeReport {
    pub input: String,
    pub status: String,
    pub dim: usize,
    pub cyclic: bool,
    pub cyclic_residual: f64,
    pub structural: StructuralFlags,
    pub curvature: CurvatureSummary,
    pub verdicts: GeometryVerdicts,
    pub provenance: Provenance,
}

impl TextRender for AnalyzeReport {
    fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("analyze: {}\n", self.input));
        out.push_str(&format!("status: {}\n", self.status));
        out.push_str(&format!("dim: {}\n", self.dim));
        out.push_str(&format!(
            "cyclic: {} (residual {})\n",
            self.cyclic,
            fmt(self.cyclic_residual)
        ));
        out.push_str(&format!(
            "structure: abelian = {}, nilpotent = {}, solvable = {}, 2-step solvable = {}\n",
            self.structural.abelian,
            self.structural.nilpotent,
            self.structural.solvable,
            self.structural.two_solvable
        ));
        self.curvature.render_into(&mut out);
        self.verdicts.render_into(&mut out);
        self.provenance.render_into(&mut out);
        out
    }
}

fn geometry_verdicts(
    mla: &crate::algebra::MetricLieAlgebra,
    report: &CurvatureReport,
    tol: &ToleranceConfig,
) -> GeometryVerdicts {
    let scale = mla.scale();
    let eps2 = tol.eps_eq * scale * scale;
    let eps3 = eps2 * scale;
    let n = mla.dim() as f64;
    let lambda = report.scalar / n;
    let einstein_defect = (&report.ricci - mla.gram() * lambda).amax();
    GeometryVerdicts {
        constant_curvature: connection::check_constant_curvature(mla, &report.curvature, tol),
        vectorial: connection::check_vectorial(mla, tol).map(|h| h.iter().copied().collect()),
        einstein: (einstein_defect <= eps2).then_some(lambda),
        ricci_parallel: report.nabla_ricci.max_abs() <= eps3,
        locally_symmetric: report.nabla_curvature.max_abs() <= eps3,
    }
}

/// `analyze` subcommand: validate an algebra file, run the curvature
/// pipeline, cross-check against the cyclic trace formula when applicable.
pub fn cmd_analyze(path: &Path, opts: &CliOptions) -> Result<AnalyzeReport> {
    let file: AlgebraFile = io::load_json(path)?;
    let mla = file.to_metric_algebra()?;
    let tol = &opts.tol;
    let scale = mla.scale();
    let jac = mla.algebra().jacobi_residual();
    if jac > tol.eps_eq * scale * scale {
        return Err(Error::JacobiFailure { residual: jac });
    }
    let report = CurvatureReport::compute(&mla, tol)?;
    let cyclic_residual = mla.cyclic_residual();
    let cyclic = cyclic_residual <= tol.eps_eq * scale * scale;

    let provenance = if cyclic {
        let formula = connection::ricci_cyclic_formula(&mla, tol)?;
        let d = (&report.ricci - formula).amax();
        let bound = 1e-9 * scale;
        if d > bound {
            return Err(Error::InvariantViolation(format!(
                "Ricci trace pipeline and cyclic formula disagree by {d:.3e} (bound {bound:.3e})"
            )));
        }
        Provenance {
            paths: vec!["koszul-pipeline".into(), "cyclic-trace-formula".into()],
            max_discrepancy: Some(d),
        }
    } else {
        Provenance {
            paths: vec!["koszul-pipeline".into()],
            max_discrepancy: None,
        }
    };

    Ok(AnalyzeReport {
        input: path.display().to_string(),
        status: "ok".into(),
        dim: mla.dim(),
        cyclic,
        cyclic_residual,
        structural: mla.structural_flags(tol),
        curvature: CurvatureSummary::new(&mla, &report)?,
        verdicts: geometry_verdicts(&mla, &report, tol),
        provenance,
    })
}

/// Output of `gqp`: closed-form quantities and classification flags of one
/// model group, cross-checked against the generic pipeline.
#[derive(Debug, Clone, Serialize)]
pub struct GqpReport {
    pub input: String,
    pub status: String,
    pub q: usize,
    pub p: usize,
    pub omega: Vec<Vec<f64>>,
    pub flags: ClassificationFlags,
    pub curvature: CurvatureSummary,
    pub closed_ricci: Vec<Vec<f64>>,
    pub closed_scalar: f64,
    pub discrepancy_rel_nonzero: f64,
    pub discrepancy_abs_zero: f64,
    pub provenance: Provenance,
}

impl TextRender for GqpReport {
    fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("gqp: {}\n", self.input));
        out.push_str(&format!("status: {}\n", self.status));
        out.push_str(&format!("model: G({}, {})\n", self.q, self.p));
        out.push_str("weights:\n");
        push_matrix(&mut out, "  ", &self.omega);
        out.push_str(&format!(
            "flags: negative sectional = {}, negative ricci = {}, ricci parallel = {}, locally symmetric = {}\n",
            self.flags.negative_sectional,
            self.flags.negative_ricci,
            self.flags.ricci_parallel,
            self.flags.locally_symmetric
        ));
        out.push_str(&format!(
            "constant curvature: {}\n",
            fmt_opt(&self.flags.constant_curvature)
        ));
        out.push_str(&format!("einstein: {}\n", fmt_opt(&self.flags.einstein)));
        match &self.flags.vectorial {
            Some(h) => out.push_str(&format!("vectorial bracket: h = {}\n", fmt_row(h))),
            None => out.push_str("vectorial bracket: none\n"),
        }
        self.curvature.render_into(&mut out);
        out.push_str(&format!(
            "closed-form scalar: {}\n",
            fmt(self.closed_scalar)
        ));
        out.push_str("closed-form ricci:\n");
        push_matrix(&mut out, "  ", &self.closed_ricci);
        out.push_str(&format!(
            "closed vs generic: relative (nonzero parts) = {}, absolute (declared-zero parts) = {}\n",
            fmt(self.discrepancy_rel_nonzero),
            fmt(self.discrepancy_abs_zero)
        ));
        self.provenance.render_into(&mut out);
        out
    }
}

/// Declared cross-check tolerances for the closed-form/generic comparison.
const GQP_REL_TOLERANCE: f64 = 1e-8;
const GQP_ABS_TOLERANCE: f64 = 1e-10;

/// `gqp` subcommand: build the model for a weight matrix and compare the
/// closed-form curvature suite against the generic pipeline.
pub fn cmd_gqp(path: &Path, opts: &CliOptions) -> Result<GqpReport> {
    let file: OmegaFile = io::load_json(path)?;
    let omega = file.to_omega()?;
    let mla = gqp::build(&omega);
    let report = CurvatureReport::compute(&mla, &opts.tol)?;
    let closed = gqp::closed_forms(&omega);
    let disc = closed.discrepancy(&report);
    if disc.rel_nonzero > GQP_REL_TOLERANCE || disc.abs_zero > GQP_ABS_TOLERANCE {
        return Err(Error::InvariantViolation(format!(
            "closed forms and generic pipeline disagree: relative {:.3e} (bound {GQP_REL_TOLERANCE:.0e}), absolute {:.3e} (bound {GQP_ABS_TOLERANCE:.0e})",
            disc.rel_nonzero, disc.abs_zero
        )));
    }
    Ok(GqpReport {
        input: path.display().to_string(),
        status: "ok".into(),
        q: omega.q(),
        p: omega.p(),
        omega: omega.rows(),
        flags: gqp::classify(&omega, &opts.tol),
        curvature: CurvatureSummary::new(&mla, &report)?,
        closed_ricci: io::matrix_to_rows(&closed.ricci),
        closed_scalar: closed.scalar,
        discrepancy_rel_nonzero: disc.rel_nonzero,
        discrepancy_abs_zero: disc.abs_zero,
        provenance: Provenance {
            paths: vec!["closed-form".into(), "koszul-pipeline".into()],
            max_discrepancy: Some(disc.rel_nonzero.max(disc.abs_zero)),
        },
    })
}

/// Output of `isometry`: whether two weight matrices generate isometric
/// model groups, with the witness when they do.
#[derive(Debug, Clone, Serialize)]
pub struct IsometryReport {
    pub input_a: String,
    pub input_b: String,
    pub status: String,
    pub isometric: bool,
    pub permutation: Option<Vec<usize>>,
    pub q_matrix: Option<Vec<Vec<f64>>>,
    pub residual: Option<f64>,
}

impl TextRender for IsometryReport {
    fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("isometry: {} vs {}\n", self.input_a, self.input_b));
        out.push_str(&format!("status: {}\n", self.status));
        out.push_str(&format!("isometric: {}\n", self.isometric));
        if let Some(p) = &self.permutation {
            let cells: Vec<String> = p.iter().map(|v| v.to_string()).collect();
            out.push_str(&format!("column permutation: [{}]\n", cells.join(", ")));
        }
        if let Some(q) = &self.q_matrix {
            out.push_str("orthogonal factor:\n");
            push_matrix(&mut out, "  ", q);
        }
        if let Some(r) = &self.residual {
            out.push_str(&format!("witness residual: {}\n", fmt(*r)));
        }
        out
    }
}

/// `isometry` subcommand: decide (Q, P)-equivalence of two weight matrices.
pub fn cmd_isometry(path_a: &Path, path_b: &Path, opts: &CliOptions) -> Result<IsometryReport> {
    let a = io::load_json::<OmegaFile>(path_a)?.to_omega()?;
    let b = io::load_json::<OmegaFile>(path_b)?.to_omega()?;
    let witness = gqp::isometric(&a, &b, &opts.tol)?;
    let (isometric, permutation, q_matrix, residual) = match witness {
        Some(w) => {
            let r = w.residual(&a, &b);
            (
                true,
                Some(w.permutation.clone()),
                Some(io::matrix_to_rows(&w.q_matrix)),
                Some(r),
            )
        }
        None => (false, None, None, None),
    };
    Ok(IsometryReport {
        input_a: path_a.display().to_string(),
        input_b: path_b.display().to_string(),
        status: "ok".into(),
        isometric,
        permutation,
        q_matrix,
        residual,
    })
}

/// Output of `sl2`: closed-form and pipeline curvature of one simple cyclic
/// factor, plus the canonical-parameter round-trip.
#[derive(Debug, Clone, Serialize)]
pub struct Sl2Report {
    pub mu: f64,
    pub nu: f64,
    pub status: String,
    pub gram: Vec<Vec<f64>>,
    pub closed_ricci: Vec<Vec<f64>>,
    pub closed_scalar: f64,
    pub curvature: CurvatureSummary,
    pub recovered_mu: f64,
    pub recovered_nu: f64,
    pub provenance: Provenance,
}

impl TextRender for Sl2Report {
    fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "sl2: mu = {}, nu = {}\n",
            fmt(self.mu),
            fmt(self.nu)
        ));
        out.push_str(&format!("status: {}\n", self.status));
        out.push_str("gram:\n");
        push_matrix(&mut out, "  ", &self.gram);
        out.push_str("closed-form ricci:\n");
        push_matrix(&mut out, "  ", &self.closed_ricci);
        out.push_str(&format!(
            "closed-form scalar: {}\n",
            fmt(self.closed_scalar)
        ));
        self.curvature.render_into(&mut out);
        out.push_str(&format!(
            "recovered parameters: mu = {}, nu = {}\n",
            fmt(self.recovered_mu),
            fmt(self.recovered_nu)
        ));
        self.provenance.render_into(&mut out);
        out
    }
}

/// Declared tolerance for the sl2 closed-form/pipeline comparison.
const SL2_TOLERANCE: f64 = 1e-9;

/// `sl2` subcommand: build the simple factor for (μ, ν) and cross-check the
/// closed Ricci data against the pipeline and the parameter recovery.
pub fn cmd_sl2(mu: f64, nu: f64, opts: &CliOptions) -> Result<Sl2Report> {
    let metric = Sl2CyclicMetric::new(mu, nu)?;
    let mla = sl2::build_sl2(&metric);
    let report = CurvatureReport::compute(&mla, &opts.tol)?;
    let (closed_ricci, closed_scalar) = sl2::sl2_closed_ricci(&metric);
    let ric_diff = (&report.ricci - &closed_ricci).amax();
    let scalar_diff = (report.scalar - closed_scalar).abs() / closed_scalar.abs().max(1.0);
    let discrepancy = ric_diff.max(scalar_diff);
    if discrepancy > SL2_TOLERANCE {
        return Err(Error::InvariantViolation(format!(
            "closed Ricci data and pipeline disagree by {discrepancy:.3e} (bound {SL2_TOLERANCE:.0e})"
        )));
    }
    let (recovered_mu, recovered_nu) =
        sl2::sl2_canonical_parameters(&mla, &opts.tol)?.ok_or_else(|| {
            Error::InvariantViolation(
                "canonical-parameter recovery failed on a freshly built factor".into(),
            )
        })?;
    Ok(Sl2Report {
        mu,
        nu,
        status: "ok".into(),
        gram: io::matrix_to_rows(mla.gram()),
        closed_ricci: io::matrix_to_rows(&closed_ricci),
        closed_scalar,
        curvature: CurvatureSummary::new(&mla, &report)?,
        recovered_mu,
        recovered_nu,
        provenance: Provenance {
            paths: vec!["closed-form".into(), "koszul-pipeline".into()],
            max_discrepancy: Some(discrepancy),
        },
    })
}

impl TextRender for DecompositionFile {
    fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str("decomposition:\n");
        out.push_str(&format!("abelian rank: {}\n", self.r));
        match &self.omega {
            Some(o) => {
                out.push_str(&format!(
                    "solvable model: G({}, {}) with weights:\n",
                    o.q, o.p
                ));
                push_matrix(&mut out, "  ", &o.rows);
            }
            None => out.push_str("solvable model: none\n"),
        }
        if self.sl2.is_empty() {
            out.push_str("simple factors: none\n");
        } else {
            out.push_str("simple factors:\n");
            for e in &self.sl2 {
                out.push_str(&format!("  mu = {}, nu = {}\n", fmt(e.mu), fmt(e.nu)));
            }
        }
        out.push_str("adapted basis (columns in input coordinates, row-major):\n");
        push_matrix(&mut out, "  ", &self.basis);
        out.push_str(&format!("verification residual: {}\n", fmt(self.residual)));
        out
    }
}

/// `decompose` subcommand: split an algebra file into canonical blocks.
pub fn cmd_decompose(path: &Path, opts: &CliOptions) -> Result<DecompositionFile> {
    let file: AlgebraFile = io::load_json(path)?;
    let mla = file.to_metric_algebra()?;
    let d = decompose::decompose(&mla, &opts.tol, opts.seed)?;
    Ok(DecompositionFile::from_decomposition(&d))
}

/// Output of `catalog`: the families of one dimension.
#[derive(Debug, Clone, Serialize)]
pub struct CatalogReport {
    pub dim: usize,
    pub count: usize,
    pub families: Vec<decompose::CatalogEntry>,
}

impl TextRender for CatalogReport {
    fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "catalog: dimension {} ({} families)\n",
            self.dim, self.count
        ));
        for f in &self.families {
            out.push_str(&format!("  {}  [{}]\n", f.label, f.constraints));
        }
        out
    }
}

/// `catalog` subcommand: list the non-abelian cyclic families of one
/// dimension (2 through 5).
pub fn cmd_catalog(dim: usize) -> Result<CatalogReport> {
    let families = decompose::catalog(dim)?;
    Ok(CatalogReport {
        dim,
        count: families.len(),
        families,
    })
}
