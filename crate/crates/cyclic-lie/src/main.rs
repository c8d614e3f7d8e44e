//! Command-line interface: analyze metric Lie algebras, work with the
//! solvable model groups and the simple cyclic factor, decompose cyclic
//! metrics into canonical blocks, and list the low-dimensional families.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use cyclic_lie::cli::{self, CliOptions};
use cyclic_lie::error::Result;
use cyclic_lie::tolerance::ToleranceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(
    name = "cyclic-lie",
    about = "Curvature and classification of cyclic left-invariant metrics on Lie groups",
    version
)]
struct Cli {
    /// Override the equality tolerance used by verdicts and residual checks.
    #[arg(long, global = true, value_name = "REAL")]
    tol: Option<f64>,

    /// Seed for the randomized steps (ideal splitting, weight recovery).
    #[arg(long, global = true, default_value_t = 0, value_name = "U64")]
    seed: u64,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    output: OutputFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate an algebra file and report its curvature and verdicts.
    Analyze {
        /// Algebra JSON file (dim, brackets, optional gram).
        input: PathBuf,
    },
    /// Build the solvable model for a weight matrix and cross-check the
    /// closed-form curvature suite against the generic pipeline.
    Gqp {
        /// Weight-matrix JSON file (q, p, rows).
        input: PathBuf,
    },
    /// Decide whether two weight matrices generate isometric models.
    Isometry {
        /// First weight-matrix JSON file.
        a: PathBuf,
        /// Second weight-matrix JSON file.
        b: PathBuf,
    },
    /// Build the simple cyclic factor for (mu, nu) and cross-check it.
    Sl2 {
        /// First metric parameter; requires mu > nu.
        #[arg(long)]
        mu: f64,
        /// Second metric parameter; requires nu > 0.
        #[arg(long)]
        nu: f64,
    },
    /// Split a cyclic metric Lie algebra into canonical blocks.
    Decompose {
        /// Algebra JSON file (dim, brackets, optional gram).
        input: PathBuf,
    },
    /// List the families of cyclic Riemannian Lie groups of one dimension.
    Catalog {
        /// Dimension, between 2 and 5.
        #[arg(long)]
        dim: usize,
    },
}

fn build_options(cli: &Cli) -> Result<CliOptions> {
    let tol = match cli.tol {
        Some(eps) => ToleranceConfig::with_eps_eq(eps),
        None => ToleranceConfig::default(),
    };
    tol.validate()?;
    Ok(CliOptions {
        tol,
        seed: cli.seed,
        json: cli.output == OutputFormat::Json,
    })
}

fn run(cli: &Cli) -> Result<String> {
    let opts = build_options(cli)?;
    match &cli.command {
        Command::Analyze { input } => cli::render(&cli::cmd_analyze(input, &opts)?, &opts),
        Command::Gqp { input } => cli::render(&cli::cmd_gqp(input, &opts)?, &opts),
        Command::Isometry { a, b } => cli::render(&cli::cmd_isometry(a, b, &opts)?, &opts),
        Command::Sl2 { mu, nu } => cli::render(&cli::cmd_sl2(*mu, *nu, &opts)?, &opts),
        Command::Decompose { input } => cli::render(&cli::cmd_decompose(input, &opts)?, &opts),
        Command::Catalog { dim } => cli::render(&cli::cmd_catalog(*dim)?, &opts),
    }
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            // A closed pipe (e.g. `| head`) is not an error for a reporting tool.
            if let Err(e) = writeln!(stdout, "{report}") {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    eprintln!("error: {e}");
                    std::process::exit(3);
                }
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(err.exit_code());
        }
    }
}
