//! `qtern`: build the integrals, verify relation catalogs, fit structure
//! constants, and compute Casimirs, structure functions and the spectrum.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 usage or parse error,
//! 3 I/O error.

mod commands;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qtern_core::model::ModelParams;
use qtern_core::scalar::Rational;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult = Result<bool, CliError>;

#[derive(Parser, Debug)]
#[command(
    name = "qtern",
    version,
    about = "Exact ternary quadratic algebra of the nondegenerate Kepler-Coulomb system"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct ParamArgs {
    /// Keep ħ, μ, μ1, μ2, μ3 as symbols.
    #[arg(long, conflicts_with_all = ["hbar", "mu", "mu1", "mu2", "mu3"])]
    pub symbolic: bool,
    #[arg(long, value_parser = parse_rational)]
    pub hbar: Option<Rational>,
    #[arg(long, value_parser = parse_rational)]
    pub mu: Option<Rational>,
    #[arg(long, value_parser = parse_rational)]
    pub mu1: Option<Rational>,
    #[arg(long, value_parser = parse_rational)]
    pub mu2: Option<Rational>,
    #[arg(long, value_parser = parse_rational)]
    pub mu3: Option<Rational>,
}

impl ParamArgs {
    /// Symbolic unless every value is given.
    pub fn params(&self) -> Result<ModelParams, CliError> {
        let vals = [&self.hbar, &self.mu, &self.mu1, &self.mu2, &self.mu3];
        if self.symbolic || vals.iter().all(|v| v.is_none()) {
            return Ok(ModelParams::symbolic());
        }
        let [Some(h), Some(m), Some(m1), Some(m2), Some(m3)] = vals.map(|v| v.clone()) else {
            return Err(CliError::Usage("give all of --hbar --mu --mu1 --mu2 --mu3, or --symbolic".into()));
        };
        ModelParams::rational(h, m, m1, m2, m3).map_err(|e| CliError::Usage(e.to_string()))
    }

    /// Rational values are required.
    pub fn rational(&self) -> Result<ModelParams, CliError> {
        let p = self.params()?;
        if p.is_symbolic() {
            return Err(CliError::Usage("this command needs rational --hbar --mu --mu1 --mu2 --mu3".into()));
        }
        Ok(p)
    }
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    s.parse::<Rational>().map_err(|e| format!("{e}; use an integer or p/q"))
}

#[derive(Args, Debug, Clone)]
pub struct Output {
    /// Write the report here (atomically) instead of standard output.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Subalgebra {
    /// (A2, B2) with A1 central
    A2b2,
    /// (A1, B1) with H and A2 central
    A1b1,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build the six integrals and check the zero commutators.
    Build {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Verify a relation catalog.
    Verify {
        /// Catalog file, or builtin:zero, builtin:appendix, builtin:example.
        #[arg(long)]
        catalog: String,
        #[command(flatten)]
        params: ParamArgs,
        /// Skip refitting failing relations.
        #[arg(long)]
        no_refit: bool,
        /// Fail on any relation that does not hold as written, even when its
        /// refit closes.
        #[arg(long)]
        strict: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Fit structure constants of an expression over a basis of words.
    Fit {
        /// Left-hand side, e.g. "comm(A2, comm(A2, B2))".
        #[arg(long)]
        lhs: String,
        /// Basis word (repeat).
        #[arg(long = "basis", required = true)]
        basis: Vec<String>,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Casimir of a subalgebra from the two-generator formula.
    Casimir {
        #[arg(long, value_enum)]
        subalgebra: Subalgebra,
        /// Use the B coefficient with the printed sign.
        #[arg(long)]
        printed_formula: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Structure function of a subalgebra and its factorization.
    StructureFunction {
        #[arg(long, value_enum)]
        subalgebra: Subalgebra,
        /// Use the coefficient list printed next to the subalgebra.
        #[arg(long)]
        printed_coefficients: bool,
        /// Also solve for (p+1)-dimensional representations (needs rational
        /// parameters for the positivity check).
        #[arg(long)]
        dimension: Option<u32>,
        #[command(flatten)]
        params: ParamArgs,
        /// Sample energy for the positivity check when E stays free.
        #[arg(long, value_parser = parse_rational, allow_hyphen_values = true)]
        sample_energy: Option<Rational>,
        #[command(flatten)]
        output: Output,
    },
    /// Energy table.
    Spectrum {
        #[arg(long, default_value_t = 4)]
        max_n: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Lowest levels of the radial equation by finite differences.
    Oracle {
        /// Effective angular number J.
        #[arg(long, value_parser = parse_rational)]
        jq: Rational,
        #[arg(long, value_parser = parse_rational, default_value = "1")]
        mu: Rational,
        #[arg(long, value_parser = parse_rational, default_value = "1")]
        hbar: Rational,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        /// Fine-grid interior points.
        #[arg(long, default_value_t = qtern_core::oracle::MAX_GRID - 1)]
        grid: usize,
        #[arg(long, default_value_t = qtern_core::oracle::DEFAULT_TOLERANCE)]
        tolerance: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Compare the energy table with the radial oracle.
    Compare {
        #[arg(long, default_value_t = 2)]
        max_n: u64,
        #[arg(long, default_value_t = qtern_core::oracle::MAX_GRID - 1)]
        grid: usize,
        #[arg(long, default_value_t = qtern_core::oracle::DEFAULT_TOLERANCE)]
        tolerance: f64,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        output: Output,
    },
}

/// Writes `text` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, text: &str) -> Result<(), CliError> {
    use std::io::Write;
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    tmp.write_all(text.as_bytes())?;
    tmp.persist(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(())
}

pub fn emit(output: &Output, text: &str) -> Result<(), CliError> {
    match &output.out {
        Some(p) => write_atomic(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("QALG_THREADS") else { return Ok(()) };
    let n: usize =
        v.trim().parse().map_err(|_| CliError::Usage(format!("QALG_THREADS must be a positive integer, got `{v}`")))?;
    if n == 0 {
        return Err(CliError::Usage("QALG_THREADS must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| commands::run(cli.command));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
