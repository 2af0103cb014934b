//! `nodal`: nodal domain analysis of generalized graph Laplacians.

mod family;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nodal_core::oracle::{verify_instance, OracleOptions};
use nodal_core::report;
use nodal_core::{classical_laplacian, Error, GeneralizedLaplacian, Graph, SymMatrix};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "nodal", version, about = "Nodal domains and Urschel numbers of generalized graph Laplacians")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a graph with a given or classical Laplacian.
    Analyze(AnalyzeArgs),
    /// Build a named example family, write its files and analyze it.
    Family(family::FamilyArgs),
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("operator").required(true).args(["matrix", "classical"]))]
struct AnalyzeArgs {
    /// Graph file: first line `n`, then one `u v` edge per line.
    #[arg(long)]
    graph: PathBuf,
    /// Matrix file: `n` rows of `n` reals.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Use the classical Laplacian `D - A` of the graph.
    #[arg(long)]
    classical: bool,
    /// Restrict per-eigenvector work to this 1-based index.
    #[arg(long)]
    k: Option<usize>,
    #[command(flatten)]
    analysis: AnalysisArgs,
    /// Recorded in the report; the analysis itself is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
pub(crate) struct AnalysisArgs {
    /// Eigenvalue grouping tolerance (default 1e-9 (1 + spectral radius)).
    #[arg(long)]
    tol: Option<f64>,
    /// Largest zero count for exhaustive signing enumeration.
    #[arg(long, default_value_t = 22)]
    max_enum: usize,
    /// Build perturbation certificates: signing chains at simple eigenvalues
    /// with zeros, and split bases at multiple eigenvalues.
    #[arg(long)]
    certify: bool,
    /// Certify every sign pattern on the free set, not only the two constant ones.
    #[arg(long, requires = "certify")]
    all_patterns: bool,
    /// Split multiple eigenvalues with a diagonal perturbation.
    #[arg(long)]
    split_multi: bool,
}

impl AnalysisArgs {
    fn options(&self, k: Option<usize>) -> OracleOptions {
        OracleOptions {
            group_tol: self.tol,
            max_zeros: self.max_enum,
            k,
            certify: self.certify,
            certify_all_patterns: self.all_patterns,
            split_multi: self.split_multi || self.certify,
            ..Default::default()
        }
    }

    pub(crate) fn describe(&self, k: Option<usize>) -> Value {
        json!({
            "k": k,
            "tol": self.tol,
            "max_enum": self.max_enum,
            "certify": self.certify,
            "all_patterns": self.all_patterns,
            "split_multi": self.split_multi || self.certify,
        })
    }
}

/// Failure with its exit code: 1 malformed input, 2 validation failure,
/// 3 numeric failure.
#[derive(Debug)]
pub(crate) struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub(crate) fn input(message: impl Into<String>) -> Failure {
        Failure { code: 1, message: message.into() }
    }

    pub(crate) fn numeric(message: impl Into<String>) -> Failure {
        Failure { code: 3, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match e {
            Error::VertexOutOfRange { .. }
            | Error::SelfLoop(_)
            | Error::DuplicateEdge(..)
            | Error::Parse { .. }
            | Error::Dimension { .. }
            | Error::IndexOutOfRange { .. }
            | Error::InvalidFamily(_) => 1,
            Error::NotSymmetric { .. } | Error::NotSupported { .. } | Error::NonNegativeEdge { .. } => 2,
            _ => 3,
        };
        Failure { code, message: e.to_string() }
    }
}

type CliResult<T> = Result<T, Failure>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

pub(crate) fn write(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

pub(crate) fn emit(out: Option<&Path>, doc: &Value) -> CliResult<()> {
    let text = report::render(doc);
    match out {
        Some(p) => write(p, &text),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::input(format!("stdout: {e}"))),
    }
}

pub(crate) fn analyze_document(
    lap: &GeneralizedLaplacian,
    input: Value,
    args: &AnalysisArgs,
    k: Option<usize>,
) -> CliResult<Value> {
    let rep = verify_instance(lap, &args.options(k))?;
    Ok(report::analysis_document(input, &rep))
}

fn cmd_analyze(args: &AnalyzeArgs) -> CliResult<()> {
    let graph = Graph::parse(&read(&args.graph)?)?;
    let lap = match &args.matrix {
        Some(path) => {
            let m = SymMatrix::parse(&read(path)?)?;
            if m.n() != graph.n() {
                return Err(Error::Dimension { expected: graph.n(), found: m.n() }.into());
            }
            GeneralizedLaplacian::new(graph.clone(), m)?
        }
        None => classical_laplacian(&graph),
    };
    let input = json!({
        "command": "analyze",
        "graph_file": args.graph.display().to_string(),
        "matrix_file": args.matrix.as_ref().map(|p| p.display().to_string()),
        "classical": args.classical,
        "seed": args.seed,
        "options": args.analysis.describe(args.k),
        "n": graph.n(),
        "edges": graph.edges(),
    });
    let doc = analyze_document(&lap, input, &args.analysis, args.k)?;
    emit(args.out.as_deref(), &doc)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Family(args) => family::cmd_family(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
