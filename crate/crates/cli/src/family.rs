use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use nodal_core::families::{self, eigen_residual, FamilyInstance};
use nodal_core::{eig_sym, Error};
use serde_json::{json, Map, Value};

use crate::{analyze_document, emit, write, AnalysisArgs, CliResult, Failure};

#[derive(Clone, Copy, ValueEnum)]
pub(crate) enum FamilyName {
    Star,
    Path,
    Ladder,
    DoubleLeft,
    ShallowDeep,
    Random,
}

#[derive(Args)]
pub(crate) struct FamilyArgs {
    #[arg(value_enum)]
    name: FamilyName,
    /// Number of vertices (star, path, ladder, double-left, random).
    #[arg(long)]
    n: Option<usize>,
    /// Shallow/deep: number of attached vertices `s`.
    #[arg(long)]
    s: Option<usize>,
    /// Shallow/deep: length of the two copies of the path.
    #[arg(long)]
    k: Option<usize>,
    /// Shallow/deep: length of the pendant path `ℓ`.
    #[arg(long)]
    ell: Option<usize>,
    /// Shallow/deep: diagonal shift on the attached vertices.
    #[arg(long)]
    mu: Option<f64>,
    /// Random: instance seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Restrict per-eigenvector work to this 1-based index.
    #[arg(long)]
    index: Option<usize>,
    #[command(flatten)]
    analysis: AnalysisArgs,
    /// Report path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for the graph and matrix files.
    #[arg(long, default_value = ".")]
    write_dir: PathBuf,
}

fn need(x: Option<usize>, flag: &str, family: &str) -> CliResult<usize> {
    x.ok_or_else(|| Error::InvalidFamily(format!("{family} requires --{flag}")).into())
}

fn build(args: &FamilyArgs) -> CliResult<FamilyInstance> {
    let inst = match args.name {
        FamilyName::Star => families::star(need(args.n, "n", "star")?)?,
        FamilyName::Path => families::path_dirichlet(need(args.n, "n", "path")?)?,
        FamilyName::Ladder => families::ladder(need(args.n, "n", "ladder")?)?,
        FamilyName::DoubleLeft => families::double_left_path(need(args.n, "n", "double-left")?)?,
        FamilyName::ShallowDeep => families::shallow_deep_family(
            need(args.s, "s", "shallow-deep")?,
            need(args.k, "k", "shallow-deep")?,
            need(args.ell, "ell", "shallow-deep")?,
            args.mu,
        )?,
        FamilyName::Random => {
            let n = need(args.n, "n", "random")?;
            if n < 2 {
                return Err(Error::InvalidFamily("random requires n ≥ 2".into()).into());
            }
            let lap = families::random_instance(n, args.seed);
            FamilyInstance {
                name: "random".into(),
                params: vec![("n".into(), n as f64), ("seed".into(), args.seed as f64)],
                labels: (0..n).map(|i| i.to_string()).collect(),
                lap,
                expected: Vec::new(),
                vectors: Vec::new(),
                notes: "G(n, 0.4) conditioned on connectivity".into(),
            }
        }
    };
    Ok(inst)
}

fn file_stem(inst: &FamilyInstance, seed: u64) -> String {
    let mut stem = inst.name.clone();
    for (k, v) in &inst.params {
        if k == "seed" {
            continue;
        }
        let _ = write!(stem, "-{k}{v}");
    }
    if inst.name == "random" {
        let _ = write!(stem, "-seed{seed}");
    }
    stem
}

/// Expected-vs-computed rows plus whether every row matches.
fn comparison(inst: &FamilyInstance) -> CliResult<(Value, bool, String)> {
    let m = inst.lap.matrix();
    let spec = eig_sym(m)?;
    let tol = 1e-8 * (1.0 + m.norm_inf());
    let mut all = true;
    let mut table = format!("{:>5}  {:>22}  {:>22}  {:>9}  formula\n", "index", "expected", "computed", "|error|");
    let mut rows = Vec::new();
    for e in &inst.expected {
        let computed = spec.value(e.index);
        let err = (computed - e.value).abs();
        let ok = err <= tol;
        all &= ok;
        let _ = writeln!(
            table,
            "{:>5}  {:>22.15}  {:>22.15}  {:>9.2e}  {}{}",
            e.index,
            e.value,
            computed,
            err,
            e.formula,
            if ok { "" } else { "  MISMATCH" }
        );
        rows.push(json!({
            "index": e.index, "expected": e.value, "computed": computed,
            "error": err, "formula": e.formula, "matches": ok,
        }));
    }
    let mut vecs = Vec::new();
    for v in &inst.vectors {
        let residual = eigen_residual(m, spec.value(v.index), &v.vector);
        let ok = residual <= tol;
        all &= ok;
        let _ = writeln!(table, "{:>5}  eigenvector residual {residual:.2e}  {}", v.index, v.formula);
        vecs.push(json!({ "index": v.index, "formula": v.formula, "residual": residual, "matches": ok }));
    }
    let doc = json!({ "tolerance": tol, "eigenvalues": rows, "eigenvectors": vecs, "all_match": all });
    Ok((nodal_core::report::to_value(&doc), all, table))
}

pub(crate) fn cmd_family(args: &FamilyArgs) -> CliResult<()> {
    let inst = build(args)?;
    let stem = file_stem(&inst, args.seed);
    std::fs::create_dir_all(&args.write_dir)
        .map_err(|e| Failure::input(format!("{}: {e}", args.write_dir.display())))?;
    let graph_path = args.write_dir.join(format!("{stem}.graph.txt"));
    let matrix_path = args.write_dir.join(format!("{stem}.matrix.txt"));
    write(&graph_path, &inst.graph().to_text())?;
    write(&matrix_path, &inst.lap.matrix().to_text())?;

    let (table_doc, all_match, table) = comparison(&inst)?;
    let params: Map<String, Value> = inst.params.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
    let input = json!({
        "command": "family",
        "family": inst.name,
        "params": params,
        "labels": inst.labels,
        "notes": inst.notes,
        "files": {
            "graph": graph_path.display().to_string(),
            "matrix": matrix_path.display().to_string(),
        },
        "options": args.analysis.describe(args.index),
        "n": inst.n(),
        "edges": inst.graph().edges(),
    });
    let mut doc = analyze_document(&inst.lap, input, &args.analysis, args.index)?;
    doc.as_object_mut().expect("report is an object").insert("expected_vs_computed".into(), table_doc);
    emit(args.out.as_deref(), &doc)?;
    if !inst.expected.is_empty() || !inst.vectors.is_empty() {
        eprint!("{table}");
    }
    if !all_match {
        return Err(Failure::numeric("computed spectrum disagrees with the closed form"));
    }
    Ok(())
}
