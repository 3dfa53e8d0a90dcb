//! Command-line surface. Every run produces one document: a run manifest, a
//! status and a command-specific report. The text format prints a table,
//! a `--- machine ---` separator and the same document as JSON; the machine
//! format prints only the JSON.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bounds::{bound_report, param_text, parse_param, set_a_threshold, set_b_threshold, BoundParams, BoundReport, BoundValue, Param};
use crate::budget::Budget;
use crate::code::{derive_fhs, derive_wmuc, verify_artifact, verify_fhs, CodeArtifact, CodeKind, Verdict};
use crate::codefile;
use crate::concentration::{conditional_tail_weight_slice, exact_set_a, exact_set_b, mc_tail, SamplingMode, SetReport, TailEstimate, GENERATOR};
use crate::error::{Error, Result};
use crate::graph::{build_graph, degree_stats, sparsity_diagnostics, BuildStrategy, GraphMode};
use crate::pipeline::{construct, default_tau, Construction};
use crate::solver::{SolverConfig, Strategy};
use crate::volume::intersection_decay_table;

pub const TOOL: &str = "cyclocode";
pub const SEPARATOR: &str = "--- machine ---";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Machine,
}

#[derive(Debug, Parser)]
#[command(name = "cyclocode", version, about = "Cyclic codes from independent sets of class graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Enumeration budget in words; overrides CYCLOCODE_BUDGET.
    #[arg(long, global = true)]
    pub budget: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the GV-type bounds for a parameter set.
    Bounds(BoundsArgs),
    /// Build a class graph, solve it and write the verified code.
    Construct(ConstructArgs),
    /// Verify a code file.
    Verify(VerifyArgs),
    /// Derive a frequency-hopping sequence set from an HCC.
    Fhs(DeriveArgs),
    /// Derive a weakly mutually uncorrelated code from an HCC.
    Wmuc(DeriveArgs),
    /// Run an exact count or a sampling experiment.
    Experiment(ExperimentArgs),
    /// Degree statistics of a class graph.
    GraphStats(GraphStatsArgs),
    /// Re-run the command recorded in a previous output document.
    Replay(ReplayArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct BoundsArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub q: u16,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub weight: Option<usize>,
    #[arg(long)]
    pub lambda: Option<usize>,
    #[arg(long)]
    pub kappa: Option<usize>,
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long)]
    pub tau: Option<String>,
    #[arg(long)]
    pub p: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BuildArg {
    Auto,
    Pairwise,
    BallEnumeration,
}

impl From<BuildArg> for BuildStrategy {
    fn from(b: BuildArg) -> Self {
        match b {
            BuildArg::Auto => BuildStrategy::Auto,
            BuildArg::Pairwise => BuildStrategy::Pairwise,
            BuildArg::BallEnumeration => BuildStrategy::BallEnumeration,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyArg {
    GvGreedy,
    MinDegreeGreedy,
    RandomRestart,
}

#[derive(Debug, Args, Serialize)]
pub struct GraphArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub q: u16,
    #[arg(long)]
    pub d: Option<usize>,
    /// Constant weight; builds the OOC graph.
    #[arg(long)]
    pub weight: Option<usize>,
    #[arg(long, value_enum, default_value_t = BuildArg::Auto)]
    pub build: BuildArg,
}

#[derive(Debug, Args, Serialize)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value_t = StrategyArg::MinDegreeGreedy)]
    pub strategy: StrategyArg,
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct ConstructArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
    /// Split parameter for the sparsity diagnostics; defaults to d/n.
    #[arg(long)]
    pub tau: Option<String>,
    /// Slack for the bounds that take one.
    #[arg(long)]
    pub eps: Option<String>,
    /// Where to write the code file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum KindArg {
    Hcc,
    Ooc,
    Fhs,
    Wmuc,
}

impl From<KindArg> for CodeKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Hcc => CodeKind::Hcc,
            KindArg::Ooc => CodeKind::Ooc,
            KindArg::Fhs => CodeKind::Fhs,
            KindArg::Wmuc => CodeKind::Wmuc,
        }
    }
}

/// Expected values override the file header.
#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    pub path: PathBuf,
    #[arg(long, value_enum, ignore_case = true)]
    pub kind: Option<KindArg>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub q: Option<u16>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub weight: Option<usize>,
    #[arg(long)]
    pub lambda: Option<usize>,
    #[arg(long)]
    pub kappa: Option<usize>,
}

/// Derivations read an HCC file, or construct one from the graph options.
#[derive(Debug, Args, Serialize)]
pub struct DeriveArgs {
    pub input: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
    /// WMUC only; defaults to n - d + 1.
    #[arg(long)]
    pub kappa: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum ExperimentKind {
    #[value(name = "setA", alias = "set-a")]
    #[serde(rename = "setA")]
    SetA,
    #[value(name = "setB", alias = "set-b")]
    #[serde(rename = "setB")]
    SetB,
    #[value(name = "mc-tail")]
    #[serde(rename = "mc-tail")]
    McTail,
    #[value(name = "slice-tail")]
    #[serde(rename = "slice-tail")]
    SliceTail,
    #[value(name = "intersection-decay")]
    #[serde(rename = "intersection-decay")]
    IntersectionDecay,
    #[value(name = "sparsity")]
    #[serde(rename = "sparsity")]
    Sparsity,
}

#[derive(Debug, Args, Serialize)]
pub struct ExperimentArgs {
    #[arg(value_enum)]
    pub kind: ExperimentKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub q: u16,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub weight: Option<usize>,
    #[arg(long)]
    pub eps: Option<String>,
    /// Bernoulli or slice density; setB and slice-tail default to 1/2.
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub tau: Option<String>,
    /// Ball radius for intersection-decay.
    #[arg(long)]
    pub t: Option<usize>,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = BuildArg::Auto)]
    pub build: BuildArg,
}

#[derive(Debug, Args, Serialize)]
pub struct GraphStatsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    /// Include every vertex representative in the report.
    #[arg(long)]
    pub show_vertices: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct ReplayArgs {
    /// An output document or a bare manifest.
    pub path: PathBuf,
}

/// Everything needed to run the command again.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Command line after the program name.
    pub arguments: Vec<String>,
    pub parameters: Value,
    pub seed: Option<u64>,
    pub generator: Option<String>,
    pub threads: Option<usize>,
    pub budget: Budget,
    /// Wall time; the only field that differs between identical runs.
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

/// What the binary prints and returns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub manifest: RunManifest,
    pub status: Status,
    pub exit_code: i32,
    pub report: Value,
    pub error: Option<String>,
}

/// Exit status: 1 for failed checks, 2 for usage and input problems,
/// 3 for budget overruns, 4 for malformed code files.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Contract(_) => 1,
        Error::Capacity { .. } => 3,
        Error::Parse { .. } => 4,
        _ => 2,
    }
}

struct Outcome {
    table: String,
    report: Value,
    pass: bool,
}

fn to_json<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).unwrap_or(Value::Null)
}

fn usage(message: impl Into<String>) -> Error {
    Error::Domain(message.into())
}

fn need<T: Copy>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| usage(format!("{flag} is required")))
}

fn opt_param(text: &Option<String>) -> Result<Option<Param>> {
    text.as_deref().map(parse_param).transpose()
}

fn line(out: &mut String, label: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "  {label:<34} {value}");
}

fn mode_for(weight: Option<usize>) -> GraphMode {
    match weight {
        Some(weight) => GraphMode::Ooc { weight },
        None => GraphMode::Hcc,
    }
}

fn solver_config(s: &SolverArgs) -> SolverConfig {
    SolverConfig {
        strategy: match s.strategy {
            StrategyArg::GvGreedy => Strategy::GvGreedy,
            StrategyArg::MinDegreeGreedy => Strategy::MinDegreeGreedy,
            StrategyArg::RandomRestart => Strategy::RandomRestart { restarts: s.restarts },
        },
        seed: s.seed,
    }
}

fn strategy_name(s: &Strategy) -> String {
    match s {
        Strategy::GvGreedy => "gv-greedy".into(),
        Strategy::MinDegreeGreedy => "min-degree-greedy".into(),
        Strategy::RandomRestart { restarts } => format!("random-restart ({restarts} restarts)"),
    }
}

fn opt_text<T: std::fmt::Display>(value: Option<T>) -> String {
    value.map_or_else(|| "-".to_string(), |v| v.to_string())
}

fn bound_f64(value: &BoundValue) -> Option<f64> {
    match value {
        BoundValue::Exact { approx, .. } => Some(approx.to_f64()),
        BoundValue::Real { value, vacuous: false } => Some(value.to_f64()),
        _ => None,
    }
}

/// Writes the code to `out` or, without a path, embeds the file text.
fn emit_code(code: &CodeArtifact, out: &Option<PathBuf>, report: &mut Value) -> Result<()> {
    match out {
        Some(path) => {
            codefile::save(path, code)?;
            report["out"] = json!(path.display().to_string());
        }
        None => report["code_file"] = json!(codefile::write_code(code)),
    }
    Ok(())
}

fn bounds_cmd(a: &BoundsArgs) -> Result<Outcome> {
    let params = BoundParams {
        n: a.n,
        q: a.q,
        d: a.d,
        weight: a.weight,
        lambda: a.lambda,
        kappa: a.kappa,
        eps: opt_param(&a.eps)?,
        tau: opt_param(&a.tau)?,
        p: opt_param(&a.p)?,
    };
    let report = bound_report(&params)?;
    let mut table = format!("bounds n={} q={}\n", a.n, a.q);
    for row in report.to_table().lines() {
        let _ = writeln!(table, "  {row}");
    }
    if let Some(v) = report.independence_lb {
        line(&mut table, "independence lower bound", format!("{v:.6}"));
    }
    Ok(Outcome {
        table,
        report: to_json(&report),
        pass: true,
    })
}

fn construct_from(graph: &GraphArgs, solver: &SolverArgs, tau: Option<Param>, budget: &Budget) -> Result<(CodeArtifact, Construction)> {
    let n = need(graph.n, "--n")?;
    let d = need(graph.d, "--d")?;
    let config = solver_config(solver);
    let (mut code, report) = construct(n, graph.q, d, mode_for(graph.weight), graph.build.into(), &config, tau, budget)?;
    code.provenance.insert("seed".into(), json!(solver.seed));
    Ok((code, report))
}

fn construction_table(c: &Construction, bounds: &BoundReport) -> String {
    let kind = if c.weight.is_some() { "OOC" } else { "HCC" };
    let mut t = format!("construct {kind} n={} q={} d={}", c.n, c.q, c.d);
    if let Some(w) = c.weight {
        let _ = write!(t, " w={w}");
    }
    t.push('\n');
    line(&mut t, "vertices |V|", c.degrees.vertices);
    line(&mut t, "edges", c.degrees.edges);
    line(&mut t, "graph build", c.build);
    line(&mut t, "max degree", c.degrees.max_degree);
    line(&mut t, "degree bound D", &c.degrees.degree_bound);
    match (c.k_hat, &c.k_hat_note) {
        (Some(k), _) => line(&mut t, &format!("sparsity K (tau = {})", c.tau), format!("{k:.6}")),
        (None, note) => line(&mut t, "sparsity K", format!("n/a ({})", note.as_deref().unwrap_or(""))),
    }
    line(&mut t, "solver", format!("{} (seed {})", strategy_name(&c.solver.config.strategy), c.solver.config.seed));
    line(&mut t, "independent set |I|", c.solver.size);
    line(&mut t, "greedy floor |V|/(max degree + 1)", format!("{:.6}", c.solver.greedy_floor));
    line(&mut t, "exact maximum", opt_text(c.solver.exact_size));
    line(&mut t, "reference (|V|/D) ln min(D, K)", opt_text(c.solver.independence_reference.map(|v| format!("{v:.6}"))));
    line(&mut t, "code size M", c.size);
    line(&mut t, "verification", verdict_text(&c.verdict));
    if !bounds.rows.is_empty() {
        let _ = writeln!(t, "bounds (M / bound):");
    }
    for row in &bounds.rows {
        if let Some(v) = bound_f64(&row.value) {
            line(&mut t, &row.family, format!("{v:.6e} ({:.6})", c.size as f64 / v));
        }
    }
    for note in &c.notes {
        let _ = writeln!(t, "note: {note}");
    }
    t
}

fn verdict_text(v: &Verdict) -> String {
    let mut s = if v.pass { "pass".to_string() } else { "FAIL".to_string() };
    if let Some(d) = v.min_distance {
        let _ = write!(s, " (min distance {d})");
    }
    s
}

fn construct_cmd(a: &ConstructArgs, budget: &Budget) -> Result<Outcome> {
    let tau = opt_param(&a.tau)?;
    let (code, c) = construct_from(&a.graph, &a.solver, tau, budget)?;
    let params = BoundParams {
        n: c.n,
        q: c.q,
        d: Some(c.d),
        weight: c.weight,
        eps: opt_param(&a.eps)?,
        tau: Some(tau.unwrap_or_else(|| default_tau(c.n, c.d))),
        ..BoundParams::default()
    };
    // Bounds are undefined for d > n, where the code is empty anyway.
    let bounds = if c.d <= c.n {
        bound_report(&params)?
    } else {
        BoundReport {
            params,
            rows: Vec::new(),
            mcdiarmid_terms: Vec::new(),
            independence_lb: None,
        }
    };
    let comparisons: Vec<Value> = bounds
        .rows
        .iter()
        .filter_map(|row| bound_f64(&row.value).map(|v| json!({"key": row.key, "bound": v, "ratio": c.size as f64 / v})))
        .collect();
    let table = construction_table(&c, &bounds);
    let mut report = json!({
        "construction": to_json(&c),
        "bounds": to_json(&bounds),
        "comparisons": comparisons,
    });
    emit_code(&code, &a.out, &mut report)?;
    Ok(Outcome {
        table,
        report,
        pass: c.verdict.pass,
    })
}

fn verify_cmd(a: &VerifyArgs, budget: &Budget) -> Result<Outcome> {
    let mut code = codefile::load(&a.path)?;
    let header = code.params.clone();
    let header_kind = code.kind;
    if let Some(k) = a.kind {
        code.kind = k.into();
    }
    let p = &mut code.params;
    p.n = a.n.unwrap_or(p.n);
    p.q = a.q.unwrap_or(p.q);
    p.d = a.d.unwrap_or(p.d);
    p.weight = a.weight.or(p.weight);
    p.lambda = a.lambda.or(p.lambda);
    p.kappa = a.kappa.or(p.kappa);
    let verdict = verify_artifact(&code, budget)?;
    let correlation = if code.kind == CodeKind::Fhs && verdict.pass {
        let lambda = need(code.params.lambda, "lambda")?;
        verify_fhs(&code.words, code.params.n, code.params.q, lambda, budget)?.1
    } else {
        None
    };
    let mut t = format!("verify {} {}\n", a.path.display(), codefile::header(code.kind, &code.params));
    line(&mut t, "words", verdict.words);
    line(&mut t, "result", verdict_text(&verdict));
    if let Some(f) = &verdict.failure {
        line(&mut t, "failed check", to_json(&f.check).as_str().unwrap_or(""));
        line(&mut t, "witness", f.message.as_str());
    }
    if let Some(c) = &correlation {
        line(&mut t, "max auto-correlation", c.max_auto);
        line(&mut t, "max cross-correlation", opt_text(c.max_cross));
    }
    for w in &verdict.warnings {
        let _ = writeln!(t, "warning: {w}");
    }
    Ok(Outcome {
        table: t,
        report: json!({
            "path": a.path.display().to_string(),
            "header": {"kind": header_kind, "params": header},
            "checked": {"kind": code.kind, "params": code.params},
            "verdict": verdict,
            "correlation": correlation,
            "provenance": code.provenance,
        }),
        pass: verdict.pass,
    })
}

fn source_code(a: &DeriveArgs, budget: &Budget) -> Result<CodeArtifact> {
    match &a.input {
        Some(path) => codefile::load(path),
        None => Ok(construct_from(&a.graph, &a.solver, None, budget)?.0),
    }
}

fn fhs_cmd(a: &DeriveArgs, budget: &Budget) -> Result<Outcome> {
    let source = source_code(a, budget)?;
    let (fhs, corr) = derive_fhs(&source, budget)?;
    let p = &fhs.params;
    let lambda = p.lambda.unwrap_or(0);
    let mut t = format!("fhs n={} q={} from a distance-{} {}\n", p.n, p.q, p.d, source.kind.as_str());
    line(&mut t, "source code size", source.len());
    line(&mut t, "sequences", fhs.len());
    line(&mut t, "lambda = n - d", lambda);
    line(&mut t, "max auto-correlation", corr.max_auto);
    line(&mut t, "max cross-correlation", opt_text(corr.max_cross));
    line(&mut t, "achieved lambda", corr.lambda_achieved);
    let pass = corr.lambda_achieved <= lambda;
    let mut report = json!({
        "source": {"kind": source.kind, "params": source.params, "size": source.len()},
        "sequences": fhs.len(),
        "lambda": lambda,
        "correlation": corr,
    });
    emit_code(&fhs, &a.out, &mut report)?;
    Ok(Outcome { table: t, report, pass })
}

fn wmuc_cmd(a: &DeriveArgs, budget: &Budget) -> Result<Outcome> {
    let source = source_code(a, budget)?;
    let (n, d) = (source.params.n, source.params.d);
    let kappa = match a.kappa {
        Some(k) => k,
        None if (1..=n).contains(&d) => n - d + 1,
        None => return Err(usage(format!("--kappa is required when d = {d} is outside 1..={n}"))),
    };
    let wmuc = derive_wmuc(&source, kappa, budget)?;
    let verdict = verify_artifact(&wmuc, budget)?;
    let mut t = format!("wmuc n={n} q={} kappa={kappa} from a distance-{d} {}\n", source.params.q, source.kind.as_str());
    line(&mut t, "source code size", source.len());
    line(&mut t, "codewords", wmuc.len());
    line(&mut t, "verification", verdict_text(&verdict));
    let mut report = json!({
        "source": {"kind": source.kind, "params": source.params, "size": source.len()},
        "kappa": kappa,
        "codewords": wmuc.len(),
        "verdict": verdict,
    });
    emit_code(&wmuc, &a.out, &mut report)?;
    Ok(Outcome {
        table: t,
        report,
        pass: verdict.pass,
    })
}

fn set_table(name: &str, eps: Param, r: &SetReport) -> String {
    let mut t = format!("experiment {name} n={} q={} eps={}\n", r.n, r.q, param_text(eps));
    if let Some(w) = r.weight {
        line(&mut t, "weight", w);
    }
    line(&mut t, "members satisfy d(x) >", &r.threshold);
    line(&mut t, "exact count", format!("{} of {}", r.count, r.total));
    line(&mut t, "guaranteed lower bound", format!("{}{}", r.bound.bound, if r.bound.vacuous { " (vacuous)" } else { "" }));
    line(&mut t, "verdict", if r.holds { "holds" } else { "VIOLATED" });
    t
}

fn tail_table(name: &str, e: &TailEstimate) -> String {
    let mut t = format!("experiment {name} n={} q={} samples={} seed={}\n", e.n, e.q, e.samples, e.seed);
    line(&mut t, "event d(X) <=", &e.threshold);
    line(&mut t, "hits", e.hits);
    line(&mut t, "estimate", format!("{:.6e} (stderr {:.3e})", e.estimate, e.stderr));
    match &e.bound {
        Some(b) => {
            line(&mut t, "per-shift tail", format!("{:.6e}", b.per_shift_tail));
            line(&mut t, "bound", format!("{:.6e}", b.value));
        }
        None => line(&mut t, "bound", "none (threshold not below the mean)"),
    }
    line(&mut t, "estimate <= bound + 3 stderr", e.within_bound);
    t
}

fn experiment_cmd(a: &ExperimentArgs, budget: &Budget) -> Result<Outcome> {
    let eps = || opt_param(&a.eps)?.ok_or_else(|| usage("--eps is required"));
    let half = Param::new(1, 2);
    match a.kind {
        ExperimentKind::SetA => {
            let eps = eps()?;
            let r = exact_set_a(a.n, a.q, eps, budget)?;
            Ok(Outcome {
                table: set_table("setA", eps, &r),
                pass: r.holds,
                report: to_json(&r),
            })
        }
        ExperimentKind::SetB => {
            let eps = eps()?;
            let p = opt_param(&a.p)?.unwrap_or(half);
            let r = exact_set_b(a.n, p, eps, budget)?;
            Ok(Outcome {
                table: set_table("setB", eps, &r),
                pass: r.holds,
                report: to_json(&r),
            })
        }
        ExperimentKind::McTail => {
            let eps = eps()?;
            let (mode, threshold) = match opt_param(&a.p)? {
                Some(p) => (SamplingMode::Bernoulli { p }, set_b_threshold(a.n, p, eps)),
                None => (SamplingMode::Uniform, set_a_threshold(a.n, a.q, eps)),
            };
            let e = mc_tail(a.n, a.q, threshold, a.samples, a.seed, mode)?;
            Ok(Outcome {
                table: tail_table("mc-tail", &e),
                pass: e.within_bound,
                report: to_json(&e),
            })
        }
        ExperimentKind::SliceTail => {
            let eps = eps()?;
            let p = opt_param(&a.p)?.unwrap_or(half);
            let e = conditional_tail_weight_slice(a.n, p, set_b_threshold(a.n, p, eps), a.samples, a.seed)?;
            Ok(Outcome {
                table: tail_table("slice-tail", &e),
                pass: e.within_bound,
                report: to_json(&e),
            })
        }
        ExperimentKind::IntersectionDecay => {
            let radius = need(a.t, "--t")?;
            let table = intersection_decay_table(a.n, a.q, radius, a.weight, budget)?;
            let mut t = format!("experiment intersection-decay n={} q={} t={radius}", a.n, a.q);
            if let Some(w) = a.weight {
                let _ = write!(t, " w={w}");
            }
            let _ = writeln!(t, "\n  ball volume {}", table.volume);
            let _ = writeln!(t, "  {:>10}  {:>14}  {:>14}  ratio", "separation", "intersection", "exact");
            for r in &table.rows {
                let _ = writeln!(t, "  {:>10}  {:>14}  {:>14}  {:.6}", r.separation, r.intersection, r.ratio_exact, r.ratio);
            }
            if !table.is_monotone() {
                let _ = writeln!(t, "note: not monotone at separations {:?}", table.monotonicity_violations);
            }
            Ok(Outcome {
                table: t,
                report: to_json(&table),
                pass: true,
            })
        }
        ExperimentKind::Sparsity => {
            let d = need(a.d, "--d")?;
            let graph = build_graph(a.n, a.q, d, mode_for(a.weight), a.build.into(), budget)?;
            let tau = opt_param(&a.tau)?.unwrap_or_else(|| default_tau(a.n, d));
            let s = sparsity_diagnostics(&graph, tau, budget)?;
            let mut t = format!("experiment sparsity n={} q={} d={d} tau={}\n", a.n, a.q, s.tau);
            line(&mut t, "vertices", graph.num_vertices());
            line(&mut t, "split d - tau n / 2", s.split);
            line(&mut t, "max |S|", s.max_s);
            line(&mut t, "max neighborhood edges", s.max_neighborhood_edges);
            line(&mut t, "degree bound D", s.degree_bound);
            line(&mut t, "empirical K", format!("{:.6}", s.k_hat));
            Ok(Outcome {
                table: t,
                report: to_json(&s),
                pass: true,
            })
        }
    }
}

fn graph_stats_cmd(a: &GraphStatsArgs, budget: &Budget) -> Result<Outcome> {
    let g = &a.graph;
    let n = need(g.n, "--n")?;
    let d = need(g.d, "--d")?;
    let graph = build_graph(n, g.q, d, mode_for(g.weight), g.build.into(), budget)?;
    let stats = degree_stats(&graph)?;
    let mut t = format!("graph-stats n={n} q={} d={d}", g.q);
    if let Some(w) = g.weight {
        let _ = write!(t, " w={w}");
    }
    t.push('\n');
    line(&mut t, "build", graph.strategy());
    line(&mut t, "vertices", stats.vertices);
    line(&mut t, "edges", stats.edges);
    line(&mut t, "max degree", stats.max_degree);
    line(&mut t, "mean degree", format!("{:.6}", stats.mean_degree));
    line(&mut t, "degree bound D", &stats.degree_bound);
    let hist: Vec<String> = stats.histogram.iter().map(|(k, c)| format!("{k}:{c}")).collect();
    line(&mut t, "histogram degree:count", hist.join(" "));
    let mut report = json!({"build": graph.strategy().to_string(), "stats": stats});
    if a.show_vertices {
        let reps: Vec<String> = graph.vertices().iter().map(|c| c.representative().to_string()).collect();
        report["vertices"] = json!(reps);
    }
    Ok(Outcome { table: t, report, pass: true })
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Bounds(_) => "bounds",
        Command::Construct(_) => "construct",
        Command::Verify(_) => "verify",
        Command::Fhs(_) => "fhs",
        Command::Wmuc(_) => "wmuc",
        Command::Experiment(_) => "experiment",
        Command::GraphStats(_) => "graph-stats",
        Command::Replay(_) => "replay",
    }
}

fn parameters(c: &Command) -> Value {
    match c {
        Command::Bounds(a) => to_json(a),
        Command::Construct(a) => to_json(a),
        Command::Verify(a) => to_json(a),
        Command::Fhs(a) | Command::Wmuc(a) => to_json(a),
        Command::Experiment(a) => to_json(a),
        Command::GraphStats(a) => to_json(a),
        Command::Replay(a) => to_json(a),
    }
}

fn seed_and_generator(c: &Command) -> (Option<u64>, Option<String>) {
    match c {
        Command::Construct(ConstructArgs { solver, .. }) | Command::Fhs(DeriveArgs { solver, .. }) | Command::Wmuc(DeriveArgs { solver, .. }) => {
            let generator = (solver.strategy == StrategyArg::RandomRestart).then(|| GENERATOR.to_string());
            (Some(solver.seed), generator)
        }
        Command::Experiment(a) if matches!(a.kind, ExperimentKind::McTail | ExperimentKind::SliceTail) => {
            (Some(a.seed), Some(GENERATOR.to_string()))
        }
        _ => (None, None),
    }
}

fn dispatch(c: &Command, budget: &Budget) -> Result<Outcome> {
    match c {
        Command::Bounds(a) => bounds_cmd(a),
        Command::Construct(a) => construct_cmd(a, budget),
        Command::Verify(a) => verify_cmd(a, budget),
        Command::Fhs(a) => fhs_cmd(a, budget),
        Command::Wmuc(a) => wmuc_cmd(a, budget),
        Command::Experiment(a) => experiment_cmd(a, budget),
        Command::GraphStats(a) => graph_stats_cmd(a, budget),
        Command::Replay(_) => Err(usage("a replayed command cannot itself be a replay")),
    }
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        Some(0) => Err(usage("--threads must be positive")),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| usage(format!("cannot start {t} threads: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

/// Runs a parsed command line and returns the rendered output and the exit
/// status. `arguments` is recorded in the manifest for replay.
pub fn execute(cli: &Cli, arguments: Vec<String>, budget: Budget) -> Output {
    if let Command::Replay(r) = &cli.command {
        return match load_manifest(&r.path) {
            Ok(m) => replay(&m),
            Err(e) => render_error(cli, arguments, budget, &e),
        };
    }
    let start = Instant::now();
    let result = in_pool(cli.threads, || dispatch(&cli.command, &budget)).and_then(|r| r);
    let elapsed_ms = start.elapsed().as_millis() as u64;
    let manifest = manifest(cli, arguments, budget, elapsed_ms);
    match result {
        Ok(outcome) => {
            let code = if outcome.pass { 0 } else { 1 };
            let doc = Document {
                manifest,
                status: if outcome.pass { Status::Pass } else { Status::Fail },
                exit_code: code,
                report: outcome.report,
                error: None,
            };
            Output {
                stdout: render(cli.format, &outcome.table, &doc),
                stderr: String::new(),
                code,
            }
        }
        Err(e) => error_document(cli.format, manifest, &e),
    }
}

fn manifest(cli: &Cli, arguments: Vec<String>, budget: Budget, elapsed_ms: u64) -> RunManifest {
    let (seed, generator) = seed_and_generator(&cli.command);
    RunManifest {
        tool: TOOL.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command_name(&cli.command).to_string(),
        arguments,
        parameters: parameters(&cli.command),
        seed,
        generator,
        threads: cli.threads,
        budget,
        elapsed_ms,
    }
}

fn error_document(format: Format, manifest: RunManifest, e: &Error) -> Output {
    let code = exit_code(e);
    let doc = Document {
        manifest,
        status: Status::Error,
        exit_code: code,
        report: Value::Null,
        error: Some(e.to_string()),
    };
    Output {
        stdout: render(format, &format!("error: {e}\n"), &doc),
        stderr: format!("error: {e}\n"),
        code,
    }
}

fn render_error(cli: &Cli, arguments: Vec<String>, budget: Budget, e: &Error) -> Output {
    error_document(cli.format, manifest(cli, arguments, budget, 0), e)
}

pub fn render(format: Format, table: &str, doc: &Document) -> String {
    let json = serde_json::to_string_pretty(doc).unwrap_or_default();
    match format {
        Format::Machine => format!("{json}\n"),
        Format::Text => format!("{table}{SEPARATOR}\n{json}\n"),
    }
}

/// Extracts the manifest from an output document (either format) or a bare
/// manifest file.
pub fn load_manifest(path: &Path) -> Result<RunManifest> {
    let text = std::fs::read_to_string(path)?;
    let json = match text.find(SEPARATOR) {
        Some(i) => &text[i + SEPARATOR.len()..],
        None => text.as_str(),
    };
    let value: Value = serde_json::from_str(json.trim()).map_err(|e| usage(format!("{}: not a run document: {e}", path.display())))?;
    let manifest = value.get("manifest").cloned().unwrap_or(value);
    serde_json::from_value(manifest).map_err(|e| usage(format!("{}: bad manifest: {e}", path.display())))
}

/// Re-runs a manifest with its recorded arguments, budget and thread cap.
pub fn replay(m: &RunManifest) -> Output {
    let argv = std::iter::once(TOOL.to_string()).chain(m.arguments.iter().cloned());
    match Cli::try_parse_from(argv) {
        Ok(cli) => execute(&cli, m.arguments.clone(), m.budget),
        Err(e) => Output {
            stdout: String::new(),
            stderr: format!("error: recorded arguments do not parse: {e}\n"),
            code: 2,
        },
    }
}

/// Entry point used by the binary: parses `args` (without the program
/// name), applies the budget override and runs.
pub fn run(args: Vec<String>) -> Output {
    let argv = std::iter::once(TOOL.to_string()).chain(args.iter().cloned());
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Output {
                    stdout: String::new(),
                    stderr: text,
                    code: 2,
                }
            } else {
                Output {
                    stdout: text,
                    stderr: String::new(),
                    code: 0,
                }
            };
        }
    };
    let mut budget = Budget::from_env();
    if let Some(b) = cli.budget {
        budget.enumeration = b;
    }
    execute(&cli, args, budget)
}
