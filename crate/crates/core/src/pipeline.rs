//! Graph, independent set, code: the full construction with every
//! intermediate number kept for reporting.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::bounds::{param_text, Param};
use crate::budget::Budget;
use crate::code::{assemble, verify_artifact, CodeArtifact, Verdict};
use crate::error::{Error, Result};
use crate::graph::{build_graph, degree_stats, sparsity_cost, sparsity_diagnostics, BuildStrategy, DegreeStats, GraphMode};
use crate::solver::{solve_report, SolveReport, SolverConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Construction {
    pub n: usize,
    pub q: u16,
    pub d: usize,
    pub weight: Option<usize>,
    pub build: BuildStrategy,
    pub degrees: DegreeStats,
    pub tau: String,
    /// Empirical local sparsity; absent when too expensive, see `k_hat_note`.
    pub k_hat: Option<f64>,
    pub k_hat_note: Option<String>,
    pub solver: SolveReport,
    /// Final code size, `n` times the number of chosen classes.
    pub size: usize,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

/// `τ = d/n`, the default split parameter.
pub fn default_tau(n: usize, d: usize) -> Param {
    Ratio::new(d.max(1) as i64, n.max(1) as i64)
}

/// Builds the class graph, extracts an independent set and expands it into a
/// verified code. A code that fails verification is a contract error.
#[allow(clippy::too_many_arguments)]
pub fn construct(
    n: usize,
    q: u16,
    d: usize,
    mode: GraphMode,
    strategy: BuildStrategy,
    config: &SolverConfig,
    tau: Option<Param>,
    budget: &Budget,
) -> Result<(CodeArtifact, Construction)> {
    let graph = build_graph(n, q, d, mode, strategy, budget)?;
    let degrees = degree_stats(&graph)?;
    let tau = tau.unwrap_or_else(|| default_tau(n, d));
    let mut notes = Vec::new();
    if graph.num_vertices() == 0 {
        notes.push("empty vertex set".to_string());
    }
    let (k_hat, k_hat_note) = if graph.num_vertices() == 0 {
        (None, Some("empty vertex set".to_string()))
    } else if sparsity_cost(&graph) > budget.work {
        (None, Some(format!("sparsity scan needs {} operations, budget is {}", sparsity_cost(&graph), budget.work)))
    } else {
        (Some(sparsity_diagnostics(&graph, tau, budget)?.k_hat), None)
    };
    let solver = solve_report(&graph, config, k_hat, budget)?;
    let mut code = assemble(&graph, &solver.set)?;
    code.provenance.insert("solver".into(), serde_json::to_value(config).unwrap_or_default());
    code.provenance.insert("build".into(), serde_json::json!(graph.strategy().to_string()));
    code.provenance.insert("vertices".into(), serde_json::json!(graph.num_vertices()));
    let verdict = verify_artifact(&code, budget)?;
    if !verdict.pass {
        let reason = verdict.failure.as_ref().map(|f| f.message.clone()).unwrap_or_default();
        return Err(Error::Contract(format!("constructed code does not verify: {reason}")));
    }
    if code.len() % n != 0 {
        return Err(Error::Contract(format!("code size {} is not a multiple of n = {n}", code.len())));
    }
    let report = Construction {
        n,
        q,
        d,
        weight: mode.weight(),
        build: graph.strategy(),
        degrees,
        tau: param_text(tau),
        k_hat,
        k_hat_note,
        size: code.len(),
        solver,
        verdict,
        notes,
    };
    Ok((code, report))
}
