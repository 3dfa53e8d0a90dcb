//! Independent sets in class graphs.
//!
//! Vertex indices follow canonical-representative order, so breaking ties by
//! smallest index is the same as breaking them by representative.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::independence_lower_bound;
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::graph::{BitMatrix, ClassGraph};
use num_traits::ToPrimitive;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "kebab-case")]
pub enum Strategy {
    /// Scan vertices in order, take each one not adjacent to a taken one.
    GvGreedy,
    /// Repeatedly take a vertex of least remaining degree.
    MinDegreeGreedy,
    /// Best of `restarts` greedy passes: the ordered pass, then random orders.
    RandomRestart { restarts: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverConfig {
    #[serde(flatten)]
    pub strategy: Strategy,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            strategy: Strategy::MinDegreeGreedy,
            seed: 0,
        }
    }
}

struct Bits(Vec<u64>);

impl Bits {
    fn new(size: usize) -> Self {
        Bits(vec![0; size.div_ceil(64)])
    }

    fn get(&self, v: usize) -> bool {
        self.0[v / 64] >> (v % 64) & 1 == 1
    }

    fn set(&mut self, v: usize) {
        self.0[v / 64] |= 1 << (v % 64);
    }

    fn or_row(&mut self, row: &[u64]) {
        self.0.iter_mut().zip(row).for_each(|(a, b)| *a |= b);
    }
}

/// Greedy pass over vertices in the given order.
fn greedy_in_order(adj: &BitMatrix, order: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut blocked = Bits::new(adj.size());
    let mut set = Vec::new();
    for v in order {
        if !blocked.get(v) {
            set.push(v);
            blocked.set(v);
            blocked.or_row(adj.row(v));
        }
    }
    set.sort_unstable();
    set
}

fn min_degree_greedy(adj: &BitMatrix) -> Vec<usize> {
    let size = adj.size();
    let mut degree: Vec<usize> = (0..size).map(|v| adj.row_count(v)).collect();
    let mut alive = vec![true; size];
    let mut first_alive = 0;
    let mut set = Vec::new();
    loop {
        while first_alive < size && !alive[first_alive] {
            first_alive += 1;
        }
        if first_alive == size {
            break;
        }
        let mut pick = first_alive;
        for v in first_alive..size {
            if degree[pick] == 0 {
                break;
            }
            if alive[v] && degree[v] < degree[pick] {
                pick = v;
            }
        }
        set.push(pick);
        let removed: Vec<usize> = std::iter::once(pick).chain(adj.row_iter(pick).filter(|&u| alive[u])).collect();
        for &x in &removed {
            alive[x] = false;
        }
        for &x in &removed {
            for y in adj.row_iter(x) {
                if alive[y] {
                    degree[y] -= 1;
                }
            }
        }
    }
    set.sort_unstable();
    set
}

fn random_restart(adj: &BitMatrix, restarts: usize, seed: u64) -> Vec<usize> {
    (0..restarts)
        .into_par_iter()
        .map(|r| {
            if r == 0 {
                greedy_in_order(adj, 0..adj.size())
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(r as u64);
                let mut order: Vec<usize> = (0..adj.size()).collect();
                order.shuffle(&mut rng);
                greedy_in_order(adj, order.into_iter())
            }
        })
        .reduce(Vec::new, |a, b| {
            // Larger wins; equal sizes go to the lexicographically smaller list.
            match a.len().cmp(&b.len()) {
                std::cmp::Ordering::Greater => a,
                std::cmp::Ordering::Less => b,
                std::cmp::Ordering::Equal => a.min(b),
            }
        })
}

/// A maximal independent set, sorted ascending.
pub fn greedy_independent_set(adj: &BitMatrix, config: &SolverConfig) -> Result<Vec<usize>> {
    Ok(match config.strategy {
        Strategy::GvGreedy => greedy_in_order(adj, 0..adj.size()),
        Strategy::MinDegreeGreedy => min_degree_greedy(adj),
        Strategy::RandomRestart { restarts } => {
            if restarts == 0 {
                return Err(Error::domain("random-restart needs at least one restart"));
            }
            random_restart(adj, restarts, config.seed)
        }
    })
}

/// Whether no two vertices of `set` are adjacent.
pub fn is_independent(adj: &BitMatrix, set: &[usize]) -> bool {
    let mut members = Bits::new(adj.size());
    set.iter().for_each(|&v| members.set(v));
    set.iter().all(|&v| adj.row(v).iter().zip(&members.0).all(|(a, b)| a & b == 0))
}

/// Whether every vertex outside `set` has a neighbor in it.
pub fn is_maximal(adj: &BitMatrix, set: &[usize]) -> bool {
    let mut covered = Bits::new(adj.size());
    for &v in set {
        covered.set(v);
        covered.or_row(adj.row(v));
    }
    (0..adj.size()).all(|v| covered.get(v))
}

/// A maximum independent set by branch and bound, sorted ascending.
pub fn exact_mis(adj: &BitMatrix, budget: &Budget) -> Result<Vec<usize>> {
    let size = adj.size();
    let limit = budget.exact_mis_vertices.min(64);
    if size > limit {
        return Err(Error::capacity("exact independent set", format!("{size} vertices"), limit as u64));
    }
    let nbr: Vec<u64> = (0..size).map(|v| adj.row(v).first().copied().unwrap_or(0)).collect();
    let all = if size == 64 { u64::MAX } else { (1u64 << size) - 1 };
    let mut best = 0u64;
    branch(&nbr, all, 0, &mut best);
    Ok((0..size).filter(|&v| best >> v & 1 == 1).collect())
}

fn branch(nbr: &[u64], mut cand: u64, mut chosen: u64, best: &mut u64) {
    // Vertices of degree <= 1 among the candidates belong to some maximum set.
    loop {
        let mut reduced = false;
        let mut rest = cand;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if cand >> v & 1 == 1 && (nbr[v] & cand).count_ones() <= 1 {
                chosen |= 1 << v;
                cand &= !(nbr[v] | 1 << v);
                reduced = true;
            }
        }
        if !reduced {
            break;
        }
    }
    if cand == 0 {
        let (c, b) = (chosen.count_ones(), best.count_ones());
        if c > b || (c == b && chosen.reverse_bits() > best.reverse_bits()) {
            *best = chosen;
        }
        return;
    }
    if chosen.count_ones() + cand.count_ones() <= best.count_ones() {
        return;
    }
    let mut pivot = cand.trailing_zeros() as usize;
    let mut rest = cand;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        if (nbr[v] & cand).count_ones() > (nbr[pivot] & cand).count_ones() {
            pivot = v;
        }
    }
    branch(nbr, cand & !(nbr[pivot] | 1 << pivot), chosen | 1 << pivot, best);
    branch(nbr, cand & !(1 << pivot), chosen, best);
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub config: SolverConfig,
    pub set: Vec<usize>,
    pub size: usize,
    /// `|V| / (Δ + 1)`.
    pub greedy_floor: f64,
    /// `(|V|/D) ln(min{D, K̂})`, reported only.
    pub independence_reference: Option<f64>,
    pub exact_size: Option<usize>,
}

/// Runs the solver and checks the output: independent, maximal and at least
/// `|V|/(Δ+1)`. A failed check is a contract error.
pub fn solve_report(graph: &ClassGraph, config: &SolverConfig, k_hat: Option<f64>, budget: &Budget) -> Result<SolveReport> {
    let adj = graph.adjacency();
    let set = greedy_independent_set(adj, config)?;
    if !is_independent(adj, &set) {
        return Err(Error::Contract("solver output is not independent".into()));
    }
    if !is_maximal(adj, &set) {
        return Err(Error::Contract("solver output is not maximal".into()));
    }
    let v = graph.num_vertices();
    let delta = graph.max_degree();
    if set.len() * (delta + 1) < v {
        return Err(Error::Contract(format!(
            "solver output {} is below the greedy floor {v}/{}",
            set.len(),
            delta + 1
        )));
    }
    let d = graph.degree_bound().to_f64().unwrap_or(f64::INFINITY);
    let independence_reference = k_hat.and_then(|k| independence_lower_bound(v as f64, d, k.min(d * d + 1.0)).ok());
    let exact_size = if v <= budget.exact_mis_vertices.min(64) {
        let exact = exact_mis(adj, budget)?;
        if exact.len() < set.len() {
            return Err(Error::Contract("solver output exceeds the exact maximum".into()));
        }
        Some(exact.len())
    } else {
        None
    };
    Ok(SolveReport {
        config: *config,
        size: set.len(),
        set,
        greedy_floor: if v == 0 { 0.0 } else { v as f64 / (delta + 1) as f64 },
        independence_reference,
        exact_size,
    })
}
