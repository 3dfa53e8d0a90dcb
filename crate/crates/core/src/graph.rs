//! Class graphs: one vertex per full-period rotation class with `d(x) >= d`,
//! an edge whenever two classes come within distance `d - 1`.
//!
//! Adjacency is a dense bit matrix. The graphs of interest are dense (average
//! degree is a sizeable fraction of `|V|`), so this is both smaller and faster
//! than neighbor lists, and neighborhood intersections become word-wise ANDs.

use std::fmt;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::bounds::{param_f64, param_text, Param};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::packed::Lanes;
use crate::volume::{ball_volume, cw_ball_volume};
use crate::words::{enumerate_classes, enumeration_cost, ClassFilter, CyclicClass};

/// Which code family the graph serves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum GraphMode {
    Hcc,
    /// Binary words of fixed weight.
    Ooc { weight: usize },
}

impl GraphMode {
    pub fn weight(&self) -> Option<usize> {
        match self {
            GraphMode::Hcc => None,
            GraphMode::Ooc { weight } => Some(*weight),
        }
    }
}

/// How edges are found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BuildStrategy {
    /// Pick whichever of the two below has the smaller estimated cost.
    #[default]
    Auto,
    /// Every vertex pair, every shift, with early exit.
    Pairwise,
    /// Walk the radius-`(d-1)` ball around each representative and look the
    /// words up in a table of all rotations of all representatives.
    BallEnumeration,
}

impl fmt::Display for BuildStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BuildStrategy::Auto => "auto",
            BuildStrategy::Pairwise => "pairwise",
            BuildStrategy::BallEnumeration => "ball-enumeration",
        })
    }
}

/// Square symmetric bit matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    size: usize,
    stride: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    pub fn new(size: usize) -> Self {
        let stride = size.div_ceil(64);
        BitMatrix {
            size,
            stride,
            bits: vec![0; stride * size],
        }
    }

    /// Symmetric matrix with the given undirected edges.
    pub fn from_edges(size: usize, edges: &[(usize, usize)]) -> Self {
        let mut m = BitMatrix::new(size);
        for &(u, v) in edges {
            if u != v {
                m.set(u, v);
                m.set(v, u);
            }
        }
        m
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> bool {
        self.bits[u * self.stride + v / 64] >> (v % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, u: usize, v: usize) {
        self.bits[u * self.stride + v / 64] |= 1 << (v % 64);
    }

    pub fn row(&self, u: usize) -> &[u64] {
        &self.bits[u * self.stride..(u + 1) * self.stride]
    }

    fn rows_mut(&mut self) -> impl IndexedParallelIterator<Item = &mut [u64]> {
        self.bits.par_chunks_mut(self.stride.max(1))
    }

    pub fn row_count(&self, u: usize) -> usize {
        self.row(u).iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Set columns of row `u`, ascending.
    pub fn row_iter(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(u).iter().enumerate().flat_map(|(k, &word)| BitIter { word }.map(move |b| k * 64 + b))
    }

    /// `|row(u) ∩ row(v)|`.
    pub fn common(&self, u: usize, v: usize) -> usize {
        self.row(u)
            .iter()
            .zip(self.row(v))
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }
}

struct BitIter {
    word: u64,
}

impl Iterator for BitIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.word == 0 {
            return None;
        }
        let b = self.word.trailing_zeros() as usize;
        self.word &= self.word - 1;
        Some(b)
    }
}

/// The graph `G_HCC` (or `G_OOC` with a weight).
#[derive(Debug, Clone)]
pub struct ClassGraph {
    n: usize,
    q: u16,
    d: usize,
    mode: GraphMode,
    vertices: Vec<CyclicClass>,
    lanes: Lanes,
    packed: Vec<u64>,
    adjacency: BitMatrix,
    degrees: Vec<usize>,
    edge_count: u64,
    degree_bound: BigUint,
    strategy: BuildStrategy,
}

impl ClassGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u16 {
        self.q
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn mode(&self) -> GraphMode {
        self.mode
    }

    /// Vertex classes in ascending order of canonical representative.
    pub fn vertices(&self) -> &[CyclicClass] {
        &self.vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> u64 {
        self.edge_count
    }

    pub fn degree(&self, v: usize) -> usize {
        self.degrees[v]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn max_degree(&self) -> usize {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency.get(u, v)
    }

    /// Sorted neighbor indices.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency.row_iter(v)
    }

    pub fn adjacency(&self) -> &BitMatrix {
        &self.adjacency
    }

    /// `D`: `Vol_q(n, d-1)`, or `Vol(n, d-1; w)` for a weight-`w` graph.
    pub fn degree_bound(&self) -> &BigUint {
        &self.degree_bound
    }

    /// The strategy actually used, never `Auto`.
    pub fn strategy(&self) -> BuildStrategy {
        self.strategy
    }

    /// `d(C(u), C(v))` between two vertices.
    pub fn vertex_distance(&self, u: usize, v: usize) -> usize {
        let (x, y) = (self.packed[u], self.packed[v]);
        (0..self.n)
            .map(|i| self.lanes.distance(x, self.lanes.rotate(y, i)))
            .min()
            .unwrap_or(0) as usize
    }
}

/// `min_{i,j} d(π_i a, π_j b)`, computed as `min_i d(a, π_i b)`.
pub fn class_distance(a: &CyclicClass, b: &CyclicClass) -> Result<usize> {
    let (x, y) = (a.representative(), b.representative());
    if x.len() != y.len() || x.q() != y.q() {
        return Err(Error::Dimension(format!(
            "classes over (n, q) = ({}, {}) and ({}, {})",
            x.len(),
            x.q(),
            y.len(),
            y.q()
        )));
    }
    Ok((0..x.len())
        .map(|i| crate::words::shift_pair_distance(x.symbols(), y.symbols(), i))
        .min()
        .unwrap_or(0))
}

/// `D` for the given mode.
pub fn degree_bound(n: usize, q: u16, d: usize, mode: GraphMode) -> Result<BigUint> {
    let t = d.saturating_sub(1).min(n);
    match mode {
        GraphMode::Hcc => ball_volume(n, q, t),
        GraphMode::Ooc { weight } => cw_ball_volume(n, weight, t.min(2 * weight)),
    }
}

/// Builds the class graph for `(n, q, d)` in the given mode.
pub fn build_graph(n: usize, q: u16, d: usize, mode: GraphMode, strategy: BuildStrategy, budget: &Budget) -> Result<ClassGraph> {
    crate::words::check_alphabet(q)?;
    if n < 2 {
        return Err(Error::domain(format!("class graphs need n >= 2, got n = {n}")));
    }
    if d == 0 {
        return Err(Error::domain("need d >= 1"));
    }
    if let GraphMode::Ooc { weight } = mode {
        if q != 2 {
            return Err(Error::Unsupported(format!("weight-constrained graphs need q = 2, got q = {q}")));
        }
        if weight > n {
            return Err(Error::domain(format!("weight {weight} exceeds n = {n}")));
        }
    }
    let lanes = Lanes::new(n, q);
    if !lanes.fits_u64() {
        return Err(Error::Unsupported(format!(
            "class graphs need n * ceil(log2 q) <= 64 bits, got {} bits",
            lanes.total_bits()
        )));
    }
    let degree_bound = degree_bound(n, q, d, mode)?;
    let vertices: Vec<CyclicClass> = if d > n {
        Vec::new()
    } else {
        let cost = enumeration_cost(n, q);
        if cost > u128::from(budget.enumeration) {
            return Err(Error::capacity("class enumeration", format!("{q}^{n} words"), budget.enumeration));
        }
        let filter = ClassFilter {
            full_period_only: true,
            weight: mode.weight(),
            min_auto_distance: Some(d),
        };
        let mut vertices = Vec::new();
        for class in enumerate_classes(n, q, filter)? {
            if vertices.len() == budget.max_vertices {
                return Err(Error::capacity("class graph vertices", format!("more than {}", budget.max_vertices), budget.max_vertices as u64));
            }
            vertices.push(class);
        }
        vertices
    };
    let packed: Vec<u64> = vertices.iter().map(|c| lanes.pack_word(c.representative())).collect();
    let chosen = match strategy {
        BuildStrategy::Auto => choose_strategy(n, q, d, packed.len()),
        other => other,
    };
    let mut adjacency = BitMatrix::new(packed.len());
    match chosen {
        BuildStrategy::BallEnumeration => fill_by_balls(&mut adjacency, &lanes, &packed, d - 1),
        _ => fill_pairwise(&mut adjacency, &lanes, &packed, d - 1),
    }
    let degrees: Vec<usize> = (0..packed.len()).map(|v| adjacency.row_count(v)).collect();
    let edge_count = degrees.iter().map(|&k| k as u64).sum::<u64>() / 2;
    Ok(ClassGraph {
        n,
        q,
        d,
        mode,
        vertices,
        lanes,
        packed,
        adjacency,
        degrees,
        edge_count,
        degree_bound,
        strategy: chosen,
    })
}

fn choose_strategy(n: usize, q: u16, d: usize, vertices: usize) -> BuildStrategy {
    let v = vertices as f64;
    let pairwise = v * v / 2.0 * n as f64;
    // Measured: one ball member (recursive step plus hash lookup) costs about
    // as much as 16 packed shift comparisons.
    let ball = ball_volume(n, q, (d - 1).min(n)).ok().and_then(|b| b.to_f64()).unwrap_or(f64::INFINITY);
    let balls = v * ball * 16.0 + v * n as f64;
    if balls < pairwise {
        BuildStrategy::BallEnumeration
    } else {
        BuildStrategy::Pairwise
    }
}

fn fill_pairwise(adjacency: &mut BitMatrix, lanes: &Lanes, packed: &[u64], radius: usize) {
    match lanes.bits_per_symbol() {
        1 => scan_pairs::<1>(adjacency, lanes, packed, radius as u32),
        2 => scan_pairs::<2>(adjacency, lanes, packed, radius as u32),
        4 => scan_pairs::<4>(adjacency, lanes, packed, radius as u32),
        _ => scan_pairs::<8>(adjacency, lanes, packed, radius as u32),
    }
    mirror_upper(adjacency);
}

/// Upper triangle of the adjacency, with the lane width fixed at compile time.
fn scan_pairs<const BITS: u32>(adjacency: &mut BitMatrix, lanes: &Lanes, packed: &[u64], radius: u32) {
    let low = match BITS {
        1 => u64::MAX,
        2 => 0x5555_5555_5555_5555,
        4 => 0x1111_1111_1111_1111,
        _ => 0x0101_0101_0101_0101,
    };
    let distance = |x: u64, y: u64| {
        let mut diff = x ^ y;
        let mut k = 1;
        while k < BITS {
            diff |= diff >> k;
            k <<= 1;
        }
        (diff & low).count_ones()
    };
    adjacency.rows_mut().enumerate().for_each(|(u, row)| {
        let rotations = lanes.rotations(packed[u]);
        for (v, &y) in packed.iter().enumerate().skip(u + 1) {
            if rotations.iter().any(|&x| distance(x, y) <= radius) {
                row[v / 64] |= 1 << (v % 64);
            }
        }
    });
}

fn mirror_upper(adjacency: &mut BitMatrix) {
    for u in 0..adjacency.size() {
        let upper: Vec<usize> = adjacency.row_iter(u).filter(|&v| v > u).collect();
        for v in upper {
            adjacency.set(v, u);
        }
    }
}

fn fill_by_balls(adjacency: &mut BitMatrix, lanes: &Lanes, packed: &[u64], radius: usize) {
    let mut owner: FxHashMap<u64, u32> = FxHashMap::default();
    owner.reserve(packed.len() * lanes.n());
    for (v, &x) in packed.iter().enumerate() {
        for y in lanes.rotations(x) {
            owner.insert(y, v as u32);
        }
    }
    adjacency.rows_mut().enumerate().for_each(|(u, row)| {
        for_each_in_packed_ball(lanes, packed[u], radius, &mut |y| {
            if let Some(&v) = owner.get(&y) {
                let v = v as usize;
                if v != u {
                    row[v / 64] |= 1 << (v % 64);
                }
            }
        });
    });
}

/// Visits every word within distance `radius` of `center` exactly once.
pub(crate) fn for_each_in_packed_ball(lanes: &Lanes, center: u64, radius: usize, visit: &mut impl FnMut(u64)) {
    fn rec(lanes: &Lanes, x: u64, center: u64, start: usize, remaining: usize, visit: &mut impl FnMut(u64)) {
        visit(x);
        if remaining == 0 {
            return;
        }
        for pos in start..lanes.n() {
            let original = lanes.symbol(center, pos);
            for s in 0..lanes.q() as u8 {
                if s != original {
                    rec(lanes, lanes.with_symbol(x, pos, s), center, pos + 1, remaining - 1, visit);
                }
            }
        }
    }
    rec(lanes, center, center, 0, radius, visit);
}

/// Degree summary of a built graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeStats {
    pub vertices: usize,
    pub edges: u64,
    pub max_degree: usize,
    pub mean_degree: f64,
    /// `(degree, number of vertices)` for every degree that occurs.
    pub histogram: Vec<(usize, usize)>,
    pub degree_bound: String,
}

/// Degree statistics, failing with a contract error if the maximum degree
/// exceeds `D`.
pub fn degree_stats(graph: &ClassGraph) -> Result<DegreeStats> {
    let mut counts: Vec<usize> = vec![0; graph.max_degree() + 1];
    for &k in graph.degrees() {
        counts[k] += 1;
    }
    let histogram = counts.into_iter().enumerate().filter(|&(_, c)| c > 0).collect();
    let max_degree = graph.max_degree();
    if BigUint::from(max_degree) > graph.degree_bound {
        return Err(Error::Contract(format!(
            "maximum degree {max_degree} exceeds the ball volume {}",
            graph.degree_bound
        )));
    }
    let v = graph.num_vertices();
    Ok(DegreeStats {
        vertices: v,
        edges: graph.edge_count(),
        max_degree,
        mean_degree: if v == 0 { 0.0 } else { 2.0 * graph.edge_count() as f64 / v as f64 },
        histogram,
        degree_bound: graph.degree_bound.to_string(),
    })
}

/// Per-vertex split of the neighborhood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexSparsity {
    /// Neighbors at class distance `<= d - τn/2`.
    pub s: usize,
    /// Neighbors at class distance in `(d - τn/2, d - 1]`.
    pub t: usize,
    /// Edges with both endpoints in the neighborhood.
    pub neighborhood_edges: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsityDiagnostics {
    pub tau: String,
    /// `d - τn/2`.
    pub split: f64,
    pub per_vertex: Vec<VertexSparsity>,
    pub max_s: usize,
    pub max_neighborhood_edges: u64,
    /// `D² / max e(N(v))`, or `D² + 1` when every neighborhood is edgeless.
    pub k_hat: f64,
    pub degree_bound: f64,
}

/// Elementary operations [`sparsity_diagnostics`] will perform.
pub fn sparsity_cost(graph: &ClassGraph) -> u64 {
    let stride = graph.num_vertices().div_ceil(64) as u64;
    graph
        .degrees()
        .iter()
        .map(|&k| k as u64 * (stride + graph.n() as u64))
        .sum()
}

/// `S`/`T` split sizes, neighborhood edge counts and `K̂`.
pub fn sparsity_diagnostics(graph: &ClassGraph, tau: Param, budget: &Budget) -> Result<SparsityDiagnostics> {
    if tau <= Ratio::from_integer(0) {
        return Err(Error::domain(format!("need tau > 0, got {}", param_text(tau))));
    }
    let cost = sparsity_cost(graph);
    if cost > budget.work {
        return Err(Error::capacity("sparsity diagnostics", format!("{cost} operations"), budget.work));
    }
    // S holds neighbors with d(C(v), C(u)) <= d - τn/2, compared exactly.
    let split = Ratio::from_integer(graph.d() as i64) - tau * Ratio::from_integer(graph.n() as i64) / 2;
    let per_vertex: Vec<VertexSparsity> = (0..graph.num_vertices())
        .into_par_iter()
        .map(|v| {
            let mut s = 0;
            let mut twice_edges = 0u64;
            for u in graph.neighbors(v) {
                if Ratio::from_integer(graph.vertex_distance(v, u) as i64) <= split {
                    s += 1;
                }
                twice_edges += graph.adjacency.common(u, v) as u64;
            }
            VertexSparsity {
                s,
                t: graph.degree(v) - s,
                neighborhood_edges: twice_edges / 2,
            }
        })
        .collect();
    let max_neighborhood_edges = per_vertex.iter().map(|p| p.neighborhood_edges).max().unwrap_or(0);
    let degree_bound = graph.degree_bound().to_f64().unwrap_or(f64::INFINITY);
    let d2 = degree_bound * degree_bound;
    Ok(SparsityDiagnostics {
        tau: param_text(tau),
        split: param_f64(split),
        max_s: per_vertex.iter().map(|p| p.s).max().unwrap_or(0),
        per_vertex,
        max_neighborhood_edges,
        k_hat: if max_neighborhood_edges == 0 {
            d2 + 1.0
        } else {
            d2 / max_neighborhood_edges as f64
        },
        degree_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::{class_of, hamming_distance, min_cyclic_autodistance, Word};
    use std::collections::BTreeSet;

    fn w(text: &str) -> Word {
        Word::parse(text, 2).unwrap()
    }

    fn build(n: usize, q: u16, d: usize, mode: GraphMode, strategy: BuildStrategy) -> ClassGraph {
        build_graph(n, q, d, mode, strategy, &Budget::default()).unwrap()
    }

    #[test]
    fn class_distance_examples() {
        let (a, b) = (class_of(&w("001")), class_of(&w("011")));
        assert_eq!(class_distance(&a, &b).unwrap(), 1);
        assert_eq!(class_distance(&b, &a).unwrap(), 1);
        assert_eq!(class_distance(&class_of(&w("0001")), &class_of(&w("0111"))).unwrap(), 2);
        assert!(class_distance(&a, &class_of(&w("0011"))).is_err());
    }

    #[test]
    fn collapsed_minimum_identity() {
        for n in 2..=8 {
            let classes: Vec<_> = enumerate_classes(n, 2, ClassFilter::default()).unwrap().collect();
            for a in &classes {
                for b in &classes {
                    let full = a
                        .members()
                        .iter()
                        .flat_map(|x| b.members().into_iter().map(move |y| hamming_distance(x, &y).unwrap()))
                        .min()
                        .unwrap();
                    assert_eq!(class_distance(a, b).unwrap(), full);
                }
            }
        }
    }

    #[test]
    fn vertex_sets_match_brute_force() {
        for n in 2..=10 {
            for d in 1..=n {
                let g = build(n, 2, d, GraphMode::Hcc, BuildStrategy::Auto);
                let mut expected = BTreeSet::new();
                for index in 0..1u64 << n {
                    let x = Word::from_index(index, n, 2).unwrap();
                    let rots: BTreeSet<Word> = x.rotations().collect();
                    if rots.len() == n && min_cyclic_autodistance(&x).unwrap() >= d {
                        expected.insert(rots.into_iter().next().unwrap());
                    }
                }
                let got: BTreeSet<Word> = g.vertices().iter().map(|c| c.representative().clone()).collect();
                assert_eq!(got, expected, "n = {n}, d = {d}");
            }
        }
    }

    #[test]
    fn edges_match_double_loop() {
        for (q, max_n) in [(2u16, 8usize), (3, 6)] {
            for n in 2..=max_n {
                for d in 1..=n {
                    let g = build(n, q, d, GraphMode::Hcc, BuildStrategy::Pairwise);
                    let members: Vec<Vec<Word>> = g.vertices().iter().map(|c| c.members()).collect();
                    for u in 0..g.num_vertices() {
                        assert!(!g.has_edge(u, u));
                        for v in 0..g.num_vertices() {
                            if u == v {
                                continue;
                            }
                            let dist = members[u]
                                .iter()
                                .flat_map(|x| members[v].iter().map(move |y| hamming_distance(x, y).unwrap()))
                                .min()
                                .unwrap();
                            assert_eq!(g.has_edge(u, v), dist < d, "n = {n}, q = {q}, d = {d}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn strategies_agree() {
        let cases = [
            (8, 2, 3, GraphMode::Hcc),
            (9, 2, 4, GraphMode::Hcc),
            (6, 3, 3, GraphMode::Hcc),
            (7, 3, 4, GraphMode::Hcc),
            (6, 4, 2, GraphMode::Hcc),
            (10, 2, 3, GraphMode::Ooc { weight: 4 }),
            (12, 2, 4, GraphMode::Ooc { weight: 6 }),
        ];
        for (n, q, d, mode) in cases {
            let a = build(n, q, d, mode, BuildStrategy::Pairwise);
            let b = build(n, q, d, mode, BuildStrategy::BallEnumeration);
            assert_eq!(a.strategy(), BuildStrategy::Pairwise);
            assert_eq!(b.strategy(), BuildStrategy::BallEnumeration);
            assert_eq!(a.adjacency(), b.adjacency(), "n = {n}, q = {q}, d = {d}");
        }
    }

    #[test]
    fn ooc_example() {
        let g = build(7, 2, 3, GraphMode::Ooc { weight: 3 }, BuildStrategy::Auto);
        let all: Vec<_> = enumerate_classes(7, 2, ClassFilter { full_period_only: true, weight: Some(3), min_auto_distance: None })
            .unwrap()
            .collect();
        assert_eq!(all.len(), 5);
        for c in g.vertices() {
            assert_eq!(c.representative().weight(), 3);
            assert!(c.auto_distance().unwrap() >= 3);
        }
        let reps: Vec<String> = g.vertices().iter().map(|c| c.representative().to_string()).collect();
        assert_eq!(reps, ["0001011", "0001101"]);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.degree_bound(), &BigUint::from(13u32));
    }

    #[test]
    fn hcc_example() {
        let g = build(5, 2, 2, GraphMode::Hcc, BuildStrategy::Auto);
        let reps: Vec<String> = g.vertices().iter().map(|c| c.representative().to_string()).collect();
        assert_eq!(reps, ["00001", "00011", "00101", "00111", "01011", "01111"]);
        assert_eq!(g.edge_count(), 8);
    }

    #[test]
    fn empty_and_errors() {
        let g = build(5, 2, 6, GraphMode::Hcc, BuildStrategy::Auto);
        assert_eq!(g.num_vertices(), 0);
        assert_eq!(degree_stats(&g).unwrap().max_degree, 0);
        assert!(build_graph(1, 2, 1, GraphMode::Hcc, BuildStrategy::Auto, &Budget::default()).is_err());
        assert!(build_graph(5, 3, 2, GraphMode::Ooc { weight: 2 }, BuildStrategy::Auto, &Budget::default()).is_err());
        assert!(build_graph(40, 3, 2, GraphMode::Hcc, BuildStrategy::Auto, &Budget::default()).is_err());
        let tight = Budget { max_vertices: 3, ..Budget::default() };
        assert!(matches!(
            build_graph(8, 2, 2, GraphMode::Hcc, BuildStrategy::Auto, &tight),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn packed_ball_sizes() {
        for (n, q, t) in [(6usize, 2u16, 2usize), (5, 3, 3), (4, 5, 4)] {
            let lanes = Lanes::new(n, q);
            let center = lanes.pack(&vec![1; n]);
            let mut seen = BTreeSet::new();
            for_each_in_packed_ball(&lanes, center, t, &mut |y| {
                assert!(lanes.distance(center, y) as usize <= t);
                assert!(seen.insert(y));
            });
            assert_eq!(BigUint::from(seen.len()), ball_volume(n, q, t).unwrap());
        }
    }

    #[test]
    fn degree_histogram_fixture() {
        let g = build(6, 2, 2, GraphMode::Hcc, BuildStrategy::Auto);
        let stats = degree_stats(&g).unwrap();
        assert_eq!(stats.vertices, 9);
        assert_eq!(stats.histogram, vec![(2, 2), (4, 7)]);
        assert_eq!(stats.edges, 16);
        assert_eq!(stats.degree_bound, "7");
    }

    #[test]
    fn sparsity_fixture() {
        let g = build(8, 2, 3, GraphMode::Hcc, BuildStrategy::Auto);
        let diag = sparsity_diagnostics(&g, Ratio::new(1, 4), &Budget::default()).unwrap();
        assert_eq!(diag.split, 2.0);
        for (v, p) in diag.per_vertex.iter().enumerate() {
            assert_eq!(p.s + p.t, g.degree(v));
        }
        // With τn/2 = 1 the split sits at d - 1, so every neighbor lands in S.
        assert!(diag.per_vertex.iter().all(|p| p.t == 0));
        assert_eq!(g.num_vertices(), 10);
        assert_eq!(diag.per_vertex.iter().map(|p| p.s).sum::<usize>(), 66);
        assert_eq!(diag.per_vertex.iter().map(|p| p.neighborhood_edges).sum::<u64>(), 126);
        assert_eq!(diag.max_s, 7);
        assert_eq!(diag.max_neighborhood_edges, 15);
        assert_eq!(diag.k_hat, 1369.0 / 15.0);
    }
}
