//! Codes assembled from independent sets, and exhaustive verification.
//!
//! Verifiers sort their input first, so verdicts and witnesses depend only on
//! the set of words. Minimum distances are found exactly, either by growing
//! Hamming spheres around class representatives and looking the words up in
//! a hash set or by a pairwise scan, whichever costs less. Work beyond the
//! budget is a capacity error, never a sampled answer.

use std::collections::BTreeMap;

use num_traits::ToPrimitive;
use rayon::prelude::*;
use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::graph::ClassGraph;
use crate::solver::is_independent;
use crate::volume::{binomial, for_each_in_sphere};
use crate::words::{distance_unchecked, least_rotation, shift_pair_distance, Word};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CodeKind {
    Hcc,
    Ooc,
    Fhs,
    Wmuc,
}

impl CodeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CodeKind::Hcc => "HCC",
            CodeKind::Ooc => "OOC",
            CodeKind::Fhs => "FHS",
            CodeKind::Wmuc => "WMUC",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeParams {
    pub n: usize,
    pub q: u16,
    /// Claimed minimum distance.
    pub d: usize,
    pub weight: Option<usize>,
    pub lambda: Option<usize>,
    pub kappa: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeArtifact {
    pub kind: CodeKind,
    pub params: CodeParams,
    pub words: Vec<Word>,
    /// How the code was produced: solver, graph and seed details.
    pub provenance: BTreeMap<String, serde_json::Value>,
}

impl CodeArtifact {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Which property a failed verification violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    Dimension,
    Duplicate,
    ShiftClosure,
    FullPeriod,
    Weight,
    Distance,
    Correlation,
    PrefixSuffix,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub check: Check,
    pub message: String,
    /// The offending word or pair.
    pub words: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shift: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance: Option<usize>,
}

impl Failure {
    fn new(check: Check, message: impl Into<String>, words: &[&Word]) -> Self {
        Failure {
            check,
            message: message.into(),
            words: words.iter().map(|w| w.to_string()).collect(),
            shift: None,
            length: None,
            distance: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub pass: bool,
    pub words: usize,
    /// Exact minimum distance, when the code has two or more words and the
    /// checks got that far.
    pub min_distance: Option<usize>,
    pub failure: Option<Failure>,
    pub warnings: Vec<String>,
}

impl Verdict {
    fn pass(words: usize, min_distance: Option<usize>) -> Self {
        let warnings = if words == 0 {
            vec!["empty code: passes vacuously".to_string()]
        } else {
            Vec::new()
        };
        Verdict {
            pass: true,
            words,
            min_distance,
            failure: None,
            warnings,
        }
    }

    fn fail(words: usize, min_distance: Option<usize>, failure: Failure) -> Self {
        Verdict {
            pass: false,
            words,
            min_distance,
            failure: Some(failure),
            warnings: Vec::new(),
        }
    }
}

/// Sorts the words and checks lengths, alphabets and duplicates.
fn prepare(words: &[Word], n: usize, q: u16) -> std::result::Result<Vec<Word>, Failure> {
    let mut sorted = words.to_vec();
    sorted.sort();
    for w in &sorted {
        if w.len() != n || w.q() != q {
            return Err(Failure::new(
                Check::Dimension,
                format!("word has (n, q) = ({}, {}), expected ({n}, {q})", w.len(), w.q()),
                &[w],
            ));
        }
    }
    if let Some(pair) = sorted.windows(2).find(|p| p[0] == p[1]) {
        let mut f = Failure::new(Check::Duplicate, "word listed twice", &[&pair[0]]);
        f.distance = Some(0);
        return Err(f);
    }
    Ok(sorted)
}

/// A closest pair `(distance, x, z)` with `x` a search center and `z` a code
/// word outside the group of `x`.
type Closest = Option<(usize, Word, Word)>;

/// Exact minimum of `d(x, z)` over centers `x` and code words `z` with
/// `!same_group(x, z)`. `centers` and `code` are sorted.
fn closest_pair(
    centers: &[Word],
    code: &[Word],
    q: u16,
    same_group: &(impl Fn(&Word, &[u8]) -> bool + Sync),
    budget: &Budget,
) -> Result<Closest> {
    if centers.is_empty() || code.is_empty() {
        return Ok(None);
    }
    let n = centers[0].len();
    let c = centers.len() as f64;
    let pairwise_cost = c * code.len() as f64 * n as f64;
    let members: FxHashSet<&[u8]> = code.iter().map(|w| w.symbols()).collect();
    let mut spent = 0.0;
    for r in 1..=n {
        let sphere = binomial(n as u64, r as u64).to_f64().unwrap_or(f64::INFINITY) * f64::from(q - 1).powi(r as i32);
        let sphere_cost = c * sphere * n as f64;
        if sphere_cost > pairwise_cost {
            break;
        }
        spent += sphere_cost;
        if spent > budget.work as f64 {
            return Err(Error::capacity("minimum distance search", format!("{spent:.0} operations"), budget.work));
        }
        let hit = centers.par_iter().find_map_first(|x| {
            let mut buf = x.symbols().to_vec();
            let mut best: Option<Vec<u8>> = None;
            for_each_in_sphere(&mut buf, q, r, &mut |z| {
                if members.contains(z) && !same_group(x, z) && best.as_deref().is_none_or(|b| z < b) {
                    best = Some(z.to_vec());
                }
                true
            });
            best.map(|z| (x.clone(), Word::from_raw(z, q)))
        });
        if let Some((x, z)) = hit {
            return Ok(Some((r, x, z)));
        }
    }
    if spent + pairwise_cost > budget.work as f64 {
        return Err(Error::capacity(
            "minimum distance search",
            format!("{:.0} operations", spent + pairwise_cost),
            budget.work,
        ));
    }
    let best = centers
        .par_iter()
        .enumerate()
        .filter_map(|(i, x)| {
            let mut best: Option<(usize, usize, usize)> = None;
            for (j, z) in code.iter().enumerate() {
                let dist = distance_unchecked(x.symbols(), z.symbols());
                if best.is_none_or(|b| dist < b.0) && !same_group(x, z.symbols()) {
                    best = Some((dist, i, j));
                }
            }
            best
        })
        .min();
    Ok(best.map(|(dist, i, j)| (dist, centers[i].clone(), code[j].clone())))
}

fn is_canonical(w: &Word) -> bool {
    least_rotation(w.symbols()) == 0
}

/// The HCC checks on a sorted, duplicate-free list.
fn check_cyclic(sorted: &[Word], d: usize, budget: &Budget) -> Result<Verdict> {
    let m = sorted.len();
    let set: FxHashSet<&Word> = sorted.iter().collect();
    for x in sorted {
        let next = x.cyclic_shift(1);
        if !set.contains(&next) {
            let mut f = Failure::new(Check::ShiftClosure, format!("cyclic shift {next} of {x} is missing"), &[x, &next]);
            f.shift = Some(1);
            return Ok(Verdict::fail(m, None, f));
        }
    }
    for x in sorted {
        let period = x.period();
        if period != x.len() {
            let mut f = Failure::new(Check::FullPeriod, format!("{x} has only {period} distinct rotations"), &[x]);
            f.shift = Some(period);
            return Ok(Verdict::fail(m, None, f));
        }
    }
    let reps: Vec<Word> = sorted.iter().filter(|w| is_canonical(w)).cloned().collect();
    // Within a class the closest rotation pair is d(x); across classes the
    // sphere search skips the center's own rotations.
    let auto = reps
        .iter()
        .filter(|x| x.len() >= 2)
        .map(|x| {
            let (dist, i) = (1..x.len()).map(|i| (shift_pair_distance(x.symbols(), x.symbols(), i), i)).min().unwrap();
            (dist, x.clone(), x.cyclic_shift(i))
        })
        .min();
    let same_class = |x: &Word, z: &[u8]| is_rotation_of(x.symbols(), z);
    let cross = closest_pair(&reps, sorted, sorted.first().map_or(2, Word::q), &same_class, budget)?;
    let closest = match (auto, cross) {
        (Some(a), Some(c)) => Some(a.min(c)),
        (a, c) => a.or(c),
    };
    let min_distance = closest.as_ref().map(|c| c.0);
    if let Some((dist, x, z)) = closest {
        if dist < d {
            let mut f = Failure::new(Check::Distance, format!("d({x}, {z}) = {dist} < {d}"), &[&x, &z]);
            f.distance = Some(dist);
            return Ok(Verdict::fail(m, min_distance, f));
        }
    }
    Ok(Verdict::pass(m, min_distance))
}

fn is_rotation_of(x: &[u8], z: &[u8]) -> bool {
    let n = x.len();
    (0..n).any(|i| (0..n).all(|j| x[(j + i) % n] == z[j]))
}

/// Checks shift closure, full period and minimum distance `>= d`, in that
/// order, returning the first failure with a witness.
pub fn verify_hcc(words: &[Word], n: usize, q: u16, d: usize, budget: &Budget) -> Result<Verdict> {
    match prepare(words, n, q) {
        Err(f) => Ok(Verdict::fail(words.len(), None, f)),
        Ok(sorted) => check_cyclic(&sorted, d, budget),
    }
}

/// [`verify_hcc`] plus constant weight `w` on every word.
pub fn verify_ooc(words: &[Word], n: usize, w: usize, d: usize, budget: &Budget) -> Result<Verdict> {
    if let Some(x) = words.first() {
        if x.q() != 2 {
            return Err(Error::Unsupported(format!("optical orthogonal codes are binary, got q = {}", x.q())));
        }
    }
    let sorted = match prepare(words, n, 2) {
        Err(f) => return Ok(Verdict::fail(words.len(), None, f)),
        Ok(sorted) => sorted,
    };
    if let Some(x) = sorted.iter().find(|x| x.weight() != w) {
        let f = Failure::new(Check::Weight, format!("{x} has weight {}, expected {w}", x.weight()), &[x]);
        return Ok(Verdict::fail(sorted.len(), None, f));
    }
    check_cyclic(&sorted, d, budget)
}

/// `H_{x,y}(i) = n - d(x, π_i(y))`.
pub fn hamming_correlation(x: &Word, y: &Word, i: usize) -> Result<usize> {
    if x.len() != y.len() || x.q() != y.q() {
        return Err(Error::Dimension(format!(
            "words of (n, q) = ({}, {}) and ({}, {})",
            x.len(),
            x.q(),
            y.len(),
            y.q()
        )));
    }
    Ok(x.len() - shift_pair_distance(x.symbols(), y.symbols(), i))
}

/// Largest Hamming correlations of a sequence set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrelationReport {
    /// Over all `x` and `0 < i < n`.
    pub max_auto: usize,
    /// Over all `x != y` and all `i`; absent for fewer than two sequences.
    pub max_cross: Option<usize>,
    pub lambda_achieved: usize,
    /// `(x, y, i)` attaining `lambda_achieved`.
    pub witness: Option<(String, String, usize)>,
}

/// Exhaustive correlation scan of a set of sequences, each of full period
/// and from distinct classes (checked by the caller).
fn correlation_report(seqs: &[Word], budget: &Budget) -> Result<CorrelationReport> {
    if seqs.is_empty() {
        return Ok(CorrelationReport {
            max_auto: 0,
            max_cross: None,
            lambda_achieved: 0,
            witness: None,
        });
    }
    let n = seqs[0].len();
    let q = seqs[0].q();
    let reps: Vec<Word> = {
        let mut r: Vec<Word> = seqs.iter().map(Word::canonical_rotation).collect();
        r.sort();
        r
    };
    let mut auto_best: Option<(usize, Word, usize)> = None;
    for x in seqs {
        for i in 1..n {
            let h = n - shift_pair_distance(x.symbols(), x.symbols(), i);
            if auto_best.as_ref().is_none_or(|b| h > b.0) {
                auto_best = Some((h, x.clone(), i));
            }
        }
    }
    let max_auto = auto_best.as_ref().map_or(0, |b| b.0);
    let code: Vec<Word> = {
        let mut all: Vec<Word> = reps.iter().flat_map(|r| r.rotations().collect::<Vec<_>>()).collect();
        all.sort();
        all
    };
    let cross = closest_pair(&reps, &code, q, &|x: &Word, z: &[u8]| is_rotation_of(x.symbols(), z), budget)?;
    let max_cross = cross.as_ref().map(|c| n - c.0);
    let (lambda_achieved, witness) = match (&auto_best, &cross) {
        (_, Some((dist, x, z))) if n - dist > max_auto => {
            // x = π_a(xs) and z = π_c(ys) for input sequences xs, ys, so the
            // pair is H_{xs,ys}(c - a).
            let locate = |target: &Word| {
                seqs.iter()
                    .find_map(|s| (0..n).find(|&k| s.cyclic_shift(k) == *target).map(|k| (s, k)))
                    .unwrap()
            };
            let ((xs, a), (ys, c)) = (locate(x), locate(z));
            (n - dist, Some((xs.to_string(), ys.to_string(), (c + n - a) % n)))
        }
        (Some((h, x, i)), _) => (*h, Some((x.to_string(), x.to_string(), *i))),
        _ => (0, None),
    };
    Ok(CorrelationReport {
        max_auto,
        max_cross,
        lambda_achieved,
        witness,
    })
}

/// Checks that a sequence set has all auto- and cross-correlations `<= λ`.
pub fn verify_fhs(words: &[Word], n: usize, q: u16, lambda: usize, budget: &Budget) -> Result<(Verdict, Option<CorrelationReport>)> {
    let sorted = match prepare(words, n, q) {
        Err(f) => return Ok((Verdict::fail(words.len(), None, f), None)),
        Ok(sorted) => sorted,
    };
    let m = sorted.len();
    for x in &sorted {
        let period = x.period();
        if period != n {
            let mut f = Failure::new(Check::Correlation, format!("H({x}, {x}) at shift {period} is {n}"), &[x]);
            f.shift = Some(period);
            return Ok((Verdict::fail(m, None, f), None));
        }
    }
    let mut seen: BTreeMap<Word, &Word> = BTreeMap::new();
    for x in &sorted {
        if let Some(y) = seen.insert(x.canonical_rotation(), x) {
            let i = (0..n).find(|&i| x.cyclic_shift(i) == *y).unwrap_or(0);
            let mut f = Failure::new(Check::Correlation, format!("{y} and {x} are rotations of each other"), &[y, x]);
            f.shift = Some(i);
            return Ok((Verdict::fail(m, None, f), None));
        }
    }
    let report = correlation_report(&sorted, budget)?;
    if report.lambda_achieved > lambda {
        let (x, y, i) = report.witness.clone().unwrap();
        let f = Failure {
            check: Check::Correlation,
            message: format!("correlation {} exceeds lambda = {lambda}", report.lambda_achieved),
            words: vec![x, y],
            shift: Some(i),
            length: None,
            distance: Some(n - report.lambda_achieved),
        };
        return Ok((Verdict::fail(m, None, f), Some(report)));
    }
    Ok((Verdict::pass(m, None), Some(report)))
}

/// Checks that no prefix of length `ℓ ∈ [κ, n-1]` of any word equals the
/// length-`ℓ` suffix of any word, the same word included.
pub fn verify_wmuc(words: &[Word], n: usize, q: u16, kappa: usize) -> Result<Verdict> {
    if kappa == 0 || kappa > n {
        return Err(Error::domain(format!("need 1 <= kappa <= n = {n}, got {kappa}")));
    }
    let sorted = match prepare(words, n, q) {
        Err(f) => return Ok(Verdict::fail(words.len(), None, f)),
        Ok(sorted) => sorted,
    };
    for len in kappa..n {
        let mut suffixes: BTreeMap<&[u8], &Word> = BTreeMap::new();
        for y in &sorted {
            suffixes.entry(&y.symbols()[n - len..]).or_insert(y);
        }
        for x in &sorted {
            if let Some(y) = suffixes.get(&x.symbols()[..len]) {
                let mut f = Failure::new(
                    Check::PrefixSuffix,
                    format!("length-{len} prefix of {x} equals the suffix of {y}"),
                    &[x, y],
                );
                f.length = Some(len);
                return Ok(Verdict::fail(sorted.len(), None, f));
            }
        }
    }
    Ok(Verdict::pass(sorted.len(), None))
}

/// Minimum distance of an arbitrary code, by the same exact search.
pub fn code_min_distance(words: &[Word], budget: &Budget) -> Result<Option<(usize, Word, Word)>> {
    let mut sorted = words.to_vec();
    sorted.sort();
    let q = sorted.first().map_or(2, Word::q);
    closest_pair(&sorted, &sorted, q, &|x: &Word, z: &[u8]| x.symbols() == z, budget)
}

/// Expands the classes of an independent set into a cyclic code.
pub fn assemble(graph: &ClassGraph, set: &[usize]) -> Result<CodeArtifact> {
    if let Some(&v) = set.iter().find(|&&v| v >= graph.num_vertices()) {
        return Err(Error::Contract(format!("vertex {v} is not in the graph")));
    }
    if !is_independent(graph.adjacency(), set) {
        return Err(Error::Contract("vertex set is not independent".into()));
    }
    let mut words: Vec<Word> = set.iter().flat_map(|&v| graph.vertices()[v].members()).collect();
    words.sort();
    words.dedup();
    let weight = graph.mode().weight();
    Ok(CodeArtifact {
        kind: if weight.is_some() { CodeKind::Ooc } else { CodeKind::Hcc },
        params: CodeParams {
            n: graph.n(),
            q: graph.q(),
            d: graph.d(),
            weight,
            lambda: None,
            kappa: None,
        },
        words,
        provenance: BTreeMap::new(),
    })
}

/// Verifies an artifact according to its kind.
pub fn verify_artifact(code: &CodeArtifact, budget: &Budget) -> Result<Verdict> {
    let p = &code.params;
    match code.kind {
        CodeKind::Hcc => verify_hcc(&code.words, p.n, p.q, p.d, budget),
        CodeKind::Ooc => {
            let w = p.weight.ok_or_else(|| Error::domain("OOC needs a weight"))?;
            if p.q != 2 {
                return Err(Error::Unsupported(format!("optical orthogonal codes are binary, got q = {}", p.q)));
            }
            verify_ooc(&code.words, p.n, w, p.d, budget)
        }
        CodeKind::Fhs => {
            let lambda = p.lambda.ok_or_else(|| Error::domain("FHS needs lambda"))?;
            let (mut verdict, _) = verify_fhs(&code.words, p.n, p.q, lambda, budget)?;
            if verdict.pass {
                if let Some(w) = p.weight {
                    weight_check(&code.words, w, &mut verdict);
                }
            }
            Ok(verdict)
        }
        CodeKind::Wmuc => {
            let kappa = p.kappa.ok_or_else(|| Error::domain("WMUC needs kappa"))?;
            let mut verdict = verify_wmuc(&code.words, p.n, p.q, kappa)?;
            if !verdict.pass {
                return Ok(verdict);
            }
            if let Some(w) = p.weight {
                weight_check(&code.words, w, &mut verdict);
                if !verdict.pass {
                    return Ok(verdict);
                }
            }
            if let Some((dist, x, z)) = code_min_distance(&code.words, budget)? {
                verdict.min_distance = Some(dist);
                if dist < p.d {
                    let mut f = Failure::new(Check::Distance, format!("d({x}, {z}) = {dist} < {}", p.d), &[&x, &z]);
                    f.distance = Some(dist);
                    verdict.pass = false;
                    verdict.failure = Some(f);
                }
            }
            Ok(verdict)
        }
    }
}

fn weight_check(words: &[Word], w: usize, verdict: &mut Verdict) {
    let mut sorted = words.to_vec();
    sorted.sort();
    if let Some(x) = sorted.iter().find(|x| x.weight() != w) {
        verdict.pass = false;
        verdict.failure = Some(Failure::new(Check::Weight, format!("{x} has weight {}, expected {w}", x.weight()), &[x]));
    }
}

fn require_cyclic(code: &CodeArtifact, budget: &Budget) -> Result<Vec<Word>> {
    if !matches!(code.kind, CodeKind::Hcc | CodeKind::Ooc) {
        return Err(Error::Contract(format!("expected an HCC or OOC, got {}", code.kind.as_str())));
    }
    let verdict = verify_artifact(code, budget)?;
    if !verdict.pass {
        let reason = verdict.failure.map(|f| f.message).unwrap_or_default();
        return Err(Error::Contract(format!("input code does not verify: {reason}")));
    }
    let mut reps: Vec<Word> = code.words.iter().filter(|w| is_canonical(w)).cloned().collect();
    reps.sort();
    Ok(reps)
}

/// One canonical representative per class of a verified distance-`d` HCC,
/// with its correlation report. The set's `λ` is `n - d`.
pub fn derive_fhs(code: &CodeArtifact, budget: &Budget) -> Result<(CodeArtifact, CorrelationReport)> {
    let reps = require_cyclic(code, budget)?;
    let n = code.params.n;
    let lambda = n.saturating_sub(code.params.d);
    let report = correlation_report(&reps, budget)?;
    if report.lambda_achieved > lambda {
        return Err(Error::Contract(format!(
            "derived sequences reach correlation {} > n - d = {lambda}",
            report.lambda_achieved
        )));
    }
    let mut provenance = code.provenance.clone();
    provenance.insert("derived_from".into(), serde_json::json!(code.kind.as_str()));
    Ok((
        CodeArtifact {
            kind: CodeKind::Fhs,
            params: CodeParams {
                lambda: Some(lambda),
                ..code.params.clone()
            },
            words: reps,
            provenance,
        },
        report,
    ))
}

/// The representative subcode of a verified HCC with `d >= n - κ + 1`, which
/// is `κ`-weakly mutually uncorrelated.
pub fn derive_wmuc(code: &CodeArtifact, kappa: usize, budget: &Budget) -> Result<CodeArtifact> {
    let n = code.params.n;
    if kappa == 0 || kappa > n {
        return Err(Error::domain(format!("need 1 <= kappa <= n = {n}, got {kappa}")));
    }
    if code.params.d + kappa < n + 1 {
        return Err(Error::Contract(format!(
            "need d >= n - kappa + 1 = {}, code has d = {}",
            n + 1 - kappa,
            code.params.d
        )));
    }
    let reps = require_cyclic(code, budget)?;
    let verdict = verify_wmuc(&reps, n, code.params.q, kappa)?;
    if !verdict.pass {
        let reason = verdict.failure.map(|f| f.message).unwrap_or_default();
        return Err(Error::Contract(format!("derived code is not {kappa}-WMU: {reason}")));
    }
    let mut provenance = code.provenance.clone();
    provenance.insert("derived_from".into(), serde_json::json!(code.kind.as_str()));
    Ok(CodeArtifact {
        kind: CodeKind::Wmuc,
        params: CodeParams {
            kappa: Some(kappa),
            ..code.params.clone()
        },
        words: reps,
        provenance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, BuildStrategy, GraphMode};
    use crate::solver::{greedy_independent_set, SolverConfig};
    use crate::words::class_of;
    use proptest::prelude::*;

    fn w(text: &str) -> Word {
        Word::parse(text, 2).unwrap()
    }

    fn orbit(text: &str) -> Vec<Word> {
        class_of(&w(text)).members()
    }

    fn budget() -> Budget {
        Budget::default()
    }

    #[test]
    fn hcc_verdicts() {
        let zero = verify_hcc(&[w("000")], 3, 2, 1, &budget()).unwrap();
        assert_eq!(zero.failure.unwrap().check, Check::FullPeriod);

        let open = verify_hcc(&[w("001"), w("010")], 3, 2, 1, &budget()).unwrap();
        let f = open.failure.unwrap();
        assert_eq!(f.check, Check::ShiftClosure);
        assert_eq!(f.words, ["010", "100"]);

        let mut code = orbit("001");
        code.extend(orbit("011"));
        let ok = verify_hcc(&code, 3, 2, 1, &budget()).unwrap();
        assert!(ok.pass);
        assert_eq!(ok.min_distance, Some(1));
        let tight = verify_hcc(&code, 3, 2, 2, &budget()).unwrap();
        assert_eq!(tight.failure.unwrap().check, Check::Distance);

        let empty = verify_hcc(&[], 5, 2, 3, &budget()).unwrap();
        assert!(empty.pass && !empty.warnings.is_empty());
        let dup = verify_hcc(&[w("01"), w("10"), w("01")], 2, 2, 1, &budget()).unwrap();
        assert_eq!(dup.failure.unwrap().check, Check::Duplicate);
        let wrong = verify_hcc(&[w("01")], 3, 2, 1, &budget()).unwrap();
        assert_eq!(wrong.failure.unwrap().check, Check::Dimension);
    }

    #[test]
    fn ooc_verdicts() {
        let code = orbit("0011011");
        assert!(verify_ooc(&code, 7, 4, 2, &budget()).unwrap().pass);
        let strict = verify_ooc(&code, 7, 4, 3, &budget()).unwrap();
        assert_eq!(strict.failure.unwrap().distance, Some(2));
        let mut mixed = orbit("0001");
        mixed.extend(orbit("0011"));
        let f = verify_ooc(&mixed, 4, 1, 1, &budget()).unwrap().failure.unwrap();
        assert_eq!((f.check, f.words[0].as_str()), (Check::Weight, "0011"));
        assert!(verify_ooc(&[], 7, 3, 3, &budget()).unwrap().pass);
    }

    #[test]
    fn correlations() {
        let (x, y) = (w("01"), w("10"));
        assert_eq!(hamming_correlation(&x, &x, 0).unwrap(), 2);
        assert_eq!(hamming_correlation(&x, &y, 1).unwrap(), 2);
        assert!(hamming_correlation(&x, &w("010"), 0).is_err());
    }

    #[test]
    fn wmuc_verdicts() {
        assert!(verify_wmuc(&[w("011")], 3, 2, 2).unwrap().pass);
        assert!(verify_wmuc(&[w("001")], 3, 2, 1).unwrap().pass);
        let f = verify_wmuc(&[w("010")], 3, 2, 1).unwrap().failure.unwrap();
        assert_eq!((f.check, f.length), (Check::PrefixSuffix, Some(1)));
        assert!(verify_wmuc(&[w("010")], 3, 2, 0).is_err());
        assert!(verify_wmuc(&[w("010")], 3, 2, 4).is_err());
    }

    fn artifact(words: Vec<Word>, n: usize, d: usize) -> CodeArtifact {
        CodeArtifact {
            kind: CodeKind::Hcc,
            params: CodeParams {
                n,
                q: 2,
                d,
                weight: None,
                lambda: None,
                kappa: None,
            },
            words,
            provenance: BTreeMap::new(),
        }
    }

    #[test]
    fn derivations_on_small_codes() {
        let code = artifact(orbit("01"), 2, 2);
        let (fhs, report) = derive_fhs(&code, &budget()).unwrap();
        assert_eq!(fhs.words, [w("01")]);
        assert_eq!(report.lambda_achieved, 0);
        assert_eq!(fhs.params.lambda, Some(0));
        let wmuc = derive_wmuc(&code, 1, &budget()).unwrap();
        assert_eq!(wmuc.words, [w("01")]);
        assert!(verify_artifact(&wmuc, &budget()).unwrap().pass);

        let empty = artifact(Vec::new(), 5, 3);
        assert!(derive_fhs(&empty, &budget()).unwrap().0.words.is_empty());
        assert!(derive_wmuc(&empty, 3, &budget()).unwrap().words.is_empty());

        let weak = artifact(orbit("0011011"), 7, 2);
        assert!(matches!(derive_wmuc(&weak, 3, &budget()), Err(Error::Contract(_))));
        let broken = artifact(vec![w("001")], 3, 1);
        assert!(matches!(derive_fhs(&broken, &budget()), Err(Error::Contract(_))));
    }

    #[test]
    fn fhs_verification() {
        let (ok, report) = verify_fhs(&[w("0001011"), w("0011101")], 7, 2, 4, &budget()).unwrap();
        let report = report.unwrap();
        assert_eq!(ok.pass, report.lambda_achieved <= 4);
        let (bad, _) = verify_fhs(&[w("0011"), w("0110")], 4, 2, 3, &budget()).unwrap();
        assert_eq!(bad.failure.unwrap().check, Check::Correlation);
        let (tight, _) = verify_fhs(&[w("0001011"), w("0011101")], 7, 2, 0, &budget()).unwrap();
        let f = tight.failure.unwrap();
        let (x, y, i) = (Word::parse(&f.words[0], 2).unwrap(), Word::parse(&f.words[1], 2).unwrap(), f.shift.unwrap());
        assert_eq!(hamming_correlation(&x, &y, i).unwrap(), report.lambda_achieved);
    }

    #[test]
    fn assemble_small() {
        let g = build_graph(3, 2, 1, GraphMode::Hcc, BuildStrategy::Auto, &budget()).unwrap();
        assert_eq!(g.num_vertices(), 2);
        let code = assemble(&g, &[0, 1]).unwrap();
        assert_eq!(code.len(), 6);
        assert!(verify_artifact(&code, &budget()).unwrap().pass);
        assert!(assemble(&g, &[]).unwrap().is_empty());
        let dense = build_graph(6, 2, 2, GraphMode::Hcc, BuildStrategy::Auto, &budget()).unwrap();
        let (u, v) = (0..dense.num_vertices())
            .flat_map(|u| (0..dense.num_vertices()).map(move |v| (u, v)))
            .find(|&(u, v)| dense.has_edge(u, v))
            .unwrap();
        assert!(matches!(assemble(&dense, &[u, v]), Err(Error::Contract(_))));
    }

    #[test]
    fn pipeline_n7() {
        let b = budget();
        for mode in [GraphMode::Hcc, GraphMode::Ooc { weight: 3 }] {
            let g = build_graph(7, 2, 3, mode, BuildStrategy::Auto, &b).unwrap();
            let set = greedy_independent_set(g.adjacency(), &SolverConfig::default()).unwrap();
            let code = assemble(&g, &set).unwrap();
            assert_eq!(code.len() % 7, 0);
            assert!(verify_artifact(&code, &b).unwrap().pass);
            let (_, report) = derive_fhs(&code, &b).unwrap();
            assert!(report.lambda_achieved <= 4);
            let wmuc = derive_wmuc(&code, 5, &b).unwrap();
            assert!(verify_wmuc(&wmuc.words, 7, 2, 5).unwrap().pass);
        }
    }

    fn brute_min(words: &[Word]) -> Option<usize> {
        let mut best = None;
        for (i, x) in words.iter().enumerate() {
            for y in &words[i + 1..] {
                let dist = distance_unchecked(x.symbols(), y.symbols());
                best = Some(best.map_or(dist, |b: usize| b.min(dist)));
            }
        }
        best
    }

    proptest! {
        #[test]
        fn min_distance_search_is_exact(q in 2u16..=4, n in 2usize..=8, seeds in proptest::collection::vec(any::<u64>(), 1..40)) {
            let total = u64::from(q).pow(n as u32);
            let mut words: Vec<Word> = seeds.iter().map(|s| Word::from_index(s % total, n, q).unwrap()).collect();
            words.sort();
            words.dedup();
            let found = code_min_distance(&words, &budget()).unwrap().map(|c| c.0);
            prop_assert_eq!(found, brute_min(&words));
        }

        #[test]
        fn verdicts_ignore_order(n in 3usize..=7, seeds in proptest::collection::vec(any::<u64>(), 1..6), rot in any::<usize>()) {
            let mut code: Vec<Word> = Vec::new();
            for s in seeds {
                code.extend(class_of(&Word::from_index(s % (1 << n), n, 2).unwrap()).members());
            }
            code.sort();
            code.dedup();
            let a = verify_hcc(&code, n, 2, 2, &budget()).unwrap();
            code.reverse();
            let k = rot % code.len();
            code.rotate_left(k);
            let b = verify_hcc(&code, n, 2, 2, &budget()).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
