//! Exact counts of the high-autodistance sets and Monte-Carlo estimates of
//! the lower tail `Pr[d(X) <= θ]`.
//!
//! Set membership uses the strict `d(x) > θ`; tails use `d(X) <= θ`. Both
//! thresholds are exact rationals, so there is no rounding at the boundary.

use num_rational::Ratio;
use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    self, set_a_bound, set_b_bound, mcdiarmid_tail, param_f64, param_text, slice_weight, stirling_factor,
    SetBound, Param,
};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::packed::{Lanes, PackedWord};
use crate::volume::binomial;
use crate::words::check_alphabet;

/// Identifier of the pseudo-random generator recorded in reports.
pub const GENERATOR: &str = "chacha8";

/// Samples drawn from one generator substream.
pub const CHUNK: u64 = 4096;

/// Smallest integer distance strictly above `threshold`.
fn strict_cutoff(threshold: Param) -> i64 {
    threshold.floor().to_integer() + 1
}

/// `d(x)` of a word packed into one `u64`.
fn packed_autodistance(lanes: &Lanes, x: u64) -> u32 {
    (1..lanes.n()).map(|i| lanes.distance(x, lanes.rotate(x, i))).min().unwrap_or(0)
}

fn decode(mut index: u64, n: usize, q: u16, buf: &mut [u8]) {
    for s in buf.iter_mut().take(n) {
        *s = (index % u64::from(q)) as u8;
        index /= u64::from(q);
    }
}

/// Exact count of a high-autodistance set next to its guaranteed bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetReport {
    pub n: usize,
    pub q: u16,
    pub weight: Option<usize>,
    /// Members satisfy `d(x) > threshold`.
    pub threshold: String,
    pub count: u64,
    pub total: u64,
    /// `histogram[k]` is the number of enumerated words with `d(x) = k`.
    pub histogram: Vec<u64>,
    pub bound: SetBound,
    /// `count >= bound`; true automatically when the bound is vacuous.
    pub holds: bool,
}

impl SetReport {
    /// Exact `Pr[d(X) <= θ]` over the enumerated universe, for integer `θ`.
    pub fn tail_probability(&self, theta: i64) -> f64 {
        let hits: u64 = self
            .histogram
            .iter()
            .enumerate()
            .filter(|(k, _)| (*k as i64) <= theta)
            .map(|(_, c)| c)
            .sum();
        hits as f64 / self.total as f64
    }
}

fn histogram_all(n: usize, q: u16) -> Vec<u64> {
    let total = u64::from(q).pow(n as u32);
    let lanes = Lanes::new(n, q);
    let chunks = total.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut hist = vec![0u64; n + 1];
            let mut buf = vec![0u8; n];
            for index in c * CHUNK..((c + 1) * CHUNK).min(total) {
                decode(index, n, q, &mut buf);
                let d = if lanes.fits_u64() {
                    packed_autodistance(&lanes, lanes.pack(&buf)) as usize
                } else {
                    PackedWord::from_symbols(&buf, q).min_autodistance()
                };
                hist[d] += 1;
            }
            hist
        })
        .reduce(|| vec![0u64; n + 1], add_histograms)
}

fn add_histograms(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
    a
}

fn count_above(histogram: &[u64], cutoff: i64) -> u64 {
    histogram
        .iter()
        .enumerate()
        .filter(|(k, _)| (*k as i64) >= cutoff)
        .map(|(_, c)| c)
        .sum()
}

/// Exact `|A|`, `A = {x ∈ [q]^n : d(x) > n(1 - 1/q - ε)}`, by enumerating
/// all `q^n` words.
pub fn exact_set_a(n: usize, q: u16, eps: Param, budget: &Budget) -> Result<SetReport> {
    check_alphabet(q)?;
    let bound = set_a_bound(n, q, eps)?;
    let total = u64::from(q)
        .checked_pow(n as u32)
        .filter(|&t| t <= budget.enumeration)
        .ok_or_else(|| Error::capacity("set A enumeration", format!("{q}^{n} words"), budget.enumeration))?;
    let histogram = histogram_all(n, q);
    let threshold = bounds::set_a_threshold(n, q, eps);
    let count = count_above(&histogram, strict_cutoff(threshold));
    Ok(SetReport {
        n,
        q,
        weight: None,
        threshold: param_text(threshold),
        count,
        total,
        histogram,
        holds: bound.holds_for(count),
        bound,
    })
}

/// Calls `visit` on every `n`-bit mask of weight `w` in increasing order.
fn for_each_weight_mask(n: usize, w: usize, mut visit: impl FnMut(u64)) {
    if w == 0 {
        visit(0);
        return;
    }
    let limit = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut mask = if w == 64 { u64::MAX } else { (1u64 << w) - 1 };
    loop {
        visit(mask);
        // Gosper's hack: next mask with the same popcount.
        let c = mask & mask.wrapping_neg();
        let r = mask.wrapping_add(c);
        if r == 0 || r > limit {
            return;
        }
        let next = (((r ^ mask) >> 2) / c) | r;
        if next > limit {
            return;
        }
        mask = next;
    }
}

/// Exact `|B|`, `B = {x of weight pn : d(x) > (1 - ε) n p(1 - p)}`, by
/// enumerating the weight-`pn` slice.
pub fn exact_set_b(n: usize, p: Param, eps: Param, budget: &Budget) -> Result<SetReport> {
    let bound = set_b_bound(n, p, eps)?;
    let w = slice_weight(n, p)?;
    if n > 64 {
        return Err(Error::Unsupported("exact set B needs n <= 64".into()));
    }
    let total = binomial(n as u64, w as u64)
        .to_u64()
        .filter(|&t| t <= budget.enumeration)
        .ok_or_else(|| Error::capacity("set B enumeration", format!("C({n},{w}) words"), budget.enumeration))?;
    let lanes = Lanes::new(n, 2);
    let mut histogram = vec![0u64; n + 1];
    for_each_weight_mask(n, w, |mask| histogram[packed_autodistance(&lanes, mask) as usize] += 1);
    let threshold = bounds::set_b_threshold(n, p, eps);
    let count = count_above(&histogram, strict_cutoff(threshold));
    Ok(SetReport {
        n,
        q: 2,
        weight: Some(w),
        threshold: param_text(threshold),
        count,
        total,
        histogram,
        holds: bound.holds_for(count),
        bound,
    })
}

/// Distribution of the sampled word `X`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum SamplingMode {
    /// Uniform on `[q]^n`.
    Uniform,
    /// Binary with i.i.d. Bernoulli(p) coordinates.
    Bernoulli {
        #[serde(with = "crate::bounds::param_serde")]
        p: Param,
    },
    /// Uniform on binary words of the given weight.
    WeightSlice { weight: usize },
}

impl SamplingMode {
    /// `E[d(X, π_i X)] / n` for any nontrivial shift `i`.
    fn mean_fraction(&self, n: usize, q: u16) -> f64 {
        match *self {
            SamplingMode::Uniform => 1.0 - 1.0 / f64::from(q),
            SamplingMode::Bernoulli { p } => {
                let p = param_f64(p);
                2.0 * p * (1.0 - p)
            }
            SamplingMode::WeightSlice { weight } => {
                let p = weight as f64 / n as f64;
                2.0 * p * (1.0 - p)
            }
        }
    }
}

/// The union-bound chain `union · tail · stirling` that upper-bounds the
/// tail probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundChain {
    pub mean_distance: f64,
    pub per_shift_tail: f64,
    pub union_factor: f64,
    pub stirling_factor: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub n: usize,
    pub q: u16,
    #[serde(flatten)]
    pub mode: SamplingMode,
    /// Counted event is `d(X) <= threshold`.
    pub threshold: String,
    pub samples: u64,
    pub seed: u64,
    pub generator: String,
    pub hits: u64,
    pub estimate: f64,
    pub stderr: f64,
    /// Absent when the threshold is not below the mean, where the
    /// concentration bound says nothing.
    pub bound: Option<BoundChain>,
    /// `estimate <= bound + 3 stderr`, or true without a bound.
    pub within_bound: bool,
}

fn sample_word(rng: &mut ChaCha8Rng, mode: SamplingMode, q: u16, buf: &mut [u8]) {
    match mode {
        SamplingMode::Uniform => buf.iter_mut().for_each(|s| *s = rng.gen_range(0..q) as u8),
        SamplingMode::Bernoulli { p } => {
            let (num, den) = (*p.numer() as u64, *p.denom() as u64);
            buf.iter_mut().for_each(|s| *s = u8::from(rng.gen_range(0..den) < num));
        }
        SamplingMode::WeightSlice { weight } => {
            for (j, s) in buf.iter_mut().enumerate() {
                *s = u8::from(j < weight);
            }
            buf.shuffle(rng);
        }
    }
}

/// Generator for sample chunk `chunk`: seeded by `seed`, one stream per chunk,
/// so results do not depend on the worker count.
fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Draws exactly `samples` words; used by the sampler uniformity test.
pub fn draw_words(n: usize, q: u16, mode: SamplingMode, samples: u64, seed: u64) -> Vec<Vec<u8>> {
    let mut out = Vec::with_capacity(samples as usize);
    for c in 0..samples.div_ceil(CHUNK) {
        let mut rng = chunk_rng(seed, c);
        for _ in c * CHUNK..((c + 1) * CHUNK).min(samples) {
            let mut buf = vec![0u8; n];
            sample_word(&mut rng, mode, q, &mut buf);
            out.push(buf);
        }
    }
    out
}

fn check_mode(n: usize, q: u16, mode: SamplingMode) -> Result<()> {
    match mode {
        SamplingMode::Uniform => Ok(()),
        SamplingMode::Bernoulli { p } => {
            if q != 2 {
                return Err(Error::Unsupported("Bernoulli sampling requires q = 2".into()));
            }
            if p <= Ratio::from_integer(0) || p >= Ratio::from_integer(1) {
                return Err(Error::domain(format!("need 0 < p < 1, got {}", param_text(p))));
            }
            Ok(())
        }
        SamplingMode::WeightSlice { weight } => {
            if q != 2 {
                return Err(Error::Unsupported("weight-slice sampling requires q = 2".into()));
            }
            if weight > n {
                return Err(Error::domain(format!("weight {weight} exceeds n = {n}")));
            }
            Ok(())
        }
    }
}

/// Estimates `Pr[d(X) <= θ]` from `samples` draws.
pub fn mc_tail(n: usize, q: u16, threshold: Param, samples: u64, seed: u64, mode: SamplingMode) -> Result<TailEstimate> {
    check_alphabet(q)?;
    if n < 2 {
        return Err(Error::domain("need n >= 2"));
    }
    if samples == 0 {
        return Err(Error::domain("need samples >= 1"));
    }
    check_mode(n, q, mode)?;
    let floor = threshold.floor().to_integer();
    let hits: u64 = if floor < 0 {
        0
    } else {
        let cutoff = floor as usize;
        (0..samples.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let mut rng = chunk_rng(seed, c);
                let mut buf = vec![0u8; n];
                let mut hits = 0u64;
                for _ in c * CHUNK..((c + 1) * CHUNK).min(samples) {
                    sample_word(&mut rng, mode, q, &mut buf);
                    if PackedWord::from_symbols(&buf, q).autodistance_at_most(cutoff) {
                        hits += 1;
                    }
                }
                hits
            })
            .sum()
    };
    let estimate = hits as f64 / samples as f64;
    let stderr = (estimate * (1.0 - estimate) / samples as f64).sqrt();
    let bound = bound_chain(n, q, threshold, mode)?;
    Ok(TailEstimate {
        n,
        q,
        mode,
        threshold: param_text(threshold),
        samples,
        seed,
        generator: GENERATOR.into(),
        hits,
        estimate,
        stderr,
        within_bound: bound.is_none_or(|b| estimate <= b.value + 3.0 * stderr),
        bound,
    })
}

fn bound_chain(n: usize, q: u16, threshold: Param, mode: SamplingMode) -> Result<Option<BoundChain>> {
    let mean = n as f64 * mode.mean_fraction(n, q);
    let deviation = mean - param_f64(threshold);
    if deviation <= 0.0 {
        return Ok(None);
    }
    let tail = mcdiarmid_tail(deviation, &vec![2.0; n])?;
    let stirling = match mode {
        SamplingMode::WeightSlice { weight } if weight > 0 && weight < n => stirling_factor(n, weight as f64 / n as f64),
        _ => 1.0,
    };
    let union = (n - 1) as f64;
    Ok(Some(BoundChain {
        mean_distance: mean,
        per_shift_tail: tail,
        union_factor: union,
        stirling_factor: stirling,
        value: union * tail * stirling,
    }))
}

/// Estimates `Pr[d(X) <= θ | wt(X) = pn]` by sampling uniformly from the
/// weight-`pn` slice.
pub fn conditional_tail_weight_slice(n: usize, p: Param, threshold: Param, samples: u64, seed: u64) -> Result<TailEstimate> {
    let weight = slice_weight(n, p)?;
    mc_tail(n, 2, threshold, samples, seed, SamplingMode::WeightSlice { weight })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::{min_cyclic_autodistance, Word};
    use rustc_hash::FxHashMap;

    fn r(n: i64, d: i64) -> Param {
        Ratio::new(n, d)
    }

    fn brute_counts(n: usize, q: u16, weight: Option<usize>) -> Vec<u64> {
        let mut hist = vec![0u64; n + 1];
        for index in 0..u64::from(q).pow(n as u32) {
            let w = Word::from_index(index, n, q).unwrap();
            if weight.is_some_and(|k| w.weight() != k) {
                continue;
            }
            hist[min_cyclic_autodistance(&w).unwrap()] += 1;
        }
        hist
    }

    #[test]
    fn set_a_small() {
        let report = exact_set_a(4, 2, r(1, 4), &Budget::default()).unwrap();
        assert_eq!(report.threshold, "1");
        let hist = brute_counts(4, 2, None);
        assert_eq!(report.histogram, hist);
        assert_eq!(report.count, hist[2..].iter().sum::<u64>());
        assert_eq!(report.count, 12);
        assert!(report.bound.vacuous && report.holds);
    }

    #[test]
    fn set_a_matches_brute_force() {
        for (n, q) in [(6, 3), (10, 2), (5, 4)] {
            let report = exact_set_a(n, q, r(1, 10), &Budget::default()).unwrap();
            assert_eq!(report.histogram, brute_counts(n, q, None));
        }
    }

    #[test]
    fn set_a_budget() {
        let small = Budget::default().with_enumeration(1000);
        assert!(matches!(exact_set_a(10, 2, r(1, 10), &small), Err(Error::Capacity { .. })));
    }

    #[test]
    fn set_b_small() {
        let report = exact_set_b(8, r(1, 2), r(1, 5), &Budget::default()).unwrap();
        assert_eq!(report.threshold, "8/5");
        assert_eq!(report.total, 70);
        let hist = brute_counts(8, 2, Some(4));
        assert_eq!(report.histogram, hist);
        assert_eq!(report.count, hist[2..].iter().sum::<u64>());
        assert!(exact_set_b(9, r(1, 2), r(1, 5), &Budget::default()).is_err());
    }

    #[test]
    fn n16_counts() {
        let b = Budget::default();
        for (eps, count) in [(r(1, 10), 1152), (r(1, 5), 39680), (r(3, 10), 61952)] {
            assert_eq!(exact_set_a(16, 2, eps, &b).unwrap().count, count);
        }
        for eps in [r(1, 5), r(3, 10)] {
            let report = exact_set_b(16, r(1, 2), eps, &b).unwrap();
            assert_eq!((report.count, report.total), (12736, 12870));
        }
        assert_eq!(exact_set_a(12, 2, r(1, 10), &b).unwrap().count, 360);
    }

    #[test]
    fn weight_masks() {
        let mut seen = Vec::new();
        for_each_weight_mask(5, 2, |m| seen.push(m));
        assert_eq!(seen.len(), 10);
        assert!(seen.windows(2).all(|w| w[0] < w[1]));
        assert!(seen.iter().all(|m| m.count_ones() == 2 && *m < 32));
        let mut full = Vec::new();
        for_each_weight_mask(4, 4, |m| full.push(m));
        assert_eq!(full, vec![15]);
    }

    #[test]
    fn tail_extremes() {
        let all = mc_tail(20, 3, r(20, 1), 1000, 7, SamplingMode::Uniform).unwrap();
        assert_eq!(all.estimate, 1.0);
        let none = mc_tail(20, 3, r(-1, 2), 1000, 7, SamplingMode::Uniform).unwrap();
        assert_eq!(none.estimate, 0.0);
        let slice = conditional_tail_weight_slice(10, r(3, 10), r(6, 1), 500, 1).unwrap();
        assert_eq!(slice.estimate, 1.0);
    }

    #[test]
    fn tail_reproducible_and_thread_independent() {
        let run = || mc_tail(40, 2, r(12, 1), 20_000, 99, SamplingMode::Bernoulli { p: r(1, 3) }).unwrap();
        let a = run();
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = single.install(run);
        assert_eq!(a, b);
        let other = mc_tail(40, 2, r(12, 1), 20_000, 100, SamplingMode::Bernoulli { p: r(1, 3) }).unwrap();
        assert_ne!(a.hits, other.hits);
    }

    #[test]
    fn tail_agrees_with_exact() {
        let exact = exact_set_a(12, 2, r(1, 10), &Budget::default()).unwrap();
        let mc = mc_tail(12, 2, r(4, 1), 50_000, 3, SamplingMode::Uniform).unwrap();
        let truth = exact.tail_probability(4);
        assert!((mc.estimate - truth).abs() <= 3.0 * mc.stderr, "{} vs {truth}", mc.estimate);
    }

    #[test]
    fn slice_sampler_is_uniform() {
        let draws = draw_words(6, 2, SamplingMode::WeightSlice { weight: 3 }, 100_000, 2024);
        let mut counts: FxHashMap<Vec<u8>, u64> = FxHashMap::default();
        for w in draws {
            assert_eq!(w.iter().filter(|&&s| s == 1).count(), 3);
            *counts.entry(w).or_default() += 1;
        }
        assert_eq!(counts.len(), 20);
        let expected = 100_000.0 / 20.0;
        let chi2: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 19 degrees of freedom, 0.999 quantile.
        assert!(chi2 < 43.82, "chi-square {chi2}");
    }

    #[test]
    fn bound_chain_shapes() {
        let t = mc_tail(50, 2, r(15, 1), 10, 0, SamplingMode::Uniform).unwrap();
        let b = t.bound.unwrap();
        assert!((b.mean_distance - 25.0).abs() < 1e-12);
        assert!((b.per_shift_tail - (-1f64).exp()).abs() < 1e-15);
        assert_eq!(b.union_factor, 49.0);
        let above = mc_tail(50, 2, r(30, 1), 10, 0, SamplingMode::Uniform).unwrap();
        assert!(above.bound.is_none() && above.within_bound);
    }
}
