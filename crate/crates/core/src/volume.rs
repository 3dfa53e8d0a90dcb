//! Hamming-ball volumes and exact intersection counts.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::words::{check_alphabet, distance_unchecked, Word};

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// `Vol_q(n, t) = Σ_{i=0}^{t} C(n, i) (q-1)^i`.
pub fn ball_volume(n: usize, q: u16, t: usize) -> Result<BigUint> {
    check_alphabet(q)?;
    if t > n {
        return Err(Error::domain(format!("radius t = {t} exceeds n = {n}")));
    }
    // term_i = C(n, i) (q-1)^i, updated in place.
    let mut total = BigUint::zero();
    let mut term = BigUint::one();
    for i in 0..=t {
        total += &term;
        term = term * ((n - i) as u64 * u64::from(q - 1)) / (i as u64 + 1);
    }
    Ok(total)
}

/// `Vol(n, t; w) = Σ_{i=0}^{⌊t/2⌋} C(w, i) C(n-w, i)`.
pub fn cw_ball_volume(n: usize, w: usize, t: usize) -> Result<BigUint> {
    if w > n {
        return Err(Error::domain(format!("weight {w} exceeds n = {n}")));
    }
    if t > 2 * w {
        return Err(Error::domain(format!("radius t = {t} exceeds 2w = {}", 2 * w)));
    }
    Ok(cw_ball_volume_unchecked(n, w, t))
}

/// Same sum without the `t <= 2w` restriction; terms past `min(w, n-w)` vanish.
pub(crate) fn cw_ball_volume_unchecked(n: usize, w: usize, t: usize) -> BigUint {
    let (mut a, mut b) = (BigUint::one(), BigUint::one());
    let mut total = BigUint::zero();
    for i in 0..=(t / 2).min(w).min(n - w) {
        total += &a * &b;
        a = a * (w - i) as u64 / (i as u64 + 1);
        b = b * (n - w - i) as u64 / (i as u64 + 1);
    }
    total
}

/// Calls `visit` on every word at distance exactly `r` from `buf`, mutating
/// `buf` in place and restoring it. Stops early when `visit` returns false.
pub(crate) fn for_each_in_sphere(buf: &mut [u8], q: u16, r: usize, visit: &mut impl FnMut(&[u8]) -> bool) -> bool {
    sphere_rec(buf, q, 0, r, visit)
}

fn sphere_rec(buf: &mut [u8], q: u16, start: usize, remaining: usize, visit: &mut impl FnMut(&[u8]) -> bool) -> bool {
    if remaining == 0 {
        return visit(buf);
    }
    let n = buf.len();
    if remaining > n - start {
        return true;
    }
    for pos in start..=n - remaining {
        let orig = buf[pos];
        for s in 0..q {
            let s = s as u8;
            if s == orig {
                continue;
            }
            buf[pos] = s;
            if !sphere_rec(buf, q, pos + 1, remaining - 1, visit) {
                buf[pos] = orig;
                return false;
            }
        }
        buf[pos] = orig;
    }
    true
}

/// Every word within distance `t`, by increasing distance.
pub(crate) fn for_each_in_ball(buf: &mut [u8], q: u16, t: usize, visit: &mut impl FnMut(&[u8]) -> bool) -> bool {
    (0..=t.min(buf.len())).all(|r| for_each_in_sphere(buf, q, r, visit))
}

/// Every binary word of the same weight as `buf` within distance `t`.
pub(crate) fn for_each_in_cw_ball(buf: &mut [u8], t: usize, visit: &mut impl FnMut(&[u8]) -> bool) -> bool {
    let ones: Vec<usize> = (0..buf.len()).filter(|&i| buf[i] != 0).collect();
    let zeros: Vec<usize> = (0..buf.len()).filter(|&i| buf[i] == 0).collect();
    let max_swaps = (t / 2).min(ones.len()).min(zeros.len());
    for swaps in 0..=max_swaps {
        let keep_going = for_each_subset(&ones, swaps, &mut |drop: &[usize]| {
            drop.iter().for_each(|&i| buf[i] = 0);
            let inner = for_each_subset(&zeros, swaps, &mut |add: &[usize]| {
                add.iter().for_each(|&i| buf[i] = 1);
                let cont = visit(buf);
                add.iter().for_each(|&i| buf[i] = 0);
                cont
            });
            drop.iter().for_each(|&i| buf[i] = 1);
            inner
        });
        if !keep_going {
            return false;
        }
    }
    true
}

/// Visits every `k`-subset of `items` in lexicographic order of positions.
pub(crate) fn for_each_subset(items: &[usize], k: usize, visit: &mut impl FnMut(&[usize]) -> bool) -> bool {
    fn rec(items: &[usize], k: usize, start: usize, chosen: &mut Vec<usize>, visit: &mut impl FnMut(&[usize]) -> bool) -> bool {
        if chosen.len() == k {
            return visit(chosen);
        }
        let need = k - chosen.len();
        for i in start..items.len() {
            if items.len() - i < need {
                break;
            }
            chosen.push(items[i]);
            let cont = rec(items, k, i + 1, chosen, visit);
            chosen.pop();
            if !cont {
                return false;
            }
        }
        true
    }
    if k > items.len() {
        return true;
    }
    rec(items, k, 0, &mut Vec::with_capacity(k), visit)
}

fn check_budget(volume: &BigUint, budget: &Budget) -> Result<()> {
    if volume > &BigUint::from(budget.membership_tests) {
        return Err(Error::capacity("ball intersection", volume, budget.membership_tests));
    }
    Ok(())
}

/// `|B(x, t) ∩ B(y, t)|`, or its constant-weight analogue when `weight` is
/// given, counted by enumerating the ball around `x` and testing each
/// member against `y`.
pub fn ball_intersection_volume(x: &Word, y: &Word, t: usize, weight: Option<usize>, budget: &Budget) -> Result<u64> {
    if x.len() != y.len() || x.q() != y.q() {
        return Err(Error::Dimension(format!(
            "words of (n, q) = ({}, {}) and ({}, {})",
            x.len(),
            x.q(),
            y.len(),
            y.q()
        )));
    }
    let n = x.len();
    if t > n {
        return Err(Error::domain(format!("radius t = {t} exceeds n = {n}")));
    }
    let mut count = 0u64;
    let target = y.symbols();
    let mut buf = x.symbols().to_vec();
    let mut visit = |z: &[u8]| {
        if distance_unchecked(z, target) <= t {
            count += 1;
        }
        true
    };
    match weight {
        None => {
            check_budget(&ball_volume(n, x.q(), t)?, budget)?;
            for_each_in_ball(&mut buf, x.q(), t, &mut visit);
        }
        Some(w) => {
            if x.q() != 2 {
                return Err(Error::Unsupported("constant-weight balls require q = 2".into()));
            }
            if x.weight() != w || y.weight() != w {
                return Err(Error::domain(format!(
                    "centers must both have weight {w}, got {} and {}",
                    x.weight(),
                    y.weight()
                )));
            }
            check_budget(&cw_ball_volume_unchecked(n, w, t), budget)?;
            for_each_in_cw_ball(&mut buf, t, &mut visit);
        }
    }
    Ok(count)
}

/// One row of [`intersection_decay_table`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub separation: usize,
    pub intersection: u64,
    /// `intersection / volume`, reduced, as `"p/q"`.
    pub ratio_exact: String,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayTable {
    pub n: usize,
    pub q: u16,
    pub t: usize,
    pub weight: Option<usize>,
    pub volume: String,
    pub rows: Vec<DecayRow>,
    /// Separations whose ratio exceeds the previous row's. Decay is only
    /// claimed asymptotically, so this is an observation.
    pub monotonicity_violations: Vec<usize>,
}

impl DecayTable {
    pub fn is_monotone(&self) -> bool {
        self.monotonicity_violations.is_empty()
    }
}

/// Exact `|B(x,t) ∩ B(y,t)| / Vol` for every achievable separation `s = d(x, y)`.
pub fn intersection_decay_table(n: usize, q: u16, t: usize, weight: Option<usize>, budget: &Budget) -> Result<DecayTable> {
    check_alphabet(q)?;
    if n == 0 {
        return Err(Error::domain("n must be >= 1"));
    }
    let (x, volume, separations): (Word, BigUint, Vec<usize>) = match weight {
        None => {
            let volume = ball_volume(n, q, t)?;
            (Word::zeros(n, q)?, volume, (0..=n).collect())
        }
        Some(w) => {
            if q != 2 {
                return Err(Error::Unsupported("constant-weight tables require q = 2".into()));
            }
            if w > n {
                return Err(Error::domain(format!("weight {w} exceeds n = {n}")));
            }
            let volume = cw_ball_volume_unchecked(n, w, t);
            let mut center = vec![0u8; n];
            center[..w].iter_mut().for_each(|s| *s = 1);
            let reach = w.min(n - w);
            (Word::new(center, 2)?, volume, (0..=reach).map(|i| 2 * i).collect())
        }
    };
    let mut rows = Vec::with_capacity(separations.len());
    for &s in &separations {
        let y = match weight {
            None => {
                let mut symbols = vec![0u8; n];
                symbols[..s].iter_mut().for_each(|v| *v = 1);
                Word::new(symbols, q)?
            }
            Some(w) => {
                let mut symbols = x.symbols().to_vec();
                let swaps = s / 2;
                symbols[..swaps].iter_mut().for_each(|v| *v = 0);
                symbols[w..w + swaps].iter_mut().for_each(|v| *v = 1);
                Word::new(symbols, 2)?
            }
        };
        let intersection = ball_intersection_volume(&x, &y, t, weight, budget)?;
        let ratio = BigRational::new(BigInt::from(intersection), BigInt::from(volume.clone()));
        rows.push(DecayRow {
            separation: s,
            intersection,
            ratio_exact: format!("{}/{}", ratio.numer(), ratio.denom()),
            ratio: ratio.to_f64().unwrap_or(f64::NAN),
        });
    }
    let monotonicity_violations = rows
        .windows(2)
        .filter(|pair| pair[1].intersection > pair[0].intersection)
        .map(|pair| pair[1].separation)
        .collect();
    Ok(DecayTable {
        n,
        q,
        t,
        weight,
        volume: volume.to_string(),
        rows,
        monotonicity_violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_ball(n: usize, q: u16, t: usize) -> u64 {
        let center = Word::zeros(n, q).unwrap();
        (0..(q as u64).pow(n as u32))
            .filter(|&i| distance_unchecked(Word::from_index(i, n, q).unwrap().symbols(), center.symbols()) <= t)
            .count() as u64
    }

    #[test]
    fn ball_examples() {
        assert_eq!(ball_volume(5, 3, 0).unwrap(), BigUint::from(1u32));
        assert_eq!(ball_volume(7, 2, 1).unwrap(), BigUint::from(8u32));
        assert_eq!(ball_volume(4, 3, 2).unwrap(), BigUint::from(33u32));
        assert_eq!(brute_ball(4, 3, 2), 33);
        assert_eq!(ball_volume(6, 3, 6).unwrap(), BigUint::from(729u32));
        assert!(ball_volume(3, 2, 4).is_err());
    }

    #[test]
    fn cw_ball_examples() {
        assert_eq!(cw_ball_volume(6, 3, 0).unwrap(), BigUint::from(1u32));
        assert_eq!(cw_ball_volume(6, 3, 1).unwrap(), BigUint::from(1u32));
        assert_eq!(cw_ball_volume(6, 3, 2).unwrap(), BigUint::from(10u32));
        // 1 + 2*6 + 1*15 weight-2 words of length 8 within distance 4.
        assert_eq!(cw_ball_volume(8, 2, 4).unwrap(), BigUint::from(28u32));
        assert!(cw_ball_volume(6, 2, 5).is_err());
        assert!(cw_ball_volume(3, 4, 0).is_err());
    }

    #[test]
    fn cw_ball_matches_slice_scan() {
        let mut center = vec![1, 1, 0, 0, 0, 0, 0, 0];
        let mut count = 0;
        for_each_in_cw_ball(&mut center, 4, &mut |_| {
            count += 1;
            true
        });
        assert_eq!(count, 28);
        let slice = (0u32..256).filter(|v| v.count_ones() == 2).count();
        assert_eq!(slice, 28);
    }

    #[test]
    fn intersection_examples() {
        let b = Budget::default();
        let x = Word::parse("000", 2).unwrap();
        let y = Word::parse("011", 2).unwrap();
        assert_eq!(ball_intersection_volume(&x, &y, 1, None, &b).unwrap(), 2);
        assert_eq!(ball_intersection_volume(&x, &x, 1, None, &b).unwrap(), 4);
        let far = Word::parse("111", 2).unwrap();
        assert_eq!(ball_intersection_volume(&x, &far, 1, None, &b).unwrap(), 0);
        let tight = Budget {
            membership_tests: 3,
            ..Budget::default()
        };
        assert!(matches!(
            ball_intersection_volume(&x, &y, 1, None, &tight),
            Err(Error::Capacity { .. })
        ));
        let short = Word::parse("01", 2).unwrap();
        assert!(matches!(ball_intersection_volume(&x, &short, 1, None, &b), Err(Error::Dimension(_))));
        let cx = Word::parse("1100", 2).unwrap();
        let cy = Word::parse("0110", 2).unwrap();
        let brute = (0u8..16)
            .map(|v| (0..4).map(|j| (v >> (3 - j)) & 1).collect::<Vec<u8>>())
            .filter(|z| z.iter().filter(|&&s| s == 1).count() == 2)
            .filter(|z| distance_unchecked(z, cx.symbols()) <= 2 && distance_unchecked(z, cy.symbols()) <= 2)
            .count() as u64;
        assert_eq!(ball_intersection_volume(&cx, &cy, 2, Some(2), &b).unwrap(), brute);
        assert!(ball_intersection_volume(&cx, &x, 2, Some(2), &b).is_err());
    }

    #[test]
    fn decay_table_edges() {
        let table = intersection_decay_table(6, 2, 2, None, &Budget::default()).unwrap();
        assert_eq!(table.rows[0].ratio, 1.0);
        for row in &table.rows {
            if row.separation > 4 {
                assert_eq!(row.intersection, 0);
            }
        }
        let cw = intersection_decay_table(6, 2, 4, Some(3), &Budget::default()).unwrap();
        assert_eq!(cw.rows.iter().map(|r| r.separation).collect::<Vec<_>>(), [0, 2, 4, 6]);
        assert_eq!(cw.rows[0].ratio, 1.0);
        assert!(cw.is_monotone());
    }

    #[test]
    fn decay_table_fixtures() {
        let b = Budget::default();
        let counts = |n, q, t, w| -> Vec<(usize, u64)> {
            let table = intersection_decay_table(n, q, t, w, &b).unwrap();
            table.rows.iter().map(|r| (r.separation, r.intersection)).collect()
        };
        assert_eq!(
            counts(8, 2, 3, None),
            [(0, 93), (1, 58), (2, 58), (3, 38), (4, 38), (5, 20), (6, 20), (7, 0), (8, 0)]
        );
        assert_eq!(counts(5, 3, 2, None), [(0, 51), (1, 27), (2, 21), (3, 12), (4, 6), (5, 0)]);
        assert_eq!(counts(8, 2, 4, Some(4)), [(0, 53), (2, 44), (4, 40), (6, 36), (8, 36)]);
        let table = intersection_decay_table(8, 2, 3, None, &b).unwrap();
        assert_eq!(table.rows[1].ratio_exact, "58/93");
        assert!(table.is_monotone());
    }
}
