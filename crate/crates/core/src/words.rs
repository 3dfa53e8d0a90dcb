//! Words over `[q] = {0, …, q-1}`, cyclic shifts and rotation classes.
//!
//! A [`Word`] is the atom of every distance computation in the crate. The
//! rotation class `C(x)` of a word is represented by [`CyclicClass`], keyed by
//! its lexicographically least rotation.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported alphabet; symbols are stored as `u8`.
pub const MAX_ALPHABET: u16 = 256;

/// A fixed-length word over an alphabet of size `q`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word {
    symbols: Vec<u8>,
    q: u16,
}

impl Word {
    pub fn new(symbols: Vec<u8>, q: u16) -> Result<Self> {
        check_alphabet(q)?;
        if symbols.is_empty() {
            return Err(Error::domain("a word needs length n >= 1"));
        }
        if let Some(&bad) = symbols.iter().find(|&&s| u16::from(s) >= q) {
            return Err(Error::domain(format!("symbol {bad} is outside [0, {q})")));
        }
        Ok(Word { symbols, q })
    }

    /// Caller guarantees the invariants.
    pub(crate) fn from_raw(symbols: Vec<u8>, q: u16) -> Self {
        debug_assert!(!symbols.is_empty());
        debug_assert!(symbols.iter().all(|&s| u16::from(s) < q));
        Word { symbols, q }
    }

    pub fn zeros(n: usize, q: u16) -> Result<Self> {
        Word::new(vec![0; n], q)
    }

    /// The word whose base-`q` expansion (most significant symbol first) is `index`.
    pub fn from_index(mut index: u64, n: usize, q: u16) -> Result<Self> {
        check_alphabet(q)?;
        let mut symbols = vec![0u8; n];
        for slot in symbols.iter_mut().rev() {
            *slot = (index % u64::from(q)) as u8;
            index /= u64::from(q);
        }
        if index != 0 {
            return Err(Error::domain(format!("index does not fit in {n} base-{q} digits")));
        }
        Word::new(symbols, q)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn q(&self) -> u16 {
        self.q
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    /// `π_i(x) = (x_{i+1}, …, x_{i+n})`, indices mod `n`.
    pub fn cyclic_shift(&self, i: usize) -> Word {
        let mut symbols = self.symbols.clone();
        symbols.rotate_left(i % self.len());
        Word::from_raw(symbols, self.q)
    }

    /// Number of non-zero coordinates.
    pub fn weight(&self) -> usize {
        self.symbols.iter().filter(|&&s| s != 0).count()
    }

    /// Smallest `p >= 1` with `p | n` and `π_p(x) = x`. Equals the number of
    /// distinct rotations.
    pub fn period(&self) -> usize {
        period_of(&self.symbols)
    }

    pub fn is_full_period(&self) -> bool {
        self.period() == self.len()
    }

    /// Lexicographically least rotation (Booth's algorithm).
    pub fn canonical_rotation(&self) -> Word {
        let k = least_rotation(&self.symbols);
        self.cyclic_shift(k)
    }

    /// Iterator over `π_0(x), …, π_{n-1}(x)`.
    pub fn rotations(&self) -> impl Iterator<Item = Word> + '_ {
        (0..self.len()).map(move |i| self.cyclic_shift(i))
    }

    /// Parses the text form: plain digits for `q <= 10`, comma separated
    /// values otherwise. Commas are accepted for any `q`.
    pub fn parse(text: &str, q: u16) -> Result<Self> {
        check_alphabet(q)?;
        let text = text.trim();
        let symbols: Vec<u8> = if text.contains(',') || q > 10 {
            text.split(',')
                .map(|tok| {
                    tok.trim()
                        .parse::<u16>()
                        .ok()
                        .filter(|&v| v < q)
                        .map(|v| v as u8)
                        .ok_or_else(|| Error::domain(format!("bad symbol {tok:?} for q = {q}")))
                })
                .collect::<Result<_>>()?
        } else {
            text.chars()
                .map(|c| {
                    c.to_digit(10)
                        .filter(|&v| v < u32::from(q))
                        .map(|v| v as u8)
                        .ok_or_else(|| Error::domain(format!("bad symbol {c:?} for q = {q}")))
                })
                .collect::<Result<_>>()?
        };
        Word::new(symbols, q)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q <= 10 {
            for s in &self.symbols {
                write!(f, "{s}")?;
            }
        } else {
            for (i, s) in self.symbols.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{s}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self}; q={})", self.q)
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.q, self.symbols.len(), &self.symbols).cmp(&(other.q, other.symbols.len(), &other.symbols))
    }
}

pub(crate) fn check_alphabet(q: u16) -> Result<()> {
    if !(2..=MAX_ALPHABET).contains(&q) {
        return Err(Error::domain(format!("alphabet size q = {q} must be in [2, {MAX_ALPHABET}]")));
    }
    Ok(())
}

fn check_compatible(x: &Word, y: &Word) -> Result<()> {
    if x.len() != y.len() || x.q != y.q {
        return Err(Error::Dimension(format!(
            "words of (n, q) = ({}, {}) and ({}, {})",
            x.len(),
            x.q,
            y.len(),
            y.q
        )));
    }
    Ok(())
}

/// Number of coordinates where `x` and `y` differ.
pub fn hamming_distance(x: &Word, y: &Word) -> Result<usize> {
    check_compatible(x, y)?;
    Ok(distance_unchecked(&x.symbols, &y.symbols))
}

#[inline]
pub(crate) fn distance_unchecked(x: &[u8], y: &[u8]) -> usize {
    x.iter().zip(y).filter(|(a, b)| a != b).count()
}

/// `d(x, π_i(x))` via the Kronecker sum `n - Σ_j δ(x_j, x_{j+i})`.
pub fn autocorrelation_distance(x: &Word, i: usize) -> Result<usize> {
    let n = x.len();
    if i == 0 || i >= n {
        return Err(Error::domain(format!("shift {i} outside [1, {}]", n.saturating_sub(1))));
    }
    Ok(shift_distance_unchecked(&x.symbols, i))
}

#[inline]
pub(crate) fn shift_distance_unchecked(s: &[u8], i: usize) -> usize {
    let n = s.len();
    let agree = (0..n).filter(|&j| s[j] == s[(j + i) % n]).count();
    n - agree
}

/// `d(x, π_i(y))` for equal-length symbol slices.
pub(crate) fn shift_pair_distance(x: &[u8], y: &[u8], i: usize) -> usize {
    let n = x.len();
    (0..n).filter(|&j| x[j] != y[(j + i) % n]).count()
}

/// `d(x) = min_{1 <= i <= n-1} d(x, π_i(x))`.
pub fn min_cyclic_autodistance(x: &Word) -> Result<usize> {
    if x.len() < 2 {
        return Err(Error::domain("d(x) needs n >= 2: a length-1 word has no nontrivial shift"));
    }
    Ok(min_autodistance_unchecked(&x.symbols))
}

pub(crate) fn min_autodistance_unchecked(s: &[u8]) -> usize {
    (1..s.len())
        .map(|i| shift_distance_unchecked(s, i))
        .min()
        .unwrap_or(0)
}

pub(crate) fn period_of(s: &[u8]) -> usize {
    let n = s.len();
    (1..=n)
        .filter(|p| n.is_multiple_of(*p))
        .find(|&p| (0..n - p).all(|j| s[j] == s[j + p]))
        .unwrap_or(n)
}

/// Booth's least-rotation algorithm; returns the shift producing the
/// lexicographically least rotation (smallest such shift).
pub(crate) fn least_rotation(s: &[u8]) -> usize {
    let n = s.len();
    if n == 0 {
        return 0;
    }
    let at = |idx: isize| s[idx as usize % n];
    let mut failure = vec![-1isize; 2 * n];
    let mut k: isize = 0;
    for j in 1..(2 * n) as isize {
        let sj = at(j);
        let mut i = failure[(j - k - 1) as usize];
        while i != -1 && sj != at(k + i + 1) {
            if sj < at(k + i + 1) {
                k = j - i - 1;
            }
            i = failure[i as usize];
        }
        if sj != at(k + i + 1) {
            if sj < at(k) {
                k = j;
            }
            failure[(j - k) as usize] = -1;
        } else {
            failure[(j - k) as usize] = i + 1;
        }
    }
    k as usize % n
}

/// The rotation class `C(x)` of a word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CyclicClass {
    representative: Word,
    n_distinct: usize,
    auto_distance: Option<usize>,
}

impl CyclicClass {
    /// Lexicographically least member of the class.
    pub fn representative(&self) -> &Word {
        &self.representative
    }

    /// Number of distinct rotations (the period).
    pub fn n_distinct(&self) -> usize {
        self.n_distinct
    }

    pub fn is_full_period(&self) -> bool {
        self.n_distinct == self.representative.len()
    }

    /// `d(x)`; `None` for `n = 1`, where no nontrivial shift exists.
    pub fn auto_distance(&self) -> Option<usize> {
        self.auto_distance
    }

    pub fn len(&self) -> usize {
        self.representative.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn q(&self) -> u16 {
        self.representative.q
    }

    /// All distinct members, starting from the representative.
    pub fn members(&self) -> Vec<Word> {
        (0..self.n_distinct).map(|i| self.representative.cyclic_shift(i)).collect()
    }

    fn from_canonical(representative: Word, period: usize) -> Self {
        let auto_distance = if representative.len() >= 2 {
            Some(if period < representative.len() {
                0
            } else {
                min_autodistance_unchecked(&representative.symbols)
            })
        } else {
            None
        };
        CyclicClass {
            representative,
            n_distinct: period,
            auto_distance,
        }
    }
}

pub fn class_of(x: &Word) -> CyclicClass {
    let rep = x.canonical_rotation();
    let period = rep.period();
    CyclicClass::from_canonical(rep, period)
}

/// Filters for [`enumerate_classes`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassFilter {
    pub full_period_only: bool,
    pub weight: Option<usize>,
    pub min_auto_distance: Option<usize>,
}

/// Rotation classes of `[q]^n` in ascending order of representative,
/// each exactly once.
///
/// Representatives are produced directly as necklaces (words equal to their
/// least rotation) by the Fredricksen–Kessler–Maiorana successor rule, so
/// memory stays `O(n)`. The caller is responsible for any enumeration
/// budget; see [`enumeration_cost`].
pub fn enumerate_classes(n: usize, q: u16, filter: ClassFilter) -> Result<ClassIter> {
    check_alphabet(q)?;
    if n == 0 {
        return Err(Error::domain("n must be >= 1"));
    }
    if let Some(w) = filter.weight {
        if q != 2 {
            return Err(Error::Unsupported(format!("weight filter requires q = 2, got q = {q}")));
        }
        if w > n {
            return Err(Error::domain(format!("weight {w} exceeds n = {n}")));
        }
    }
    Ok(ClassIter {
        n,
        q,
        q_max: (q - 1) as u8,
        a: vec![0; n + 1],
        started: false,
        done: false,
        filter,
    })
}

/// Words visited when enumerating classes of length `n` over `q` symbols.
pub fn enumeration_cost(n: usize, q: u16) -> u128 {
    (q as u128).checked_pow(n as u32).unwrap_or(u128::MAX)
}

pub struct ClassIter {
    n: usize,
    q: u16,
    q_max: u8,
    /// 1-indexed prenecklace, `a[0]` unused.
    a: Vec<u8>,
    started: bool,
    done: bool,
    filter: ClassFilter,
}

impl ClassIter {
    /// Advances to the next necklace; returns its period.
    fn next_necklace(&mut self) -> Option<usize> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(1);
        }
        let n = self.n;
        loop {
            let mut i = n;
            while i > 0 && self.a[i] == self.q_max {
                i -= 1;
            }
            if i == 0 {
                self.done = true;
                return None;
            }
            self.a[i] += 1;
            for j in i + 1..=n {
                self.a[j] = self.a[j - i];
            }
            if n.is_multiple_of(i) {
                return Some(i);
            }
        }
    }
}

impl Iterator for ClassIter {
    type Item = CyclicClass;

    fn next(&mut self) -> Option<CyclicClass> {
        while let Some(period) = self.next_necklace() {
            let n = self.n;
            if self.filter.full_period_only && period != n {
                continue;
            }
            let symbols = &self.a[1..];
            if let Some(w) = self.filter.weight {
                if symbols.iter().filter(|&&s| s != 0).count() != w {
                    continue;
                }
            }
            let class = CyclicClass::from_canonical(Word::from_raw(symbols.to_vec(), self.q), period);
            if let Some(min) = self.filter.min_auto_distance {
                match class.auto_distance {
                    Some(dist) if dist >= min => {}
                    _ => continue,
                }
            }
            return Some(class);
        }
        None
    }
}
