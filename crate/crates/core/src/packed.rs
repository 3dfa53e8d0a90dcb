//! Lane-packed words for the hot loops.
//!
//! Each symbol occupies a lane of `b` bits, `b` the smallest power of two with
//! `2^b >= q`, so for `q = 2` this is one bit per coordinate. Symbol `j` lives
//! at bits `[j*b, (j+1)*b)`. Distances become XOR, an in-lane OR fold and a
//! popcount. Observable behavior matches the [`Word`] operations exactly.

use crate::words::Word;

/// Bit layout of a packed word of length `n` over `q` symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lanes {
    n: usize,
    q: u16,
    bits: u32,
}

impl Lanes {
    pub fn new(n: usize, q: u16) -> Self {
        let needed = 16 - (q - 1).leading_zeros();
        let bits = needed.max(1).next_power_of_two();
        Lanes { n, q, bits }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u16 {
        self.q
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.bits
    }

    pub fn total_bits(&self) -> usize {
        self.n * self.bits as usize
    }

    /// Whether a whole word fits in one `u64`.
    pub fn fits_u64(&self) -> bool {
        self.total_bits() <= 64
    }

    fn full_mask(&self) -> u64 {
        let t = self.total_bits();
        if t >= 64 {
            u64::MAX
        } else {
            (1u64 << t) - 1
        }
    }

    fn low_mask(&self) -> u64 {
        lane_low_mask(self.bits) & self.full_mask()
    }

    pub fn pack(&self, symbols: &[u8]) -> u64 {
        debug_assert!(self.fits_u64() && symbols.len() == self.n);
        symbols
            .iter()
            .enumerate()
            .fold(0u64, |acc, (j, &s)| acc | (u64::from(s) << (j as u32 * self.bits)))
    }

    pub fn pack_word(&self, word: &Word) -> u64 {
        self.pack(word.symbols())
    }

    pub fn unpack(&self, packed: u64) -> Vec<u8> {
        (0..self.n).map(|j| self.symbol(packed, j)).collect()
    }

    #[inline]
    pub fn symbol(&self, packed: u64, j: usize) -> u8 {
        let lane = (1u64 << self.bits) - 1;
        ((packed >> (j as u32 * self.bits)) & lane) as u8
    }

    #[inline]
    pub fn with_symbol(&self, packed: u64, j: usize, s: u8) -> u64 {
        let shift = j as u32 * self.bits;
        let lane = ((1u64 << self.bits) - 1) << shift;
        (packed & !lane) | (u64::from(s) << shift)
    }

    /// `π_i` on a packed word.
    #[inline]
    pub fn rotate(&self, packed: u64, i: usize) -> u64 {
        let sh = (i % self.n) * self.bits as usize;
        if sh == 0 {
            return packed;
        }
        let t = self.total_bits();
        ((packed >> sh) | (packed << (t - sh))) & self.full_mask()
    }

    #[inline]
    pub fn distance(&self, x: u64, y: u64) -> u32 {
        (fold_lanes(x ^ y, self.bits) & self.low_mask()).count_ones()
    }

    /// All `n` rotations `π_0(x), …, π_{n-1}(x)`.
    pub fn rotations(&self, packed: u64) -> Vec<u64> {
        (0..self.n).map(|i| self.rotate(packed, i)).collect()
    }
}

#[inline]
fn lane_low_mask(bits: u32) -> u64 {
    match bits {
        1 => u64::MAX,
        2 => 0x5555_5555_5555_5555,
        4 => 0x1111_1111_1111_1111,
        8 => 0x0101_0101_0101_0101,
        _ => unreachable!("lane width is a power of two <= 8"),
    }
}

/// ORs every bit of a lane into the lane's lowest bit.
#[inline]
fn fold_lanes(mut diff: u64, bits: u32) -> u64 {
    let mut k = 1;
    while k < bits {
        diff |= diff >> k;
        k <<= 1;
    }
    diff
}

/// A packed word of arbitrary length, stored twice back to back so that
/// every rotation is a contiguous bit window.
#[derive(Debug, Clone)]
pub struct PackedWord {
    lanes: Lanes,
    doubled: Vec<u64>,
    limbs: usize,
}

impl PackedWord {
    pub fn from_symbols(symbols: &[u8], q: u16) -> Self {
        let lanes = Lanes::new(symbols.len(), q);
        let t = lanes.total_bits();
        let limbs = t.div_ceil(64);
        let mut doubled = vec![0u64; (2 * t).div_ceil(64) + 1];
        let b = lanes.bits as usize;
        for copy in 0..2 {
            for (j, &s) in symbols.iter().enumerate() {
                let pos = copy * t + j * b;
                doubled[pos / 64] |= u64::from(s) << (pos % 64);
            }
        }
        PackedWord { lanes, doubled, limbs }
    }

    pub fn from_word(word: &Word) -> Self {
        Self::from_symbols(word.symbols(), word.q())
    }

    pub fn len(&self) -> usize {
        self.lanes.n
    }

    pub fn is_empty(&self) -> bool {
        self.lanes.n == 0
    }

    #[inline]
    fn window(&self, pos: usize) -> u64 {
        let (limb, off) = (pos / 64, pos % 64);
        if off == 0 {
            self.doubled[limb]
        } else {
            (self.doubled[limb] >> off) | (self.doubled[limb + 1] << (64 - off))
        }
    }

    /// `d(x, π_i(x))`.
    pub fn shift_distance(&self, i: usize) -> usize {
        let t = self.lanes.total_bits();
        let b = self.lanes.bits;
        let offset = (i % self.lanes.n) * b as usize;
        let low = lane_low_mask(b);
        let mut total = 0u32;
        for k in 0..self.limbs {
            let remaining = t - 64 * k;
            let mask = if remaining >= 64 { u64::MAX } else { (1u64 << remaining) - 1 };
            let diff = (self.doubled[k] ^ self.window(offset + 64 * k)) & mask;
            total += (fold_lanes(diff, b) & low).count_ones();
        }
        total as usize
    }

    /// `d(x)`, or 0 for `n < 2`.
    pub fn min_autodistance(&self) -> usize {
        (1..self.lanes.n).map(|i| self.shift_distance(i)).min().unwrap_or(0)
    }

    /// Whether `d(x) <= threshold`, stopping at the first witnessing shift.
    pub fn autodistance_at_most(&self, threshold: usize) -> bool {
        (1..self.lanes.n).any(|i| self.shift_distance(i) <= threshold)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::{hamming_distance, min_cyclic_autodistance};
    use proptest::prelude::*;

    #[test]
    fn lane_widths() {
        assert_eq!(Lanes::new(4, 2).bits_per_symbol(), 1);
        assert_eq!(Lanes::new(4, 3).bits_per_symbol(), 2);
        assert_eq!(Lanes::new(4, 4).bits_per_symbol(), 2);
        assert_eq!(Lanes::new(4, 5).bits_per_symbol(), 4);
        assert_eq!(Lanes::new(4, 17).bits_per_symbol(), 8);
        assert_eq!(Lanes::new(4, 256).bits_per_symbol(), 8);
        assert!(Lanes::new(64, 2).fits_u64());
        assert!(!Lanes::new(33, 3).fits_u64());
    }

    fn word_strategy() -> impl Strategy<Value = (Word, Word)> {
        (2u16..=6, 1usize..=16).prop_flat_map(|(q, n)| {
            let sym = proptest::collection::vec(0..q as u8, n);
            (sym.clone(), sym).prop_map(move |(a, b)| (Word::new(a, q).unwrap(), Word::new(b, q).unwrap()))
        })
    }

    proptest! {
        #[test]
        fn packed_u64_matches_words((x, y) in word_strategy(), i in 0usize..40) {
            let lanes = Lanes::new(x.len(), x.q());
            let (px, py) = (lanes.pack_word(&x), lanes.pack_word(&y));
            prop_assert_eq!(lanes.unpack(px), x.symbols().to_vec());
            prop_assert_eq!(lanes.distance(px, py) as usize, hamming_distance(&x, &y).unwrap());
            prop_assert_eq!(lanes.rotate(px, i), lanes.pack_word(&x.cyclic_shift(i)));
            let j = i % x.len();
            let s = y.symbols()[j];
            prop_assert_eq!(lanes.symbol(lanes.with_symbol(px, j, s), j), s);
        }

        #[test]
        fn multi_limb_matches_words(q in 2u16..=9, symbols in proptest::collection::vec(0u8..9, 2..150)) {
            let symbols: Vec<u8> = symbols.into_iter().map(|s| s % q as u8).collect();
            let word = Word::new(symbols, q).unwrap();
            let packed = PackedWord::from_word(&word);
            for i in 1..word.len() {
                prop_assert_eq!(packed.shift_distance(i), hamming_distance(&word, &word.cyclic_shift(i)).unwrap());
            }
            let d = min_cyclic_autodistance(&word).unwrap();
            prop_assert_eq!(packed.min_autodistance(), d);
            prop_assert!(packed.autodistance_at_most(d));
            if d > 0 {
                prop_assert!(!packed.autodistance_at_most(d - 1));
            }
        }
    }
}
