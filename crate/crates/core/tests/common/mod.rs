//! Shared helpers for integration tests: exact-arithmetic coding oracles,
//! a table generator and a tiny deterministic RNG.

#![allow(dead_code)]

use apack::codetable::{CodeTable, COUNT_MAX, ROWS};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Infinite-precision arithmetic coding: starting from `[0, 1)`, each symbol
/// narrows the interval to its `[lo, hi)` sub-range.
pub fn oracle_encode(
    symbols: &[usize],
    ranges: &[(BigRational, BigRational)],
) -> (BigRational, BigRational) {
    let mut low = BigRational::zero();
    let mut high = BigRational::one();
    for &s in symbols {
        let (p_lo, p_hi) = &ranges[s];
        let width = &high - &low;
        high = &low + &width * p_hi;
        low = &low + &width * p_lo;
    }
    (low, high)
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Quantized cumulative ranges `count / 1024` of a table.
pub fn quantized_ranges(t: &CodeTable) -> Vec<(BigRational, BigRational)> {
    (0..ROWS)
        .map(|r| (ratio(t.c_lo(r) as i64, 1024), ratio(t.c_hi(r) as i64, 1024)))
        .collect()
}

/// Absolute-coordinate mirror of the 16-bit coder.
///
/// Interval bounds are kept as unbounded integers in units of
/// `2^-(16 + shifts)`; nothing is ever emitted or discarded. The 16-bit
/// window the real coder sees is located by `base`, so the sub-interval
/// quantization is reproduced, while the emitted bit pattern, underflow
/// bookkeeping and flush are left to be checked against the final interval.
pub struct AbsoluteCoder {
    pub low: BigInt,
    /// Inclusive.
    pub high: BigInt,
    base: BigInt,
    pub shifts: u64,
}

impl AbsoluteCoder {
    pub fn new() -> Self {
        AbsoluteCoder {
            low: BigInt::zero(),
            high: BigInt::from(0xFFFF),
            base: BigInt::zero(),
            shifts: 0,
        }
    }

    pub fn encode(&mut self, t: &CodeTable, row: usize) {
        let range: BigInt = &self.high - &self.low + 1;
        let scaled = |c: u16| (&range * BigInt::from(c)) >> 10u32;
        let new_high = &self.low + scaled(t.c_hi(row)) - 1;
        let new_low = &self.low + scaled(t.c_lo(row));
        self.low = new_low;
        self.high = new_high;
        let half = BigInt::from(0x8000);
        let quarter = BigInt::from(0x4000);
        let three_q = BigInt::from(0xC000);
        loop {
            let lo = &self.low - &self.base;
            let hi = &self.high - &self.base;
            let step = if hi < half {
                BigInt::zero()
            } else if lo >= half {
                half.clone()
            } else if lo >= quarter && hi < three_q {
                quarter.clone()
            } else {
                break;
            };
            self.base = (&self.base + step) * 2;
            self.low = &self.low * 2;
            self.high = &self.high * 2 + 1;
            self.shifts += 1;
        }
    }

    /// `[low, high + 1)` as fractions of 1.
    pub fn interval(&self) -> (BigRational, BigRational) {
        let unit = BigInt::one() << (16 + self.shifts);
        (
            BigRational::new(self.low.clone(), unit.clone()),
            BigRational::new(&self.high + 1, unit),
        )
    }
}

/// The first `bits` bits of `bytes` read as a binary fraction `0.b1 b2 ...`.
pub fn stream_fraction(bytes: &[u8], bits: u64) -> BigRational {
    let mut n = BigInt::zero();
    for i in 0..bits {
        let bit = bytes
            .get((i / 8) as usize)
            .map_or(0, |b| (b >> (7 - i % 8)) & 1);
        n = n * 2 + bit;
    }
    BigRational::new(n, BigInt::one() << bits)
}

/// SplitMix64: enough randomness for fixtures, independent of any crate.
pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }
}

/// A random valid table. Roughly a third of the rows get zero counts.
pub fn random_table(rng: &mut SplitMix) -> CodeTable {
    let mut mins: Vec<u8> = Vec::new();
    while mins.len() < ROWS - 1 {
        let v = 1 + rng.below(255) as u8;
        if !mins.contains(&v) {
            mins.push(v);
        }
    }
    mins.sort_unstable();
    let mut v_mins = [0u8; ROWS];
    v_mins[1..].copy_from_slice(&mins);

    let mut weights = [0u64; ROWS];
    for w in weights.iter_mut() {
        *w = if rng.below(3) == 0 {
            0
        } else {
            1 + rng.below(1000)
        };
    }
    if weights.iter().all(|&w| w == 0) {
        weights[rng.below(ROWS as u64) as usize] = 1;
    }
    let total: u64 = weights.iter().sum();
    let mut counts = [0u16; ROWS];
    let mut left = COUNT_MAX as u64;
    for r in 0..ROWS {
        if weights[r] > 0 {
            counts[r] = ((weights[r] * COUNT_MAX as u64 / total).max(1)) as u16;
        }
    }
    let assigned: u64 = counts.iter().map(|&c| c as u64).sum();
    // Fix up the sum on the largest row.
    let big = (0..ROWS)
        .max_by_key(|&r| (counts[r], std::cmp::Reverse(r)))
        .unwrap();
    left -= assigned - counts[big] as u64;
    counts[big] = left as u16;
    CodeTable::from_counts(v_mins, counts).expect("random table is valid")
}

/// Values whose rows have nonzero counts.
pub fn coverable_values(t: &CodeTable) -> Vec<u8> {
    (0..=255u8)
        .filter(|&v| t.count(t.symbol_of_value(v).0) > 0)
        .collect()
}

/// Synthetic tensor families used across suites.
pub fn family(name: &str, n: usize, seed: u64) -> Vec<u8> {
    use apack::gen::{generate, Distribution};
    let dist = match name {
        "uniform" => Distribution::Uniform,
        "constant" => Distribution::Constant((seed % 256) as u8),
        "two-cluster" => Distribution::TwoCluster {
            p_low: 0.5,
            spread: 4,
        },
        "sparse" => Distribution::Sparse { zero_fraction: 0.9 },
        other => panic!("unknown family {other}"),
    };
    generate(&dist, n, seed)
}
