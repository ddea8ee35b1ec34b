//! Value-range partition and probability-count table.
//!
//! The 8-bit value space is split into [`ROWS`] contiguous ranges. A value
//! `v` falling in row `i` is coded as the pair `(i, v - v_min[i])`: the row
//! index goes through the arithmetic coder, the offset is stored verbatim in
//! `offset_length(i)` bits.
//!
//! Each row owns the probability-count interval `[c_lo, c_hi)` where `c_lo`
//! is the previous row's `c_hi` (0 for row 0). Only `v_min` and `c_hi` are
//! stored; everything else is derived.

use crate::error::{Error, Result};

/// Number of rows in a table.
pub const ROWS: usize = 16;
/// Width of a probability count.
pub const COUNT_BITS: u32 = 10;
/// Largest probability count. The last row's `c_hi` always equals this.
pub const COUNT_MAX: u16 = (1 << COUNT_BITS) - 1;
/// Probabilities are counts scaled by `2^COUNT_BITS`.
pub const COUNT_SCALE: u32 = 1 << COUNT_BITS;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RangeEntry {
    /// Inclusive lower bound of the value range.
    pub v_min: u8,
    /// Exclusive upper bound of the row's probability-count interval.
    pub c_hi: u16,
}

/// A validated 16-row symbol/probability table.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CodeTable {
    entries: [RangeEntry; ROWS],
    row_of: [u8; 256],
}

impl CodeTable {
    /// Builds a table, rejecting anything that breaks the structural rules.
    pub fn new(entries: [RangeEntry; ROWS]) -> Result<Self> {
        validate(&entries)?;
        let mut row_of = [0u8; 256];
        for (row, e) in entries.iter().enumerate() {
            let end = entries.get(row + 1).map_or(256, |n| n.v_min as usize);
            row_of[e.v_min as usize..end].fill(row as u8);
        }
        Ok(CodeTable { entries, row_of })
    }

    pub fn from_parts(v_mins: [u8; ROWS], c_his: [u16; ROWS]) -> Result<Self> {
        let mut entries = [RangeEntry { v_min: 0, c_hi: 0 }; ROWS];
        for (e, (&v_min, &c_hi)) in entries.iter_mut().zip(v_mins.iter().zip(&c_his)) {
            *e = RangeEntry { v_min, c_hi };
        }
        Self::new(entries)
    }

    /// Builds a table from per-row counts (not cumulative).
    pub fn from_counts(v_mins: [u8; ROWS], counts: [u16; ROWS]) -> Result<Self> {
        let mut c_his = [0u16; ROWS];
        let mut acc = 0u32;
        for (c_hi, &n) in c_his.iter_mut().zip(&counts) {
            acc += n as u32;
            if acc > COUNT_MAX as u32 {
                return Err(Error::TableInvalid {
                    reason: format!("counts sum above {COUNT_MAX:#x}"),
                });
            }
            *c_hi = acc as u16;
        }
        Self::from_parts(v_mins, c_his)
    }

    pub fn entries(&self) -> &[RangeEntry; ROWS] {
        &self.entries
    }

    pub fn v_min(&self, row: usize) -> u8 {
        self.entries[row].v_min
    }

    pub fn v_max(&self, row: usize) -> u8 {
        match self.entries.get(row + 1) {
            Some(next) => next.v_min - 1,
            None => u8::MAX,
        }
    }

    pub fn c_lo(&self, row: usize) -> u16 {
        if row == 0 {
            0
        } else {
            self.entries[row - 1].c_hi
        }
    }

    pub fn c_hi(&self, row: usize) -> u16 {
        self.entries[row].c_hi
    }

    /// Width `c_hi - c_lo` of the row's count interval.
    pub fn count(&self, row: usize) -> u16 {
        self.c_hi(row) - self.c_lo(row)
    }

    pub fn counts(&self) -> [u16; ROWS] {
        std::array::from_fn(|row| self.count(row))
    }

    pub fn v_mins(&self) -> [u8; ROWS] {
        self.entries.map(|e| e.v_min)
    }

    /// Minimal number of bits that can hold `v_max - v_min`.
    pub fn offset_length(&self, row: usize) -> u32 {
        bit_width((self.v_max(row) - self.v_min(row)) as u32)
    }

    /// Maps a value to `(row, offset, offset_bits)`.
    #[inline]
    pub fn symbol_of_value(&self, v: u8) -> (usize, u32, u32) {
        let row = self.row_of[v as usize] as usize;
        (
            row,
            (v - self.entries[row].v_min) as u32,
            self.offset_length(row),
        )
    }

    /// Inverse of [`symbol_of_value`](Self::symbol_of_value).
    pub fn value_of_symbol(&self, row: usize, offset: u32) -> Result<u8> {
        let max = (self.v_max(row) - self.v_min(row)) as u32;
        if offset > max {
            return Err(Error::OffsetOutOfRange { row, offset, max });
        }
        Ok(self.v_min(row) + offset as u8)
    }

    /// `count / 1024`, the probability the coder effectively assigns the row.
    pub fn probability_of_row(&self, row: usize) -> f64 {
        self.count(row) as f64 / COUNT_SCALE as f64
    }
}

/// Number of bits needed to represent `x` (0 for 0).
pub fn bit_width(x: u32) -> u32 {
    u32::BITS - x.leading_zeros()
}

/// Checks the structural rules of a table.
pub fn validate(entries: &[RangeEntry; ROWS]) -> Result<()> {
    let invalid = |reason: String| Err(Error::TableInvalid { reason });
    if entries[0].v_min != 0 {
        return invalid(format!(
            "row 0 v_min is {:#04x}, must be 0x00",
            entries[0].v_min
        ));
    }
    for i in 1..ROWS {
        if entries[i].v_min <= entries[i - 1].v_min {
            return invalid(format!(
                "v_min not strictly increasing at row {i} ({:#04x} after {:#04x})",
                entries[i].v_min,
                entries[i - 1].v_min
            ));
        }
        if entries[i].c_hi < entries[i - 1].c_hi {
            return invalid(format!(
                "c_hi decreases at row {i} ({:#05x} after {:#05x})",
                entries[i].c_hi,
                entries[i - 1].c_hi
            ));
        }
    }
    if let Some((i, e)) = entries.iter().enumerate().find(|(_, e)| e.c_hi > COUNT_MAX) {
        return invalid(format!("row {i} c_hi {:#x} exceeds {COUNT_MAX:#x}", e.c_hi));
    }
    if entries[ROWS - 1].c_hi != COUNT_MAX {
        return invalid(format!(
            "last row c_hi is {:#05x}, must be {COUNT_MAX:#05x}",
            entries[ROWS - 1].c_hi
        ));
    }
    Ok(())
}

/// 256-bucket value-frequency profile.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Histogram {
    buckets: [u64; 256],
    total: u64,
}

impl Default for Histogram {
    fn default() -> Self {
        Histogram {
            buckets: [0; 256],
            total: 0,
        }
    }
}

impl Histogram {
    pub fn from_values(values: &[u8]) -> Self {
        let mut h = Histogram::default();
        h.add_values(values);
        h
    }

    pub fn from_buckets(buckets: [u64; 256]) -> Self {
        Histogram {
            buckets,
            total: buckets.iter().sum(),
        }
    }

    pub fn add_values(&mut self, values: &[u8]) {
        for &v in values {
            self.buckets[v as usize] += 1;
        }
        self.total += values.len() as u64;
    }

    /// Sums another profile into this one.
    pub fn merge(&mut self, other: &Histogram) {
        for (a, b) in self.buckets.iter_mut().zip(&other.buckets) {
            *a += b;
        }
        self.total += other.total;
    }

    pub fn buckets(&self) -> &[u64; 256] {
        &self.buckets
    }

    pub fn get(&self, v: u8) -> u64 {
        self.buckets[v as usize]
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }
}
