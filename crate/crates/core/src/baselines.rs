//! Footprints of the reference methods. These only count bits; none of them
//! produce a decodable stream.

use crate::codetable::{bit_width, Histogram};
use crate::error::{Error, Result};

/// Bits per run-length tuple: 8-bit value plus 4-bit run field.
pub const TUPLE_BITS: u64 = 12;
/// Longest run field value.
pub const MAX_RUN: usize = 15;
pub const DEFAULT_GROUP_SIZE: usize = 8;
/// Bits of the per-group width field (`log2` of the 8-bit maximum precision).
pub const WIDTH_FIELD_BITS: u64 = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct MethodFootprint {
    pub method: &'static str,
    pub total_bits: u64,
    /// `8 * num_values / total_bits`; 1.0 for empty input.
    pub ratio: f64,
}

impl MethodFootprint {
    pub fn new(method: &'static str, num_values: usize, total_bits: u64) -> Self {
        let ratio = if total_bits == 0 {
            1.0
        } else {
            8.0 * num_values as f64 / total_bits as f64
        };
        MethodFootprint {
            method,
            total_bits,
            ratio,
        }
    }
}

/// Tuples of (value, extra repeats 0..=15): one tuple per run of up to 16
/// equal values.
pub fn rle_footprint(values: &[u8]) -> MethodFootprint {
    let mut tuples = 0u64;
    let mut i = 0;
    while i < values.len() {
        let v = values[i];
        let mut run = 1;
        while run <= MAX_RUN && i + run < values.len() && values[i + run] == v {
            run += 1;
        }
        i += run;
        tuples += 1;
    }
    MethodFootprint::new("rle", values.len(), tuples * TUPLE_BITS)
}

/// Tuples of (value, following zeros 0..=15). Zero runs longer than 15 are
/// continued by a tuple whose value is 0x00.
pub fn rlez_footprint(values: &[u8]) -> MethodFootprint {
    let mut tuples = 0u64;
    let mut i = 0;
    while i < values.len() {
        i += 1;
        let mut zeros = 0;
        while zeros < MAX_RUN && i < values.len() && values[i] == 0 {
            zeros += 1;
            i += 1;
        }
        tuples += 1;
    }
    MethodFootprint::new("rlez", values.len(), tuples * TUPLE_BITS)
}

/// How a group's precision is derived from its values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum WidthRule {
    /// Bit width of the largest unsigned value.
    Unsigned,
    /// Two's-complement width: leading 0s and leading 1s are both dropped,
    /// so values near 0xFF (small negatives) are as cheap as values near 0.
    #[default]
    SignExtended,
}

impl WidthRule {
    #[inline]
    pub fn width(self, v: u8) -> u32 {
        match self {
            WidthRule::Unsigned => bit_width(v as u32),
            WidthRule::SignExtended => {
                let s = v as i8;
                let magnitude = if s < 0 { !s } else { s };
                bit_width(magnitude as u32) + 1
            }
        }
    }
}

/// Groups of `group_size` values stored at the width of their widest member
/// (at least 1 bit) plus a 3-bit width field. A short last group pays only
/// for the values it has.
pub fn shapeshifter_footprint(
    values: &[u8],
    group_size: usize,
    rule: WidthRule,
) -> MethodFootprint {
    assert!(group_size >= 1, "group size must be at least 1");
    let bits = values
        .chunks(group_size)
        .map(|g| {
            let p = g.iter().map(|&v| rule.width(v)).max().unwrap_or(0).max(1);
            g.len() as u64 * p as u64 + WIDTH_FIELD_BITS
        })
        .sum();
    MethodFootprint::new("shapeshifter", values.len(), bits)
}

/// Shannon bound `sum h(v) * -log2(h(v) / total)` in bits.
pub fn entropy_bound(h: &Histogram) -> Result<f64> {
    if h.is_empty() {
        return Err(Error::EmptyHistogram);
    }
    let total = h.total() as f64;
    Ok(h.buckets()
        .iter()
        .filter(|&&n| n > 0)
        .map(|&n| {
            let n = n as f64;
            n * (total / n).log2()
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rle_sixteen_equal_is_one_tuple() {
        assert_eq!(rle_footprint(&[9; 16]).total_bits, 12);
        assert_eq!(rle_footprint(&[9; 17]).total_bits, 24);
    }

    #[test]
    fn rle_expands_distinct_neighbours() {
        let values: Vec<u8> = (0..=255).collect();
        let f = rle_footprint(&values);
        assert_eq!(f.total_bits, 3072);
        assert_eq!(f.ratio, 2048.0 / 3072.0);
    }

    #[test]
    fn rlez_example() {
        assert_eq!(rlez_footprint(&[3, 0, 0, 4]).total_bits, 24);
        // 1 + 15 zeros, then a continuation tuple for the 16th zero.
        let mut v = vec![7u8];
        v.extend([0; 16]);
        assert_eq!(rlez_footprint(&v).total_bits, 24);
        assert_eq!(rlez_footprint(&[0; 16]).total_bits, 12);
        assert_eq!(rlez_footprint(&[]).total_bits, 0);
    }

    #[test]
    fn shapeshifter_groups() {
        let g = [0x1F, 0, 3, 7, 0x10, 1, 2, 0x1F];
        assert_eq!(
            shapeshifter_footprint(&g, 8, WidthRule::Unsigned).total_bits,
            43
        );
        assert_eq!(
            shapeshifter_footprint(&[0; 8], 8, WidthRule::Unsigned).total_bits,
            11
        );
        let mut h = [1u8; 8];
        h[3] = 0x80;
        assert_eq!(
            shapeshifter_footprint(&h, 8, WidthRule::Unsigned).total_bits,
            67
        );
        // Ragged tail: 8 values then 2.
        let mut v = vec![0u8; 10];
        v[9] = 3;
        assert_eq!(
            shapeshifter_footprint(&v, 8, WidthRule::Unsigned).total_bits,
            11 + 2 * 2 + 3
        );
    }

    #[test]
    fn sign_extended_widths() {
        let w = |v| WidthRule::SignExtended.width(v);
        assert_eq!(w(0), 1);
        assert_eq!(w(0xFF), 1);
        assert_eq!(w(1), 2);
        assert_eq!(w(3), 3);
        assert_eq!(w(0xFC), 3);
        assert_eq!(w(0x7F), 8);
        assert_eq!(w(0x80), 8);
        let g = [0, 1, 2, 3, 0xFF, 0xFE, 0xFD, 0xFC];
        assert_eq!(
            shapeshifter_footprint(&g, 8, WidthRule::SignExtended).total_bits,
            27
        );
    }

    #[test]
    fn entropy_examples() {
        let uniform = Histogram::from_buckets([4; 256]);
        assert_eq!(entropy_bound(&uniform).unwrap(), 8.0 * 1024.0);
        assert_eq!(
            entropy_bound(&Histogram::from_values(&[5; 100])).unwrap(),
            0.0
        );
        let mut b = [0u64; 256];
        b[0] = 50;
        b[255] = 50;
        assert_eq!(entropy_bound(&Histogram::from_buckets(b)).unwrap(), 100.0);
        assert!(matches!(
            entropy_bound(&Histogram::default()),
            Err(Error::EmptyHistogram)
        ));
    }

    proptest! {
        #[test]
        fn shapeshifter_ignores_order_within_groups(
            groups in proptest::collection::vec(proptest::collection::vec(any::<u8>(), 8), 1..16),
            seed in any::<u64>(),
        ) {
            let flat: Vec<u8> = groups.concat();
            let mut shuffled = groups.clone();
            for (i, g) in shuffled.iter_mut().enumerate() {
                g.rotate_left(((seed >> (i % 8)) % 8) as usize);
                g.reverse();
            }
            for rule in [WidthRule::Unsigned, WidthRule::SignExtended] {
                prop_assert_eq!(
                    shapeshifter_footprint(&flat, 8, rule).total_bits,
                    shapeshifter_footprint(&shuffled.concat(), 8, rule).total_bits
                );
            }
        }
    }

    #[test]
    fn rle_depends_on_order() {
        let sorted = [1, 1, 1, 1, 2, 2, 2, 2];
        let mixed = [1, 2, 1, 2, 1, 2, 1, 2];
        assert_ne!(
            rle_footprint(&sorted).total_bits,
            rle_footprint(&mixed).total_bits
        );
    }
}
