//! MSB-first bit packing for the symbol and offset streams.

/// Accumulates bits into bytes, most significant bit first.
#[derive(Clone, Debug, Default)]
pub struct BitWriter {
    buf: Vec<u8>,
    cur: u8,
    filled: u32,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn write_bit(&mut self, bit: bool) {
        self.cur = (self.cur << 1) | bit as u8;
        self.filled += 1;
        if self.filled == 8 {
            self.buf.push(self.cur);
            self.cur = 0;
            self.filled = 0;
        }
    }

    /// Writes the low `n` bits of `value`, most significant first.
    #[inline]
    pub fn write_bits(&mut self, value: u32, n: u32) {
        debug_assert!(n <= 32);
        for i in (0..n).rev() {
            self.write_bit((value >> i) & 1 == 1);
        }
    }

    #[inline]
    pub fn write_repeated(&mut self, bit: bool, n: u64) {
        for _ in 0..n {
            self.write_bit(bit);
        }
    }

    /// Bits written so far, excluding padding.
    pub fn bit_len(&self) -> u64 {
        self.buf.len() as u64 * 8 + self.filled as u64
    }

    /// Pads with zero bits to a byte boundary and returns the bytes.
    pub fn finish(mut self) -> Vec<u8> {
        if self.filled > 0 {
            self.buf.push(self.cur << (8 - self.filled));
        }
        self.buf
    }
}

/// Reads bits most significant first. Reading past the end yields zeros.
#[derive(Clone, Debug)]
pub struct BitReader<'a> {
    data: &'a [u8],
    pos: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        BitReader { data, pos: 0 }
    }

    #[inline]
    pub fn read_bit(&mut self) -> bool {
        let byte = (self.pos >> 3) as usize;
        let bit = match self.data.get(byte) {
            Some(b) => (b >> (7 - (self.pos & 7))) & 1 == 1,
            None => false,
        };
        self.pos += 1;
        bit
    }

    #[inline]
    pub fn read_bits(&mut self, n: u32) -> u32 {
        debug_assert!(n <= 32);
        (0..n).fold(0, |acc, _| (acc << 1) | self.read_bit() as u32)
    }

    /// Bits consumed, including any read past the end.
    pub fn position(&self) -> u64 {
        self.pos
    }

    pub fn len_bits(&self) -> u64 {
        self.data.len() as u64 * 8
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn packs_msb_first() {
        let mut w = BitWriter::new();
        w.write_bits(0b00, 2);
        w.write_bits(0b01, 2);
        w.write_bits(0b11, 2);
        assert_eq!(w.bit_len(), 6);
        assert_eq!(w.finish(), vec![0b0001_1100]);
    }

    #[test]
    fn zero_width_write_is_noop() {
        let mut w = BitWriter::new();
        w.write_bits(0xFF, 0);
        assert_eq!(w.bit_len(), 0);
        assert!(w.finish().is_empty());
    }

    #[test]
    fn exhausted_reader_yields_zeros() {
        let mut r = BitReader::new(&[0xFF]);
        assert_eq!(r.read_bits(8), 0xFF);
        assert_eq!(r.read_bits(16), 0);
        assert_eq!(r.position(), 24);
        assert_eq!(r.len_bits(), 8);
    }

    proptest! {
        #[test]
        fn fields_roundtrip(fields in proptest::collection::vec((any::<u32>(), 0u32..=32), 0..64)) {
            let mut w = BitWriter::new();
            for &(v, n) in &fields {
                w.write_bits(v, n);
            }
            let total = w.bit_len();
            let bytes = w.finish();
            prop_assert_eq!(bytes.len() as u64, total.div_ceil(8));
            let mut r = BitReader::new(&bytes);
            for &(v, n) in &fields {
                let mask = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
                prop_assert_eq!(r.read_bits(n), v & mask);
            }
        }
    }
}
