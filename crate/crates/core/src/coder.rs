//! Fixed-precision arithmetic coder over table rows.
//!
//! The coder keeps a 16-bit window (`hi`, `lo`) onto arbitrary-precision
//! interval bounds; `hi` slides over an implicit suffix of 1s and `lo` over
//! 0s. A row's sub-interval is
//!
//! ```text
//! range = hi - lo + 1
//! hi'   = lo + ((range * c_hi) >> 10) - 1
//! lo'   = lo + ((range * c_lo) >> 10)
//! ```
//!
//! after which settled leading bits are shifted out one at a time. When the
//! window straddles the midpoint without a settled bit (`lo` in the second
//! quarter, `hi` in the third) the second bit is dropped and counted as a
//! pending underflow bit, emitted later as the inverse of the next settled
//! bit.
//!
//! Each value also produces a verbatim offset written to a second stream.

use crate::bitio::{BitReader, BitWriter};
use crate::codetable::{CodeTable, COUNT_BITS, COUNT_MAX};
use crate::error::{Error, Result};

const TOP: u32 = 0xFFFF;
const HALF: u32 = 0x8000;
const QUARTER: u32 = 0x4000;
const THREE_QUARTERS: u32 = 0xC000;

#[inline]
fn scale(range: u32, count: u16) -> u32 {
    // range is at most 0x10000 and count at most 10 bits: fits in 27 bits.
    (range * count as u32) >> COUNT_BITS
}

/// Snapshot of the encoder registers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EncoderState {
    pub hi: u16,
    pub lo: u16,
    /// Outstanding underflow bits.
    pub ubc: u64,
}

impl Default for EncoderState {
    fn default() -> Self {
        EncoderState {
            hi: TOP as u16,
            lo: 0,
            ubc: 0,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Encoder {
    state: EncoderState,
}

impl Encoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_state(state: EncoderState) -> Self {
        debug_assert!(state.lo <= state.hi);
        Encoder { state }
    }

    pub fn state(&self) -> EncoderState {
        self.state
    }

    fn emit(&mut self, bit: bool, sink: &mut BitWriter) {
        sink.write_bit(bit);
        sink.write_repeated(!bit, self.state.ubc);
        self.state.ubc = 0;
    }

    /// Narrows the interval to `row` and shifts out settled bits.
    pub fn encode_symbol(
        &mut self,
        table: &CodeTable,
        row: usize,
        sink: &mut BitWriter,
    ) -> Result<()> {
        let (c_lo, c_hi) = (table.c_lo(row), table.c_hi(row));
        if c_hi == c_lo {
            let v = table.v_min(row);
            return Err(Error::ZeroProbabilitySymbol {
                value: v,
                position: 0,
                chunk: None,
            });
        }
        let lo = self.state.lo as u32;
        let range = self.state.hi as u32 - lo + 1;
        let mut hi = lo + scale(range, c_hi) - 1;
        let mut lo = lo + scale(range, c_lo);
        loop {
            if hi < HALF {
                self.emit(false, sink);
            } else if lo >= HALF {
                self.emit(true, sink);
                lo -= HALF;
                hi -= HALF;
            } else if lo >= QUARTER && hi < THREE_QUARTERS {
                self.state.ubc += 1;
                lo -= QUARTER;
                hi -= QUARTER;
            } else {
                break;
            }
            lo <<= 1;
            hi = (hi << 1) | 1;
        }
        self.state.hi = hi as u16;
        self.state.lo = lo as u16;
        Ok(())
    }

    /// Terminates the stream: two disambiguating bits plus pending underflow
    /// bits, then zero padding to a byte boundary.
    pub fn flush(mut self, mut sink: BitWriter) -> (Vec<u8>, u64) {
        self.state.ubc += 1;
        self.emit((self.state.lo as u32) >= QUARTER, &mut sink);
        let bits = sink.bit_len();
        (sink.finish(), bits)
    }
}

/// Snapshot of the decoder registers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecoderState {
    pub hi: u16,
    pub lo: u16,
    pub code: u16,
}

#[derive(Clone, Debug)]
pub struct Decoder<'a> {
    hi: u32,
    lo: u32,
    code: u32,
    source: BitReader<'a>,
    shifts: u64,
}

impl<'a> Decoder<'a> {
    /// Loads the first 16 bits of the stream into `code`.
    pub fn new(symbols: &'a [u8]) -> Self {
        let mut source = BitReader::new(symbols);
        let code = source.read_bits(16);
        Decoder {
            hi: TOP,
            lo: 0,
            code,
            source,
            shifts: 0,
        }
    }

    pub fn state(&self) -> DecoderState {
        DecoderState {
            hi: self.hi as u16,
            lo: self.lo as u16,
            code: self.code as u16,
        }
    }

    /// Number of renormalization shifts so far. The encoder emitted exactly
    /// `shifts + 2` bits for the same symbols once flushed.
    pub fn shifts(&self) -> u64 {
        self.shifts
    }

    pub fn bits_read(&self) -> u64 {
        self.source.position()
    }

    pub fn decode_symbol(&mut self, table: &CodeTable) -> Result<usize> {
        let range = self.hi - self.lo + 1;
        let target = self.code - self.lo;
        if target >= scale(range, COUNT_MAX) {
            return Err(Error::corrupt(format!(
                "code {:#06x} above the top of interval [{:#06x}, {:#06x}]",
                self.code, self.lo, self.hi
            )));
        }
        // c_hi is non-decreasing, so the first row whose scaled top exceeds
        // the target is the one containing it, and it has nonzero width.
        let row = (0..table.entries().len())
            .find(|&r| target < scale(range, table.c_hi(r)))
            .expect("last row covers up to the scaled top");
        let mut hi = self.lo + scale(range, table.c_hi(row)) - 1;
        let mut lo = self.lo + scale(range, table.c_lo(row));
        let mut code = self.code;
        loop {
            let shift = if hi < HALF {
                0
            } else if lo >= HALF {
                HALF
            } else if lo >= QUARTER && hi < THREE_QUARTERS {
                QUARTER
            } else {
                break;
            };
            lo -= shift;
            hi -= shift;
            code -= shift;
            lo <<= 1;
            hi = (hi << 1) | 1;
            code = (code << 1) | self.source.read_bit() as u32;
            self.shifts += 1;
        }
        self.hi = hi;
        self.lo = lo;
        self.code = code;
        Ok(row)
    }
}

/// Output of [`encode_stream`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedStream {
    pub symbols: Vec<u8>,
    pub offsets: Vec<u8>,
    pub count: u64,
    /// Symbol-stream bits before padding.
    pub symbol_bits: u64,
    /// Offset-stream bits before padding.
    pub offset_bits: u64,
}

/// Splits each value into `(row, offset)`; the rows are arithmetically coded
/// and the offsets are packed verbatim into a separate stream.
pub fn encode_stream(values: &[u8], table: &CodeTable) -> Result<EncodedStream> {
    let mut enc = Encoder::new();
    let mut symbols = BitWriter::new();
    let mut offsets = BitWriter::new();
    for (position, &v) in values.iter().enumerate() {
        let (row, offset, bits) = table.symbol_of_value(v);
        enc.encode_symbol(table, row, &mut symbols)
            .map_err(|e| match e {
                Error::ZeroProbabilitySymbol { chunk, .. } => Error::ZeroProbabilitySymbol {
                    value: v,
                    position: position as u64,
                    chunk,
                },
                e => e,
            })?;
        offsets.write_bits(offset, bits);
    }
    let offset_bits = offsets.bit_len();
    let (symbols, symbol_bits) = enc.flush(symbols);
    Ok(EncodedStream {
        symbols,
        offsets: offsets.finish(),
        count: values.len() as u64,
        symbol_bits,
        offset_bits,
    })
}

/// Decodes `count` values. Streams shorter than needed are zero-extended, so
/// a wrong `count` gives garbage or `CorruptStream`, never a panic.
pub fn decode_stream(
    symbols: &[u8],
    offsets: &[u8],
    table: &CodeTable,
    count: u64,
) -> Result<Vec<u8>> {
    decode_inner(symbols, offsets, table, count, false).map(|(values, _, _)| values)
}

/// Like [`decode_stream`], but also requires both byte buffers to be exactly
/// as long as the encoder would have produced for the decoded values, and
/// gives up as soon as either stream is read past its end.
pub fn decode_stream_exact(
    symbols: &[u8],
    offsets: &[u8],
    table: &CodeTable,
    count: u64,
) -> Result<Vec<u8>> {
    let (values, symbol_bits, offset_bits) = decode_inner(symbols, offsets, table, count, true)?;
    if symbols.len() as u64 != symbol_bits.div_ceil(8) {
        return Err(Error::corrupt(format!(
            "symbol stream is {} bytes, expected {}",
            symbols.len(),
            symbol_bits.div_ceil(8)
        )));
    }
    if offsets.len() as u64 != offset_bits.div_ceil(8) {
        return Err(Error::corrupt(format!(
            "offset stream is {} bytes, expected {}",
            offsets.len(),
            offset_bits.div_ceil(8)
        )));
    }
    Ok(values)
}

fn decode_inner(
    symbols: &[u8],
    offsets: &[u8],
    table: &CodeTable,
    count: u64,
    strict: bool,
) -> Result<(Vec<u8>, u64, u64)> {
    let mut dec = Decoder::new(symbols);
    let mut ofs = BitReader::new(offsets);
    // A valid stream is never read more than 14 bits past its padded end.
    let symbol_limit = symbols.len() as u64 * 8 + 16;
    // Cap the up-front allocation; a corrupt count must not trigger a huge one.
    let mut out = Vec::with_capacity(count.min(1 << 24) as usize);
    for _ in 0..count {
        let row = dec.decode_symbol(table)?;
        let offset = ofs.read_bits(table.offset_length(row));
        if strict && (dec.bits_read() > symbol_limit || ofs.position() > ofs.len_bits()) {
            return Err(Error::corrupt(format!(
                "stream exhausted after {} values",
                out.len()
            )));
        }
        let v = table
            .value_of_symbol(row, offset)
            .map_err(|e| Error::corrupt(e.to_string()))?;
        out.push(v);
    }
    Ok((out, dec.shifts() + 2, ofs.position()))
}
