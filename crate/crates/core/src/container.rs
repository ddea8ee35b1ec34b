//! On-disk format for a compressed tensor.
//!
//! The tensor is cut into chunks of `chunk_size` values (the last one may be
//! shorter). Every chunk is coded independently with a fresh coder against
//! the shared table, so chunks can be encoded and decoded in parallel.
//!
//! ```text
//! offset  size         field
//! 0       4            magic "APK1"
//! 4       1            version = 1
//! 5       1            value width in bits = 8
//! 6       8            num_values            (u64 LE)
//! 14      4            chunk_size            (u32 LE)
//! 18      4            num_chunks            (u32 LE)
//! 22      16           v_min per row         (u8)
//! 38      32           c_hi per row          (u16 LE, 10 significant bits)
//! 70      8*num_chunks per chunk: sym_len u32 LE, ofs_len u32 LE
//! ...                  payloads in chunk order: symbol bytes, then offset bytes
//! ```
//!
//! A standalone table file is `"APKT"` followed by the same 48 table bytes.

use rayon::prelude::*;

use crate::coder::{decode_stream_exact, encode_stream};
use crate::codetable::{CodeTable, ROWS};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"APK1";
pub const TABLE_MAGIC: &[u8; 4] = b"APKT";
pub const VERSION: u8 = 1;
pub const VALUE_WIDTH: u8 = 8;
/// Serialized table: 16 `v_min` bytes then 16 little-endian `c_hi` words.
pub const TABLE_LEN: usize = ROWS * 3;
/// Fixed header bytes before the per-chunk length pairs.
pub const HEADER_LEN: usize = 4 + 1 + 1 + 8 + 4 + 4 + TABLE_LEN;
pub const CHUNK_ENTRY_LEN: usize = 8;
pub const DEFAULT_CHUNK_SIZE: u32 = 4096;

const TABLE_OFFSET: usize = 22;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chunk {
    pub symbols: Vec<u8>,
    pub offsets: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompressedTensor {
    pub num_values: u64,
    pub chunk_size: u32,
    pub table: CodeTable,
    pub chunks: Vec<Chunk>,
}

fn expected_chunks(num_values: u64, chunk_size: u32) -> u64 {
    num_values.div_ceil(chunk_size as u64)
}

impl CompressedTensor {
    /// Values held by chunk `index`.
    pub fn chunk_len(&self, index: usize) -> u64 {
        let start = index as u64 * self.chunk_size as u64;
        (self.num_values - start).min(self.chunk_size as u64)
    }

    /// Bytes of symbol and offset payload, excluding all framing.
    pub fn payload_len(&self) -> u64 {
        self.chunks
            .iter()
            .map(|c| (c.symbols.len() + c.offsets.len()) as u64)
            .sum()
    }

    /// Header plus chunk length table.
    pub fn framing_len(&self) -> u64 {
        (HEADER_LEN + CHUNK_ENTRY_LEN * self.chunks.len()) as u64
    }

    pub fn serialized_len(&self) -> u64 {
        self.framing_len() + self.payload_len()
    }

    /// `8 * num_values / total serialized bits`.
    pub fn ratio(&self) -> f64 {
        self.num_values as f64 / self.serialized_len() as f64
    }
}

/// Codes `values` chunk by chunk with `table`.
pub fn compress_tensor(
    values: &[u8],
    table: &CodeTable,
    chunk_size: u32,
) -> Result<CompressedTensor> {
    if chunk_size == 0 {
        return Err(Error::format(14, "chunk size must be at least 1"));
    }
    let encoded: Vec<Result<Chunk>> = values
        .par_chunks(chunk_size as usize)
        .enumerate()
        .map(|(index, part)| {
            let e = encode_stream(part, table).map_err(|e| match e {
                Error::ZeroProbabilitySymbol {
                    value, position, ..
                } => Error::ZeroProbabilitySymbol {
                    value,
                    position: index as u64 * chunk_size as u64 + position,
                    chunk: Some(index),
                },
                e => e,
            })?;
            Ok(Chunk {
                symbols: e.symbols,
                offsets: e.offsets,
            })
        })
        .collect();
    Ok(CompressedTensor {
        num_values: values.len() as u64,
        chunk_size,
        table: table.clone(),
        chunks: encoded.into_iter().collect::<Result<_>>()?,
    })
}

/// Decodes all chunks in parallel.
pub fn decompress_tensor(ct: &CompressedTensor) -> Result<Vec<u8>> {
    decompress_with(ct, true)
}

/// Decodes chunks one after another on the calling thread.
pub fn decompress_tensor_serial(ct: &CompressedTensor) -> Result<Vec<u8>> {
    decompress_with(ct, false)
}

fn decompress_with(ct: &CompressedTensor, parallel: bool) -> Result<Vec<u8>> {
    if ct.chunk_size == 0 {
        return Err(Error::format(14, "chunk size must be at least 1"));
    }
    if ct.chunks.len() as u64 != expected_chunks(ct.num_values, ct.chunk_size) {
        return Err(Error::format(
            18,
            format!(
                "{} chunks present, {} values at {} per chunk need {}",
                ct.chunks.len(),
                ct.num_values,
                ct.chunk_size,
                expected_chunks(ct.num_values, ct.chunk_size)
            ),
        ));
    }
    let decode = |(index, chunk): (usize, &Chunk)| {
        decode_stream_exact(
            &chunk.symbols,
            &chunk.offsets,
            &ct.table,
            ct.chunk_len(index),
        )
        .map_err(|e| match e {
            Error::CorruptStream { reason } => Error::corrupt(format!("chunk {index}: {reason}")),
            e => e,
        })
    };
    let parts: Vec<Result<Vec<u8>>> = if parallel {
        ct.chunks.par_iter().enumerate().map(decode).collect()
    } else {
        ct.chunks.iter().enumerate().map(decode).collect()
    };
    let mut out = Vec::with_capacity(ct.num_values.min(1 << 30) as usize);
    for part in parts {
        out.extend_from_slice(&part?);
    }
    Ok(out)
}

fn put_table(out: &mut Vec<u8>, table: &CodeTable) {
    out.extend(table.entries().iter().map(|e| e.v_min));
    for e in table.entries() {
        out.extend_from_slice(&e.c_hi.to_le_bytes());
    }
}

fn get_table(bytes: &[u8], at: usize) -> Result<CodeTable> {
    let v_mins: [u8; ROWS] = bytes[..ROWS].try_into().expect("table slice");
    let c_his: [u16; ROWS] =
        std::array::from_fn(|i| u16::from_le_bytes([bytes[ROWS + 2 * i], bytes[ROWS + 2 * i + 1]]));
    CodeTable::from_parts(v_mins, c_his).map_err(|e| Error::format(at as u64, e.to_string()))
}

pub fn serialize(ct: &CompressedTensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(ct.serialized_len() as usize);
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(VALUE_WIDTH);
    out.extend_from_slice(&ct.num_values.to_le_bytes());
    out.extend_from_slice(&ct.chunk_size.to_le_bytes());
    out.extend_from_slice(&(ct.chunks.len() as u32).to_le_bytes());
    put_table(&mut out, &ct.table);
    for c in &ct.chunks {
        out.extend_from_slice(&(c.symbols.len() as u32).to_le_bytes());
        out.extend_from_slice(&(c.offsets.len() as u32).to_le_bytes());
    }
    for c in &ct.chunks {
        out.extend_from_slice(&c.symbols);
        out.extend_from_slice(&c.offsets);
    }
    out
}

/// Bounds-checked little-endian reader that reports byte offsets.
struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::format(
                self.pos as u64,
                format!(
                    "truncated {what}: need {n} bytes, {} left",
                    self.bytes.len() - self.pos
                ),
            ));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

pub fn parse(bytes: &[u8]) -> Result<CompressedTensor> {
    let mut cur = Cursor { bytes, pos: 0 };
    if cur
        .take(4, "magic")
        .map_err(|_| Error::format(0, "bad magic"))?
        != MAGIC
    {
        return Err(Error::format(0, "bad magic"));
    }
    let version = cur.u8("version")?;
    if version != VERSION {
        return Err(Error::format(4, format!("unsupported version {version}")));
    }
    let width = cur.u8("value width")?;
    if width != VALUE_WIDTH {
        return Err(Error::format(5, format!("unsupported value width {width}")));
    }
    let num_values = cur.u64("value count")?;
    let chunk_size = cur.u32("chunk size")?;
    if chunk_size == 0 {
        return Err(Error::format(14, "chunk size must be at least 1"));
    }
    let num_chunks = cur.u32("chunk count")?;
    if num_chunks as u64 != expected_chunks(num_values, chunk_size) {
        return Err(Error::format(
            18,
            format!("chunk count {num_chunks} does not match {num_values} values at {chunk_size} per chunk"),
        ));
    }
    let table = get_table(cur.take(TABLE_LEN, "table")?, TABLE_OFFSET)?;

    let num_chunks = num_chunks as usize;
    if cur.remaining() / CHUNK_ENTRY_LEN < num_chunks {
        return Err(Error::format(
            cur.pos as u64,
            "chunk length table exceeds file size",
        ));
    }
    let mut lengths = Vec::with_capacity(num_chunks);
    for _ in 0..num_chunks {
        let at = cur.pos as u64;
        let sym = cur.u32("symbol length")? as u64;
        let ofs = cur.u32("offset length")? as u64;
        lengths.push((at, sym as usize, ofs as usize));
    }
    let mut chunks = Vec::with_capacity(num_chunks);
    for (at, sym, ofs) in lengths {
        if (sym as u64 + ofs as u64) > cur.remaining() as u64 {
            return Err(Error::format(
                at,
                "declared chunk length exceeds remaining file size",
            ));
        }
        chunks.push(Chunk {
            symbols: cur.take(sym, "symbol payload")?.to_vec(),
            offsets: cur.take(ofs, "offset payload")?.to_vec(),
        });
    }
    if cur.remaining() != 0 {
        return Err(Error::format(
            cur.pos as u64,
            format!("{} trailing bytes", cur.remaining()),
        ));
    }
    Ok(CompressedTensor {
        num_values,
        chunk_size,
        table,
        chunks,
    })
}

pub fn serialize_table(table: &CodeTable) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 + TABLE_LEN);
    out.extend_from_slice(TABLE_MAGIC);
    put_table(&mut out, table);
    out
}

pub fn parse_table(bytes: &[u8]) -> Result<CodeTable> {
    if bytes.len() < 4 || &bytes[..4] != TABLE_MAGIC {
        return Err(Error::format(0, "bad table magic"));
    }
    if bytes.len() != 4 + TABLE_LEN {
        return Err(Error::format(
            bytes.len().min(4 + TABLE_LEN) as u64,
            format!(
                "table file is {} bytes, expected {}",
                bytes.len(),
                4 + TABLE_LEN
            ),
        ));
    }
    get_table(&bytes[4..], 4)
}
