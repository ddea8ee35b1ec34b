//! Lossless compression for 8-bit quantized tensors.
//!
//! Each value is split into a range symbol, coded with a 16-bit fixed
//! precision arithmetic coder against a 16-row probability table, and a
//! verbatim offset inside that range. Tables are built per tensor from a
//! value histogram. Reference baselines (run-length, group bit-width
//! coding, entropy bound) are provided for comparison.

pub mod baselines;
pub mod bitio;
pub mod cli;
pub mod coder;
pub mod codetable;
pub mod container;
pub mod error;
pub mod gen;
pub mod report;
pub mod tablegen;

pub use codetable::{CodeTable, Histogram, RangeEntry};
pub use container::{compress_tensor, decompress_tensor, CompressedTensor};
pub use error::{Error, Result};
pub use tablegen::{build_table, SearchConfig, TableMode};
