use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid code table: {reason}")]
    TableInvalid { reason: String },

    #[error("offset {offset} out of range for row {row} (max {max})")]
    OffsetOutOfRange { row: usize, offset: u32, max: u32 },

    #[error("value {value:#04x} at position {position}{} has zero probability in the table", chunk_suffix(.chunk))]
    ZeroProbabilitySymbol {
        value: u8,
        position: u64,
        chunk: Option<usize>,
    },

    #[error("corrupt stream: {reason}")]
    CorruptStream { reason: String },

    #[error("histogram is empty")]
    EmptyHistogram,

    #[error("cannot give every row a nonzero count: only {total} counts available")]
    ImpossibleAdjustment { total: u32 },

    #[error("format error at byte {offset}: {reason}")]
    Format { offset: u64, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

fn chunk_suffix(chunk: &Option<usize>) -> String {
    match chunk {
        Some(c) => format!(" (chunk {c})"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn corrupt(reason: impl Into<String>) -> Self {
        Error::CorruptStream {
            reason: reason.into(),
        }
    }

    pub(crate) fn format(offset: u64, reason: impl Into<String>) -> Self {
        Error::Format {
            offset,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
