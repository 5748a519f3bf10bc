// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid width {0}: signed formats need at least 2 bits")]
    InvalidWidth(usize),
    #[error("value {value} is not representable in {format} at width {width}")]
    OutOfRange {
        value: i64,
        format: crate::formats::Format,
        width: usize,
    },
    #[error("bit pattern {pattern} is illegal in {format}")]
    IllegalEncoding {
        pattern: String,
        format: crate::formats::Format,
    },
    #[error("netlist error: {0}")]
    Netlist(String),
    #[error("unknown wire `{0}`")]
    UnknownWire(String),
    #[error("missing value for input port `{0}`")]
    MissingInput(String),
    #[error("unknown cell kind `{0}`")]
    UnknownCellKind(String),
    #[error("port mismatch: {0}")]
    PortMismatch(String),
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("report mismatch: {0}")]
    ReportMismatch(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("integrity failure: {0}")]
    Integrity(String),
}

pub type Result<T> = std::result::Result<T, Error>;
