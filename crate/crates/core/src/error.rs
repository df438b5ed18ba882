use thiserror::Error;

/// Errors raised by the library. Each variant maps to a process exit class in the CLI.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid domain: {0}")]
    Domain(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("capacity exceeded: {what} = {got}, limit {limit}")]
    Capacity {
        what: &'static str,
        got: usize,
        limit: usize,
    },
    #[error("unresolvable loop: angle step {step:.4} rad at position {at}")]
    Resolution { step: f64, at: usize },
    #[error("parity inconsistency at plaquette ({i}, {j}): winding {winding}, cut crossings {crossings}")]
    Parity {
        i: i64,
        j: i64,
        winding: i64,
        crossings: usize,
    },
    #[error("lifting mismatch at node {node}: pairing value {xi:.3e}")]
    Mismatch { node: usize, xi: f64 },
    #[error("malformed edge set: dual vertex ({i}, {j}) has odd degree {degree} and no contact tag")]
    Malformed { i: i64, j: i64, degree: usize },
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("io: {0}")]
    Io(String),
    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
