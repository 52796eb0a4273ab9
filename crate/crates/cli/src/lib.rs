//! Library surface of the svpforge tool: file formats, manifests,
//! instance I/O, caps, and the command implementations, kept callable
//! for integration tests.

pub mod caps;
pub mod commands;
pub mod formats;
pub mod instance_io;
pub mod manifest;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] svpforge_core::Error),
    #[error(transparent)]
    Parse(#[from] formats::ParseError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Other(String),
}

/// Exit status semantics: `MathNo` is the "the math said no" outcome
/// (violated constraints, gap inconclusive, decomposition Fail), exit
/// code 2; tool failures are errors, exit code 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    MathNo,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::MathNo => 2,
        }
    }
}
