//! Exact building blocks for compiling 3SAT / Unambiguous-3SAT / 3COL
//! instances into GapSVP / uSVP lattice instances, together with the
//! desk-scale oracles used to check those pipelines end to end.
//!
//! Everything on an accept/reject path is exact: field arithmetic is
//! modular over explicit towers, norms are rational p-th powers, and
//! graph/spectral quantities are counted, never sampled, unless an API
//! explicitly says "estimate".

pub mod cr;
pub mod ff;
pub mod geometry;
pub mod lattice;
pub mod poly;
pub mod problem;
pub mod subexp;
pub mod superassign;

use num_bigint::BigInt;
use num_rational::Ratio;

/// Exact rational used for norms, fractions, expansions.
pub type Rat = Ratio<BigInt>;

/// Renders a rational as `num/den`, denominator always present.
pub fn rat_string(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("tower level out of range: {0}")]
    LevelOutOfRange(usize),
    #[error("field elements live at different tower levels ({0} vs {1})")]
    LevelMismatch(usize, usize),
    #[error("inverse of zero")]
    ZeroInverse,
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("interpolation table is not total on the grid")]
    TableNotTotal,
    #[error("direction vectors are linearly dependent")]
    DependentDirections,
    #[error("individual degree {got} violates bound {bound}")]
    DegreeBound { bound: u64, got: u64 },
    #[error("restriction lies outside the enumerated plane family")]
    NotInFamily,
    #[error("subset is empty")]
    EmptySubset,
    #[error("{what} exceeds the desk-scale cap ({value} > {cap})")]
    CapExceeded {
        what: &'static str,
        value: String,
        cap: String,
    },
    #[error("norm index p must be an integer > 2, got {0}")]
    BadNormIndex(u64),
    #[error("transition operator is not symmetric at pair {0:?}")]
    AsymmetricOperator(String),
    #[error("lattice rank {0} exceeds the enumeration cap {1}")]
    RankCap(usize, usize),
    #[error("lattice has no {0}-th successive minimum")]
    NoSuccessiveMinimum(usize),
    #[error("invalid parameters: {0}")]
    BadParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;
