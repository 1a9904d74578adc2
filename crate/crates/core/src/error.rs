use std::io;

use thiserror::Error;

use crate::sketch::Scheme;
use crate::weighted_set::FeatureId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("feature {feature} has negative weight {value}")]
    NegativeWeight { feature: FeatureId, value: f64 },
    #[error("feature {feature} has a non-finite weight")]
    NonFiniteWeight { feature: FeatureId },
    #[error("feature {0} appears more than once")]
    DuplicateFeature(FeatureId),
    #[error("malformed LIBSVM line: {0}")]
    MalformedLine(String),
    #[error("feature index {next} does not follow {prev}; indices must strictly increase")]
    NonMonotonicIndex { prev: u64, next: u64 },
    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("scale factor {0} must be positive and finite")]
    InvalidScale(f64),
    #[error("dataset has no rows")]
    EmptyDataset,

    #[error("pool size must be at least 1")]
    ZeroSize,
    #[error("pool has no values")]
    EmptyPool,
    #[error("pool value {0} is not strictly positive and finite")]
    InvalidPoolValue(f64),

    #[error("cannot min-hash an empty set")]
    EmptySet,
    #[error("sketch length must be at least 1")]
    ZeroLength,
    #[error("sketch schemes differ: {0} vs {1}")]
    SchemeMismatch(Scheme, Scheme),
    #[error("sketch lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("sketches were built from different pools or seeds")]
    PoolMismatch,
    #[error("similarity of two empty sets is undefined")]
    BothEmpty,

    #[error("expected a 0-bit sketch, got {0}")]
    WrongScheme(Scheme),
    #[error("bits per hash must be in 1..=16, got {0}")]
    InvalidBits(u32),

    #[error("kappa {kappa} exceeds the {available} available candidates")]
    KappaTooLarge { kappa: usize, available: usize },
    #[error("ranked list has {len} entries, fewer than kappa = {kappa}")]
    ListTooShort { len: usize, kappa: usize },

    #[error("bad {what} file: {reason}")]
    BadFormat { what: &'static str, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn at_line(self, line: usize) -> Self {
        Error::AtLine {
            line,
            source: Box::new(self),
        }
    }
}
