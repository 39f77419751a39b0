use thiserror::Error;

/// Errors raised anywhere in the crate.
///
/// The exact-arithmetic variants (`ChannelResidue`, `BetaMismatch`) indicate
/// an internal inconsistency rather than bad input; the CLI maps them to
/// exit code 1.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("product of two series that both carry a log(z) channel")]
    LogSquared,
    #[error("product would produce a nonzero gamma^2 term")]
    GammaOverflow,
    #[error("division by a series that is zero through order {order}")]
    DivideByZeroSeries { order: i64 },
    #[error("divisor carries a log(z) or gamma channel")]
    NonRationalDivisor,
    #[error("series valuation {valuation} below supported minimum {min}")]
    ValuationUnderflow { valuation: i64, min: i64 },
    #[error("series {name} has nonzero gamma/log residue at z^{power}")]
    ChannelResidue { name: String, power: i64 },
    #[error("series {name} is only known through z^{known}, need z^{needed}")]
    InsufficientOrder { name: String, known: i64, needed: i64 },
    #[error("beta^{level}_{q} = {got}, expected {expected}")]
    BetaMismatch {
        level: usize,
        q: usize,
        got: String,
        expected: String,
    },
    #[error("kernel tables are for n = {tables}, requested n = {requested}")]
    TableLevelMismatch { tables: usize, requested: usize },
    #[error("the one-step lifted kernel has a Dirac factor in r and cannot be evaluated pointwise")]
    DiracEvaluation,
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("unknown identity {0:?}")]
    UnknownIdentity(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures that indicate a bug or an inconsistent computation
    /// rather than bad input.
    pub fn is_internal(&self) -> bool {
        !matches!(
            self,
            Error::Domain(_) | Error::UnknownIdentity(_) | Error::InvalidParameter(_) | Error::TableLevelMismatch { .. }
        )
    }
}
