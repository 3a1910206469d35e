use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at offset {offset}: {reason}")]
    Parse { offset: usize, reason: String },

    /// `p = 0` makes the event `D != 0` impossible, so nothing can be conditioned on it.
    #[error("success probability p = 0: the conditioning event D != 0 has probability zero")]
    ZeroProbability,

    #[error("exhaustive enumeration needs n <= {max} (got n = {n}); use dp_joint instead")]
    ResourceLimit { n: u32, max: u32 },

    #[error("the distribution puts no mass on D != 0, the conditional expectation is undefined")]
    UndefinedConditioning,

    /// The simulator ran out of attempts. The counts gathered so far are kept.
    #[error(
        "attempt cap of {cap} draws reached with only {accepted} of {target} samples accepted \
         ({rejected} draws rejected because D = 0)"
    )]
    AttemptCapReached {
        target: u64,
        cap: u64,
        accepted: u64,
        rejected: u64,
        partial_estimate: Option<f64>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
