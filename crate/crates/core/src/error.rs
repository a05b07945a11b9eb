use crate::dsl::ParseError;
use crate::netlist::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid netlist: {}", join_violations(.0))]
    InvalidNetlist(Vec<Violation>),
    #[error("invalid net name `{0}` (expected a letter followed by letters, digits or `_`)")]
    InvalidNetName(String),
    #[error("expected {expected} input bits, got {got}")]
    InputWidth { expected: usize, got: usize },
    #[error("`{0}` is not an internal node of this netlist")]
    UnknownSite(String),
    #[error("assignment does not cover internal node `{0}`")]
    IncompleteAssignment(String),
    #[error("scenario semantics do not match the requested semantics")]
    SemanticsMismatch,
    #[error("max fault cardinality must be at least 1")]
    ZeroMaxFaults,
    #[error("no fault sites: netlist `{0}` has no internal nodes")]
    NoFaultSites(String),
    #[error("{what} must lie in [0, 1], got {value}")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("step {0} does not split [0, 1] into an integral number of intervals")]
    NonIntegralGrid(f64),
    #[error("{field} of `{voter}` must be strictly positive")]
    NonPositiveMetric { voter: String, field: &'static str },
    #[error("fmr_percent of `{0}` must lie in [0, 100]")]
    FmrPercentRange(String),
    #[error("duplicate voter `{0}`")]
    DuplicateVoter(String),
    #[error("empty {0}")]
    Empty(&'static str),
    #[error("rows come from different netlists")]
    MixedNetlists,
    #[error("unknown voter `{0}` (expected one of classical, kp, bn, proposed)")]
    UnknownVoter(String),
    #[error("malformed metrics file: {0}")]
    Metrics(String),
    #[error("{0} would exceed the enumeration limit")]
    TooLarge(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

impl Error {
    /// Errors caused by how an operation was called rather than by the data
    /// it was asked to analyse.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InputWidth { .. }
                | Error::UnknownSite(_)
                | Error::IncompleteAssignment(_)
                | Error::SemanticsMismatch
                | Error::ZeroMaxFaults
                | Error::OutOfRange { .. }
                | Error::NonIntegralGrid(_)
                | Error::Empty(_)
                | Error::MixedNetlists
        )
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}
