use std::fmt;

/// Reasons a decision procedure gives up with a negative verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Reason {
    DomainNotTopdown,
    VariationBound,
    HypothesisH,
    NeedLengthBound,
    UnsatisfiableRuleNeed,
    BufferBound,
    NoDischargingSplit,
    AmbiguousAttribution,
}

impl Reason {
    pub fn code(self) -> &'static str {
        match self {
            Reason::DomainNotTopdown => "domain-not-topdown",
            Reason::VariationBound => "variation-bound",
            Reason::HypothesisH => "hypothesis-H",
            Reason::NeedLengthBound => "need-length-bound",
            Reason::UnsatisfiableRuleNeed => "unsatisfiable-rule-need",
            Reason::BufferBound => "buffer-bound",
            Reason::NoDischargingSplit => "no-discharging-split",
            Reason::AmbiguousAttribution => "ambiguous-attribution",
        }
    }

    pub fn all() -> [Reason; 8] {
        [
            Reason::DomainNotTopdown,
            Reason::VariationBound,
            Reason::HypothesisH,
            Reason::NeedLengthBound,
            Reason::UnsatisfiableRuleNeed,
            Reason::BufferBound,
            Reason::NoDischargingSplit,
            Reason::AmbiguousAttribution,
        ]
    }
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// A negative answer: the requested transducer does not exist.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub reason: Reason,
    pub stage: &'static str,
    pub detail: String,
}

impl Failure {
    pub fn new(reason: Reason, stage: &'static str, detail: impl Into<String>) -> Failure {
        Failure { reason, stage, detail: detail.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} failed ({}): {}", self.stage, self.reason, self.detail)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("invalid: {0}")]
    Invalid(String),
    #[error("{0}")]
    Pattern(String),
    #[error("empty language")]
    EmptyLanguage,
    #[error("outside state domain")]
    OutsideDomain,
    #[error("not recognizable")]
    NotRecognizable,
    #[error("{0}")]
    Failure(Failure),
    #[error("resource limit: {0}")]
    Limit(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Error {
        Error::Invalid(msg.into())
    }

    pub fn internal(msg: impl Into<String>) -> Error {
        Error::Internal(msg.into())
    }

    pub fn failure(&self) -> Option<&Failure> {
        match self {
            Error::Failure(f) => Some(f),
            _ => None,
        }
    }
}

impl From<Failure> for Error {
    fn from(f: Failure) -> Error {
        Error::Failure(f)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
