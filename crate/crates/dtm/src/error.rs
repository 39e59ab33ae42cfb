//! Error types for every subsystem, plus the umbrella [`Error`] used by the
//! harness and CLI.

use thiserror::Error;

/// Traffic-simulation errors.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TrafficError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("unknown link {0}")]
    UnknownLink(u32),
    #[error("unknown vehicle {0}")]
    UnknownVehicle(u32),
    #[error("invalid adjustment: {0}")]
    InvalidAdjustment(String),
}

/// Trading-engine errors. Failed operations leave the ledger unchanged.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MarketError {
    #[error("agent {0} already registered")]
    DuplicateAgent(String),
    #[error("unknown agent {0}")]
    UnknownAgent(String),
    #[error("insufficient funds for {agent}: need {need}, have {have}")]
    InsufficientFunds {
        agent: String,
        need: crate::currency::Currency,
        have: crate::currency::Currency,
    },
    #[error("unknown proposal {0}")]
    UnknownProposal(u64),
    #[error("proposal {0} is no longer open")]
    ProposalClosed(u64),
}

/// Negotiation errors.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NegotiationError {
    #[error("negotiation ended without agreement")]
    NoAgreement,
}

/// Metrics errors.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("no vehicles in population")]
    EmptyPopulation,
}

/// LLM client errors.
#[derive(Debug, Error)]
pub enum LlmError {
    #[error("request timed out after {0} attempts")]
    Timeout(u32),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("rate limited by endpoint")]
    RateLimited,
    #[error("malformed response: {0}")]
    MalformedResponse(String),
}

/// Configuration errors carry the offending line or key.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("config parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("config value out of range: {0}")]
    Range(String),
    #[error("cannot read config: {0}")]
    Io(String),
}

/// Umbrella error for harness operations and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Traffic(#[from] TrafficError),
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error(transparent)]
    Negotiation(#[from] NegotiationError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("replay fixture error: {0}")]
    Replay(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// CLI exit code: 1 for configuration problems, 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            _ => 2,
        }
    }
}
