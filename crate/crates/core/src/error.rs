use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuctionError {
    #[error("bidder `{id}`: {reason}")]
    InvalidBidder { id: String, reason: String },
    #[error("invalid CTR curve: {0}")]
    InvalidCurve(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("auction needs at least one bidder")]
    NoBidders,
    #[error("position {position} has no slot (K = {slots})")]
    NoSlot { position: usize, slots: usize },
    #[error("position {position} is not occupied (N = {bidders})")]
    InvalidPosition { position: usize, bidders: usize },
    #[error("{0}")]
    Unsupported(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("settlement refused: {0}")]
    SettlementRefused(String),
    #[error("instance too large for brute force: N = {n}, limit {limit}")]
    TooLarge { n: usize, limit: usize },
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid field `{field}`: {message}")]
    Validation { field: String, message: String },
    #[error(transparent)]
    Auction(#[from] AuctionError),
}

impl ScenarioError {
    pub(crate) fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        ScenarioError::Validation { field: field.into(), message: message.into() }
    }
}

pub type Result<T, E = AuctionError> = std::result::Result<T, E>;
