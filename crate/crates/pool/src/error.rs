use fixedmath::{FixedDecimal, MathError};

/// Failures surfaced by pool operations and the scenario engine.
///
/// Every variant is a rejected request: state is never mutated before all
/// checks pass, so an `Err` always leaves the pool exactly as it was.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PoolError {
    #[error("pool is not initialized")]
    NotInitialized,
    #[error("pool is already initialized")]
    AlreadyInitialized,
    #[error("trade or contribution amount must be positive")]
    NonPositiveAmount,
    #[error("trade of {requested} bonds exceeds the pool maximum of {max}")]
    ExceedsMaxTrade {
        requested: FixedDecimal,
        max: FixedDecimal,
    },
    #[error("pool cannot quote this trade: {0}")]
    InsufficientLiquidity(String),
    #[error("operation would leave the pool insolvent (solvency {solvency})")]
    WouldBeInsolvent { solvency: FixedDecimal },
    #[error("unknown position receipt {0}")]
    UnknownReceipt(u64),
    #[error("position receipt {0} was already closed or redeemed")]
    ReceiptConsumed(u64),
    #[error("position {0} has not matured yet")]
    NotMatured(u64),
    #[error("position {0} is past maturity; it can only be redeemed at face value")]
    PastMaturity(u64),
    #[error("insufficient balance: {0}")]
    InsufficientBalance(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid event at index {index}: {reason}")]
    InvalidEvent { index: usize, reason: String },
    #[error("root solver did not converge: {0}")]
    SolverDiverged(String),
    #[error("arithmetic failure: {0}")]
    Math(#[from] MathError),
}
