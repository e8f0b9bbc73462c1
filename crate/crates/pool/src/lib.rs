//! Deterministic term-structure AMM pool.
//!
//! The library models a pool that trades fixed-rate positions (longs and
//! shorts) against a yield-bearing share reserve, with:
//!
//! - a power-sum pricing curve over effective share and bond reserves,
//! - flat/curve fee splits with governance carve-outs,
//! - checkpointed position aggregation and automatic maturity settlement,
//! - matured-but-unredeemed ("zombie") balances that keep accruing yield
//!   for the pool,
//! - a present-value based LP system with withdrawal shares paid out of
//!   measurable idle capital,
//! - a deterministic scenario engine driving all of the above from event
//!   streams, with seeded stochastic rate models.
//!
//! Everything runs on [`fixedmath::FixedDecimal`] (18-decimal fixed point);
//! given identical inputs, every run produces bit-identical state.

pub mod checkpoints;
pub mod curve;
pub mod error;
pub mod lp;
pub mod solver;
pub mod oracle;
pub mod scenario;
pub mod state;
pub mod trading;
pub mod yield_source;

pub use error::PoolError;
pub use state::{CheckpointRecord, PoolConfig, PoolState};
pub use trading::{PositionKind, PositionReceipt};
