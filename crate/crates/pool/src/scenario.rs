//! Scenario engine: replays a JSON event script against a pool.
//!
//! A scenario is a list of events — the first must be `init` — that open and
//! close positions, move liquidity, advance time, and change the variable
//! rate. The engine owns everything the pool itself does not track: actor
//! wallets, receipt issuance and consumption, the first-come-first-served
//! withdrawal queue, and a base-conservation ledger used as a per-event
//! invariant check.
//!
//! Every event produces one [`TrajectoryRecord`]. Failing events are
//! recorded with their error and roll the engine back to its pre-event
//! snapshot, so the trajectory never contains a partially applied event.

use std::collections::{BTreeMap, VecDeque};

use fixedmath::FixedDecimal;
use serde::{Deserialize, Serialize};

use crate::checkpoints;
use crate::error::PoolError;
use crate::lp;
use crate::state::{PoolConfig, PoolState, MAX_AMOUNT, MAX_SIMULATION_SECONDS};
use crate::trading::{self, PositionKind, PositionReceipt};
use crate::yield_source::{RateModel, YieldSource};

/// Actor credited with the LP shares minted by `init`.
pub const INITIALIZER: &str = "initializer";

/// One scripted action. Amounts are base tokens unless named otherwise;
/// `receipt` fields reference ids issued by earlier `open_*` events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ScenarioEvent {
    Init {
        contribution: FixedDecimal,
        target_price: FixedDecimal,
    },
    AdvanceTime {
        seconds: u64,
    },
    SetRate {
        model: RateModel,
    },
    OpenLong {
        actor: String,
        base: FixedDecimal,
    },
    CloseLong {
        actor: String,
        receipt: u64,
    },
    OpenShort {
        actor: String,
        bonds: FixedDecimal,
    },
    CloseShort {
        actor: String,
        receipt: u64,
    },
    AddLiquidity {
        actor: String,
        base: FixedDecimal,
    },
    RemoveLiquidity {
        actor: String,
        lp_shares: FixedDecimal,
    },
    RedeemWithdrawalShares {
        actor: String,
        shares: FixedDecimal,
    },
    RedeemMatured {
        actor: String,
        receipt: u64,
    },
    MintCheckpoint {},
}

impl ScenarioEvent {
    /// The event's wire name, echoed into trajectory records.
    pub fn tag(&self) -> &'static str {
        match self {
            ScenarioEvent::Init { .. } => "init",
            ScenarioEvent::AdvanceTime { .. } => "advance_time",
            ScenarioEvent::SetRate { .. } => "set_rate",
            ScenarioEvent::OpenLong { .. } => "open_long",
            ScenarioEvent::CloseLong { .. } => "close_long",
            ScenarioEvent::OpenShort { .. } => "open_short",
            ScenarioEvent::CloseShort { .. } => "close_short",
            ScenarioEvent::AddLiquidity { .. } => "add_liquidity",
            ScenarioEvent::RemoveLiquidity { .. } => "remove_liquidity",
            ScenarioEvent::RedeemWithdrawalShares { .. } => "redeem_withdrawal_shares",
            ScenarioEvent::RedeemMatured { .. } => "redeem_matured",
            ScenarioEvent::MintCheckpoint {} => "mint_checkpoint",
        }
    }
}

/// An event script. Deserialized from `{"events": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub events: Vec<ScenarioEvent>,
}

/// Structural validation: shape problems that make a scenario unrunnable,
/// as opposed to engine errors that are recorded per event at run time.
pub fn validate_scenario(config: &PoolConfig, scenario: &Scenario) -> Result<(), PoolError> {
    config.validate()?;
    let bad = |index: usize, reason: &str| {
        Err(PoolError::InvalidEvent {
            index,
            reason: reason.to_string(),
        })
    };
    match scenario.events.first() {
        None => return bad(0, "missing init: a scenario must begin with an init event"),
        Some(ScenarioEvent::Init { .. }) => {}
        Some(_) => return bad(0, "missing init: a scenario must begin with an init event"),
    }

    let check_amount = |index: usize, name: &str, v: FixedDecimal| {
        if v <= FixedDecimal::ZERO {
            return Err(PoolError::InvalidEvent {
                index,
                reason: format!("{name} must be positive"),
            });
        }
        if v > MAX_AMOUNT {
            return Err(PoolError::InvalidEvent {
                index,
                reason: format!("{name} exceeds the simulator cap of {MAX_AMOUNT}"),
            });
        }
        Ok(())
    };
    let check_actor = |index: usize, actor: &str| {
        if actor.is_empty() {
            return Err(PoolError::InvalidEvent {
                index,
                reason: "actor name must not be empty".to_string(),
            });
        }
        Ok(())
    };

    let mut total_seconds: u64 = 0;
    for (i, event) in scenario.events.iter().enumerate() {
        match event {
            ScenarioEvent::Init {
                contribution,
                target_price,
            } => {
                if i > 0 {
                    return bad(i, "init may only appear as the first event");
                }
                check_amount(i, "contribution", *contribution)?;
                if *target_price <= FixedDecimal::ZERO || *target_price > FixedDecimal::ONE {
                    return bad(i, "target_price must lie in (0, 1]");
                }
            }
            ScenarioEvent::AdvanceTime { seconds } => {
                total_seconds = total_seconds.saturating_add(*seconds);
                if total_seconds > MAX_SIMULATION_SECONDS {
                    return bad(i, "scenario advances past the 10-year simulation horizon");
                }
            }
            ScenarioEvent::SetRate { model } => {
                model.validate().map_err(|e| PoolError::InvalidEvent {
                    index: i,
                    reason: e.to_string(),
                })?;
            }
            ScenarioEvent::OpenLong { actor, base } => {
                check_actor(i, actor)?;
                check_amount(i, "base", *base)?;
            }
            ScenarioEvent::OpenShort { actor, bonds } => {
                check_actor(i, actor)?;
                check_amount(i, "bonds", *bonds)?;
            }
            ScenarioEvent::AddLiquidity { actor, base } => {
                check_actor(i, actor)?;
                check_amount(i, "base", *base)?;
            }
            ScenarioEvent::RemoveLiquidity { actor, lp_shares } => {
                check_actor(i, actor)?;
                check_amount(i, "lp_shares", *lp_shares)?;
            }
            ScenarioEvent::RedeemWithdrawalShares { actor, shares } => {
                check_actor(i, actor)?;
                check_amount(i, "shares", *shares)?;
            }
            ScenarioEvent::CloseLong { actor, .. }
            | ScenarioEvent::CloseShort { actor, .. }
            | ScenarioEvent::RedeemMatured { actor, .. } => check_actor(i, actor)?,
            ScenarioEvent::MintCheckpoint {} => {}
        }
    }
    Ok(())
}

/// A position owned by an actor, closed at most once.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionEntry {
    pub owner: String,
    pub receipt: PositionReceipt,
    pub consumed: bool,
}

/// Cumulative flows and holdings for one actor.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Wallet {
    /// Base the actor has paid into the pool.
    pub base_deposited: FixedDecimal,
    /// Base the pool has paid out to the actor.
    pub base_received: FixedDecimal,
    /// Active LP shares held.
    pub lp_shares: FixedDecimal,
    /// Withdrawal shares marked ready and not yet redeemed.
    pub withdrawal_ready: FixedDecimal,
}

#[derive(Debug, Clone, PartialEq)]
struct QueueEntry {
    actor: String,
    shares: FixedDecimal,
}

/// What one event did: amounts that crossed the pool boundary, the receipt
/// issued, or the error that rolled the event back.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EventOutcome {
    pub event: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub receipt: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_paid: Option<FixedDecimal>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_received: Option<FixedDecimal>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lp_minted: Option<FixedDecimal>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub withdrawal_queued: Option<FixedDecimal>,
}

/// Invariants evaluated after every event.
///
/// `conservation_residual` is the absolute gap between the base value of
/// every share the pool holds and the engine's flow ledger (deposits minus
/// payouts plus accrued interest); it grows only by rounding dust.
/// `zombie_residual` is `|c * z_zombie - x_zombie|`, which a zombie-interest
/// collection squeezes to at most one share-level unit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantChecks {
    pub solvent: bool,
    pub zeta_consistent: bool,
    pub conservation_residual: FixedDecimal,
    pub zombie_residual: FixedDecimal,
}

impl InvariantChecks {
    pub fn passed(&self) -> bool {
        self.solvent && self.zeta_consistent
    }
}

/// One line of the trajectory: the event's outcome, the invariant checks,
/// and a decimal-string snapshot of the pool afterwards.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub index: usize,
    pub time: u64,
    pub outcome: EventOutcome,
    pub checks: InvariantChecks,
    pub state: BTreeMap<String, String>,
}

/// The replay engine: pool state plus everything scripted actors own.
#[derive(Debug, Clone)]
pub struct Engine {
    state: PoolState,
    source: YieldSource,
    positions: BTreeMap<u64, PositionEntry>,
    next_receipt_id: u64,
    wallets: BTreeMap<String, Wallet>,
    queue: VecDeque<QueueEntry>,
    queued_total: FixedDecimal,
    ledger_base: FixedDecimal,
    seed_xor: u64,
}

impl Engine {
    /// A fresh engine at time zero with a zero-rate yield source.
    /// `seed_xor` is folded into every stochastic rate model's seed so one
    /// scenario file can be replayed under different random rate paths.
    pub fn new(config: PoolConfig, seed_xor: u64) -> Result<Self, PoolError> {
        config.validate()?;
        let source = YieldSource::new(RateModel::Fixed { apr: FixedDecimal::ZERO }, 0)?;
        Ok(Engine {
            state: PoolState::new(config),
            source,
            positions: BTreeMap::new(),
            next_receipt_id: 1,
            wallets: BTreeMap::new(),
            queue: VecDeque::new(),
            queued_total: FixedDecimal::ZERO,
            ledger_base: FixedDecimal::ZERO,
            seed_xor,
        })
    }

    pub fn state(&self) -> &PoolState {
        &self.state
    }

    pub fn wallet(&self, actor: &str) -> Option<&Wallet> {
        self.wallets.get(actor)
    }

    /// Positions that have not been closed or redeemed, in receipt order.
    pub fn open_positions(&self) -> impl Iterator<Item = &PositionEntry> {
        self.positions.values().filter(|p| !p.consumed)
    }

    pub fn position(&self, id: u64) -> Option<&PositionEntry> {
        self.positions.get(&id)
    }

    /// Every share the pool holds, across all internal buckets: live
    /// reserves, the withdrawal pool, the zombie ledger, accrued governance
    /// fees, and short collateral posted per checkpoint.
    pub fn total_pool_shares(&self) -> FixedDecimal {
        let collateral = self
            .state
            .checkpoints
            .values()
            .fold(FixedDecimal::ZERO, |acc, rec| acc + rec.short_collateral);
        self.state.share_reserves
            + self.state.withdrawal_pool_shares
            + self.state.zombie_share_reserves
            + self.state.governance_fees
            + collateral
    }

    /// Cumulative base flow into the pool (deposits minus payouts plus
    /// interest credited by the yield source).
    pub fn ledger_base(&self) -> FixedDecimal {
        self.ledger_base
    }

    /// Applies one event, returning its trajectory record. Errors are
    /// recorded in the outcome and leave the engine exactly as it was.
    pub fn apply(&mut self, index: usize, event: &ScenarioEvent) -> TrajectoryRecord {
        let snapshot = self.clone();
        let pending_before = self.state.withdrawal_shares_pending;
        let outcome = match self.dispatch(index, event) {
            Ok(mut outcome) => {
                // Withdrawal shares marked ready by this event belong to the
                // queue head first; the remover's own inline redemption never
                // entered the engine queue, so the delta below is exactly the
                // amount owed to actors queued ahead.
                let queued = outcome.withdrawal_queued.unwrap_or(FixedDecimal::ZERO);
                self.sync_queue(pending_before + queued);
                if let Err(e) = self.post_distribute(event) {
                    *self = snapshot;
                    EventOutcome {
                        event: event.tag().to_string(),
                        error: Some(e.to_string()),
                        ..EventOutcome::default()
                    }
                } else {
                    self.sync_queue(self.queued_total);
                    outcome.event = event.tag().to_string();
                    outcome
                }
            }
            Err(e) => {
                *self = snapshot;
                EventOutcome {
                    event: event.tag().to_string(),
                    error: Some(e.to_string()),
                    ..EventOutcome::default()
                }
            }
        };
        TrajectoryRecord {
            index,
            time: self.state.now,
            outcome,
            checks: self.checks(),
            state: self.derived_snapshot(),
        }
    }

    /// Runs the pending-liquidity distribution that follows every mutating
    /// event, so freed idle capital reaches the withdrawal queue without
    /// waiting for the next checkpoint.
    fn post_distribute(&mut self, event: &ScenarioEvent) -> Result<(), PoolError> {
        match event {
            ScenarioEvent::SetRate { .. } | ScenarioEvent::Init { .. } => Ok(()),
            _ => {
                lp::distribute_excess_idle(&mut self.state)?;
                Ok(())
            }
        }
    }

    /// Credits newly ready withdrawal shares to queued actors, head first.
    /// `expected_pending` is what the engine-side queue total should be if
    /// nothing had been marked; the shortfall against the pool's actual
    /// pending figure is exactly what was marked ready.
    fn sync_queue(&mut self, expected_pending: FixedDecimal) {
        let mut marked = expected_pending - self.state.withdrawal_shares_pending;
        while marked > FixedDecimal::ZERO {
            let Some(head) = self.queue.front_mut() else {
                break;
            };
            let take = head.shares.min(marked);
            head.shares = head.shares - take;
            marked = marked - take;
            self.queued_total = self.queued_total - take;
            let wallet = self.wallets.entry(head.actor.clone()).or_default();
            wallet.withdrawal_ready = wallet.withdrawal_ready + take;
            if head.shares.is_zero() {
                self.queue.pop_front();
            }
        }
    }

    fn dispatch(
        &mut self,
        index: usize,
        event: &ScenarioEvent,
    ) -> Result<EventOutcome, PoolError> {
        match event {
            ScenarioEvent::Init {
                contribution,
                target_price,
            } => {
                let minted = lp::initialize(&mut self.state, *contribution, *target_price)?;
                let wallet = self.wallets.entry(INITIALIZER.to_string()).or_default();
                wallet.base_deposited = wallet.base_deposited + *contribution;
                wallet.lp_shares = wallet.lp_shares + minted;
                self.ledger_base = self.ledger_base + *contribution;
                Ok(EventOutcome {
                    base_paid: Some(*contribution),
                    lp_minted: Some(minted),
                    ..EventOutcome::default()
                })
            }
            ScenarioEvent::AdvanceTime { seconds } => {
                let from = self.state.now;
                let to = from + seconds;
                let samples = self.source.advance(
                    from,
                    to,
                    self.state.config.d_c,
                    self.state.share_price,
                )?;
                for (t, c_new) in samples {
                    let interest =
                        (c_new - self.state.share_price).mul_down(self.total_pool_shares());
                    self.ledger_base = self.ledger_base + interest;
                    self.state.now = t;
                    self.state.share_price = c_new;
                    checkpoints::mint_checkpoint(&mut self.state);
                }
                self.state.now = to;
                Ok(EventOutcome::default())
            }
            ScenarioEvent::SetRate { model } => {
                let mut model = model.clone();
                if let RateModel::Stochastic { seed, .. } = &mut model {
                    *seed ^= self.seed_xor;
                }
                self.source.set_model(model, self.state.now)?;
                Ok(EventOutcome::default())
            }
            ScenarioEvent::OpenLong { actor, base } => {
                let receipt = trading::open_long(&mut self.state, *base)?;
                let id = self.issue(actor, receipt);
                let wallet = self.wallets.entry(actor.clone()).or_default();
                wallet.base_deposited = wallet.base_deposited + *base;
                self.ledger_base = self.ledger_base + *base;
                Ok(EventOutcome {
                    receipt: Some(id),
                    base_paid: Some(*base),
                    ..EventOutcome::default()
                })
            }
            ScenarioEvent::OpenShort { actor, bonds } => {
                let (receipt, deposit) = trading::open_short(&mut self.state, *bonds)?;
                let id = self.issue(actor, receipt);
                let wallet = self.wallets.entry(actor.clone()).or_default();
                wallet.base_deposited = wallet.base_deposited + deposit;
                self.ledger_base = self.ledger_base + deposit;
                Ok(EventOutcome {
                    receipt: Some(id),
                    base_paid: Some(deposit),
                    ..EventOutcome::default()
                })
            }
            ScenarioEvent::CloseLong { actor, receipt } => {
                let rec = self.claim(index, actor, *receipt, PositionKind::Long)?;
                let payout = trading::close_long(&mut self.state, &rec)?;
                self.settle(actor, *receipt, payout);
                Ok(EventOutcome {
                    base_received: Some(payout),
                    ..EventOutcome::default()
                })
            }
            ScenarioEvent::CloseShort { actor, receipt } => {
                let rec = self.claim(index, actor, *receipt, PositionKind::Short)?;
                let payout = trading::close_short(&mut self.state, &rec)?;
                self.settle(actor, *receipt, payout);
                Ok(EventOutcome {
                    base_received: Some(payout),
                    ..EventOutcome::default()
                })
            }
            ScenarioEvent::RedeemMatured { actor, receipt } => {
                let entry = self
                    .positions
                    .get(receipt)
                    .ok_or(PoolError::UnknownReceipt(*receipt))?;
                if entry.owner != *actor {
                    return Err(PoolError::UnknownReceipt(*receipt));
                }
                if entry.consumed {
                    return Err(PoolError::ReceiptConsumed(*receipt));
                }
                let rec = entry.receipt.clone();
                let payout = checkpoints::redeem_matured(&mut self.state, &rec)?;
                self.settle(actor, *receipt, payout);
                Ok(EventOutcome {
                    base_received: Some(payout),
                    ..EventOutcome::default()
                })
            }
            ScenarioEvent::AddLiquidity { actor, base } => {
                let minted = lp::add_liquidity(&mut self.state, *base)?;
                let wallet = self.wallets.entry(actor.clone()).or_default();
                wallet.base_deposited = wallet.base_deposited + *base;
                wallet.lp_shares = wallet.lp_shares + minted;
                self.ledger_base = self.ledger_base + *base;
                Ok(EventOutcome {
                    base_paid: Some(*base),
                    lp_minted: Some(minted),
                    ..EventOutcome::default()
                })
            }
            ScenarioEvent::RemoveLiquidity { actor, lp_shares } => {
                let held = self
                    .wallets
                    .get(actor)
                    .map(|w| w.lp_shares)
                    .unwrap_or(FixedDecimal::ZERO);
                if held < *lp_shares {
                    return Err(PoolError::InsufficientBalance(format!(
                        "{actor} holds {held} LP shares, {lp_shares} requested"
                    )));
                }
                let (paid, queued) = lp::remove_liquidity(&mut self.state, *lp_shares)?;
                let wallet = self.wallets.entry(actor.clone()).or_default();
                wallet.lp_shares = wallet.lp_shares - *lp_shares;
                wallet.base_received = wallet.base_received + paid;
                self.ledger_base = self.ledger_base - paid;
                if queued > FixedDecimal::ZERO {
                    self.queue.push_back(QueueEntry {
                        actor: actor.clone(),
                        shares: queued,
                    });
                    self.queued_total = self.queued_total + queued;
                }
                Ok(EventOutcome {
                    base_received: Some(paid),
                    withdrawal_queued: Some(queued),
                    ..EventOutcome::default()
                })
            }
            ScenarioEvent::RedeemWithdrawalShares { actor, shares } => {
                let ready = self
                    .wallets
                    .get(actor)
                    .map(|w| w.withdrawal_ready)
                    .unwrap_or(FixedDecimal::ZERO);
                if ready < *shares {
                    return Err(PoolError::InsufficientBalance(format!(
                        "{actor} has {ready} ready withdrawal shares, {shares} requested"
                    )));
                }
                let payout = lp::redeem_withdrawal_shares(&mut self.state, *shares)?;
                let wallet = self.wallets.entry(actor.clone()).or_default();
                wallet.withdrawal_ready = wallet.withdrawal_ready - *shares;
                wallet.base_received = wallet.base_received + payout;
                self.ledger_base = self.ledger_base - payout;
                Ok(EventOutcome {
                    base_received: Some(payout),
                    ..EventOutcome::default()
                })
            }
            ScenarioEvent::MintCheckpoint {} => {
                checkpoints::mint_checkpoint(&mut self.state);
                Ok(EventOutcome::default())
            }
        }
    }

    /// Records a freshly opened position and returns its receipt id.
    fn issue(&mut self, actor: &str, mut receipt: PositionReceipt) -> u64 {
        let id = self.next_receipt_id;
        self.next_receipt_id += 1;
        receipt.id = id;
        self.positions.insert(
            id,
            PositionEntry {
                owner: actor.to_string(),
                receipt,
                consumed: false,
            },
        );
        id
    }

    /// Looks up an open receipt of the expected kind owned by `actor`.
    fn claim(
        &self,
        index: usize,
        actor: &str,
        id: u64,
        kind: PositionKind,
    ) -> Result<PositionReceipt, PoolError> {
        let entry = self.positions.get(&id).ok_or(PoolError::UnknownReceipt(id))?;
        if entry.owner != actor {
            return Err(PoolError::UnknownReceipt(id));
        }
        if entry.consumed {
            return Err(PoolError::ReceiptConsumed(id));
        }
        if entry.receipt.kind != kind {
            return Err(PoolError::InvalidEvent {
                index,
                reason: format!("receipt {id} is not a {kind:?} position"),
            });
        }
        Ok(entry.receipt.clone())
    }

    /// Marks a receipt consumed and credits its payout.
    fn settle(&mut self, actor: &str, id: u64, payout: FixedDecimal) {
        if let Some(entry) = self.positions.get_mut(&id) {
            entry.consumed = true;
        }
        let wallet = self.wallets.entry(actor.to_string()).or_default();
        wallet.base_received = wallet.base_received + payout;
        self.ledger_base = self.ledger_base - payout;
    }

    /// Evaluates the per-event invariants.
    pub fn checks(&self) -> InvariantChecks {
        let s = &self.state;
        let solvent = !s.initialized || s.check_solvency();
        let non_negative = [
            s.share_reserves,
            s.bond_reserves,
            s.effective_share_reserves(),
            s.lp_total_supply,
            s.withdrawal_shares_pending,
            s.withdrawal_shares_ready,
            s.withdrawal_pool_shares,
            s.zombie_share_reserves,
            s.zombie_base_reserves,
            s.governance_fees,
        ];
        let zeta_consistent = non_negative.iter().all(|v| !v.is_negative());
        let value = s.share_price.mul_down(self.total_pool_shares());
        let conservation_residual = (value - self.ledger_base).abs();
        let zombie_value = s.share_price.mul_down(s.zombie_share_reserves);
        let zombie_residual = (zombie_value - s.zombie_base_reserves).abs();
        InvariantChecks {
            solvent,
            zeta_consistent,
            conservation_residual,
            zombie_residual,
        }
    }

    /// The pool snapshot extended with derived pricing figures.
    fn derived_snapshot(&self) -> BTreeMap<String, String> {
        let mut doc = self.state.snapshot();
        let spot = if self.state.initialized {
            self.state
                .curve()
                .spot_price(
                    self.state.effective_share_reserves(),
                    self.state.bond_reserves,
                )
                .unwrap_or(FixedDecimal::ZERO)
        } else {
            FixedDecimal::ZERO
        };
        let pv = lp::present_value(&self.state, FixedDecimal::ZERO)
            .map(|b| b.pv)
            .unwrap_or(FixedDecimal::ZERO);
        let p_lp = lp::lp_share_price(&self.state).unwrap_or(FixedDecimal::ZERO);
        doc.insert("spot_price".to_string(), spot.to_string());
        doc.insert("present_value".to_string(), pv.to_string());
        doc.insert("lp_share_price".to_string(), p_lp.to_string());
        doc
    }
}

/// Validates and replays a scenario, one record per event.
pub fn run_scenario(
    config: PoolConfig,
    scenario: &Scenario,
    seed_xor: u64,
) -> Result<Vec<TrajectoryRecord>, PoolError> {
    validate_scenario(&config, scenario)?;
    let mut engine = Engine::new(config, seed_xor)?;
    let records = scenario
        .events
        .iter()
        .enumerate()
        .map(|(i, e)| engine.apply(i, e))
        .collect();
    Ok(records)
}
