//! Authoritative pool state, the exposure ledger, and solvency arithmetic.

use std::collections::BTreeMap;

use fixedmath::{FixedDecimal, Rounding};
use serde::{Deserialize, Serialize};

use crate::curve::Curve;
use crate::error::PoolError;

/// Seconds per simulated year (365 days), the rate-accrual denominator.
pub const SECONDS_PER_YEAR: u64 = 31_536_000;

/// Hard cap on simulated time. Together with [`MAX_AMOUNT`] and the config
/// validation ranges this keeps every intermediate quantity inside the
/// high-precision arithmetic range; see `PoolConfig::validate`.
pub const MAX_SIMULATION_SECONDS: u64 = 10 * SECONDS_PER_YEAR;

/// Largest accepted trade/contribution amount and reserve magnitude
/// (10^12 whole units).
pub const MAX_AMOUNT: FixedDecimal = FixedDecimal::from_raw(10i128.pow(30));

/// Static pool parameters. Field names match the config-file keys;
/// unknown keys are rejected so typos fail loudly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoolConfig {
    /// Time-stretch exponent of the pricing curve, in (0, 1).
    pub sigma: FixedDecimal,
    /// Curve-fee fraction charged on the new-bond discount, in [0, 1].
    pub phi_n: FixedDecimal,
    /// Flat-fee fraction charged on matured face value, in [0, 1].
    pub phi_m: FixedDecimal,
    /// Governance share of every fee charged, in [0, 1].
    pub phi_g: FixedDecimal,
    /// Governance share of collected zombie interest, in [0, 1).
    pub phi_g_zombie: FixedDecimal,
    /// Checkpoint duration in seconds.
    pub d_c: u64,
    /// Term length in seconds; must be a multiple of `d_c`.
    pub position_duration: u64,
    /// Minimum share reserves the pool must always retain.
    pub z_min: FixedDecimal,
}

impl PoolConfig {
    /// Validates ranges, including the numeric-range limits this simulator
    /// imposes on top of the economic ones. The limits guarantee that the
    /// pricing invariant `k` stays far inside the high-precision range:
    /// with reserves and amounts at most 10^12, rates at most 20%/year and
    /// at most ten simulated years, `k <= c*z_e + y < 10^13`.
    pub fn validate(&self) -> Result<(), PoolError> {
        let unit = |v: FixedDecimal| v >= FixedDecimal::ZERO && v <= FixedDecimal::ONE;
        if self.sigma < "0.005".parse().unwrap() || self.sigma > "0.995".parse().unwrap() {
            return Err(PoolError::InvalidConfig(format!(
                "sigma {} outside supported range [0.005, 0.995]",
                self.sigma
            )));
        }
        if !unit(self.phi_n) || !unit(self.phi_m) || !unit(self.phi_g) {
            return Err(PoolError::InvalidConfig(
                "fee fractions phi_n, phi_m, phi_g must lie in [0, 1]".into(),
            ));
        }
        if self.phi_g_zombie < FixedDecimal::ZERO || self.phi_g_zombie >= FixedDecimal::ONE {
            return Err(PoolError::InvalidConfig(
                "phi_g_zombie must lie in [0, 1)".into(),
            ));
        }
        if self.d_c < 3600 {
            return Err(PoolError::InvalidConfig(format!(
                "checkpoint duration {} below the 3600s minimum",
                self.d_c
            )));
        }
        if self.position_duration == 0 || self.position_duration % self.d_c != 0 {
            return Err(PoolError::InvalidConfig(format!(
                "position duration {} must be a positive multiple of d_c {}",
                self.position_duration, self.d_c
            )));
        }
        if self.position_duration > MAX_SIMULATION_SECONDS {
            return Err(PoolError::InvalidConfig(
                "position duration exceeds the 10-year simulation horizon".into(),
            ));
        }
        if self.z_min < FixedDecimal::ZERO || self.z_min > MAX_AMOUNT {
            return Err(PoolError::InvalidConfig(
                "z_min must be non-negative and within the amount cap".into(),
            ));
        }
        Ok(())
    }

    /// Start of the checkpoint containing `now`.
    pub fn latest_checkpoint_time(&self, now: u64) -> u64 {
        now - now % self.d_c
    }

    /// When positions opened in the checkpoint starting at `t_c` mature.
    pub fn maturity_time(&self, t_c: u64) -> u64 {
        t_c + self.position_duration
    }
}

/// Per-checkpoint aggregates. A record exists if and only if the checkpoint
/// was minted; the share price is captured at mint time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckpointRecord {
    /// Share price when the checkpoint was minted (`c_0` for its positions).
    pub share_price_at_open: FixedDecimal,
    /// Face value of open longs backdated to this checkpoint.
    pub longs_outstanding: FixedDecimal,
    /// Face value of open shorts backdated to this checkpoint.
    pub shorts_outstanding: FixedDecimal,
    /// Shares held outside the reserves as collateral for this checkpoint's
    /// shorts (deposits plus sale proceeds, `face / c_0` per bond shorted).
    pub short_collateral: FixedDecimal,
}

impl CheckpointRecord {
    fn new(share_price_at_open: FixedDecimal) -> Self {
        CheckpointRecord {
            share_price_at_open,
            longs_outstanding: FixedDecimal::ZERO,
            shorts_outstanding: FixedDecimal::ZERO,
            short_collateral: FixedDecimal::ZERO,
        }
    }

    /// Solvency exposure of this checkpoint: unmatched long face value.
    /// Longs and shorts net within a checkpoint but never across two.
    pub fn exposure(&self) -> FixedDecimal {
        (self.longs_outstanding - self.shorts_outstanding).max(FixedDecimal::ZERO)
    }
}

/// Live pool state. All quantities are share- or bond-denominated fixed
/// decimals except the clock.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoolState {
    pub config: PoolConfig,
    /// Simulation clock in seconds.
    pub now: u64,
    /// Current share price `c`.
    pub share_price: FixedDecimal,
    /// Share price `mu` captured at initialization (curve normalization).
    pub initial_share_price: FixedDecimal,
    /// Share reserves `z`.
    pub share_reserves: FixedDecimal,
    /// Bond reserves `y`.
    pub bond_reserves: FixedDecimal,
    /// Signed share adjustment `zeta`; the curve prices against
    /// `z_e = z - zeta`.
    pub share_adjustment: FixedDecimal,
    /// Active LP share supply `l_a`.
    pub lp_total_supply: FixedDecimal,
    /// Withdrawal shares not yet funded, `l_w`.
    pub withdrawal_shares_pending: FixedDecimal,
    /// Withdrawal shares funded and redeemable, `l_r`.
    pub withdrawal_shares_ready: FixedDecimal,
    /// Shares set aside to back ready withdrawal shares, `z_r`.
    pub withdrawal_pool_shares: FixedDecimal,
    /// Matured-but-unclaimed principal held as shares, `z_zombie`.
    pub zombie_share_reserves: FixedDecimal,
    /// Base value owed to matured claimants, `x_zombie`.
    pub zombie_base_reserves: FixedDecimal,
    /// Accrued governance fees, in shares.
    pub governance_fees: FixedDecimal,
    /// Total face value of open longs across checkpoints.
    pub longs_outstanding: FixedDecimal,
    /// Total face value of open shorts across checkpoints.
    pub shorts_outstanding: FixedDecimal,
    /// Sum over open longs of `face_raw * maturity_checkpoint_index`;
    /// exact integer bookkeeping behind the average-maturity figures.
    long_maturity_weight: i128,
    short_maturity_weight: i128,
    pub checkpoints: BTreeMap<u64, CheckpointRecord>,
    pub initialized: bool,
}

impl PoolState {
    pub fn new(config: PoolConfig) -> Self {
        PoolState {
            config,
            now: 0,
            share_price: FixedDecimal::ONE,
            initial_share_price: FixedDecimal::ONE,
            share_reserves: FixedDecimal::ZERO,
            bond_reserves: FixedDecimal::ZERO,
            share_adjustment: FixedDecimal::ZERO,
            lp_total_supply: FixedDecimal::ZERO,
            withdrawal_shares_pending: FixedDecimal::ZERO,
            withdrawal_shares_ready: FixedDecimal::ZERO,
            withdrawal_pool_shares: FixedDecimal::ZERO,
            zombie_share_reserves: FixedDecimal::ZERO,
            zombie_base_reserves: FixedDecimal::ZERO,
            governance_fees: FixedDecimal::ZERO,
            longs_outstanding: FixedDecimal::ZERO,
            shorts_outstanding: FixedDecimal::ZERO,
            long_maturity_weight: 0,
            short_maturity_weight: 0,
            checkpoints: BTreeMap::new(),
            initialized: false,
        }
    }

    /// `z_e = z - zeta`, the reserve the curve prices against.
    pub fn effective_share_reserves(&self) -> FixedDecimal {
        self.share_reserves - self.share_adjustment
    }

    /// Pricing view over the current state.
    pub fn curve(&self) -> Curve {
        Curve {
            time_stretch: self.config.sigma,
            initial_share_price: self.initial_share_price,
            share_price: self.share_price,
        }
    }

    /// Fetches (minting if absent) the checkpoint record at `t_c`, capturing
    /// the current share price on first touch.
    pub fn checkpoint_mut(&mut self, t_c: u64) -> &mut CheckpointRecord {
        let c = self.share_price;
        self.checkpoints
            .entry(t_c)
            .or_insert_with(|| CheckpointRecord::new(c))
    }

    pub fn checkpoint_minted(&self, t_c: u64) -> bool {
        self.checkpoints.contains_key(&t_c)
    }

    /// Global solvency exposure: per-checkpoint unmatched long face summed
    /// over all non-matured checkpoints. No netting across checkpoints.
    pub fn global_exposure(&self) -> FixedDecimal {
        let mut e = FixedDecimal::ZERO;
        for (&t_c, rec) in &self.checkpoints {
            if self.config.maturity_time(t_c) > self.now {
                e = e + rec.exposure();
            }
        }
        e
    }

    /// `z - e/c - z_min`: positive when the pool can cover every open long
    /// at face. The exposure conversion rounds up (against the pool).
    pub fn solvency(&self) -> FixedDecimal {
        let exposure_shares = self.global_exposure().div(self.share_price, Rounding::Up);
        self.share_reserves - exposure_shares - self.config.z_min
    }

    pub fn check_solvency(&self) -> bool {
        !self.solvency().is_negative()
    }

    /// Removable liquidity: solvency clamped at zero.
    pub fn idle_liquidity(&self) -> FixedDecimal {
        self.solvency().max(FixedDecimal::ZERO)
    }

    /// Average remaining term of open longs, as a fraction of the position
    /// duration in [0, 1].
    pub fn avg_long_time_remaining(&self) -> FixedDecimal {
        self.avg_time_remaining(self.long_maturity_weight, self.longs_outstanding)
    }

    /// Average remaining term of open shorts, in [0, 1].
    pub fn avg_short_time_remaining(&self) -> FixedDecimal {
        self.avg_time_remaining(self.short_maturity_weight, self.shorts_outstanding)
    }

    fn avg_time_remaining(&self, weight: i128, total_face: FixedDecimal) -> FixedDecimal {
        if total_face.is_zero() {
            return FixedDecimal::ZERO;
        }
        // weight / total_face is the face-weighted average maturity
        // checkpoint index; scale to seconds and normalize by the term.
        let avg_index = FixedDecimal::from_raw(weight).div(total_face, Rounding::Down);
        let avg_maturity = avg_index.mul_int(self.config.d_c);
        let now_fd = FixedDecimal::from_int(self.now as i64);
        if avg_maturity <= now_fd {
            return FixedDecimal::ZERO;
        }
        let remaining = (avg_maturity - now_fd)
            .div_int(self.config.position_duration, Rounding::Down);
        remaining.min(FixedDecimal::ONE)
    }

    /// Records `face` bonds of long exposure maturing with checkpoint `t_c`.
    pub(crate) fn track_long_open(&mut self, t_c: u64, face: FixedDecimal) {
        self.longs_outstanding = self.longs_outstanding + face;
        self.long_maturity_weight += self.maturity_weight(t_c, face);
    }

    pub(crate) fn track_long_close(&mut self, t_c: u64, face: FixedDecimal) {
        self.longs_outstanding = self.longs_outstanding - face;
        self.long_maturity_weight -= self.maturity_weight(t_c, face);
    }

    pub(crate) fn track_short_open(&mut self, t_c: u64, face: FixedDecimal) {
        self.shorts_outstanding = self.shorts_outstanding + face;
        self.short_maturity_weight += self.maturity_weight(t_c, face);
    }

    pub(crate) fn track_short_close(&mut self, t_c: u64, face: FixedDecimal) {
        self.shorts_outstanding = self.shorts_outstanding - face;
        self.short_maturity_weight -= self.maturity_weight(t_c, face);
    }

    /// `face_raw * maturity_checkpoint_index`: exact, and bounded well below
    /// i128 (10^30 raw * 87,600 checkpoints < 10^35).
    fn maturity_weight(&self, t_c: u64, face: FixedDecimal) -> i128 {
        let idx = (self.config.maturity_time(t_c) / self.config.d_c) as i128;
        face.raw() * idx
    }

    /// Flat field -> decimal-string snapshot for trajectory records.
    pub fn snapshot(&self) -> BTreeMap<String, String> {
        let mut doc = BTreeMap::new();
        let mut put = |k: &str, v: FixedDecimal| {
            doc.insert(k.to_string(), v.to_string());
        };
        put("share_price", self.share_price);
        put("initial_share_price", self.initial_share_price);
        put("share_reserves", self.share_reserves);
        put("bond_reserves", self.bond_reserves);
        put("share_adjustment", self.share_adjustment);
        put("effective_share_reserves", self.effective_share_reserves());
        put("lp_total_supply", self.lp_total_supply);
        put("withdrawal_shares_pending", self.withdrawal_shares_pending);
        put("withdrawal_shares_ready", self.withdrawal_shares_ready);
        put("withdrawal_pool_shares", self.withdrawal_pool_shares);
        put("zombie_share_reserves", self.zombie_share_reserves);
        put("zombie_base_reserves", self.zombie_base_reserves);
        put("governance_fees", self.governance_fees);
        put("longs_outstanding", self.longs_outstanding);
        put("shorts_outstanding", self.shorts_outstanding);
        put("global_exposure", self.global_exposure());
        put("idle_liquidity", self.idle_liquidity());
        doc.insert("time".to_string(), self.now.to_string());
        doc
    }
}

/// The reserve scaling shared by liquidity changes: when `z` moves to
/// `z_new`, `zeta` and `y` scale by the same factor so the spot price is
/// unchanged. `zeta` rounds up and `y` down, both against the pool.
/// Hypothetical (present-value) and committed scalings must use this one
/// code path so they agree bit-for-bit.
pub fn scaled_reserves(
    z: FixedDecimal,
    zeta: FixedDecimal,
    y: FixedDecimal,
    z_new: FixedDecimal,
) -> (FixedDecimal, FixedDecimal) {
    let zeta_new = zeta.mul(z_new, Rounding::Up).div(z, Rounding::Up);
    let y_new = y.mul(z_new, Rounding::Down).div(z, Rounding::Down);
    (zeta_new, y_new)
}
