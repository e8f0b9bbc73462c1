//! Checkpoint minting, maturity processing, and the zombie ledger.
//!
//! Positions are backdated to checkpoint starts, so an entire checkpoint's
//! longs and shorts mature at one instant. `mint_checkpoint` settles every
//! matured checkpoint using only share prices recorded at checkpoint
//! boundaries, which makes late (catch-up) minting produce bit-identical
//! state to minting on time — provided the driver records the share price
//! at each boundary it crosses, which the simulator does.
//!
//! Matured principal is not paid out immediately: it moves into the zombie
//! ledger (`zombie_share_reserves` shares held against
//! `zombie_base_reserves` base owed), where claimants redeem at their
//! maturity value no matter how late they claim. Interest the zombie shares
//! earn past maturity belongs to LPs and is skimmed by
//! `collect_zombie_interest`. Flat fees on matured positions are charged at
//! redemption and left in the zombie ledger as surplus, so they reach LPs
//! through the same skim.

use fixedmath::{FixedDecimal, Rounding};

use crate::error::PoolError;
use crate::state::PoolState;
use crate::trading::{PositionKind, PositionReceipt};

/// Mints the checkpoint covering `state.now` (recording the current share
/// price if it is new) and settles every checkpoint that has matured.
/// Idempotent: a second call at the same time and price is a no-op.
pub fn mint_checkpoint(state: &mut PoolState) {
    let t_c = state.config.latest_checkpoint_time(state.now);
    state.checkpoint_mut(t_c);

    let duration = state.config.position_duration;
    let matured: Vec<u64> = state
        .checkpoints
        .iter()
        .filter(|(&t, rec)| {
            t + duration <= t_c
                && (!rec.longs_outstanding.is_zero()
                    || !rec.shorts_outstanding.is_zero()
                    || !rec.short_collateral.is_zero())
        })
        .map(|(&t, _)| t)
        .collect();
    for t in matured {
        process_matured_checkpoint(state, t);
    }

    collect_zombie_interest(state);
    let _ = crate::lp::distribute_excess_idle(state);
}

/// Settles checkpoint `t`'s positions at its maturity boundary price.
fn process_matured_checkpoint(state: &mut PoolState, t: u64) {
    let boundary = state.config.maturity_time(t);
    // The simulator records the true price at every boundary it crosses;
    // if a caller skipped that, fall back to the current price.
    state.checkpoint_mut(boundary);
    let c_1 = state.checkpoints[&boundary].share_price_at_open;
    let rec = state.checkpoints[&t].clone();

    if !rec.longs_outstanding.is_zero() {
        // Matured longs are owed face. The backing shares move from the
        // live reserves into the zombie ledger at the maturity price; the
        // shared quantity keeps z_e bit-exact.
        let face = rec.longs_outstanding;
        let shares = face.div(c_1, Rounding::Down);
        state.share_reserves = state.share_reserves - shares;
        state.share_adjustment = state.share_adjustment - shares;
        state.zombie_share_reserves = state.zombie_share_reserves + shares;
        state.zombie_base_reserves = state.zombie_base_reserves + face;
        state.track_long_close(t, face);
        state.checkpoint_mut(t).longs_outstanding = FixedDecimal::ZERO;
    }

    let rec = state.checkpoints[&t].clone();
    if !rec.shorts_outstanding.is_zero() || !rec.short_collateral.is_zero() {
        let face = rec.shorts_outstanding;
        let c_0 = rec.share_price_at_open;
        // The pool buys the face back at par; z and zeta move together so
        // the curve is untouched.
        let face_shares = face.div(c_1, Rounding::Down);
        state.share_reserves = state.share_reserves + face_shares;
        state.share_adjustment = state.share_adjustment + face_shares;
        // Shorts are owed the variable interest on the face.
        let face_value = c_1.mul(face, Rounding::Down).div(c_0, Rounding::Down);
        let interest = (face_value - face).max(FixedDecimal::ZERO);
        let interest_shares = interest.div(c_1, Rounding::Down);
        state.zombie_share_reserves = state.zombie_share_reserves + interest_shares;
        state.zombie_base_reserves = state.zombie_base_reserves + interest;
        // The released collateral funds both legs; any residue (interest
        // accrued on the collateral past maturity, rounding dust) joins the
        // zombie surplus and is skimmed to LPs.
        let consumed = face_shares + interest_shares;
        let residue = (rec.short_collateral - consumed).max(FixedDecimal::ZERO);
        state.zombie_share_reserves = state.zombie_share_reserves + residue;
        if !face.is_zero() {
            state.track_short_close(t, face);
        }
        let rec = state.checkpoint_mut(t);
        rec.shorts_outstanding = FixedDecimal::ZERO;
        rec.short_collateral = FixedDecimal::ZERO;
    }
}

/// Skims interest the zombie shares earned beyond what claimants are owed
/// and credits it to LPs (and governance), leaving
/// `c * z_zombie == x_zombie` up to one share-level unit. Returns the base
/// interest skimmed.
pub fn collect_zombie_interest(state: &mut PoolState) -> FixedDecimal {
    let c = state.share_price;
    let value = c.mul(state.zombie_share_reserves, Rounding::Down);
    if value <= state.zombie_base_reserves {
        return FixedDecimal::ZERO;
    }
    let interest = value - state.zombie_base_reserves;
    let skim_shares = interest.div(c, Rounding::Down);
    if skim_shares.is_zero() {
        return FixedDecimal::ZERO;
    }
    let gov_shares = state
        .config
        .phi_g_zombie
        .mul(interest, Rounding::Down)
        .div(c, Rounding::Down);
    let lp_shares = skim_shares - gov_shares;
    state.zombie_share_reserves = state.zombie_share_reserves - skim_shares;
    // Matured-position value is flat-style: z and zeta move together and
    // the curve price is unchanged.
    state.share_reserves = state.share_reserves + lp_shares;
    state.share_adjustment = state.share_adjustment + lp_shares;
    state.governance_fees = state.governance_fees + gov_shares;
    interest
}

/// Pays a matured receipt from the zombie ledger at its maturity value:
/// face for longs, accrued variable interest for shorts, both frozen at
/// the maturity boundary so the payout is independent of claim time. The
/// flat fee (as of maturity) is withheld and left in the ledger as surplus.
pub fn redeem_matured(
    state: &mut PoolState,
    receipt: &PositionReceipt,
) -> Result<FixedDecimal, PoolError> {
    mint_checkpoint(state);
    let maturity = state.config.maturity_time(receipt.checkpoint_time);
    if maturity > state.now {
        return Err(PoolError::NotMatured(receipt.id));
    }
    let c_1 = state
        .checkpoints
        .get(&maturity)
        .expect("maturity boundary recorded during mint")
        .share_price_at_open;

    let gross = match receipt.kind {
        PositionKind::Long => receipt.face,
        PositionKind::Short => {
            let face_value = c_1
                .mul(receipt.face, Rounding::Down)
                .div(receipt.open_share_price, Rounding::Down);
            (face_value - receipt.face).max(FixedDecimal::ZERO)
        }
    };
    let fee = state.config.phi_m.mul(receipt.face, Rounding::Up).min(gross);
    let payout = gross - fee;

    let payout_shares = payout
        .div(state.share_price, Rounding::Down)
        .min(state.zombie_share_reserves);
    state.zombie_share_reserves = state.zombie_share_reserves - payout_shares;
    state.zombie_base_reserves = (state.zombie_base_reserves - gross).max(FixedDecimal::ZERO);
    Ok(payout)
}
