//! Long and short position lifecycle.
//!
//! Opens are pure curve trades; closes split the face into a curve portion
//! `face * t_r` (traded against the curve) and a matured portion
//! `face * (1 - t_r)` (settled at face through the share adjustment), where
//! `t_r` is the remaining fraction of the term. Positions are backdated to
//! the start of their checkpoint, so `t_r = 1` exactly only at checkpoint
//! boundaries.
//!
//! Fee discipline: the curve fee is `phi_n * (1/p - 1)` of the traded base
//! on buys (charged in bonds) and `phi_n * (1 - p)` of the traded face on
//! sells (charged in base), with `p` the pre-trade spot price; the flat fee
//! is `phi_m` times the matured face. Governance takes `phi_g` of every
//! fee, in shares; the rest stays with LPs inside the reserves. Values a
//! trader receives round down and values a trader pays round up.
//!
//! Every operation validates on a scratch copy of the state and commits
//! only when all checks (curve domain, `z_e >= z_min`, solvency) pass, so a
//! failed call leaves the pool untouched.

use fixedmath::{FixedDecimal, Rounding};
use serde::Serialize;

use crate::checkpoints;
use crate::error::PoolError;
use crate::state::{PoolState, MAX_AMOUNT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PositionKind {
    Long,
    Short,
}

/// Claim on an open (or matured, unredeemed) position. `face` is the bond
/// face value; `open_share_price` is the minted checkpoint's share price.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositionReceipt {
    pub id: u64,
    pub kind: PositionKind,
    pub face: FixedDecimal,
    pub checkpoint_time: u64,
    pub open_share_price: FixedDecimal,
}

fn require_initialized(state: &PoolState) -> Result<(), PoolError> {
    if state.initialized {
        Ok(())
    } else {
        Err(PoolError::NotInitialized)
    }
}

fn require_amount(amount: FixedDecimal) -> Result<(), PoolError> {
    if amount <= FixedDecimal::ZERO {
        return Err(PoolError::NonPositiveAmount);
    }
    if amount > MAX_AMOUNT {
        return Err(PoolError::InvalidConfig(format!(
            "amount {amount} exceeds the supported maximum {MAX_AMOUNT}"
        )));
    }
    Ok(())
}

/// Remaining fraction of the term for a position from `checkpoint_time`,
/// in [0, 1]; zero once matured.
pub fn time_remaining(state: &PoolState, checkpoint_time: u64) -> FixedDecimal {
    let maturity = state.config.maturity_time(checkpoint_time);
    if maturity <= state.now {
        return FixedDecimal::ZERO;
    }
    FixedDecimal::from_int((maturity - state.now) as i64)
        .div_int(state.config.position_duration, Rounding::Down)
}

fn commit(state: &mut PoolState, next: PoolState) -> Result<(), PoolError> {
    if next.effective_share_reserves() < next.config.z_min {
        return Err(PoolError::InsufficientLiquidity(
            "effective share reserves would fall below z_min".into(),
        ));
    }
    if !next.check_solvency() {
        return Err(PoolError::WouldBeInsolvent {
            solvency: next.solvency(),
        });
    }
    *state = next;
    Ok(())
}

/// Spends `base_in` to buy bonds at the curve price. Returns the receipt;
/// its face is the bonds credited to the position.
pub fn open_long(state: &mut PoolState, base_in: FixedDecimal) -> Result<PositionReceipt, PoolError> {
    require_initialized(state)?;
    require_amount(base_in)?;
    checkpoints::mint_checkpoint(state);

    let mut s = state.clone();
    let c = s.share_price;
    let curve = s.curve();
    let z_e = s.effective_share_reserves();
    let y = s.bond_reserves;
    let p = curve.spot_price(z_e, y)?;

    let dz = base_in.div(c, Rounding::Down);
    let dy_curve = curve.bonds_out_given_shares_in(z_e, y, dz)?;
    // Curve fee in bonds: phi_n * (1/p - 1) * base_in.
    let discount = FixedDecimal::ONE.div(p, Rounding::Up) - FixedDecimal::ONE;
    let fee_bonds = s.config.phi_n.mul(discount, Rounding::Up).mul(base_in, Rounding::Up);
    if fee_bonds >= dy_curve {
        return Err(PoolError::InsufficientLiquidity(
            "curve fee consumes the entire bond purchase".into(),
        ));
    }
    let face = dy_curve - fee_bonds;
    // Governance skim, valued at the spot price: phi_g*phi_n*(1-p)*base_in.
    let gov_base = s
        .config
        .phi_g
        .mul(s.config.phi_n, Rounding::Down)
        .mul(FixedDecimal::ONE - p, Rounding::Down)
        .mul(base_in, Rounding::Down);
    let gov_shares = gov_base.div(c, Rounding::Down);

    s.share_reserves = s.share_reserves + dz - gov_shares;
    s.bond_reserves = s.bond_reserves - face;
    s.governance_fees = s.governance_fees + gov_shares;

    let t_c = s.config.latest_checkpoint_time(s.now);
    let rec = s.checkpoint_mut(t_c);
    let open_share_price = rec.share_price_at_open;
    rec.longs_outstanding = rec.longs_outstanding + face;
    s.track_long_open(t_c, face);

    commit(state, s)?;
    Ok(PositionReceipt {
        id: 0,
        kind: PositionKind::Long,
        face,
        checkpoint_time: t_c,
        open_share_price,
    })
}

/// Sells the position's bonds back: the curve portion at the curve price,
/// the matured portion at face. Returns base proceeds. Matured receipts
/// are paid from the zombie ledger instead.
pub fn close_long(state: &mut PoolState, receipt: &PositionReceipt) -> Result<FixedDecimal, PoolError> {
    require_initialized(state)?;
    debug_assert_eq!(receipt.kind, PositionKind::Long);
    checkpoints::mint_checkpoint(state);
    let t_r = time_remaining(state, receipt.checkpoint_time);
    if t_r.is_zero() {
        return checkpoints::redeem_matured(state, receipt);
    }

    let mut s = state.clone();
    let c = s.share_price;
    let curve = s.curve();
    let z_e = s.effective_share_reserves();
    let y = s.bond_reserves;
    let p = curve.spot_price(z_e, y)?;

    let dy_curve = receipt.face.mul(t_r, Rounding::Down);
    let dy_flat = receipt.face - dy_curve;
    let curve_shares = curve.shares_out_given_bonds_in(z_e, y, dy_curve)?;
    let flat_shares = dy_flat.div(c, Rounding::Down);

    let fee_curve = s
        .config
        .phi_n
        .mul(FixedDecimal::ONE - p, Rounding::Up)
        .mul(dy_curve, Rounding::Up);
    let fee_flat = s.config.phi_m.mul(dy_flat, Rounding::Up);
    let fee = fee_curve + fee_flat;
    let gross = c.mul(curve_shares + flat_shares, Rounding::Down);
    if gross < fee {
        return Err(PoolError::InsufficientLiquidity(
            "fees exceed the close proceeds".into(),
        ));
    }
    let payout = gross - fee;

    let lp_share = FixedDecimal::ONE - s.config.phi_g;
    let lp_fee_shares = lp_share.mul(fee, Rounding::Down).div(c, Rounding::Down);
    let lp_flat_fee_shares = lp_share.mul(fee_flat, Rounding::Down).div(c, Rounding::Down);
    let gov_shares = s.config.phi_g.mul(fee, Rounding::Down).div(c, Rounding::Down);

    s.share_reserves = s.share_reserves - curve_shares - flat_shares + lp_fee_shares;
    s.share_adjustment = s.share_adjustment - flat_shares + lp_flat_fee_shares;
    s.bond_reserves = s.bond_reserves + dy_curve;
    s.governance_fees = s.governance_fees + gov_shares;

    let rec = s.checkpoint_mut(receipt.checkpoint_time);
    rec.longs_outstanding = rec.longs_outstanding - receipt.face;
    s.track_long_close(receipt.checkpoint_time, receipt.face);

    commit(state, s)?;
    Ok(payout)
}

/// Opens a short on `bonds` face value: the pool sells that face to the
/// curve and the trader posts the difference to face (plus accrued
/// checkpoint interest and fees) as the deposit. Returns the receipt and
/// the base deposit owed.
pub fn open_short(
    state: &mut PoolState,
    bonds: FixedDecimal,
) -> Result<(PositionReceipt, FixedDecimal), PoolError> {
    require_initialized(state)?;
    require_amount(bonds)?;
    checkpoints::mint_checkpoint(state);

    let mut s = state.clone();
    let c = s.share_price;
    let curve = s.curve();
    let z_e = s.effective_share_reserves();
    let y = s.bond_reserves;
    let p = curve.spot_price(z_e, y)?;

    let shares_out = curve.shares_out_given_bonds_in(z_e, y, bonds)?;
    let fee_base = s
        .config
        .phi_n
        .mul(FixedDecimal::ONE - p, Rounding::Up)
        .mul(bonds, Rounding::Up);

    let t_c = s.config.latest_checkpoint_time(s.now);
    s.checkpoint_mut(t_c);
    let c_0 = s.checkpoints[&t_c].share_price_at_open;

    // Deposit = (c/c_0)*face - c*shares_out + fee; the trader pre-funds
    // interest accrued since the checkpoint opened.
    let face_value = c.mul(bonds, Rounding::Up).div(c_0, Rounding::Up);
    let sale_proceeds = c.mul(shares_out, Rounding::Down);
    if face_value <= sale_proceeds {
        return Err(PoolError::InsufficientLiquidity(
            "short sale proceeds exceed face value".into(),
        ));
    }
    let deposit = face_value - sale_proceeds + fee_base;

    let lp_share = FixedDecimal::ONE - s.config.phi_g;
    let lp_fee_shares = lp_share.mul(fee_base, Rounding::Down).div(c, Rounding::Down);
    let gov_shares = s.config.phi_g.mul(fee_base, Rounding::Down).div(c, Rounding::Down);

    s.share_reserves = s.share_reserves - shares_out + lp_fee_shares;
    s.bond_reserves = s.bond_reserves + bonds;
    s.governance_fees = s.governance_fees + gov_shares;

    let rec = s.checkpoint_mut(t_c);
    rec.shorts_outstanding = rec.shorts_outstanding + bonds;
    // The deposit plus sale proceeds held outside the reserves come to
    // face/c_0 shares exactly; fees were already routed above.
    rec.short_collateral = rec.short_collateral + bonds.div(c_0, Rounding::Down);
    s.track_short_open(t_c, bonds);

    commit(state, s)?;
    Ok((
        PositionReceipt {
            id: 0,
            kind: PositionKind::Short,
            face: bonds,
            checkpoint_time: t_c,
            open_share_price: c_0,
        },
        deposit,
    ))
}

/// Buys back the shorted face: the curve portion at the curve price, the
/// matured portion at face. Returns the trader's base proceeds from the
/// released collateral. Matured receipts are paid from the zombie ledger.
pub fn close_short(state: &mut PoolState, receipt: &PositionReceipt) -> Result<FixedDecimal, PoolError> {
    require_initialized(state)?;
    debug_assert_eq!(receipt.kind, PositionKind::Short);
    checkpoints::mint_checkpoint(state);
    let t_r = time_remaining(state, receipt.checkpoint_time);
    if t_r.is_zero() {
        return checkpoints::redeem_matured(state, receipt);
    }

    let mut s = state.clone();
    let c = s.share_price;
    let curve = s.curve();
    let z_e = s.effective_share_reserves();
    let y = s.bond_reserves;
    let p = curve.spot_price(z_e, y)?;

    let dy_curve = receipt.face.mul(t_r, Rounding::Down);
    let dy_flat = receipt.face - dy_curve;
    let curve_shares = curve.shares_in_given_bonds_out(z_e, y, dy_curve)?;
    let flat_shares = dy_flat.div(c, Rounding::Up);

    let fee_curve = s
        .config
        .phi_n
        .mul(FixedDecimal::ONE - p, Rounding::Up)
        .mul(dy_curve, Rounding::Up);
    let fee_flat = s.config.phi_m.mul(dy_flat, Rounding::Up);
    let fee = fee_curve + fee_flat;

    // Proceeds = (c/c_0)*face - cost of the buy-back - fees.
    let face_value = c
        .mul(receipt.face, Rounding::Down)
        .div(receipt.open_share_price, Rounding::Down);
    let cost = c.mul(curve_shares + flat_shares, Rounding::Up);
    if face_value < cost + fee {
        return Err(PoolError::InsufficientLiquidity(
            "short buy-back cost exceeds the released collateral".into(),
        ));
    }
    let payout = face_value - cost - fee;

    let lp_share = FixedDecimal::ONE - s.config.phi_g;
    let lp_fee_shares = lp_share.mul(fee, Rounding::Down).div(c, Rounding::Down);
    let lp_flat_fee_shares = lp_share.mul(fee_flat, Rounding::Down).div(c, Rounding::Down);
    let gov_shares = s.config.phi_g.mul(fee, Rounding::Down).div(c, Rounding::Down);

    s.share_reserves = s.share_reserves + curve_shares + flat_shares + lp_fee_shares;
    s.share_adjustment = s.share_adjustment + flat_shares + lp_flat_fee_shares;
    s.bond_reserves = s.bond_reserves - dy_curve;
    s.governance_fees = s.governance_fees + gov_shares;

    let rec = s.checkpoint_mut(receipt.checkpoint_time);
    rec.shorts_outstanding = rec.shorts_outstanding - receipt.face;
    let released = receipt
        .face
        .div(receipt.open_share_price, Rounding::Down)
        .min(rec.short_collateral);
    rec.short_collateral = rec.short_collateral - released;
    s.track_short_close(receipt.checkpoint_time, receipt.face);

    commit(state, s)?;
    Ok(payout)
}
