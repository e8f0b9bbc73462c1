//! LP share lifecycle: initialization, present value, add/remove
//! liquidity, excess-idle distribution, and withdrawal-pool redemption.
//!
//! The present value of the pool is share-denominated: the reserves, plus
//! the cost of closing the net new-bond position against the curve, plus
//! the face settlement of the net matured position, minus the locked
//! `z_min`. The LP share price `pv / (l_a + l_w)` is what every liquidity
//! operation conserves: adds mint shares at it, and the excess-idle
//! distribution marks withdrawal shares ready at it.
//!
//! Withdrawal shares: `remove_liquidity` converts active shares into
//! pending shares (`withdrawal_shares_pending`). Distribution moves idle
//! capital into the withdrawal pool (`withdrawal_pool_shares`) and marks a
//! matching amount of pending shares ready (`withdrawal_shares_ready`).
//! Ready shares redeem at the pool-average price `z_r / l_r`; first-come,
//! first-served ordering across holders is enforced by the caller that
//! tracks ownership (the scenario engine).

use fixedmath::{FixedDecimal, Rounding};
use serde::Serialize;

use crate::checkpoints;
use crate::error::PoolError;
use crate::solver;
use crate::state::{scaled_reserves, PoolState, MAX_AMOUNT};

/// Newton residual tolerance, relative to the pool's present value: 1e-12.
pub(crate) const SOLVER_RELATIVE_TOL: FixedDecimal = FixedDecimal::from_raw(1_000_000);
/// Iteration budget for the Newton phase of the step-4 solve.
pub(crate) const SOLVER_MAX_ITER: usize = 50;

/// Present value of the pool in shares, with its components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PresentValueBreakdown {
    /// `z' + n_new + n_mature - z_min`.
    pub pv: FixedDecimal,
    /// Share impact of closing the net new-bond position (signed).
    pub n_new: FixedDecimal,
    /// Share impact of settling the net matured position (signed).
    pub n_mature: FixedDecimal,
    /// Net new-bond exposure `y_l*t_l - y_s*t_s` (signed, bonds).
    pub y_net_new: FixedDecimal,
    /// Net matured exposure `y_l*(1-t_l) - y_s*(1-t_s)` (signed, bonds).
    pub y_net_mature: FixedDecimal,
}

/// LP shares with a claim on the pool's present value: active plus
/// pending-withdrawal (ready shares claim the withdrawal pool instead).
pub fn live_lp_supply(state: &PoolState) -> FixedDecimal {
    state.lp_total_supply + state.withdrawal_shares_pending
}

/// Seeds reserves so the starting spot price is exactly `target_price`,
/// mints `z` LP shares and burns `z_min` of them.
pub fn initialize(
    state: &mut PoolState,
    contribution_base: FixedDecimal,
    target_price: FixedDecimal,
) -> Result<FixedDecimal, PoolError> {
    if state.initialized {
        return Err(PoolError::AlreadyInitialized);
    }
    if contribution_base <= FixedDecimal::ZERO || contribution_base > MAX_AMOUNT {
        return Err(PoolError::NonPositiveAmount);
    }
    let c = state.share_price;
    let z = contribution_base.div(c, Rounding::Down);
    if z <= state.config.z_min {
        return Err(PoolError::InsufficientLiquidity(format!(
            "contribution {contribution_base} does not cover the minimum reserves"
        )));
    }

    let mut s = state.clone();
    s.initial_share_price = c;
    let (y, z_e) = s.curve().initial_reserves_for_price(z, target_price)?;
    s.share_reserves = z;
    s.bond_reserves = y;
    s.share_adjustment = z - z_e;
    s.lp_total_supply = z - s.config.z_min;
    s.initialized = true;
    let minted = s.lp_total_supply;
    *state = s;
    checkpoints::mint_checkpoint(state);
    Ok(minted)
}

/// Present value of the pool after hypothetically removing `dz_removed`
/// idle shares (with `zeta` and `y` scaled by the same factor, exactly as
/// a committed removal would).
pub fn present_value(
    state: &PoolState,
    dz_removed: FixedDecimal,
) -> Result<PresentValueBreakdown, PoolError> {
    if !state.initialized {
        return Err(PoolError::NotInitialized);
    }
    let z = state.share_reserves;
    if dz_removed.is_negative() || z - dz_removed < state.config.z_min {
        return Err(PoolError::InsufficientLiquidity(format!(
            "cannot value the pool with {dz_removed} shares removed"
        )));
    }
    let c = state.share_price;
    let z_new = z - dz_removed;
    let (zeta, y) = if dz_removed.is_zero() {
        (state.share_adjustment, state.bond_reserves)
    } else {
        scaled_reserves(z, state.share_adjustment, state.bond_reserves, z_new)
    };
    let z_e = z_new - zeta;
    let curve = state.curve();

    let t_l = state.avg_long_time_remaining();
    let t_s = state.avg_short_time_remaining();
    let long_new = state.longs_outstanding.mul(t_l, Rounding::Down);
    let short_new = state.shorts_outstanding.mul(t_s, Rounding::Down);
    let y_net_new = long_new - short_new;
    let y_net_mature =
        (state.longs_outstanding - long_new) - (state.shorts_outstanding - short_new);

    // Closing the net new-bond position against the curve.
    let n_new = if y_net_new.is_zero() {
        FixedDecimal::ZERO
    } else if y_net_new.is_negative() {
        // Net short: the pool buys bonds back. Beyond the price cap the
        // excess is marked to a price of one, i.e. face paid in shares.
        let need = y_net_new.abs();
        let bounds = curve.max_bonds_buyable(z_e, y)?;
        if need <= bounds.bonds {
            curve.shares_in_given_bonds_out(z_e, y, need)?
        } else {
            let capped = if bounds.bonds.is_zero() {
                FixedDecimal::ZERO
            } else {
                curve.shares_in_given_bonds_out(z_e, y, bounds.bonds)?
            };
            capped + (need - bounds.bonds).div(c, Rounding::Down)
        }
    } else {
        // Net long: the pool absorbs a bond sale. Beyond the sell cap the
        // excess is marked to a price of zero and contributes nothing.
        let bounds = curve.max_bonds_sellable(z_e, y, state.config.z_min)?;
        let sold = y_net_new.min(bounds.bonds);
        if sold.is_zero() {
            FixedDecimal::ZERO
        } else {
            -curve.shares_out_given_bonds_in(z_e, y, sold)?
        }
    };

    // Settling the net matured position at face.
    let n_mature = if y_net_mature.is_negative() {
        y_net_mature.abs().div(c, Rounding::Down)
    } else {
        -y_net_mature.div(c, Rounding::Up)
    };

    let pv = z_new + n_new + n_mature - state.config.z_min;
    Ok(PresentValueBreakdown {
        pv,
        n_new,
        n_mature,
        y_net_new,
        y_net_mature,
    })
}

/// Present value per live LP share, in share terms (multiply by the share
/// price for base terms).
pub fn lp_share_price(state: &PoolState) -> Result<FixedDecimal, PoolError> {
    let supply = live_lp_supply(state);
    if supply <= FixedDecimal::ZERO {
        return Err(PoolError::InsufficientLiquidity(
            "no live LP shares outstanding".into(),
        ));
    }
    let pv = present_value(state, FixedDecimal::ZERO)?.pv;
    Ok(pv.div(supply, Rounding::Down))
}

/// Adds `base_in`, scaling `zeta` and `y` so the spot price is unchanged,
/// and mints LP shares at the pre-add share price. Returns shares minted.
pub fn add_liquidity(state: &mut PoolState, base_in: FixedDecimal) -> Result<FixedDecimal, PoolError> {
    if !state.initialized {
        return Err(PoolError::NotInitialized);
    }
    if base_in <= FixedDecimal::ZERO {
        return Err(PoolError::NonPositiveAmount);
    }
    if base_in > MAX_AMOUNT {
        return Err(PoolError::InvalidConfig(format!(
            "amount {base_in} exceeds the supported maximum {MAX_AMOUNT}"
        )));
    }
    checkpoints::mint_checkpoint(state);

    let mut s = state.clone();
    let supply = live_lp_supply(&s);
    let pv_0 = present_value(&s, FixedDecimal::ZERO)?.pv;
    if pv_0 <= FixedDecimal::ZERO {
        return Err(PoolError::InsufficientLiquidity(
            "pool present value is not positive".into(),
        ));
    }

    let dz = base_in.div(s.share_price, Rounding::Down);
    let z_0 = s.share_reserves;
    let z_1 = z_0 + dz;
    let (zeta, y) = scaled_reserves(z_0, s.share_adjustment, s.bond_reserves, z_1);
    s.share_reserves = z_1;
    s.share_adjustment = zeta;
    s.bond_reserves = y;

    let pv_1 = present_value(&s, FixedDecimal::ZERO)?.pv;
    let minted = (pv_1 - pv_0)
        .max(FixedDecimal::ZERO)
        .mul(supply, Rounding::Down)
        .div(pv_0, Rounding::Down);
    s.lp_total_supply = s.lp_total_supply + minted;

    if !s.check_solvency() {
        return Err(PoolError::WouldBeInsolvent {
            solvency: s.solvency(),
        });
    }
    *state = s;
    Ok(minted)
}

/// Converts active LP shares into withdrawal shares, distributes idle, and
/// immediately redeems whatever portion of the caller's shares came up
/// ready (earlier pending claims are served first). Returns
/// `(base paid now, caller's withdrawal shares still pending)`.
pub fn remove_liquidity(
    state: &mut PoolState,
    lp_shares: FixedDecimal,
) -> Result<(FixedDecimal, FixedDecimal), PoolError> {
    if !state.initialized {
        return Err(PoolError::NotInitialized);
    }
    if lp_shares.is_negative() {
        return Err(PoolError::NonPositiveAmount);
    }
    if lp_shares.is_zero() {
        return Ok((FixedDecimal::ZERO, FixedDecimal::ZERO));
    }
    if lp_shares > state.lp_total_supply {
        return Err(PoolError::InsufficientBalance(format!(
            "{lp_shares} LP shares requested, {} active",
            state.lp_total_supply
        )));
    }
    checkpoints::mint_checkpoint(state);

    let mut s = state.clone();
    let queued_ahead = s.withdrawal_shares_pending;
    s.lp_total_supply = s.lp_total_supply - lp_shares;
    s.withdrawal_shares_pending = s.withdrawal_shares_pending + lp_shares;

    let (_, marked_ready) = distribute_excess_idle(&mut s)?;
    // First-come-first-served: readiness covers earlier pending claims
    // before the caller's.
    let caller_ready = (marked_ready - queued_ahead)
        .max(FixedDecimal::ZERO)
        .min(lp_shares);
    let paid = if caller_ready.is_zero() {
        FixedDecimal::ZERO
    } else {
        redeem_withdrawal_shares(&mut s, caller_ready)?
    };
    *state = s;
    Ok((paid, lp_shares - caller_ready))
}

/// Moves removable idle capital into the withdrawal pool, marking pending
/// withdrawal shares ready without moving the LP share price. Returns
/// `(shares distributed, withdrawal shares marked ready)`.
///
/// Steps: (1) if the net curve position is not net short, or the post-
/// removal buy capacity still covers the net short, all idle can go;
/// (2) otherwise shrink the removal until capacity exactly covers it
/// (capacity scales linearly with the reserves); (3) value the removal and
/// mark `(1 - pv_1/pv_0) * l` shares ready; (4) if that exceeds the
/// pending queue, cap it and solve for the removal that keeps the share
/// price fixed — affine when the new-bond legs net out, Newton with a
/// bisection fallback otherwise; (5) commit, scaling `zeta` and `y`.
pub fn distribute_excess_idle(
    state: &mut PoolState,
) -> Result<(FixedDecimal, FixedDecimal), PoolError> {
    if !state.initialized {
        return Ok((FixedDecimal::ZERO, FixedDecimal::ZERO));
    }
    let pending = state.withdrawal_shares_pending;
    if pending.is_zero() {
        return Ok((FixedDecimal::ZERO, FixedDecimal::ZERO));
    }
    let idle = state.idle_liquidity();
    if idle.is_zero() {
        return Ok((FixedDecimal::ZERO, FixedDecimal::ZERO));
    }
    let supply = live_lp_supply(state);
    let pv_0 = present_value(state, FixedDecimal::ZERO)?.pv;
    if pv_0 <= FixedDecimal::ZERO {
        return Ok((FixedDecimal::ZERO, FixedDecimal::ZERO));
    }

    // Steps 1-2: the largest removal whose post-state can still buy back
    // the net short position.
    let t_l = state.avg_long_time_remaining();
    let t_s = state.avg_short_time_remaining();
    let long_new = state.longs_outstanding.mul(t_l, Rounding::Down);
    let short_new = state.shorts_outstanding.mul(t_s, Rounding::Down);
    let mut dz_max = idle;
    if short_new > long_new {
        let net_short = short_new - long_new;
        let z = state.share_reserves;
        let (zeta_h, y_h) = scaled_reserves(z, state.share_adjustment, state.bond_reserves, z - idle);
        let capacity_after = state
            .curve()
            .max_bonds_buyable(z - idle - zeta_h, y_h)?
            .bonds;
        if capacity_after < net_short {
            let z_e = state.effective_share_reserves();
            let capacity_now = state.curve().max_bonds_buyable(z_e, state.bond_reserves)?.bonds;
            if capacity_now <= net_short {
                return Ok((FixedDecimal::ZERO, FixedDecimal::ZERO));
            }
            // Capacity scales with (z - dz)/z, so solve
            // (z - dz)/z * capacity_now = net_short in closed form.
            let keep = z.mul(net_short, Rounding::Up).div(capacity_now, Rounding::Up);
            dz_max = (z - keep).max(FixedDecimal::ZERO).min(idle);
            if dz_max.is_zero() {
                return Ok((FixedDecimal::ZERO, FixedDecimal::ZERO));
            }
        }
    }

    // Step 3: value the removal at the current share price.
    let pv_at_max = present_value(state, dz_max)?.pv;
    let mut dw = (pv_0 - pv_at_max)
        .max(FixedDecimal::ZERO)
        .mul(supply, Rounding::Down)
        .div(pv_0, Rounding::Down);
    let mut dz = dz_max;
    if dw.is_zero() {
        return Ok((FixedDecimal::ZERO, FixedDecimal::ZERO));
    }

    // Step 4: the queue caps the payout; shrink the removal to match.
    if dw > pending {
        dw = pending;
        if long_new == short_new {
            // PV is affine in dz here: pv(dz) = pv_0 - dz.
            dz = pv_0.mul(dw, Rounding::Down).div(supply, Rounding::Down);
            dz = dz.min(dz_max);
        } else {
            // Solve pv(dz) * l == pv_0 * (l - dw).
            let target = pv_0
                .mul(supply - dw, Rounding::Down)
                .div(supply, Rounding::Down);
            if pv_at_max >= target {
                dz = dz_max;
            } else {
                let tol = pv_0.mul(SOLVER_RELATIVE_TOL, Rounding::Up).max(FixedDecimal::from_raw(1));
                let objective = |x: FixedDecimal| Ok(present_value(state, x)?.pv - target);
                let guess = (pv_0 - target).min(dz_max);
                dz = solver::newton_with_bisection(
                    objective,
                    FixedDecimal::ZERO,
                    dz_max,
                    guess,
                    tol,
                    SOLVER_MAX_ITER,
                )?;
            }
        }
    }

    // Step 5: commit. dz <= idle keeps z at or above e/c + z_min; z_e
    // shrinks proportionally and may pass below z_min, which only blocks
    // further curve sells, not the drain itself.
    let mut s = state.clone();
    let z_0 = s.share_reserves;
    let z_1 = z_0 - dz;
    let (zeta, y) = scaled_reserves(z_0, s.share_adjustment, s.bond_reserves, z_1);
    s.share_reserves = z_1;
    s.share_adjustment = zeta;
    s.bond_reserves = y;
    s.withdrawal_shares_pending = s.withdrawal_shares_pending - dw;
    s.withdrawal_shares_ready = s.withdrawal_shares_ready + dw;
    s.withdrawal_pool_shares = s.withdrawal_pool_shares + dz;
    *state = s;
    Ok((dz, dw))
}

/// Redeems ready withdrawal shares at the pool-average price `z_r / l_r`.
/// Ownership and first-come-first-served ordering are the caller's
/// responsibility. Returns base paid.
pub fn redeem_withdrawal_shares(
    state: &mut PoolState,
    dw: FixedDecimal,
) -> Result<FixedDecimal, PoolError> {
    if dw.is_negative() {
        return Err(PoolError::NonPositiveAmount);
    }
    if dw.is_zero() {
        return Ok(FixedDecimal::ZERO);
    }
    if dw > state.withdrawal_shares_ready {
        return Err(PoolError::InsufficientBalance(format!(
            "{dw} withdrawal shares requested, {} ready",
            state.withdrawal_shares_ready
        )));
    }
    let quota = if dw == state.withdrawal_shares_ready {
        state.withdrawal_pool_shares
    } else {
        dw.mul(state.withdrawal_pool_shares, Rounding::Down)
            .div(state.withdrawal_shares_ready, Rounding::Down)
    };
    let payout = state.share_price.mul(quota, Rounding::Down);
    state.withdrawal_pool_shares = state.withdrawal_pool_shares - quota;
    state.withdrawal_shares_ready = state.withdrawal_shares_ready - dw;
    Ok(payout)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::PoolConfig;
    use crate::trading::{self, tests::fd, tests::worked_pool};

    fn fresh_config() -> PoolConfig {
        PoolConfig {
            sigma: fd("0.5"),
            phi_n: FixedDecimal::ZERO,
            phi_m: FixedDecimal::ZERO,
            phi_g: FixedDecimal::ZERO,
            phi_g_zombie: FixedDecimal::ZERO,
            d_c: 86_400,
            position_duration: 31_536_000,
            z_min: FixedDecimal::ONE,
        }
    }

    fn initialized_pool() -> PoolState {
        let mut s = PoolState::new(fresh_config());
        initialize(&mut s, fd("100"), fd("0.25")).unwrap();
        s
    }

    #[test]
    fn initialize_matches_worked_example() {
        let s = initialized_pool();
        assert_eq!(s.share_reserves, fd("100"));
        assert_eq!(s.bond_reserves, fd("320"));
        assert_eq!(s.share_adjustment, fd("80"));
        assert_eq!(s.effective_share_reserves(), fd("20"));
        assert_eq!(s.lp_total_supply, fd("99"));
        assert_eq!(s.initial_share_price, FixedDecimal::ONE);
        let spot = s.curve().spot_price(fd("20"), fd("320")).unwrap();
        assert_eq!(spot, fd("0.25"));
        // Both defining equations hold to well below 1e-12.
        let residual = (fd("20") + fd("0.25").mul(fd("320"), Rounding::Down) - fd("100")).abs();
        assert!(residual <= fd("0.000000000001"));
        assert_eq!(lp_share_price(&s).unwrap(), FixedDecimal::ONE);
    }

    #[test]
    fn initialize_at_price_one_splits_reserves() {
        let mut s = PoolState::new(fresh_config());
        initialize(&mut s, fd("100"), fd("1")).unwrap();
        assert_eq!(s.bond_reserves, fd("50"));
        assert_eq!(s.effective_share_reserves(), fd("50"));
        let spot = s.curve().spot_price(fd("50"), fd("50")).unwrap();
        assert_eq!(spot, FixedDecimal::ONE);
    }

    #[test]
    fn initialize_rejections() {
        let mut s = PoolState::new(fresh_config());
        assert!(matches!(
            initialize(&mut s, fd("0.5"), fd("0.25")),
            Err(PoolError::InsufficientLiquidity(_))
        ));
        initialize(&mut s, fd("100"), fd("0.25")).unwrap();
        assert!(matches!(
            initialize(&mut s, fd("100"), fd("0.25")),
            Err(PoolError::AlreadyInitialized)
        ));
    }

    #[test]
    fn present_value_of_empty_pool_is_reserves_minus_minimum() {
        let s = initialized_pool();
        let b = present_value(&s, FixedDecimal::ZERO).unwrap();
        assert_eq!(b.pv, fd("99"));
        assert_eq!(b.n_new, FixedDecimal::ZERO);
        assert_eq!(b.n_mature, FixedDecimal::ZERO);
    }

    #[test]
    fn present_value_counts_matured_net_longs_at_face() {
        // z=100, z_min=1, one matured (unprocessed) net long of 10, c=1:
        // pv = 100 - 10 - 1 = 89.
        let mut s = worked_pool("0", "0", "0");
        s.checkpoint_mut(0).longs_outstanding = fd("10");
        s.track_long_open(0, fd("10"));
        s.now = s.config.position_duration;
        let b = present_value(&s, FixedDecimal::ZERO).unwrap();
        assert_eq!(b.y_net_new, FixedDecimal::ZERO);
        assert_eq!(b.y_net_mature, fd("10"));
        assert_eq!(b.n_mature, -fd("10"));
        assert_eq!(b.pv, fd("89"));
    }

    #[test]
    fn present_value_nets_matched_positions_to_zero() {
        let mut s = worked_pool("0", "0", "0");
        s.checkpoint_mut(0).longs_outstanding = fd("10");
        s.checkpoint_mut(0).shorts_outstanding = fd("10");
        s.track_long_open(0, fd("10"));
        s.track_short_open(0, fd("10"));
        let b = present_value(&s, FixedDecimal::ZERO).unwrap();
        assert_eq!(b.y_net_new, FixedDecimal::ZERO);
        assert_eq!(b.y_net_mature, FixedDecimal::ZERO);
        assert_eq!(b.pv, fd("99"));
    }

    #[test]
    fn add_liquidity_scales_reserves_and_mints_at_par() {
        let mut s = initialized_pool();
        let minted = add_liquidity(&mut s, fd("50")).unwrap();
        assert_eq!(minted, fd("50"));
        assert_eq!(s.share_reserves, fd("150"));
        assert_eq!(s.share_adjustment, fd("120"));
        assert_eq!(s.bond_reserves, fd("480"));
        let spot = s.curve().spot_price(fd("30"), fd("480")).unwrap();
        assert_eq!(spot, fd("0.25"));
        assert_eq!(lp_share_price(&s).unwrap(), FixedDecimal::ONE);
    }

    #[test]
    fn add_liquidity_preserves_share_price_with_open_positions() {
        let mut s = worked_pool("0", "0", "0");
        trading::open_long(&mut s, fd("21")).unwrap();
        trading::open_short(&mut s, fd("10")).unwrap();
        let p_before = lp_share_price(&s).unwrap();
        add_liquidity(&mut s, fd("37")).unwrap();
        let p_after = lp_share_price(&s).unwrap();
        let tol = p_before.mul(fd("0.000000001"), Rounding::Up);
        assert!(
            (p_after - p_before).abs() <= tol,
            "{p_before} -> {p_after}"
        );
    }

    #[test]
    fn add_then_remove_returns_the_contribution() {
        let mut s = initialized_pool();
        let minted = add_liquidity(&mut s, fd("50")).unwrap();
        let (paid, remaining) = remove_liquidity(&mut s, minted).unwrap();
        assert_eq!(remaining, FixedDecimal::ZERO);
        assert!((paid - fd("50")).abs() <= FixedDecimal::from_raw(6), "paid {paid}");
    }

    #[test]
    fn distribute_affine_worked_example() {
        // No positions, z=100, z_min=1, l=99 with 10 pending: the affine
        // solve gives dz = dw = 10.
        let mut s = initialized_pool();
        s.lp_total_supply = fd("89");
        s.withdrawal_shares_pending = fd("10");
        let (dz, dw) = distribute_excess_idle(&mut s).unwrap();
        assert_eq!(dw, fd("10"));
        assert_eq!(dz, fd("10"));
        assert_eq!(s.share_reserves, fd("90"));
        assert_eq!(s.withdrawal_shares_pending, FixedDecimal::ZERO);
        assert_eq!(s.withdrawal_shares_ready, fd("10"));
        assert_eq!(s.withdrawal_pool_shares, fd("10"));
        // The share price is exactly preserved: 89/89 = 1.
        assert_eq!(lp_share_price(&s).unwrap(), FixedDecimal::ONE);
        // Spot price preserved by the scaling.
        let spot = s
            .curve()
            .spot_price(s.effective_share_reserves(), s.bond_reserves)
            .unwrap();
        assert_eq!(spot, fd("0.25"));
    }

    #[test]
    fn distribute_no_op_cases() {
        let mut s = initialized_pool();
        assert_eq!(
            distribute_excess_idle(&mut s).unwrap(),
            (FixedDecimal::ZERO, FixedDecimal::ZERO)
        );
        // Pending but no idle.
        s.withdrawal_shares_pending = fd("10");
        s.config.z_min = fd("100");
        assert_eq!(
            distribute_excess_idle(&mut s).unwrap(),
            (FixedDecimal::ZERO, FixedDecimal::ZERO)
        );
    }

    #[test]
    fn remove_liquidity_pays_fully_from_an_idle_pool() {
        let mut s = initialized_pool();
        let (paid, remaining) = remove_liquidity(&mut s, fd("99")).unwrap();
        assert_eq!(remaining, FixedDecimal::ZERO);
        assert_eq!(paid, fd("99"));
        assert_eq!(s.share_reserves, FixedDecimal::ONE);
        assert_eq!(s.lp_total_supply, FixedDecimal::ZERO);
        assert_eq!(s.withdrawal_shares_ready, FixedDecimal::ZERO);
        assert_eq!(s.withdrawal_pool_shares, FixedDecimal::ZERO);
    }

    #[test]
    fn remove_liquidity_queues_when_pool_is_locked() {
        let mut s = worked_pool("0", "0", "0");
        // Exposure consumes every removable share: idle = 100 - 99 - 1 = 0.
        s.checkpoint_mut(0).longs_outstanding = fd("99");
        let before_z = s.share_reserves;
        let (paid, remaining) = remove_liquidity(&mut s, fd("40")).unwrap();
        assert_eq!(paid, FixedDecimal::ZERO);
        assert_eq!(remaining, fd("40"));
        assert_eq!(s.withdrawal_shares_pending, fd("40"));
        assert_eq!(s.share_reserves, before_z);
    }

    #[test]
    fn remove_liquidity_partial_when_idle_is_scarce() {
        // Fresh long exposure locks part of the reserves; the remover is
        // paid what the idle supports and queues the rest.
        let mut s = worked_pool("0", "0", "0");
        trading::open_long(&mut s, fd("30")).unwrap();
        let (paid, remaining) = remove_liquidity(&mut s, fd("99")).unwrap();
        assert!(paid > FixedDecimal::ZERO);
        assert!(remaining > FixedDecimal::ZERO);
        assert_eq!(s.withdrawal_shares_pending, remaining);
        assert!(s.check_solvency());
        // Everything marked ready went to the caller.
        assert_eq!(s.withdrawal_shares_ready, FixedDecimal::ZERO);
    }

    #[test]
    fn redeem_withdrawal_share_examples() {
        let mut s = worked_pool("0", "0", "0");
        s.share_price = fd("2");
        s.withdrawal_pool_shares = fd("50");
        s.withdrawal_shares_ready = fd("100");
        let paid = redeem_withdrawal_shares(&mut s, fd("10")).unwrap();
        assert_eq!(paid, fd("10"));
        assert_eq!(s.withdrawal_pool_shares, fd("45"));
        assert_eq!(s.withdrawal_shares_ready, fd("90"));
        // Full redemption drains the pool exactly.
        let paid = redeem_withdrawal_shares(&mut s, fd("90")).unwrap();
        assert_eq!(paid, fd("90"));
        assert_eq!(s.withdrawal_pool_shares, FixedDecimal::ZERO);
        assert_eq!(redeem_withdrawal_shares(&mut s, FixedDecimal::ZERO).unwrap(), FixedDecimal::ZERO);
        assert!(redeem_withdrawal_shares(&mut s, fd("1")).is_err());
    }

    #[test]
    fn distribute_solves_the_newton_branch() {
        // Unbalanced new-bond legs force the step-4 solve off the affine
        // path; the result must still preserve the LP share price.
        let mut s = worked_pool("0", "0", "0");
        trading::open_long(&mut s, fd("12")).unwrap();
        trading::open_short(&mut s, fd("30")).unwrap();
        let p_before = lp_share_price(&s).unwrap();
        s.lp_total_supply = s.lp_total_supply - fd("3");
        s.withdrawal_shares_pending = fd("3");
        let (dz, dw) = distribute_excess_idle(&mut s).unwrap();
        assert!(dz > FixedDecimal::ZERO);
        assert_eq!(dw, fd("3"));
        let p_after = lp_share_price(&s).unwrap();
        let tol = p_before.mul(fd("0.000001"), Rounding::Up);
        assert!((p_after - p_before).abs() <= tol, "{p_before} -> {p_after}");
    }
}
