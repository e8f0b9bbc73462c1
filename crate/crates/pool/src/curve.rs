//! Power-sum pricing curve over effective share and bond reserves.
//!
//! The pool prices trades against the invariant
//!
//! ```text
//! k = (c/mu) * (mu * z_e)^(1-sigma) + y^(1-sigma)
//! ```
//!
//! where `z_e` is the effective share reserve, `y` the bond reserve, `c` the
//! current share price, `mu` the share price captured at initialization, and
//! `sigma` the time stretch in `(0, 1)`. The spot price of a bond in base is
//!
//! ```text
//! p = (mu * z_e / y)^sigma
//! ```
//!
//! which is `-c * dz_e/dy` along the invariant, so quoting by solving `k` for
//! the post-trade reserve is consistent with the marginal price.
//!
//! Every operation follows the same numerical discipline: inputs widen to
//! [`HiFixed`] once, the whole solve chain runs at 10^-24 with exact-ratio
//! exponents (`1 - sigma` and its reciprocal never pass through a lossy
//! decimal division), and each public output is rounded exactly once, in the
//! direction that favors the pool:
//!
//! - bonds paid out: down;
//! - shares paid out: down;
//! - shares charged: up;
//! - trade-size limits: down.

use fixedmath::hi::HiFixed;
use fixedmath::{FixedDecimal, Rounding};

use crate::error::PoolError;

/// Pricing inputs that are fixed for the life of a quote: the stretch, the
/// initialization share price, and the current share price.
#[derive(Copy, Clone, Debug)]
pub struct Curve {
    pub time_stretch: FixedDecimal,
    pub initial_share_price: FixedDecimal,
    pub share_price: FixedDecimal,
}

/// Both sides of a limit trade: the bond face amount and the share amount
/// that crossing the entire segment would move.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct TradeBounds {
    pub bonds: FixedDecimal,
    pub shares: FixedDecimal,
}

/// `k - side` with tolerance for truncation drift: a residual that is
/// mathematically zero can land a few 10^-24 units negative after the
/// floor-truncating chain, and must read as exactly zero rather than fail.
fn invariant_residual(k: HiFixed, side: HiFixed, context: &str) -> Result<HiFixed, PoolError> {
    const SLACK: u128 = 1_000_000; // one 10^-18 step at the 10^-24 scale
    match k.checked_sub(side) {
        Some(r) => Ok(r),
        None if side.raw() - k.raw() <= SLACK => Ok(HiFixed::ZERO),
        None => Err(PoolError::InsufficientLiquidity(context.into())),
    }
}

impl Curve {
    /// `1 - sigma`, the shared exponent numerator/denominator.
    fn one_minus_stretch(&self) -> FixedDecimal {
        FixedDecimal::ONE - self.time_stretch
    }

    fn mu_hi(&self) -> Result<HiFixed, PoolError> {
        Ok(HiFixed::from_fixed(self.initial_share_price)?)
    }

    fn c_over_mu_hi(&self) -> Result<HiFixed, PoolError> {
        Ok(HiFixed::from_fixed(self.share_price)?.div(self.mu_hi()?)?)
    }

    /// The invariant at full precision; every solve starts here.
    fn k_hi(&self, effective_shares: FixedDecimal, bond_reserves: FixedDecimal) -> Result<HiFixed, PoolError> {
        let oms = self.one_minus_stretch();
        let mz = self.mu_hi()?.mul(HiFixed::from_fixed(effective_shares)?)?;
        let share_side = self
            .c_over_mu_hi()?
            .mul(mz.pow_frac(oms, FixedDecimal::ONE)?)?;
        let bond_side = HiFixed::from_fixed(bond_reserves)?.pow_frac(oms, FixedDecimal::ONE)?;
        Ok(share_side.checked_add(bond_side)?)
    }

    /// The invariant rounded to the public scale; useful for reporting and
    /// for independent re-derivations of the quotes below.
    pub fn invariant(
        &self,
        effective_shares: FixedDecimal,
        bond_reserves: FixedDecimal,
    ) -> Result<FixedDecimal, PoolError> {
        Ok(self.k_hi(effective_shares, bond_reserves)?.to_fixed_nearest())
    }

    /// Spot price of one bond in base, rounded to nearest.
    pub fn spot_price(
        &self,
        effective_shares: FixedDecimal,
        bond_reserves: FixedDecimal,
    ) -> Result<FixedDecimal, PoolError> {
        if bond_reserves.raw() <= 0 {
            return Err(PoolError::InsufficientLiquidity(
                "spot price undefined without bond reserves".into(),
            ));
        }
        let ratio = self
            .mu_hi()?
            .mul(HiFixed::from_fixed(effective_shares)?)?
            .div(HiFixed::from_fixed(bond_reserves)?)?;
        Ok(ratio
            .pow_frac(self.time_stretch, FixedDecimal::ONE)?
            .to_fixed_nearest())
    }

    /// Inverts the price-side of the invariant: the bond reserve that makes
    /// the residual `k - share_side` hold, i.e. `residual^(1/(1-sigma))`.
    fn bond_reserves_from_residual(&self, residual: HiFixed) -> Result<HiFixed, PoolError> {
        Ok(residual.pow_frac(FixedDecimal::ONE, self.one_minus_stretch())?)
    }

    /// Inverts the share-side: `z_e' = (residual * mu / c)^(1/(1-sigma)) / mu`.
    fn effective_shares_from_residual(&self, residual: HiFixed) -> Result<HiFixed, PoolError> {
        let scaled = residual.div(self.c_over_mu_hi()?)?;
        Ok(scaled
            .pow_frac(FixedDecimal::ONE, self.one_minus_stretch())?
            .div(self.mu_hi()?)?)
    }

    /// Bonds paid out for `shares_in` deposited, rounded down.
    ///
    /// Fails with [`PoolError::ExceedsMaxTrade`] when the deposit would push
    /// the spot price above one (bond price above face).
    pub fn bonds_out_given_shares_in(
        &self,
        effective_shares: FixedDecimal,
        bond_reserves: FixedDecimal,
        shares_in: FixedDecimal,
    ) -> Result<FixedDecimal, PoolError> {
        if shares_in.is_zero() {
            return Ok(FixedDecimal::ZERO);
        }
        let k = self.k_hi(effective_shares, bond_reserves)?;
        let mz_new = self
            .mu_hi()?
            .mul(HiFixed::from_fixed(effective_shares + shares_in)?)?;
        let share_side = self
            .c_over_mu_hi()?
            .mul(mz_new.pow_frac(self.one_minus_stretch(), FixedDecimal::ONE)?)?;
        let residual = invariant_residual(k, share_side, "deposit exhausts the bond reserves")?;
        let y_new = self.bond_reserves_from_residual(residual)?;
        self.check_price_cap(mz_new, y_new, effective_shares, bond_reserves, shares_in)?;
        let bonds_out = HiFixed::from_fixed(bond_reserves)?
            .checked_sub(y_new)
            .ok_or_else(|| {
                PoolError::InsufficientLiquidity("deposit exhausts the bond reserves".into())
            })?;
        Ok(bonds_out.to_fixed(Rounding::Down))
    }

    /// Shares charged for withdrawing `bonds_out`, rounded up.
    pub fn shares_in_given_bonds_out(
        &self,
        effective_shares: FixedDecimal,
        bond_reserves: FixedDecimal,
        bonds_out: FixedDecimal,
    ) -> Result<FixedDecimal, PoolError> {
        if bonds_out.is_zero() {
            return Ok(FixedDecimal::ZERO);
        }
        if bonds_out >= bond_reserves {
            return Err(PoolError::InsufficientLiquidity(format!(
                "cannot withdraw {bonds_out} of {bond_reserves} bonds"
            )));
        }
        let k = self.k_hi(effective_shares, bond_reserves)?;
        let y_new = HiFixed::from_fixed(bond_reserves - bonds_out)?;
        let bond_side = y_new.pow_frac(self.one_minus_stretch(), FixedDecimal::ONE)?;
        let residual = invariant_residual(k, bond_side, "bond withdrawal breaks the invariant")?;
        let ze_new = self.effective_shares_from_residual(residual)?;
        let mz_new = self.mu_hi()?.mul(ze_new)?;
        self.check_price_cap(mz_new, y_new, effective_shares, bond_reserves, bonds_out)?;
        let shares_in = ze_new
            .checked_sub(HiFixed::from_fixed(effective_shares)?)
            .unwrap_or(HiFixed::ZERO);
        Ok(shares_in.to_fixed(Rounding::Up))
    }

    /// Shares paid out for depositing `bonds_in`, rounded down.
    ///
    /// Fails when the deposit is so large that the share side of the
    /// invariant cannot absorb it (the effective share reserve would need to
    /// go negative).
    pub fn shares_out_given_bonds_in(
        &self,
        effective_shares: FixedDecimal,
        bond_reserves: FixedDecimal,
        bonds_in: FixedDecimal,
    ) -> Result<FixedDecimal, PoolError> {
        if bonds_in.is_zero() {
            return Ok(FixedDecimal::ZERO);
        }
        let k = self.k_hi(effective_shares, bond_reserves)?;
        let y_new = HiFixed::from_fixed(bond_reserves + bonds_in)?;
        let bond_side = y_new.pow_frac(self.one_minus_stretch(), FixedDecimal::ONE)?;
        let residual =
            invariant_residual(k, bond_side, "bond deposit exceeds the share reserves")?;
        let ze_new = self.effective_shares_from_residual(residual)?;
        let shares_out = HiFixed::from_fixed(effective_shares)?
            .checked_sub(ze_new)
            .ok_or_else(|| {
                PoolError::InsufficientLiquidity("bond deposit exceeds the share reserves".into())
            })?;
        Ok(shares_out.to_fixed(Rounding::Down))
    }

    /// Largest bond purchase the curve supports: the trade that drives the
    /// spot price to exactly one. At that point `mu * z_e' = y'`, so
    /// `y' = (k / (c/mu + 1))^(1/(1-sigma))`. Both components round down.
    pub fn max_bonds_buyable(
        &self,
        effective_shares: FixedDecimal,
        bond_reserves: FixedDecimal,
    ) -> Result<TradeBounds, PoolError> {
        let k = self.k_hi(effective_shares, bond_reserves)?;
        let denom = self.c_over_mu_hi()?.checked_add(HiFixed::ONE)?;
        let y_new = self.bond_reserves_from_residual(k.div(denom)?)?;
        let ze_new = y_new.div(self.mu_hi()?)?;
        let bonds = HiFixed::from_fixed(bond_reserves)?
            .checked_sub(y_new)
            .unwrap_or(HiFixed::ZERO);
        let shares = ze_new
            .checked_sub(HiFixed::from_fixed(effective_shares)?)
            .unwrap_or(HiFixed::ZERO);
        Ok(TradeBounds {
            bonds: bonds.to_fixed(Rounding::Down),
            shares: shares.to_fixed(Rounding::Down),
        })
    }

    /// Largest bond sale the curve supports without pushing the effective
    /// share reserve below `effective_shares_floor`. Both components round
    /// down; a floor at or above the current reserve yields a zero trade.
    pub fn max_bonds_sellable(
        &self,
        effective_shares: FixedDecimal,
        bond_reserves: FixedDecimal,
        effective_shares_floor: FixedDecimal,
    ) -> Result<TradeBounds, PoolError> {
        if effective_shares_floor >= effective_shares {
            return Ok(TradeBounds {
                bonds: FixedDecimal::ZERO,
                shares: FixedDecimal::ZERO,
            });
        }
        let k = self.k_hi(effective_shares, bond_reserves)?;
        let mz_floor = self
            .mu_hi()?
            .mul(HiFixed::from_fixed(effective_shares_floor)?)?;
        let share_side = self
            .c_over_mu_hi()?
            .mul(mz_floor.pow_frac(self.one_minus_stretch(), FixedDecimal::ONE)?)?;
        let residual =
            invariant_residual(k, share_side, "invariant residual vanished at the floor")?;
        let y_new = self.bond_reserves_from_residual(residual)?;
        let bonds = y_new
            .checked_sub(HiFixed::from_fixed(bond_reserves)?)
            .unwrap_or(HiFixed::ZERO);
        Ok(TradeBounds {
            bonds: bonds.to_fixed(Rounding::Down),
            shares: (effective_shares - effective_shares_floor).max(FixedDecimal::ZERO),
        })
    }

    /// Reserve layout for a fresh pool: given the deposited shares and a
    /// target spot price `p`, sets
    ///
    /// ```text
    /// y   = c * z / (p^(1/sigma) + p)
    /// z_e = y * p^(1/sigma) / mu
    /// ```
    ///
    /// so that the quoted spot is exactly `p` and the pool can cover `y`
    /// bonds' worth of one-sided selling. Both outputs round down.
    pub fn initial_reserves_for_price(
        &self,
        share_reserves: FixedDecimal,
        target_price: FixedDecimal,
    ) -> Result<(FixedDecimal, FixedDecimal), PoolError> {
        if target_price.raw() <= 0 || target_price > FixedDecimal::ONE {
            return Err(PoolError::InvalidConfig(format!(
                "initial spot price {target_price} must be in (0, 1]"
            )));
        }
        let p = HiFixed::from_fixed(target_price)?;
        let p_root = p.pow_frac(FixedDecimal::ONE, self.time_stretch)?;
        let value = HiFixed::from_fixed(self.share_price)?
            .mul(HiFixed::from_fixed(share_reserves)?)?;
        let y = value.div(p_root.checked_add(p)?)?;
        let ze = y.mul(p_root)?.div(self.mu_hi()?)?;
        Ok((y.to_fixed(Rounding::Down), ze.to_fixed(Rounding::Down)))
    }

    /// Rejects quotes that land past the price-one point. The comparison has
    /// one grid step of slack so that trades sized exactly at the limit are
    /// accepted despite sub-ULP truncation drift; overshoot beyond that is a
    /// sizing error and reports the true limit.
    fn check_price_cap(
        &self,
        mz_new: HiFixed,
        y_new: HiFixed,
        effective_shares: FixedDecimal,
        bond_reserves: FixedDecimal,
        requested: FixedDecimal,
    ) -> Result<(), PoolError> {
        const SLACK: u128 = 1_000_000; // one 10^-18 step at the 10^-24 scale
        if mz_new.raw() > y_new.raw().saturating_add(SLACK) {
            let max = self.max_bonds_buyable(effective_shares, bond_reserves)?;
            return Err(PoolError::ExceedsMaxTrade {
                requested,
                max: max.bonds,
            });
        }
        Ok(())
    }
}
