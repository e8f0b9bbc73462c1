//! High-precision intermediates: unsigned fixed point with 24 fractional
//! digits.
//!
//! Pricing formulas chain several multiplications, divisions and fractional
//! powers. Doing each step at the public 10^-18 scale would accumulate one
//! rounding error per step; instead the whole chain runs here, with six guard
//! digits, and converts back exactly once. Every `HiFixed` operation
//! truncates (floors), so after `k` steps a result is below the exact value
//! by at most `k` units of 10^-24 (plus amplified carry-through, which the
//! conversion's snap window absorbs). The final [`HiFixed::to_fixed`] applies
//! the caller's rounding direction.
//!
//! Supported magnitude: up to 2^128-1 raw units, about 3.4 * 10^14 whole
//! units. Callers cap pool reserves far below that (10^13), which keeps every
//! product of a reserve with a price or fee factor inside range.

use crate::q120::{self, Scale};
use crate::u256::U256;
use crate::{FixedDecimal, MathError, Rounding};

/// Raw units per 1.0 at this scale.
pub const HI_SCALE: u128 = 1_000_000_000_000_000_000_000_000;
/// One 10^-18 step expressed in 10^-24 raw units.
const GRID: u128 = 1_000_000;

/// Unsigned fixed point with 24 fractional digits. See the module docs.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct HiFixed {
    raw: u128,
}

impl HiFixed {
    pub const ZERO: HiFixed = HiFixed { raw: 0 };
    pub const ONE: HiFixed = HiFixed { raw: HI_SCALE };

    pub const fn from_raw(raw: u128) -> Self {
        HiFixed { raw }
    }

    pub const fn raw(self) -> u128 {
        self.raw
    }

    pub fn is_zero(self) -> bool {
        self.raw == 0
    }

    /// Widens a non-negative public value. Fails on negatives and on values
    /// above ~3.4 * 10^14, neither of which a validated pool can produce.
    pub fn from_fixed(f: FixedDecimal) -> Result<Self, MathError> {
        if f.raw() < 0 {
            return Err(MathError::RangeExceeded);
        }
        (f.raw() as u128)
            .checked_mul(GRID)
            .map(|raw| HiFixed { raw })
            .ok_or(MathError::RangeExceeded)
    }

    /// Narrows back to the public scale with the requested direction.
    ///
    /// Values within the snap window of a 10^-18 grid point collapse onto it
    /// regardless of direction: a chain whose exact result is representable
    /// lands a few 10^-24 units off-grid, and honoring the raw direction
    /// there would turn "exactly 2" into 1.999999999999999999. The window is
    /// 64 raw units plus 2^-78 of the magnitude — far below half a grid step
    /// for all supported pool sizes — so off-grid results still round in the
    /// requested direction and end up within one 10^-18 of the exact value.
    pub fn to_fixed(self, rounding: Rounding) -> FixedDecimal {
        let q = self.raw / GRID;
        let rem = self.raw % GRID;
        if rem == 0 {
            return FixedDecimal::from_raw(q as i128);
        }
        let eps = 64 + (self.raw >> 78);
        let snapped = if eps >= GRID / 2 {
            // Snap window has grown past half a step (magnitude beyond
            // ~1.5 * 10^5 units): directed rounding is meaningless noise
            // there, so round to nearest.
            if rem >= GRID / 2 {
                q + 1
            } else {
                q
            }
        } else if rem <= eps {
            q
        } else if GRID - rem <= eps {
            q + 1
        } else {
            match rounding {
                Rounding::Down => q,
                Rounding::Up => q + 1,
            }
        };
        FixedDecimal::from_raw(snapped as i128)
    }

    pub fn to_fixed_nearest(self) -> FixedDecimal {
        let q = self.raw / GRID;
        let rem = self.raw % GRID;
        FixedDecimal::from_raw(if rem >= GRID / 2 { q as i128 + 1 } else { q as i128 })
    }

    pub fn checked_add(self, rhs: Self) -> Result<Self, MathError> {
        self.raw
            .checked_add(rhs.raw)
            .map(|raw| HiFixed { raw })
            .ok_or(MathError::Overflow)
    }

    pub fn checked_sub(self, rhs: Self) -> Option<Self> {
        self.raw.checked_sub(rhs.raw).map(|raw| HiFixed { raw })
    }

    /// Truncating product: `floor(self * rhs / 10^24)`.
    pub fn mul(self, rhs: Self) -> Result<Self, MathError> {
        q120::div_by_scale(U256::mul_u128(self.raw, rhs.raw), Scale::D24)
            .try_to_u128()
            .map(|raw| HiFixed { raw })
            .ok_or(MathError::Overflow)
    }

    /// Truncating quotient: `floor(self * 10^24 / rhs)`.
    pub fn div(self, rhs: Self) -> Result<Self, MathError> {
        if rhs.raw == 0 {
            return Err(MathError::DivisionByZero);
        }
        U256::mul_u128(self.raw, HI_SCALE)
            .div_rem_u128(rhs.raw)
            .0
            .try_to_u128()
            .map(|raw| HiFixed { raw })
            .ok_or(MathError::Overflow)
    }

    /// `self^(num/den)` with the exponent kept as an exact ratio.
    ///
    /// The pricing exponents are ratios like `1 / (1 - sigma)`; evaluating
    /// the quotient at 10^-18 first would inject an exponent error of up to
    /// 10^-18, which the power then amplifies by `|ln(base)| * result`.
    /// Passing numerator and denominator separately keeps the exponent exact:
    /// the only error left is the kernel's own ~10^-33.
    ///
    /// `den` must be positive and below 2^64 raw units (~18.4); every caller
    /// uses `1` or `1 - sigma`. `num` may be negative. `0^positive = 0`,
    /// `x^0 = 1`, and a zero base with a non-positive exponent is a domain
    /// error. Results too large for this scale report `Overflow`; results
    /// below 10^-24 flush to zero.
    pub fn pow_frac(self, num: FixedDecimal, den: FixedDecimal) -> Result<Self, MathError> {
        if den.raw() <= 0 {
            return Err(MathError::NonPositiveArgument);
        }
        let den_raw = den.raw() as u128;
        if den_raw > u64::MAX as u128 {
            return Err(MathError::RangeExceeded);
        }
        if num.is_zero() {
            return Ok(HiFixed::ONE);
        }
        if self.raw == 0 {
            return if num.raw() > 0 {
                Ok(HiFixed::ZERO)
            } else {
                Err(MathError::NonPositiveArgument)
            };
        }
        if num == den {
            return Ok(self);
        }
        if self.raw == HI_SCALE {
            return Ok(HiFixed::ONE);
        }
        let (lneg, lmag) = q120::ln_q120(self.raw, Scale::D24);
        let negative = lneg != num.is_negative();
        // arg = |ln(self)| * |num| / den in Q.120; the 10^-18 scales of num
        // and den cancel, so this is exact up to one final truncation.
        let arg = match U256::mul_u128(lmag, num.raw().unsigned_abs())
            .div_rem_u128(den_raw)
            .0
            .try_to_u128()
        {
            Some(a) => a,
            // |exponent * ln(base)| >= 2^8: outside any representable result.
            None => {
                return if negative { Ok(HiFixed::ZERO) } else { Err(MathError::Overflow) }
            }
        };
        let (mant, n) = q120::exp_q120(negative, arg);
        q120::dec_from_mant(mant, n, Scale::D24)
            .map(|raw| HiFixed { raw })
            .ok_or(MathError::Overflow)
    }
}
