//! Deterministic 18-decimal fixed-point arithmetic.
//!
//! All pool quantities are `FixedDecimal` values: an `i128` count of units of
//! 10^-18. The important guarantees:
//!
//! 1. `mul`/`div` take an explicit [`Rounding`] direction and are exact up to
//!    that final rounding — intermediates are widened to 256 bits, so
//!    `mul(a, b, Down) <= a*b <= mul(a, b, Up)` always holds and each result
//!    is within one unit of the real product/quotient.
//! 2. `pow`, `exp` and `ln` run in a binary Q.120 kernel with ~10^-35
//!    granularity, far below the public 10^-18 scale, so their results are
//!    correctly rounded for every input magnitude this crate supports.
//! 3. Everything is integer arithmetic: identical inputs give identical raw
//!    results on every platform and every run.
//! 4. Overflow of the backing width and division by zero are programming
//!    errors and panic; domain problems (negative log, overflowing pow)
//!    surface as [`MathError`] values.
//!
//! The [`hi`] module exposes the 10^-24 intermediate representation used to
//! chain several operations with only one rounding at the end; the pricing
//! code builds on it.

mod q120;
mod u256;

pub mod hi;

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use crate::q120::Scale;
use crate::u256::U256;

/// Number of raw units per 1.0.
pub const SCALE: i128 = 1_000_000_000_000_000_000;
const SCALE_U: u128 = SCALE as u128;

/// Direction applied to the final rounding step of `mul`/`div`.
///
/// `Down` rounds toward negative infinity (floor), `Up` toward positive
/// infinity (ceil); for the non-negative quantities that dominate this code
/// base these coincide with "truncate" and "round away".
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum Rounding {
    Down,
    Up,
}

/// Domain failures from the transcendental entry points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum MathError {
    #[error("fixed-point overflow")]
    Overflow,
    #[error("logarithm or power of a non-positive value")]
    NonPositiveArgument,
    #[error("value outside the supported high-precision range")]
    RangeExceeded,
    #[error("division by zero")]
    DivisionByZero,
}

/// Signed fixed-point decimal with 18 fractional digits.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FixedDecimal(i128);

impl FixedDecimal {
    pub const ZERO: FixedDecimal = FixedDecimal(0);
    pub const ONE: FixedDecimal = FixedDecimal(SCALE);
    pub const MAX: FixedDecimal = FixedDecimal(i128::MAX);

    pub const fn from_raw(raw: i128) -> Self {
        FixedDecimal(raw)
    }

    pub const fn raw(self) -> i128 {
        self.0
    }

    /// Whole-number constructor. `i64` always fits: 2^63 * 10^18 < 2^127.
    pub fn from_int(v: i64) -> Self {
        FixedDecimal(v as i128 * SCALE)
    }

    /// `n / d` as a fixed decimal, rounded down. Handy for time fractions.
    pub fn ratio(n: u64, d: u64) -> Self {
        assert!(d != 0, "division by zero");
        muldiv(n as i128, SCALE, d as i128, Rounding::Down)
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    pub fn abs(self) -> Self {
        FixedDecimal(self.0.checked_abs().expect("fixed-point overflow"))
    }

    pub fn checked_add(self, rhs: Self) -> Option<Self> {
        self.0.checked_add(rhs.0).map(FixedDecimal)
    }

    pub fn checked_sub(self, rhs: Self) -> Option<Self> {
        self.0.checked_sub(rhs.0).map(FixedDecimal)
    }

    /// `self * rhs` with one directed rounding.
    pub fn mul(self, rhs: Self, rounding: Rounding) -> Self {
        muldiv(self.0, rhs.0, SCALE, rounding)
    }

    /// `self / rhs` with one directed rounding. Panics if `rhs` is zero.
    pub fn div(self, rhs: Self, rounding: Rounding) -> Self {
        assert!(rhs.0 != 0, "division by zero");
        muldiv(self.0, SCALE, rhs.0, rounding)
    }

    pub fn mul_down(self, rhs: Self) -> Self {
        self.mul(rhs, Rounding::Down)
    }

    pub fn mul_up(self, rhs: Self) -> Self {
        self.mul(rhs, Rounding::Up)
    }

    pub fn div_down(self, rhs: Self) -> Self {
        self.div(rhs, Rounding::Down)
    }

    pub fn div_up(self, rhs: Self) -> Self {
        self.div(rhs, Rounding::Up)
    }

    /// Exact multiplication by a small integer (seconds counts and the like).
    pub fn mul_int(self, k: u64) -> Self {
        FixedDecimal(self.0.checked_mul(k as i128).expect("fixed-point overflow"))
    }

    pub fn div_int(self, k: u64, rounding: Rounding) -> Self {
        assert!(k != 0, "division by zero");
        muldiv(self.0, 1, k as i128, rounding)
    }

    /// `self^exponent` for `self > 0`, rounded to nearest.
    ///
    /// Evaluated as `exp(exponent * ln(self))` in the Q.120 kernel; the
    /// kernel error is ~10^-33 relative, so results are correctly rounded at
    /// this scale (values exactly representable in 18 digits come back
    /// exactly). `pow(x, 0) == 1` and `pow(x, 1) == x` hold bit-for-bit.
    pub fn pow(self, exponent: Self) -> Result<Self, MathError> {
        if self.0 <= 0 {
            return Err(MathError::NonPositiveArgument);
        }
        if exponent.0 == 0 {
            return Ok(Self::ONE);
        }
        if exponent == Self::ONE {
            return Ok(self);
        }
        let (lneg, lmag) = q120::ln_q120(self.0 as u128, Scale::D18);
        let argq = q120::div_by_scale(
            U256::mul_u128(lmag, exponent.0.unsigned_abs()),
            Scale::D18,
        );
        let negative = lneg != (exponent.0 < 0);
        let arg = match argq.try_to_u128() {
            Some(a) if a <= 192u128 << 120 => a,
            // |exponent * ln(base)| >= 192: the result over- or underflows
            // every representable magnitude.
            _ => return if negative { Ok(Self::ZERO) } else { Err(MathError::Overflow) },
        };
        let (mant, n) = q120::exp_q120(negative, arg);
        let raw = dec_from_mant_nearest(mant, n, Scale::D18).ok_or(MathError::Overflow)?;
        if raw > i128::MAX as u128 {
            return Err(MathError::Overflow);
        }
        Ok(FixedDecimal(raw as i128))
    }

    /// `e^self`, rounded to nearest. Errors when the result overflows.
    pub fn exp(self) -> Result<Self, MathError> {
        let mag = self.0.unsigned_abs();
        if mag >= 192 * SCALE_U {
            return if self.0 < 0 { Ok(Self::ZERO) } else { Err(MathError::Overflow) };
        }
        let arg = q120::q120_from_dec(mag, Scale::D18);
        let (mant, n) = q120::exp_q120(self.0 < 0, arg);
        let raw = dec_from_mant_nearest(mant, n, Scale::D18).ok_or(MathError::Overflow)?;
        if raw > i128::MAX as u128 {
            return Err(MathError::Overflow);
        }
        Ok(FixedDecimal(raw as i128))
    }

    /// Natural logarithm for `self > 0`, rounded to nearest.
    pub fn ln(self) -> Result<Self, MathError> {
        if self.0 <= 0 {
            return Err(MathError::NonPositiveArgument);
        }
        let (neg, mag) = q120::ln_q120(self.0 as u128, Scale::D18);
        let raw = U256::mul_u128(mag, SCALE_U)
            .checked_add(U256::from_u128(1u128 << 119))
            .expect("ln conversion overflow")
            .shr(120)
            .try_to_u128()
            .expect("ln conversion overflow") as i128;
        Ok(FixedDecimal(if neg { -raw } else { raw }))
    }
}

/// `a * b / d` with floor/ceil rounding, exact 256-bit intermediate.
fn muldiv(a: i128, b: i128, d: i128, rounding: Rounding) -> FixedDecimal {
    debug_assert!(d != 0);
    let negative = ((a < 0) != (b < 0)) != (d < 0);
    let (q, rem) = U256::mul_u128(a.unsigned_abs(), b.unsigned_abs()).div_rem_u128(d.unsigned_abs());
    let mut mag = q.try_to_u128().expect("fixed-point overflow");
    let bump = rem != 0
        && match rounding {
            Rounding::Down => negative,
            Rounding::Up => !negative,
        };
    if bump {
        mag += 1;
    }
    assert!(mag <= i128::MAX as u128, "fixed-point overflow");
    FixedDecimal(if negative { -(mag as i128) } else { mag as i128 })
}

/// Exponential-result conversion with round-to-nearest on the dropped bits.
fn dec_from_mant_nearest(mant: u128, n: i64, scale: Scale) -> Option<u128> {
    let floor = q120::dec_from_mant(mant, n, scale)?;
    let shift = 120i64 - n;
    if shift <= 0 || shift >= 256 {
        return Some(floor);
    }
    let half_bit = U256::mul_u128(mant, scale.raw()).shr(shift as u32 - 1).lo & 1;
    floor.checked_add(half_bit)
}

impl Add for FixedDecimal {
    type Output = FixedDecimal;
    fn add(self, rhs: Self) -> Self {
        self.checked_add(rhs).expect("fixed-point overflow")
    }
}

impl Sub for FixedDecimal {
    type Output = FixedDecimal;
    fn sub(self, rhs: Self) -> Self {
        self.checked_sub(rhs).expect("fixed-point overflow")
    }
}

impl Neg for FixedDecimal {
    type Output = FixedDecimal;
    fn neg(self) -> Self {
        FixedDecimal(self.0.checked_neg().expect("fixed-point overflow"))
    }
}

impl fmt::Display for FixedDecimal {
    /// Canonical form: full 18 fractional digits, no exponent, e.g.
    /// `-1.050000000000000000`. Serialization relies on this being stable.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mag = self.0.unsigned_abs();
        write!(
            f,
            "{}{}.{:018}",
            if self.0 < 0 { "-" } else { "" },
            mag / SCALE_U,
            mag % SCALE_U
        )
    }
}

impl fmt::Debug for FixedDecimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Errors from parsing decimal strings.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseFixedError {
    #[error("empty or malformed decimal string")]
    Malformed,
    #[error("more than 18 fractional digits")]
    TooManyDigits,
    #[error("decimal magnitude overflows the representable range")]
    Overflow,
}

impl FromStr for FixedDecimal {
    type Err = ParseFixedError;

    /// Accepts `[+-]digits[.digits]` with at most 18 fractional digits.
    /// Exponent notation is rejected so that config typos fail loudly.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (negative, body) = match s.as_bytes().first() {
            Some(b'-') => (true, &s[1..]),
            Some(b'+') => (false, &s[1..]),
            _ => (false, s),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(ParseFixedError::Malformed);
        }
        if !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(ParseFixedError::Malformed);
        }
        if body.contains('.') && frac_part.is_empty() {
            return Err(ParseFixedError::Malformed);
        }
        if frac_part.len() > 18 {
            return Err(ParseFixedError::TooManyDigits);
        }
        let mut raw: i128 = 0;
        for b in int_part.bytes() {
            raw = raw
                .checked_mul(10)
                .and_then(|r| r.checked_add((b - b'0') as i128))
                .ok_or(ParseFixedError::Overflow)?;
        }
        raw = raw.checked_mul(SCALE).ok_or(ParseFixedError::Overflow)?;
        let mut frac: i128 = 0;
        for b in frac_part.bytes() {
            frac = frac * 10 + (b - b'0') as i128;
        }
        frac *= 10i128.pow(18 - frac_part.len() as u32);
        raw = raw.checked_add(frac).ok_or(ParseFixedError::Overflow)?;
        Ok(FixedDecimal(if negative { -raw } else { raw }))
    }
}

impl serde::Serialize for FixedDecimal {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for FixedDecimal {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = FixedDecimal;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a decimal string with up to 18 fractional digits")
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<FixedDecimal, E> {
                v.parse().map_err(E::custom)
            }
        }
        deserializer.deserialize_str(V)
    }
}
