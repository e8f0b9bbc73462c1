//! Binary fixed-point transcendental kernel.
//!
//! `ln` and `exp` are evaluated in Q.120 binary fixed point (120 fractional
//! bits, values held in `u128`). Because the scale is a power of two, every
//! series step reduces to a widening multiply plus a shift, which keeps the
//! kernel fast while leaving ~10^-36 granularity — far below the 10^-18
//! public scale. All decimal/binary conversions route through exact `U256`
//! arithmetic, and divisions by 10^n are decomposed into a shift by 2^n and a
//! division by 5^n (which fits in 64 bits for every scale used here).

use crate::u256::U256;

pub const Q120_ONE: u128 = 1u128 << 120;

/// floor(ln(2) * 2^120), precomputed with 60-digit arithmetic.
pub const LN2_Q120: u128 = 921350637599661305226344307672478454;

/// Decimal scales understood by the conversion helpers.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum Scale {
    /// 10^18 — the public `FixedDecimal` scale.
    D18,
    /// 10^24 — the internal high-precision scale.
    D24,
}

impl Scale {
    pub fn raw(self) -> u128 {
        match self {
            Scale::D18 => 10u128.pow(18),
            Scale::D24 => 10u128.pow(24),
        }
    }

    fn pow2(self) -> u32 {
        match self {
            Scale::D18 => 18,
            Scale::D24 => 24,
        }
    }

    fn pow5(self) -> u128 {
        match self {
            Scale::D18 => 5u128.pow(18),
            Scale::D24 => 5u128.pow(24),
        }
    }

    /// floor(log2(scale)); used to seed mantissa normalization.
    fn log2_floor(self) -> i32 {
        match self {
            Scale::D18 => 59,
            Scale::D24 => 79,
        }
    }
}

/// floor(n / 10^scale) using the shift-then-divide decomposition.
pub fn div_by_scale(n: U256, scale: Scale) -> U256 {
    let (q, _) = n.shr(scale.pow2()).div_rem_u128(scale.pow5());
    q
}

/// Q.120 product with truncation toward zero.
fn mulq(a: u128, b: u128) -> u128 {
    U256::mul_u128(a, b)
        .shr(120)
        .try_to_u128()
        .expect("Q.120 product overflow")
}

/// Natural logarithm of `raw / scale` as `(negative, magnitude)` in Q.120.
///
/// `raw` must be nonzero; the caller screens the domain.
pub fn ln_q120(raw: u128, scale: Scale) -> (bool, u128) {
    debug_assert!(raw > 0);
    // Normalize raw/scale = m * 2^k with m in [1, 2).
    let bits = 128 - raw.leading_zeros() as i32;
    let mut k = bits - 1 - scale.log2_floor() - 1;
    let mut m = mantissa(raw, scale, k);
    while m < Q120_ONE {
        k -= 1;
        m = mantissa(raw, scale, k);
    }
    while m >= 2 * Q120_ONE {
        k += 1;
        m = mantissa(raw, scale, k);
    }

    // ln(m) = 2 * artanh((m-1)/(m+1)); t < 1/3 so the series converges fast.
    let t = U256::from_u128(m - Q120_ONE)
        .shl(120)
        .div_rem_u128(m + Q120_ONE)
        .0
        .try_to_u128()
        .expect("artanh argument overflow");
    let t2 = mulq(t, t);
    let mut sum = t;
    let mut term = t;
    let mut i: u128 = 3;
    loop {
        term = mulq(term, t2);
        let add = term / i;
        if add == 0 {
            break;
        }
        sum += add;
        i += 2;
        debug_assert!(i < 200, "artanh series failed to converge");
    }
    let ln_m = 2 * sum;

    if k >= 0 {
        (false, k as u128 * LN2_Q120 + ln_m)
    } else {
        let kl = (-k) as u128 * LN2_Q120;
        if kl >= ln_m {
            (true, kl - ln_m)
        } else {
            (false, ln_m - kl)
        }
    }
}

/// `raw * 2^(120-k) / scale`, the candidate mantissa for exponent `k`.
fn mantissa(raw: u128, scale: Scale, k: i32) -> u128 {
    let shift = 120 - k;
    debug_assert!((0..=256).contains(&shift));
    div_by_scale(U256::from_u128(raw).shl(shift as u32), scale)
        .try_to_u128()
        .expect("mantissa overflow")
}

/// exp of a signed Q.120 argument as `(mantissa, n)` with the value equal to
/// `mantissa / 2^120 * 2^n` and `mantissa` in `[2^120, 2^121)`.
pub fn exp_q120(negative: bool, magnitude: u128) -> (u128, i64) {
    if magnitude == 0 {
        return (Q120_ONE, 0);
    }
    // Split |x| = n*ln2 + r with r in [0, ln2); exp(r) lands in [1, 2).
    let n = magnitude / LN2_Q120;
    let r = magnitude - n * LN2_Q120;
    let mut sum = Q120_ONE;
    let mut term = Q120_ONE;
    let mut k: u128 = 1;
    loop {
        term = mulq(term, r) / k;
        if term == 0 {
            break;
        }
        sum += term;
        k += 1;
        debug_assert!(k < 200, "exp series failed to converge");
    }
    debug_assert!((Q120_ONE..2 * Q120_ONE).contains(&sum));

    if !negative {
        (sum, n as i64)
    } else {
        // 1/(sum * 2^n): invert the mantissa and renormalize.
        let recip = (U256 { hi: 1u128 << 112, lo: 0 })
            .div_rem_u128(sum)
            .0
            .try_to_u128()
            .expect("exp reciprocal overflow");
        if recip >= Q120_ONE {
            (Q120_ONE, -(n as i64))
        } else {
            (recip << 1, -(n as i64) - 1)
        }
    }
}

/// Converts `raw / scale` into Q.120. Caller must keep the value below 2^8.
pub fn q120_from_dec(raw: u128, scale: Scale) -> u128 {
    div_by_scale(U256::from_u128(raw).shl(120), scale)
        .try_to_u128()
        .expect("Q.120 conversion overflow")
}

/// Converts an `(mantissa, n)` exponential result to a decimal raw value at
/// `scale`, truncating toward zero. Returns `None` when `u128` overflows.
pub fn dec_from_mant(mantissa: u128, n: i64, scale: Scale) -> Option<u128> {
    let prod = U256::mul_u128(mantissa, scale.raw());
    let shift = 120i64 - n;
    let shifted = if shift <= 0 {
        if shift < -120 {
            return None;
        }
        prod.shl((-shift) as u32)
    } else if shift >= 256 {
        U256::ZERO
    } else {
        prod.shr(shift as u32)
    };
    shifted.try_to_u128()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q120_to_f64(neg: bool, mag: u128) -> f64 {
        let v = mag as f64 / Q120_ONE as f64;
        if neg {
            -v
        } else {
            v
        }
    }

    #[test]
    fn ln_known_values() {
        // ln(2) at D18 scale.
        let (neg, mag) = ln_q120(2 * 10u128.pow(18), Scale::D18);
        assert!(!neg);
        let err = (mag as i128 - LN2_Q120 as i128).abs();
        assert!(err < 1 << 20, "ln(2) off by {err} q120 units");

        // ln(1) == 0.
        let (_, mag) = ln_q120(10u128.pow(24), Scale::D24);
        assert_eq!(mag, 0);

        // ln(0.5) == -ln(2).
        let (neg, mag) = ln_q120(5 * 10u128.pow(17), Scale::D18);
        assert!(neg);
        let err = (mag as i128 - LN2_Q120 as i128).abs();
        assert!(err < 1 << 20);

        // ln(10) spot check against f64.
        let (neg, mag) = ln_q120(10 * 10u128.pow(24), Scale::D24);
        assert!(!neg);
        assert!((q120_to_f64(neg, mag) - 10f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn exp_known_values() {
        // exp(0) == 1.
        assert_eq!(exp_q120(false, 0), (Q120_ONE, 0));
        // exp(ln 2) == 2 to kernel precision.
        let (m, n) = exp_q120(false, LN2_Q120);
        let v = m as f64 / Q120_ONE as f64 * 2f64.powi(n as i32);
        assert!((v - 2.0).abs() < 1e-25);
        // exp(-1) spot check.
        let one_q = q120_from_dec(10u128.pow(18), Scale::D18);
        let (m, n) = exp_q120(true, one_q);
        let v = m as f64 / Q120_ONE as f64 * 2f64.powi(n as i32);
        assert!((v - (-1f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn exp_ln_round_trip_kernel() {
        // exp(ln(x)) == x to ~1e-30 relative across magnitudes.
        for raw in [1u128, 7, 10u128.pow(12), 3 * 10u128.pow(24), 10u128.pow(30), 123456789 * 10u128.pow(24)] {
            let (neg, mag) = ln_q120(raw, Scale::D24);
            let (m, n) = exp_q120(neg, mag);
            let back = dec_from_mant(m, n, Scale::D24).unwrap();
            let err = back.abs_diff(raw);
            // Allow a few raw units at 1e-24 scale plus 1e-27 relative.
            assert!(
                err <= 2 + raw / 10u128.pow(27),
                "round trip {raw} -> {back} (err {err})"
            );
        }
    }
}
