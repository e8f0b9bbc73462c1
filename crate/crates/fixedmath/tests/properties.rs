//! Differential properties against arbitrary-precision integer arithmetic.

use fixedmath::hi::HiFixed;
use fixedmath::{FixedDecimal, Rounding, SCALE};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

/// Floor division for BigInt (num-bigint's `/` truncates toward zero).
fn floor_div(n: &BigInt, d: &BigInt) -> BigInt {
    let q = n / d;
    let r = n % d;
    if !r.is_zero() && (r.is_negative() != d.is_negative()) {
        q - 1
    } else {
        q
    }
}

fn ceil_div(n: &BigInt, d: &BigInt) -> BigInt {
    -floor_div(&-n, d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn mul_brackets_exact_product(a in any::<i64>(), b in any::<i64>(), fa in 0u64..10u64.pow(18), fb in 0u64..10u64.pow(18)) {
        let x = FixedDecimal::from_raw(a as i128 * 10 + fa as i128);
        let y = FixedDecimal::from_raw(b as i128 * 10 + fb as i128);
        let exact_num = BigInt::from(x.raw()) * BigInt::from(y.raw());
        let scale = BigInt::from(SCALE);
        let down = BigInt::from(x.mul(y, Rounding::Down).raw());
        let up = BigInt::from(x.mul(y, Rounding::Up).raw());
        prop_assert_eq!(&down, &floor_div(&exact_num, &scale));
        prop_assert_eq!(&up, &ceil_div(&exact_num, &scale));
        prop_assert!(&up - &down <= BigInt::from(1));
    }

    #[test]
    fn div_brackets_exact_quotient(a in any::<i128>(), b in any::<i128>()) {
        prop_assume!(b != 0);
        // Keep a * SCALE inside 2^255 by construction (i128 * 10^18 < 2^187).
        let x = FixedDecimal::from_raw(a);
        let y = FixedDecimal::from_raw(b);
        let exact_num = BigInt::from(a) * BigInt::from(SCALE);
        let d = BigInt::from(b);
        let down = floor_div(&exact_num, &d);
        let up = ceil_div(&exact_num, &d);
        if down.abs() <= BigInt::from(i128::MAX) && up.abs() <= BigInt::from(i128::MAX) {
            prop_assert_eq!(BigInt::from(x.div(y, Rounding::Down).raw()), down);
            prop_assert_eq!(BigInt::from(x.div(y, Rounding::Up).raw()), up);
        }
    }

    #[test]
    fn format_parse_round_trip(raw in any::<i128>()) {
        let x = FixedDecimal::from_raw(raw);
        let back: FixedDecimal = x.to_string().parse().unwrap();
        prop_assert_eq!(back, x);
    }

    #[test]
    fn hi_mul_is_floor(a in 0u128..u128::MAX / 1_000_000, b in 0u128..10u128.pow(30)) {
        let exact = BigInt::from(a) * BigInt::from(b) / BigInt::from(10u128.pow(24));
        match HiFixed::from_raw(a).mul(HiFixed::from_raw(b)) {
            Ok(p) => prop_assert_eq!(BigInt::from(p.raw()), exact),
            Err(_) => prop_assert!(exact > BigInt::from(u128::MAX)),
        }
    }

    #[test]
    fn hi_narrowing_stays_within_one_step(raw in 0u128..10u128.pow(30)) {
        // Whatever snapping does, the narrowed value differs from the true
        // 10^-24 value by less than one 10^-18 step in the worst case.
        let h = HiFixed::from_raw(raw);
        let down = h.to_fixed(Rounding::Down).raw() as u128;
        let up = h.to_fixed(Rounding::Up).raw() as u128;
        prop_assert!(up >= down);
        prop_assert!(up - down <= 1);
        let lo = down.saturating_mul(1_000_000).saturating_sub(1_000_000);
        let hi_bound = up * 1_000_000 + 1_000_000;
        prop_assert!(raw >= lo && raw <= hi_bound);
    }

    #[test]
    fn pow_within_spec_tolerance(base_raw in 10u64.pow(15)..10u64.pow(19), exp_raw in 1u64..3 * 10u64.pow(18)) {
        // Differential against f64 at a loose bound; the frozen references
        // in the unit tests pin the tight behavior.
        let base = FixedDecimal::from_raw(base_raw as i128);
        let exponent = FixedDecimal::from_raw(exp_raw as i128);
        let got = base.pow(exponent).unwrap();
        let approx = (base_raw as f64 / 1e18).powf(exp_raw as f64 / 1e18);
        let got_f = got.raw() as f64 / 1e18;
        prop_assert!((got_f - approx).abs() <= approx.max(1e-18) * 1e-9 + 1e-12,
            "pow({}, {}) = {} vs f64 {}", base, exponent, got, approx);
    }
}
