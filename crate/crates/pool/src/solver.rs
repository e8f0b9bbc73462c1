//! Scalar root finding: Newton's method with a bisection safety net.
//!
//! Both solvers work on monotone decreasing objectives bracketed by
//! `f(lo) >= 0 >= f(hi)` and stop when the residual is inside `tol` or the
//! bracket has collapsed to one fixed-point unit.

use fixedmath::{FixedDecimal, Rounding};

use crate::error::PoolError;

/// Newton iteration with derivatives from a central finite difference
/// (step `max(1e-9 * x, 1e-12)`), clamped to `[lo, hi]`, at most
/// `max_iter` steps; falls back to [`bisect`] whenever the iteration
/// stalls, leaves the bracket, or meets a bad derivative.
pub fn newton_with_bisection<F>(
    f: F,
    lo: FixedDecimal,
    hi: FixedDecimal,
    x0: FixedDecimal,
    tol: FixedDecimal,
    max_iter: usize,
) -> Result<FixedDecimal, PoolError>
where
    F: Fn(FixedDecimal) -> Result<FixedDecimal, PoolError>,
{
    if let Some((x, _)) = newton_steps(&f, lo, hi, x0, tol, max_iter)? {
        return Ok(x);
    }
    bisect(f, lo, hi, tol)
}

/// The pure Newton phase of [`newton_with_bisection`]: `Some((root,
/// iterations))` when the residual test succeeds within `max_iter` steps,
/// `None` when the iteration stalls, leaves the bracket, or exhausts its
/// budget and the caller should bisect instead. Exposed separately so
/// convergence statistics can be collected without changing the solve.
pub fn newton_steps<F>(
    f: &F,
    lo: FixedDecimal,
    hi: FixedDecimal,
    x0: FixedDecimal,
    tol: FixedDecimal,
    max_iter: usize,
) -> Result<Option<(FixedDecimal, usize)>, PoolError>
where
    F: Fn(FixedDecimal) -> Result<FixedDecimal, PoolError>,
{
    debug_assert!(lo <= hi);
    let mut x = x0.max(lo).min(hi);
    for iter in 0..max_iter {
        let fx = f(x)?;
        if fx.abs() <= tol {
            return Ok(Some((x, iter)));
        }
        // max(1e-9 * x, 1e-12)
        let step = x
            .abs()
            .mul(FixedDecimal::from_raw(1_000_000_000), Rounding::Up)
            .max(FixedDecimal::from_raw(1_000_000));
        let a = (x - step).max(lo);
        let b = (x + step).min(hi);
        if a == b {
            break;
        }
        let slope_num = f(b)? - f(a)?;
        if !slope_num.is_negative() || slope_num.is_zero() {
            // Not locally decreasing: finite-difference noise. Bisect.
            break;
        }
        let width = b - a;
        // x_next = x - fx / f'(x), with f'(x) ~ slope_num / width.
        let delta = fx.mul(width, Rounding::Down).div(slope_num, Rounding::Down);
        let next = (x - delta).max(lo).min(hi);
        if next == x {
            break;
        }
        x = next;
    }
    Ok(None)
}

/// Plain bisection on a monotone decreasing objective with
/// `f(lo) >= 0 >= f(hi)`. Always converges; used directly as the oracle
/// the Newton path is checked against.
pub fn bisect<F>(
    f: F,
    mut lo: FixedDecimal,
    mut hi: FixedDecimal,
    tol: FixedDecimal,
) -> Result<FixedDecimal, PoolError>
where
    F: Fn(FixedDecimal) -> Result<FixedDecimal, PoolError>,
{
    if f(lo)?.is_negative() {
        return Ok(lo);
    }
    if !f(hi)?.is_negative() {
        return Ok(hi);
    }
    for _ in 0..128 {
        if hi - lo <= FixedDecimal::from_raw(1) {
            break;
        }
        let mid = lo + (hi - lo).div_int(2, Rounding::Down);
        let fm = f(mid)?;
        if fm.abs() <= tol {
            return Ok(mid);
        }
        if fm.is_negative() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(lo)
}
