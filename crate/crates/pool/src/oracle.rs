//! Differential oracles: independent re-derivations of the pool's numerical
//! shortcuts, run event by event over a scenario.
//!
//! Three families of checks:
//!
//! * **Curve**: every trade's closed-form curve solve is re-derived by
//!   bisection on invariant preservation — find the share delta that keeps
//!   `k` fixed given the trade's bond delta — and compared against what the
//!   trade actually moved. Initialization is checked by comparing the
//!   realized spot price against the target.
//! * **Present value**: the LP present-value formula is compared against a
//!   literal simulation that closes every open position on a throwaway copy
//!   of the pool and measures what is left above the reserve floor.
//! * **Solver**: wherever the idle-distribution would solve its share-price
//!   equation with Newton's method, the same root is found by pure bisection
//!   and the two answers are compared.
//!
//! The oracle requires a fee-free configuration (`phi_n = phi_m = phi_g =
//! 0`) so trades reduce to pure curve moves, and caps the scenario at
//! [`ORACLE_MAX_EVENTS`] events to keep the brute-force checks fast.

use fixedmath::{FixedDecimal, Rounding};
use serde::Serialize;

use crate::checkpoints;
use crate::error::PoolError;
use crate::lp;
use crate::scenario::{validate_scenario, Engine, Scenario, ScenarioEvent};
use crate::solver;
use crate::state::{PoolConfig, PoolState};
use crate::trading::{self, PositionKind, PositionReceipt};

/// Scenario size cap for oracle runs.
pub const ORACLE_MAX_EVENTS: usize = 500;

/// Relative deviation allowed before an oracle run fails (1e-6).
pub const ORACLE_TOLERANCE: FixedDecimal = FixedDecimal::from_raw(1_000_000_000_000);

/// Maximum relative deviations observed per check family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub events: usize,
    pub curve_checks: usize,
    pub max_curve_deviation: FixedDecimal,
    pub pv_checks: usize,
    pub pv_skipped: usize,
    pub max_pv_deviation: FixedDecimal,
    pub solver_checks: usize,
    pub max_solver_deviation: FixedDecimal,
    pub tolerance: FixedDecimal,
    pub passed: bool,
}

/// `|a - b|` relative to the larger magnitude, floored at 1e-6 so
/// near-zero quantities are compared absolutely.
fn relative_deviation(a: FixedDecimal, b: FixedDecimal) -> FixedDecimal {
    let floor = FixedDecimal::from_raw(1_000_000_000_000);
    let den = a.abs().max(b.abs()).max(floor);
    (a - b).abs().div(den, Rounding::Up)
}

/// Replays `scenario` while re-deriving every curve solve, present value,
/// and Newton solve independently. Deterministic for a given seed.
pub fn oracle_check(
    config: PoolConfig,
    scenario: &Scenario,
    seed_xor: u64,
) -> Result<OracleReport, PoolError> {
    validate_scenario(&config, scenario)?;
    if scenario.events.len() > ORACLE_MAX_EVENTS {
        return Err(PoolError::InvalidConfig(format!(
            "scenario has {} events; the oracle is limited to {ORACLE_MAX_EVENTS}",
            scenario.events.len()
        )));
    }
    if !config.phi_n.is_zero() || !config.phi_m.is_zero() || !config.phi_g.is_zero() {
        return Err(PoolError::InvalidConfig(
            "the oracle requires a fee-free configuration (phi_n = phi_m = phi_g = 0)".into(),
        ));
    }

    let mut engine = Engine::new(config, seed_xor)?;
    let mut report = OracleReport {
        events: scenario.events.len(),
        curve_checks: 0,
        max_curve_deviation: FixedDecimal::ZERO,
        pv_checks: 0,
        pv_skipped: 0,
        max_pv_deviation: FixedDecimal::ZERO,
        solver_checks: 0,
        max_solver_deviation: FixedDecimal::ZERO,
        tolerance: ORACLE_TOLERANCE,
        passed: false,
    };

    for (i, event) in scenario.events.iter().enumerate() {
        // Solver oracle: sample the idle distribution's root-finding problem
        // as it will be posed during this event.
        if let Some(posed) = pose_distribution(engine.state(), event) {
            if let Some(cmp) = compare_solvers(&posed)? {
                report.solver_checks += 1;
                let dev = relative_deviation(cmp.newton, cmp.bisection);
                report.max_solver_deviation = report.max_solver_deviation.max(dev);
            }
        }

        let pre = engine.state().clone();
        let record = engine.apply(i, event);
        if record.outcome.error.is_some() {
            continue;
        }

        // Curve oracle.
        if let Some(dev) = curve_check(&pre, event, &engine)? {
            report.curve_checks += 1;
            report.max_curve_deviation = report.max_curve_deviation.max(dev);
        }

        // Present-value oracle on the post-event state.
        let state = engine.state();
        if state.initialized && lp::live_lp_supply(state) > FixedDecimal::ZERO {
            match brute_force_present_value(&engine) {
                Ok(brute) => {
                    let formula = lp::present_value(state, FixedDecimal::ZERO)?.pv;
                    report.pv_checks += 1;
                    let dev = relative_deviation(formula, brute);
                    report.max_pv_deviation = report.max_pv_deviation.max(dev);
                }
                Err(_) => report.pv_skipped += 1,
            }
        }
    }

    report.passed = report.max_curve_deviation <= ORACLE_TOLERANCE
        && report.max_pv_deviation <= ORACLE_TOLERANCE
        && report.max_solver_deviation <= ORACLE_TOLERANCE;
    Ok(report)
}

/// Closes every open, unmatured position on a throwaway copy of the pool
/// and returns the share reserves left above the floor. Path independence
/// makes the closing order irrelevant up to rounding dust.
pub fn brute_force_present_value(engine: &Engine) -> Result<FixedDecimal, PoolError> {
    let mut s = engine.state().clone();
    // The copy must not leak value into the withdrawal pool mid-close.
    s.withdrawal_shares_pending = FixedDecimal::ZERO;
    for entry in engine.open_positions() {
        let maturity = s.config.maturity_time(entry.receipt.checkpoint_time);
        if maturity <= s.now {
            // Already settled into the zombie ledger; not live value.
            continue;
        }
        match entry.receipt.kind {
            PositionKind::Long => {
                trading::close_long(&mut s, &entry.receipt)?;
            }
            PositionKind::Short => {
                trading::close_short(&mut s, &entry.receipt)?;
            }
        }
    }
    Ok(s.share_reserves - s.config.z_min)
}

/// Verifies one event's curve arithmetic by bisection, returning the
/// relative deviation, or `None` when the event performs no curve solve.
fn curve_check(
    pre: &PoolState,
    event: &ScenarioEvent,
    engine: &Engine,
) -> Result<Option<FixedDecimal>, PoolError> {
    match event {
        ScenarioEvent::Init { target_price, .. } => {
            let s = engine.state();
            let spot = s
                .curve()
                .spot_price(s.effective_share_reserves(), s.bond_reserves)?;
            Ok(Some(relative_deviation(spot, *target_price)))
        }
        ScenarioEvent::OpenLong { base, .. } => {
            let mut base_state = pre.clone();
            checkpoints::mint_checkpoint(&mut base_state);
            let (z_e0, _, k0) = curve_point(&base_state)?;
            let mut replica = base_state.clone();
            if trading::open_long(&mut replica, *base).is_err() {
                return Ok(None);
            }
            let dz_in = base.div(base_state.share_price, Rounding::Down);
            // Find the share input that preserves k given the bonds the
            // trade actually released.
            let curve = base_state.curve();
            let y1 = replica.bond_reserves;
            let root = bisect_increasing(
                |x| Ok(curve.invariant(z_e0 + x, y1)? - k0),
                dz_in,
            )?;
            Ok(Some(relative_deviation(root, dz_in)))
        }
        ScenarioEvent::OpenShort { bonds, .. } => {
            let mut base_state = pre.clone();
            checkpoints::mint_checkpoint(&mut base_state);
            let (z_e0, y0, k0) = curve_point(&base_state)?;
            let mut replica = base_state.clone();
            if trading::open_short(&mut replica, *bonds).is_err() {
                return Ok(None);
            }
            let shares_out = base_state.share_reserves - replica.share_reserves;
            let curve = base_state.curve();
            let root = bisect_decreasing(
                |x| Ok(curve.invariant(z_e0 - x, y0 + *bonds)? - k0),
                z_e0,
                shares_out,
            )?;
            Ok(Some(relative_deviation(root, shares_out)))
        }
        ScenarioEvent::CloseLong { receipt, .. } => {
            let Some(entry) = engine.position(*receipt) else {
                return Ok(None);
            };
            close_long_check(pre, &entry.receipt)
        }
        ScenarioEvent::CloseShort { receipt, .. } => {
            let Some(entry) = engine.position(*receipt) else {
                return Ok(None);
            };
            close_short_check(pre, &entry.receipt)
        }
        _ => Ok(None),
    }
}

fn close_long_check(
    pre: &PoolState,
    receipt: &PositionReceipt,
) -> Result<Option<FixedDecimal>, PoolError> {
    let mut base_state = pre.clone();
    checkpoints::mint_checkpoint(&mut base_state);
    let t_r = trading::time_remaining(&base_state, receipt.checkpoint_time);
    if t_r.is_zero() {
        // Maturity redemptions are ledger moves, not curve solves.
        return Ok(None);
    }
    let (z_e0, y0, k0) = curve_point(&base_state)?;
    let mut replica = base_state.clone();
    if trading::close_long(&mut replica, receipt).is_err() {
        return Ok(None);
    }
    let dy_curve = receipt.face.mul(t_r, Rounding::Down);
    // Mirror the trade's flat leg exactly to isolate its curve leg.
    let flat_shares = (receipt.face - dy_curve).div(base_state.share_price, Rounding::Down);
    let curve_shares = base_state.share_reserves - replica.share_reserves - flat_shares;
    let curve = base_state.curve();
    let root = bisect_decreasing(
        |x| Ok(curve.invariant(z_e0 - x, y0 + dy_curve)? - k0),
        z_e0,
        curve_shares,
    )?;
    Ok(Some(relative_deviation(root, curve_shares)))
}

fn close_short_check(
    pre: &PoolState,
    receipt: &PositionReceipt,
) -> Result<Option<FixedDecimal>, PoolError> {
    let mut base_state = pre.clone();
    checkpoints::mint_checkpoint(&mut base_state);
    let t_r = trading::time_remaining(&base_state, receipt.checkpoint_time);
    if t_r.is_zero() {
        return Ok(None);
    }
    let (z_e0, y0, k0) = curve_point(&base_state)?;
    let mut replica = base_state.clone();
    if trading::close_short(&mut replica, receipt).is_err() {
        return Ok(None);
    }
    let dy_curve = receipt.face.mul(t_r, Rounding::Down);
    let flat_shares = (receipt.face - dy_curve).div(base_state.share_price, Rounding::Up);
    let curve_shares = replica.share_reserves - base_state.share_reserves - flat_shares;
    let curve = base_state.curve();
    let root = bisect_increasing(
        |x| Ok(curve.invariant(z_e0 + x, y0 - dy_curve)? - k0),
        curve_shares,
    )?;
    Ok(Some(relative_deviation(root, curve_shares)))
}

fn curve_point(state: &PoolState) -> Result<(FixedDecimal, FixedDecimal, FixedDecimal), PoolError> {
    let z_e = state.effective_share_reserves();
    let y = state.bond_reserves;
    let k = state.curve().invariant(z_e, y)?;
    Ok((z_e, y, k))
}

fn bisection_tolerance(guess: FixedDecimal) -> FixedDecimal {
    // 1e-10 of the expected answer, floored at one raw unit.
    guess
        .mul_down(FixedDecimal::from_raw(100_000_000))
        .max(FixedDecimal::from_raw(1))
}

/// Root of an increasing function with `f(0) <= 0`, bracketing upward by
/// doubling from the guess.
fn bisect_increasing<F>(f: F, guess: FixedDecimal) -> Result<FixedDecimal, PoolError>
where
    F: Fn(FixedDecimal) -> Result<FixedDecimal, PoolError>,
{
    let mut hi = guess.max(FixedDecimal::from_raw(1));
    for _ in 0..64 {
        if f(hi)? >= FixedDecimal::ZERO {
            break;
        }
        hi = hi.mul_int(2);
    }
    solver::bisect(
        |x| f(x).map(|v| -v),
        FixedDecimal::ZERO,
        hi,
        bisection_tolerance(guess),
    )
}

/// Root of a decreasing function with `f(0) >= 0` on `[0, limit)`.
fn bisect_decreasing<F>(
    f: F,
    limit: FixedDecimal,
    guess: FixedDecimal,
) -> Result<FixedDecimal, PoolError>
where
    F: Fn(FixedDecimal) -> Result<FixedDecimal, PoolError>,
{
    let hi = limit - FixedDecimal::from_raw(1);
    solver::bisect(f, FixedDecimal::ZERO, hi, bisection_tolerance(guess))
}

/// The state on which this event's idle distribution will run: the current
/// state for most events; for `remove_liquidity`, the state with the
/// caller's shares already moved into the pending queue, mirroring the
/// distribution call inside the removal.
fn pose_distribution(state: &PoolState, event: &ScenarioEvent) -> Option<PoolState> {
    if !state.initialized {
        return None;
    }
    match event {
        ScenarioEvent::RemoveLiquidity { lp_shares, .. } => {
            if *lp_shares > state.lp_total_supply {
                return None;
            }
            let mut s = state.clone();
            checkpoints::mint_checkpoint(&mut s);
            s.lp_total_supply = s.lp_total_supply - *lp_shares;
            s.withdrawal_shares_pending = s.withdrawal_shares_pending + *lp_shares;
            Some(s)
        }
        _ if state.withdrawal_shares_pending > FixedDecimal::ZERO => Some(state.clone()),
        _ => None,
    }
}

/// Outcome of solving one idle-distribution sizing problem both ways.
#[derive(Debug, Clone, Copy)]
pub struct SolverComparison {
    /// The production answer: Newton when it converges, otherwise its
    /// bisection fallback.
    pub newton: FixedDecimal,
    /// The oracle answer from pure bisection on the same objective.
    pub bisection: FixedDecimal,
    /// Whether the Newton phase converged on its own.
    pub newton_converged: bool,
    /// Newton iterations used when it converged, 0 otherwise.
    pub newton_iterations: usize,
}

/// Reproduces the idle distribution's sizing steps; when they end in a
/// root-finding problem, solves it with both Newton and pure bisection and
/// returns the two answers.
///
/// Mirrors `lp::distribute_excess_idle` steps (1)-(4); the shared constants
/// keep the problem instance identical. Returns `None` when the posed state
/// resolves without root finding (no pending shares, no idle, the affine
/// case, or an unbound payout).
pub fn compare_solvers(
    state: &PoolState,
) -> Result<Option<SolverComparison>, PoolError> {
    let pending = state.withdrawal_shares_pending;
    if pending.is_zero() {
        return Ok(None);
    }
    let idle = state.idle_liquidity();
    if idle.is_zero() {
        return Ok(None);
    }
    let supply = lp::live_lp_supply(state);
    let pv_0 = lp::present_value(state, FixedDecimal::ZERO)?.pv;
    if pv_0 <= FixedDecimal::ZERO {
        return Ok(None);
    }

    let t_l = state.avg_long_time_remaining();
    let t_s = state.avg_short_time_remaining();
    let long_new = state.longs_outstanding.mul(t_l, Rounding::Down);
    let short_new = state.shorts_outstanding.mul(t_s, Rounding::Down);
    let mut dz_max = idle;
    if short_new > long_new {
        let net_short = short_new - long_new;
        let z = state.share_reserves;
        let (zeta_h, y_h) = crate::state::scaled_reserves(
            z,
            state.share_adjustment,
            state.bond_reserves,
            z - idle,
        );
        let capacity_after = state.curve().max_bonds_buyable(z - idle - zeta_h, y_h)?.bonds;
        if capacity_after < net_short {
            let z_e = state.effective_share_reserves();
            let capacity_now = state.curve().max_bonds_buyable(z_e, state.bond_reserves)?.bonds;
            if capacity_now <= net_short {
                return Ok(None);
            }
            let keep = z.mul(net_short, Rounding::Up).div(capacity_now, Rounding::Up);
            dz_max = (z - keep).max(FixedDecimal::ZERO).min(idle);
            if dz_max.is_zero() {
                return Ok(None);
            }
        }
    }

    let pv_at_max = lp::present_value(state, dz_max)?.pv;
    let dw = (pv_0 - pv_at_max)
        .max(FixedDecimal::ZERO)
        .mul(supply, Rounding::Down)
        .div(pv_0, Rounding::Down);
    if dw.is_zero() || dw <= pending {
        // No payout cap, so no root-finding: dz is dz_max directly.
        return Ok(None);
    }
    let dw = pending;
    if long_new == short_new {
        // Affine case is closed-form; nothing to cross-check.
        return Ok(None);
    }
    let target = pv_0.mul(supply - dw, Rounding::Down).div(supply, Rounding::Down);
    if pv_at_max >= target {
        return Ok(None);
    }

    let tol = pv_0
        .mul(lp::SOLVER_RELATIVE_TOL, Rounding::Up)
        .max(FixedDecimal::from_raw(1));
    let objective = |x: FixedDecimal| Ok(lp::present_value(state, x)?.pv - target);
    let guess = (pv_0 - target).min(dz_max);
    let traced = solver::newton_steps(
        &objective,
        FixedDecimal::ZERO,
        dz_max,
        guess,
        tol,
        lp::SOLVER_MAX_ITER,
    )?;
    let bisection = solver::bisect(&objective, FixedDecimal::ZERO, dz_max, tol)?;
    let (newton, newton_converged, newton_iterations) = match traced {
        Some((x, iterations)) => (x, true, iterations),
        // The production path would land on this same bisection answer.
        None => (bisection, false, 0),
    };
    Ok(Some(SolverComparison {
        newton,
        bisection,
        newton_converged,
        newton_iterations,
    }))
}
