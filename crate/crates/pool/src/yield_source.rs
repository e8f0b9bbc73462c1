//! Simulated variable-rate yield sources.
//!
//! The pool itself never computes interest; it only reads the share price `c`
//! that the yield source reports. This module supplies deterministic share
//! price paths: a fixed rate, a piecewise schedule, or a seeded random walk.
//! Interest compounds per accrual step using simple interest within the step,
//! so the engine's checkpoint-granular sampling fully determines the path.

use fixedmath::{FixedDecimal, Rounding};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::PoolError;
use crate::state::SECONDS_PER_YEAR;

/// Highest annual rate accepted from fixed and piecewise models (50%/year).
///
/// Over the maximum simulation horizon this keeps the share price below
/// `e^5 ~ 148`, which in turn keeps every reserve product comfortably inside
/// the fixed-point range.
pub const MAX_APR: FixedDecimal = FixedDecimal::from_raw(500_000_000_000_000_000);

/// Ceiling of the stochastic random walk (20%/year).
pub const STOCHASTIC_APR_CAP: FixedDecimal = FixedDecimal::from_raw(200_000_000_000_000_000);

/// One segment of a piecewise rate schedule: `apr` applies from `start_time`
/// until the next segment begins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatePoint {
    pub start_time: u64,
    pub apr: FixedDecimal,
}

/// How the annualized variable rate evolves over time.
///
/// All models are deterministic: `Stochastic` draws its shocks from a
/// counter-based generator seeded by `seed`, so the same seed always replays
/// the same share price path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateModel {
    /// A single constant rate.
    Fixed { apr: FixedDecimal },
    /// A step function of absolute scenario time. The schedule must start at
    /// time zero so the rate is defined everywhere.
    Piecewise { schedule: Vec<RatePoint> },
    /// A mean-reverting random walk. The rate starts at `drift`, reverts
    /// toward it at a rate of once per year, and takes a uniform shock of at
    /// most `volatility` per year at every `step`-second grid point. The walk
    /// is clamped to `[0, STOCHASTIC_APR_CAP]`.
    Stochastic {
        seed: u64,
        drift: FixedDecimal,
        volatility: FixedDecimal,
        step: u64,
    },
}

impl RateModel {
    /// Rejects rate models that could produce negative rates or unbounded
    /// share prices.
    pub fn validate(&self) -> Result<(), PoolError> {
        let check_apr = |apr: FixedDecimal| -> Result<(), PoolError> {
            if apr.is_negative() {
                return Err(PoolError::InvalidConfig(
                    "interest rates must be non-negative".into(),
                ));
            }
            if apr > MAX_APR {
                return Err(PoolError::InvalidConfig(format!(
                    "apr {apr} exceeds the maximum of {MAX_APR}"
                )));
            }
            Ok(())
        };
        match self {
            RateModel::Fixed { apr } => check_apr(*apr),
            RateModel::Piecewise { schedule } => {
                if schedule.is_empty() {
                    return Err(PoolError::InvalidConfig(
                        "piecewise rate schedule must not be empty".into(),
                    ));
                }
                if schedule[0].start_time != 0 {
                    return Err(PoolError::InvalidConfig(
                        "piecewise rate schedule must start at time 0".into(),
                    ));
                }
                for pair in schedule.windows(2) {
                    if pair[1].start_time <= pair[0].start_time {
                        return Err(PoolError::InvalidConfig(
                            "piecewise rate schedule times must be strictly increasing".into(),
                        ));
                    }
                }
                schedule.iter().try_for_each(|p| check_apr(p.apr))
            }
            RateModel::Stochastic {
                drift,
                volatility,
                step,
                ..
            } => {
                if *step == 0 {
                    return Err(PoolError::InvalidConfig(
                        "stochastic rate step must be positive".into(),
                    ));
                }
                if drift.is_negative() || *drift > STOCHASTIC_APR_CAP {
                    return Err(PoolError::InvalidConfig(format!(
                        "stochastic drift must lie in [0, {STOCHASTIC_APR_CAP}]"
                    )));
                }
                check_apr(*volatility)
            }
        }
    }
}

/// Accrues simple interest on a share price over one step:
/// `c * (1 + apr * dt / seconds_per_year)`, rounded down.
///
/// Consecutive calls compound, so the overall path depends on how time is
/// segmented; [`YieldSource::advance`] fixes the segmentation at checkpoint
/// and rate-change boundaries, which makes the path deterministic.
pub fn accrue(c: FixedDecimal, apr: FixedDecimal, dt: u64) -> Result<FixedDecimal, PoolError> {
    if apr.is_negative() {
        return Err(PoolError::InvalidConfig(
            "interest rates must be non-negative".into(),
        ));
    }
    if c <= FixedDecimal::ZERO {
        return Err(PoolError::InvalidConfig(
            "share price must be positive".into(),
        ));
    }
    let fraction = apr.mul_int(dt).div_int(SECONDS_PER_YEAR, Rounding::Down);
    Ok(c.mul_down(FixedDecimal::ONE + fraction))
}

/// A rate model plus the walking state needed to replay it: the rate
/// currently in force and, for stochastic models, the shock generator and the
/// next grid time at which a new shock is drawn.
///
/// The stochastic grid is anchored to the absolute time at which the model
/// was installed, and exactly one shock is drawn per grid point, so the path
/// does not depend on how `advance` calls are chunked.
#[derive(Debug, Clone)]
pub struct YieldSource {
    model: RateModel,
    apr: FixedDecimal,
    rng: ChaCha8Rng,
    next_redraw: Option<u64>,
}

impl YieldSource {
    /// Installs `model` at absolute time `now`.
    pub fn new(model: RateModel, now: u64) -> Result<Self, PoolError> {
        model.validate()?;
        let (apr, rng, next_redraw) = match &model {
            RateModel::Fixed { apr } => (*apr, ChaCha8Rng::seed_from_u64(0), None),
            RateModel::Piecewise { schedule } => (
                rate_at(schedule, now),
                ChaCha8Rng::seed_from_u64(0),
                None,
            ),
            RateModel::Stochastic { seed, drift, step, .. } => (
                (*drift).clamp(FixedDecimal::ZERO, STOCHASTIC_APR_CAP),
                ChaCha8Rng::seed_from_u64(*seed),
                Some(now + step),
            ),
        };
        Ok(Self {
            model,
            apr,
            rng,
            next_redraw,
        })
    }

    /// The annualized rate currently in force.
    pub fn current_apr(&self) -> FixedDecimal {
        self.apr
    }

    /// Replaces the rate model, re-anchoring the stochastic grid at `now`.
    pub fn set_model(&mut self, model: RateModel, now: u64) -> Result<(), PoolError> {
        *self = Self::new(model, now)?;
        Ok(())
    }

    /// Accrues the share price `c` from `from` to `to` and returns it sampled
    /// at every checkpoint boundary crossed (multiples of `d_c`), plus the
    /// final time when it is not itself a boundary. Advancing zero time
    /// returns no samples.
    pub fn advance(
        &mut self,
        from: u64,
        to: u64,
        d_c: u64,
        c: FixedDecimal,
    ) -> Result<Vec<(u64, FixedDecimal)>, PoolError> {
        if to < from {
            return Err(PoolError::InvalidConfig(
                "cannot advance time backwards".into(),
            ));
        }
        let mut samples = Vec::new();
        let mut t = from;
        let mut c = c;
        while t < to {
            let boundary = (t / d_c + 1) * d_c;
            let mut next = boundary.min(to);
            if let Some(redraw) = self.next_redraw {
                next = next.min(redraw);
            }
            c = accrue(c, self.apr, next - t)?;
            if self.next_redraw == Some(next) {
                self.redraw();
            }
            if let RateModel::Piecewise { schedule } = &self.model {
                self.apr = rate_at(schedule, next);
            }
            if next % d_c == 0 || next == to {
                samples.push((next, c));
            }
            t = next;
        }
        Ok(samples)
    }

    /// Draws the next uniform shock and steps the random walk.
    fn redraw(&mut self) {
        let RateModel::Stochastic {
            drift,
            volatility,
            step,
            ..
        } = &self.model
        else {
            return;
        };
        let dt_years = FixedDecimal::ratio(*step, SECONDS_PER_YEAR);
        // Uniform in [-1, 1] at full fixed-point resolution.
        let shock = FixedDecimal::from_raw(
            self.rng
                .gen_range(-1_000_000_000_000_000_000i64..=1_000_000_000_000_000_000) as i128,
        );
        let reversion = (*drift - self.apr).mul_down(dt_years);
        let diffusion = volatility.mul_down(shock).mul_down(dt_years);
        self.apr = (self.apr + reversion + diffusion)
            .clamp(FixedDecimal::ZERO, STOCHASTIC_APR_CAP);
        self.next_redraw = Some(self.next_redraw.expect("stochastic grid is set") + step);
    }
}

/// The scheduled rate in force at time `t` (the last segment that started at
/// or before `t`).
fn rate_at(schedule: &[RatePoint], t: u64) -> FixedDecimal {
    schedule
        .iter()
        .take_while(|p| p.start_time <= t)
        .last()
        .map(|p| p.apr)
        .unwrap_or(FixedDecimal::ZERO)
}
