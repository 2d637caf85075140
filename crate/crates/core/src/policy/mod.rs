//! Online association policies.
//!
//! All policies share the same per-period skeleton: evaluate the candidate
//! arms, pick one, then charge the realized energy to a virtual
//! energy-deficit queue
//!
//! ```text
//! q(t+1) = max(0, q(t) + e(t) − αB/T)
//! ```
//!
//! which tracks cumulative overspend against the per-period share of the
//! trip budget. The drift-plus-penalty policies reset the queue at the start
//! of every frame and weigh delay against queue-scaled energy; the greedy
//! baselines ignore the queue but the run loop still maintains it so every
//! report carries a comparable queue trajectory.

pub mod bandit;
pub mod drift;
pub mod greedy;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{delay_cost, is_feasible, tx_energy, uplink_rate, SystemConstants};
use crate::scenario::PeriodState;

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("period {period}: {slots} slots cannot cover {arms} candidate stations")]
    SlotCountTooSmall {
        period: usize,
        arms: usize,
        slots: usize,
    },
    #[error("schedule mismatch: {frames} frames x {periods_per_frame} periods != horizon {horizon}")]
    ScheduleMismatch {
        frames: usize,
        periods_per_frame: usize,
        horizon: usize,
    },
    #[error("invalid control weight V={0}; must be finite and > 0")]
    InvalidControlWeight(f64),
}

/// Virtual energy-deficit queue, Lyapunov bookkeeping for the budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeficitQueue {
    value: f64,
    per_period_budget: f64,
}

impl DeficitQueue {
    pub fn new(per_period_budget: f64) -> Self {
        Self {
            value: 0.0,
            per_period_budget,
        }
    }

    /// `q' = max(0, q + energy − αB/T)`. Never goes negative.
    pub fn charge(&mut self, energy_used: f64) {
        debug_assert!(energy_used >= 0.0);
        self.value = (self.value + energy_used - self.per_period_budget).max(0.0);
    }

    pub fn reset(&mut self) {
        self.value = 0.0;
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn per_period_budget(&self) -> f64 {
        self.per_period_budget
    }
}

/// Pure form of the queue recursion, convenient for tests and bounds.
pub fn queue_update(q: f64, energy_used: f64, per_period_budget: f64) -> f64 {
    (q + energy_used - per_period_budget).max(0.0)
}

/// Control-weight schedule over frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VSchedule {
    Constant(f64),
    PerFrame(Vec<f64>),
}

/// Frame structure: `R` frames of `J` periods with per-frame control weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSchedule {
    pub frames: usize,
    pub periods_per_frame: usize,
    pub v: VSchedule,
}

impl FrameSchedule {
    pub fn horizon(&self) -> usize {
        self.frames * self.periods_per_frame
    }

    pub fn v_for_frame(&self, frame: usize) -> f64 {
        match &self.v {
            VSchedule::Constant(v) => *v,
            VSchedule::PerFrame(vs) => vs[frame],
        }
    }

    /// All control weights as a per-frame vector (used by the bound evaluators).
    pub fn v_values(&self) -> Vec<f64> {
        (0..self.frames).map(|r| self.v_for_frame(r)).collect()
    }

    pub fn validate(&self, horizon: usize) -> Result<(), PolicyError> {
        if self.horizon() != horizon {
            return Err(PolicyError::ScheduleMismatch {
                frames: self.frames,
                periods_per_frame: self.periods_per_frame,
                horizon,
            });
        }
        if let VSchedule::PerFrame(vs) = &self.v {
            if vs.len() != self.frames {
                return Err(PolicyError::ScheduleMismatch {
                    frames: self.frames,
                    periods_per_frame: self.periods_per_frame,
                    horizon,
                });
            }
        }
        for r in 0..self.frames {
            let v = self.v_for_frame(r);
            if !v.is_finite() || v <= 0.0 {
                return Err(PolicyError::InvalidControlWeight(v));
            }
        }
        Ok(())
    }
}

/// Everything a policy needs to know about one candidate arm in one period.
#[derive(Debug, Clone, Copy)]
pub struct ArmEval {
    /// Station index in the topology.
    pub bs: usize,
    /// Delay cost; `None` when the server is overloaded.
    pub delay: Option<f64>,
    /// Transmission energy in joules.
    pub energy: f64,
    /// Uplink rate in bit/s.
    pub rate: f64,
    /// Satisfies the rate floor, stability and the delay ceiling.
    pub feasible: bool,
}

/// Evaluate every candidate of a period against the closed-form models.
pub fn evaluate_arms(period: &PeriodState<'_>, consts: &SystemConstants) -> Vec<ArmEval> {
    period
        .arms()
        .map(|arm| {
            let rate = uplink_rate(arm.channel);
            let delay = delay_cost(period.lambda, arm.server).ok();
            let energy = tx_energy(period.lambda, arm.channel, consts.workload_bits);
            let feasible = is_feasible(period.lambda, arm.server, arm.channel, consts);
            ArmEval {
                bs: arm.bs,
                delay,
                energy,
                rate,
                feasible,
            }
        })
        .collect()
}

/// Outcome of one decision: which arm, at what realized cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    /// Index into the period's arm list.
    pub arm_index: usize,
    pub bs: usize,
    pub delay: f64,
    pub energy: f64,
    /// Set when no candidate was feasible and the fallback rule fired.
    pub fallback: bool,
}

/// Last-resort rule when no candidate satisfies the constraints: the least
/// bad stable arm by delay, else the arm with the smallest rate shortfall.
/// The realized delay of an overloaded arm is reported as `unstable_penalty`.
pub fn fallback_decision(
    arms: &[ArmEval],
    min_rate: f64,
    unstable_penalty: f64,
) -> Decision {
    debug_assert!(!arms.is_empty());
    let mut best: Option<(usize, f64)> = None;
    for (i, arm) in arms.iter().enumerate() {
        if let Some(d) = arm.delay {
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
    }
    let (idx, delay) = match best {
        Some((i, d)) => (i, d),
        None => {
            // nothing stable: minimize how far the rate falls short
            let mut pick = 0usize;
            let mut shortfall = f64::INFINITY;
            for (i, arm) in arms.iter().enumerate() {
                let s = (min_rate - arm.rate).max(0.0);
                if s < shortfall {
                    shortfall = s;
                    pick = i;
                }
            }
            (pick, unstable_penalty)
        }
    };
    Decision {
        arm_index: idx,
        bs: arms[idx].bs,
        delay,
        energy: arms[idx].energy,
        fallback: true,
    }
}

/// Per-period record emitted by every policy runner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodOutcome {
    pub t: usize,
    pub chosen_bs: usize,
    pub delay_cost: f64,
    pub energy: f64,
    /// Deficit queue used for this period's decision (after any frame reset).
    pub queue_before: f64,
    /// Deficit queue after charging this period's energy.
    pub queue_after: f64,
    /// Control weight in force this period.
    pub v: f64,
    pub feasible_arms: usize,
    pub fallback: bool,
    /// Station changes between consecutive slots (learning policies only).
    pub switches_within_period: usize,
}

/// Full per-policy result of one run over a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyRun {
    pub policy: String,
    pub outcomes: Vec<PeriodOutcome>,
    /// Per-period per-slot realized objective `V·d̃ + q·ẽ` (learning policies).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slot_objectives: Option<Vec<Vec<f64>>>,
    /// Per-period per-slot selected arm index (learning policies).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slot_arms: Option<Vec<Vec<usize>>>,
}

impl PolicyRun {
    pub fn mean_delay(&self) -> f64 {
        if self.outcomes.is_empty() {
            return 0.0;
        }
        self.outcomes.iter().map(|o| o.delay_cost).sum::<f64>() / self.outcomes.len() as f64
    }

    pub fn total_energy(&self) -> f64 {
        self.outcomes.iter().map(|o| o.energy).sum()
    }

    /// Period-boundary station changes.
    pub fn handovers(&self) -> usize {
        self.outcomes
            .windows(2)
            .filter(|w| w[0].chosen_bs != w[1].chosen_bs)
            .count()
    }

    pub fn fallback_count(&self) -> usize {
        self.outcomes.iter().filter(|o| o.fallback).count()
    }

    pub fn queue_series(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.queue_after).collect()
    }
}
