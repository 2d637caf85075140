//! Greedy single-objective baselines.
//!
//! Both respect the per-period rate/stability/delay constraints but ignore
//! the trip energy budget entirely: the delay-greedy baseline always takes
//! the lowest-delay feasible station, the energy-greedy baseline the one
//! with the cheapest upload (equivalently the best channel, since energy is
//! monotone in the uplink rate for fixed workload).

use crate::policy::drift::{run_with_rule, FullInfoParams};
use crate::policy::{ArmEval, FrameSchedule, PolicyError, PolicyRun};
use crate::scenario::ScenarioTrace;

pub const DELAY_OPTIMAL_NAME: &str = "delay_optimal";
pub const ENERGY_OPTIMAL_NAME: &str = "energy_optimal";

/// Feasible arm with the lowest delay cost, ties to the lowest station index.
pub fn decide_min_delay(arms: &[ArmEval]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, arm) in arms.iter().enumerate() {
        if !arm.feasible {
            continue;
        }
        let d = arm.delay.expect("feasible arm has a stable server");
        if best.map_or(true, |(_, b)| d < b) {
            best = Some((i, d));
        }
    }
    best.map(|(i, _)| i)
}

/// Feasible arm with the lowest transmission energy, ties to the lowest
/// station index.
pub fn decide_min_energy(arms: &[ArmEval]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, arm) in arms.iter().enumerate() {
        if !arm.feasible {
            continue;
        }
        if best.map_or(true, |(_, b)| arm.energy < b) {
            best = Some((i, arm.energy));
        }
    }
    best.map(|(i, _)| i)
}

pub fn run_delay_optimal(
    trace: &ScenarioTrace,
    sched: &FrameSchedule,
    params: &FullInfoParams,
) -> Result<PolicyRun, PolicyError> {
    run_with_rule(trace, sched, params, DELAY_OPTIMAL_NAME, |arms, _, _| {
        decide_min_delay(arms)
    })
}

pub fn run_energy_optimal(
    trace: &ScenarioTrace,
    sched: &FrameSchedule,
    params: &FullInfoParams,
) -> Result<PolicyRun, PolicyError> {
    run_with_rule(trace, sched, params, ENERGY_OPTIMAL_NAME, |arms, _, _| {
        decide_min_energy(arms)
    })
}
