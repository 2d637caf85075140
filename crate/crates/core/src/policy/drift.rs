//! Drift-plus-penalty policy with full state information.
//!
//! Each period the controller picks the feasible candidate minimizing
//!
//! ```text
//! V · d(n) + q(t) · e(n)
//! ```
//!
//! where `q(t)` is the energy-deficit queue. A growing queue shifts the
//! argmin toward energy-cheap stations; the queue resets at every frame
//! boundary so long frames bound how much pressure can build up.

use crate::policy::{
    evaluate_arms, fallback_decision, ArmEval, Decision, DeficitQueue, FrameSchedule,
    PeriodOutcome, PolicyError, PolicyRun,
};
use crate::scenario::ScenarioTrace;

pub const POLICY_NAME: &str = "fsi";

/// Parameters shared by the full-information runners.
#[derive(Debug, Clone, Copy)]
pub struct FullInfoParams {
    /// Delay charged when the fallback rule lands on an overloaded server.
    pub unstable_delay_penalty: f64,
}

impl Default for FullInfoParams {
    fn default() -> Self {
        Self {
            unstable_delay_penalty: 10.0,
        }
    }
}

/// Index of the feasible arm minimizing `V·d + q·e`, ties to the first
/// (lowest station index); `None` when nothing is feasible.
pub fn decide(arms: &[ArmEval], q: f64, v: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, arm) in arms.iter().enumerate() {
        if !arm.feasible {
            continue;
        }
        let d = arm.delay.expect("feasible arm has a stable server");
        let objective = v * d + q * arm.energy;
        if best.map_or(true, |(_, b)| objective < b) {
            best = Some((i, objective));
        }
    }
    best.map(|(i, _)| i)
}

/// Shared per-period loop for every full-information policy: frame resets,
/// one decision per period, queue charge with the realized energy.
pub(crate) fn run_with_rule<F>(
    trace: &ScenarioTrace,
    sched: &FrameSchedule,
    params: &FullInfoParams,
    name: &str,
    rule: F,
) -> Result<PolicyRun, PolicyError>
where
    F: Fn(&[ArmEval], f64, f64) -> Option<usize>,
{
    let horizon = trace.horizon();
    sched.validate(horizon)?;
    let mut queue = DeficitQueue::new(trace.consts.per_period_budget());
    let mut outcomes = Vec::with_capacity(horizon);
    for t in 0..horizon {
        if t % sched.periods_per_frame == 0 {
            queue.reset();
        }
        let v = sched.v_for_frame(t / sched.periods_per_frame);
        let period = trace.period(t);
        let arms = evaluate_arms(&period, &trace.consts);
        let feasible_arms = arms.iter().filter(|a| a.feasible).count();
        let decision = match rule(&arms, queue.value(), v) {
            Some(i) => Decision {
                arm_index: i,
                bs: arms[i].bs,
                delay: arms[i].delay.expect("chosen arm is stable"),
                energy: arms[i].energy,
                fallback: false,
            },
            None => fallback_decision(&arms, trace.consts.min_rate, params.unstable_delay_penalty),
        };
        let queue_before = queue.value();
        queue.charge(decision.energy);
        outcomes.push(PeriodOutcome {
            t,
            chosen_bs: decision.bs,
            delay_cost: decision.delay,
            energy: decision.energy,
            queue_before,
            queue_after: queue.value(),
            v,
            feasible_arms,
            fallback: decision.fallback,
            switches_within_period: 0,
        });
    }
    Ok(PolicyRun {
        policy: name.to_string(),
        outcomes,
        slot_objectives: None,
        slot_arms: None,
    })
}

/// Run the full-information drift-plus-penalty policy over a trace.
pub fn run(
    trace: &ScenarioTrace,
    sched: &FrameSchedule,
    params: &FullInfoParams,
) -> Result<PolicyRun, PolicyError> {
    run_with_rule(trace, sched, params, POLICY_NAME, decide)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arm(bs: usize, delay: f64, energy: f64) -> ArmEval {
        ArmEval {
            bs,
            delay: Some(delay),
            energy,
            rate: 2e8,
            feasible: true,
        }
    }

    #[test]
    fn zero_queue_reduces_to_min_delay() {
        let arms = vec![arm(0, 0.5, 0.01), arm(1, 0.2, 0.9), arm(2, 0.4, 0.001)];
        assert_eq!(decide(&arms, 0.0, 0.01), Some(1));
    }

    #[test]
    fn vanishing_weight_reduces_to_min_energy() {
        let arms = vec![arm(0, 0.5, 0.01), arm(1, 0.2, 0.9), arm(2, 0.4, 0.001)];
        assert_eq!(decide(&arms, 1.0, 1e-300), Some(2));
    }

    #[test]
    fn three_candidate_hand_instance() {
        // V·d + q·e with V=2, q=1: 1.3, 1.3, 0.9 -> arm 2
        let arms = vec![arm(3, 0.5, 0.3), arm(5, 0.2, 0.9), arm(9, 0.4, 0.1)];
        assert_eq!(decide(&arms, 1.0, 2.0), Some(2));
        // remove arm 2: tie at 1.3 between arms 0 and 1 -> lowest index wins
        assert_eq!(decide(&arms[..2], 1.0, 2.0), Some(0));
    }

    #[test]
    fn infeasible_arms_are_skipped() {
        let mut arms = vec![arm(0, 0.1, 0.001), arm(1, 0.5, 0.5)];
        arms[0].feasible = false;
        assert_eq!(decide(&arms, 0.0, 1.0), Some(1));
        arms[1].feasible = false;
        assert_eq!(decide(&arms, 0.0, 1.0), None);
    }

    #[test]
    fn scaling_v_and_q_together_preserves_argmin() {
        let arms = vec![arm(0, 0.5, 0.3), arm(1, 0.2, 0.9), arm(2, 0.4, 0.1)];
        for scale in [1e-6, 1.0, 1e6] {
            assert_eq!(
                decide(&arms, 1.0 * scale, 2.0 * scale),
                decide(&arms, 1.0, 2.0)
            );
        }
    }
}
