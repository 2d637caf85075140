//! Closed-form physical and queueing models shared by every policy.
//!
//! Three formulas drive the whole simulation:
//!
//! ```text
//! delay(λ, μ, s)  = λ / (s − (μ + λ))                 M/G/1/PS, arrival-weighted response time
//! rate(ch)        = W · log2(1 + P_tx·H / (σ² + I))   Shannon uplink capacity
//! energy(λ, ch)   = P_tx · λ · γ / rate(ch)           upload energy for λ workloads of γ bits
//! ```
//!
//! The delay cost is dimensionless (mean response time multiplied by the
//! arrival rate); `max_delay` is expressed in the same units. An edge server
//! with `s ≤ μ + λ` is overloaded: the delay formula is undefined there and
//! such a candidate is treated as infeasible by every caller.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from the closed-form models.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    /// Service rate does not exceed background plus user load; the
    /// processor-sharing queue has no finite response time.
    #[error("overloaded server: service rate {service_rate} <= background {background_load} + arrivals {arrivals}")]
    UnstableServer {
        service_rate: f64,
        background_load: f64,
        arrivals: f64,
    },
    /// A constructor argument violates a type invariant.
    #[error("invalid {field}: {value} ({reason})")]
    InvalidValue {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },
}

/// User workload arrival rate, in workloads per period. Non-negative and finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WorkloadRate(f64);

impl WorkloadRate {
    pub fn new(lambda: f64) -> Result<Self, ModelError> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(ModelError::InvalidValue {
                field: "lambda",
                value: lambda,
                reason: "must be finite and >= 0",
            });
        }
        Ok(Self(lambda))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Per-period state of one base station's edge server.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeServerState {
    /// Maximum service rate `s`, workloads per period. Strictly positive.
    pub service_rate: f64,
    /// Background workload `μ` offloaded by other users, workloads per period.
    pub background_load: f64,
}

impl EdgeServerState {
    pub fn new(service_rate: f64, background_load: f64) -> Result<Self, ModelError> {
        if !service_rate.is_finite() || service_rate <= 0.0 {
            return Err(ModelError::InvalidValue {
                field: "service_rate",
                value: service_rate,
                reason: "must be finite and > 0",
            });
        }
        if !background_load.is_finite() || background_load < 0.0 {
            return Err(ModelError::InvalidValue {
                field: "background_load",
                value: background_load,
                reason: "must be finite and >= 0",
            });
        }
        Ok(Self {
            service_rate,
            background_load,
        })
    }

    /// True when the server can absorb `lambda` on top of its background load.
    pub fn is_stable(&self, lambda: WorkloadRate) -> bool {
        self.service_rate > self.background_load + lambda.get()
    }
}

/// Per-period uplink channel between the user's location and one base station.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelState {
    /// Linear power gain `H` (dimensionless), > 0.
    pub gain: f64,
    /// Inter-cell interference power `I` in watts, >= 0.
    pub interference: f64,
    /// Noise power `σ²` in watts, > 0.
    pub noise_power: f64,
    /// Channel bandwidth `W` in hertz, > 0.
    pub bandwidth: f64,
    /// User transmit power `P_tx` in watts, > 0.
    pub tx_power: f64,
}

impl ChannelState {
    pub fn new(
        gain: f64,
        interference: f64,
        noise_power: f64,
        bandwidth: f64,
        tx_power: f64,
    ) -> Result<Self, ModelError> {
        let check = |field: &'static str, value: f64, strict: bool| -> Result<(), ModelError> {
            let ok = value.is_finite() && if strict { value > 0.0 } else { value >= 0.0 };
            if ok {
                Ok(())
            } else {
                Err(ModelError::InvalidValue {
                    field,
                    value,
                    reason: if strict {
                        "must be finite and > 0"
                    } else {
                        "must be finite and >= 0"
                    },
                })
            }
        };
        check("gain", gain, true)?;
        check("interference", interference, false)?;
        check("noise_power", noise_power, true)?;
        check("bandwidth", bandwidth, true)?;
        check("tx_power", tx_power, true)?;
        Ok(Self {
            gain,
            interference,
            noise_power,
            bandwidth,
            tx_power,
        })
    }

    /// Signal-to-interference-plus-noise ratio `P_tx·H / (σ² + I)`.
    pub fn snr(&self) -> f64 {
        self.tx_power * self.gain / (self.noise_power + self.interference)
    }
}

/// Scenario-wide constants shared by all periods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConstants {
    /// Size of one workload `γ`, in bits.
    pub workload_bits: f64,
    /// Total trip energy budget `αB`, in joules.
    pub energy_budget: f64,
    /// Trip horizon `T`, in periods.
    pub horizon: usize,
    /// Minimum acceptable uplink rate `r_min`, in bits per second.
    pub min_rate: f64,
    /// Maximum acceptable per-period delay cost `d_max` (dimensionless).
    pub max_delay: f64,
    /// Largest possible workload arrival rate `λ_max`, workloads per period.
    pub lambda_max: f64,
}

impl SystemConstants {
    /// Per-period share of the trip budget, `αB / T`.
    pub fn per_period_budget(&self) -> f64 {
        self.energy_budget / self.horizon as f64
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let fields = [
            ("workload_bits", self.workload_bits),
            ("energy_budget", self.energy_budget),
            ("min_rate", self.min_rate),
            ("max_delay", self.max_delay),
            ("lambda_max", self.lambda_max),
        ];
        for (field, value) in fields {
            if !value.is_finite() || value <= 0.0 {
                return Err(ModelError::InvalidValue {
                    field,
                    value,
                    reason: "must be finite and > 0",
                });
            }
        }
        if self.horizon == 0 {
            return Err(ModelError::InvalidValue {
                field: "horizon",
                value: 0.0,
                reason: "must be >= 1",
            });
        }
        Ok(())
    }
}

/// Delay cost of offloading `lambda` to a server: `λ / (s − (μ + λ))`.
///
/// Zero arrivals cost zero even on a saturated server only if the server is
/// stable for λ=0; an overloaded server is an error either way so callers can
/// rule the candidate out.
pub fn delay_cost(lambda: WorkloadRate, server: &EdgeServerState) -> Result<f64, ModelError> {
    if !server.is_stable(lambda) {
        return Err(ModelError::UnstableServer {
            service_rate: server.service_rate,
            background_load: server.background_load,
            arrivals: lambda.get(),
        });
    }
    Ok(lambda.get() / (server.service_rate - (server.background_load + lambda.get())))
}

/// Maximum achievable uplink rate `W · log2(1 + SNR)`, in bits per second.
pub fn uplink_rate(ch: &ChannelState) -> f64 {
    ch.bandwidth * (1.0 + ch.snr()).log2()
}

/// Transmission energy `P_tx · λ · γ / rate`, in joules.
pub fn tx_energy(lambda: WorkloadRate, ch: &ChannelState, workload_bits: f64) -> f64 {
    if lambda.get() == 0.0 {
        return 0.0;
    }
    ch.tx_power * lambda.get() * workload_bits / uplink_rate(ch)
}

/// Per-period feasibility: rate floor, server stability and delay ceiling.
///
/// Boundary values are feasible (`rate == min_rate`, `delay == max_delay`).
pub fn is_feasible(
    lambda: WorkloadRate,
    server: &EdgeServerState,
    ch: &ChannelState,
    consts: &SystemConstants,
) -> bool {
    if uplink_rate(ch) < consts.min_rate {
        return false;
    }
    match delay_cost(lambda, server) {
        Ok(d) => d <= consts.max_delay,
        Err(_) => false,
    }
}

/// Delay model extension point. The processor-sharing form above is the only
/// implementation shipped; a composite model that folds in remote-cloud
/// forwarding delay can be slotted in here without touching the policies.
pub trait DelayModel {
    fn delay_cost(&self, lambda: WorkloadRate, server: &EdgeServerState)
        -> Result<f64, ModelError>;
}

/// The M/G/1/PS arrival-weighted mean response time used throughout.
#[derive(Debug, Clone, Copy, Default)]
pub struct ProcessorSharingDelay;

impl DelayModel for ProcessorSharingDelay {
    fn delay_cost(
        &self,
        lambda: WorkloadRate,
        server: &EdgeServerState,
    ) -> Result<f64, ModelError> {
        delay_cost(lambda, server)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lam(x: f64) -> WorkloadRate {
        WorkloadRate::new(x).unwrap()
    }

    fn server(s: f64, mu: f64) -> EdgeServerState {
        EdgeServerState::new(s, mu).unwrap()
    }

    /// Channel with a prescribed SNR: gain = snr, P_tx = 1, σ² = 1, I = 0.
    fn channel_with_snr(snr: f64, bandwidth: f64) -> ChannelState {
        ChannelState::new(snr, 0.0, 1.0, bandwidth, 1.0).unwrap()
    }

    #[test]
    fn delay_cost_hand_values() {
        assert_eq!(delay_cost(lam(10.0), &server(50.0, 20.0)).unwrap(), 0.5);
        assert_eq!(delay_cost(lam(0.0), &server(50.0, 20.0)).unwrap(), 0.0);
        // near saturation: 12 / (50 - 49) = 12
        assert!((delay_cost(lam(12.0), &server(50.0, 37.0)).unwrap() - 12.0).abs() < 1e-12);
    }

    #[test]
    fn delay_cost_unstable_is_error() {
        let err = delay_cost(lam(10.0), &server(50.0, 40.0)).unwrap_err();
        assert!(matches!(err, ModelError::UnstableServer { .. }));
        // exactly at the boundary s == mu + lambda is unstable too
        assert!(delay_cost(lam(10.0), &server(50.0, 40.0)).is_err());
    }

    #[test]
    fn delay_cost_monotonicity() {
        let base = delay_cost(lam(10.0), &server(50.0, 20.0)).unwrap();
        assert!(delay_cost(lam(11.0), &server(50.0, 20.0)).unwrap() > base);
        assert!(delay_cost(lam(10.0), &server(50.0, 21.0)).unwrap() > base);
        assert!(delay_cost(lam(10.0), &server(51.0, 20.0)).unwrap() < base);
    }

    #[test]
    fn uplink_rate_hand_values() {
        assert_eq!(uplink_rate(&channel_with_snr(1.0, 20e6)), 2.0e7);
        assert_eq!(uplink_rate(&channel_with_snr(3.0, 20e6)), 4.0e7);
        // SNR 31 -> log2(32) = 5 -> exactly the 100 Mbps floor
        assert_eq!(uplink_rate(&channel_with_snr(31.0, 20e6)), 1.0e8);
    }

    #[test]
    fn uplink_rate_scale_invariance() {
        // scaling P_tx·H and σ²+I together leaves the rate unchanged
        let a = ChannelState::new(4.0, 1.0, 1.0, 20e6, 2.0).unwrap();
        let b = ChannelState::new(4.0, 7.0, 7.0, 20e6, 14.0).unwrap();
        assert!((uplink_rate(&a) - uplink_rate(&b)).abs() / uplink_rate(&a) < 1e-12);
    }

    #[test]
    fn tx_energy_hand_values() {
        // λ·γ = 9.6e7 bits uploaded at 9.6e7 bits/s with P_tx = 0.1 W -> 0.1 J.
        // rate = 9.6e7 needs log2(1+snr) = 4.8 with W = 2e7.
        let snr = 2f64.powf(4.8) - 1.0;
        let ch = ChannelState::new(snr / 0.1, 0.0, 1.0, 2e7, 0.1).unwrap();
        assert!((uplink_rate(&ch) - 9.6e7).abs() < 1e-3);
        let e = tx_energy(lam(12.0), &ch, 8e6);
        assert!((e - 0.1).abs() < 1e-12);

        assert_eq!(tx_energy(lam(0.0), &ch, 8e6), 0.0);
    }

    #[test]
    fn tx_energy_decreases_with_gain() {
        let ch = ChannelState::new(10.0, 0.0, 1.0, 2e7, 0.1).unwrap();
        let better = ChannelState { gain: 20.0, ..ch };
        assert!(tx_energy(lam(5.0), &better, 8e6) < tx_energy(lam(5.0), &ch, 8e6));
    }

    #[test]
    fn tx_energy_linear_in_lambda_and_bits() {
        let ch = channel_with_snr(15.0, 2e7);
        let e1 = tx_energy(lam(3.0), &ch, 8e6);
        let e2 = tx_energy(lam(6.0), &ch, 8e6);
        let e3 = tx_energy(lam(3.0), &ch, 16e6);
        assert!((e2 - 2.0 * e1).abs() < 1e-15);
        assert!((e3 - 2.0 * e1).abs() < 1e-15);
    }

    fn consts() -> SystemConstants {
        SystemConstants {
            workload_bits: 8e6,
            energy_budget: 120.0,
            horizon: 1000,
            min_rate: 1e8,
            max_delay: 5.0,
            lambda_max: 12.0,
        }
    }

    #[test]
    fn feasibility_boundaries_inclusive() {
        let c = consts();
        // rate exactly r_min
        let ch = channel_with_snr(31.0, 20e6);
        assert_eq!(uplink_rate(&ch), c.min_rate);
        // delay exactly d_max: λ/(s-μ-λ) = 5 with λ=10 -> s-μ = 12
        let sv = server(32.0, 20.0);
        assert_eq!(delay_cost(lam(10.0), &sv).unwrap(), 5.0);
        assert!(is_feasible(lam(10.0), &sv, &ch, &c));
    }

    #[test]
    fn feasibility_violations() {
        let c = consts();
        let ch = channel_with_snr(31.0, 20e6);
        // unstable server
        assert!(!is_feasible(lam(10.0), &server(50.0, 45.0), &ch, &c));
        // rate at half the floor
        let slow = channel_with_snr(2f64.powf(2.5) - 1.0, 20e6);
        assert!((uplink_rate(&slow) - c.min_rate / 2.0).abs() < 1.0);
        assert!(!is_feasible(lam(10.0), &server(50.0, 20.0), &slow, &c));
        // delay just above the ceiling
        let sv = server(31.9, 20.0);
        assert!(delay_cost(lam(10.0), &sv).unwrap() > c.max_delay);
        assert!(!is_feasible(lam(10.0), &sv, &ch, &c));
    }

    #[test]
    fn feasibility_monotone_in_improvements() {
        let c = consts();
        let lambda = lam(8.0);
        let sv = server(40.0, 15.0);
        let ch = channel_with_snr(40.0, 20e6);
        assert!(is_feasible(lambda, &sv, &ch, &c));
        // better gain, higher service rate, lower background, lower interference
        let better_ch = ChannelState {
            gain: ch.gain * 2.0,
            ..ch
        };
        let better_sv = server(45.0, 10.0);
        assert!(is_feasible(lambda, &better_sv, &better_ch, &c));
    }

    #[test]
    fn delay_model_trait_is_pluggable() {
        struct FlatDelay;
        impl DelayModel for FlatDelay {
            fn delay_cost(
                &self,
                _lambda: WorkloadRate,
                _server: &EdgeServerState,
            ) -> Result<f64, ModelError> {
                Ok(1.0)
            }
        }
        assert_eq!(
            FlatDelay.delay_cost(lam(3.0), &server(50.0, 0.0)).unwrap(),
            1.0
        );
        assert_eq!(
            ProcessorSharingDelay
                .delay_cost(lam(10.0), &server(50.0, 20.0))
                .unwrap(),
            0.5
        );
    }

    #[test]
    fn invalid_constructor_values() {
        assert!(WorkloadRate::new(-1.0).is_err());
        assert!(WorkloadRate::new(f64::NAN).is_err());
        assert!(EdgeServerState::new(0.0, 1.0).is_err());
        assert!(EdgeServerState::new(50.0, -1.0).is_err());
        assert!(ChannelState::new(0.0, 0.0, 1.0, 1.0, 1.0).is_err());
        assert!(ChannelState::new(1.0, -1.0, 1.0, 1.0, 1.0).is_err());
    }
}
