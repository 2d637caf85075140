//! Discrete-time simulator and policy library for energy-constrained
//! user-to-base-station association in dense edge-computing networks.
//!
//! A mobile user offloads computation workloads to edge servers co-located
//! with small-cell base stations while moving through their coverage area.
//! Each period the user (or the network on its behalf) picks one station out
//! of the candidates in range, trading computation delay against uplink
//! transmission energy under a trip-wide energy budget.
//!
//! The crate ships:
//!
//! - [`model`] — closed-form delay, rate and energy models plus per-period
//!   feasibility checks;
//! - [`scenario`] — seeded generation and serialization of complete
//!   exogenous scenario traces (topology, trajectory, workloads, channels);
//! - [`policy`] — online association policies: a drift-plus-penalty
//!   controller with full state information, a bandit-feedback variant that
//!   learns station quality with UCB1, and two greedy baselines;
//! - [`offline`] — the frame-by-frame lookahead oracle used as benchmark;
//! - [`bounds`] — evaluators for the analytical delay, energy-deviation and
//!   bandit-regret guarantees, checked empirically by the test suite;
//! - [`harness`] — experiment orchestration, replication management and
//!   CSV/JSON emission.
//!
//! Start with the runnable examples (`cargo run --example compare_policies`)
//! or the thin `edgeroam` CLI in `src/main.rs`.

pub mod bounds;
pub mod harness;
pub mod model;
pub mod offline;
pub mod policy;
pub mod scenario;
