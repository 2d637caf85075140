//! Scenario generation: grid topology, lattice random walk, per-period
//! stochastic processes, and versioned trace files.
//!
//! A [`ScenarioTrace`] is the complete exogenous input to a run: user
//! trajectory, workload arrivals, per-station background load and service
//! rate, and per-candidate channel states. Policies never draw randomness of
//! their own from the environment — everything exogenous is frozen in the
//! trace, so all policies within a replication consume identical state.
//!
//! Channel gains follow a log-distance pathloss in dB, `PL(d) = a + b·log10(d)`
//! with `d` in meters, converted to a linear power gain `H = 10^(-PL/10)`.
//! The walk is a lattice walk that refuses to immediately reverse direction
//! (with configurable probability), which keeps trajectories from oscillating
//! between two points.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    is_feasible, tx_energy, ChannelState, EdgeServerState, SystemConstants, WorkloadRate,
};

/// Trace file schema version. Bump on any incompatible layout change.
pub const TRACE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("period {period}: no feasible base station after {attempts} resampling attempts")]
    InfeasiblePeriod { period: usize, attempts: usize },
    #[error("frame {frame}: minimum feasible energy exceeds the frame budget after {attempts} resampling attempts")]
    InfeasibleFrame { frame: usize, attempts: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("trace file version {found} does not match supported version {expected}")]
    SchemaVersion { found: u32, expected: u32 },
}

/// Rectangular simulation area with the origin at the south-west corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Area {
    pub width: f64,
    pub height: f64,
}

/// Base-station layout plus the association rule.
///
/// Regions degenerate to points here: the candidate set of a continuous
/// position is every station within the association radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub bs_positions: Vec<[f64; 2]>,
    pub area: Area,
    pub association_radius: f64,
}

impl Topology {
    /// `side_count²` stations on a regular grid centered in `area`.
    pub fn grid(
        side_count: usize,
        spacing: f64,
        area: Area,
        association_radius: f64,
    ) -> Result<Self, ScenarioError> {
        if side_count < 1 {
            return Err(ScenarioError::Config("side_count must be >= 1".into()));
        }
        if spacing <= 0.0 || association_radius <= 0.0 {
            return Err(ScenarioError::Config(
                "spacing and association_radius must be > 0".into(),
            ));
        }
        let extent = (side_count - 1) as f64 * spacing;
        if extent > area.width || extent > area.height {
            return Err(ScenarioError::Config(format!(
                "grid extent {extent} m does not fit in {} x {} m area",
                area.width, area.height
            )));
        }
        let x0 = (area.width - extent) / 2.0;
        let y0 = (area.height - extent) / 2.0;
        let mut bs_positions = Vec::with_capacity(side_count * side_count);
        for row in 0..side_count {
            for col in 0..side_count {
                bs_positions.push([
                    x0 + col as f64 * spacing,
                    y0 + row as f64 * spacing,
                ]);
            }
        }
        Ok(Self {
            bs_positions,
            area,
            association_radius,
        })
    }

    /// Indices of all stations within the association radius, ascending.
    pub fn candidate_set(&self, point: [f64; 2]) -> Vec<usize> {
        self.bs_positions
            .iter()
            .enumerate()
            .filter(|(_, bs)| distance(point, **bs) <= self.association_radius)
            .map(|(n, _)| n)
            .collect()
    }

    pub fn station_count(&self) -> usize {
        self.bs_positions.len()
    }
}

pub fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Lattice walk parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobilityParams {
    /// Lattice step length in meters; one hop per period.
    pub step: f64,
    /// Inset from the area boundary; keeps the walk inside coverage.
    pub margin: f64,
    /// Probability that the direction reversing the previous hop is removed
    /// from the next-step choice set. 1.0 forbids immediate backtracking.
    pub reversal_suppression: f64,
}

impl Default for MobilityParams {
    fn default() -> Self {
        Self {
            step: 40.0,
            margin: 100.0,
            reversal_suppression: 1.0,
        }
    }
}

/// User positions, one per period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub positions: Vec<[f64; 2]>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

const DIRECTIONS: [(i64, i64); 4] = [(0, 1), (1, 0), (0, -1), (-1, 0)];

/// Length-`periods` lattice walk over `topology.area`, deterministic in `seed`.
pub fn generate_trajectory(
    topology: &Topology,
    periods: usize,
    seed: u64,
    params: &MobilityParams,
) -> Result<Trajectory, ScenarioError> {
    if periods == 0 {
        return Err(ScenarioError::Config("periods must be >= 1".into()));
    }
    if params.step <= 0.0 {
        return Err(ScenarioError::Config("mobility step must be > 0".into()));
    }
    if !(0.0..=1.0).contains(&params.reversal_suppression) {
        return Err(ScenarioError::Config(
            "reversal_suppression must be in [0, 1]".into(),
        ));
    }
    let nx = lattice_count(topology.area.width, params)?;
    let ny = lattice_count(topology.area.height, params)?;

    let mut rng = ChaCha8Rng::seed_from_u64(substream(seed, &[0x7261_6a65, 0x01]));
    let mut ix = rng.gen_range(0..nx) as i64;
    let mut iy = rng.gen_range(0..ny) as i64;
    let mut prev: Option<usize> = None;

    let to_point = |ix: i64, iy: i64| -> [f64; 2] {
        [
            params.margin + ix as f64 * params.step,
            params.margin + iy as f64 * params.step,
        ]
    };

    let mut positions = Vec::with_capacity(periods);
    positions.push(to_point(ix, iy));
    for _ in 1..periods {
        let mut options: Vec<usize> = (0..4)
            .filter(|&d| {
                let (dx, dy) = DIRECTIONS[d];
                let (jx, jy) = (ix + dx, iy + dy);
                jx >= 0 && jy >= 0 && (jx as usize) < nx && (jy as usize) < ny
            })
            .collect();
        if let Some(p) = prev {
            let opposite = (p + 2) % 4;
            if options.len() > 1
                && options.contains(&opposite)
                && rng.gen::<f64>() < params.reversal_suppression
            {
                options.retain(|&d| d != opposite);
            }
        }
        let dir = options[rng.gen_range(0..options.len())];
        ix += DIRECTIONS[dir].0;
        iy += DIRECTIONS[dir].1;
        prev = Some(dir);
        positions.push(to_point(ix, iy));
    }
    Ok(Trajectory { positions })
}

fn lattice_count(extent: f64, params: &MobilityParams) -> Result<usize, ScenarioError> {
    let span = extent - 2.0 * params.margin;
    if span < params.step {
        return Err(ScenarioError::Config(
            "mobility lattice needs at least 2 points per axis; shrink margin or step".into(),
        ));
    }
    Ok((span / params.step).floor() as usize + 1)
}

/// Dependence of channel gain on distance: `H = 10^(-(a + b·log10(d))/10)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathlossParams {
    pub offset_db: f64,
    pub exponent_db: f64,
    /// Distances below this are clamped before taking the log.
    pub min_distance: f64,
}

impl Default for PathlossParams {
    fn default() -> Self {
        Self {
            offset_db: 25.3,
            exponent_db: 37.6,
            min_distance: 1.0,
        }
    }
}

pub fn pathloss_gain(distance_m: f64, params: &PathlossParams) -> f64 {
    let d = distance_m.max(params.min_distance);
    let loss_db = params.offset_db + params.exponent_db * d.log10();
    10f64.powf(-loss_db / 10.0)
}

/// Frame-level generation constraint: the cheapest feasible decision sequence
/// of every frame must fit the per-frame energy budget, so that the lookahead
/// benchmark is solvable on every emitted trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameBudgetCheck {
    pub periods_per_frame: usize,
    pub budget_per_frame: f64,
}

/// Stochastic process parameters for [`generate_processes`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessParams {
    /// Constant edge-server service rate, workloads per period.
    pub service_rate: f64,
    /// Background load drawn uniformly from `[0, background_max]` per station
    /// per period.
    pub background_max: f64,
    pub pathloss: PathlossParams,
    /// Constant inter-cell interference power in watts.
    pub interference: f64,
    /// Channel bandwidth in hertz.
    pub bandwidth: f64,
    /// Noise power in watts.
    pub noise_power: f64,
    /// User transmit power in watts.
    pub tx_power: f64,
    /// Resampling attempts per period (and per frame when the frame check is
    /// enabled) before giving up.
    pub feasibility_retries: usize,
    pub frame_budget: Option<FrameBudgetCheck>,
}

/// Complete exogenous state for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioTrace {
    pub topology: Topology,
    pub trajectory: Trajectory,
    /// Workload arrival rate per period, length `T`.
    pub lambda: Vec<WorkloadRate>,
    /// Server state per period per station, `T x N`.
    pub servers: Vec<Vec<EdgeServerState>>,
    /// Candidate station indices per period, ascending.
    pub candidates: Vec<Vec<usize>>,
    /// Channel per period per candidate, aligned with `candidates`.
    pub channels: Vec<Vec<ChannelState>>,
    pub consts: SystemConstants,
    pub seed: u64,
    /// Number of frames whose draws were rejected by the frame budget check.
    pub resampled_frames: usize,
}

/// Borrowed view of one period: the user's workload and the candidate arms.
#[derive(Debug, Clone, Copy)]
pub struct PeriodState<'a> {
    pub t: usize,
    pub lambda: WorkloadRate,
    pub candidates: &'a [usize],
    pub servers: &'a [EdgeServerState],
    pub channels: &'a [ChannelState],
}

/// One selectable base station within a period.
#[derive(Debug, Clone, Copy)]
pub struct Arm<'a> {
    /// Station index in the topology.
    pub bs: usize,
    pub server: &'a EdgeServerState,
    pub channel: &'a ChannelState,
}

impl<'a> PeriodState<'a> {
    pub fn arms(&self) -> impl Iterator<Item = Arm<'a>> + '_ {
        let servers = self.servers;
        self.candidates
            .iter()
            .zip(self.channels.iter())
            .map(move |(&bs, channel)| Arm {
                bs,
                server: &servers[bs],
                channel,
            })
    }

    pub fn arm_count(&self) -> usize {
        self.candidates.len()
    }
}

impl ScenarioTrace {
    pub fn horizon(&self) -> usize {
        self.lambda.len()
    }

    pub fn period(&self, t: usize) -> PeriodState<'_> {
        PeriodState {
            t,
            lambda: self.lambda[t],
            candidates: &self.candidates[t],
            servers: &self.servers[t],
            channels: &self.channels[t],
        }
    }

    /// Structural and semantic invariants; run on every load.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let t = self.horizon();
        if t == 0 {
            return Err(ScenarioError::Schema("empty trace".into()));
        }
        if self.consts.horizon != t {
            return Err(ScenarioError::Schema(format!(
                "constants.horizon {} != series length {t}",
                self.consts.horizon
            )));
        }
        let n = self.topology.station_count();
        let same_len = self.trajectory.len() == t
            && self.servers.len() == t
            && self.candidates.len() == t
            && self.channels.len() == t;
        if !same_len {
            return Err(ScenarioError::Schema(
                "trajectory/servers/candidates/channels lengths disagree with lambda".into(),
            ));
        }
        for i in 0..t {
            if self.servers[i].len() != n {
                return Err(ScenarioError::Schema(format!(
                    "period {i}: {} server entries for {n} stations",
                    self.servers[i].len()
                )));
            }
            if self.candidates[i].is_empty() {
                return Err(ScenarioError::Schema(format!(
                    "period {i}: empty candidate set"
                )));
            }
            if self.channels[i].len() != self.candidates[i].len() {
                return Err(ScenarioError::Schema(format!(
                    "period {i}: {} channel entries for {} candidates",
                    self.channels[i].len(),
                    self.candidates[i].len()
                )));
            }
            if self.candidates[i].iter().any(|&bs| bs >= n) {
                return Err(ScenarioError::Schema(format!(
                    "period {i}: candidate index out of range"
                )));
            }
            let period = self.period(i);
            let any_feasible = period
                .arms()
                .any(|arm| is_feasible(period.lambda, arm.server, arm.channel, &self.consts));
            if !any_feasible {
                return Err(ScenarioError::Schema(format!(
                    "period {i}: no feasible candidate"
                )));
            }
        }
        Ok(())
    }
}

/// Draw the full stochastic state for a topology/trajectory pair.
///
/// Per period: `λ ~ U[0, λ_max]`, per-station `μ ~ U[0, background_max]`,
/// constant service rate, channel gain from pathloss at the user-station
/// distance. Periods with no feasible candidate are redrawn up to
/// `feasibility_retries` times. When `frame_budget` is set, each frame is
/// additionally redrawn until its cheapest feasible decision sequence fits
/// the per-frame budget.
pub fn generate_processes(
    topology: &Topology,
    trajectory: &Trajectory,
    consts: &SystemConstants,
    seed: u64,
    params: &ProcessParams,
) -> Result<ScenarioTrace, ScenarioError> {
    consts
        .validate()
        .map_err(|e| ScenarioError::Config(e.to_string()))?;
    let t_total = trajectory.len();
    if t_total != consts.horizon {
        return Err(ScenarioError::Config(format!(
            "trajectory length {t_total} != constants.horizon {}",
            consts.horizon
        )));
    }
    if params.service_rate <= 0.0 || params.background_max < 0.0 {
        return Err(ScenarioError::Config(
            "service_rate must be > 0 and background_max >= 0".into(),
        ));
    }

    // Frame structure: with no frame check, treat each period as its own
    // frame with an unbounded budget.
    let (frame_len, frame_budget) = match params.frame_budget {
        Some(check) => {
            if check.periods_per_frame == 0 || t_total % check.periods_per_frame != 0 {
                return Err(ScenarioError::Config(format!(
                    "horizon {t_total} is not a multiple of periods_per_frame {}",
                    check.periods_per_frame
                )));
            }
            (check.periods_per_frame, check.budget_per_frame)
        }
        None => (1, f64::INFINITY),
    };
    let frame_count = t_total / frame_len;

    let mut lambda = vec![WorkloadRate::new(0.0).unwrap(); t_total];
    let mut servers = vec![Vec::new(); t_total];
    let mut candidates = vec![Vec::new(); t_total];
    let mut channels = vec![Vec::new(); t_total];
    let mut resampled_frames = 0usize;

    for frame in 0..frame_count {
        let mut accepted = false;
        for attempt in 0..=params.feasibility_retries {
            let mut rng =
                ChaCha8Rng::seed_from_u64(substream(seed, &[0x7072_6f63, frame as u64, attempt as u64]));
            let mut frame_min_energy = 0.0;
            let mut frame_ok = true;
            for j in 0..frame_len {
                let t = frame * frame_len + j;
                match draw_period(topology, trajectory, consts, params, &mut rng, t)? {
                    Some(drawn) => {
                        frame_min_energy += drawn.min_feasible_energy;
                        lambda[t] = drawn.lambda;
                        servers[t] = drawn.servers;
                        candidates[t] = drawn.candidates;
                        channels[t] = drawn.channels;
                    }
                    None => {
                        frame_ok = false;
                        break;
                    }
                }
            }
            if frame_ok && frame_min_energy <= frame_budget {
                if attempt > 0 {
                    resampled_frames += 1;
                }
                accepted = true;
                break;
            }
        }
        if !accepted {
            return Err(ScenarioError::InfeasibleFrame {
                frame,
                attempts: params.feasibility_retries + 1,
            });
        }
    }

    let trace = ScenarioTrace {
        topology: topology.clone(),
        trajectory: trajectory.clone(),
        lambda,
        servers,
        candidates,
        channels,
        consts: *consts,
        seed,
        resampled_frames,
    };
    trace.validate().map_err(|e| {
        ScenarioError::Config(format!("generated trace failed validation: {e}"))
    })?;
    Ok(trace)
}

struct DrawnPeriod {
    lambda: WorkloadRate,
    servers: Vec<EdgeServerState>,
    candidates: Vec<usize>,
    channels: Vec<ChannelState>,
    min_feasible_energy: f64,
}

/// One period's draws, retried until at least one candidate is feasible.
/// Returns `None` when the retries are exhausted within this stream; the
/// caller then rejects the whole frame attempt.
fn draw_period(
    topology: &Topology,
    trajectory: &Trajectory,
    consts: &SystemConstants,
    params: &ProcessParams,
    rng: &mut ChaCha8Rng,
    t: usize,
) -> Result<Option<DrawnPeriod>, ScenarioError> {
    let point = trajectory.positions[t];
    let candidates = topology.candidate_set(point);
    if candidates.is_empty() {
        return Err(ScenarioError::Config(format!(
            "period {t}: trajectory point ({:.1}, {:.1}) has no station within {} m",
            point[0], point[1], topology.association_radius
        )));
    }
    // Channel gains are deterministic given the position.
    let channels: Vec<ChannelState> = candidates
        .iter()
        .map(|&bs| {
            let d = distance(point, topology.bs_positions[bs]);
            ChannelState::new(
                pathloss_gain(d, &params.pathloss),
                params.interference,
                params.noise_power,
                params.bandwidth,
                params.tx_power,
            )
            .map_err(|e| ScenarioError::Config(e.to_string()))
        })
        .collect::<Result<_, _>>()?;

    for _ in 0..=params.feasibility_retries {
        let lambda = WorkloadRate::new(rng.gen_range(0.0..consts.lambda_max))
            .expect("uniform draw is finite and non-negative");
        let servers: Vec<EdgeServerState> = (0..topology.station_count())
            .map(|_| {
                EdgeServerState::new(
                    params.service_rate,
                    rng.gen_range(0.0..params.background_max.max(f64::MIN_POSITIVE)),
                )
                .expect("uniform draw within invariants")
            })
            .collect();

        let mut min_energy = f64::INFINITY;
        for (&bs, ch) in candidates.iter().zip(channels.iter()) {
            if is_feasible(lambda, &servers[bs], ch, consts) {
                min_energy = min_energy.min(tx_energy(lambda, ch, consts.workload_bits));
            }
        }
        if min_energy.is_finite() {
            return Ok(Some(DrawnPeriod {
                lambda,
                servers,
                candidates,
                channels,
                min_feasible_energy: min_energy,
            }));
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Trace files
// ---------------------------------------------------------------------------

/// Unit declarations embedded in every trace file header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceUnits {
    pub positions: String,
    pub lambda: String,
    pub service_rate: String,
    pub gain: String,
    pub power: String,
    pub bandwidth: String,
    pub energy_budget: String,
    pub min_rate: String,
    pub max_delay: String,
}

impl Default for TraceUnits {
    fn default() -> Self {
        Self {
            positions: "m".into(),
            lambda: "workloads/period".into(),
            service_rate: "workloads/period".into(),
            gain: "linear power ratio".into(),
            power: "W".into(),
            bandwidth: "Hz".into(),
            energy_budget: "J".into(),
            min_rate: "bit/s".into(),
            max_delay: "dimensionless delay cost".into(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct TraceFile {
    version: u32,
    units: TraceUnits,
    trace: ScenarioTrace,
}

/// Write a trace as versioned JSON. Round-trips bit-exactly through
/// [`load_trace`].
pub fn save_trace(trace: &ScenarioTrace, path: &Path) -> Result<(), ScenarioError> {
    let file = TraceFile {
        version: TRACE_SCHEMA_VERSION,
        units: TraceUnits::default(),
        trace: trace.clone(),
    };
    let body = serde_json::to_string_pretty(&file)
        .map_err(|e| ScenarioError::Schema(e.to_string()))?;
    fs::write(path, body)?;
    Ok(())
}

pub fn load_trace(path: &Path) -> Result<ScenarioTrace, ScenarioError> {
    let body = fs::read_to_string(path)?;
    // Peek at the version before strict decoding so mismatches are reported
    // by version number rather than as a field error.
    #[derive(Deserialize)]
    struct VersionOnly {
        version: u32,
    }
    let version: VersionOnly =
        serde_json::from_str(&body).map_err(|e| ScenarioError::Schema(e.to_string()))?;
    if version.version != TRACE_SCHEMA_VERSION {
        return Err(ScenarioError::SchemaVersion {
            found: version.version,
            expected: TRACE_SCHEMA_VERSION,
        });
    }
    let file: TraceFile =
        serde_json::from_str(&body).map_err(|e| ScenarioError::Schema(e.to_string()))?;
    file.trace.validate()?;
    Ok(file.trace)
}

/// Splitmix-style seed derivation so each generation stage owns an
/// independent, reproducible stream.
pub(crate) fn substream(seed: u64, tags: &[u64]) -> u64 {
    let mut state = seed ^ 0x9E37_79B9_7F4A_7C15;
    for &tag in tags {
        state = splitmix64(state ^ tag.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    }
    splitmix64(state)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
