//! Deterministic discrete-time engine. Each step freezes the true positions,
//! lets due agents evaluate their triggers and communicate, then applies all
//! motions simultaneously and records objective, message and power metrics.

use std::collections::VecDeque;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::agent::{self, AgentParams, AgentStore};
use crate::geometry::{tbb, ConvexPolygon, DensityField, Point};
use crate::partition::{korder_diagram, KOrderDiagram};
use crate::{Error, Result};

/// Per-step tolerance allowed on the objective's monotone decrease, as a
/// fraction of the initial objective (grid and quadrature slack).
const H_MONOTONE_TOL: f64 = 1e-6;

/// How the agents decide when to communicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Every agent queries every other agent on every step and moves toward
    /// the exact dominant-cell centroid.
    Benchmark,
    /// Every agent checks its trigger every step and communicates on demand.
    EventTriggered,
    /// Agents precompute how long the trigger cannot fire and sleep through
    /// those steps, following a precomputed motion plan.
    SelfTriggered,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Benchmark => "benchmark",
            Mode::EventTriggered => "event",
            Mode::SelfTriggered => "self",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "benchmark" => Ok(Mode::Benchmark),
            "event" | "event_triggered" => Ok(Mode::EventTriggered),
            "self" | "self_triggered" => Ok(Mode::SelfTriggered),
            other => Err(Error::InvalidConfig(format!(
                "unknown mode '{other}' (expected benchmark|event|self)"
            ))),
        }
    }
}

/// Full simulation configuration. Defaults follow the reference scenario:
/// five agents covering a 50 m x 50 m square with k = 2, 0.1 s steps at
/// 1 m/s, and a 256-cell grid for the uncertain-cell rasterization.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub n: usize,
    pub k: usize,
    pub domain: ConvexPolygon,
    pub phi: DensityField,
    pub dt: f64,
    pub v_max: f64,
    pub epsilon: f64,
    pub gamma: f64,
    pub grid_res: usize,
    /// Power-model exponent coefficient, 1/m.
    pub alpha: f64,
    /// Power-model medium constant.
    pub beta: f64,
    /// Received power at the peer, dBm.
    pub p_recv_dbm: f64,
    pub steps: usize,
    pub seed: u64,
    pub mode: Mode,
    /// Check containment and objective monotonicity every step.
    pub assert_invariants: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n: 5,
            k: 2,
            domain: ConvexPolygon::rect(0.0, 0.0, 50.0, 50.0).expect("valid rectangle"),
            phi: DensityField::Uniform(1.0),
            dt: 0.1,
            v_max: 1.0,
            epsilon: 2.5,
            gamma: 2.0,
            grid_res: 256,
            alpha: 0.1,
            beta: 1.0,
            p_recv_dbm: 0.0,
            steps: 1500,
            seed: 0,
            mode: Mode::SelfTriggered,
            assert_invariants: cfg!(debug_assertions),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidConfig("need at least 2 agents".into()));
        }
        if self.k == 0 || self.k >= self.n {
            return Err(Error::InvalidConfig(format!(
                "k must satisfy 1 <= k < n (k = {}, n = {})",
                self.k, self.n
            )));
        }
        if !(self.dt > 0.0) {
            return Err(Error::InvalidConfig("dt must be > 0".into()));
        }
        if !(self.v_max > 0.0) {
            return Err(Error::InvalidConfig("vmax must be > 0".into()));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::InvalidConfig("epsilon must be >= 0".into()));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::InvalidConfig("gamma must be > 0".into()));
        }
        if self.grid_res < 32 {
            return Err(Error::InvalidConfig("grid-res must be >= 32".into()));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::InvalidConfig("alpha must be > 0".into()));
        }
        if !(self.beta > 0.0) {
            return Err(Error::InvalidConfig("beta must be > 0".into()));
        }
        if self.steps == 0 {
            return Err(Error::InvalidConfig("steps must be >= 1".into()));
        }
        if self.domain.is_empty() {
            return Err(Error::InvalidConfig("domain polygon is empty".into()));
        }
        Ok(())
    }

    pub fn agent_params(&self) -> AgentParams<'_> {
        AgentParams {
            k: self.k,
            domain: &self.domain,
            phi: &self.phi,
            grid_res: self.grid_res,
            v_max: self.v_max,
            dt: self.dt,
            epsilon: self.epsilon,
            gamma: self.gamma,
        }
    }
}

/// One agent's runtime state inside the engine.
#[derive(Debug, Clone)]
struct AgentRuntime {
    store: AgentStore,
    /// Ids the agent last discovered; only these enter its partition math.
    neighbors: Vec<usize>,
    /// Remaining steps before the trigger is re-evaluated (self mode).
    sleep: usize,
    /// Precomputed positions for the remaining sleep steps.
    plan: VecDeque<Point>,
    /// View of the state the agent will hold at the end of the plan, saved
    /// by the sleep simulation so the wake step does not redo the grid pass.
    wake_view: Option<agent::LocalView>,
}

/// The complete world: true positions plus every agent's local state.
#[derive(Debug, Clone)]
pub struct WorldState {
    pub positions: Vec<Point>,
    agents: Vec<AgentRuntime>,
    pub step: usize,
    messages_cum: u64,
}

impl WorldState {
    /// Places agents uniformly at random in the domain (rejection sampling
    /// over the bounding box with a seeded generator) and initializes fully
    /// stale stores, so every agent is forced to discover neighbors on the
    /// first step.
    pub fn init(config: &SimConfig) -> Result<WorldState> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let (lo, hi) = config.domain.bounding_box();
        let mut positions = Vec::with_capacity(config.n);
        while positions.len() < config.n {
            let p = Point::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
            if config.domain.contains(p) {
                positions.push(p);
            }
        }
        let diam = config.domain.diameter();
        let agents = (0..config.n)
            .map(|i| {
                Ok(AgentRuntime {
                    store: AgentStore::new(i, config.n, positions[i], diam)?,
                    neighbors: (0..config.n).filter(|&j| j != i).collect(),
                    sleep: 0,
                    plan: VecDeque::new(),
                    wake_view: None,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(WorldState {
            positions,
            agents,
            step: 0,
            messages_cum: 0,
        })
    }

    pub fn store(&self, agent: usize) -> Option<&AgentStore> {
        self.agents.get(agent).map(|a| &a.store)
    }
}

/// Metrics recorded at the end of each step.
#[derive(Debug, Clone)]
pub struct StepMetrics {
    pub step: usize,
    pub time_s: f64,
    pub h: f64,
    pub messages_step: u64,
    pub messages_cum: u64,
    /// Linear-domain sum of all transmitting agents' power this step, mW.
    pub power_mw: f64,
    pub positions: Vec<Point>,
    /// Agents that performed a position update this step.
    pub triggered: Vec<usize>,
}

impl StepMetrics {
    /// Step power in dBm; a silent step (0 mW) maps to -inf.
    pub fn power_dbm(&self) -> f64 {
        mw_to_dbm(self.power_mw)
    }
}

/// A full run: the initial state plus one metrics row per step.
#[derive(Debug, Clone)]
pub struct TrajectoryLog {
    pub initial_positions: Vec<Point>,
    pub initial_h: f64,
    pub steps: Vec<StepMetrics>,
}

impl TrajectoryLog {
    pub fn final_h(&self) -> f64 {
        self.steps.last().map_or(self.initial_h, |m| m.h)
    }

    pub fn total_messages(&self) -> u64 {
        self.steps.last().map_or(0, |m| m.messages_cum)
    }

    /// Sum over steps of the linear-domain step power, mW.
    pub fn total_power_mw(&self) -> f64 {
        self.steps.iter().map(|m| m.power_mw).sum()
    }
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(0.1 * dbm)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    if mw > 0.0 {
        10.0 * mw.log10()
    } else {
        f64::NEG_INFINITY
    }
}

/// The k-order coverage objective: for every cell of the k-order partition,
/// the density-weighted squared distances to its k responsible agents,
/// averaged by 1/k.
pub fn objective_eval(
    positions: &[Point],
    k: usize,
    domain: &ConvexPolygon,
    phi: &DensityField,
) -> Result<f64> {
    let diagram = korder_diagram(positions, k, domain)?;
    Ok(objective_from_diagram(&diagram, positions, phi))
}

pub fn objective_from_diagram(
    diagram: &KOrderDiagram,
    positions: &[Point],
    phi: &DensityField,
) -> f64 {
    let mut total = 0.0;
    for (index, cell) in diagram.cells() {
        if cell.is_empty() {
            continue;
        }
        for &i in index.ids() {
            total += cell.polar_moment(positions[i], phi);
        }
    }
    total / diagram.order() as f64
}

/// Distance of each agent to the centroid of its true dominant cell; the
/// convergence measure of the deployment.
pub fn centroid_distances(
    positions: &[Point],
    k: usize,
    domain: &ConvexPolygon,
    phi: &DensityField,
) -> Result<Vec<f64>> {
    let diagram = korder_diagram(positions, k, domain)?;
    positions
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let c = diagram.dominant_cell(i).centroid(phi)?;
            Ok(p.dist(c))
        })
        .collect()
}

/// Instantaneous request-response exchange: the requester obtains the true
/// current positions of `targets`; each pair costs one request plus one
/// response message.
pub fn service_requests(
    positions: &[Point],
    requester: usize,
    targets: &[usize],
) -> Result<(Vec<(usize, Point)>, u64)> {
    if requester >= positions.len() {
        return Err(Error::UnknownAgent(requester));
    }
    let mut responses = Vec::with_capacity(targets.len());
    for &j in targets {
        if j >= positions.len() || j == requester {
            return Err(Error::UnknownAgent(j));
        }
        responses.push((j, positions[j]));
    }
    Ok((responses, 2 * targets.len() as u64))
}

/// Transmission power of one agent reaching all `targets` this step, dBm:
/// `10 log10( sum_j beta * 10^(0.1 * P_recv + alpha * ||p_i - p_j||) )`.
/// No targets means no transmission (-inf dBm, 0 mW).
pub fn power_step(
    positions: &[Point],
    requester: usize,
    targets: &[usize],
    config: &SimConfig,
) -> f64 {
    let p = positions[requester];
    let sum_mw: f64 = targets
        .iter()
        .map(|&j| {
            let d = p.dist(positions[j]);
            config.beta * 10f64.powf(0.1 * config.p_recv_dbm + config.alpha * d)
        })
        .sum();
    mw_to_dbm(sum_mw)
}

/// Advances the world by one step and returns the metrics row. All triggers
/// are evaluated against the frozen start-of-step state, communications are
/// serviced instantaneously, and motions apply simultaneously in agent-id
/// order.
pub fn step(world: &mut WorldState, config: &SimConfig) -> Result<StepMetrics> {
    let snapshot = world.positions.clone();
    let n = config.n;
    let params = config.agent_params();
    let d_step = params.step_distance();
    let diam = config.domain.diameter();
    let mut messages = 0u64;
    let mut power_mw = 0.0f64;
    let mut triggered = Vec::new();
    let mut new_positions = snapshot.clone();

    match config.mode {
        Mode::Benchmark => {
            let diagram = korder_diagram(&snapshot, config.k, &config.domain)?;
            let targets_of: Vec<Vec<usize>> = (0..n)
                .map(|i| (0..n).filter(|&j| j != i).collect())
                .collect();
            for i in 0..n {
                let (responses, m) = service_requests(&snapshot, i, &targets_of[i])?;
                messages += m;
                power_mw += dbm_to_mw(power_step(&snapshot, i, &targets_of[i], config));
                triggered.push(i);
                let goal = diagram.dominant_cell(i).centroid(&config.phi)?;
                new_positions[i] = tbb(snapshot[i], d_step, goal, 0.0);
                // Stores are not used for benchmark decisions but are kept
                // current so mode switches and inspection stay meaningful.
                let rt = &mut world.agents[i];
                rt.store.apply_update(&responses);
                rt.store.set_own_position(new_positions[i]);
                rt.store.tick(d_step, diam);
            }
        }
        Mode::EventTriggered | Mode::SelfTriggered => {
            let self_mode = config.mode == Mode::SelfTriggered;
            let remaining = config.steps.saturating_sub(world.step);
            for i in 0..n {
                let rt = &mut world.agents[i];
                if self_mode && rt.sleep > 0 {
                    // Sleeping: follow the precomputed plan, keep aging the
                    // store exactly as the plan's simulation did.
                    rt.sleep -= 1;
                    let p = rt
                        .plan
                        .pop_front()
                        .expect("plan holds one position per sleep step");
                    rt.store.set_own_position(p);
                    rt.store.tick(d_step, diam);
                    new_positions[i] = p;
                    continue;
                }
                let mut view = match rt.wake_view.take() {
                    Some(v) => v,
                    None => agent::local_view(&rt.store, &rt.neighbors, &params)?,
                };
                if agent::trigger_fires(&view, rt.store.own_position(), config.epsilon) {
                    let found = agent::neighbor_discovery(i, &snapshot, config.k, &params)?;
                    let (responses, m) = service_requests(&snapshot, i, &found.ids)?;
                    messages += m;
                    power_mw += dbm_to_mw(power_step(&snapshot, i, &found.ids, config));
                    rt.store.apply_update(&responses);
                    rt.neighbors = found.ids;
                    triggered.push(i);
                    view = agent::local_view(&rt.store, &rt.neighbors, &params)?;
                }
                if self_mode {
                    let sim = agent::multi_step_sleep_from(
                        rt.store.clone(),
                        view,
                        &rt.neighbors,
                        &params,
                        remaining,
                    )?;
                    let t_sleep = sim.plan.t_sleep;
                    if t_sleep > 1 {
                        rt.sleep = t_sleep - 1;
                        rt.plan = sim.plan.plan.into_iter().skip(1).collect();
                    } else {
                        rt.sleep = 0;
                        rt.plan.clear();
                    }
                    // The sleep simulation ends exactly at the wake state, so
                    // its exit view is the wake step's first view.
                    rt.wake_view = (t_sleep >= 1).then_some(sim.exit_view);
                }
                match agent::apply_motion(&mut rt.store, &view, &params) {
                    Ok(out) => new_positions[i] = out.new_position,
                    Err(Error::UncertaintyExhausted) => {
                        // Guaranteed cell still empty right after an update
                        // (grid coarser than the local cell). Hold position;
                        // the forced trigger fires again next step.
                        rt.store.tick(d_step, diam);
                        new_positions[i] = snapshot[i];
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }

    world.positions = new_positions;
    world.step += 1;
    world.messages_cum += messages;

    let h = objective_eval(&world.positions, config.k, &config.domain, &config.phi)?;
    let metrics = StepMetrics {
        step: world.step,
        time_s: world.step as f64 * config.dt,
        h,
        messages_step: messages,
        messages_cum: world.messages_cum,
        power_mw,
        positions: world.positions.clone(),
        triggered,
    };

    for (i, (p_new, p_old)) in world.positions.iter().zip(snapshot.iter()).enumerate() {
        debug_assert!(
            p_new.dist(*p_old) <= d_step + 1e-9,
            "agent {i} exceeded speed limit"
        );
    }

    Ok(metrics)
}

/// Runs a full simulation from a seeded random initial configuration.
/// Identical configs produce identical logs.
pub fn run(config: &SimConfig) -> Result<TrajectoryLog> {
    let mut world = WorldState::init(config)?;
    let initial_positions = world.positions.clone();
    let initial_h = objective_eval(&world.positions, config.k, &config.domain, &config.phi)?;
    let mut steps = Vec::with_capacity(config.steps);
    let mut prev_h = initial_h;
    for _ in 0..config.steps {
        let metrics = step(&mut world, config)?;
        if config.assert_invariants {
            check_step_invariants(config, &metrics, prev_h, initial_h)?;
        }
        prev_h = metrics.h;
        steps.push(metrics);
    }
    Ok(TrajectoryLog {
        initial_positions,
        initial_h,
        steps,
    })
}

fn check_step_invariants(
    config: &SimConfig,
    metrics: &StepMetrics,
    prev_h: f64,
    initial_h: f64,
) -> Result<()> {
    if metrics.h > prev_h + H_MONOTONE_TOL * initial_h {
        return Err(Error::InvariantViolation {
            step: metrics.step,
            what: format!(
                "objective increased: {:.9e} -> {:.9e} (tol {:.3e})",
                prev_h,
                metrics.h,
                H_MONOTONE_TOL * initial_h
            ),
        });
    }
    for (i, p) in metrics.positions.iter().enumerate() {
        if !config.domain.contains_with_tol(*p, 1e-7) {
            return Err(Error::InvariantViolation {
                step: metrics.step,
                what: format!("agent {i} left the domain at ({}, {})", p.x, p.y),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config(mode: Mode) -> SimConfig {
        SimConfig {
            n: 4,
            k: 2,
            grid_res: 64,
            steps: 60,
            seed: 11,
            mode,
            assert_invariants: true,
            ..SimConfig::default()
        }
    }

    #[test]
    fn objective_single_agent_at_square_center() {
        let domain = ConvexPolygon::rect(0.0, 0.0, 1.0, 1.0).unwrap();
        let phi = DensityField::Uniform(1.0);
        let h = objective_eval(&[Point::new(0.5, 0.5)], 1, &domain, &phi).unwrap();
        assert!((h - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn service_requests_counts_pairs() {
        let positions = vec![Point::new(0.0, 0.0); 5];
        let (resp, m) = service_requests(&positions, 0, &[1, 2, 3, 4]).unwrap();
        assert_eq!(m, 8);
        assert_eq!(resp.len(), 4);
        let (_, zero) = service_requests(&positions, 0, &[]).unwrap();
        assert_eq!(zero, 0);
        assert!(service_requests(&positions, 0, &[0]).is_err());
    }

    #[test]
    fn power_single_target_reference_value() {
        let config = SimConfig::default();
        let positions = vec![Point::new(0.0, 0.0), Point::new(10.0, 0.0)];
        // beta = 1, P_recv = 0 dBm, alpha = 0.1, distance 10 -> 10 dBm.
        let dbm = power_step(&positions, 0, &[1], &config);
        assert!((dbm - 10.0).abs() < 1e-12);
        assert_eq!(power_step(&positions, 0, &[], &config), f64::NEG_INFINITY);
    }

    #[test]
    fn power_two_equidistant_targets() {
        let config = SimConfig::default();
        let d = 7.0;
        let positions = vec![
            Point::new(0.0, 0.0),
            Point::new(d, 0.0),
            Point::new(-d, 0.0),
        ];
        let dbm = power_step(&positions, 0, &[1, 2], &config);
        let expect = 10.0 * (2.0 * 10f64.powf(config.alpha * d)).log10();
        assert!((dbm - expect).abs() < 1e-12);
        // Doubling alpha strictly increases power at positive distance.
        let crank = SimConfig {
            alpha: 0.2,
            ..SimConfig::default()
        };
        assert!(power_step(&positions, 0, &[1, 2], &crank) > dbm);
    }

    #[test]
    fn benchmark_run_is_monotone_and_bounded() {
        let config = small_config(Mode::Benchmark);
        let log = run(&config).unwrap();
        assert_eq!(log.steps.len(), config.steps);
        let mut prev = log.initial_h;
        for m in &log.steps {
            assert!(m.h <= prev + 1e-6 * log.initial_h);
            prev = m.h;
            assert_eq!(m.messages_step, 2 * 4 * 3);
            for p in &m.positions {
                assert!(config.domain.contains_with_tol(*p, 1e-7));
            }
        }
    }

    #[test]
    fn per_step_displacement_bounded() {
        let config = small_config(Mode::SelfTriggered);
        let log = run(&config).unwrap();
        let d = config.v_max * config.dt;
        let mut prev = log.initial_positions.clone();
        for m in &log.steps {
            for (a, b) in m.positions.iter().zip(prev.iter()) {
                assert!(a.dist(*b) <= d + 1e-9);
            }
            prev = m.positions.clone();
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let config = small_config(Mode::SelfTriggered);
        let a = run(&config).unwrap();
        let b = run(&config).unwrap();
        assert_eq!(a.initial_positions, b.initial_positions);
        assert_eq!(a.steps.len(), b.steps.len());
        for (x, y) in a.steps.iter().zip(b.steps.iter()) {
            assert_eq!(x.positions, y.positions);
            assert_eq!(x.messages_cum, y.messages_cum);
            assert!(x.h == y.h && x.power_mw == y.power_mw);
        }
    }

    #[test]
    fn triggered_modes_use_fewer_messages_than_benchmark() {
        let bench = run(&small_config(Mode::Benchmark)).unwrap();
        let event = run(&small_config(Mode::EventTriggered)).unwrap();
        let selft = run(&small_config(Mode::SelfTriggered)).unwrap();
        assert!(event.total_messages() <= bench.total_messages());
        assert!(selft.total_messages() <= event.total_messages());
    }

    #[test]
    fn messages_cum_is_nondecreasing() {
        let log = run(&small_config(Mode::EventTriggered)).unwrap();
        let mut prev = 0;
        for m in &log.steps {
            assert!(m.messages_cum >= prev);
            prev = m.messages_cum;
        }
    }

    #[test]
    fn validate_rejects_bad_configs() {
        let mut c = SimConfig::default();
        c.k = 5;
        assert!(c.validate().is_err());
        let mut c = SimConfig::default();
        c.grid_res = 8;
        assert!(c.validate().is_err());
        let mut c = SimConfig::default();
        c.dt = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn dbm_mw_roundtrip() {
        assert!((dbm_to_mw(10.0) - 10.0).abs() < 1e-12);
        assert!((mw_to_dbm(10.0) - 10.0).abs() < 1e-12);
        assert_eq!(mw_to_dbm(0.0), f64::NEG_INFINITY);
        assert_eq!(dbm_to_mw(f64::NEG_INFINITY), 0.0);
    }
}
