//! Per-agent state and decision procedures: the data store of last-known
//! positions with uncertainty radii, the motion control law, the one-step
//! update trigger, multi-step sleep scheduling, and localized neighbor
//! discovery.

use crate::geometry::{tbb, ConvexPolygon, DensityField, Point};
use crate::partition::{self, UncertainSite};
use crate::{Error, Result};

/// Last-known position and uncertainty radius for one agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoreEntry {
    pub position: Point,
    pub radius: f64,
}

/// Agent i's record of every agent in the network: entry j holds the last
/// position received from j and a radius bounding how far j may have moved
/// since. The owner's own entry always has radius 0.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentStore {
    owner: usize,
    entries: Vec<StoreEntry>,
}

impl AgentStore {
    /// A fresh store: the owner knows its own position; every other entry
    /// starts fully stale at `unknown_radius` (typically the domain
    /// diameter) with a placeholder position.
    pub fn new(owner: usize, n: usize, own_position: Point, unknown_radius: f64) -> Result<Self> {
        if owner >= n {
            return Err(Error::UnknownAgent(owner));
        }
        let mut entries = vec![
            StoreEntry {
                position: own_position,
                radius: unknown_radius,
            };
            n
        ];
        entries[owner].radius = 0.0;
        Ok(AgentStore { owner, entries })
    }

    pub fn owner(&self) -> usize {
        self.owner
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, id: usize) -> Result<StoreEntry> {
        self.entries.get(id).copied().ok_or(Error::UnknownAgent(id))
    }

    pub fn own_position(&self) -> Point {
        self.entries[self.owner].position
    }

    pub fn set_own_position(&mut self, p: Point) {
        self.entries[self.owner].position = p;
        self.entries[self.owner].radius = 0.0;
    }

    /// Time-evolution update: every non-owner radius grows by `d` and is
    /// clamped at `max_radius` (the domain diameter); the owner stays exact.
    pub fn tick(&mut self, d: f64, max_radius: f64) {
        debug_assert!(d >= 0.0);
        for (j, e) in self.entries.iter_mut().enumerate() {
            if j != self.owner {
                e.radius = (e.radius + d).min(max_radius);
            }
        }
    }

    /// Position update: responding agents' entries are replaced by their
    /// reported positions with radius reset to zero.
    pub fn apply_update(&mut self, responses: &[(usize, Point)]) {
        for &(j, p) in responses {
            if j < self.entries.len() && j != self.owner {
                self.entries[j] = StoreEntry {
                    position: p,
                    radius: 0.0,
                };
            }
        }
    }

    /// Extraction map: the stored sites for the requested ids, in order.
    pub fn extract(&self, ids: &[usize]) -> Result<Vec<UncertainSite>> {
        ids.iter()
            .map(|&j| {
                self.entry(j).map(|e| UncertainSite {
                    center: e.position,
                    radius: e.radius,
                })
            })
            .collect()
    }

    /// Location map: all stored positions, radii discarded.
    pub fn positions(&self) -> Vec<Point> {
        self.entries.iter().map(|e| e.position).collect()
    }
}

/// Everything the per-agent procedures need from the simulation config.
#[derive(Debug, Clone, Copy)]
pub struct AgentParams<'a> {
    pub k: usize,
    pub domain: &'a ConvexPolygon,
    pub phi: &'a DensityField,
    pub grid_res: usize,
    pub v_max: f64,
    pub dt: f64,
    pub epsilon: f64,
    pub gamma: f64,
}

impl AgentParams<'_> {
    pub fn step_distance(&self) -> f64 {
        self.v_max * self.dt
    }
}

/// What an agent can tell from its own store: the centroid of its guaranteed
/// cell (None when the cell has vanished) and the `bnd` safety radius.
#[derive(Debug, Clone, Copy)]
pub struct LocalView {
    pub goal: Option<Point>,
    pub bound: f64,
}

/// Builds the guaranteed / dual-guaranteed cells from the store restricted
/// to `{owner} ∪ neighbors` and reduces them to goal + bound. Stale agents
/// outside the discovered neighbor set do not participate.
pub fn local_view(
    store: &AgentStore,
    neighbors: &[usize],
    params: &AgentParams,
) -> Result<LocalView> {
    let mut ids = Vec::with_capacity(neighbors.len() + 1);
    ids.push(store.owner());
    ids.extend_from_slice(neighbors);
    let sites = store.extract(&ids)?;
    let summary = partition::uncertain_cells_summary(
        0,
        &sites,
        params.k,
        params.domain,
        params.grid_res,
        params.phi,
    )?;
    let bound = summary.bound()?;
    Ok(LocalView {
        goal: summary.g_centroid(),
        bound,
    })
}

/// Update trigger: fires when the uncertainty bound reaches the distance to
/// the guaranteed centroid, clamped below by epsilon. A vanished guaranteed
/// cell forces the trigger.
pub fn trigger_fires(view: &LocalView, own_position: Point, epsilon: f64) -> bool {
    match view.goal {
        None => true,
        Some(q) => view.bound >= own_position.dist(q).max(epsilon),
    }
}

/// One-step-ahead update policy: should the agent request fresh positions
/// right now?
pub fn one_step_update_check(
    store: &AgentStore,
    neighbors: &[usize],
    params: &AgentParams,
) -> Result<bool> {
    let view = local_view(store, neighbors, params)?;
    Ok(trigger_fires(&view, store.own_position(), params.epsilon))
}

/// Result of one motion step.
#[derive(Debug, Clone, Copy)]
pub struct MotionOutcome {
    pub new_position: Point,
    pub moved_distance: f64,
    pub goal: Point,
    pub bound: f64,
}

/// Applies the motion law for an already-computed view: move toward the
/// guaranteed centroid, stopping at the `bnd` ball, then age the store by
/// one step.
pub fn apply_motion(
    store: &mut AgentStore,
    view: &LocalView,
    params: &AgentParams,
) -> Result<MotionOutcome> {
    let goal = view.goal.ok_or(Error::UncertaintyExhausted)?;
    let p = store.own_position();
    let d = params.step_distance();
    let new_position = tbb(p, d, goal, view.bound);
    store.set_own_position(new_position);
    store.tick(d, params.domain.diameter());
    Ok(MotionOutcome {
        new_position,
        moved_distance: p.dist(new_position),
        goal,
        bound: view.bound,
    })
}

/// Motion control law driven straight from the store.
pub fn motion_step(
    store: &mut AgentStore,
    neighbors: &[usize],
    params: &AgentParams,
) -> Result<MotionOutcome> {
    let view = local_view(store, neighbors, params)?;
    apply_motion(store, &view, params)
}

/// A precomputed sleep schedule: the agent may take `t_sleep` steps (moving
/// through `plan`) before the update trigger can fire.
#[derive(Debug, Clone)]
pub struct SleepPlan {
    pub t_sleep: usize,
    pub plan: Vec<Point>,
}

/// Multiple-steps-ahead policy: simulate the agent's own future under the
/// motion law with no new information (radii keep growing) until the trigger
/// fires, and return how many steps that took. `max_steps` caps the
/// simulation; the returned plan holds one position per sleep step.
pub fn multi_step_sleep(
    store: &AgentStore,
    neighbors: &[usize],
    params: &AgentParams,
    max_steps: usize,
) -> Result<SleepPlan> {
    let view = local_view(store, neighbors, params)?;
    Ok(multi_step_sleep_from(store.clone(), view, neighbors, params, max_steps)?.plan)
}

/// Sleep simulation output: the plan plus the view of the state the agent
/// will be in when it wakes, so the wake step can skip recomputing it.
pub(crate) struct SleepSim {
    pub plan: SleepPlan,
    pub exit_view: LocalView,
}

/// Same as [`multi_step_sleep`] but reuses a view already computed for the
/// current state, so the simulator never evaluates the same grid pass twice.
pub(crate) fn multi_step_sleep_from(
    mut sim: AgentStore,
    mut view: LocalView,
    neighbors: &[usize],
    params: &AgentParams,
    max_steps: usize,
) -> Result<SleepSim> {
    let mut plan = Vec::new();
    loop {
        if trigger_fires(&view, sim.own_position(), params.epsilon) || plan.len() >= max_steps {
            return Ok(SleepSim {
                plan: SleepPlan {
                    t_sleep: plan.len(),
                    plan,
                },
                exit_view: view,
            });
        }
        let out = apply_motion(&mut sim, &view, params)?;
        plan.push(out.new_position);
        view = local_view(&sim, neighbors, params)?;
    }
}

/// The communication radius and the agents found inside it.
#[derive(Debug, Clone)]
pub struct NeighborSet {
    pub ids: Vec<usize>,
    pub rho: f64,
}

const DISCOVERY_SAMPLES: usize = 128;

/// Localized neighbor discovery: grow the communication radius in steps of
/// `gamma` until every sampled point of the circle of radius `rho/2` around
/// the agent (restricted to the domain) already has at least k discovered
/// agents strictly closer to it than the agent itself. The returned set then
/// suffices to build the agent's dominant cell. If the radius exceeds twice
/// the domain diameter without terminating, all agents are returned.
pub fn neighbor_discovery(
    agent: usize,
    positions: &[Point],
    k: usize,
    params: &AgentParams,
) -> Result<NeighborSet> {
    let n = positions.len();
    if agent >= n {
        return Err(Error::UnknownAgent(agent));
    }
    if n <= k {
        return Err(Error::InvalidConfig(format!(
            "discovery needs n > k (n = {n}, k = {k})"
        )));
    }
    if !(params.gamma > 0.0) {
        return Err(Error::InvalidConfig("gamma must be > 0".into()));
    }
    let p = positions[agent];
    let limit = 2.0 * params.domain.diameter();
    let mut rho = 0.0;
    loop {
        rho += params.gamma;
        if rho > limit {
            let ids: Vec<usize> = (0..n).filter(|&j| j != agent).collect();
            return Ok(NeighborSet { ids, rho });
        }
        let ids: Vec<usize> = (0..n)
            .filter(|&j| j != agent && positions[j].dist(p) < rho)
            .collect();
        let mut covered = true;
        for s in 0..DISCOVERY_SAMPLES {
            let theta = 2.0 * std::f64::consts::PI * s as f64 / DISCOVERY_SAMPLES as f64;
            let q = Point::new(p.x + 0.5 * rho * theta.cos(), p.y + 0.5 * rho * theta.sin());
            if !params.domain.contains(q) {
                continue;
            }
            let dq = q.dist(p);
            let closer = ids.iter().filter(|&&j| positions[j].dist(q) < dq).count();
            if closer < k {
                covered = false;
                break;
            }
        }
        if covered {
            return Ok(NeighborSet { ids, rho });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::EPS;
    use crate::partition::dominant_cell;

    fn square50() -> ConvexPolygon {
        ConvexPolygon::rect(0.0, 0.0, 50.0, 50.0).unwrap()
    }

    fn uniform() -> DensityField {
        DensityField::uniform(1.0).unwrap()
    }

    fn params<'a>(domain: &'a ConvexPolygon, phi: &'a DensityField) -> AgentParams<'a> {
        AgentParams {
            k: 2,
            domain,
            phi,
            grid_res: 128,
            v_max: 1.0,
            dt: 0.1,
            epsilon: 2.5,
            gamma: 2.0,
        }
    }

    #[test]
    fn store_tick_grows_and_clamps() {
        let s = square50();
        let diam = s.diameter();
        let mut store = AgentStore::new(0, 3, Point::new(5.0, 5.0), diam).unwrap();
        store.apply_update(&[(1, Point::new(10.0, 10.0)), (2, Point::new(20.0, 20.0))]);
        store.tick(0.1, diam);
        assert!((store.entry(1).unwrap().radius - 0.1).abs() < 1e-12);
        assert_eq!(store.entry(0).unwrap().radius, 0.0, "owner stays exact");
        for _ in 0..2000 {
            store.tick(0.1, diam);
        }
        assert_eq!(store.entry(1).unwrap().radius, diam, "clamped at diameter");
    }

    #[test]
    fn store_update_resets_only_responders() {
        let s = square50();
        let mut store = AgentStore::new(0, 3, Point::new(5.0, 5.0), s.diameter()).unwrap();
        store.apply_update(&[(1, Point::new(10.0, 10.0))]);
        assert_eq!(store.entry(1).unwrap().radius, 0.0);
        assert_eq!(store.entry(2).unwrap().radius, s.diameter());
        let before = store.clone();
        store.apply_update(&[]);
        assert_eq!(store, before, "empty response list changes nothing");
    }

    #[test]
    fn extract_full_and_own() {
        let s = square50();
        let store = AgentStore::new(1, 3, Point::new(5.0, 5.0), s.diameter()).unwrap();
        let all = store.extract(&[0, 1, 2]).unwrap();
        assert_eq!(all.len(), 3);
        let own = store.extract(&[1]).unwrap();
        assert_eq!(own[0].radius, 0.0);
        assert_eq!(own[0].center, Point::new(5.0, 5.0));
        assert_eq!(store.extract(&[7]).unwrap_err(), Error::UnknownAgent(7));
    }

    #[test]
    fn fresh_update_moves_straight_toward_exact_centroid() {
        let s = square50();
        let phi = uniform();
        let prm = params(&s, &phi);
        let positions = [
            Point::new(10.0, 10.0),
            Point::new(40.0, 12.0),
            Point::new(25.0, 38.0),
        ];
        let mut store = AgentStore::new(0, 3, positions[0], s.diameter()).unwrap();
        store.apply_update(&[(1, positions[1]), (2, positions[2])]);
        let out = motion_step(&mut store, &[1, 2], &prm).unwrap();
        // bnd is only the grid boundary layer here, and the motion is a full
        // step toward (close to) the exact dominant centroid.
        let w = dominant_cell(0, &positions, 2, &s).unwrap();
        let c = w.centroid(&phi).unwrap();
        assert!(out.moved_distance <= prm.step_distance() + 1e-12);
        assert!((out.moved_distance - prm.step_distance()).abs() < 1e-9);
        assert!(out.goal.dist(c) < 0.5, "grid goal near exact centroid");
        let dir_exact = (c - positions[0]) * (1.0 / (c - positions[0]).norm());
        let dir_moved = (out.new_position - positions[0]) * (1.0 / out.moved_distance.max(1e-12));
        assert!(dir_exact.dot(dir_moved) > 0.999);
    }

    #[test]
    fn motion_errors_when_uncertainty_exhausted() {
        let s = square50();
        let phi = uniform();
        let prm = params(&s, &phi);
        // All other radii at the diameter: guaranteed cell is empty.
        let mut store = AgentStore::new(0, 4, Point::new(25.0, 25.0), s.diameter()).unwrap();
        let err = motion_step(&mut store, &[1, 2, 3], &prm).unwrap_err();
        assert_eq!(err, Error::UncertaintyExhausted);
        assert!(one_step_update_check(&store, &[1, 2, 3], &prm).unwrap());
    }

    #[test]
    fn no_trigger_right_after_full_update() {
        let s = square50();
        let phi = uniform();
        let prm = params(&s, &phi);
        let positions = [
            Point::new(12.0, 15.0),
            Point::new(38.0, 14.0),
            Point::new(26.0, 36.0),
            Point::new(8.0, 40.0),
        ];
        let mut store = AgentStore::new(0, 4, positions[0], s.diameter()).unwrap();
        store.apply_update(&[(1, positions[1]), (2, positions[2]), (3, positions[3])]);
        assert!(!one_step_update_check(&store, &[1, 2, 3], &prm).unwrap());
    }

    #[test]
    fn sleep_matches_iterated_one_step_checks() {
        let s = square50();
        let phi = uniform();
        let prm = params(&s, &phi);
        let positions = [
            Point::new(12.0, 15.0),
            Point::new(38.0, 14.0),
            Point::new(26.0, 36.0),
        ];
        let mut store = AgentStore::new(0, 3, positions[0], s.diameter()).unwrap();
        store.apply_update(&[(1, positions[1]), (2, positions[2])]);
        let neighbors = [1usize, 2];

        let sleep = multi_step_sleep(&store, &neighbors, &prm, 500).unwrap();

        // Replay with explicit one-step checks.
        let mut replay = store.clone();
        let mut t = 0usize;
        loop {
            if one_step_update_check(&replay, &neighbors, &prm).unwrap() || t >= 500 {
                break;
            }
            motion_step(&mut replay, &neighbors, &prm).unwrap();
            t += 1;
        }
        assert_eq!(sleep.t_sleep, t, "sleep horizon equals first trigger step");
        assert_eq!(sleep.plan.len(), sleep.t_sleep);
        assert!(sleep.t_sleep > 0, "fresh store should allow some sleep");
    }

    #[test]
    fn sleep_zero_when_trigger_already_fires() {
        let s = square50();
        let phi = uniform();
        let prm = params(&s, &phi);
        let store = AgentStore::new(0, 3, Point::new(25.0, 25.0), s.diameter()).unwrap();
        let sleep = multi_step_sleep(&store, &[1, 2], &prm, 100).unwrap();
        assert_eq!(sleep.t_sleep, 0);
        assert!(sleep.plan.is_empty());
    }

    #[test]
    fn discovery_returns_all_when_n_is_k_plus_one() {
        let s = square50();
        let phi = uniform();
        let prm = params(&s, &phi);
        let positions = [
            Point::new(10.0, 10.0),
            Point::new(40.0, 12.0),
            Point::new(25.0, 38.0),
        ];
        let found = neighbor_discovery(0, &positions, 2, &prm).unwrap();
        assert_eq!(found.ids, vec![1, 2]);
    }

    #[test]
    fn discovery_set_reproduces_dominant_cell() {
        let s = square50();
        let phi = uniform();
        let prm = params(&s, &phi);
        // Agent 0 tucked in a corner, the rest clustered far away.
        let positions = [
            Point::new(3.0, 3.0),
            Point::new(40.0, 42.0),
            Point::new(44.0, 38.0),
            Point::new(38.0, 44.0),
            Point::new(42.0, 40.0),
            Point::new(45.0, 45.0),
        ];
        let found = neighbor_discovery(0, &positions, 2, &prm).unwrap();
        // Full-information dominant cell.
        let w_full = dominant_cell(0, &positions, 2, &s).unwrap();
        // Dominant cell over the discovered subset only.
        let mut subset = vec![positions[0]];
        subset.extend(found.ids.iter().map(|&j| positions[j]));
        let w_sub = dominant_cell(0, &subset, 2, &s).unwrap();
        // Same region: compare by sampling.
        let mut mismatches = 0usize;
        for gx in 0..60 {
            for gy in 0..60 {
                let q = Point::new(gx as f64 * 50.0 / 59.0, gy as f64 * 50.0 / 59.0);
                if w_full.contains(q) != w_sub.contains(q) {
                    mismatches += 1;
                }
            }
        }
        assert!(
            mismatches <= 2,
            "discovered set must reproduce the dominant cell ({mismatches} mismatches)"
        );
        let area_diff = (w_full.area() - w_sub.area()).abs();
        assert!(area_diff < 1e-6 * s.area());
    }

    #[test]
    fn view_bound_nonnegative_and_owner_radius_invariant() {
        let s = square50();
        let phi = uniform();
        let prm = params(&s, &phi);
        let mut store = AgentStore::new(2, 4, Point::new(20.0, 30.0), s.diameter()).unwrap();
        store.apply_update(&[
            (0, Point::new(10.0, 10.0)),
            (1, Point::new(40.0, 15.0)),
            (3, Point::new(30.0, 45.0)),
        ]);
        for _ in 0..50 {
            let view = local_view(&store, &[0, 1, 3], &prm).unwrap();
            assert!(view.bound >= 0.0);
            if view.goal.is_none() {
                break;
            }
            apply_motion(&mut store, &view, &prm).unwrap();
            assert_eq!(store.entry(2).unwrap().radius, 0.0);
            assert!(store.entry(0).unwrap().radius <= s.diameter() + EPS);
        }
    }
}
