//! Builders for the drone's lookahead problems: scenario rollouts from
//! sampled worlds (Thompson-sampling style) and deterministic belief drift
//! with interval-estimation rewards.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dp::{LookaheadProblem, ReachGraph};
use super::{DronePolicyParams, DroneState};
use crate::belief::{drift_belief, post_decision_belief, BeliefParams, BeliefState};
use crate::error::Result;
use crate::fire::{apply_extinguish_zones, sample_kernel_adjacency, step_env, EnvState};
use crate::footprint::{footprint_sums, Disk};
use crate::heli::{self, HeliPolicyParams};
use crate::par;
use crate::region::{sample_wind, RegionGrid, WindModelParams, WindState, ZoneId};
use crate::sampler::{sample_fuel_state, sample_ignition_with, window_cov};

/// What the drone assumes about the world when looking ahead.
#[derive(Clone, Copy, Debug)]
pub struct LookaheadModel<'a> {
    pub grid: &'a RegionGrid,
    pub reach: &'a ReachGraph,
    pub belief: &'a BeliefParams,
    pub heli: &'a HeliPolicyParams,
    pub wind: &'a WindModelParams,
    pub c_fail: f64,
}

/// Turns per-zone stage rewards into footprint-summed node rewards and
/// charges `c_fail` wherever home is out of reach for the battery left after
/// that stage.
fn node_rewards(
    zone_reward: &[Vec<f64>],
    obs_disk: &Disk,
    s: &DroneState,
    dt_min: f64,
    m: &LookaheadModel,
) -> Vec<Vec<f64>> {
    let n = s.battery_steps(dt_min);
    zone_reward
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let left = n.saturating_sub(k + 1);
            let mut r = footprint_sums(m.grid, obs_disk, c);
            for z in m.grid.zones() {
                if m.reach.hops_home(z) > left {
                    r[z.0] -= m.c_fail;
                }
            }
            r
        })
        .collect()
}

fn problem(
    node_reward: Vec<Vec<f64>>,
    pair_weight: Option<Vec<Vec<f64>>>,
    obs_disk: Disk,
    s: &DroneState,
    dt_min: f64,
    m: &LookaheadModel,
) -> LookaheadProblem {
    LookaheadProblem {
        node_reward,
        pair_weight,
        obs_disk,
        start: s.position,
        home: m.reach.home(),
        battery_steps: s.battery_steps(dt_min),
        c_fail: m.c_fail,
    }
}

/// Belief that puts all mass on a concrete state.
pub fn point_belief(state: &EnvState, grid: &RegionGrid) -> BeliefState {
    let frac = |v: &[u32]| -> Vec<f64> { grid.zones().map(|z| v[z.0] as f64 / grid.fuel(z).eta as f64).collect() };
    BeliefState {
        pk: state.k.iter().map(|k| if *k { 1.0 } else { 0.0 }).collect(),
        pq: frac(&state.q),
        ph: frac(&state.h),
        pd: frac(&state.d),
        extinguished: state.extinguished.clone(),
        t: state.t,
        window: Vec::new(),
    }
}

/// Per-scenario, per-stage marginal burning cost `r (Q_{k+1} - Qx_k)`.
fn rollout(world: EnvState, wind0: WindState, h: usize, m: &LookaheadModel, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let grid = m.grid;
    let cutoff = m.belief.cutoff_m(grid);
    let mut state = world;
    let mut wind = wind0;
    let mut out = Vec::with_capacity(h);
    for k in 0..h {
        let post = if k == 0 {
            state
        } else {
            let pb = point_belief(&state, grid);
            match heli::decide(m.heli, &pb, wind.direction_phi, m.belief, grid) {
                Some(d) => apply_extinguish_zones(&state, &grid.neighbors_within(d.target, m.heli.radius_m)),
                None => state,
            }
        };
        wind = sample_wind(m.wind, &wind, rng);
        let adj = sample_kernel_adjacency(&post, wind.direction_phi, &m.belief.kernel, grid, cutoff, rng);
        let next = step_env(&post, &adj, &[], grid);
        out.push(
            grid.zones()
                .map(|z| grid.fuel(z).r * (next.q[z.0] as f64 - post.q[z.0] as f64))
                .collect(),
        );
        state = next;
    }
    out
}

/// Lookahead from `m_scenarios` worlds sampled from the (post-decision)
/// belief and rolled forward under the assumed spread kernel, with the
/// helicopter policy acting inside each scenario from the second stage on.
pub fn build_lookahead_ts<R: Rng + ?Sized>(
    s: &DroneState,
    params: &DronePolicyParams,
    m: &LookaheadModel,
    rng: &mut R,
) -> Result<LookaheadProblem> {
    let grid = m.grid;
    let h = params.horizon.min(s.battery_steps(params.dt_min));
    let cov = window_cov(&s.belief, &m.belief.gpc, grid)?;
    let seeds: Vec<u64> = (0..params.m_scenarios).map(|_| rng.random()).collect();
    let per_scenario = par::map(&seeds, params.parallel, |seed| {
        let mut r = ChaCha8Rng::seed_from_u64(*seed);
        let k = sample_ignition_with(&s.belief, cov.as_ref(), &mut r);
        let world = sample_fuel_state(&s.belief, &k, grid, &mut r).to_env_state(&s.belief.extinguished, s.belief.t);
        rollout(world, s.wind, h, m, &mut r)
    });
    let inv = 1.0 / params.m_scenarios as f64;
    let mut zone_reward = vec![vec![0.0; grid.len()]; h];
    for sc in &per_scenario {
        for (acc, stage) in zone_reward.iter_mut().zip(sc) {
            for (a, v) in acc.iter_mut().zip(stage) {
                *a += v * inv;
            }
        }
    }
    let obs_disk = Disk::for_grid(grid, params.rho_obs_m);
    let node = node_rewards(&zone_reward, &obs_disk, s, params.dt_min, m);
    Ok(problem(node, None, obs_disk, s, params.dt_min, m))
}

/// Per-stage `(mu, sigma)` maps of the deterministic belief drift.
pub fn ie_stage_maps(s: &DroneState, h: usize, m: &LookaheadModel) -> Vec<(Vec<f64>, Vec<f64>)> {
    let grid = m.grid;
    let phi = s.wind.direction_phi;
    let mut b = s.belief.clone();
    let mut out = Vec::with_capacity(h);
    for k in 0..h {
        let bx = if k == 0 {
            b
        } else {
            match heli::decide(m.heli, &b, phi, m.belief, grid) {
                Some(d) => post_decision_belief(&b, &grid.neighbors_within(d.target, m.heli.radius_m)),
                None => b,
            }
        };
        let (next, _) = drift_belief(&bx, phi, m.belief, grid);
        let mut mu = vec![0.0; grid.len()];
        let mut sigma = vec![0.0; grid.len()];
        for z in grid.zones() {
            let f = grid.fuel(z);
            let eta = f.eta as f64;
            let q = next.pq[z.0];
            mu[z.0] = f.r * eta * (q - bx.pq[z.0]);
            sigma[z.0] = f.r * (eta * q * (1.0 - q)).max(0.0).sqrt();
        }
        out.push((mu, sigma));
        b = next;
    }
    out
}

/// Lookahead on the deterministic belief drift with interval-estimation
/// rewards `mu + theta_k sigma` and a consecutive-footprint overlap penalty
/// `theta_k sigma`.
pub fn build_lookahead_ie(s: &DroneState, params: &DronePolicyParams, m: &LookaheadModel) -> LookaheadProblem {
    let grid = m.grid;
    let h = params.horizon.min(s.battery_steps(params.dt_min));
    let maps = ie_stage_maps(s, h, m);
    let mut zone_reward = Vec::with_capacity(h);
    let mut weights = Vec::with_capacity(h);
    for (k, (mu, sigma)) in maps.into_iter().enumerate() {
        let theta = params.theta_ie_at(k);
        zone_reward.push(mu.iter().zip(&sigma).map(|(a, b)| a + theta * b).collect::<Vec<f64>>());
        weights.push(sigma.iter().map(|v| theta * v).collect::<Vec<f64>>());
    }
    let obs_disk = Disk::for_grid(grid, params.rho_obs_m);
    let node = node_rewards(&zone_reward, &obs_disk, s, params.dt_min, m);
    let any_weight = weights.iter().flatten().any(|w| *w != 0.0);
    problem(node, any_weight.then_some(weights), obs_disk, s, params.dt_min, m)
}

/// First zone of `path`, or `start` when the horizon is empty.
pub(crate) fn first_or(path: &[ZoneId], start: ZoneId) -> ZoneId {
    path.first().copied().unwrap_or(start)
}
