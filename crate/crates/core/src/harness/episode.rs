//! One seeded episode of the helicopter, drone and environment loop.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{PolicySet, ScenarioConfig, WindSource, SQ_M_PER_ACRE};
use crate::belief::{advance_belief, post_decision_belief, BeliefParams, BeliefState, PIPELINE};
use crate::drone::{self, DroneState, LookaheadModel, ReachGraph};
use crate::error::{Error, Result};
use crate::fire::{apply_extinguish_zones, observe, sample_adjacency, sample_spotting, step_cost, step_env, EnvState};
use crate::heli;
use crate::region::{sample_wind, RegionGrid, WindModelParams, WindState, ZoneId};

/// Independent random streams of one episode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Init = 1,
    Env = 2,
    Wind = 3,
    Sensor = 4,
    Policy = 5,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Loaded region and wind inputs shared by all episodes of a scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub cfg: ScenarioConfig,
    pub grid: RegionGrid,
    pub wind_series: Option<Vec<WindState>>,
}

impl Scenario {
    pub fn new(cfg: ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = cfg.build_region()?;
        let wind_series = cfg.wind_series()?;
        Ok(Self { cfg, grid, wind_series })
    }

    fn initial_wind(&self) -> WindState {
        match (&self.wind_series, &self.cfg.wind) {
            (Some(s), _) => s[0],
            (
                None,
                WindSource::Model {
                    initial_speed_mps,
                    initial_direction_deg,
                    ..
                },
            ) => WindState::new(*initial_speed_mps, initial_direction_deg.to_radians()),
            (None, WindSource::File { .. }) => WindState::calm(),
        }
    }

    fn next_wind<R: Rng + ?Sized>(&self, t: usize, prev: &WindState, rng: &mut R) -> WindState {
        match &self.wind_series {
            Some(s) => s[(t + 1).min(s.len() - 1)],
            None => sample_wind(&self.wind_model(), prev, rng),
        }
    }

    /// Wind model the drone assumes in its lookahead.
    pub fn wind_model(&self) -> WindModelParams {
        match &self.cfg.wind {
            WindSource::Model { params, .. } => *params,
            WindSource::File { .. } => WindModelParams::default(),
        }
    }

    pub fn belief_params(&self, policies: &PolicySet) -> BeliefParams {
        BeliefParams {
            kernel: policies.kernel,
            ..self.cfg.belief
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HeliState {
    pub last_target: Option<ZoneId>,
    pub drops: usize,
}

/// Ground truth, drone and helicopter at `t = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeInit {
    pub env: EnvState,
    pub drone: DroneState,
    pub heli: HeliState,
    pub fire_zones: Vec<ZoneId>,
}

/// Draws a connected class B fire and the radial ignition prior around its
/// centroid. Agents start at home with a full battery.
pub fn init_episode<R: Rng + ?Sized>(sc: &Scenario, battery_step_min: f64, rng: &mut R) -> Result<EpisodeInit> {
    let grid = &sc.grid;
    let spec = &sc.cfg.initial_fire;
    let home = grid.home();
    let m = spec.edge_margin_zones;
    let centers: Vec<ZoneId> = grid
        .zones()
        .filter(|z| {
            let (r, c) = grid.row_col(*z);
            r >= m
                && c >= m
                && r + m < grid.height()
                && c + m < grid.width()
                && grid.distance(*z, home) >= spec.min_home_distance_m
        })
        .collect();
    let mut env = EnvState::unburnt(grid);
    let mut fire_zones = Vec::new();
    if spec.max_zones > 0 {
        if centers.is_empty() {
            return Err(Error::Config(
                "no zone satisfies the initial fire placement constraints".into(),
            ));
        }
        let center = centers[rng.random_range(0..centers.len())];
        let target = rng.random_range(spec.min_zones.max(1)..=spec.max_zones).min(grid.len());
        fire_zones = grow_patch(grid, center, target, rng);
        for z in &fire_zones {
            let f = grid.fuel(*z);
            let hi = ((spec.max_burning_fraction * f.eta as f64).floor() as u32).max(f.q_init);
            let q = rng.random_range(f.q_init..=hi);
            env.h[z.0] = f.eta - q;
            env.q[z.0] = q;
            env.k[z.0] = q > 0;
        }
    }
    let belief = radial_prior(grid, &fire_zones, sc);
    let battery_min = battery_step_min * sc.cfg.horizon_t as f64;
    Ok(EpisodeInit {
        env,
        drone: DroneState {
            position: home,
            battery_min,
            wind: sc.initial_wind(),
            belief,
        },
        heli: HeliState::default(),
        fire_zones,
    })
}

/// Random 8-connected patch of `target` zones grown from `center`.
fn grow_patch<R: Rng + ?Sized>(grid: &RegionGrid, center: ZoneId, target: usize, rng: &mut R) -> Vec<ZoneId> {
    let mut patch = BTreeSet::from([center]);
    let mut frontier = BTreeSet::new();
    let push_neighbors = |z: ZoneId, patch: &BTreeSet<ZoneId>, frontier: &mut BTreeSet<ZoneId>| {
        let (r, c) = grid.row_col(z);
        for dr in -1isize..=1 {
            for dc in -1isize..=1 {
                let (nr, nc) = (r as isize + dr, c as isize + dc);
                if nr < 0 || nc < 0 || nr >= grid.height() as isize || nc >= grid.width() as isize {
                    continue;
                }
                let n = grid.zone(nr as usize, nc as usize);
                if !patch.contains(&n) {
                    frontier.insert(n);
                }
            }
        }
    };
    push_neighbors(center, &patch, &mut frontier);
    while patch.len() < target && !frontier.is_empty() {
        let pick = *frontier
            .iter()
            .nth(rng.random_range(0..frontier.len()))
            .expect("nonempty frontier");
        frontier.remove(&pick);
        patch.insert(pick);
        push_neighbors(pick, &patch, &mut frontier);
    }
    patch.into_iter().collect()
}

fn radial_prior(grid: &RegionGrid, fire: &[ZoneId], sc: &Scenario) -> BeliefState {
    let spec = &sc.cfg.initial_fire;
    let n = grid.len();
    if fire.is_empty() {
        return BeliefState::healthy(vec![0.0; n]);
    }
    let (mut s, mut e) = (0.0, 0.0);
    for z in fire {
        let (a, b) = grid.center(*z);
        s += a;
        e += b;
    }
    let (s, e) = (s / fire.len() as f64, e / fire.len() as f64);
    let pk: Vec<f64> = grid
        .zones()
        .map(|z| {
            let (a, b) = grid.center(z);
            let d = ((a - s).powi(2) + (b - e).powi(2)).sqrt();
            if d <= spec.prior_radius_m {
                spec.prior_peak * (-0.5 * (d / spec.prior_scale_m).powi(2)).exp()
            } else {
                0.0
            }
        })
        .collect();
    let mut b = BeliefState::healthy(pk);
    for z in grid.zones() {
        let f = grid.fuel(z);
        let lo = f.q_init as f64 / f.eta as f64;
        let frac = 0.5 * (lo + spec.max_burning_fraction.max(lo));
        let q = b.pk[z.0] * frac;
        b.pq[z.0] = q;
        b.ph[z.0] = 1.0 - q;
    }
    b
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeliefSummary {
    /// `sum r eta pQ` after the update.
    pub expected_cost: f64,
    pub pk_sum: f64,
    pub pk_max: f64,
    /// Largest `pK` inside the drop footprint right after masking.
    pub footprint_pk_after_mask: f64,
    pub window_len: usize,
    pub fallback: bool,
    pub stages: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub heli_target: Option<ZoneId>,
    pub drone_position: ZoneId,
    pub battery_min: f64,
    pub cost: f64,
    pub cumulative_cost: f64,
    pub burning_zones: usize,
    pub burned_zones: usize,
    pub belief: BeliefSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub seed: u64,
    pub policy: String,
    pub initial_fire_zones: usize,
    /// Home was within battery range of the drone's starting position.
    pub home_feasible: bool,
    pub steps: Vec<StepRecord>,
    pub cumulative_cost: f64,
    pub burned_zones: usize,
    pub acres_burned: f64,
    pub class_c: bool,
    pub drone_returned: bool,
    pub drone_failed: bool,
    pub heli_drops: usize,
}

impl EpisodeRecord {
    /// Cumulative cost after each step.
    pub fn cost_trajectory(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.cumulative_cost).collect()
    }
}

fn burned_zones(env: &EnvState) -> usize {
    env.q.iter().zip(&env.d).filter(|(q, d)| **q + **d > 0).count()
}

/// Runs one episode. The step order is: helicopter decision on the current
/// belief, drop applied, drone decision on the post-decision belief, wind and
/// spread transition, drone observation and belief update, cost.
pub fn run_episode(sc: &Scenario, policies: &PolicySet, seed: u64) -> Result<EpisodeRecord> {
    policies.validate()?;
    let grid = &sc.grid;
    let cfg = &sc.cfg;
    let dp = &policies.drone;
    let bp = sc.belief_params(policies);
    let wind_model = sc.wind_model();
    let home = grid.home();

    let mut init_rng = stream_rng(seed, Stream::Init);
    let mut env_rng = stream_rng(seed, Stream::Env);
    let mut wind_rng = stream_rng(seed, Stream::Wind);
    let mut sensor_rng = stream_rng(seed, Stream::Sensor);
    let mut policy_rng = stream_rng(seed, Stream::Policy);

    let init = init_episode(sc, dp.dt_min, &mut init_rng)?;
    let reach = ReachGraph::new(grid, dp.d_max_m, home);
    let home_feasible = reach.hops_home(init.drone.position) <= init.drone.battery_steps(dp.dt_min);
    let model = LookaheadModel {
        grid,
        reach: &reach,
        belief: &bp,
        heli: &policies.heli,
        wind: &wind_model,
        c_fail: cfg.c_fail,
    };

    let mut env = init.env;
    let mut drone_state = init.drone;
    let mut heli_state = init.heli;
    let mut steps = Vec::with_capacity(cfg.horizon_t);
    let mut cumulative = 0.0;
    let mut failed = false;

    for t in 0..cfg.horizon_t {
        let b = drone_state.belief.clone();
        let phi = drone_state.wind.direction_phi;

        let heli_decision = heli::decide(&policies.heli, &b, phi, &bp, grid);
        let footprint = heli_decision
            .map(|d| grid.neighbors_within(d.target, policies.heli.radius_m))
            .unwrap_or_default();
        if let Some(d) = heli_decision {
            heli_state.last_target = Some(d.target);
            heli_state.drops += 1;
        }
        let env_post = apply_extinguish_zones(&env, &footprint);
        let bx = post_decision_belief(&b, &footprint);
        let footprint_pk_after_mask = footprint.iter().map(|z| bx.pk[z.0]).fold(0.0, f64::max);

        let decision_state = DroneState {
            belief: bx,
            ..drone_state.clone()
        };
        let next_pos = drone::decide(&decision_state, dp, &model, &mut policy_rng)
            .map_err(|e| Error::Infeasible(format!("seed {seed}, step {t}: drone policy failed: {e}")))?;
        if !reach.can_reach(grid, drone_state.position, next_pos) {
            return Err(Error::Invariant(format!(
                "seed {seed}, step {t}: drone move {} -> {next_pos} exceeds d_max",
                drone_state.position
            )));
        }

        let wind = sc.next_wind(t, &drone_state.wind, &mut wind_rng);
        let adj = sample_adjacency(&env_post, &wind, grid, &cfg.spread, &mut env_rng);
        let spots = sample_spotting(&env_post, &wind, grid, &cfg.spread, &mut env_rng);
        let env_next = step_env(&env_post, &adj, &spots, grid);

        let obs = observe(
            &env_next,
            next_pos,
            dp.rho_obs_m,
            cfg.obs_noise_sigma,
            grid,
            &mut sensor_rng,
        );
        let upd = advance_belief(&b, &footprint, &obs, wind.direction_phi, &bp, grid);
        debug_assert_eq!(upd.stages, PIPELINE);
        env_next
            .validate(grid)
            .and_then(|_| upd.belief.validate())
            .map_err(|e| Error::Invariant(format!("seed {seed}, step {t}: {e}")))?;

        let battery_min = (drone_state.battery_min - dp.dt_min).max(0.0);
        let fail_now = !failed && battery_min <= 1e-9 && next_pos != home;
        failed |= fail_now;
        let cost = step_cost(&env_next, fail_now, cfg.c_fail, grid);
        cumulative += cost;

        steps.push(StepRecord {
            t,
            heli_target: heli_decision.map(|d| d.target),
            drone_position: next_pos,
            battery_min,
            cost,
            cumulative_cost: cumulative,
            burning_zones: env_next.burning_count(),
            burned_zones: burned_zones(&env_next),
            belief: BeliefSummary {
                expected_cost: upd.belief.expected_burning_cost(grid),
                pk_sum: upd.belief.pk.iter().sum(),
                pk_max: upd.belief.pk.iter().cloned().fold(0.0, f64::max),
                footprint_pk_after_mask,
                window_len: upd.belief.window.len(),
                fallback: upd.fallback,
                stages: upd.stages,
            },
        });

        env = env_next;
        drone_state = DroneState {
            position: next_pos,
            battery_min,
            wind,
            belief: upd.belief,
        };
    }

    let burned = burned_zones(&env);
    let acres = burned as f64 * grid.zone_area_m2() / SQ_M_PER_ACRE;
    Ok(EpisodeRecord {
        seed,
        policy: policies.label(),
        initial_fire_zones: init.fire_zones.len(),
        home_feasible,
        steps,
        cumulative_cost: cumulative,
        burned_zones: burned,
        acres_burned: acres,
        class_c: acres >= 10.0,
        drone_returned: drone_state.position == home,
        drone_failed: failed,
        heli_drops: heli_state.drops,
    })
}
