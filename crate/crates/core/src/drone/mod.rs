//! Drone information-collection policies.

pub mod dp;
pub mod lookahead;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use dp::{solve_chain_dp, ChainSolution, LookaheadProblem, ReachGraph};
pub use lookahead::{build_lookahead_ie, build_lookahead_ts, LookaheadModel};

use crate::belief::BeliefState;
use crate::error::{Error, Result};
use crate::footprint::{argmax_footprint, Disk};
use crate::region::{RegionGrid, WindState, ZoneId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DroneState {
    pub position: ZoneId,
    pub battery_min: f64,
    pub wind: WindState,
    /// Belief after the helicopter's decision for this step.
    pub belief: BeliefState,
}

impl DroneState {
    /// Whole moves left on the battery.
    pub fn battery_steps(&self, step_min: f64) -> usize {
        ((self.battery_min.max(0.0) + 1e-9) / step_min).floor() as usize
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DroneVariant {
    /// Stays at home and never observes beyond its home footprint.
    Home,
    PfaCfa,
    TsDla,
    #[default]
    IeDla,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DronePolicyParams {
    pub variant: DroneVariant,
    /// Interval-estimation weight per lookahead stage. The last entry is
    /// reused for stages beyond the vector; PFA-CFA reads the first.
    pub theta_ie: Vec<f64>,
    pub horizon: usize,
    pub m_scenarios: usize,
    pub d_max_m: f64,
    pub rho_obs_m: f64,
    /// Battery minutes spent per move.
    pub dt_min: f64,
    /// Run scenario rollouts on the thread pool.
    pub parallel: bool,
}

impl Default for DronePolicyParams {
    fn default() -> Self {
        Self {
            variant: DroneVariant::IeDla,
            theta_ie: vec![0.75],
            horizon: 4,
            m_scenarios: 20,
            d_max_m: 360.0,
            rho_obs_m: 180.0,
            dt_min: 10.0,
            parallel: true,
        }
    }
}

impl DronePolicyParams {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::Invariant("drone horizon must be at least 1".into()));
        }
        if self.m_scenarios == 0 {
            return Err(Error::Invariant("m_scenarios must be at least 1".into()));
        }
        if self.theta_ie.is_empty() || self.theta_ie.iter().any(|t| !t.is_finite()) {
            return Err(Error::Invariant(format!(
                "theta_ie must be a nonempty finite vector, got {:?}",
                self.theta_ie
            )));
        }
        for (name, v) in [
            ("d_max_m", self.d_max_m),
            ("rho_obs_m", self.rho_obs_m),
            ("dt_min", self.dt_min),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Invariant(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn theta_ie_at(&self, stage: usize) -> f64 {
        let n = self.theta_ie.len();
        self.theta_ie[stage.min(n - 1)]
    }
}

/// Return-home trigger: home is no longer coverable once this move is spent.
pub fn pfa_return_home(s: &DroneState, d_max_m: f64, dt_min: f64, grid: &RegionGrid) -> bool {
    let home = grid.home();
    if s.position == home {
        return false;
    }
    let n = s.battery_steps(dt_min);
    grid.distance(s.position, home) > d_max_m * n.saturating_sub(1) as f64
}

/// `r eta pQ + theta r sqrt(eta pQ (1 - pQ))` per zone.
pub fn interval_estimation_map(b: &BeliefState, theta_ie: f64, grid: &RegionGrid) -> Vec<f64> {
    grid.zones()
        .map(|z| {
            let f = grid.fuel(z);
            let eta = f.eta as f64;
            let q = b.pq[z.0];
            f.r * eta * q + theta_ie * f.r * (eta * q * (1.0 - q)).max(0.0).sqrt()
        })
        .collect()
}

/// Nearest zone of `candidates` to `target` (lowest index on ties).
pub fn project(candidates: &[ZoneId], target: ZoneId, grid: &RegionGrid) -> Option<ZoneId> {
    let mut best: Option<(ZoneId, f64)> = None;
    for &c in candidates {
        let d = grid.distance(c, target);
        if best.is_none_or(|(_, b)| d < b) {
            best = Some((c, d));
        }
    }
    best.map(|(c, _)| c)
}

/// Moves that leave home reachable with the battery left afterwards. Falls
/// back to the whole reach set when none do.
fn feasible_moves(s: &DroneState, reach: &ReachGraph, dt_min: f64, grid: &RegionGrid) -> Vec<ZoneId> {
    let all = reach.reach(grid, s.position);
    let left = s.battery_steps(dt_min).saturating_sub(1);
    let ok: Vec<ZoneId> = all.iter().copied().filter(|z| reach.hops_home(*z) <= left).collect();
    if ok.is_empty() {
        all
    } else {
        ok
    }
}

pub fn pfa_cfa_decide(s: &DroneState, params: &DronePolicyParams, reach: &ReachGraph, grid: &RegionGrid) -> ZoneId {
    let moves = reach.reach(grid, s.position);
    let target = if pfa_return_home(s, params.d_max_m, params.dt_min, grid) {
        reach.home()
    } else {
        let m = interval_estimation_map(&s.belief, params.theta_ie_at(0), grid);
        argmax_footprint(grid, &Disk::for_grid(grid, params.rho_obs_m), &m).0
    };
    let candidates = if target == reach.home() {
        moves
    } else {
        feasible_moves(s, reach, params.dt_min, grid)
    };
    project(&candidates, target, grid).unwrap_or(s.position)
}

pub fn ts_dla_decide<R: Rng + ?Sized>(
    s: &DroneState,
    params: &DronePolicyParams,
    m: &LookaheadModel,
    rng: &mut R,
) -> Result<ZoneId> {
    let p = build_lookahead_ts(s, params, m, rng)?;
    let sol = solve_chain_dp(&p, m.reach, m.grid)?;
    Ok(lookahead::first_or(&sol.path, s.position))
}

pub fn ie_dla_decide(s: &DroneState, params: &DronePolicyParams, m: &LookaheadModel) -> Result<ZoneId> {
    let p = build_lookahead_ie(s, params, m);
    let sol = solve_chain_dp(&p, m.reach, m.grid)?;
    Ok(lookahead::first_or(&sol.path, s.position))
}

/// Next position under the configured policy.
pub fn decide<R: Rng + ?Sized>(
    s: &DroneState,
    params: &DronePolicyParams,
    m: &LookaheadModel,
    rng: &mut R,
) -> Result<ZoneId> {
    match params.variant {
        DroneVariant::Home => {
            Ok(project(&m.reach.reach(m.grid, s.position), m.reach.home(), m.grid).unwrap_or(s.position))
        }
        DroneVariant::PfaCfa => Ok(pfa_cfa_decide(s, params, m.reach, m.grid)),
        DroneVariant::TsDla => ts_dla_decide(s, params, m, rng),
        DroneVariant::IeDla => ie_dla_decide(s, params, m),
    }
}

#[cfg(test)]
mod tests;
