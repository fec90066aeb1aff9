//! Ground-truth environment: integer fuel partition per zone, stochastic
//! spread through a sampled adjacency, ember spotting, retardant drops,
//! noisy intensity readings and the per-step cost.

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use super::rothermel::{rothermel_ros, EllipseCoeffs};
use crate::belief::SpreadKernelParams;
use crate::error::{Error, Result};
use crate::footprint::Disk;
use crate::region::{RegionGrid, WindState, ZoneId};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EnvState {
    pub h: Vec<u32>,
    pub q: Vec<u32>,
    pub d: Vec<u32>,
    pub k: Vec<bool>,
    pub extinguished: Vec<bool>,
    pub t: usize,
}

impl EnvState {
    /// Every zone fully healthy, nothing burning.
    pub fn unburnt(grid: &RegionGrid) -> Self {
        let n = grid.len();
        Self {
            h: grid.fuels().iter().map(|f| f.eta).collect(),
            q: vec![0; n],
            d: vec![0; n],
            k: vec![false; n],
            extinguished: vec![false; n],
            t: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    /// Lights `z` as a fresh ignition. No-op on extinguished or already
    /// burning zones.
    pub fn ignite(&mut self, grid: &RegionGrid, z: ZoneId) {
        let i = z.0;
        if self.extinguished[i] || self.k[i] {
            return;
        }
        let lit = grid.fuel(z).q_init.min(self.h[i]);
        self.h[i] -= lit;
        self.q[i] += lit;
        self.k[i] = self.q[i] > 0;
    }

    pub fn burning(&self) -> impl Iterator<Item = ZoneId> + '_ {
        self.k.iter().enumerate().filter(|(_, k)| **k).map(|(i, _)| ZoneId(i))
    }

    pub fn burning_count(&self) -> usize {
        self.k.iter().filter(|k| **k).count()
    }

    /// Zones that have burned at some point (`D + Q > 0`).
    pub fn burned_count(&self) -> usize {
        self.q.iter().zip(&self.d).filter(|(q, d)| **q + **d > 0).count()
    }

    pub fn extinguished_zones(&self) -> Vec<ZoneId> {
        self.extinguished
            .iter()
            .enumerate()
            .filter(|(_, e)| **e)
            .map(|(i, _)| ZoneId(i))
            .collect()
    }

    /// Checks conservation, flag coherence and the extinguished-zone rule.
    pub fn validate(&self, grid: &RegionGrid) -> Result<()> {
        let n = grid.len();
        if [
            self.h.len(),
            self.q.len(),
            self.d.len(),
            self.k.len(),
            self.extinguished.len(),
        ]
        .iter()
        .any(|l| *l != n)
        {
            return Err(Error::Dimension(format!(
                "environment state does not match {n}-zone grid"
            )));
        }
        for z in grid.zones() {
            let i = z.0;
            let eta = grid.fuel(z).eta;
            if self.h[i] as u64 + self.q[i] as u64 + self.d[i] as u64 != eta as u64 {
                return Err(Error::Invariant(format!(
                    "{z}: H+Q+D = {}+{}+{} != eta = {eta}",
                    self.h[i], self.q[i], self.d[i]
                )));
            }
            if self.k[i] != (self.q[i] > 0) {
                return Err(Error::Invariant(format!("{z}: K={} but Q={}", self.k[i], self.q[i])));
            }
            if self.extinguished[i] && (self.k[i] || self.q[i] > 0) {
                return Err(Error::Invariant(format!("{z}: extinguished zone still burning")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeliDecision {
    pub target: ZoneId,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpreadParams {
    /// Per-step spotting probability of each burning zone.
    pub p_spot: f64,
    /// Rate of the exponential spotting distance (1/m).
    pub lambda_spot: f64,
    /// Multiplier on the modeled rate of spread.
    pub ros_scale: f64,
    /// Log-scale standard deviation of the per-edge spread-length noise.
    pub ros_noise_sigma: f64,
    /// Minutes per step.
    pub dt_min: f64,
    /// Spread cutoff in zone widths.
    pub cutoff_zones: f64,
    pub ellipse: EllipseCoeffs,
}

impl Default for SpreadParams {
    fn default() -> Self {
        Self {
            p_spot: 0.02,
            lambda_spot: 1.0 / 200.0,
            ros_scale: 1.0,
            ros_noise_sigma: 0.3,
            dt_min: 10.0,
            cutoff_zones: 10.0,
            ellipse: EllipseCoeffs::default(),
        }
    }
}

impl SpreadParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_spot) {
            return Err(Error::Invariant(format!(
                "p_spot must lie in [0, 1], got {}",
                self.p_spot
            )));
        }
        if !(self.lambda_spot > 0.0 && self.lambda_spot.is_finite()) {
            return Err(Error::Invariant(format!(
                "lambda_spot must be positive, got {}",
                self.lambda_spot
            )));
        }
        if !(self.dt_min > 0.0 && self.dt_min.is_finite()) {
            return Err(Error::Invariant(format!(
                "dt_min must be positive, got {}",
                self.dt_min
            )));
        }
        if !(self.ros_scale >= 0.0 && self.ros_scale.is_finite()) {
            return Err(Error::Invariant(format!(
                "ros_scale must be nonnegative, got {}",
                self.ros_scale
            )));
        }
        if !(self.ros_noise_sigma >= 0.0 && self.ros_noise_sigma.is_finite()) {
            return Err(Error::Invariant("ros_noise_sigma must be nonnegative".into()));
        }
        if !(self.cutoff_zones > 0.0) {
            return Err(Error::Invariant("cutoff_zones must be positive".into()));
        }
        Ok(())
    }

    pub fn cutoff_m(&self, grid: &RegionGrid) -> f64 {
        self.cutoff_zones * grid.zone_size_m()
    }
}

/// Spread edges `(source, target)` with `a = 1`, excluding self-loops. A
/// burning, non-extinguished source always keeps burning itself.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Adjacency {
    pub edges: Vec<(ZoneId, ZoneId)>,
}

impl Adjacency {
    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Distinct targets in increasing order.
    pub fn targets(&self) -> Vec<ZoneId> {
        let mut t: Vec<ZoneId> = self.edges.iter().map(|e| e.1).collect();
        t.sort_unstable();
        t.dedup();
        t
    }
}

/// Expected spread length (m) in one step from `source` to `target` before
/// noise.
pub fn spread_length_m(
    grid: &RegionGrid,
    wind: &WindState,
    params: &SpreadParams,
    source: ZoneId,
    target: ZoneId,
) -> f64 {
    let psi = grid.bearing(source, target).unwrap_or(wind.direction_phi);
    let ros = rothermel_ros(
        grid.fuel(source),
        grid.fuel(target),
        wind,
        psi,
        grid.slope(source, target),
        &params.ellipse,
    );
    params.ros_scale * ros * params.dt_min
}

/// Draws the spread adjacency for the next step from the rate-of-spread
/// model with multiplicative log-normal noise on each spread length.
pub fn sample_adjacency<R: Rng + ?Sized>(
    state: &EnvState,
    wind: &WindState,
    grid: &RegionGrid,
    params: &SpreadParams,
    rng: &mut R,
) -> Adjacency {
    let disk = Disk::for_grid(grid, params.cutoff_m(grid));
    let mut edges = Vec::new();
    for src in state.burning() {
        if state.extinguished[src.0] {
            continue;
        }
        for tgt in disk.zones(grid, src) {
            if tgt == src || state.extinguished[tgt.0] {
                continue;
            }
            let mut len = spread_length_m(grid, wind, params, src, tgt);
            if params.ros_noise_sigma > 0.0 {
                let n: f64 = StandardNormal.sample(rng);
                len *= (params.ros_noise_sigma * n).exp();
            }
            if len >= grid.distance(src, tgt) {
                edges.push((src, tgt));
            }
        }
    }
    Adjacency { edges }
}

/// Draws an adjacency from the drone's assumed spread model: exponential
/// spread lengths with direction-dependent rate from the spread kernel.
pub fn sample_kernel_adjacency<R: Rng + ?Sized>(
    state: &EnvState,
    phi: f64,
    kernel: &SpreadKernelParams,
    grid: &RegionGrid,
    cutoff_m: f64,
    rng: &mut R,
) -> Adjacency {
    let disk = Disk::for_grid(grid, cutoff_m);
    let mut edges = Vec::new();
    for src in state.burning() {
        if state.extinguished[src.0] {
            continue;
        }
        for tgt in disk.zones(grid, src) {
            if tgt == src || state.extinguished[tgt.0] {
                continue;
            }
            let p = kernel.reach_probability(grid, tgt, src, phi);
            if rng.random::<f64>() < p {
                edges.push((src, tgt));
            }
        }
    }
    Adjacency { edges }
}

/// Applies a retardant drop centered at `d.target`.
pub fn apply_extinguish(state: &EnvState, d: &HeliDecision, radius_m: f64, grid: &RegionGrid) -> EnvState {
    apply_extinguish_zones(state, &grid.neighbors_within(d.target, radius_m))
}

/// Extinguishes every zone in `footprint`: burning fuel becomes dead fuel and
/// the zone joins the extinguished set.
pub fn apply_extinguish_zones(state: &EnvState, footprint: &[ZoneId]) -> EnvState {
    let mut next = state.clone();
    for z in footprint {
        let i = z.0;
        next.d[i] += next.q[i];
        next.q[i] = 0;
        next.k[i] = false;
        next.extinguished[i] = true;
    }
    next
}

/// Splits `total` units across three real-valued parts by largest remainder.
/// Ties go to the earlier part.
pub(crate) fn apportion(parts: [f64; 3], total: u32) -> [u32; 3] {
    let t = total as f64;
    let clamped = parts.map(|p| p.clamp(0.0, t));
    let mut out = clamped.map(|p| p.floor() as u32);
    let mut sum: u32 = out.iter().sum();
    let frac = [0, 1, 2].map(|i| clamped[i] - out[i] as f64);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| frac[b].partial_cmp(&frac[a]).unwrap().then(a.cmp(&b)));
    let mut i = 0;
    while sum < total {
        out[order[i % 3]] += 1;
        sum += 1;
        i += 1;
    }
    // float noise can push the floors past the total; take units back from
    // the healthy/burning parts first so dead fuel never decreases
    for idx in [order[2], order[1], order[0]]
        .into_iter()
        .filter(|i| *i != 2)
        .chain([2])
    {
        while sum > total && out[idx] > 0 {
            out[idx] -= 1;
            sum -= 1;
        }
    }
    out
}

/// Advances the post-decision state one step.
///
/// Burning zones follow the fuel difference equations (computed in reals,
/// then apportioned back to integers). Zones reached by a spread edge or an
/// ember that were not burning light `Q_init` units. Extinguished zones never
/// reignite.
pub fn step_env(post: &EnvState, adj: &Adjacency, spot_ignitions: &[ZoneId], grid: &RegionGrid) -> EnvState {
    let mut next = post.clone();
    next.t = post.t + 1;
    for z in grid.zones() {
        let i = z.0;
        if !post.k[i] || post.extinguished[i] {
            continue;
        }
        let f = grid.fuel(z);
        let (h, q, d) = (post.h[i] as f64, post.q[i] as f64, post.d[i] as f64);
        let burn_from_healthy = (f.lambda * q * h).min(h);
        let parts = [h - burn_from_healthy, q - f.xi * q + burn_from_healthy, d + f.xi * q];
        let [nh, nq, nd] = apportion(parts, f.eta);
        next.h[i] = nh;
        next.q[i] = nq;
        next.d[i] = nd;
    }
    let mut new_fire = vec![false; grid.len()];
    for (src, tgt) in &adj.edges {
        if post.k[src.0] && !post.extinguished[src.0] {
            new_fire[tgt.0] = true;
        }
    }
    for z in spot_ignitions {
        new_fire[z.0] = true;
    }
    for z in grid.zones() {
        let i = z.0;
        if new_fire[i] && !post.k[i] && !post.extinguished[i] {
            let lit = grid.fuel(z).q_init.min(next.h[i]);
            next.h[i] -= lit;
            next.q[i] += lit;
        }
    }
    for i in 0..grid.len() {
        next.k[i] = next.q[i] > 0 && !next.extinguished[i];
    }
    next
}

/// Ember spotting: each burning zone throws an ember with probability
/// `p_spot` an exponential distance downwind. Landing zones off the grid or
/// already extinguished are dropped. Returned zones are sorted and distinct.
pub fn sample_spotting<R: Rng + ?Sized>(
    state: &EnvState,
    wind: &WindState,
    grid: &RegionGrid,
    params: &SpreadParams,
    rng: &mut R,
) -> Vec<ZoneId> {
    let mut out = Vec::new();
    if params.p_spot <= 0.0 {
        return out;
    }
    let exp = Exp::new(params.lambda_spot).expect("validated lambda_spot");
    let (north, east) = (wind.direction_phi.cos(), wind.direction_phi.sin());
    for src in state.burning() {
        if state.extinguished[src.0] || !rng.random_bool(params.p_spot) {
            continue;
        }
        let dist: f64 = exp.sample(rng);
        let (s, e) = grid.center(src);
        if let Some(z) = grid.zone_at(s - dist * north, e + dist * east) {
            if !state.extinguished[z.0] {
                out.push(z);
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Noisy intensity readings over the sensor footprint.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub zones: Vec<ZoneId>,
    pub values: Vec<f64>,
}

impl Observation {
    pub fn is_empty(&self) -> bool {
        self.zones.is_empty()
    }

    pub fn len(&self) -> usize {
        self.zones.len()
    }
}

pub fn observe<R: Rng + ?Sized>(
    state: &EnvState,
    drone_pos: ZoneId,
    rho_obs_m: f64,
    sigma_noise: f64,
    grid: &RegionGrid,
    rng: &mut R,
) -> Observation {
    let zones = grid.neighbors_within(drone_pos, rho_obs_m);
    let values = zones
        .iter()
        .map(|z| {
            let clean = grid.fuel(*z).c * state.q[z.0] as f64;
            if sigma_noise > 0.0 {
                let n: f64 = StandardNormal.sample(rng);
                clean + sigma_noise * n
            } else {
                clean
            }
        })
        .collect();
    Observation { zones, values }
}

/// Burning cost of the new state plus the failure penalty.
pub fn step_cost(next: &EnvState, drone_failed: bool, c_fail: f64, grid: &RegionGrid) -> f64 {
    let burning: f64 = grid.zones().map(|z| grid.fuel(z).r * next.q[z.0] as f64).sum();
    burning + if drone_failed { c_fail } else { 0.0 }
}
