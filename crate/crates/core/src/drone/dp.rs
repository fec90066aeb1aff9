//! Exact stage-wise dynamic program for the drone's chain-structured
//! lookahead: per-stage node rewards, reachability between consecutive
//! stages, and an optional overlap penalty between consecutive footprints.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::footprint::{overlap_sum, Disk, RowPrefix};
use crate::region::{RegionGrid, ZoneId};

/// One-step movement graph (zones within `d_max` of each other) and hop
/// distances to home.
#[derive(Clone, Debug)]
pub struct ReachGraph {
    disk: Disk,
    home: ZoneId,
    hops_home: Vec<usize>,
}

impl ReachGraph {
    pub fn new(grid: &RegionGrid, d_max_m: f64, home: ZoneId) -> Self {
        let disk = Disk::for_grid(grid, d_max_m);
        let mut hops_home = vec![usize::MAX; grid.len()];
        hops_home[home.0] = 0;
        let mut queue = VecDeque::from([home]);
        while let Some(z) = queue.pop_front() {
            let h = hops_home[z.0] + 1;
            for n in disk.zones(grid, z) {
                if hops_home[n.0] == usize::MAX {
                    hops_home[n.0] = h;
                    queue.push_back(n);
                }
            }
        }
        Self { disk, home, hops_home }
    }

    pub fn home(&self) -> ZoneId {
        self.home
    }

    pub fn disk(&self) -> &Disk {
        &self.disk
    }

    /// Zones reachable from `z` in one step, in index order (includes `z`).
    pub fn reach(&self, grid: &RegionGrid, z: ZoneId) -> Vec<ZoneId> {
        self.disk.zones(grid, z)
    }

    pub fn can_reach(&self, grid: &RegionGrid, from: ZoneId, to: ZoneId) -> bool {
        self.disk.contains(grid, from, to)
    }

    /// Fewest moves from `z` to home (`usize::MAX` if disconnected).
    pub fn hops_home(&self, z: ZoneId) -> usize {
        self.hops_home[z.0]
    }
}

/// Lookahead over `horizon` stages starting from `start`.
///
/// The value of a path `x_0 .. x_{H-1}` is
/// `sum_k node_reward[k][x_k] - sum_k overlap(x_{k-1}, x_k; pair_weight[k])`,
/// with `x_{-1} = start` and consecutive zones linked by `reach`.
#[derive(Clone, Debug)]
pub struct LookaheadProblem {
    pub node_reward: Vec<Vec<f64>>,
    /// Per-stage per-zone weights summed over footprint overlaps.
    pub pair_weight: Option<Vec<Vec<f64>>>,
    pub obs_disk: Disk,
    pub start: ZoneId,
    pub home: ZoneId,
    pub battery_steps: usize,
    pub c_fail: f64,
}

impl LookaheadProblem {
    pub fn horizon(&self) -> usize {
        self.node_reward.len()
    }

    /// Penalty for moving from `prev` to `cur` at `stage`.
    pub fn penalty(&self, prefixes: &[RowPrefix], grid: &RegionGrid, stage: usize, prev: ZoneId, cur: ZoneId) -> f64 {
        match self.pair_weight {
            Some(_) => overlap_sum(grid, &self.obs_disk, &prefixes[stage], prev, cur),
            None => 0.0,
        }
    }

    pub fn prefixes(&self, grid: &RegionGrid) -> Vec<RowPrefix> {
        match &self.pair_weight {
            Some(w) => w.iter().map(|row| RowPrefix::new(grid, row)).collect(),
            None => Vec::new(),
        }
    }

    /// Objective value of a full path.
    pub fn evaluate(&self, path: &[ZoneId], grid: &RegionGrid) -> f64 {
        let pre = self.prefixes(grid);
        let mut prev = self.start;
        let mut v = 0.0;
        for (k, z) in path.iter().enumerate() {
            v += self.node_reward[k][z.0] - self.penalty(&pre, grid, k, prev, *z);
            prev = *z;
        }
        v
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainSolution {
    pub path: Vec<ZoneId>,
    pub value: f64,
}

/// Exact maximizer by backward induction. Among optimal paths the
/// lexicographically smallest (by zone index) is returned.
pub fn solve_chain_dp(p: &LookaheadProblem, reach: &ReachGraph, grid: &RegionGrid) -> Result<ChainSolution> {
    let h = p.horizon();
    if h == 0 {
        return Ok(ChainSolution {
            path: Vec::new(),
            value: 0.0,
        });
    }
    let n = grid.len();
    let pre = p.prefixes(grid);
    // value_to_go[k][prev]: best value of stages k.. given position prev before stage k
    let mut value_to_go = vec![vec![0.0; n]; h + 1];
    let mut choice = vec![vec![ZoneId(usize::MAX); n]; h];
    let best_from = |k: usize, prev: ZoneId, next: &[f64]| -> Option<(ZoneId, f64)> {
        let mut best: Option<(ZoneId, f64)> = None;
        for z in reach.reach(grid, prev) {
            let v = p.node_reward[k][z.0] - p.penalty(&pre, grid, k, prev, z) + next[z.0];
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((z, v));
            }
        }
        best
    };
    for k in (1..h).rev() {
        let (head, tail) = value_to_go.split_at_mut(k + 1);
        let next = &tail[0];
        for prev in grid.zones() {
            let (z, v) = best_from(k, prev, next).ok_or_else(|| Error::Infeasible(format!("{prev} has no moves")))?;
            head[k][prev.0] = v;
            choice[k][prev.0] = z;
        }
    }
    let (x0, value) =
        best_from(0, p.start, &value_to_go[1]).ok_or_else(|| Error::Infeasible(format!("{} has no moves", p.start)))?;
    let mut path = vec![x0];
    for k in 1..h {
        path.push(choice[k][path[k - 1].0]);
    }
    Ok(ChainSolution { path, value })
}
