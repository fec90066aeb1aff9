//! Seeded batches of episodes and their summary metrics.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::PolicySet;
use super::episode::{run_episode, EpisodeRecord, Scenario};
use crate::error::Result;
use crate::par;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanCi {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
}

impl MeanCi {
    /// Sample mean with a normal-approximation 95% interval (zero width for
    /// a single sample).
    pub fn of(xs: &[f64]) -> MeanCi {
        let n = xs.len();
        if n == 0 {
            return MeanCi::default();
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let half = if n > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            Z95 * (var / n as f64).sqrt()
        } else {
            0.0
        };
        MeanCi {
            mean,
            lo: mean - half,
            hi: mean + half,
        }
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    pub fn overlaps(&self, other: &MeanCi) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchMetrics {
    pub policy: String,
    pub episodes: usize,
    /// Episodes that aborted with an error.
    pub errors: usize,
    /// Mean cumulative cost after each step.
    pub cost_trajectory: Vec<MeanCi>,
    pub final_cost: MeanCi,
    pub class_c_probability: MeanCi,
    pub drone_failure_rate: f64,
    pub return_home_rate: f64,
    pub error_rate: f64,
    pub runtime_s: f64,
    pub mean_episode_s: f64,
}

impl BatchMetrics {
    /// Aggregates completed episodes in the given order. `errors` counts
    /// aborted episodes that are part of the batch but have no record.
    pub fn from_records(policy: &str, records: &[EpisodeRecord], errors: usize, runtime_s: f64) -> BatchMetrics {
        let n = records.len();
        let total = n + errors;
        let steps = records.iter().map(|r| r.steps.len()).max().unwrap_or(0);
        let cost_trajectory = (0..steps)
            .map(|t| {
                let xs: Vec<f64> = records
                    .iter()
                    .map(|r| r.steps.get(t).or(r.steps.last()).map_or(0.0, |s| s.cumulative_cost))
                    .collect();
                MeanCi::of(&xs)
            })
            .collect();
        let finals: Vec<f64> = records.iter().map(|r| r.cumulative_cost).collect();
        let class_c: Vec<f64> = records.iter().map(|r| r.class_c as u8 as f64).collect();
        let frac = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
        BatchMetrics {
            policy: policy.to_string(),
            episodes: total,
            errors,
            cost_trajectory,
            final_cost: MeanCi::of(&finals),
            class_c_probability: MeanCi::of(&class_c),
            drone_failure_rate: frac(records.iter().filter(|r| r.drone_failed).count()),
            return_home_rate: frac(records.iter().filter(|r| r.drone_returned).count()),
            error_rate: if total == 0 { 0.0 } else { errors as f64 / total as f64 },
            runtime_s,
            mean_episode_s: if total == 0 { 0.0 } else { runtime_s / total as f64 },
        }
    }
}

#[derive(Clone, Debug)]
pub struct BatchResult {
    pub metrics: BatchMetrics,
    pub records: Vec<EpisodeRecord>,
    /// `(seed, message)` for each aborted episode.
    pub failures: Vec<(u64, String)>,
}

/// Seeds of a batch: `base_seed + i`.
pub fn episode_seeds(base_seed: u64, n: usize) -> Vec<u64> {
    (0..n as u64).map(|i| base_seed.wrapping_add(i)).collect()
}

/// Runs `n` episodes with seeds `base_seed .. base_seed + n`. Results are
/// aggregated in seed order whether or not episodes run in parallel.
pub fn run_batch(sc: &Scenario, policies: &PolicySet, n: usize, base_seed: u64, parallel: bool) -> BatchResult {
    let start = Instant::now();
    let seeds = episode_seeds(base_seed, n);
    // scenario rollouts inside the drone policy stay sequential when episodes
    // already fan out
    let mut inner = policies.clone();
    inner.drone.parallel = policies.drone.parallel && !parallel;
    let outcomes: Vec<Result<EpisodeRecord>> = par::map(&seeds, parallel, |s| run_episode(sc, &inner, *s));
    let mut records = Vec::with_capacity(n);
    let mut failures = Vec::new();
    for (seed, o) in seeds.iter().zip(outcomes) {
        match o {
            Ok(r) => records.push(r),
            Err(e) => failures.push((*seed, e.to_string())),
        }
    }
    let runtime = start.elapsed().as_secs_f64();
    BatchResult {
        metrics: BatchMetrics::from_records(&policies.label(), &records, failures.len(), runtime),
        records,
        failures,
    }
}
