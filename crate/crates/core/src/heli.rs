//! Helicopter retardant-drop policies.
//!
//! Both policies score every zone, sum the scores over the drop footprint
//! centered at each candidate target, and pick the best target (lowest index
//! on ties).

use serde::{Deserialize, Serialize};

use crate::belief::{forecast_ignition, BeliefParams, BeliefState};
use crate::error::{Error, Result};
use crate::fire::HeliDecision;
use crate::footprint::{argmax_footprint, Disk};
use crate::region::RegionGrid;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeliVariant {
    /// Never drops.
    Null,
    /// One-step lookahead on newly ignited zones.
    Dla1,
    /// Expected burning cost plus a weighted new-ignition term.
    #[default]
    CfaDla,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HeliPolicyParams {
    pub variant: HeliVariant,
    pub theta_heli: f64,
    pub radius_m: f64,
}

impl Default for HeliPolicyParams {
    fn default() -> Self {
        Self {
            variant: HeliVariant::CfaDla,
            theta_heli: 5.0,
            radius_m: 120.0,
        }
    }
}

impl HeliPolicyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta_heli >= 0.0 && self.theta_heli.is_finite()) {
            return Err(Error::Invariant(format!(
                "theta_heli must be nonnegative, got {}",
                self.theta_heli
            )));
        }
        if !(self.radius_m > 0.0) {
            return Err(Error::Invariant(format!(
                "helicopter radius must be positive, got {}",
                self.radius_m
            )));
        }
        Ok(())
    }
}

fn forecast(b: &BeliefState, phi: f64, bp: &BeliefParams, grid: &RegionGrid) -> Vec<f64> {
    forecast_ignition(&b.pk, &b.extinguished, phi, &bp.kernel, grid, bp.cutoff_m(grid))
}

/// Per-zone `r (f - pK)`.
pub fn dla1_scores(b: &BeliefState, fk: &[f64], grid: &RegionGrid) -> Vec<f64> {
    grid.zones().map(|z| grid.fuel(z).r * (fk[z.0] - b.pk[z.0])).collect()
}

/// Per-zone `r eta pQ_next + theta f_start`, where `pQ_next` is the drift
/// forecast of the burning fraction with `p_burn = pK` and
/// `p_start = f_start = f - pK`.
pub fn cfa_scores(b: &BeliefState, fk: &[f64], theta_heli: f64, grid: &RegionGrid) -> Vec<f64> {
    grid.zones()
        .map(|z| {
            let i = z.0;
            let f = grid.fuel(z);
            let eta = f.eta as f64;
            let f_start = (fk[i] - b.pk[i]).max(0.0);
            let pq_next =
                (1.0 - f.xi + f.lambda * (eta - 1.0) * b.ph[i]) * b.pq[i] * b.pk[i] + f.q_init as f64 / eta * f_start;
            f.r * eta * pq_next + theta_heli * f_start
        })
        .collect()
}

pub fn dla1_decide(b: &BeliefState, phi: f64, bp: &BeliefParams, radius_m: f64, grid: &RegionGrid) -> HeliDecision {
    let fk = forecast(b, phi, bp, grid);
    let scores = dla1_scores(b, &fk, grid);
    HeliDecision {
        target: argmax_footprint(grid, &Disk::for_grid(grid, radius_m), &scores).0,
    }
}

pub fn cfa_dla_decide(
    b: &BeliefState,
    phi: f64,
    bp: &BeliefParams,
    params: &HeliPolicyParams,
    grid: &RegionGrid,
) -> HeliDecision {
    let fk = forecast(b, phi, bp, grid);
    let scores = cfa_scores(b, &fk, params.theta_heli, grid);
    HeliDecision {
        target: argmax_footprint(grid, &Disk::for_grid(grid, params.radius_m), &scores).0,
    }
}

/// Decision of the configured policy; `None` for the null policy.
pub fn decide(
    params: &HeliPolicyParams,
    b: &BeliefState,
    phi: f64,
    bp: &BeliefParams,
    grid: &RegionGrid,
) -> Option<HeliDecision> {
    match params.variant {
        HeliVariant::Null => None,
        HeliVariant::Dla1 => Some(dla1_decide(b, phi, bp, params.radius_m, grid)),
        HeliVariant::CfaDla => Some(cfa_dla_decide(b, phi, bp, params, grid)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::{FuelParams, ZoneId};

    fn grid(w: usize, h: usize) -> RegionGrid {
        RegionGrid::uniform(w, h, 30.0, FuelParams::default(), ZoneId(0)).unwrap()
    }

    #[test]
    fn no_growth_picks_zone_zero() {
        let g = grid(6, 6);
        let b = BeliefState::healthy(vec![0.0; 36]);
        let d = dla1_decide(&b, 0.0, &BeliefParams::default(), 60.0, &g);
        assert_eq!(d.target, ZoneId(0));
    }

    #[test]
    fn single_gain_is_covered_by_lowest_index_target() {
        let g = grid(8, 8);
        let b = BeliefState::healthy(vec![0.0; 64]);
        let mut fk = vec![0.0; 64];
        fk[27] = 0.5;
        let scores = dla1_scores(&b, &fk, &g);
        let disk = Disk::for_grid(&g, 60.0);
        let (t, s) = argmax_footprint(&g, &disk, &scores);
        assert_eq!(s, 0.5);
        let expected = g.zones().find(|c| disk.contains(&g, *c, ZoneId(27))).unwrap();
        assert_eq!(t, expected);
    }

    #[test]
    fn theta_zero_is_pure_burning_cost() {
        let g = grid(5, 5);
        let mut b = BeliefState::healthy(vec![0.2; 25]);
        b.pq = vec![0.1; 25];
        b.ph = vec![0.9; 25];
        let fk = vec![0.4; 25];
        let s = cfa_scores(&b, &fk, 0.0, &g);
        let f = FuelParams::default();
        let expected = 100.0 * ((1.0 - f.xi + f.lambda * 99.0 * 0.9) * 0.1 * 0.2 + 0.2 * 0.2);
        approx::assert_abs_diff_eq!(s[3], expected, epsilon = 1e-12);
    }

    #[test]
    fn null_policy_never_drops() {
        let g = grid(3, 3);
        let b = BeliefState::healthy(vec![0.5; 9]);
        let p = HeliPolicyParams {
            variant: HeliVariant::Null,
            ..HeliPolicyParams::default()
        };
        assert!(decide(&p, &b, 0.0, &BeliefParams::default(), &g).is_none());
    }
}
