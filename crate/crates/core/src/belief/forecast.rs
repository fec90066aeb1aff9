//! One-step ignition forecast from the directional exponential spread kernel.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::footprint::Disk;
use crate::region::{RegionGrid, ZoneId};

/// Rate `gamma(psi | phi) = theta0 cos(psi - phi) + theta1` (1/m) of the
/// exponential spread length toward a zone, where `psi` is the bearing from
/// the receiving zone to the source. Spread is longest when the source lies
/// upwind.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpreadKernelParams {
    pub theta0: f64,
    pub theta1: f64,
}

impl Default for SpreadKernelParams {
    fn default() -> Self {
        Self {
            theta0: 0.01,
            theta1: 0.03,
        }
    }
}

impl SpreadKernelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta0 >= 0.0 && self.theta1 >= self.theta0 && self.theta1.is_finite()) {
            return Err(Error::Invariant(format!(
                "spread kernel needs theta1 >= theta0 >= 0, got ({}, {})",
                self.theta0, self.theta1
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn gamma(&self, psi: f64, phi: f64) -> f64 {
        (self.theta0 * (psi - phi).cos() + self.theta1).max(0.0)
    }

    /// Probability that fire burning in `source` reaches `target` within one
    /// step, `exp(-gamma d)`. Equals 1 for the zone itself.
    pub fn reach_probability(&self, grid: &RegionGrid, target: ZoneId, source: ZoneId, phi: f64) -> f64 {
        if target == source {
            return 1.0;
        }
        let psi = grid.bearing(target, source).expect("distinct zones");
        (-self.gamma(psi, phi) * grid.distance(target, source)).exp()
    }
}

/// `f_z = 1 - prod_{z'} (1 - pKx_{z'} exp(-gamma d(z, z')))` over sources within
/// `cutoff_m`; zero on extinguished zones.
pub fn forecast_ignition(
    pkx: &[f64],
    extinguished: &[bool],
    phi: f64,
    theta: &SpreadKernelParams,
    grid: &RegionGrid,
    cutoff_m: f64,
) -> Vec<f64> {
    let disk = Disk::for_grid(grid, cutoff_m);
    let mut survive = vec![1.0; grid.len()];
    for src in grid.zones() {
        let p = pkx[src.0];
        if p <= 0.0 {
            continue;
        }
        for tgt in disk.zones(grid, src) {
            survive[tgt.0] *= 1.0 - p * theta.reach_probability(grid, tgt, src, phi);
        }
    }
    survive
        .iter()
        .zip(extinguished)
        .map(|(s, e)| if *e { 0.0 } else { (1.0 - s).clamp(0.0, 1.0) })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::FuelParams;
    use approx::assert_abs_diff_eq;

    fn grid(w: usize, h: usize) -> RegionGrid {
        RegionGrid::uniform(w, h, 30.0, FuelParams::default(), ZoneId(0)).unwrap()
    }

    #[test]
    fn no_sources_no_forecast() {
        let g = grid(4, 4);
        let f = forecast_ignition(&[0.0; 16], &[false; 16], 0.0, &SpreadKernelParams::default(), &g, 300.0);
        assert!(f.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn certain_source_forecasts_itself() {
        let g = grid(3, 3);
        let mut pk = [0.0; 9];
        pk[4] = 1.0;
        let f = forecast_ignition(&pk, &[false; 9], 1.0, &SpreadKernelParams::default(), &g, 300.0);
        assert_eq!(f[4], 1.0);
    }

    #[test]
    fn two_zone_closed_form() {
        let g = grid(2, 1);
        let theta = SpreadKernelParams {
            theta0: 0.0,
            theta1: 0.02,
        };
        let f = forecast_ignition(&[1.0, 0.0], &[false; 2], 0.0, &theta, &g, 300.0);
        assert_abs_diff_eq!(f[1], (-0.6f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn downwind_zone_is_more_exposed() {
        let g = grid(5, 1);
        let mut pk = [0.0; 5];
        pk[2] = 0.8;
        // wind toward the east
        let f = forecast_ignition(
            &pk,
            &[false; 5],
            std::f64::consts::FRAC_PI_2,
            &SpreadKernelParams::default(),
            &g,
            300.0,
        );
        assert!(f[3] > f[1]);
    }

    #[test]
    fn extinguished_target_is_zero() {
        let g = grid(3, 1);
        let f = forecast_ignition(
            &[0.9, 0.0, 0.0],
            &[false, true, false],
            0.0,
            &SpreadKernelParams::default(),
            &g,
            300.0,
        );
        assert_eq!(f[1], 0.0);
        assert!(f[2] > 0.0);
    }
}
