//! Simplified surface-fire rate of spread.
//!
//! Follows the structure of the classic Rothermel surface model (reaction
//! intensity, propagating flux ratio, wind and slope factors, heat sink) with
//! a fixed moisture of extinction. Inputs are in the customary English units
//! of that model; the result is converted to meters per minute. Spread off the
//! head direction is attenuated by an elliptical length-to-breadth factor.

use serde::{Deserialize, Serialize};

use crate::region::{angle_diff, FuelParams, WindState};

const MOISTURE_OF_EXTINCTION: f64 = 0.3;
const FT_TO_M: f64 = 0.3048;
const MPS_TO_FT_PER_MIN: f64 = 196.850_393_7;
const MPS_TO_MPH: f64 = 2.236_936_29;

/// Coefficients of the length-to-breadth ratio
/// `LB(U) = a exp(b U) + c exp(-d U) - e`, with `U` in mph.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EllipseCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
}

impl Default for EllipseCoeffs {
    /// Anderson's grass-fire fit; `LB(0) = 1`.
    fn default() -> Self {
        Self {
            a: 0.936,
            b: 0.2566,
            c: 0.461,
            d: 0.1548,
            e: 0.397,
        }
    }
}

impl EllipseCoeffs {
    pub fn length_to_breadth(&self, speed_mps: f64) -> f64 {
        let u = speed_mps.max(0.0) * MPS_TO_MPH;
        (self.a * (self.b * u).exp() + self.c * (-self.d * u).exp() - self.e).max(1.0)
    }

    pub fn eccentricity(&self, speed_mps: f64) -> f64 {
        let lb = self.length_to_breadth(speed_mps);
        (lb * lb - 1.0).sqrt() / lb
    }

    /// Fraction of the head-fire rate in a direction `delta` radians off the
    /// wind direction. 1 at the head, `(1-e)/(1+e)` at the back.
    pub fn directional_factor(&self, speed_mps: f64, delta: f64) -> f64 {
        let e = self.eccentricity(speed_mps);
        (1.0 - e) / (1.0 - e * delta.cos())
    }
}

/// Head-fire rate of spread (ft/min) for one fuel bed, wind speed in m/s and
/// upslope tangent `slope` (negative values are treated as flat).
pub fn head_ros_ft_per_min(fuel: &FuelParams, speed_mps: f64, slope: f64) -> f64 {
    let sigma = fuel.kappa_sav;
    let w0 = fuel.kappa_load;
    let depth = fuel.kappa_depth;
    let beta = w0 / (depth * fuel.kappa_dens);
    let beta_op = 3.348 * sigma.powf(-0.8189);
    let ratio = beta / beta_op;

    let sigma15 = sigma.powf(1.5);
    let gamma_max = sigma15 / (495.0 + 0.0594 * sigma15);
    let a = 133.0 * sigma.powf(-0.7913);
    let gamma = gamma_max * ratio.powf(a) * (a * (1.0 - ratio)).exp();

    let wn = w0 * (1.0 - fuel.m_tot);
    let rm = (fuel.kappa_moist / MOISTURE_OF_EXTINCTION).min(1.0);
    let eta_m = (1.0 - 2.59 * rm + 5.11 * rm * rm - 3.52 * rm * rm * rm).max(0.0);
    let eta_s = (0.174 * fuel.m_eff.powf(-0.19)).min(1.0);
    let reaction = gamma * wn * fuel.kappa_heat * eta_m * eta_s;

    let flux = ((0.792 + 0.681 * sigma.sqrt()) * (beta + 0.1)).exp() / (192.0 + 0.2595 * sigma);

    let c = 7.47 * (-0.133 * sigma.powf(0.55)).exp();
    let b = 0.025_26 * sigma.powf(0.54);
    let e = 0.715 * (-3.59e-4 * sigma).exp();
    let u = speed_mps.max(0.0) * MPS_TO_FT_PER_MIN;
    let phi_w = if u > 0.0 { c * u.powf(b) * ratio.powf(-e) } else { 0.0 };
    let tan = slope.max(0.0);
    let phi_s = 5.275 * beta.powf(-0.3) * tan * tan;

    let rho_b = w0 / depth;
    let eps = (-138.0 / sigma).exp();
    let q_ig = 250.0 + 1116.0 * fuel.kappa_moist;

    reaction * flux * (1.0 + phi_w + phi_s) / (rho_b * eps * q_ig)
}

/// Rate of spread in m/min from the zone with `fuel_from` toward the zone
/// with `fuel_to`, in spread direction `psi` (clockwise from north), using the
/// componentwise mean of the two fuel beds.
pub fn rothermel_ros(
    fuel_from: &FuelParams,
    fuel_to: &FuelParams,
    wind: &WindState,
    psi: f64,
    slope: f64,
    ellipse: &EllipseCoeffs,
) -> f64 {
    let fuel = fuel_from.averaged(fuel_to);
    let head = head_ros_ft_per_min(&fuel, wind.speed_u, slope) * FT_TO_M;
    head * ellipse.directional_factor(wind.speed_u, angle_diff(psi, wind.direction_phi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn ros(f: &FuelParams, u: f64, phi: f64, psi: f64, slope: f64) -> f64 {
        rothermel_ros(f, f, &WindState::new(u, phi), psi, slope, &EllipseCoeffs::default())
    }

    #[test]
    fn calm_wind_is_isotropic() {
        let f = FuelParams::default();
        let base = ros(&f, 0.0, 0.7, 0.0, 0.0);
        assert!(base > 0.0);
        for k in 0..16 {
            let psi = k as f64 * PI / 8.0;
            assert_relative_eq!(ros(&f, 0.0, 0.7, psi, 0.0), base, max_relative = 1e-14);
        }
    }

    #[test]
    fn head_beats_backing() {
        let f = FuelParams::default();
        for u in [0.5, 2.0, 6.0] {
            assert!(ros(&f, u, 1.0, 1.0, 0.0) > ros(&f, u, 1.0, 1.0 + PI, 0.0));
        }
    }

    #[test]
    fn directional_factor_shape() {
        let e = EllipseCoeffs::default();
        assert_relative_eq!(e.directional_factor(4.0, 0.0), 1.0);
        assert_relative_eq!(e.length_to_breadth(0.0), 1.0, max_relative = 1e-12);
        let mut prev = 1.0 + 1e-12;
        for k in 0..=32 {
            let g = e.directional_factor(4.0, k as f64 * PI / 32.0);
            assert!(g > 0.0 && g <= 1.0 && g < prev);
            prev = g;
        }
    }

    #[test]
    fn head_ros_increases_with_wind() {
        let f = FuelParams::default();
        let mut prev = 0.0;
        for k in 0..40 {
            let u = k as f64 * 0.5;
            let r = ros(&f, u, 0.3, 0.3, 0.0);
            assert!(r > prev, "u={u}");
            prev = r;
        }
    }

    #[test]
    fn doubling_moisture_slows_spread() {
        let f = FuelParams::default();
        let wet = FuelParams {
            kappa_moist: 2.0 * f.kappa_moist,
            ..f.clone()
        };
        for u in [0.0, 3.0] {
            assert!(ros(&wet, u, 0.0, 0.0, 0.0) < ros(&f, u, 0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn upslope_spreads_faster() {
        let f = FuelParams::default();
        let flat = ros(&f, 1.0, 0.0, 0.0, 0.0);
        assert!(ros(&f, 1.0, 0.0, 0.0, 0.3) > flat);
        assert!(ros(&f, 1.0, 0.0, 0.0, 0.6) > ros(&f, 1.0, 0.0, 0.0, 0.3));
        assert_relative_eq!(ros(&f, 1.0, 0.0, 0.0, -0.4), flat);
    }
}
