//! Hypothesis test turning noisy intensity readings into ignition labels.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::fire::Observation;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierParams {
    pub sigma_noise: f64,
    pub threshold_l: f64,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        Self {
            sigma_noise: 1.0,
            threshold_l: 2.0,
        }
    }
}

impl ClassifierParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_noise > 0.0 && self.sigma_noise.is_finite()) {
            return Err(Error::Invariant(format!(
                "sigma_noise must be positive, got {}",
                self.sigma_noise
            )));
        }
        if !(self.threshold_l > 0.0) {
            return Err(Error::Invariant(format!(
                "threshold_l must be positive, got {}",
                self.threshold_l
            )));
        }
        Ok(())
    }
}

pub fn normal_cdf(u: f64) -> f64 {
    0.5 * erfc(-u / std::f64::consts::SQRT_2)
}

pub fn normal_pdf(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `Phi(u) / phi(u)`. Uses the asymptotic series deep in the left tail where
/// both factors underflow.
pub fn cdf_pdf_ratio(u: f64) -> f64 {
    if u < -30.0 {
        let u2 = u * u;
        (1.0 - 1.0 / u2 + 3.0 / (u2 * u2)) / u.abs()
    } else {
        let pdf = normal_pdf(u);
        if pdf == 0.0 {
            f64::INFINITY
        } else {
            normal_cdf(u) / pdf
        }
    }
}

/// `K_hat = 1` where `Phi(y/sigma) / phi(y/sigma) > l`, in observation order.
pub fn classify_observations(obs: &Observation, params: &ClassifierParams) -> Vec<bool> {
    obs.values
        .iter()
        .map(|y| cdf_pdf_ratio(y / params.sigma_noise) > params.threshold_l)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::ZoneId;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ratio_at_zero() {
        assert_abs_diff_eq!(
            cdf_pdf_ratio(0.0),
            0.5 * (2.0 * std::f64::consts::PI).sqrt(),
            epsilon = 1e-14
        );
        let obs = Observation {
            zones: vec![ZoneId(0)],
            values: vec![0.0],
        };
        assert_eq!(classify_observations(&obs, &ClassifierParams::default()), vec![false]);
    }

    #[test]
    fn large_reading_is_burning() {
        let obs = Observation {
            zones: vec![ZoneId(0), ZoneId(1)],
            values: vec![1e3, f64::MAX],
        };
        assert_eq!(
            classify_observations(&obs, &ClassifierParams::default()),
            vec![true, true]
        );
    }

    #[test]
    fn ratio_is_increasing() {
        let mut prev = 0.0;
        for i in 0..3880 {
            let u = -60.0 + i as f64 * 0.025;
            let r = cdf_pdf_ratio(u);
            assert!(r > prev && r.is_finite(), "u={u}");
            prev = r;
        }
        assert_eq!(cdf_pdf_ratio(40.0), f64::INFINITY);
    }

    #[test]
    fn tail_series_meets_direct_evaluation() {
        let direct = normal_cdf(-30.0) / normal_pdf(-30.0);
        assert_abs_diff_eq!(cdf_pdf_ratio(-30.0 - 1e-12), direct, epsilon = 1e-9);
    }
}
