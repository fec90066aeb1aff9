//! Joint samples of the hidden fire state drawn from a belief.
//!
//! Ignition is sampled by thresholding a correlated latent field at zero on
//! the classifier window (Laplace posterior covariance) and independently
//! elsewhere. Fuel partitions of ignited zones are multinomial draws.

use rand::Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::belief::gpc::{clamp_p, logit};
use crate::belief::{BeliefState, GpcParams};
use crate::error::{Error, Result};
use crate::fire::EnvState;
use crate::linalg::{Cholesky, Mat};
use crate::region::{RegionGrid, ZoneId};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampledWorld {
    pub k: Vec<bool>,
    pub h: Vec<u32>,
    pub q: Vec<u32>,
    pub d: Vec<u32>,
}

impl SampledWorld {
    /// Environment state seeded from this sample. `K` follows `Q > 0`.
    pub fn to_env_state(&self, extinguished: &[bool], t: usize) -> EnvState {
        EnvState {
            h: self.h.clone(),
            q: self.q.clone(),
            d: self.d.clone(),
            k: self.q.iter().map(|q| *q > 0).collect(),
            extinguished: extinguished.to_vec(),
            t,
        }
    }
}

/// Cholesky factor of the posterior precision `Sigma^-1 + W` on a set of
/// zones, ready for sampling.
#[derive(Clone, Debug)]
pub struct LaplaceFieldCov {
    zones: Vec<ZoneId>,
    precision: Cholesky,
    jittered: bool,
}

impl LaplaceFieldCov {
    pub fn zones(&self) -> &[ZoneId] {
        &self.zones
    }

    /// The nugget had to be inflated to factorize.
    pub fn jittered(&self) -> bool {
        self.jittered
    }

    /// Dense `(Sigma^-1 + W)^-1`.
    pub fn covariance(&self) -> Mat {
        self.precision.inverse()
    }

    /// One draw of `N(mean, (Sigma^-1 + W)^-1)`.
    pub fn sample<R: Rng + ?Sized>(&self, mean: &[f64], rng: &mut R) -> Vec<f64> {
        let eps: Vec<f64> = (0..self.zones.len()).map(|_| StandardNormal.sample(rng)).collect();
        let x = self.precision.solve_upper(&eps);
        mean.iter().zip(x).map(|(m, v)| m + v).collect()
    }
}

/// Factorizes the Laplace posterior covariance over `zones` with curvature
/// `w` (one entry per zone). Retries once with ten times the nugget.
pub fn laplace_field_cov(
    zones: &[ZoneId],
    params: &GpcParams,
    w: &[f64],
    grid: &RegionGrid,
) -> Result<LaplaceFieldCov> {
    if zones.is_empty() {
        return Err(Error::Dimension("laplace_field_cov needs at least one zone".into()));
    }
    if w.len() != zones.len() {
        return Err(Error::Dimension(format!(
            "{} curvature entries for {} zones",
            w.len(),
            zones.len()
        )));
    }
    let attempt = |extra: f64| -> Result<Cholesky> {
        let mut k = params.kernel_matrix(grid, zones);
        k.add_diag(&vec![extra; zones.len()]);
        let mut prec = Cholesky::new(&k)?.inverse();
        prec.add_diag(w);
        // symmetrize against round-off from the inverse
        let n = zones.len();
        for i in 0..n {
            for j in 0..i {
                let v = 0.5 * (prec[(i, j)] + prec[(j, i)]);
                prec[(i, j)] = v;
                prec[(j, i)] = v;
            }
        }
        Cholesky::new(&prec)
    };
    match attempt(0.0) {
        Ok(precision) => Ok(LaplaceFieldCov {
            zones: zones.to_vec(),
            precision,
            jittered: false,
        }),
        Err(_) => attempt(10.0 * params.theta_cov2)
            .map(|precision| LaplaceFieldCov {
                zones: zones.to_vec(),
                precision,
                jittered: true,
            })
            .map_err(|_| Error::Factorization(zones.len())),
    }
}

/// Factorization for the belief's classifier window, with the curvature
/// evaluated at the (clamped) belief itself. `None` when the window is empty.
pub fn window_cov(b: &BeliefState, params: &GpcParams, grid: &RegionGrid) -> Result<Option<LaplaceFieldCov>> {
    let zones: Vec<ZoneId> = b.window.iter().copied().filter(|z| !b.extinguished[z.0]).collect();
    if zones.is_empty() {
        return Ok(None);
    }
    let w: Vec<f64> = zones
        .iter()
        .map(|z| {
            let p = clamp_p(b.pk[z.0]);
            p * (1.0 - p)
        })
        .collect();
    laplace_field_cov(&zones, params, &w, grid).map(Some)
}

/// Samples ignition indicators with a precomputed window factorization.
pub fn sample_ignition_with<R: Rng + ?Sized>(b: &BeliefState, cov: Option<&LaplaceFieldCov>, rng: &mut R) -> Vec<bool> {
    let n = b.len();
    let mut k = vec![false; n];
    let mut in_window = vec![false; n];
    if let Some(cov) = cov {
        let mean: Vec<f64> = cov.zones().iter().map(|z| logit(b.pk[z.0])).collect();
        let latent = cov.sample(&mean, rng);
        for (z, v) in cov.zones().iter().zip(latent) {
            in_window[z.0] = true;
            k[z.0] = v > 0.0;
        }
    }
    for i in 0..n {
        if b.extinguished[i] {
            k[i] = false;
        } else if !in_window[i] {
            let p = b.pk[i];
            k[i] = p > 0.0 && rng.random::<f64>() < p;
        }
    }
    k
}

pub fn sample_ignition_field<R: Rng + ?Sized>(
    b: &BeliefState,
    params: &GpcParams,
    grid: &RegionGrid,
    rng: &mut R,
) -> Result<Vec<bool>> {
    let cov = window_cov(b, params, grid)?;
    Ok(sample_ignition_with(b, cov.as_ref(), rng))
}

/// Draws `(Q, H, D)` by sequential binomials.
pub fn sample_multinomial<R: Rng + ?Sized>(eta: u32, pq: f64, ph: f64, rng: &mut R) -> (u32, u32, u32) {
    let n = eta as u64;
    let pq = pq.clamp(0.0, 1.0);
    let q = Binomial::new(n, pq).expect("probability in range").sample(rng);
    let rest = 1.0 - pq;
    let ph_c = if rest > 0.0 { (ph / rest).clamp(0.0, 1.0) } else { 0.0 };
    let h = Binomial::new(n - q, ph_c).expect("probability in range").sample(rng);
    (q as u32, h as u32, (n - q - h) as u32)
}

pub fn sample_fuel_state<R: Rng + ?Sized>(b: &BeliefState, k: &[bool], grid: &RegionGrid, rng: &mut R) -> SampledWorld {
    let n = grid.len();
    let mut w = SampledWorld {
        k: k.to_vec(),
        h: vec![0; n],
        q: vec![0; n],
        d: vec![0; n],
    };
    for z in grid.zones() {
        let i = z.0;
        let eta = grid.fuel(z).eta;
        if k[i] {
            let (q, h, d) = sample_multinomial(eta, b.pq[i], b.ph[i], rng);
            w.q[i] = q;
            w.h[i] = h;
            w.d[i] = d;
        } else {
            w.h[i] = eta;
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::FuelParams;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid(w: usize, h: usize) -> RegionGrid {
        RegionGrid::uniform(w, h, 30.0, FuelParams::default(), ZoneId(0)).unwrap()
    }

    #[test]
    fn single_zone_variance() {
        let g = grid(1, 1);
        let p = GpcParams::default();
        let w = 0.2;
        let cov = laplace_field_cov(&[ZoneId(0)], &p, &[w], &g).unwrap();
        assert_abs_diff_eq!(
            cov.covariance()[(0, 0)],
            1.0 / (1.0 / p.prior_var() + w),
            epsilon = 1e-12
        );
    }

    #[test]
    fn zero_curvature_gives_prior() {
        let g = grid(4, 1);
        let p = GpcParams::default();
        let zones: Vec<ZoneId> = g.zones().collect();
        let cov = laplace_field_cov(&zones, &p, &[0.0; 4], &g).unwrap().covariance();
        let k = p.kernel_matrix(&g, &zones);
        for i in 0..4 {
            for j in 0..4 {
                assert_abs_diff_eq!(cov[(i, j)], k[(i, j)], epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn saturated_probability_ignites() {
        let g = grid(1, 1);
        let mut b = BeliefState::healthy(vec![1.0 - 1e-6]);
        b.window = vec![ZoneId(0)];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let hits = (0..1000)
            .filter(|_| sample_ignition_field(&b, &GpcParams::default(), &g, &mut rng).unwrap()[0])
            .count();
        assert!(hits > 990);
    }

    #[test]
    fn unignited_zone_is_all_healthy() {
        let g = grid(2, 1);
        let mut b = BeliefState::healthy(vec![0.5; 2]);
        b.pq = vec![1.0, 1.0];
        b.ph = vec![0.0, 0.0];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = sample_fuel_state(&b, &[false, true], &g, &mut rng);
        assert_eq!((w.h[0], w.q[0], w.d[0]), (100, 0, 0));
        assert_eq!((w.h[1], w.q[1], w.d[1]), (0, 100, 0));
    }

    #[test]
    fn multinomial_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let (q, h, d) = sample_multinomial(100, 0.2, 0.5, &mut rng);
            assert_eq!(q + h + d, 100);
            sum += q as f64;
        }
        let se = (100.0 * 0.2 * 0.8 / n as f64).sqrt();
        assert!((sum / n as f64 - 20.0).abs() < 3.0 * se);
    }
}
