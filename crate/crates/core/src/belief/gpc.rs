//! Laplace-approximate Gaussian-process classification of ignition.
//!
//! The latent field has an RBF covariance over zone centers and a prior mean
//! derived from the spread forecast. Observed zones carry a 0/1 ignition
//! label with a logistic likelihood. The posterior mode is found by damped
//! Newton iteration on the observed block; unobserved zones near the
//! observations get a moderated predictive probability.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::footprint::Disk;
use crate::linalg::{dot, Cholesky, Mat};
use crate::region::{RegionGrid, ZoneId};

/// Probabilities are clamped to `[P_CLAMP, 1 - P_CLAMP]` before taking logits.
pub const P_CLAMP: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GpcParams {
    /// Signal variance.
    pub theta_cov0: f64,
    /// Inverse squared length-scale (1/m^2).
    pub theta_cov1: f64,
    /// Nugget added on the diagonal.
    pub theta_cov2: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Unobserved zones within this distance of an observation are updated.
    pub active_radius_m: f64,
}

impl Default for GpcParams {
    fn default() -> Self {
        Self {
            theta_cov0: 4.0,
            theta_cov1: 1e-4,
            theta_cov2: 0.05,
            newton_tol: 1e-8,
            newton_max_iter: 50,
            active_radius_m: 90.0,
        }
    }
}

impl GpcParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("theta_cov0", self.theta_cov0),
            ("theta_cov1", self.theta_cov1),
            ("theta_cov2", self.theta_cov2),
            ("newton_tol", self.newton_tol),
            ("active_radius_m", self.active_radius_m),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Invariant(format!("{name} must be positive, got {v}")));
            }
        }
        if self.newton_max_iter == 0 {
            return Err(Error::Invariant("newton_max_iter must be at least 1".into()));
        }
        Ok(())
    }

    /// Prior variance of a single latent value.
    pub fn prior_var(&self) -> f64 {
        self.theta_cov0 + self.theta_cov2
    }

    pub fn kernel(&self, grid: &RegionGrid, a: ZoneId, b: ZoneId) -> f64 {
        if a == b {
            return self.prior_var();
        }
        let d = grid.distance(a, b);
        self.theta_cov0 * (-self.theta_cov1 * d * d).exp()
    }

    pub fn kernel_matrix(&self, grid: &RegionGrid, zones: &[ZoneId]) -> Mat {
        Mat::from_fn(zones.len(), |i, j| self.kernel(grid, zones[i], zones[j]))
    }

    /// Latent prior mean for forecast probability `f`.
    ///
    /// The logit is stretched by `sqrt(1 + pi v / 8)` so that the moderated
    /// prior predictive `sigmoid(kappa m)` returns `f` itself: a zone that
    /// learns nothing from the observations keeps its forecast.
    pub fn prior_mean(&self, f: f64) -> f64 {
        logit(f) * (1.0 + std::f64::consts::PI * self.prior_var() / 8.0).sqrt()
    }
}

#[inline]
pub fn clamp_p(p: f64) -> f64 {
    p.clamp(P_CLAMP, 1.0 - P_CLAMP)
}

#[inline]
pub fn logit(p: f64) -> f64 {
    let p = clamp_p(p);
    (p / (1.0 - p)).ln()
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Probit-style moderation of a Gaussian latent `N(mean, var)`.
#[inline]
pub fn moderated(mean: f64, var: f64) -> f64 {
    sigmoid(mean / (1.0 + std::f64::consts::PI * var.max(0.0) / 8.0).sqrt())
}

fn log_lik(y: &[f64], g: &[f64]) -> f64 {
    y.iter()
        .zip(g)
        .map(|(y, g)| if *y > 0.5 { -softplus(-g) } else { -softplus(*g) })
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GpcOutput {
    pub pk: Vec<f64>,
    /// Unobserved zones updated by the classifier, in index order.
    pub window: Vec<ZoneId>,
    /// Newton did not converge; window zones kept their forecast.
    pub fallback: bool,
    pub iterations: usize,
}

/// Non-extinguished, unobserved zones within `active_radius_m` of an
/// observed zone.
pub fn active_window(observed: &[ZoneId], extinguished: &[bool], params: &GpcParams, grid: &RegionGrid) -> Vec<ZoneId> {
    let disk = Disk::for_grid(grid, params.active_radius_m);
    let mut mark = vec![false; grid.len()];
    for z in observed {
        for n in disk.zones(grid, *z) {
            mark[n.0] = true;
        }
    }
    for z in observed {
        mark[z.0] = false;
    }
    grid.zones().filter(|z| mark[z.0] && !extinguished[z.0]).collect()
}

/// Posterior mode of the latent values at the training zones.
pub(crate) struct LaplaceFit {
    /// `y - pi` at the mode.
    grad: Vec<f64>,
    sqrt_w: Vec<f64>,
    chol_b: Cholesky,
    pub iterations: usize,
}

pub(crate) fn fit_mode(k: &Mat, mean: &[f64], y: &[f64], tol: f64, max_iter: usize) -> Option<LaplaceFit> {
    let n = mean.len();
    let mut g = mean.to_vec();
    let mut a = vec![0.0; n];
    let mut psi = log_lik(y, &g);
    for it in 1..=max_iter {
        let pi: Vec<f64> = g.iter().map(|v| sigmoid(*v)).collect();
        let w: Vec<f64> = pi.iter().map(|p| p * (1.0 - p)).collect();
        let s: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
        let chol = Cholesky::new(&Mat::from_fn(n, |i, j| {
            s[i] * k[(i, j)] * s[j] + if i == j { 1.0 } else { 0.0 }
        }))
        .ok()?;
        let b: Vec<f64> = (0..n).map(|i| w[i] * (g[i] - mean[i]) + y[i] - pi[i]).collect();
        let kb = k.mul_vec(&b);
        let c = chol.solve_lower(&(0..n).map(|i| s[i] * kb[i]).collect::<Vec<_>>());
        let u = chol.solve_upper(&c);
        let a_full: Vec<f64> = (0..n).map(|i| b[i] - s[i] * u[i]).collect();

        let mut step = 1.0;
        let (mut a_new, mut g_new, mut psi_new);
        loop {
            a_new = (0..n).map(|i| a[i] + step * (a_full[i] - a[i])).collect::<Vec<_>>();
            let ka = k.mul_vec(&a_new);
            g_new = (0..n).map(|i| ka[i] + mean[i]).collect::<Vec<_>>();
            psi_new = -0.5 * dot(&a_new, &ka) + log_lik(y, &g_new);
            if psi_new >= psi - 1e-12 || step < 1e-6 {
                break;
            }
            step *= 0.5;
        }
        let delta = g.iter().zip(&g_new).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        a = a_new;
        g = g_new;
        psi = psi_new;
        if delta < tol {
            let pi: Vec<f64> = g.iter().map(|v| sigmoid(*v)).collect();
            let s: Vec<f64> = pi.iter().map(|p| (p * (1.0 - p)).sqrt()).collect();
            let chol_b = Cholesky::new(&Mat::from_fn(n, |i, j| {
                s[i] * k[(i, j)] * s[j] + if i == j { 1.0 } else { 0.0 }
            }))
            .ok()?;
            let grad = (0..n).map(|i| y[i] - pi[i]).collect();
            return Some(LaplaceFit {
                grad,
                sqrt_w: s,
                chol_b,
                iterations: it,
            });
        }
    }
    None
}

impl LaplaceFit {
    /// Predictive latent mean and variance at a zone with prior mean `m`,
    /// cross-covariance `kstar` to the training zones and prior variance `kss`.
    pub(crate) fn predict(&self, m: f64, kstar: &[f64], kss: f64) -> (f64, f64) {
        let mean = m + dot(kstar, &self.grad);
        let sk: Vec<f64> = kstar.iter().zip(&self.sqrt_w).map(|(k, s)| k * s).collect();
        let v = self.chol_b.solve_lower(&sk);
        (mean, kss - dot(&v, &v))
    }
}

/// Updates ignition probabilities from labeled observations.
///
/// Observed zones take their label. Unobserved zones in the active window
/// get the moderated GP prediction; all others keep `prior_fk`. Extinguished
/// zones are always 0.
pub fn gpc_update(
    prior_fk: &[f64],
    observed: &[ZoneId],
    labels: &[bool],
    extinguished: &[bool],
    params: &GpcParams,
    grid: &RegionGrid,
) -> GpcOutput {
    let mut pk = prior_fk.to_vec();
    for (z, l) in observed.iter().zip(labels) {
        pk[z.0] = if *l { 1.0 } else { 0.0 };
    }
    let train: Vec<(ZoneId, bool)> = observed
        .iter()
        .zip(labels)
        .filter(|(z, _)| !extinguished[z.0])
        .map(|(z, l)| (*z, *l))
        .collect();
    let train_zones: Vec<ZoneId> = train.iter().map(|t| t.0).collect();
    let window = if train.is_empty() {
        Vec::new()
    } else {
        active_window(observed, extinguished, params, grid)
    };
    let mut out = GpcOutput {
        pk,
        window,
        fallback: false,
        iterations: 0,
    };
    if out.window.is_empty() {
        finish(&mut out.pk, extinguished);
        return out;
    }

    let k = params.kernel_matrix(grid, &train_zones);
    let mean: Vec<f64> = train_zones.iter().map(|z| params.prior_mean(prior_fk[z.0])).collect();
    let y: Vec<f64> = train.iter().map(|t| if t.1 { 1.0 } else { 0.0 }).collect();
    match fit_mode(&k, &mean, &y, params.newton_tol, params.newton_max_iter) {
        Some(fit) => {
            out.iterations = fit.iterations;
            for z in &out.window {
                let kstar: Vec<f64> = train_zones.iter().map(|t| params.kernel(grid, *z, *t)).collect();
                let (m, v) = fit.predict(params.prior_mean(prior_fk[z.0]), &kstar, params.prior_var());
                out.pk[z.0] = moderated(m, v);
            }
        }
        None => {
            out.fallback = true;
            out.iterations = params.newton_max_iter;
        }
    }
    finish(&mut out.pk, extinguished);
    out
}

fn finish(pk: &mut [f64], extinguished: &[bool]) {
    for (p, e) in pk.iter_mut().zip(extinguished) {
        *p = if *e { 0.0 } else { p.clamp(0.0, 1.0) };
    }
}
