//! Fuel-fraction belief: splitting the ignition posterior into "burning
//! before" and "newly started", and propagating the multinomial fuel
//! parameters through the expected fuel dynamics.

use serde::{Deserialize, Serialize};

use crate::fire::Observation;
use crate::region::{FuelParams, RegionGrid};

/// Which probability scales the burn and extinguish terms of the dead-fuel
/// update for unobserved zones.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BurnFactor {
    /// Observation-updated `p_burn`.
    #[default]
    Posterior,
    /// Post-decision ignition probability `pKx`.
    PostDecision,
}

/// Returns `(p_start, p_burn)` for one zone.
#[inline]
pub fn split_one(pk_next: f64, pkx: f64, fk: f64) -> (f64, f64) {
    if fk <= 0.0 {
        return (pk_next, 0.0);
    }
    let burn = (pk_next * pkx / fk).clamp(0.0, pk_next);
    let start = pk_next - burn;
    // one of the two subtractions is exact, so start + burn == pk_next bitwise
    (start, pk_next - start)
}

/// Componentwise [`split_one`].
pub fn start_burn_split(pk_next: &[f64], pkx: &[f64], fk: &[f64]) -> (Vec<f64>, Vec<f64>) {
    pk_next
        .iter()
        .zip(pkx)
        .zip(fk)
        .map(|((a, b), c)| split_one(*a, *b, *c))
        .unzip()
}

/// Expected next fuel fractions `(pQ, pH, pD)` of an unobserved zone.
/// `p_burn_dead` scales the dead-fuel terms (see [`BurnFactor`]).
#[inline]
pub fn drift_one(
    fuel: &FuelParams,
    (pq, ph, pd): (f64, f64, f64),
    p_start: f64,
    p_burn: f64,
    p_burn_dead: f64,
) -> (f64, f64, f64) {
    let eta = fuel.eta as f64;
    let grow = fuel.lambda * (eta - 1.0);
    let init = fuel.q_init as f64 / eta;
    let q = (1.0 - fuel.xi + grow * ph) * pq * p_burn + init * p_start;
    let h = ph - grow * pq * ph * p_burn - init * p_start;
    let d = pd + pq * (1.0 - p_burn_dead) + fuel.xi * pq * p_burn_dead;
    normalize(q, h, d)
}

/// Clamps each component to `[0, 1]` and rescales onto the simplex.
#[inline]
pub fn normalize(q: f64, h: f64, d: f64) -> (f64, f64, f64) {
    let (q, h, d) = (q.clamp(0.0, 1.0), h.clamp(0.0, 1.0), d.clamp(0.0, 1.0));
    let s = q + h + d;
    if s <= 0.0 {
        return (0.0, 1.0, 0.0);
    }
    (q / s, h / s, d / s)
}

/// Observed zone: the intensity reading gives the burning fraction directly.
#[inline]
pub fn observed_one(fuel: &FuelParams, y: f64) -> (f64, f64, f64) {
    let q = (y / (fuel.c * fuel.eta as f64)).clamp(0.0, 1.0);
    (q, 1.0 - q, 0.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FuelBelief {
    pub pq: Vec<f64>,
    pub ph: Vec<f64>,
    pub pd: Vec<f64>,
}

/// Applies the observed branch to non-extinguished observed zones and the
/// expected-dynamics branch everywhere else.
#[allow(clippy::too_many_arguments)]
pub fn update_fuel_belief(
    prev: (&[f64], &[f64], &[f64]),
    p_start: &[f64],
    p_burn: &[f64],
    pkx: &[f64],
    obs: &Observation,
    extinguished: &[bool],
    burn_factor: BurnFactor,
    grid: &RegionGrid,
) -> FuelBelief {
    let n = grid.len();
    let mut out = FuelBelief {
        pq: vec![0.0; n],
        ph: vec![0.0; n],
        pd: vec![0.0; n],
    };
    for z in grid.zones() {
        let i = z.0;
        let dead = match burn_factor {
            BurnFactor::Posterior => p_burn[i],
            BurnFactor::PostDecision => pkx[i],
        };
        let (q, h, d) = drift_one(
            grid.fuel(z),
            (prev.0[i], prev.1[i], prev.2[i]),
            p_start[i],
            p_burn[i],
            dead,
        );
        out.pq[i] = q;
        out.ph[i] = h;
        out.pd[i] = d;
    }
    for (z, y) in obs.zones.iter().zip(&obs.values) {
        if extinguished[z.0] {
            continue;
        }
        let (q, h, d) = observed_one(grid.fuel(*z), *y);
        out.pq[z.0] = q;
        out.ph[z.0] = h;
        out.pd[z.0] = d;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn split_examples() {
        assert_eq!(split_one(0.7, 0.0, 0.4), (0.7, 0.0));
        let (s, b) = split_one(0.7, 0.4, 0.4);
        assert_abs_diff_eq!(b, 0.7);
        assert_abs_diff_eq!(s, 0.0);
        let (s, b) = split_one(0.6, 0.2, 0.5);
        assert_abs_diff_eq!(b, 0.24, epsilon = 1e-15);
        assert_abs_diff_eq!(s, 0.36, epsilon = 1e-15);
        assert_eq!(split_one(0.3, 0.0, 0.0), (0.3, 0.0));
    }

    #[test]
    fn observed_branch() {
        let f = FuelParams::default();
        assert_eq!(observed_one(&f, 30.0), (0.3, 0.7, 0.0));
        assert_eq!(observed_one(&f, -4.0), (0.0, 1.0, 0.0));
        assert_eq!(observed_one(&f, 400.0), (1.0, 0.0, 0.0));
    }

    #[test]
    fn no_fire_moves_burning_mass_to_dead() {
        let f = FuelParams::default();
        let (q, h, d) = drift_one(&f, (0.3, 0.5, 0.2), 0.0, 0.0, 0.0);
        assert_eq!(q, 0.0);
        assert_abs_diff_eq!(h, 0.5);
        assert_abs_diff_eq!(d, 0.5);
    }

    #[test]
    fn burning_zone_example() {
        let f = FuelParams {
            eta: 100,
            lambda: 0.002,
            xi: 0.1,
            ..FuelParams::default()
        };
        let (q, h, d) = drift_one(&f, (0.2, 0.7, 0.1), 0.0, 1.0, 1.0);
        assert_abs_diff_eq!(q, 0.207_72, epsilon = 1e-12);
        assert_abs_diff_eq!(q + h + d, 1.0, epsilon = 1e-12);
    }
}
