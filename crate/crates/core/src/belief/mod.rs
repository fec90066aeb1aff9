//! The drone's belief over the hidden fire state and its per-step update:
//! post-decision mask, spread forecast, observation labels, GP
//! classification, start/burn split and fuel-fraction update.

pub mod classify;
pub mod forecast;
pub mod fuel;
pub mod gpc;

use serde::{Deserialize, Serialize};

pub use classify::{cdf_pdf_ratio, classify_observations, ClassifierParams};
pub use forecast::{forecast_ignition, SpreadKernelParams};
pub use fuel::{drift_one, start_burn_split, update_fuel_belief, BurnFactor};
pub use gpc::{gpc_update, GpcOutput, GpcParams};

use crate::error::{Error, Result};
use crate::fire::Observation;
use crate::region::{RegionGrid, ZoneId};

const SIMPLEX_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeliefState {
    pub pk: Vec<f64>,
    pub pq: Vec<f64>,
    pub ph: Vec<f64>,
    pub pd: Vec<f64>,
    pub extinguished: Vec<bool>,
    pub t: usize,
    /// Zones updated by the classifier at the last step.
    pub window: Vec<ZoneId>,
}

impl BeliefState {
    /// Belief with the given ignition probabilities and all fuel healthy.
    pub fn healthy(pk: Vec<f64>) -> Self {
        let n = pk.len();
        Self {
            pk,
            pq: vec![0.0; n],
            ph: vec![1.0; n],
            pd: vec![0.0; n],
            extinguished: vec![false; n],
            t: 0,
            window: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.pk.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pk.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.pk.len();
        if self.pq.len() != n || self.ph.len() != n || self.pd.len() != n || self.extinguished.len() != n {
            return Err(Error::Dimension("belief arrays differ in length".into()));
        }
        for i in 0..n {
            let parts = [self.pk[i], self.pq[i], self.ph[i], self.pd[i]];
            if parts.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::Invariant(format!(
                    "zone {i}: belief parameter outside [0, 1]: {parts:?}"
                )));
            }
            let s = self.pq[i] + self.ph[i] + self.pd[i];
            if (s - 1.0).abs() > SIMPLEX_TOL {
                return Err(Error::Invariant(format!("zone {i}: pQ+pH+pD = {s}")));
            }
            if self.extinguished[i] && (self.pk[i] != 0.0 || self.pq[i] != 0.0) {
                return Err(Error::Invariant(format!(
                    "zone {i}: extinguished zone has pK or pQ mass"
                )));
            }
        }
        Ok(())
    }

    /// Expected burning cost `sum r eta pQ`.
    pub fn expected_burning_cost(&self, grid: &RegionGrid) -> f64 {
        grid.zones()
            .map(|z| {
                let f = grid.fuel(z);
                f.r * f.eta as f64 * self.pq[z.0]
            })
            .sum()
    }
}

/// Masks the helicopter footprint: ignition probability drops to zero and
/// burning mass becomes dead mass.
pub fn post_decision_belief(b: &BeliefState, footprint: &[ZoneId]) -> BeliefState {
    let mut next = b.clone();
    for z in footprint {
        let i = z.0;
        next.pk[i] = 0.0;
        next.pd[i] += next.pq[i];
        next.pq[i] = 0.0;
        next.extinguished[i] = true;
    }
    next
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BeliefParams {
    pub kernel: SpreadKernelParams,
    pub gpc: GpcParams,
    pub classifier: ClassifierParams,
    pub burn_factor: BurnFactor,
    /// Forecast cutoff in zone widths.
    pub cutoff_zones: f64,
}

impl Default for BeliefParams {
    fn default() -> Self {
        Self {
            kernel: SpreadKernelParams::default(),
            gpc: GpcParams::default(),
            classifier: ClassifierParams::default(),
            burn_factor: BurnFactor::default(),
            cutoff_zones: 10.0,
        }
    }
}

impl BeliefParams {
    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        self.gpc.validate()?;
        self.classifier.validate()?;
        if !(self.cutoff_zones > 0.0) {
            return Err(Error::Invariant("forecast cutoff must be positive".into()));
        }
        Ok(())
    }

    pub fn cutoff_m(&self, grid: &RegionGrid) -> f64 {
        self.cutoff_zones * grid.zone_size_m()
    }
}

/// Names of the update stages in the order they ran.
pub const PIPELINE: [&str; 6] = ["post_decision", "forecast", "classify", "gpc", "split", "fuel"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeliefUpdate {
    pub belief: BeliefState,
    pub forecast: Vec<f64>,
    pub fallback: bool,
    pub stages: Vec<String>,
}

/// One full belief step given the helicopter footprint (empty for no drop),
/// this step's readings and the measured wind direction.
pub fn advance_belief(
    b: &BeliefState,
    footprint: &[ZoneId],
    obs: &Observation,
    phi: f64,
    params: &BeliefParams,
    grid: &RegionGrid,
) -> BeliefUpdate {
    let mut stages = Vec::with_capacity(PIPELINE.len());
    let bx = post_decision_belief(b, footprint);
    stages.push(PIPELINE[0].to_string());

    let fk = forecast_ignition(
        &bx.pk,
        &bx.extinguished,
        phi,
        &params.kernel,
        grid,
        params.cutoff_m(grid),
    );
    stages.push(PIPELINE[1].to_string());

    let labels = classify_observations(obs, &params.classifier);
    stages.push(PIPELINE[2].to_string());

    let g = gpc_update(&fk, &obs.zones, &labels, &bx.extinguished, &params.gpc, grid);
    stages.push(PIPELINE[3].to_string());

    let (p_start, p_burn) = start_burn_split(&g.pk, &bx.pk, &fk);
    stages.push(PIPELINE[4].to_string());

    let fuel = update_fuel_belief(
        (&bx.pq, &bx.ph, &bx.pd),
        &p_start,
        &p_burn,
        &bx.pk,
        obs,
        &bx.extinguished,
        params.burn_factor,
        grid,
    );
    stages.push(PIPELINE[5].to_string());

    BeliefUpdate {
        belief: BeliefState {
            pk: g.pk,
            pq: fuel.pq,
            ph: fuel.ph,
            pd: fuel.pd,
            extinguished: bx.extinguished,
            t: b.t + 1,
            window: g.window,
        },
        forecast: fk,
        fallback: g.fallback,
        stages,
    }
}

/// Expected-dynamics forecast of the belief one step ahead with no
/// observations: `pK = f`, `p_burn = pKx`, `p_start = f - pKx`.
pub fn drift_belief(bx: &BeliefState, phi: f64, params: &BeliefParams, grid: &RegionGrid) -> (BeliefState, Vec<f64>) {
    let fk = forecast_ignition(
        &bx.pk,
        &bx.extinguished,
        phi,
        &params.kernel,
        grid,
        params.cutoff_m(grid),
    );
    let mut next = bx.clone();
    next.t = bx.t + 1;
    next.window.clear();
    for z in grid.zones() {
        let i = z.0;
        let p_burn = bx.pk[i];
        let p_start = (fk[i] - p_burn).max(0.0);
        let (q, h, d) = drift_one(grid.fuel(z), (bx.pq[i], bx.ph[i], bx.pd[i]), p_start, p_burn, p_burn);
        next.pk[i] = fk[i];
        next.pq[i] = q;
        next.ph[i] = h;
        next.pd[i] = d;
    }
    (next, fk)
}
