//! Scenario configuration (TOML) and the synthetic region generator.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::belief::{BeliefParams, SpreadKernelParams};
use crate::drone::{DronePolicyParams, DroneVariant};
use crate::error::{Error, Result};
use crate::fire::SpreadParams;
use crate::heli::{HeliPolicyParams, HeliVariant};
use crate::region::{load_region_with, load_wind_series, FuelParams, RegionGrid, WindModelParams, WindState, ZoneId};

pub const SQ_M_PER_ACRE: f64 = 4046.8564224;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionSource {
    /// `row,col,...` CSV as read by [`crate::region::read_region`].
    File {
        path: PathBuf,
        #[serde(default = "default_zone_size")]
        zone_size_m: f64,
        #[serde(default)]
        home: ZoneId,
    },
    Synthetic(SyntheticRegion),
}

fn default_zone_size() -> f64 {
    30.0
}

impl Default for RegionSource {
    fn default() -> Self {
        RegionSource::Synthetic(SyntheticRegion::default())
    }
}

/// Rolling terrain with mildly varying fuel moisture.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticRegion {
    pub width: usize,
    pub height: usize,
    pub zone_size_m: f64,
    pub home: ZoneId,
    pub fuel: FuelParams,
    /// Peak-to-trough elevation of a single smooth hill (m).
    pub relief_m: f64,
    /// Relative uniform jitter applied to dead-fuel moisture per zone.
    pub moisture_jitter: f64,
    pub seed: u64,
}

impl Default for SyntheticRegion {
    fn default() -> Self {
        Self {
            width: 20,
            height: 20,
            zone_size_m: 30.0,
            home: ZoneId(0),
            fuel: FuelParams::default(),
            relief_m: 20.0,
            moisture_jitter: 0.1,
            seed: 7,
        }
    }
}

impl SyntheticRegion {
    pub fn build(&self) -> Result<RegionGrid> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::Config("synthetic region needs positive width and height".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let (w, h) = (self.width as f64, self.height as f64);
        let mut fuel = Vec::with_capacity(self.width * self.height);
        for r in 0..self.height {
            for c in 0..self.width {
                let mut f = self.fuel.clone();
                let hill = (std::f64::consts::PI * (r as f64 + 0.5) / h).sin()
                    * (std::f64::consts::PI * (c as f64 + 0.5) / w).sin();
                f.kappa_elev = self.fuel.kappa_elev + self.relief_m * hill;
                if self.moisture_jitter > 0.0 {
                    let j = rng.random_range(-self.moisture_jitter..=self.moisture_jitter);
                    f.kappa_moist = (f.kappa_moist * (1.0 + j)).max(0.0);
                }
                fuel.push(f);
            }
        }
        RegionGrid::new(self.width, self.height, self.zone_size_m, fuel, self.home)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WindSource {
    /// Log-normal speed and random-walk direction.
    Model {
        #[serde(default)]
        params: WindModelParams,
        #[serde(default = "default_initial_speed")]
        initial_speed_mps: f64,
        #[serde(default)]
        initial_direction_deg: f64,
    },
    /// Recorded series, one entry per step; the last entry repeats.
    File { path: PathBuf },
}

fn default_initial_speed() -> f64 {
    4.0
}

impl Default for WindSource {
    fn default() -> Self {
        WindSource::Model {
            params: WindModelParams::default(),
            initial_speed_mps: default_initial_speed(),
            initial_direction_deg: 45.0,
        }
    }
}

/// How the initial (class B) fire and the drone's prior are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialFireSpec {
    pub min_zones: usize,
    pub max_zones: usize,
    /// Keep the fire centroid at least this far from home.
    pub min_home_distance_m: f64,
    /// Keep the fire centroid this many zones away from the region edge.
    pub edge_margin_zones: usize,
    /// Burning fraction of initially lit zones, drawn uniformly from
    /// `[q_init / eta, max_burning_fraction]`.
    pub max_burning_fraction: f64,
    pub prior_peak: f64,
    /// Gaussian scale of the prior around the smoke centroid.
    pub prior_scale_m: f64,
    /// Prior mass is zero beyond this radius.
    pub prior_radius_m: f64,
}

impl Default for InitialFireSpec {
    fn default() -> Self {
        Self {
            min_zones: 5,
            max_zones: class_b_max_zones(30.0),
            min_home_distance_m: 150.0,
            edge_margin_zones: 3,
            max_burning_fraction: 0.5,
            prior_peak: 0.9,
            prior_scale_m: 90.0,
            // about 25 acres
            prior_radius_m: (25.0 * SQ_M_PER_ACRE / std::f64::consts::PI).sqrt(),
        }
    }
}

/// Largest zone count whose area stays under 10 acres.
pub fn class_b_max_zones(zone_size_m: f64) -> usize {
    let a = zone_size_m * zone_size_m;
    let n = (10.0 * SQ_M_PER_ACRE / a).floor() as usize;
    if n as f64 * a >= 10.0 * SQ_M_PER_ACRE {
        n.saturating_sub(1)
    } else {
        n
    }
}

/// The parameters that differ between joint policies.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicySet {
    pub heli: HeliPolicyParams,
    pub drone: DronePolicyParams,
    /// Spread kernel the drone's belief and lookahead assume.
    pub kernel: SpreadKernelParams,
}

impl PolicySet {
    /// No drops, drone parked at home.
    pub fn null(base: &PolicySet) -> PolicySet {
        let mut p = base.clone();
        p.heli.variant = HeliVariant::Null;
        p.drone.variant = DroneVariant::Home;
        p
    }

    pub fn with_variants(base: &PolicySet, heli: HeliVariant, drone: DroneVariant) -> PolicySet {
        let mut p = base.clone();
        p.heli.variant = heli;
        p.drone.variant = drone;
        p
    }

    /// Inverse of [`PolicySet::label`]: `"<heli>+<drone>"` or `"null"`.
    pub fn from_label(base: &PolicySet, label: &str) -> Result<PolicySet> {
        if label == "null" {
            return Ok(PolicySet::null(base));
        }
        let (h, d) = label
            .split_once('+')
            .ok_or_else(|| Error::Config(format!("policy `{label}` is not of the form heli+drone")))?;
        let heli = match h {
            "null" => HeliVariant::Null,
            "dla1" => HeliVariant::Dla1,
            "cfa_dla" => HeliVariant::CfaDla,
            _ => return Err(Error::Config(format!("unknown helicopter policy `{h}`"))),
        };
        let drone = match d {
            "home" => DroneVariant::Home,
            "pfa_cfa" => DroneVariant::PfaCfa,
            "ts_dla" => DroneVariant::TsDla,
            "ie_dla" => DroneVariant::IeDla,
            _ => return Err(Error::Config(format!("unknown drone policy `{d}`"))),
        };
        Ok(PolicySet::with_variants(base, heli, drone))
    }

    pub fn label(&self) -> String {
        let h = match self.heli.variant {
            HeliVariant::Null => "null",
            HeliVariant::Dla1 => "dla1",
            HeliVariant::CfaDla => "cfa_dla",
        };
        let d = match self.drone.variant {
            DroneVariant::Home => "home",
            DroneVariant::PfaCfa => "pfa_cfa",
            DroneVariant::TsDla => "ts_dla",
            DroneVariant::IeDla => "ie_dla",
        };
        format!("{h}+{d}")
    }

    /// Sets a tunable by name: `theta0`, `theta1`, `theta_heli`,
    /// `theta_ie` (all stages), `theta_ie.K`, `horizon`, `m_scenarios`.
    pub fn set_param(&mut self, name: &str, v: f64) -> Result<()> {
        match name {
            "theta0" => self.kernel.theta0 = v,
            "theta1" => self.kernel.theta1 = v,
            "theta_heli" => self.heli.theta_heli = v,
            "theta_ie" => self.drone.theta_ie = vec![v],
            "horizon" => self.drone.horizon = as_count(name, v)?,
            "m_scenarios" => self.drone.m_scenarios = as_count(name, v)?,
            _ => match name.strip_prefix("theta_ie.").map(str::parse::<usize>) {
                Some(Ok(k)) => {
                    let last = *self.drone.theta_ie.last().unwrap_or(&0.0);
                    if self.drone.theta_ie.len() <= k {
                        self.drone.theta_ie.resize(k + 1, last);
                    }
                    self.drone.theta_ie[k] = v;
                }
                _ => return Err(Error::Config(format!("unknown tunable parameter `{name}`"))),
            },
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.heli.validate()?;
        self.drone.validate()?;
        self.kernel.validate()
    }
}

fn as_count(name: &str, v: f64) -> Result<usize> {
    if v >= 1.0 && v.fract() == 0.0 && v.is_finite() {
        Ok(v as usize)
    } else {
        Err(Error::Config(format!("`{name}` must be a positive integer, got {v}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub region: RegionSource,
    pub wind: WindSource,
    /// Steps per episode.
    pub horizon_t: usize,
    pub c_fail: f64,
    /// Standard deviation of the true sensor noise.
    pub obs_noise_sigma: f64,
    pub spread: SpreadParams,
    pub belief: BeliefParams,
    pub initial_fire: InitialFireSpec,
    pub policy: PolicySet,
    pub seed: u64,
    pub episodes: usize,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            name: "desk".into(),
            region: RegionSource::default(),
            wind: WindSource::default(),
            horizon_t: 12,
            c_fail: 1.0e4,
            obs_noise_sigma: 1.0,
            spread: SpreadParams::default(),
            belief: BeliefParams::default(),
            initial_fire: InitialFireSpec::default(),
            policy: PolicySet::default(),
            seed: 1,
            episodes: 200,
            base_dir: None,
        }
    }
}

impl ScenarioConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text, &path.display().to_string())?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn from_toml(text: &str, context: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::parse(context, e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon_t == 0 {
            return Err(Error::Config("horizon_t must be at least 1".into()));
        }
        if !(self.c_fail >= 0.0 && self.c_fail.is_finite()) {
            return Err(Error::Config(format!(
                "c_fail must be nonnegative, got {}",
                self.c_fail
            )));
        }
        if !(self.obs_noise_sigma >= 0.0 && self.obs_noise_sigma.is_finite()) {
            return Err(Error::Config("obs_noise_sigma must be nonnegative".into()));
        }
        let f = &self.initial_fire;
        if f.min_zones > f.max_zones {
            return Err(Error::Config(format!(
                "initial_fire.min_zones {} exceeds max_zones {}",
                f.min_zones, f.max_zones
            )));
        }
        if !(f.prior_scale_m > 0.0 && f.prior_radius_m > 0.0) || !(0.0..=1.0).contains(&f.prior_peak) {
            return Err(Error::Config(
                "initial_fire prior needs positive scale/radius and peak in [0, 1]".into(),
            ));
        }
        if !(0.0..=1.0).contains(&f.max_burning_fraction) {
            return Err(Error::Config("max_burning_fraction must lie in [0, 1]".into()));
        }
        if let WindSource::Model { params, .. } = &self.wind {
            params.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        self.spread.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.belief.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.policy.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        }
    }

    pub fn build_region(&self) -> Result<RegionGrid> {
        match &self.region {
            RegionSource::File {
                path,
                zone_size_m,
                home,
            } => load_region_with(self.resolve(path), *zone_size_m, *home),
            RegionSource::Synthetic(s) => s.build(),
        }
    }

    /// Recorded wind series, when configured.
    pub fn wind_series(&self) -> Result<Option<Vec<WindState>>> {
        match &self.wind {
            WindSource::File { path } => {
                let s = load_wind_series(self.resolve(path))?;
                if s.is_empty() {
                    return Err(Error::Config("wind series is empty".into()));
                }
                Ok(Some(s))
            }
            WindSource::Model { .. } => Ok(None),
        }
    }
}
