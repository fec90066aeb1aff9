//! Static region geometry, per-zone fuel parameters and wind inputs.
//!
//! Zones are the cells of a rectangular `width x height` grid indexed in
//! row-major order (`index = row * width + col`). Row 0 is the northern edge
//! and zone 0 is the north-west corner. Distances are Euclidean between zone
//! centers in meters. Angles are radians measured clockwise from north.

use std::f64::consts::{PI, TAU};
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack used when comparing a distance against a radius, so that cells sitting
/// exactly on the circle (e.g. 180 m on a 30 m grid) are counted in.
pub const RADIUS_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ZoneId(pub usize);

impl ZoneId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl std::fmt::Display for ZoneId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "z{}", self.0)
    }
}

/// Fuel characteristics of one zone.
///
/// The `kappa_*`, `m_tot` and `m_eff` fields use the customary surface-fire
/// units (lb/ft^2, 1/ft, ft, fraction, Btu/lb, lb/ft^3). The remaining fields
/// drive the discrete fuel dynamics and the cost model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FuelParams {
    pub kappa_load: f64,
    pub kappa_sav: f64,
    pub kappa_depth: f64,
    pub kappa_moist: f64,
    pub kappa_heat: f64,
    pub kappa_dens: f64,
    pub m_tot: f64,
    pub m_eff: f64,
    /// Rate at which burning fuel ignites healthy fuel (1 / fuel unit / step).
    pub lambda: f64,
    /// Rate at which burning fuel dies out on its own (1 / step).
    pub xi: f64,
    /// Cost per burning fuel unit.
    pub r: f64,
    /// Intensity constant relating burning fuel to the sensor reading.
    pub c: f64,
    /// Total fuel units in the zone.
    pub eta: u32,
    /// Fuel units lit when the zone first ignites.
    pub q_init: u32,
    /// Elevation in meters.
    pub kappa_elev: f64,
}

impl Default for FuelParams {
    /// Short-grass-like synthetic fuel. Not measured data.
    fn default() -> Self {
        Self {
            kappa_load: 0.034,
            kappa_sav: 3500.0,
            kappa_depth: 1.0,
            kappa_moist: 0.06,
            kappa_heat: 8000.0,
            kappa_dens: 32.0,
            m_tot: 0.0555,
            m_eff: 0.010,
            lambda: 0.005,
            xi: 0.1,
            r: 1.0,
            c: 1.0,
            eta: 100,
            q_init: 20,
            kappa_elev: 0.0,
        }
    }
}

impl FuelParams {
    pub fn validate(&self, zone: usize) -> Result<()> {
        let positive = [
            ("kappa_load", self.kappa_load),
            ("kappa_sav", self.kappa_sav),
            ("kappa_depth", self.kappa_depth),
            ("kappa_heat", self.kappa_heat),
            ("kappa_dens", self.kappa_dens),
            ("m_eff", self.m_eff),
            ("c", self.c),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Invariant(format!(
                    "zone {zone}: {name} must be positive, got {v}"
                )));
            }
        }
        let nonneg = [
            ("kappa_moist", self.kappa_moist),
            ("m_tot", self.m_tot),
            ("lambda", self.lambda),
            ("xi", self.xi),
            ("r", self.r),
        ];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Invariant(format!(
                    "zone {zone}: {name} must be nonnegative, got {v}"
                )));
            }
        }
        if !self.kappa_elev.is_finite() {
            return Err(Error::Invariant(format!("zone {zone}: kappa_elev must be finite")));
        }
        if self.xi > 1.0 {
            return Err(Error::Invariant(format!(
                "zone {zone}: xi must lie in [0, 1], got {}",
                self.xi
            )));
        }
        if self.eta == 0 {
            return Err(Error::Invariant(format!("zone {zone}: eta must be a positive integer")));
        }
        if self.q_init == 0 || self.q_init > self.eta {
            return Err(Error::Invariant(format!(
                "zone {zone}: q_init must satisfy 0 < q_init <= eta, got q_init={} eta={}",
                self.q_init, self.eta
            )));
        }
        if self.lambda * (self.eta as f64 - 1.0) > 1.0 + self.xi + 1e-12 {
            return Err(Error::Invariant(format!(
                "zone {zone}: lambda * (eta - 1) = {} exceeds 1 + xi = {}",
                self.lambda * (self.eta as f64 - 1.0),
                1.0 + self.xi
            )));
        }
        Ok(())
    }

    /// Componentwise mean of two zones' fuel, used for spread between
    /// heterogeneous zones.
    pub fn averaged(&self, other: &FuelParams) -> FuelParams {
        let m = |a: f64, b: f64| 0.5 * (a + b);
        FuelParams {
            kappa_load: m(self.kappa_load, other.kappa_load),
            kappa_sav: m(self.kappa_sav, other.kappa_sav),
            kappa_depth: m(self.kappa_depth, other.kappa_depth),
            kappa_moist: m(self.kappa_moist, other.kappa_moist),
            kappa_heat: m(self.kappa_heat, other.kappa_heat),
            kappa_dens: m(self.kappa_dens, other.kappa_dens),
            m_tot: m(self.m_tot, other.m_tot),
            m_eff: m(self.m_eff, other.m_eff),
            lambda: m(self.lambda, other.lambda),
            xi: m(self.xi, other.xi),
            r: m(self.r, other.r),
            c: m(self.c, other.c),
            eta: ((self.eta + other.eta) as f64 / 2.0).round() as u32,
            q_init: ((self.q_init + other.q_init) as f64 / 2.0).round() as u32,
            kappa_elev: m(self.kappa_elev, other.kappa_elev),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionGrid {
    width: usize,
    height: usize,
    zone_size_m: f64,
    fuel: Vec<FuelParams>,
    home: ZoneId,
}

impl RegionGrid {
    pub fn new(width: usize, height: usize, zone_size_m: f64, fuel: Vec<FuelParams>, home: ZoneId) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimension(format!(
                "grid must be non-empty, got {width}x{height}"
            )));
        }
        if fuel.len() != width * height {
            return Err(Error::Dimension(format!(
                "{} fuel rows for a {width}x{height} grid",
                fuel.len()
            )));
        }
        if !(zone_size_m.is_finite() && zone_size_m > 0.0) {
            return Err(Error::Invariant(format!(
                "zone size must be positive, got {zone_size_m}"
            )));
        }
        if home.0 >= width * height {
            return Err(Error::Invariant(format!("home zone {} outside grid", home.0)));
        }
        for (i, f) in fuel.iter().enumerate() {
            f.validate(i)?;
        }
        Ok(Self {
            width,
            height,
            zone_size_m,
            fuel,
            home,
        })
    }

    /// Grid with the same fuel in every zone.
    pub fn uniform(width: usize, height: usize, zone_size_m: f64, fuel: FuelParams, home: ZoneId) -> Result<Self> {
        Self::new(width, height, zone_size_m, vec![fuel; width * height], home)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }
    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }
    #[inline]
    pub fn len(&self) -> usize {
        self.width * self.height
    }
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    #[inline]
    pub fn zone_size_m(&self) -> f64 {
        self.zone_size_m
    }
    #[inline]
    pub fn home(&self) -> ZoneId {
        self.home
    }
    #[inline]
    pub fn fuel(&self, z: ZoneId) -> &FuelParams {
        &self.fuel[z.0]
    }
    pub fn fuels(&self) -> &[FuelParams] {
        &self.fuel
    }
    /// Area of one zone in square meters.
    pub fn zone_area_m2(&self) -> f64 {
        self.zone_size_m * self.zone_size_m
    }

    #[inline]
    pub fn zone(&self, row: usize, col: usize) -> ZoneId {
        debug_assert!(row < self.height && col < self.width);
        ZoneId(row * self.width + col)
    }

    #[inline]
    pub fn row_col(&self, z: ZoneId) -> (usize, usize) {
        (z.0 / self.width, z.0 % self.width)
    }

    /// Zone containing the point `(north_m, east_m)` measured from the
    /// north-west corner of the grid, if inside.
    pub fn zone_at(&self, south_m: f64, east_m: f64) -> Option<ZoneId> {
        if south_m < 0.0 || east_m < 0.0 {
            return None;
        }
        let row = (south_m / self.zone_size_m).floor() as usize;
        let col = (east_m / self.zone_size_m).floor() as usize;
        (row < self.height && col < self.width).then(|| self.zone(row, col))
    }

    /// Center of zone `z` as `(south_m, east_m)` from the north-west corner.
    pub fn center(&self, z: ZoneId) -> (f64, f64) {
        let (r, c) = self.row_col(z);
        ((r as f64 + 0.5) * self.zone_size_m, (c as f64 + 0.5) * self.zone_size_m)
    }

    pub fn zones(&self) -> impl Iterator<Item = ZoneId> {
        (0..self.len()).map(ZoneId)
    }

    pub fn distance(&self, a: ZoneId, b: ZoneId) -> f64 {
        let (ra, ca) = self.row_col(a);
        let (rb, cb) = self.row_col(b);
        let dr = ra as f64 - rb as f64;
        let dc = ca as f64 - cb as f64;
        (dr * dr + dc * dc).sqrt() * self.zone_size_m
    }

    /// Bearing of `b` as seen from `a`, clockwise from north, in `[0, 2pi)`.
    pub fn bearing(&self, a: ZoneId, b: ZoneId) -> Result<f64> {
        if a == b {
            return Err(Error::UndefinedBearing(a.0));
        }
        let (ra, ca) = self.row_col(a);
        let (rb, cb) = self.row_col(b);
        Ok(bearing_of(ra as f64 - rb as f64, cb as f64 - ca as f64))
    }

    /// All zones whose center lies within `radius_m` of `z`'s center,
    /// including `z`, in increasing index order.
    pub fn neighbors_within(&self, z: ZoneId, radius_m: f64) -> Vec<ZoneId> {
        let (r0, c0) = self.row_col(z);
        let reach = (radius_m / self.zone_size_m).floor() as usize + 1;
        let rmin = r0.saturating_sub(reach);
        let rmax = (r0 + reach).min(self.height - 1);
        let cmin = c0.saturating_sub(reach);
        let cmax = (c0 + reach).min(self.width - 1);
        let mut out = Vec::new();
        for r in rmin..=rmax {
            for c in cmin..=cmax {
                let other = self.zone(r, c);
                if self.distance(z, other) <= radius_m + RADIUS_EPS {
                    out.push(other);
                }
            }
        }
        out
    }

    /// Rise over run from `from` to `to`; positive when `to` is uphill.
    pub fn slope(&self, from: ZoneId, to: ZoneId) -> f64 {
        if from == to {
            return 0.0;
        }
        (self.fuel[to.0].kappa_elev - self.fuel[from.0].kappa_elev) / self.distance(from, to)
    }
}

/// Bearing of a displacement given as `(north, east)` components, clockwise
/// from north, wrapped to `[0, 2pi)`.
#[inline]
pub fn bearing_of(north: f64, east: f64) -> f64 {
    wrap_angle(east.atan2(north))
}

#[inline]
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    // rem_euclid can return TAU itself for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Smallest absolute angular difference, in `[0, pi]`.
#[inline]
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    if d > PI {
        TAU - d
    } else {
        d
    }
}

#[derive(Debug, Deserialize)]
struct FuelRow {
    row: usize,
    col: usize,
    kappa_load: f64,
    kappa_sav: f64,
    kappa_depth: f64,
    kappa_moist: f64,
    kappa_heat: f64,
    kappa_dens: f64,
    m_tot: f64,
    m_eff: f64,
    lambda: f64,
    xi: f64,
    r: f64,
    c: f64,
    eta: u32,
    q_init: u32,
    kappa_elev: f64,
}

/// Column order of the region CSV.
pub const REGION_CSV_HEADER: [&str; 17] = [
    "row",
    "col",
    "kappa_load",
    "kappa_sav",
    "kappa_depth",
    "kappa_moist",
    "kappa_heat",
    "kappa_dens",
    "m_tot",
    "m_eff",
    "lambda",
    "xi",
    "r",
    "c",
    "eta",
    "q_init",
    "kappa_elev",
];

/// Loads a region from a CSV grid with 30 m zones and home at zone 0.
pub fn load_region(path: impl AsRef<Path>) -> Result<RegionGrid> {
    load_region_with(path, 30.0, ZoneId(0))
}

pub fn load_region_with(path: impl AsRef<Path>, zone_size_m: f64, home: ZoneId) -> Result<RegionGrid> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_region(file, &path.display().to_string(), zone_size_m, home)
}

/// Parses a region CSV. Rows must appear in row-major order and cover the
/// full rectangle.
pub fn read_region<R: std::io::Read>(reader: R, context: &str, zone_size_m: f64, home: ZoneId) -> Result<RegionGrid> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut rows: Vec<FuelRow> = Vec::new();
    for (i, rec) in rdr.deserialize::<FuelRow>().enumerate() {
        let row = rec.map_err(|e| Error::parse(format!("{context}, data row {}", i + 1), e))?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Dimension(format!("{context}: no zone rows")));
    }
    let width = rows.iter().map(|r| r.col).max().unwrap_or(0) + 1;
    let height = rows.iter().map(|r| r.row).max().unwrap_or(0) + 1;
    if rows.len() != width * height {
        return Err(Error::Dimension(format!(
            "{context}: {} rows but coordinates span {height}x{width}",
            rows.len()
        )));
    }
    let mut fuel = Vec::with_capacity(rows.len());
    for (i, r) in rows.into_iter().enumerate() {
        if (r.row, r.col) != (i / width, i % width) {
            return Err(Error::Dimension(format!(
                "{context}: data row {} has (row, col) = ({}, {}), expected ({}, {}) in row-major order",
                i + 1,
                r.row,
                r.col,
                i / width,
                i % width
            )));
        }
        fuel.push(FuelParams {
            kappa_load: r.kappa_load,
            kappa_sav: r.kappa_sav,
            kappa_depth: r.kappa_depth,
            kappa_moist: r.kappa_moist,
            kappa_heat: r.kappa_heat,
            kappa_dens: r.kappa_dens,
            m_tot: r.m_tot,
            m_eff: r.m_eff,
            lambda: r.lambda,
            xi: r.xi,
            r: r.r,
            c: r.c,
            eta: r.eta,
            q_init: r.q_init,
            kappa_elev: r.kappa_elev,
        });
    }
    RegionGrid::new(width, height, zone_size_m, fuel, home)
}

/// Writes a region in the CSV layout accepted by [`read_region`].
pub fn write_region<W: std::io::Write>(grid: &RegionGrid, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(REGION_CSV_HEADER)
        .map_err(|e| Error::parse("region csv", e))?;
    for z in grid.zones() {
        let (row, col) = grid.row_col(z);
        let f = grid.fuel(z);
        let rec = [
            row.to_string(),
            col.to_string(),
            f.kappa_load.to_string(),
            f.kappa_sav.to_string(),
            f.kappa_depth.to_string(),
            f.kappa_moist.to_string(),
            f.kappa_heat.to_string(),
            f.kappa_dens.to_string(),
            f.m_tot.to_string(),
            f.m_eff.to_string(),
            f.lambda.to_string(),
            f.xi.to_string(),
            f.r.to_string(),
            f.c.to_string(),
            f.eta.to_string(),
            f.q_init.to_string(),
            f.kappa_elev.to_string(),
        ];
        w.write_record(&rec).map_err(|e| Error::parse("region csv", e))?;
    }
    w.flush().map_err(|e| Error::io("region csv", e))?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindState {
    /// Wind speed in m/s.
    pub speed_u: f64,
    /// Direction the wind blows toward, radians clockwise from north.
    pub direction_phi: f64,
}

impl WindState {
    pub fn new(speed_u: f64, direction_phi: f64) -> Self {
        Self {
            speed_u: speed_u.max(0.0),
            direction_phi: wrap_angle(direction_phi),
        }
    }

    pub fn calm() -> Self {
        Self::new(0.0, 0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WindModelParams {
    /// Mean of log wind speed.
    pub mu_u: f64,
    /// Standard deviation of log wind speed.
    pub sigma_u: f64,
    /// Standard deviation of the per-step direction random walk (radians).
    pub sigma_phi: f64,
}

impl Default for WindModelParams {
    fn default() -> Self {
        Self {
            mu_u: 4.0f64.ln(),
            sigma_u: 0.25,
            sigma_phi: 0.15,
        }
    }
}

impl WindModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_u > 0.0 && self.sigma_u.is_finite()) {
            return Err(Error::Invariant(format!(
                "sigma_u must be positive, got {}",
                self.sigma_u
            )));
        }
        if !(self.sigma_phi >= 0.0 && self.sigma_phi.is_finite()) {
            return Err(Error::Invariant(format!(
                "sigma_phi must be nonnegative, got {}",
                self.sigma_phi
            )));
        }
        if !self.mu_u.is_finite() {
            return Err(Error::Invariant("mu_u must be finite".into()));
        }
        Ok(())
    }
}

/// Draws the next wind: i.i.d. log-normal speed and a Gaussian random walk on
/// direction.
pub fn sample_wind<R: Rng + ?Sized>(params: &WindModelParams, prev: &WindState, rng: &mut R) -> WindState {
    let speed = LogNormal::new(params.mu_u, params.sigma_u)
        .expect("validated log-normal parameters")
        .sample(rng);
    let step = if params.sigma_phi > 0.0 {
        Normal::new(0.0, params.sigma_phi)
            .expect("validated sigma_phi")
            .sample(rng)
    } else {
        0.0
    };
    WindState::new(speed, prev.direction_phi + step)
}

#[derive(Debug, Deserialize)]
struct WindRow {
    #[allow(dead_code)]
    timestamp: String,
    speed_mps: f64,
    direction_deg: f64,
}

/// Reads a `timestamp,speed_mps,direction_deg` wind series. Directions are
/// degrees clockwise from north and are converted to radians.
pub fn load_wind_series(path: impl AsRef<Path>) -> Result<Vec<WindState>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_wind_series(file, &path.display().to_string())
}

pub fn read_wind_series<R: std::io::Read>(reader: R, context: &str) -> Result<Vec<WindState>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for (i, rec) in rdr.deserialize::<WindRow>().enumerate() {
        let row = rec.map_err(|e| Error::parse(format!("{context}, data row {}", i + 1), e))?;
        if !(row.speed_mps.is_finite() && row.speed_mps >= 0.0) {
            return Err(Error::parse(
                format!("{context}, data row {}", i + 1),
                format!("negative or non-finite speed {}", row.speed_mps),
            ));
        }
        out.push(WindState::new(row.speed_mps, row.direction_deg.to_radians()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid(w: usize, h: usize) -> RegionGrid {
        RegionGrid::uniform(w, h, 30.0, FuelParams::default(), ZoneId(0)).unwrap()
    }

    fn csv_for(w: usize, h: usize, tweak: impl Fn(usize, &mut FuelParams)) -> String {
        let mut fuel = vec![FuelParams::default(); w * h];
        for (i, f) in fuel.iter_mut().enumerate() {
            tweak(i, f);
        }
        // bypass validation so invalid rows can be written
        let g = RegionGrid {
            width: w,
            height: h,
            zone_size_m: 30.0,
            fuel,
            home: ZoneId(0),
        };
        let mut buf = Vec::new();
        write_region(&g, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn uniform_csv_loads_as_grid() {
        let text = csv_for(4, 4, |_, _| {});
        let g = read_region(text.as_bytes(), "mem", 30.0, ZoneId(0)).unwrap();
        assert_eq!(g.len(), 16);
        assert_eq!((g.width(), g.height()), (4, 4));
        assert_eq!(g.home(), ZoneId(0));
    }

    #[test]
    fn square_mile_grid_has_2809_zones() {
        let text = csv_for(53, 53, |_, _| {});
        let g = read_region(text.as_bytes(), "mem", 30.0, ZoneId(0)).unwrap();
        assert_eq!(g.len(), 2809);
    }

    #[test]
    fn zero_fuel_is_rejected() {
        let text = csv_for(2, 2, |i, f| {
            if i == 3 {
                f.eta = 0;
            }
        });
        let err = read_region(text.as_bytes(), "mem", 30.0, ZoneId(0)).unwrap_err();
        assert!(matches!(err, Error::Invariant(_)), "{err}");
    }

    #[test]
    fn negative_rate_is_rejected() {
        let text = csv_for(2, 2, |i, f| {
            if i == 1 {
                f.lambda = -0.1;
            }
        });
        assert!(matches!(
            read_region(text.as_bytes(), "mem", 30.0, ZoneId(0)),
            Err(Error::Invariant(_))
        ));
    }

    #[test]
    fn malformed_row_is_a_parse_error() {
        let mut text = csv_for(2, 1, |_, _| {});
        text.push_str("0,2,abc\n");
        assert!(matches!(
            read_region(text.as_bytes(), "mem", 30.0, ZoneId(0)),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn missing_zone_is_a_dimension_error() {
        let text = csv_for(3, 3, |_, _| {});
        let truncated: Vec<&str> = text.lines().take(9).collect(); // header + 8 zones
        let err = read_region(truncated.join("\n").as_bytes(), "mem", 30.0, ZoneId(0)).unwrap_err();
        assert!(matches!(err, Error::Dimension(_)), "{err}");
    }

    #[test]
    fn distances() {
        let g = grid(5, 5);
        assert_abs_diff_eq!(g.distance(g.zone(2, 2), g.zone(2, 3)), 30.0);
        assert_abs_diff_eq!(
            g.distance(g.zone(2, 2), g.zone(3, 3)),
            30.0 * 2f64.sqrt(),
            epsilon = 1e-12
        );
        assert_eq!(g.distance(g.zone(1, 4), g.zone(1, 4)), 0.0);
    }

    #[test]
    fn bearings() {
        let g = grid(5, 5);
        let a = g.zone(2, 2);
        assert_abs_diff_eq!(g.bearing(a, g.zone(1, 2)).unwrap(), 0.0);
        assert_abs_diff_eq!(g.bearing(a, g.zone(2, 3)).unwrap(), PI / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.bearing(a, g.zone(3, 3)).unwrap(), 3.0 * PI / 4.0, epsilon = 1e-12);
        assert!(matches!(g.bearing(a, a), Err(Error::UndefinedBearing(_))));
    }

    #[test]
    fn disk_counts() {
        let g = grid(21, 21);
        let c = g.zone(10, 10);
        assert_eq!(g.neighbors_within(c, 0.0), vec![c]);
        assert_eq!(g.neighbors_within(c, 180.0).len(), 113);
        assert_eq!(g.neighbors_within(c, 120.0).len(), 49);
    }

    #[test]
    fn zero_sigma_phi_keeps_direction() {
        let params = WindModelParams {
            mu_u: 1.0,
            sigma_u: 0.5,
            sigma_phi: 0.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut w = WindState::new(2.0, 1.234);
        for _ in 0..50 {
            w = sample_wind(&params, &w, &mut rng);
            assert_eq!(w.direction_phi, 1.234);
        }
    }

    #[test]
    fn log_speed_mean_matches_mu() {
        let params = WindModelParams {
            mu_u: 1.3,
            sigma_u: 0.4,
            sigma_phi: 0.2,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let mut w = WindState::calm();
        let mut sum = 0.0;
        for _ in 0..n {
            w = sample_wind(&params, &w, &mut rng);
            assert!((0.0..TAU).contains(&w.direction_phi));
            sum += w.speed_u.ln();
        }
        let mean = sum / n as f64;
        let se = params.sigma_u / (n as f64).sqrt();
        assert!((mean - params.mu_u).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn wind_csv_series_length() {
        let mut text = String::from("timestamp,speed_mps,direction_deg\n");
        for i in 0..12 {
            text.push_str(&format!(
                "2020-08-01T{:02}:00:00,{},{}\n",
                i,
                3.0 + i as f64 * 0.1,
                90.0
            ));
        }
        let series = read_wind_series(text.as_bytes(), "mem").unwrap();
        assert_eq!(series.len(), 12);
        assert_abs_diff_eq!(series[0].direction_phi, PI / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn wind_csv_parse_error() {
        let text = "timestamp,speed_mps,direction_deg\nx,fast,90\n";
        assert!(matches!(
            read_wind_series(text.as_bytes(), "mem"),
            Err(Error::Parse { .. })
        ));
    }
}
