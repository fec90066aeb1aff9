//! JSON and long-format CSV output.
//!
//! CSV schemas:
//! - steps: `policy,seed,t,heli_target,drone_position,battery_min,cost,cumulative_cost,burning_zones,burned_zones,belief_expected_cost,belief_pk_sum`
//! - trajectory: `policy,t,mean,lo,hi`
//! - tune: `rank,index,<param...>,mean_cost,ci_lo,ci_hi,class_c_probability,errors`
//! - level set: `<param_a>,<param_b>,mean_cost`, one file per parameter pair

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::batch::BatchMetrics;
use super::episode::EpisodeRecord;
use super::tune::TuneTable;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(Error::Config(format!("unknown format `{s}` (expected json or csv)"))),
        }
    }
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::io(path, e))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::parse(path.display().to_string(), e.to_string())
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut f = create(path)?;
    serde_json::to_writer_pretty(&mut f, value).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
    f.write_all(b"\n").map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(f).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))
}

#[derive(Serialize)]
struct StepRow<'a> {
    policy: &'a str,
    seed: u64,
    t: usize,
    heli_target: Option<usize>,
    drone_position: usize,
    battery_min: f64,
    cost: f64,
    cumulative_cost: f64,
    burning_zones: usize,
    burned_zones: usize,
    belief_expected_cost: f64,
    belief_pk_sum: f64,
}

const STEP_HEADER: [&str; 12] = [
    "policy",
    "seed",
    "t",
    "heli_target",
    "drone_position",
    "battery_min",
    "cost",
    "cumulative_cost",
    "burning_zones",
    "burned_zones",
    "belief_expected_cost",
    "belief_pk_sum",
];

/// One row per episode step. An empty slice writes only the header.
pub fn write_steps_csv(records: &[EpisodeRecord], path: &Path) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(create(path)?);
    w.write_record(STEP_HEADER).map_err(csv_err(path))?;
    for r in records {
        for s in &r.steps {
            w.serialize(StepRow {
                policy: &r.policy,
                seed: r.seed,
                t: s.t,
                heli_target: s.heli_target.map(|z| z.0),
                drone_position: s.drone_position.0,
                battery_min: s.battery_min,
                cost: s.cost,
                cumulative_cost: s.cumulative_cost,
                burning_zones: s.burning_zones,
                burned_zones: s.burned_zones,
                belief_expected_cost: s.belief.expected_cost,
                belief_pk_sum: s.belief.pk_sum,
            })
            .map_err(csv_err(path))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Mean cumulative-cost trajectories with their intervals.
pub fn write_trajectory_csv(metrics: &[BatchMetrics], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["policy", "t", "mean", "lo", "hi"])
        .map_err(csv_err(path))?;
    for m in metrics {
        for (t, c) in m.cost_trajectory.iter().enumerate() {
            w.write_record([
                m.policy.clone(),
                t.to_string(),
                c.mean.to_string(),
                c.lo.to_string(),
                c.hi.to_string(),
            ])
            .map_err(csv_err(path))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_tune_csv(table: &TuneTable, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let mut header = vec!["rank".to_string(), "index".to_string()];
    header.extend(table.params.iter().cloned());
    header.extend(["mean_cost", "ci_lo", "ci_hi", "class_c_probability", "errors"].map(String::from));
    w.write_record(&header).map_err(csv_err(path))?;
    for (rank, r) in table.rows.iter().enumerate() {
        let mut row = vec![rank.to_string(), r.index.to_string()];
        row.extend(r.values.iter().map(f64::to_string));
        row.extend([
            r.final_cost.mean.to_string(),
            r.final_cost.lo.to_string(),
            r.final_cost.hi.to_string(),
            r.class_c_probability.to_string(),
            r.errors.to_string(),
        ]);
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn file_stem(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect()
}

/// Writes `levelset_<a>__<b>.csv` into `dir` for every parameter pair.
pub fn write_level_sets(table: &TuneTable, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for ls in &table.level_sets {
        let path = dir.join(format!(
            "levelset_{}__{}.csv",
            file_stem(&ls.param_a),
            file_stem(&ls.param_b)
        ));
        let mut w = csv::Writer::from_writer(create(&path)?);
        w.write_record([ls.param_a.as_str(), ls.param_b.as_str(), "mean_cost"])
            .map_err(csv_err(&path))?;
        for (a, b, c) in &ls.cells {
            w.write_record([a.to_string(), b.to_string(), c.to_string()])
                .map_err(csv_err(&path))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        out.push(path);
    }
    Ok(out)
}

/// Writes metrics and per-step records into `dir`. Returns the files written.
pub fn export_batch(
    metrics: &[BatchMetrics],
    records: &[EpisodeRecord],
    dir: &Path,
    format: Format,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = match format {
        Format::Json => {
            let m = dir.join("metrics.json");
            let r = dir.join("episodes.json");
            write_json(&metrics, &m)?;
            write_json(&records, &r)?;
            vec![m, r]
        }
        Format::Csv => {
            let t = dir.join("trajectory.csv");
            let s = dir.join("steps.csv");
            write_trajectory_csv(metrics, &t)?;
            write_steps_csv(records, &s)?;
            vec![t, s]
        }
    };
    Ok(files)
}

pub fn export_tune(table: &TuneTable, dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    match format {
        Format::Json => {
            let p = dir.join("tune.json");
            write_json(table, &p)?;
            Ok(vec![p])
        }
        Format::Csv => {
            let p = dir.join("tune.csv");
            write_tune_csv(table, &p)?;
            let mut files = vec![p];
            files.extend(write_level_sets(table, dir)?);
            Ok(files)
        }
    }
}
