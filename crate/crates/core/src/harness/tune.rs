//! Exhaustive grid search over policy parameters with common random numbers.

use serde::{Deserialize, Serialize};

use super::batch::{run_batch, MeanCi};
use super::config::PolicySet;
use super::episode::Scenario;
use crate::error::{Error, Result};

/// Named axes; the grid is their cartesian product.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamGrid {
    pub axes: Vec<(String, Vec<f64>)>,
}

impl ParamGrid {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn axis(mut self, name: &str, values: &[f64]) -> Self {
        self.axes.push((name.to_string(), values.to_vec()));
        self
    }

    pub fn names(&self) -> Vec<String> {
        self.axes.iter().map(|a| a.0.clone()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() {
            return Err(Error::Config("parameter grid has no axes".into()));
        }
        for (name, vs) in &self.axes {
            if vs.is_empty() || vs.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config(format!("axis `{name}` needs finite values")));
            }
        }
        Ok(())
    }

    /// Grid points in row-major order (last axis fastest).
    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::new()];
        for (_, vs) in &self.axes {
            out = out
                .into_iter()
                .flat_map(|p| {
                    vs.iter().map(move |v| {
                        let mut q = p.clone();
                        q.push(*v);
                        q
                    })
                })
                .collect();
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneRow {
    /// Position in grid order.
    pub index: usize,
    pub values: Vec<f64>,
    pub final_cost: MeanCi,
    pub class_c_probability: f64,
    pub errors: usize,
}

/// Costs for every pair of parameters with the remaining ones held at the
/// best point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSet {
    pub param_a: String,
    pub param_b: String,
    /// `(a, b, mean final cost)`.
    pub cells: Vec<(f64, f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneTable {
    pub params: Vec<String>,
    /// Best first; ties keep grid order.
    pub rows: Vec<TuneRow>,
    pub level_sets: Vec<LevelSet>,
}

impl TuneTable {
    pub fn best(&self) -> &TuneRow {
        &self.rows[0]
    }
}

/// Runs a batch at each grid point with the same episode seeds and ranks
/// the points by mean final cost.
pub fn tune(
    sc: &Scenario,
    base: &PolicySet,
    grid: &ParamGrid,
    episodes: usize,
    base_seed: u64,
    parallel: bool,
) -> Result<TuneTable> {
    grid.validate()?;
    let names = grid.names();
    let points = grid.points();
    let mut rows = Vec::with_capacity(points.len());
    for (index, values) in points.iter().enumerate() {
        let mut p = base.clone();
        for (n, v) in names.iter().zip(values) {
            p.set_param(n, *v)?;
        }
        p.validate()?;
        let b = run_batch(sc, &p, episodes, base_seed, parallel);
        rows.push(TuneRow {
            index,
            values: values.clone(),
            final_cost: b.metrics.final_cost,
            class_c_probability: b.metrics.class_c_probability.mean,
            errors: b.metrics.errors,
        });
    }
    let by_index = rows.clone();
    rows.sort_by(|a, b| {
        a.final_cost
            .mean
            .total_cmp(&b.final_cost.mean)
            .then(a.index.cmp(&b.index))
    });
    let level_sets = level_sets(&names, &by_index, &rows[0].values);
    Ok(TuneTable {
        params: names,
        rows,
        level_sets,
    })
}

fn level_sets(names: &[String], rows: &[TuneRow], best: &[f64]) -> Vec<LevelSet> {
    let mut out = Vec::new();
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            let cells = rows
                .iter()
                .filter(|r| (0..names.len()).all(|k| k == i || k == j || r.values[k] == best[k]))
                .map(|r| (r.values[i], r.values[j], r.final_cost.mean))
                .collect();
            out.push(LevelSet {
                param_a: names[i].clone(),
                param_b: names[j].clone(),
                cells,
            });
        }
    }
    out
}
