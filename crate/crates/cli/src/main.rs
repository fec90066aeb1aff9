use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use wildfire_core::harness::export::{export_batch, export_tune, write_json};
use wildfire_core::harness::{run_batch, run_episode, tune, Format, ParamGrid, PolicySet, Scenario, ScenarioConfig};
use wildfire_core::{par, Error};

#[derive(Parser)]
#[command(
    name = "wildfire",
    version,
    about = "Helicopter and drone wildfire mitigation simulator"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Base seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 1 runs sequentially, 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    parallel: usize,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// `json` or `csv`.
    #[arg(long, default_value = "json")]
    format: Format,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a batch of episodes for one or more joint policies.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Episodes per policy; overrides the config.
        #[arg(long)]
        episodes: Option<usize>,
        /// Joint policies as `heli+drone` (e.g. `cfa_dla+ie_dla`, `null`).
        /// Defaults to the policy in the config.
        #[arg(long, value_delimiter = ',')]
        policies: Vec<String>,
    },
    /// Grid search over policy parameters.
    Tune {
        #[command(flatten)]
        common: Common,
        /// Episodes per policy; overrides the config.
        #[arg(long)]
        episodes: Option<usize>,
        /// Axis as `name=v1,v2,...`; repeat for more axes.
        #[arg(long = "grid", required = true)]
        axes: Vec<String>,
    },
    /// Run one seed and dump its full trace.
    Replay {
        #[command(flatten)]
        common: Common,
        /// Joint policy as `heli+drone`; defaults to the policy in the config.
        #[arg(long)]
        policy: Option<String>,
    },
    /// Run the configured policy on a few seeds, checking invariants and
    /// replay determinism.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 5)]
        episodes: usize,
    },
}

enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

fn config_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Config(e.into())
}

fn runtime(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Runtime(e.into())
}

fn classify(e: Error) -> Failure {
    match e {
        Error::Config(_) | Error::Parse { .. } | Error::Io { .. } => config_err(e),
        _ => runtime(e),
    }
}

fn load(common: &Common) -> Result<Scenario, Failure> {
    let cfg = ScenarioConfig::load(&common.config)
        .with_context(|| format!("loading {}", common.config.display()))
        .map_err(Failure::Config)?;
    Scenario::new(cfg).map_err(classify)
}

fn policies(sc: &Scenario, labels: &[String]) -> Result<Vec<PolicySet>, Failure> {
    if labels.is_empty() {
        return Ok(vec![sc.cfg.policy.clone()]);
    }
    labels
        .iter()
        .map(|l| PolicySet::from_label(&sc.cfg.policy, l).map_err(classify))
        .collect()
}

fn parse_axis(s: &str) -> anyhow::Result<(String, Vec<f64>)> {
    let (name, vals) = s.split_once('=').context("expected name=v1,v2,...")?;
    let vals = vals
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .with_context(|| format!("bad value `{v}` for `{name}`"))
        })
        .collect::<anyhow::Result<Vec<f64>>>()?;
    if vals.is_empty() {
        bail!("axis `{name}` has no values");
    }
    Ok((name.trim().to_string(), vals))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Simulate {
            common,
            episodes,
            policies: labels,
        } => {
            let sc = load(&common)?;
            let sets = policies(&sc, &labels)?;
            let n = episodes.unwrap_or(sc.cfg.episodes).max(1);
            let seed = common.seed.unwrap_or(sc.cfg.seed);
            let parallel = common.parallel != 1;
            let mut metrics = Vec::new();
            let mut records = Vec::new();
            for p in &sets {
                let b = par::with_threads(common.parallel, || run_batch(&sc, p, n, seed, parallel));
                for (s, msg) in &b.failures {
                    eprintln!("{}: seed {s} aborted: {msg}", p.label());
                }
                println!(
                    "{:<18} episodes={} final_cost={:.1} [{:.1}, {:.1}] class_c={:.3} returned={:.3} errors={} ({:.1}s)",
                    b.metrics.policy,
                    b.metrics.episodes,
                    b.metrics.final_cost.mean,
                    b.metrics.final_cost.lo,
                    b.metrics.final_cost.hi,
                    b.metrics.class_c_probability.mean,
                    b.metrics.return_home_rate,
                    b.metrics.errors,
                    b.metrics.runtime_s,
                );
                metrics.push(b.metrics);
                records.extend(b.records);
            }
            let files = export_batch(&metrics, &records, &common.out, common.format).map_err(runtime)?;
            for f in files {
                println!("wrote {}", f.display());
            }
            if metrics.iter().any(|m| m.errors > 0) {
                return Err(runtime(anyhow::anyhow!("some episodes aborted")));
            }
            Ok(())
        }
        Cmd::Tune { common, episodes, axes } => {
            let sc = load(&common)?;
            let mut grid = ParamGrid::new();
            for a in &axes {
                let (name, vals) = parse_axis(a).map_err(config_err)?;
                grid = grid.axis(&name, &vals);
            }
            let n = episodes.unwrap_or(sc.cfg.episodes).max(1);
            let seed = common.seed.unwrap_or(sc.cfg.seed);
            let table = par::with_threads(common.parallel, || {
                tune(&sc, &sc.cfg.policy, &grid, n, seed, common.parallel != 1)
            })
            .map_err(classify)?;
            println!("{}", table.params.join("\t") + "\tmean_cost\tclass_c");
            for r in &table.rows {
                let vals: Vec<String> = r.values.iter().map(|v| v.to_string()).collect();
                println!(
                    "{}\t{:.1}\t{:.3}",
                    vals.join("\t"),
                    r.final_cost.mean,
                    r.class_c_probability
                );
            }
            for f in export_tune(&table, &common.out, common.format).map_err(runtime)? {
                println!("wrote {}", f.display());
            }
            Ok(())
        }
        Cmd::Replay { common, policy } => {
            let sc = load(&common)?;
            let p = match policy {
                Some(l) => PolicySet::from_label(&sc.cfg.policy, &l).map_err(classify)?,
                None => sc.cfg.policy.clone(),
            };
            let seed = common.seed.unwrap_or(sc.cfg.seed);
            let rec = par::with_threads(common.parallel, || run_episode(&sc, &p, seed)).map_err(classify)?;
            for s in &rec.steps {
                println!(
                    "t={:<2} heli={:<6} drone={:<6} cost={:>9.1} cum={:>10.1} burning={:<4} burned={}",
                    s.t,
                    s.heli_target.map_or("-".to_string(), |z| z.to_string()),
                    s.drone_position.to_string(),
                    s.cost,
                    s.cumulative_cost,
                    s.burning_zones,
                    s.burned_zones
                );
            }
            std::fs::create_dir_all(&common.out).map_err(runtime)?;
            match common.format {
                Format::Json => {
                    let path = common.out.join(format!("replay_{seed}.json"));
                    write_json(&rec, &path).map_err(runtime)?;
                    println!("wrote {}", path.display());
                }
                Format::Csv => {
                    for f in export_batch(&[], std::slice::from_ref(&rec), &common.out, Format::Csv).map_err(runtime)? {
                        println!("wrote {}", f.display());
                    }
                }
            }
            Ok(())
        }
        Cmd::Validate { common, episodes } => {
            let sc = load(&common)?;
            let seed = common.seed.unwrap_or(sc.cfg.seed);
            let p = sc.cfg.policy.clone();
            let b = par::with_threads(common.parallel, || {
                run_batch(&sc, &p, episodes.max(1), seed, common.parallel != 1)
            });
            let mut problems: Vec<String> = b.failures.iter().map(|(s, m)| format!("seed {s}: {m}")).collect();
            for r in &b.records {
                let sum: f64 = r.steps.iter().map(|s| s.cost).sum();
                if (sum - r.cumulative_cost).abs() > 1e-9 * (1.0 + sum.abs()) {
                    problems.push(format!("seed {}: step costs do not add up", r.seed));
                }
                match run_episode(&sc, &p, r.seed) {
                    Ok(again) if again == *r => {}
                    _ => problems.push(format!("seed {}: replay differs", r.seed)),
                }
            }
            if problems.is_empty() {
                println!("ok: {} episodes of {}", b.records.len(), p.label());
                Ok(())
            } else {
                for m in &problems {
                    eprintln!("{m}");
                }
                Err(runtime(anyhow::anyhow!("{} problems", problems.len())))
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
