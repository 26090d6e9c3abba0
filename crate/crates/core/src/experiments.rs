//! Batch experiments: parameter sweeps with repetitions, paired seeding,
//! mean / sample-stdev aggregation and CSV export.
//!
//! Seeds follow a fixed schedule. Configurations that differ only in their
//! scenario form one pairing group, and replicate `k` of group `j` in batch
//! `b` runs with seed `base_seed + (b * groups + j) * repetitions + k`. Both
//! scenarios of a population therefore see the same initial placements
//! (common random numbers) while no two groups ever share a seed.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine;
use crate::model::{ParamError, Scenario, SimParams};

pub const DEFAULT_REPETITIONS: u32 = 8;
pub const POPULATIONS: [u32; 5] = [40, 50, 60, 70, 80];

pub const CSV_HEADER: &str = "set,config_id,scenario,n_red,n_black,min_vel,max_vel,max_accel,\
decel,safety,sonar,ticks,reps,mean_collisions,stdev_collisions";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("configuration {config_id}: {source}")]
    Config {
        config_id: usize,
        #[source]
        source: ParamError,
    },
    #[error("experiment has no configurations")]
    NoConfigurations,
    #[error("repetitions must be at least 1")]
    NoRepetitions,
    #[error("batches must be at least 1")]
    NoBatches,
    #[error("cannot build worker pool: {0}")]
    Pool(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

#[derive(Debug, Error, PartialEq)]
#[error("random-walk mean must be positive, got {0}")]
pub struct EfficiencyError(pub f64);

/// A sweep: every configuration is run `repetitions` times per batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub configurations: Vec<SimParams>,
    pub repetitions: u32,
    pub base_seed: u64,
    /// Independent outer batches; each yields its own summary row.
    pub batches: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinSet {
    /// Low velocity: min = max = 0.3, deceleration 0.1.
    Set1,
    /// High velocity: 0.5 to 0.9, deceleration 0.3.
    Set2,
}

impl std::str::FromStr for BuiltinSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "set1" | "1" => Ok(BuiltinSet::Set1),
            "set2" | "2" => Ok(BuiltinSet::Set2),
            other => Err(format!(
                "unknown builtin set `{other}` (expected set1 or set2)"
            )),
        }
    }
}

/// Five populations (40 to 80 per team), each under random walk then social
/// behaviour.
pub fn builtin_set(which: BuiltinSet) -> ExperimentSpec {
    let (name, make): (&str, fn(u32, Scenario) -> SimParams) = match which {
        BuiltinSet::Set1 => ("set1", SimParams::set1),
        BuiltinSet::Set2 => ("set2", SimParams::set2),
    };
    let configurations = POPULATIONS
        .iter()
        .flat_map(|&n| {
            [
                make(n, Scenario::RandomWalk),
                make(n, Scenario::AllSocialAVs),
            ]
        })
        .collect();
    ExperimentSpec {
        name: name.to_string(),
        configurations,
        repetitions: DEFAULT_REPETITIONS,
        base_seed: 1,
        batches: 1,
    }
}

/// On-disk form of an experiment. Either list `configurations` explicitly or
/// give a `base` plus `populations` (per team) and `scenarios` to expand.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentFile {
    name: String,
    #[serde(default = "default_repetitions")]
    repetitions: u32,
    #[serde(default = "default_base_seed")]
    base_seed: u64,
    #[serde(default = "default_batches")]
    batches: u32,
    #[serde(default)]
    configurations: Vec<SimParams>,
    base: Option<SimParams>,
    #[serde(default)]
    populations: Vec<u32>,
    #[serde(default)]
    scenarios: Vec<Scenario>,
}

fn default_repetitions() -> u32 {
    DEFAULT_REPETITIONS
}

fn default_base_seed() -> u64 {
    1
}

fn default_batches() -> u32 {
    1
}

impl ExperimentSpec {
    /// Parses a TOML experiment description.
    pub fn from_toml_str(text: &str) -> Result<Self, String> {
        let file: ExperimentFile = toml::from_str(text).map_err(|e| e.to_string())?;
        let mut configurations = file.configurations;
        if let Some(base) = file.base {
            let scenarios = if file.scenarios.is_empty() {
                vec![Scenario::RandomWalk, Scenario::AllSocialAVs]
            } else {
                file.scenarios
            };
            let populations = if file.populations.is_empty() {
                vec![base.n_red]
            } else {
                file.populations
            };
            for n in populations {
                for &scenario in &scenarios {
                    configurations.push(SimParams {
                        n_red: n,
                        n_black: n,
                        scenario,
                        ..base.clone()
                    });
                }
            }
        } else if !file.populations.is_empty() || !file.scenarios.is_empty() {
            return Err("`populations` and `scenarios` need a [base] table".into());
        }
        let spec = ExperimentSpec {
            name: file.name,
            configurations,
            repetitions: file.repetitions,
            base_seed: file.base_seed,
            batches: file.batches,
        };
        spec.check().map_err(|e| e.to_string())?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = fs::read_to_string(path).map_err(|source| ExperimentError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|message| ExperimentError::Parse {
            path: path.to_path_buf(),
            message,
        })
    }

    fn check(&self) -> Result<(), ExperimentError> {
        if self.configurations.is_empty() {
            return Err(ExperimentError::NoConfigurations);
        }
        if self.repetitions == 0 {
            return Err(ExperimentError::NoRepetitions);
        }
        if self.batches == 0 {
            return Err(ExperimentError::NoBatches);
        }
        for (config_id, params) in self.configurations.iter().enumerate() {
            params
                .validate()
                .map_err(|source| ExperimentError::Config { config_id, source })?;
        }
        Ok(())
    }

    /// Pairing group of each configuration: configurations equal up to the
    /// scenario share a group, numbered by first appearance.
    pub fn pairing_groups(&self) -> Vec<usize> {
        let mut keys: Vec<SimParams> = Vec::new();
        self.configurations
            .iter()
            .map(|p| {
                let key = SimParams {
                    scenario: Scenario::RandomWalk,
                    ..p.clone()
                };
                match keys.iter().position(|k| *k == key) {
                    Some(g) => g,
                    None => {
                        keys.push(key);
                        keys.len() - 1
                    }
                }
            })
            .collect()
    }

    /// Seed of replicate `rep` of pairing group `group` in batch `batch`.
    pub fn seed_for(&self, group: usize, rep: u32, batch: u32, groups: usize) -> u64 {
        let slot =
            (batch as u64 * groups as u64 + group as u64) * self.repetitions as u64 + rep as u64;
        self.base_seed.wrapping_add(slot)
    }
}

/// Aggregate of one configuration (and batch).
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub set: String,
    pub config_id: usize,
    pub batch: u32,
    pub params: SimParams,
    pub mean_collisions: f64,
    /// Sample standard deviation; 0 when `n == 1`.
    pub stdev_collisions: f64,
    pub n: u32,
}

impl SummaryRow {
    pub fn scenario(&self) -> Scenario {
        self.params.scenario
    }

    fn csv_line(&self) -> String {
        let p = &self.params;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.set,
            self.config_id,
            p.scenario,
            p.n_red,
            p.n_black,
            p.min_velocity,
            p.max_velocity,
            p.max_acceleration,
            p.deceleration,
            p.min_safety_distance,
            p.sonar_range,
            p.ticks,
            self.n,
            self.mean_collisions,
            self.stdev_collisions
        )
    }
}

/// Mean and sample standard deviation (Welford). Empty input gives `(0, 0)`
/// and a single value gives stdev 0.
pub fn mean_stdev(values: &[f64]) -> (f64, f64) {
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, &x) in values.iter().enumerate() {
        let d = x - mean;
        mean += d / (i + 1) as f64;
        m2 += d * (x - mean);
    }
    let n = values.len();
    let stdev = if n > 1 {
        (m2 / (n - 1) as f64).max(0.0).sqrt()
    } else {
        0.0
    };
    (mean, stdev)
}

/// Runs every configuration, replicate and batch on `jobs` worker threads.
/// The result does not depend on `jobs`.
pub fn run_experiment(
    spec: &ExperimentSpec,
    jobs: usize,
) -> Result<Vec<SummaryRow>, ExperimentError> {
    spec.check()?;
    let groups = spec.pairing_groups();
    let group_count = groups.iter().max().map_or(0, |g| g + 1);
    let reps = spec.repetitions;

    let tasks: Vec<(usize, u32, u32)> = (0..spec.configurations.len())
        .flat_map(|c| (0..spec.batches).flat_map(move |b| (0..reps).map(move |k| (c, b, k))))
        .collect();
    let exec = |&(c, b, k): &(usize, u32, u32)| {
        let seed = spec.seed_for(groups[c], k, b, group_count);
        engine::run(&spec.configurations[c], seed)
            .map(|r| r.total_collisions as f64)
            .map_err(|source| ExperimentError::Config {
                config_id: c,
                source,
            })
    };
    let totals: Vec<f64> = if jobs <= 1 {
        tasks.iter().map(exec).collect::<Result<_, _>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| ExperimentError::Pool(e.to_string()))?;
        pool.install(|| tasks.par_iter().map(exec).collect::<Result<_, _>>())?
    };

    Ok(totals
        .chunks(reps as usize)
        .zip(tasks.iter().step_by(reps as usize))
        .map(|(values, &(c, b, _))| {
            let (mean, stdev) = mean_stdev(values);
            SummaryRow {
                set: spec.name.clone(),
                config_id: c,
                batch: b,
                params: spec.configurations[c].clone(),
                mean_collisions: mean,
                stdev_collisions: stdev,
                n: reps,
            }
        })
        .collect())
}

/// Percentage reduction of collisions relative to the random walk.
pub fn efficiency(random_mean: f64, social_mean: f64) -> Result<f64, EfficiencyError> {
    if random_mean.is_nan() || random_mean <= 0.0 {
        return Err(EfficiencyError(random_mean));
    }
    Ok(100.0 * (1.0 - social_mean / random_mean))
}

/// Writes the summary CSV: a `#` metadata line, the header, then one line per
/// row in the given order.
pub fn write_csv<W: Write>(rows: &[SummaryRow], mut out: W) -> io::Result<()> {
    writeln!(out, "# socialav {}", env!("CARGO_PKG_VERSION"))?;
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", row.csv_line())?;
    }
    Ok(())
}

pub fn export_csv(rows: &[SummaryRow], path: &Path) -> Result<(), ExperimentError> {
    let io_err = |source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).map_err(io_err)?;
    fs::write(path, buf).map_err(io_err)
}

/// Fixed-width text table of summary rows.
pub fn format_table(rows: &[SummaryRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>6} {:>5} {:>8} {:>5} {:>5} {:>5} {:>12} {:>10}",
        "config", "batch", "scenario", "red", "black", "reps", "mean", "stdev"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:>6} {:>5} {:>8} {:>5} {:>5} {:>5} {:>12.3} {:>10.3}",
            r.config_id,
            r.batch,
            r.params.scenario.as_str(),
            r.params.n_red,
            r.params.n_black,
            r.n,
            r.mean_collisions,
            r.stdev_collisions
        );
    }
    s
}

/// Paired random-walk versus social comparison for one population.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub random: SummaryRow,
    pub social: SummaryRow,
    /// `None` when the random walk produced no collisions.
    pub efficiency: Option<f64>,
}

impl Comparison {
    pub fn report(&self) -> String {
        let p = &self.random.params;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "population: {} red + {} black, {} ticks, {} paired replicates",
            p.n_red, p.n_black, p.ticks, self.random.n
        );
        for row in [&self.random, &self.social] {
            let _ = writeln!(
                s,
                "{:<8} mean {:.3} stdev {:.3}",
                row.params.scenario.as_str(),
                row.mean_collisions,
                row.stdev_collisions
            );
        }
        match self.efficiency {
            Some(e) => {
                let _ = writeln!(s, "efficiency {e:.2} %");
            }
            None => {
                let _ = writeln!(s, "efficiency undefined (no random-walk collisions)");
            }
        }
        s
    }
}

/// Runs `base` under both scenarios with shared per-replicate seeds.
pub fn compare(
    base: &SimParams,
    repetitions: u32,
    base_seed: u64,
    jobs: usize,
) -> Result<Comparison, ExperimentError> {
    let spec = ExperimentSpec {
        name: "compare".into(),
        configurations: vec![
            SimParams {
                scenario: Scenario::RandomWalk,
                ..base.clone()
            },
            SimParams {
                scenario: Scenario::AllSocialAVs,
                ..base.clone()
            },
        ],
        repetitions,
        base_seed,
        batches: 1,
    };
    let mut rows = run_experiment(&spec, jobs)?.into_iter();
    let random = rows.next().expect("two rows");
    let social = rows.next().expect("two rows");
    let efficiency = efficiency(random.mean_collisions, social.mean_collisions).ok();
    Ok(Comparison {
        random,
        social,
        efficiency,
    })
}
