//! Seeded experiment grids and their reports.
//!
//! Every trial gets its own seed derived from `(base_seed, n, trial)`, and
//! results are collected by position, so a report depends only on the
//! experiment config and never on how trials were scheduled.

mod output;
mod policy;
mod stats;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use output::{to_json_line, to_json_pretty, write_csv, CSV_HEADER};
pub use policy::{
    schedule_constants, Algorithm, PolicySpec, PreparedPolicy, RunSettings, CONSTANTS_TOL,
};
pub use stats::{
    ratio_of_means, summarize, summarize_censored, Normalized, RatioRecord, Stats,
    MIN_TRIALS_FOR_CI,
};

use crate::engine::{default_max_evals, Acceptance};
use crate::error::{config_err, invalid, Error, Result};
use crate::fitness::{FunctionSpec, LinearFunction};

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-trial seed: a positional hash of `(base_seed, n, trial)`.
pub fn trial_seed(base_seed: u64, n: u64, trial: u64) -> u64 {
    let h = mix64(base_seed);
    let h = mix64(h ^ mix64(n ^ 0x6e5f_7369_7a65));
    mix64(h ^ mix64(trial ^ 0x7472_6961_6c5f))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Function family, e.g. `onemax`, `binval`, `random:<w_max>:<seed>`.
    pub function: String,
    pub policy: String,
    pub n_grid: Vec<usize>,
    pub trials: u64,
    pub base_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_evals: Option<u64>,
    #[serde(default)]
    pub acceptance: Acceptance,
    /// Per-trial CSV output path.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    /// Report JSON output path.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(function: &str, policy: &str, n_grid: Vec<usize>, trials: u64, base_seed: u64) -> Self {
        Self {
            function: function.to_string(),
            policy: policy.to_string(),
            n_grid,
            trials,
            base_seed,
            max_evals: None,
            acceptance: Acceptance::Weak,
            csv: None,
            report: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).or_else(|e| {
            config_err(
                e.column(),
                format!("{}:{}: {e}", path.display(), e.line()),
            )
        })
    }

    /// Parses and checks the config. Errors in spec strings report the byte
    /// offset inside that string.
    pub fn validate(&self) -> Result<(FunctionSpec, PolicySpec)> {
        if self.trials == 0 {
            return config_err(0, "trials must be >= 1");
        }
        if self.n_grid.is_empty() {
            return config_err(0, "n_grid must not be empty");
        }
        if let Some(i) = self.n_grid.iter().position(|&n| n == 0) {
            return config_err(i, "n_grid entries must be >= 1");
        }
        if let Some(i) = self.n_grid.windows(2).position(|w| w[1] <= w[0]) {
            return config_err(i + 1, "n_grid must be strictly increasing");
        }
        if self.max_evals == Some(0) {
            return config_err(0, "max_evals must be >= 1");
        }
        let function: FunctionSpec = self.function.parse().map_err(|e| context(e, "function"))?;
        let policy: PolicySpec = self.policy.parse().map_err(|e| context(e, "policy"))?;
        Ok((function, policy))
    }
}

fn context(e: Error, field: &str) -> Error {
    match e {
        Error::Config { position, message } => Error::Config {
            position,
            message: format!("in `{field}`: {message}"),
        },
        other => other,
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub policy: String,
    pub function: String,
    pub n: usize,
    pub trial: u64,
    pub seed: u64,
    pub evaluations: u64,
    pub found: bool,
}

/// Statistics keyed by policy, then by `n`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BenchReport {
    pub policies: BTreeMap<String, BTreeMap<usize, Stats>>,
}

impl BenchReport {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn to_json(&self) -> Result<String> {
        to_json_pretty(self)
    }

    /// The cell of the only policy in this report.
    pub fn single_cell(&self, n: usize) -> Result<&Stats> {
        let mut it = self.policies.values();
        match (it.next(), it.next()) {
            (Some(cells), None) => cells
                .get(&n)
                .ok_or_else(|| Error::InvalidArgument(format!("report has no entry for n = {n}"))),
            (None, _) => invalid("report is empty"),
            _ => invalid("report holds more than one policy"),
        }
    }

    pub fn cell(&self, policy: &str, n: usize) -> Option<&Stats> {
        self.policies.get(policy)?.get(&n)
    }
}

/// Mean ratio `a / b` at size `n` of two single-policy reports.
pub fn compare_policies(a: &BenchReport, b: &BenchReport, n: usize) -> Result<RatioRecord> {
    ratio_of_means(a.single_cell(n)?, b.single_cell(n)?, n)
}

/// How trials are scheduled. The output never depends on this.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// rayon's global pool.
    #[default]
    Parallel,
    /// A dedicated pool with this many workers.
    Workers(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridOutput {
    pub report: BenchReport,
    pub trials: Vec<TrialRecord>,
}

impl GridOutput {
    pub fn csv_string(&self) -> String {
        let mut buf = Vec::new();
        write_csv(&mut buf, &self.trials).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }

    /// Writes CSV and report to the paths named in `config`.
    pub fn write_outputs(&self, config: &ExperimentConfig) -> Result<()> {
        if let Some(path) = &config.csv {
            std::fs::write(path, self.csv_string())?;
        }
        if let Some(path) = &config.report {
            std::fs::write(path, self.report.to_json()?)?;
        }
        Ok(())
    }
}

struct Instance {
    n: usize,
    label: String,
    function: LinearFunction,
    algorithm: Algorithm,
    settings: RunSettings,
}

fn run_item(inst: &Instance, base_seed: u64, trial: u64, policy: &str) -> Result<TrialRecord> {
    let seed = trial_seed(base_seed, inst.n as u64, trial);
    let (r, _) = inst.algorithm.run(&inst.function, &inst.settings, seed)?;
    Ok(TrialRecord {
        policy: policy.to_string(),
        function: inst.label.clone(),
        n: inst.n,
        trial,
        seed,
        evaluations: r.evaluations,
        found: r.found,
    })
}

#[cfg(feature = "parallel")]
fn map_items(
    items: &[(usize, u64)],
    exec: Execution,
    f: impl Fn(&(usize, u64)) -> Result<TrialRecord> + Sync + Send,
) -> Result<Vec<TrialRecord>> {
    use rayon::prelude::*;
    match exec {
        Execution::Sequential => items.iter().map(&f).collect(),
        Execution::Parallel => items.par_iter().map(&f).collect(),
        Execution::Workers(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot build worker pool: {e}")))?
            .install(|| items.par_iter().map(&f).collect()),
    }
}

#[cfg(not(feature = "parallel"))]
fn map_items(
    items: &[(usize, u64)],
    _exec: Execution,
    f: impl Fn(&(usize, u64)) -> Result<TrialRecord>,
) -> Result<Vec<TrialRecord>> {
    items.iter().map(f).collect()
}

/// Runs every `(n, trial)` of the grid and aggregates.
pub fn run_grid(config: &ExperimentConfig) -> Result<GridOutput> {
    run_grid_with(config, Execution::default())
}

pub fn run_grid_with(config: &ExperimentConfig, exec: Execution) -> Result<GridOutput> {
    let (function, policy) = config.validate()?;
    let prepared = policy.prepare()?;
    let policy_label = policy.to_string();
    let instances = config
        .n_grid
        .iter()
        .map(|&n| {
            Ok(Instance {
                n,
                label: function.label(n),
                function: function.build(n)?,
                algorithm: prepared.for_size(n)?,
                settings: RunSettings {
                    max_evals: config.max_evals.unwrap_or_else(|| default_max_evals(n)),
                    acceptance: config.acceptance,
                    trajectory_stride: None,
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let items: Vec<(usize, u64)> = (0..instances.len())
        .flat_map(|i| (0..config.trials).map(move |j| (i, j)))
        .collect();
    let trials = map_items(&items, exec, |&(i, j)| {
        run_item(&instances[i], config.base_seed, j, &policy_label)
    })?;

    let mut cells = BTreeMap::new();
    for (inst, chunk) in instances.iter().zip(trials.chunks(config.trials as usize)) {
        let samples: Vec<u64> = chunk.iter().map(|r| r.evaluations).collect();
        let censored = chunk.iter().filter(|r| !r.found).count();
        cells.insert(inst.n, summarize_censored(&samples, censored, inst.n)?);
    }
    let mut report = BenchReport::default();
    report.policies.insert(policy_label, cells);
    Ok(GridOutput { report, trials })
}
