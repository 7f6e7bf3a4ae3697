//! Policy grammar and per-instance dispatch.
//!
//! ```text
//! constant:<p> | optimal | scaled:<c> | known-n | table:<path>
//! adaptive[:<epsilon>] | isu:iterlog:<k> | isu:custom:<path>
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::Rng;

use crate::adaptive::{run_adaptive_with, AdaptiveOptions, AdaptiveTrace, DEFAULT_EPSILON};
use crate::constants::{solve_alpha, ScheduleConstants};
use crate::engine::{run_ea_with, Acceptance, EngineOptions, RunResult};
use crate::error::{config_err, Error, Result};
use crate::fitness::{parse_num, tokens, LinearFunction};
use crate::isu::{make_rates, run_isu_with, FlipMode, PositionRates, SequenceSpec};
use crate::policies::{make_rate_stream, read_rate_table, RatePolicySpec, RateStream};

/// Tolerance used for the shared schedule constants.
pub const CONSTANTS_TOL: f64 = 1e-10;

/// α and β, solved once per process.
pub fn schedule_constants() -> Result<ScheduleConstants> {
    static CELL: OnceLock<std::result::Result<ScheduleConstants, String>> = OnceLock::new();
    CELL.get_or_init(|| solve_alpha(CONSTANTS_TOL).map_err(|e| e.to_string()))
        .clone()
        .map_err(Error::NumericFailure)
}

#[derive(Debug, Clone, PartialEq)]
pub enum PolicySpec {
    Constant(f64),
    Optimal,
    Scaled(f64),
    KnownN,
    Table(PathBuf),
    Adaptive(f64),
    IsuIterLog(u32),
    IsuCustom(PathBuf),
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicySpec::Constant(p) => write!(f, "constant:{p}"),
            PolicySpec::Optimal => write!(f, "optimal"),
            PolicySpec::Scaled(c) => write!(f, "scaled:{c}"),
            PolicySpec::KnownN => write!(f, "known-n"),
            PolicySpec::Table(p) => write!(f, "table:{}", p.display()),
            PolicySpec::Adaptive(e) if *e == DEFAULT_EPSILON => write!(f, "adaptive"),
            PolicySpec::Adaptive(e) => write!(f, "adaptive:{e}"),
            PolicySpec::IsuIterLog(k) => write!(f, "isu:iterlog:{k}"),
            PolicySpec::IsuCustom(p) => write!(f, "isu:custom:{}", p.display()),
        }
    }
}

impl FromStr for PolicySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let toks = tokens(s);
        let rest_after = |i: usize| -> Result<PathBuf> {
            let start = toks.get(i).map(|t| t.0).unwrap_or(s.len());
            if start >= s.len() {
                return config_err(s.len(), "missing path");
            }
            Ok(PathBuf::from(&s[start..]))
        };
        let arity = |want: usize| -> Result<()> {
            if toks.len() == want {
                Ok(())
            } else {
                config_err(0, format!("wrong number of fields in policy `{s}`"))
            }
        };
        let spec = match toks[0].1 {
            "constant" => {
                arity(2)?;
                let p: f64 = parse_num(toks[1], "a rate")?;
                if !(0.0..=1.0).contains(&p) {
                    return config_err(toks[1].0, format!("rate {p} outside [0, 1]"));
                }
                PolicySpec::Constant(p)
            }
            "optimal" => {
                arity(1)?;
                PolicySpec::Optimal
            }
            "scaled" => {
                arity(2)?;
                let c: f64 = parse_num(toks[1], "a scale factor")?;
                if !(c > 0.0 && c.is_finite()) {
                    return config_err(toks[1].0, "scale factor must be positive");
                }
                PolicySpec::Scaled(c)
            }
            "known-n" => {
                arity(1)?;
                PolicySpec::KnownN
            }
            "table" => PolicySpec::Table(rest_after(1)?),
            "adaptive" => match toks.len() {
                1 => PolicySpec::Adaptive(DEFAULT_EPSILON),
                2 => {
                    let e: f64 = parse_num(toks[1], "epsilon")?;
                    if !(e > 0.0 && e < 0.25) {
                        return config_err(toks[1].0, "epsilon must lie in (0, 1/4)");
                    }
                    PolicySpec::Adaptive(e)
                }
                _ => return config_err(0, format!("wrong number of fields in policy `{s}`")),
            },
            "isu" => match toks.get(1).map(|t| t.1) {
                Some("iterlog") => {
                    arity(3)?;
                    PolicySpec::IsuIterLog(parse_num(toks[2], "a non-negative integer k")?)
                }
                Some("custom") => PolicySpec::IsuCustom(rest_after(2)?),
                _ => {
                    let pos = toks.get(1).map(|t| t.0).unwrap_or(s.len());
                    return config_err(pos, "expected `iterlog` or `custom` after `isu:`");
                }
            },
            other => return config_err(0, format!("unknown policy `{other}`")),
        };
        Ok(spec)
    }
}

/// A policy with its files loaded and constants solved.
#[derive(Debug, Clone)]
pub enum PreparedPolicy {
    Stream(RatePolicySpec),
    KnownN,
    Adaptive(f64),
    Isu(SequenceSpec),
}

impl PolicySpec {
    pub fn prepare(&self) -> Result<PreparedPolicy> {
        Ok(match self {
            PolicySpec::Constant(p) => PreparedPolicy::Stream(RatePolicySpec::constant(*p)),
            PolicySpec::Optimal => {
                PreparedPolicy::Stream(RatePolicySpec::optimal(schedule_constants()?.alpha))
            }
            PolicySpec::Scaled(c) => {
                PreparedPolicy::Stream(RatePolicySpec::scaled(schedule_constants()?.alpha, *c))
            }
            PolicySpec::KnownN => PreparedPolicy::KnownN,
            PolicySpec::Table(path) => {
                let spec = RatePolicySpec::table(read_rate_table(path)?);
                make_rate_stream(spec.clone())?;
                PreparedPolicy::Stream(spec)
            }
            PolicySpec::Adaptive(e) => PreparedPolicy::Adaptive(*e),
            PolicySpec::IsuIterLog(k) => PreparedPolicy::Isu(SequenceSpec::IteratedLog(*k)),
            PolicySpec::IsuCustom(path) => PreparedPolicy::Isu(SequenceSpec::custom_from_file(path)?),
        })
    }
}

/// The algorithm to run on an instance of a given size.
#[derive(Debug, Clone)]
pub enum Algorithm {
    Scheduled(RateStream),
    Adaptive(f64),
    PositionDependent(PositionRates),
}

impl PreparedPolicy {
    pub fn for_size(&self, n: usize) -> Result<Algorithm> {
        Ok(match self {
            PreparedPolicy::Stream(spec) => Algorithm::Scheduled(make_rate_stream(spec.clone())?),
            PreparedPolicy::KnownN => {
                Algorithm::Scheduled(make_rate_stream(RatePolicySpec::constant(1.0 / n as f64))?)
            }
            PreparedPolicy::Adaptive(e) => Algorithm::Adaptive(*e),
            PreparedPolicy::Isu(seq) => Algorithm::PositionDependent(make_rates(seq, n)?),
        })
    }
}

/// Run settings shared by every algorithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSettings {
    pub max_evals: u64,
    pub acceptance: Acceptance,
    pub trajectory_stride: Option<u64>,
}

impl Algorithm {
    /// Runs one trial with a caller-owned RNG. The trace is present for
    /// adaptive runs only.
    pub fn run_with<R: Rng + ?Sized>(
        &self,
        f: &LinearFunction,
        settings: &RunSettings,
        rng: &mut R,
    ) -> Result<(RunResult, Option<AdaptiveTrace>)> {
        let engine = EngineOptions {
            max_evals: settings.max_evals,
            acceptance: settings.acceptance,
            trajectory_stride: settings.trajectory_stride,
        };
        match self {
            Algorithm::Scheduled(stream) => Ok((run_ea_with(f, stream, &engine, rng)?, None)),
            Algorithm::PositionDependent(rates) => {
                Ok((run_isu_with(f, rates, &engine, FlipMode::Bucketed, rng)?, None))
            }
            Algorithm::Adaptive(epsilon) => {
                let opts = AdaptiveOptions {
                    epsilon: *epsilon,
                    max_evals: settings.max_evals,
                    acceptance: settings.acceptance,
                };
                let (r, t) = run_adaptive_with(f, &opts, rng)?;
                Ok((r, Some(t)))
            }
        }
    }

    /// Seeded single trial; the seed is recorded in the result.
    pub fn run(
        &self,
        f: &LinearFunction,
        settings: &RunSettings,
        seed: u64,
    ) -> Result<(RunResult, Option<AdaptiveTrace>)> {
        let mut rng = crate::trial_rng(seed);
        let (mut r, t) = self.run_with(f, settings, &mut rng)?;
        r.seed = seed;
        Ok((r, t))
    }
}
