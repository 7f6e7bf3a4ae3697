//! Adaptive (1+1) EA that estimates the unknown number of relevant bits by
//! exponential search, then optimizes with the estimated rate.
//!
//! Round `i` uses `m = 2^i`. The estimation part draws `m` fresh uniform
//! points `x`, mutates each at rate `m^(-1-ε)` and counts strict worsenings
//! `S`. The estimate is `m' = round(2·S·m^ε)`. When `m/2 <= m' <= 2m` the
//! static EA with rate `1/m'` runs from a fresh uniform point for
//! `ceil(10·m'·ln m')` steps. Every evaluation, including those of the
//! estimation part, is checked for the optimum.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{
    default_max_evals, run_from_random, uniform_subset, Acceptance, EngineOptions, FlipSampler,
    Recorder, RunResult,
};
use crate::error::{invalid, Result};
use crate::fitness::LinearFunction;

pub const DEFAULT_EPSILON: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    pub epsilon: f64,
    pub max_evals: u64,
    pub acceptance: Acceptance,
}

impl AdaptiveOptions {
    pub fn for_n(n: usize) -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            max_evals: default_max_evals(n),
            acceptance: Acceptance::Weak,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 0.25) {
            return invalid(format!("epsilon must lie in (0, 1/4), got {}", self.epsilon));
        }
        if self.max_evals == 0 {
            return invalid("max_evals must be >= 1");
        }
        Ok(())
    }
}

/// One doubling round of the adaptive algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub m: u64,
    pub s: u64,
    pub m_prime: u64,
    pub estimation_evals: u64,
    pub optimization_executed: bool,
    pub optimization_evals: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdaptiveTrace {
    pub rounds: Vec<RoundRecord>,
}

impl AdaptiveTrace {
    /// Total evaluations reconstructed from the per-round records.
    pub fn total_evaluations(&self) -> u64 {
        self.rounds
            .iter()
            .map(|r| r.estimation_evals + r.optimization_evals)
            .sum()
    }
}

/// Estimation mutation rate `m^(-1-ε)`.
pub fn estimation_rate(m: u64, epsilon: f64) -> f64 {
    (m as f64).powf(-(1.0 + epsilon))
}

/// `round(2·S·m^ε)`.
pub fn estimate_support(s: u64, m: u64, epsilon: f64) -> u64 {
    (2.0 * s as f64 * (m as f64).powf(epsilon)).round() as u64
}

/// Optimization runs only when the estimate is close to `m`.
pub fn in_window(m: u64, m_prime: u64) -> bool {
    m <= 2 * m_prime && m_prime <= 2 * m
}

/// `ceil(10·m'·ln m')`.
pub fn optimization_steps(m_prime: u64) -> u64 {
    let m = m_prime as f64;
    (10.0 * m * m.ln()).ceil().max(0.0) as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Estimate {
    pub s: u64,
    pub m_prime: u64,
    pub evals: u64,
}

/// Outcome of a single estimation trial.
enum Trial {
    /// Both evaluations done; `true` when `f(y) > f(x)`.
    Compared(bool),
    /// The optimum was evaluated; holds the evaluations spent in this trial.
    Optimum(u64),
}

/// Draws a uniform `x`, mutates at rate `p` and compares. Only bits on the
/// flip set influence `f(y) - f(x)`, so `x` is materialized on those bits
/// alone. The event "x is all-zero elsewhere" has probability `2^-(n-K)` and
/// is sampled directly to detect the optimum exactly.
fn estimation_trial<R: Rng + ?Sized>(
    f: &LinearFunction,
    p: f64,
    sampler: &mut FlipSampler,
    flips: &mut Vec<usize>,
    rng: &mut R,
) -> Trial {
    let n = f.n();
    let k = sampler.flip_count(n, p, rng);
    flips.clear();
    uniform_subset(n, k, rng, flips);
    let mut delta: i128 = 0;
    let (mut ones, mut zeros) = (0usize, 0usize);
    for &i in flips.iter() {
        let w = i128::from(f.weight(i));
        if rng.random_bool(0.5) {
            delta -= w;
            ones += 1;
        } else {
            delta += w;
            zeros += 1;
        }
    }
    let rest = (n - k) as i32;
    let rest_zero = rest == 0 || (rest < 1075 && rng.random_bool(2f64.powi(-rest)));
    if rest_zero && ones == 0 {
        return Trial::Optimum(1);
    }
    if rest_zero && zeros == 0 {
        return Trial::Optimum(2);
    }
    Trial::Compared(delta > 0)
}

/// Runs the `m` estimation trials of one round with no budget.
pub fn estimation_round<R: Rng + ?Sized>(
    f: &LinearFunction,
    m: u64,
    epsilon: f64,
    rng: &mut R,
) -> Result<Estimate> {
    if m == 0 {
        return invalid("m must be >= 1");
    }
    let p = estimation_rate(m, epsilon);
    let mut sampler = FlipSampler::new();
    let mut flips = Vec::new();
    let mut s = 0;
    for _ in 0..m {
        if let Trial::Compared(true) = estimation_trial(f, p, &mut sampler, &mut flips, rng) {
            s += 1;
        }
    }
    Ok(Estimate {
        s,
        m_prime: estimate_support(s, m, epsilon),
        evals: 2 * m,
    })
}

/// Full adaptive run with a caller-owned RNG (`seed = 0` in the result).
pub fn run_adaptive_with<R: Rng + ?Sized>(
    f: &LinearFunction,
    options: &AdaptiveOptions,
    rng: &mut R,
) -> Result<(RunResult, AdaptiveTrace)> {
    options.validate()?;
    let budget = options.max_evals;
    let mut trace = AdaptiveTrace::default();
    let mut evals = 0u64;
    let mut last_fitness = None;
    let mut sampler = FlipSampler::new();
    let mut flips = Vec::new();
    let mut m = 1u64;

    let done = |found: bool, evals: u64, last: Option<u128>, trace: AdaptiveTrace| {
        let result = RunResult {
            evaluations: evals,
            found,
            final_fitness: if found { Some(0) } else { last },
            trajectory: None,
            seed: 0,
        };
        Ok((result, trace))
    };

    loop {
        m = m.checked_mul(2).ok_or_else(|| {
            crate::Error::NumericFailure("doubling counter overflowed".into())
        })?;
        let p = estimation_rate(m, options.epsilon);
        let mut round = RoundRecord {
            m,
            s: 0,
            m_prime: 0,
            estimation_evals: 0,
            optimization_executed: false,
            optimization_evals: 0,
        };
        for _ in 0..m {
            if evals == budget {
                trace.rounds.push(round);
                return done(false, evals, last_fitness, trace);
            }
            match estimation_trial(f, p, &mut sampler, &mut flips, rng) {
                Trial::Optimum(spent) => {
                    // y is optimal but the budget ends right after x.
                    let found = spent <= budget - evals;
                    let spent = spent.min(budget - evals);
                    evals += spent;
                    round.estimation_evals += spent;
                    trace.rounds.push(round);
                    return done(found, evals, last_fitness, trace);
                }
                Trial::Compared(worse) => {
                    if budget - evals < 2 {
                        evals += 1;
                        round.estimation_evals += 1;
                        trace.rounds.push(round);
                        return done(false, evals, last_fitness, trace);
                    }
                    evals += 2;
                    round.estimation_evals += 2;
                    round.s += u64::from(worse);
                }
            }
        }
        round.m_prime = estimate_support(round.s, m, options.epsilon);
        if in_window(m, round.m_prime) {
            round.optimization_executed = true;
            if evals == budget {
                trace.rounds.push(round);
                return done(false, evals, last_fitness, trace);
            }
            let rate = 1.0 / round.m_prime as f64;
            let engine = EngineOptions {
                max_evals: budget,
                acceptance: options.acceptance,
                trajectory_stride: None,
            };
            let mut rec = Recorder::new(None);
            let steps = optimization_steps(round.m_prime);
            let (spent, x) = run_from_random(f, &|_| rate, &engine, Some(steps), &mut rec, evals, rng)?;
            evals += spent;
            round.optimization_evals = spent;
            last_fitness = Some(x.fitness());
            if x.is_optimum() {
                trace.rounds.push(round);
                return done(true, evals, last_fitness, trace);
            }
        }
        trace.rounds.push(round);
        if evals >= budget {
            return done(false, evals, last_fitness, trace);
        }
    }
}

/// Seeded adaptive run.
pub fn run_adaptive(
    f: &LinearFunction,
    options: &AdaptiveOptions,
    seed: u64,
) -> Result<(RunResult, AdaptiveTrace)> {
    let mut rng = crate::trial_rng(seed);
    let (mut r, t) = run_adaptive_with(f, options, &mut rng)?;
    r.seed = seed;
    Ok((r, t))
}
