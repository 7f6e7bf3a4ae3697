//! The elitist (1+1) EA loop for any uniform-rate stream.
//!
//! Evaluation counting: the initial uniform point costs one evaluation and
//! every offspring costs one. A run stops as soon as the optimum has been
//! evaluated or the budget `max_evals` is spent.

mod sampler;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use sampler::{sample_flip_set, FlipSampler};
pub(crate) use sampler::{check_rate, uniform_subset};

use crate::error::{invalid, Result};
use crate::fitness::{init_search_point, LinearFunction, SearchPoint};
use crate::policies::RateSchedule;

/// Lower limit for the default budget, so tiny instances (where `ln n` is
/// near zero) are not censored.
pub const MIN_DEFAULT_MAX_EVALS: u64 = 10_000;

/// `ceil(100·n·ln²n)`, but at least [`MIN_DEFAULT_MAX_EVALS`].
pub fn default_max_evals(n: usize) -> u64 {
    let n = n.max(1) as f64;
    let ln = n.ln();
    ((100.0 * n * ln * ln).ceil() as u64).max(MIN_DEFAULT_MAX_EVALS)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Acceptance {
    /// Accept when `f(y) <= f(x)`.
    #[default]
    Weak,
    /// Accept when `f(y) < f(x)`.
    Strict,
}

impl Acceptance {
    #[inline]
    pub fn accepts(self, delta: i128) -> bool {
        match self {
            Acceptance::Weak => delta <= 0,
            Acceptance::Strict => delta < 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineOptions {
    pub max_evals: u64,
    pub acceptance: Acceptance,
    /// Record `(evaluation, fitness)` every this many evaluations.
    pub trajectory_stride: Option<u64>,
}

impl EngineOptions {
    pub fn new(max_evals: u64) -> Self {
        Self {
            max_evals,
            acceptance: Acceptance::Weak,
            trajectory_stride: None,
        }
    }

    pub fn for_n(n: usize) -> Self {
        Self::new(default_max_evals(n))
    }

    pub fn strict(mut self) -> Self {
        self.acceptance = Acceptance::Strict;
        self
    }

    pub fn with_trajectory(mut self, stride: u64) -> Self {
        self.trajectory_stride = Some(stride.max(1));
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.max_evals == 0 {
            return invalid("max_evals must be >= 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub evaluation: u64,
    pub fitness: u128,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunResult {
    pub evaluations: u64,
    pub found: bool,
    /// Fitness of the last tracked search point; `None` when the algorithm
    /// ended without one (adaptive runs censored during estimation).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_fitness: Option<u128>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Vec<TrajectoryPoint>>,
    pub seed: u64,
}

/// Keeps the sparse trajectory for a run.
pub(crate) struct Recorder {
    stride: Option<u64>,
    points: Vec<TrajectoryPoint>,
}

impl Recorder {
    pub(crate) fn new(stride: Option<u64>) -> Self {
        Self {
            stride,
            points: Vec::new(),
        }
    }

    #[inline]
    pub(crate) fn observe(&mut self, evaluation: u64, fitness: u128) {
        if let Some(s) = self.stride {
            if evaluation == 1 || evaluation.is_multiple_of(s) {
                self.points.push(TrajectoryPoint {
                    evaluation,
                    fitness,
                });
            }
        }
    }

    pub(crate) fn finish(mut self, evaluation: u64, fitness: u128) -> Option<Vec<TrajectoryPoint>> {
        self.stride?;
        if self.points.last().map(|p| p.evaluation) != Some(evaluation) {
            self.points.push(TrajectoryPoint {
                evaluation,
                fitness,
            });
        }
        Some(self.points)
    }
}

/// One mutation-selection step at rate `p`. Charges one evaluation (the
/// caller counts it). Returns whether the offspring was accepted and its
/// fitness difference to `x`.
pub fn ea_step<R: Rng + ?Sized>(
    x: &mut SearchPoint,
    f: &LinearFunction,
    p: f64,
    acceptance: Acceptance,
    sampler: &mut FlipSampler,
    rng: &mut R,
) -> Result<(bool, i128)> {
    check_rate(p)?;
    if x.bits().len() != f.n() {
        return invalid("search point does not match the function length");
    }
    Ok(step_unchecked(x, f, p, acceptance, sampler, rng))
}

#[inline]
fn step_unchecked<R: Rng + ?Sized>(
    x: &mut SearchPoint,
    f: &LinearFunction,
    p: f64,
    acceptance: Acceptance,
    sampler: &mut FlipSampler,
    rng: &mut R,
) -> (bool, i128) {
    let flips = sampler.sample(f.n(), p, rng);
    let delta = f.delta_unchecked(x.bits(), flips);
    let accepted = acceptance.accepts(delta);
    if accepted && !flips.is_empty() {
        x.apply(f, flips, delta);
    }
    (accepted, delta)
}

/// Runs the (1+1) EA from a fresh uniform point for at most `max_steps`
/// offspring steps (unbounded when `None`), within the evaluation budget of
/// `options`. Returns `(evaluations, final point)`.
pub(crate) fn run_from_random<R: Rng + ?Sized, S: RateSchedule + ?Sized>(
    f: &LinearFunction,
    rates: &S,
    options: &EngineOptions,
    max_steps: Option<u64>,
    rec: &mut Recorder,
    eval_offset: u64,
    rng: &mut R,
) -> Result<(u64, SearchPoint)> {
    let mut x = init_search_point(f, rng);
    let mut evals = 1;
    rec.observe(eval_offset + evals, x.fitness());
    let mut sampler = FlipSampler::new();
    let mut t = 1u64;
    while !x.is_optimum()
        && eval_offset + evals < options.max_evals
        && max_steps.is_none_or(|m| t <= m)
    {
        let p = rates.rate_at(t);
        check_rate(p)?;
        step_unchecked(&mut x, f, p, options.acceptance, &mut sampler, rng);
        evals += 1;
        rec.observe(eval_offset + evals, x.fitness());
        t += 1;
    }
    Ok((evals, x))
}

/// Algorithm with a rate stream `t ↦ p_t`, driven by a caller-owned RNG.
/// The returned result carries `seed = 0`; see [`run_ea`] for the seeded form.
pub fn run_ea_with<R: Rng + ?Sized, S: RateSchedule + ?Sized>(
    f: &LinearFunction,
    rates: &S,
    options: &EngineOptions,
    rng: &mut R,
) -> Result<RunResult> {
    options.validate()?;
    let mut rec = Recorder::new(options.trajectory_stride);
    let (evaluations, x) = run_from_random(f, rates, options, None, &mut rec, 0, rng)?;
    Ok(RunResult {
        evaluations,
        found: x.is_optimum(),
        final_fitness: Some(x.fitness()),
        trajectory: rec.finish(evaluations, x.fitness()),
        seed: 0,
    })
}

/// Seeded run of the (1+1) EA with rate stream `rates`.
pub fn run_ea<S: RateSchedule + ?Sized>(
    f: &LinearFunction,
    rates: &S,
    options: &EngineOptions,
    seed: u64,
) -> Result<RunResult> {
    let mut rng = crate::trial_rng(seed);
    let mut r = run_ea_with(f, rates, options, &mut rng)?;
    r.seed = seed;
    Ok(r)
}
