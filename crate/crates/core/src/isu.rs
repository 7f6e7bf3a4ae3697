//! Position-dependent static mutation rates for initial segment uncertainty:
//! the support is `{0, .., n-1}` with `n` unknown, and bit `i` flips with a
//! fixed probability `p_i`.

use std::path::Path;

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::engine::{check_rate, uniform_subset, EngineOptions, Recorder, RunResult};
use crate::error::{invalid, Result};
use crate::fitness::{init_search_point, LinearFunction};

/// `ln^(0)(x) = max(1, x)`, `ln^(k)(x) = max(1, ln(ln^(k-1)(x)))`.
pub fn iterated_log(k: u32, x: f64) -> f64 {
    let mut v = x.max(1.0);
    for _ in 0..k {
        if v == 1.0 {
            break;
        }
        v = v.ln().max(1.0);
    }
    v
}

/// Monotone non-increasing per-position rates in `(0, 1/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionRates {
    rates: Vec<f64>,
}

impl PositionRates {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if rates.is_empty() {
            return invalid("position rates must not be empty");
        }
        if let Some((i, p)) = rates
            .iter()
            .enumerate()
            .find(|(_, &p)| !(p > 0.0 && p <= 0.5))
        {
            return invalid(format!("rate {p} at position {i} outside (0, 1/2]"));
        }
        if let Some(i) = rates.windows(2).position(|w| w[1] > w[0]) {
            return invalid(format!("rates increase between positions {i} and {}", i + 1));
        }
        Ok(Self { rates })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.rates
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SequenceSpec {
    /// `p_i = min(1/2, 1/(i·∏_{j=1..k} ln^(j)(i)))` for 1-based `i`.
    IteratedLog(u32),
    Custom(Vec<f64>),
}

impl SequenceSpec {
    pub fn custom_from_file(path: &Path) -> Result<Self> {
        crate::policies::read_rate_table(path).map(SequenceSpec::Custom)
    }
}

/// Rate of 1-based position `i` in the iterated-logarithm family. Factors are
/// multiplied until one truncates to 1; all later ones are 1 as well.
pub fn iterated_log_rate(k: u32, i: u64) -> f64 {
    let x = i as f64;
    let mut denom = x;
    let mut v = x;
    for _ in 0..k {
        v = v.ln().max(1.0);
        if v == 1.0 {
            break;
        }
        denom *= v;
    }
    (1.0 / denom).min(0.5)
}

/// Rates for the first `n` positions.
pub fn make_rates(spec: &SequenceSpec, n: usize) -> Result<PositionRates> {
    if n == 0 {
        return invalid("n must be >= 1");
    }
    match spec {
        SequenceSpec::IteratedLog(k) => {
            PositionRates::new((1..=n as u64).map(|i| iterated_log_rate(*k, i)).collect())
        }
        SequenceSpec::Custom(table) => {
            if table.len() < n {
                return invalid(format!(
                    "custom sequence has {} entries, {n} needed",
                    table.len()
                ));
            }
            PositionRates::new(table[..n].to_vec())
        }
    }
}

/// `M_n = min(e^(S_n) / (S_n·p_ceil(n/2)), n^1.01 / ln n)` with
/// `S_n = Σ_{i<=n} p_i`.
pub fn lower_bound_diagnostic(rates: &PositionRates, n: usize) -> Result<f64> {
    if n < 2 {
        return invalid("the diagnostic needs n >= 2");
    }
    if n > rates.len() {
        return invalid(format!("n = {n} exceeds the {} available rates", rates.len()));
    }
    let s: f64 = rates.rates[..n].iter().sum();
    let mid = rates.rates[n.div_ceil(2) - 1];
    let nf = n as f64;
    Ok((s.exp() / (s * mid)).min(nf.powf(1.01) / nf.ln()))
}

/// Sum of the first `n` rates.
pub fn rate_sum(rates: &PositionRates, n: usize) -> f64 {
    rates.rates[..n.min(rates.len())].iter().sum()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum FlipMode {
    /// Rate buckets with binomial candidates and per-position thinning.
    #[default]
    Bucketed,
    /// One Bernoulli draw per position.
    Naive,
}

#[derive(Debug, Clone)]
struct Bucket {
    start: usize,
    len: usize,
    q: f64,
    count: Binomial,
}

/// Flip-set sampler for independent non-identical Bernoulli flips.
///
/// Positions are grouped into contiguous buckets whose rates lie in
/// `(q_b/2, q_b]`. Per bucket, `Binomial(len, q_b)` uniformly chosen
/// candidates are each kept with probability `p_i / q_b`, so every position
/// flips independently with probability `p_i` at `O(Σ p_i + buckets)` cost.
#[derive(Debug, Clone)]
pub struct PositionSampler {
    rates: Vec<f64>,
    mode: FlipMode,
    buckets: Vec<Bucket>,
    scratch: Vec<usize>,
}

impl PositionSampler {
    pub fn new(rates: &PositionRates, mode: FlipMode) -> Self {
        let r = rates.as_slice();
        let mut buckets = Vec::new();
        let mut start = 0;
        while start < r.len() {
            let q = r[start];
            let len = r[start..].iter().take_while(|&&p| p > 0.5 * q).count();
            buckets.push(Bucket {
                start,
                len,
                q,
                count: Binomial::new(len as u64, q).expect("rates validated"),
            });
            start += len;
        }
        Self {
            rates: r.to_vec(),
            mode,
            buckets,
            scratch: Vec::new(),
        }
    }

    pub fn bucket_count(&self) -> usize {
        self.buckets.len()
    }

    /// Writes the positions that flip in one mutation into `out`.
    #[inline]
    pub fn sample_into<R: Rng + ?Sized>(&mut self, rng: &mut R, out: &mut Vec<usize>) {
        out.clear();
        match self.mode {
            FlipMode::Naive => {
                out.extend((0..self.rates.len()).filter(|&i| rng.random_bool(self.rates[i])));
            }
            FlipMode::Bucketed => {
                for b in &self.buckets {
                    let k = b.count.sample(rng) as usize;
                    if k == 0 {
                        continue;
                    }
                    self.scratch.clear();
                    uniform_subset(b.len, k, rng, &mut self.scratch);
                    for &j in &self.scratch {
                        let i = b.start + j;
                        let p = self.rates[i];
                        if p >= b.q || rng.random::<f64>() * b.q < p {
                            out.push(i);
                        }
                    }
                }
            }
        }
    }
}

/// (1+1) EA with per-position rates fixed over time.
pub fn run_isu_with<R: Rng + ?Sized>(
    f: &LinearFunction,
    rates: &PositionRates,
    options: &EngineOptions,
    mode: FlipMode,
    rng: &mut R,
) -> Result<RunResult> {
    options.validate()?;
    if rates.len() != f.n() {
        return invalid(format!(
            "{} rates given for {} relevant bits",
            rates.len(),
            f.n()
        ));
    }
    debug_assert!(rates.as_slice().iter().all(|&p| check_rate(p).is_ok()));
    let mut sampler = PositionSampler::new(rates, mode);
    let mut rec = Recorder::new(options.trajectory_stride);
    let mut x = init_search_point(f, rng);
    let mut evals = 1;
    rec.observe(evals, x.fitness());
    let mut flips = Vec::new();
    while !x.is_optimum() && evals < options.max_evals {
        sampler.sample_into(rng, &mut flips);
        let delta = f.delta_unchecked(x.bits(), &flips);
        if options.acceptance.accepts(delta) && !flips.is_empty() {
            x.apply(f, &flips, delta);
        }
        evals += 1;
        rec.observe(evals, x.fitness());
    }
    Ok(RunResult {
        evaluations: evals,
        found: x.is_optimum(),
        final_fitness: Some(x.fitness()),
        trajectory: rec.finish(evals, x.fitness()),
        seed: 0,
    })
}

/// Seeded position-dependent run using the bucketed sampler.
pub fn run_isu(
    f: &LinearFunction,
    rates: &PositionRates,
    options: &EngineOptions,
    seed: u64,
) -> Result<RunResult> {
    let mut rng = crate::trial_rng(seed);
    let mut r = run_isu_with(f, rates, options, FlipMode::Bucketed, &mut rng)?;
    r.seed = seed;
    Ok(r)
}
