//! Linear fitness functions over the relevant bits and search points with a
//! cached fitness value.
//!
//! Positions are 0-based (`0..n`). The support of the hidden-subset problem is
//! always the first `n` positions; irrelevant bits are never materialized
//! because neither fitness nor acceptance depends on them.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{config_err, invalid, Error, Result};

/// `f(x) = Σ w_i x_i` with positive integer weights, minimized at all-zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearFunction {
    weights: Vec<u64>,
    total: u128,
    unit: bool,
}

impl LinearFunction {
    pub fn new(weights: Vec<u64>) -> Result<Self> {
        if weights.is_empty() {
            return invalid("a linear function needs at least one relevant bit");
        }
        let mut total: u128 = 0;
        for (i, &w) in weights.iter().enumerate() {
            if w == 0 {
                return invalid(format!("weight at position {i} is zero"));
            }
            total = total
                .checked_add(u128::from(w))
                .ok_or_else(|| Error::InvalidArgument("weight sum overflows 128 bits".into()))?;
        }
        let unit = weights.iter().all(|&w| w == 1);
        Ok(Self {
            weights,
            total,
            unit,
        })
    }

    /// Number of relevant bits.
    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    #[inline]
    pub fn weight(&self, i: usize) -> u64 {
        self.weights[i]
    }

    /// Fitness of the all-ones string.
    pub fn total_weight(&self) -> u128 {
        self.total
    }

    /// True when every weight is 1.
    pub fn is_unit(&self) -> bool {
        self.unit
    }

    pub fn evaluate(&self, bits: &[bool]) -> Result<u128> {
        if bits.len() != self.n() {
            return invalid(format!(
                "bit vector has length {}, function has {} relevant bits",
                bits.len(),
                self.n()
            ));
        }
        Ok(self.evaluate_unchecked(bits))
    }

    pub(crate) fn evaluate_unchecked(&self, bits: &[bool]) -> u128 {
        bits.iter()
            .zip(&self.weights)
            .filter(|(&b, _)| b)
            .map(|(_, &w)| u128::from(w))
            .sum()
    }

    /// `evaluate(x with flips applied) - evaluate(x)` in `O(|flips|)`.
    ///
    /// Positions must be distinct.
    pub fn delta_evaluate(&self, x: &SearchPoint, flips: &[usize]) -> Result<i128> {
        if x.bits.len() != self.n() {
            return invalid("search point does not match the function length");
        }
        if let Some(&bad) = flips.iter().find(|&&i| i >= self.n()) {
            return invalid(format!("flip position {bad} out of range 0..{}", self.n()));
        }
        Ok(self.delta_unchecked(&x.bits, flips))
    }

    #[inline]
    pub(crate) fn delta_unchecked(&self, bits: &[bool], flips: &[usize]) -> i128 {
        if self.unit {
            let mut d: i64 = 0;
            for &i in flips {
                d += if bits[i] { -1 } else { 1 };
            }
            return i128::from(d);
        }
        let mut d: i128 = 0;
        for &i in flips {
            let w = i128::from(self.weights[i]);
            if bits[i] {
                d -= w;
            } else {
                d += w;
            }
        }
        d
    }
}

/// OneMax on `n` relevant bits.
pub fn one_max(n: usize) -> Result<LinearFunction> {
    if n == 0 {
        return invalid("one_max needs n >= 1");
    }
    LinearFunction::new(vec![1; n])
}

/// BinVal: `w_i = 2^i` for `i = 0..n`. Capped at 63 bits so every weight fits
/// in a `u64`.
pub fn bin_val(n: usize) -> Result<LinearFunction> {
    if n == 0 || n > 63 {
        return invalid(format!("bin_val needs 1 <= n <= 63, got {n}"));
    }
    LinearFunction::new((0..n).map(|i| 1u64 << i).collect())
}

/// Weights drawn independently and uniformly from `1..=w_max`.
pub fn random_linear(n: usize, seed: u64, w_max: u64) -> Result<LinearFunction> {
    if n == 0 {
        return invalid("random_linear needs n >= 1");
    }
    if w_max == 0 {
        return invalid("random_linear needs w_max >= 1");
    }
    if (n as u128).checked_mul(u128::from(w_max)).is_none() {
        return invalid("n * w_max overflows the 128-bit accumulator");
    }
    let mut rng = crate::trial_rng(seed);
    let weights = (0..n).map(|_| rng.random_range(1..=w_max)).collect();
    LinearFunction::new(weights)
}

/// Bit vector over the relevant bits plus its cached fitness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchPoint {
    bits: Vec<bool>,
    fitness: u128,
}

impl SearchPoint {
    pub fn new(f: &LinearFunction, bits: Vec<bool>) -> Result<Self> {
        let fitness = f.evaluate(&bits)?;
        Ok(Self { bits, fitness })
    }

    /// Uniformly random point; each bit is an independent fair coin.
    pub fn random<R: Rng + ?Sized>(f: &LinearFunction, rng: &mut R) -> Self {
        let bits: Vec<bool> = (0..f.n()).map(|_| rng.random_bool(0.5)).collect();
        let fitness = f.evaluate_unchecked(&bits);
        Self { bits, fitness }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn fitness(&self) -> u128 {
        self.fitness
    }

    pub fn is_optimum(&self) -> bool {
        self.fitness == 0
    }

    /// Flips `flips` in place; `delta` must be the matching fitness change.
    #[inline]
    pub(crate) fn apply(&mut self, f: &LinearFunction, flips: &[usize], delta: i128) {
        for &i in flips {
            self.bits[i] = !self.bits[i];
        }
        self.fitness = (self.fitness as i128 + delta) as u128;
        debug_assert_eq!(self.fitness, f.evaluate_unchecked(&self.bits));
    }
}

/// Initial point of a run: uniform over the relevant bits.
pub fn init_search_point<R: Rng + ?Sized>(f: &LinearFunction, rng: &mut R) -> SearchPoint {
    SearchPoint::random(f, rng)
}

/// Function family with an optional fixed size.
///
/// Grammar: `onemax:<n>`, `binval:<n>`, `random:<n>:<w_max>:<seed>`. Inside
/// experiment configs the size comes from the grid, so the `<n>` field may be
/// omitted: `onemax`, `binval`, `random:<w_max>:<seed>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FunctionSpec {
    pub family: FunctionFamily,
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionFamily {
    OneMax,
    BinVal,
    Random { w_max: u64, seed: u64 },
}

impl FunctionSpec {
    /// Builds the function with `n` relevant bits.
    pub fn build(&self, n: usize) -> Result<LinearFunction> {
        match self.family {
            FunctionFamily::OneMax => one_max(n),
            FunctionFamily::BinVal => bin_val(n),
            FunctionFamily::Random { w_max, seed } => random_linear(n, seed, w_max),
        }
    }

    /// Builds the function at its fixed size.
    pub fn build_fixed(&self) -> Result<LinearFunction> {
        match self.n {
            Some(n) => self.build(n),
            None => invalid(format!("function spec `{self}` has no size")),
        }
    }

    /// Canonical spelling at size `n`, as written to CSV output.
    pub fn label(&self, n: usize) -> String {
        FunctionSpec {
            family: self.family,
            n: Some(n),
        }
        .to_string()
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.family, self.n) {
            (FunctionFamily::OneMax, Some(n)) => write!(f, "onemax:{n}"),
            (FunctionFamily::OneMax, None) => write!(f, "onemax"),
            (FunctionFamily::BinVal, Some(n)) => write!(f, "binval:{n}"),
            (FunctionFamily::BinVal, None) => write!(f, "binval"),
            (FunctionFamily::Random { w_max, seed }, Some(n)) => {
                write!(f, "random:{n}:{w_max}:{seed}")
            }
            (FunctionFamily::Random { w_max, seed }, None) => write!(f, "random:{w_max}:{seed}"),
        }
    }
}

/// Splits `s` on `:` and returns each token with its byte offset.
pub(crate) fn tokens(s: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = 0;
    for part in s.split(':') {
        out.push((start, part));
        start += part.len() + 1;
    }
    out
}

pub(crate) fn parse_num<T: FromStr>(tok: (usize, &str), what: &str) -> Result<T> {
    tok.1
        .trim()
        .parse()
        .or_else(|_| config_err(tok.0, format!("expected {what}, found `{}`", tok.1)))
}

impl FromStr for FunctionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let toks = tokens(s);
        let size = |t: (usize, &str)| -> Result<usize> {
            let n: usize = parse_num(t, "a positive size")?;
            if n == 0 {
                return config_err(t.0, "size must be >= 1");
            }
            Ok(n)
        };
        let (family, n) = match (toks[0].1, toks.len()) {
            ("onemax", 1) => (FunctionFamily::OneMax, None),
            ("onemax", 2) => (FunctionFamily::OneMax, Some(size(toks[1])?)),
            ("binval", 1) => (FunctionFamily::BinVal, None),
            ("binval", 2) => (FunctionFamily::BinVal, Some(size(toks[1])?)),
            ("random", 3) => (
                FunctionFamily::Random {
                    w_max: parse_num(toks[1], "w_max")?,
                    seed: parse_num(toks[2], "a seed")?,
                },
                None,
            ),
            ("random", 4) => (
                FunctionFamily::Random {
                    w_max: parse_num(toks[2], "w_max")?,
                    seed: parse_num(toks[3], "a seed")?,
                },
                Some(size(toks[1])?),
            ),
            ("onemax" | "binval" | "random", _) => {
                return config_err(0, format!("wrong number of fields in `{s}`"))
            }
            (other, _) => return config_err(0, format!("unknown function family `{other}`")),
        };
        if let FunctionFamily::Random { w_max: 0, .. } = family {
            return config_err(0, "w_max must be >= 1");
        }
        Ok(FunctionSpec { family, n })
    }
}
