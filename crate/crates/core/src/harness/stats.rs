use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Below this trial count the normal-approximation CI is flagged as wide.
pub const MIN_TRIALS_FOR_CI: usize = 30;

const Z95: f64 = 1.96;

/// Mean of a normalized runtime with its 95% normal-approximation CI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalized {
    pub mean: f64,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
}

/// Summary of the evaluation counts for one `(policy, n)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub trials: usize,
    /// Runs that hit the evaluation budget without finding the optimum. They
    /// enter every average at their budget, so means are lower bounds.
    pub censored: usize,
    pub mean: f64,
    pub std: f64,
    pub min: u64,
    pub max: u64,
    pub ci_half_width: Option<f64>,
    /// Runtime divided by `n ln n`; absent for `n = 1`.
    pub per_n_ln_n: Option<Normalized>,
    /// Runtime divided by `n (ln n)^2`; absent for `n = 1`.
    pub per_n_ln2_n: Option<Normalized>,
    pub wide_ci: bool,
    pub lower_bound: bool,
}

impl Stats {
    pub fn uncensored(&self) -> usize {
        self.trials - self.censored
    }
}

/// Summarizes uncensored evaluation counts.
pub fn summarize(samples: &[u64], n: usize) -> Result<Stats> {
    summarize_censored(samples, 0, n)
}

/// Summarizes `samples`, of which `censored` hit the budget.
pub fn summarize_censored(samples: &[u64], censored: usize, n: usize) -> Result<Stats> {
    if samples.is_empty() {
        return invalid("cannot summarize an empty sample");
    }
    if n == 0 {
        return invalid("n must be >= 1");
    }
    let count = samples.len();
    let mean = samples.iter().map(|&v| v as f64).sum::<f64>() / count as f64;
    let std = if count > 1 {
        let ss: f64 = samples.iter().map(|&v| (v as f64 - mean).powi(2)).sum();
        (ss / (count - 1) as f64).sqrt()
    } else {
        0.0
    };
    let ci_half_width = (count > 1).then(|| Z95 * std / (count as f64).sqrt());
    let ln = (n as f64).ln();
    let normalized = |scale: f64| {
        (scale > 0.0).then(|| Normalized {
            mean: mean / scale,
            ci_low: ci_half_width.map(|h| (mean - h) / scale),
            ci_high: ci_half_width.map(|h| (mean + h) / scale),
        })
    };
    Ok(Stats {
        trials: count,
        censored,
        mean,
        std,
        min: *samples.iter().min().expect("non-empty"),
        max: *samples.iter().max().expect("non-empty"),
        ci_half_width,
        per_n_ln_n: normalized(n as f64 * ln),
        per_n_ln2_n: normalized(n as f64 * ln * ln),
        wide_ci: count < MIN_TRIALS_FOR_CI,
        lower_bound: censored > 0,
    })
}

/// Ratio of mean runtimes `a / b` with a delta-method 95% CI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioRecord {
    pub n: usize,
    pub mean_a: f64,
    pub mean_b: f64,
    pub ratio: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl RatioRecord {
    pub fn ci_intersects(&self, lo: f64, hi: f64) -> bool {
        self.ci_low <= hi && self.ci_high >= lo
    }
}

/// Compares two cells. `Var(A/B) ≈ R²·(sa²/(na·ma²) + sb²/(nb·mb²))`.
pub fn ratio_of_means(a: &Stats, b: &Stats, n: usize) -> Result<RatioRecord> {
    for (name, s) in [("a", a), ("b", b)] {
        if s.uncensored() < MIN_TRIALS_FOR_CI {
            return invalid(format!(
                "report {name} has only {} uncensored trials at n = {n}",
                s.uncensored()
            ));
        }
    }
    let ratio = a.mean / b.mean;
    let rel_var = a.std.powi(2) / (a.trials as f64 * a.mean.powi(2))
        + b.std.powi(2) / (b.trials as f64 * b.mean.powi(2));
    let half = Z95 * ratio * rel_var.sqrt();
    Ok(RatioRecord {
        n,
        mean_a: a.mean,
        mean_b: b.mean,
        ratio,
        ci_low: ratio - half,
        ci_high: ratio + half,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_sample() {
        let s = summarize(&[10, 10, 10], 5).unwrap();
        assert_eq!(s.mean, 10.0);
        assert_eq!(s.std, 0.0);
        assert_eq!(s.ci_half_width, Some(0.0));
        assert!(s.wide_ci);
    }

    #[test]
    fn normalization() {
        let s = summarize(&[1, 3], 2).unwrap();
        assert_eq!(s.mean, 2.0);
        let v = s.per_n_ln_n.unwrap().mean;
        assert!((v - 2.0 / (2.0 * 2f64.ln())).abs() < 1e-15);
        assert!((v - std::f64::consts::LOG2_E).abs() < 1e-12);
        assert!((s.std - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn single_sample_is_flagged() {
        let s = summarize(&[7], 10).unwrap();
        assert!(s.wide_ci);
        assert_eq!(s.ci_half_width, None);
        assert!(summarize(&[], 10).is_err());
        assert!(summarize(&[1], 1).unwrap().per_n_ln_n.is_none());
    }

    #[test]
    fn censoring_flag() {
        let s = summarize_censored(&[5, 9, 100], 1, 10).unwrap();
        assert!(s.lower_bound);
        assert_eq!(s.uncensored(), 2);
    }

    #[test]
    fn self_ratio_is_one() {
        let samples: Vec<u64> = (0..100).map(|i| 1000 + 7 * i).collect();
        let s = summarize(&samples, 100).unwrap();
        let r = ratio_of_means(&s, &s, 100).unwrap();
        assert_eq!(r.ratio, 1.0);
        assert!(r.ci_low <= 1.0 && r.ci_high >= 1.0);
        let few = summarize(&samples[..10], 100).unwrap();
        assert!(ratio_of_means(&s, &few, 100).is_err());
    }
}
