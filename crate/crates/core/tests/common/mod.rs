//! Independent oracles shared by the integration tests: exact Markov-chain
//! hitting times, naive per-bit samplers and goodness-of-fit statistics.
#![allow(dead_code)]

use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Exact expected number of evaluations of the (1+1) EA with fixed
/// per-position rates, counting the initial evaluation. Solves
/// `h(x) = 1 + Σ_y P(x→y) h(y)`, `h(0) = 0` over all `2^n` states.
pub fn expected_runtime(weights: &[u64], rates: &[f64], strict: bool) -> f64 {
    let n = weights.len();
    assert_eq!(rates.len(), n);
    assert!(n <= 10);
    let states = 1usize << n;
    let fit = |x: usize| -> u64 { (0..n).filter(|i| x >> i & 1 == 1).map(|i| weights[i]).sum() };
    let mask_prob = |m: usize| -> f64 {
        (0..n)
            .map(|i| if m >> i & 1 == 1 { rates[i] } else { 1.0 - rates[i] })
            .product()
    };
    // Unknowns h(1..states); row for state x: h(x) - Σ P h(y) = 1.
    let dim = states - 1;
    let mut a = vec![vec![0.0f64; dim + 1]; dim];
    for x in 1..states {
        let row = &mut a[x - 1];
        row[x - 1] += 1.0;
        row[dim] = 1.0;
        for m in 0..states {
            let y = x ^ m;
            let accept = if strict { fit(y) < fit(x) } else { fit(y) <= fit(x) };
            let next = if accept { y } else { x };
            if next != 0 {
                row[next - 1] -= mask_prob(m);
            }
        }
    }
    let h = solve(a);
    1.0 + h.iter().sum::<f64>() / states as f64
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
pub fn solve(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        let p = a[col][col];
        assert!(p.abs() > 1e-14, "singular system");
        for row in col + 1..n {
            let factor = a[row][col] / p;
            if factor != 0.0 {
                let (top, bottom) = a.split_at_mut(row);
                for (dst, src) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                    *dst -= factor * src;
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (a[row][n] - s) / a[row][row];
    }
    x
}

/// Flip set by one Bernoulli draw per position.
pub fn naive_flips<R: Rng>(rates: &[f64], rng: &mut R) -> Vec<usize> {
    (0..rates.len()).filter(|&i| rng.random_bool(rates[i])).collect()
}

/// Exact pmf of the number of successes of independent Bernoulli(p_i).
pub fn poisson_binomial_pmf(rates: &[f64]) -> Vec<f64> {
    let mut pmf = vec![1.0];
    for &p in rates {
        let mut next = vec![0.0; pmf.len() + 1];
        for (k, &v) in pmf.iter().enumerate() {
            next[k] += v * (1.0 - p);
            next[k + 1] += v * p;
        }
        pmf = next;
    }
    pmf
}

/// Pearson statistic of `counts` against `pmf`, merging tail bins until every
/// expected count is at least 5. Returns `(statistic, degrees of freedom)`.
pub fn chi_square(counts: &[u64], pmf: &[f64]) -> (f64, usize) {
    let total: u64 = counts.iter().sum();
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for (k, &p) in pmf.iter().enumerate() {
        obs += counts.get(k).copied().unwrap_or(0) as f64;
        exp += p * total as f64;
        if exp >= 5.0 {
            bins.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    if exp > 0.0 || obs > 0.0 {
        let last = bins.last_mut().expect("at least one bin");
        last.0 += obs;
        last.1 += exp;
    }
    let stat = bins.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    (stat, bins.len() - 1)
}

pub fn chi_square_quantile(df: usize, q: f64) -> f64 {
    ChiSquared::new(df as f64).unwrap().inverse_cdf(q)
}

/// Two-sample chi-square homogeneity test on two count vectors over the
/// same bins. Bins whose pooled count is below 10 are merged.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> (f64, usize) {
    let len = a.len().max(b.len());
    let get = |v: &[u64], i: usize| v.get(i).copied().unwrap_or(0) as f64;
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let mut bins = Vec::new();
    let (mut ca, mut cb) = (0.0, 0.0);
    for i in 0..len {
        ca += get(a, i);
        cb += get(b, i);
        if ca + cb >= 10.0 {
            bins.push((ca, cb));
            ca = 0.0;
            cb = 0.0;
        }
    }
    if ca + cb > 0.0 {
        let last = bins.last_mut().unwrap();
        last.0 += ca;
        last.1 += cb;
    }
    let mut stat = 0.0;
    for &(x, y) in &bins {
        let pooled = (x + y) / (na + nb);
        let (ea, eb) = (pooled * na, pooled * nb);
        stat += (x - ea).powi(2) / ea + (y - eb).powi(2) / eb;
    }
    (stat, bins.len() - 1)
}

fn ecdf_steps(a: &[u64], b: &[u64]) -> Vec<(f64, f64)> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    let mut pts: Vec<u64> = a.iter().chain(b.iter()).copied().collect();
    pts.sort_unstable();
    pts.dedup();
    let (mut i, mut j) = (0, 0);
    pts.iter()
        .map(|&v| {
            while i < a.len() && a[i] <= v {
                i += 1;
            }
            while j < b.len() && b[j] <= v {
                j += 1;
            }
            (i as f64 / a.len() as f64, j as f64 / b.len() as f64)
        })
        .collect()
}

/// `sup |F_a - F_b|`.
pub fn ks_two_sided(a: &[u64], b: &[u64]) -> f64 {
    ecdf_steps(a, b)
        .iter()
        .map(|(fa, fb)| (fa - fb).abs())
        .fold(0.0, f64::max)
}

/// `sup (F_a - F_b)`: positive when `a` tends to be smaller than `b`.
pub fn ks_one_sided(a: &[u64], b: &[u64]) -> f64 {
    ecdf_steps(a, b)
        .iter()
        .map(|(fa, fb)| fa - fb)
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value at level `alpha`.
pub fn ks_critical(alpha: f64, n: usize, m: usize, two_sided: bool) -> f64 {
    let c = if two_sided {
        (-(alpha / 2.0).ln() / 2.0).sqrt()
    } else {
        (-alpha.ln() / 2.0).sqrt()
    };
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

pub fn mean_and_se(samples: &[u64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().map(|&v| v as f64).sum::<f64>() / n;
    let var = samples.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Exact expected evaluations of the weak-acceptance (1+1) EA on OneMax with
/// constant rate `p`, via the chain lumped on the number of one-bits.
pub fn one_max_expected_runtime(n: usize, p: f64) -> f64 {
    let ln_fact: Vec<f64> = std::iter::once(0.0)
        .chain((1..=n).scan(0.0, |acc, i| {
            *acc += (i as f64).ln();
            Some(*acc)
        }))
        .collect();
    let pmf = |m: usize, k: usize| -> f64 {
        (ln_fact[m] - ln_fact[k] - ln_fact[m - k] + k as f64 * p.ln() + (m - k) as f64 * (-p).ln_1p()).exp()
    };
    let cutoff = |m: usize| ((m as f64 * p + 12.0 * (m as f64 * p).sqrt() + 30.0) as usize).min(m);
    let mut h = vec![0.0; n + 1];
    for i in 1..=n {
        let zeros = n - i;
        let (mut down, mut weighted) = (0.0, 0.0);
        for a in 1..=cutoff(i) {
            let pa = pmf(i, a);
            for b in 0..a.min(zeros + 1) {
                let q = pa * pmf(zeros, b);
                down += q;
                weighted += q * h[i - a + b];
            }
        }
        h[i] = (1.0 + weighted) / down;
    }
    let init: f64 = (0..=n)
        .map(|i| (ln_fact[n] - ln_fact[i] - ln_fact[n - i] - n as f64 * 2f64.ln()).exp() * h[i])
        .sum();
    1.0 + init
}
