//! Flip-set sampling for standard bit mutation.
//!
//! Flipping each of `n` bits independently with probability `p` is sampled
//! as `K ~ Binomial(n, p)` followed by a uniform `K`-subset of positions,
//! which has the same distribution at `O(1 + n·p)` expected cost.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{invalid, Result};

/// Subsets up to this size are drawn by rejection against a linear scan.
const SMALL_SUBSET: usize = 24;

/// Validates a mutation rate.
pub(crate) fn check_rate(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        invalid(format!("mutation rate {p} outside [0, 1]"))
    }
}

/// Reusable flip-set sampler. Keeps its position buffer and the binomial
/// table for the last rate seen, so a constant rate pays setup once.
#[derive(Debug, Default)]
pub struct FlipSampler {
    buf: Vec<usize>,
    cached: Option<(u64, u64, Binomial)>,
}

impl FlipSampler {
    pub fn new() -> Self {
        Self::default()
    }

    /// Draws `K ~ Binomial(n, p)`.
    #[inline]
    pub fn flip_count<R: Rng + ?Sized>(&mut self, n: usize, p: f64, rng: &mut R) -> usize {
        if p <= 0.0 || n == 0 {
            return 0;
        }
        if p >= 1.0 {
            return n;
        }
        let key = (n as u64, p.to_bits());
        let dist = match &self.cached {
            Some((cn, cp, d)) if (*cn, *cp) == key => d,
            _ => {
                let d = Binomial::new(n as u64, p).expect("rate checked by caller");
                &self.cached.insert((key.0, key.1, d)).2
            }
        };
        dist.sample(rng) as usize
    }

    /// Samples the positions flipped by standard bit mutation at rate `p`.
    /// `p` must already be validated.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&mut self, n: usize, p: f64, rng: &mut R) -> &[usize] {
        let k = self.flip_count(n, p, rng);
        self.buf.clear();
        uniform_subset(n, k, rng, &mut self.buf);
        &self.buf
    }
}

/// Appends a uniformly random `k`-subset of `0..n` to `out`.
#[inline]
pub(crate) fn uniform_subset<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R, out: &mut Vec<usize>) {
    debug_assert!(k <= n);
    let start = out.len();
    match k {
        0 => {}
        _ if k == n => out.extend(0..n),
        _ if k <= SMALL_SUBSET && 2 * k <= n => {
            while out.len() - start < k {
                let i = rng.random_range(0..n);
                if !out[start..].contains(&i) {
                    out.push(i);
                }
            }
        }
        _ => out.extend(rand::seq::index::sample(rng, n, k)),
    }
}

/// One-shot flip-set sample at rate `p` over `n` positions.
pub fn sample_flip_set<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Vec<usize>> {
    check_rate(p)?;
    Ok(FlipSampler::new().sample(n, p, rng).to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_rates() {
        let mut rng = crate::trial_rng(1);
        for _ in 0..100 {
            assert!(sample_flip_set(10, 0.0, &mut rng).unwrap().is_empty());
            let mut all = sample_flip_set(10, 1.0, &mut rng).unwrap();
            all.sort_unstable();
            assert_eq!(all, (0..10).collect::<Vec<_>>());
        }
        assert!(sample_flip_set(10, -0.1, &mut rng).is_err());
        assert!(sample_flip_set(10, 1.1, &mut rng).is_err());
        assert!(sample_flip_set(10, f64::NAN, &mut rng).is_err());
    }

    #[test]
    fn subsets_are_distinct_and_in_range() {
        let mut rng = crate::trial_rng(2);
        let mut buf = Vec::new();
        for n in [1, 2, 5, 30, 100, 1000] {
            for k in 0..=n.min(60) {
                buf.clear();
                uniform_subset(n, k, &mut rng, &mut buf);
                assert_eq!(buf.len(), k);
                let mut s = buf.clone();
                s.sort_unstable();
                s.dedup();
                assert_eq!(s.len(), k);
                assert!(s.iter().all(|&i| i < n));
            }
        }
    }

    #[test]
    fn every_position_equally_likely() {
        // Small-subset path: n = 10, k = 3. Each position is hit w.p. 3/10.
        let mut rng = crate::trial_rng(3);
        let mut hits = [0u32; 10];
        let mut buf = Vec::new();
        let reps = 200_000;
        for _ in 0..reps {
            buf.clear();
            uniform_subset(10, 3, &mut rng, &mut buf);
            for &i in &buf {
                hits[i] += 1;
            }
        }
        for h in hits {
            let frac = h as f64 / reps as f64;
            assert!((frac - 0.3).abs() < 0.005, "{frac}");
        }
    }
}
