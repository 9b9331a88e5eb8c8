//! Success indices of an independent Bernoulli(p_k) sequence.

use rand::Rng;
use rand_distr::{Distribution, Geometric};

use crate::error::Result;
use crate::schedules::PSchedule;
use crate::scalar::Exponent;

/// Below this index successes are drawn one Bernoulli trial at a time.
pub const K_STAR: u64 = 10_000;

/// Success probabilities p_k, k ≥ 1.
pub trait SuccessProbability: Sync {
    fn prob(&self, k: u64) -> f64;
}

impl<F: Fn(u64) -> f64 + Sync> SuccessProbability for F {
    fn prob(&self, k: u64) -> f64 {
        self(k)
    }
}

/// Schedule-backed probabilities; evaluation never fails once the clamp
/// threshold has been checked at construction.
pub struct ScheduleProb<'a, E> {
    p: &'a PSchedule<E>,
}

impl<'a, E: Exponent> ScheduleProb<'a, E> {
    pub fn new(p: &'a PSchedule<E>) -> Result<Self> {
        p.k0()?;
        Ok(Self { p })
    }
}

impl<E: Exponent> SuccessProbability for ScheduleProb<'_, E> {
    fn prob(&self, k: u64) -> f64 {
        self.p.value(k).unwrap_or(0.0)
    }
}

/// Sampler of the successive k with B_k = 1 on 1..=n.
///
/// Above the crossover, proposals come from a Bernoulli(q) process with
/// q = p at the current index, an upper bound for all later indices, and
/// are accepted with probability p_j/q. The bound is refreshed after every
/// rejection.
pub struct SkipSampler<'a, P: ?Sized> {
    p: &'a P,
    n: u64,
    crossover: u64,
}

impl<'a, P: SuccessProbability + ?Sized> SkipSampler<'a, P> {
    /// Crossover at max(K_STAR, start of the final nonincreasing run of p).
    pub fn new(p: &'a P, n: u64) -> Self {
        let mut m = n.max(1);
        while m > K_STAR && p.prob(m - 1) >= p.prob(m) {
            m -= 1;
        }
        Self::with_crossover(p, n, m.max(K_STAR))
    }

    /// Caller asserts p is nonincreasing on [crossover, n].
    pub fn with_crossover(p: &'a P, n: u64, crossover: u64) -> Self {
        Self { p, n, crossover: crossover.max(1) }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn crossover(&self) -> u64 {
        self.crossover
    }

    /// Next k > from_k with B_k = 1, or `None` past n.
    pub fn next<R: Rng + ?Sized>(&self, from_k: u64, rng: &mut R) -> Option<u64> {
        let mut k = from_k + 1;
        while k < self.crossover {
            if k > self.n {
                return None;
            }
            if rng.random::<f64>() < self.p.prob(k) {
                return Some(k);
            }
            k += 1;
        }
        loop {
            if k > self.n {
                return None;
            }
            let q = self.p.prob(k);
            if q <= 0.0 {
                return None;
            }
            if q >= 1.0 {
                return Some(k);
            }
            let skip = Geometric::new(q).expect("q in (0,1)").sample(rng);
            let j = k.saturating_add(skip);
            if j > self.n {
                return None;
            }
            if rng.random::<f64>() * q < self.p.prob(j) {
                return Some(j);
            }
            k = j + 1;
        }
    }
}

/// Next success after `from_k` under the sampler's probabilities.
pub fn next_success<P: SuccessProbability + ?Sized, R: Rng + ?Sized>(
    sampler: &SkipSampler<'_, P>,
    from_k: u64,
    rng: &mut R,
) -> Option<u64> {
    sampler.next(from_k, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use crate::stats::two_sample_ks;

    #[test]
    fn certain_success_in_clamped_head() {
        let p = |_: u64| 1.0;
        let s = SkipSampler::new(&p, 100);
        let mut rng = RngStream::new(1, 0).rng();
        assert_eq!(s.next(5, &mut rng), Some(6));
        let big = SkipSampler::with_crossover(&p, 100_000, 10);
        assert_eq!(big.next(50_000, &mut rng), Some(50_001));
        assert_eq!(big.next(100_000, &mut rng), None);
    }

    #[test]
    fn harmonic_count_over_a_decade() {
        let p = |k: u64| 1.0 / k as f64;
        let s = SkipSampler::new(&p, 10_000_000);
        let reps = 20_000u64;
        let mut total = 0u64;
        for r in 0..reps {
            let mut rng = RngStream::new(2, r).rng();
            let mut k = 1_000_000;
            while let Some(j) = s.next(k, &mut rng) {
                total += 1;
                k = j;
            }
        }
        let mean = total as f64 / reps as f64;
        let expected: f64 = (1_000_001..=10_000_000u64).map(|k| 1.0 / k as f64).sum();
        assert!((expected - 10f64.ln()).abs() < 1e-6);
        let se = (expected / reps as f64).sqrt();
        assert!((mean - expected).abs() < 4.0 * se, "mean {mean} expected {expected}");
    }

    #[test]
    fn thinning_matches_direct_trials() {
        let n = 10_000;
        let p = |k: u64| 1.0 / k as f64;
        let skip = SkipSampler::with_crossover(&p, n, 2);
        let direct = SkipSampler::with_crossover(&p, n, n + 1);
        let reps = 10_000u64;
        let summarize = |s: &SkipSampler<'_, _>, seed: u64| {
            let mut counts = Vec::new();
            let mut last = Vec::new();
            for r in 0..reps {
                let mut rng = RngStream::new(seed, r).rng();
                let (mut k, mut c) = (0, 0);
                while let Some(j) = s.next(k, &mut rng) {
                    c += 1;
                    k = j;
                }
                counts.push(c as f64);
                last.push(k as f64);
            }
            (counts, last)
        };
        let (c1, l1) = summarize(&skip, 3);
        let (c2, l2) = summarize(&direct, 4);
        assert!(two_sample_ks(&c1, &c2).unwrap() < 0.02);
        assert!(two_sample_ks(&l1, &l2).unwrap() < 0.02);
    }

    #[test]
    fn crossover_follows_monotone_tail() {
        let p = |k: u64| if k < 20_000 { 0.5 } else if k < 20_010 { 0.9 } else { 1.0 / k as f64 };
        assert_eq!(SkipSampler::new(&p, 50_000).crossover(), 20_000);
        let h = |k: u64| 1.0 / k as f64;
        assert_eq!(SkipSampler::new(&h, 50_000).crossover(), K_STAR);
    }
}
