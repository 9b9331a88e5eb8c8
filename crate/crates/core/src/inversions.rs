//! Card-insertion shuffles and their inversion counts I_n = Σ B_k X_k.
//!
//! At step k card k is placed with j cards to its right, where j = 0 with
//! probability 1 − |E_k|/k and j = l with probability 1/k for each l ∈ E_k.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::SetSize;
use crate::error::{Error, Result};
use crate::numerics::{MixingLaw, SchemeLimitLaw};
use crate::rng::RngStream;
use crate::schedules::MuSchedule;
use crate::sim::bernoulli::SkipSampler;

/// Largest deck handled by [`shuffle_oracle`].
pub const ORACLE_MAX_N: u64 = 100_000;

/// The family of subsets E_k ⊆ {1, …, k−1}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum SubsetScheme {
    /// E_k = {1, …, k−1}.
    Full,
    /// E_k = {1} for k ≥ 2.
    Singleton,
    /// E_k = {k−1} for k ≥ 2.
    Top,
    /// E_k = {k−N, …, k−1}, truncated at 1 while k ≤ N.
    LastN { n: u64 },
    /// E_k = {min(⌊r k⌋, k−1) : r ∈ ratios} minus 0, deduplicated.
    Ratio { ratios: Vec<f64> },
    /// sets[k−1] = E_k.
    Custom { sets: Vec<Vec<u64>> },
}

impl SubsetScheme {
    /// Checks that the scheme is defined and admissible for k ≤ n.
    pub fn validate(&self, n: u64) -> Result<()> {
        match self {
            SubsetScheme::LastN { n: 0 } => Err(Error::domain("last_n requires N ≥ 1")),
            SubsetScheme::Ratio { ratios } => {
                if ratios.is_empty() || ratios.iter().any(|r| !(*r > 0.0 && *r <= 1.0)) {
                    return Err(Error::domain("ratios must be nonempty and lie in (0, 1]"));
                }
                Ok(())
            }
            SubsetScheme::Custom { sets } => {
                if (sets.len() as u64) < n {
                    return Err(Error::domain(format!("custom scheme defines E_k only up to k={}", sets.len())));
                }
                for (i, set) in sets.iter().enumerate() {
                    let k = i as u64 + 1;
                    if let Some(bad) = set.iter().find(|&&l| l == 0 || l >= k) {
                        return Err(Error::domain(format!("E_{k} contains {bad}, outside 1..={}", k - 1)));
                    }
                    let mut s = set.clone();
                    s.sort_unstable();
                    s.dedup();
                    if s.len() != set.len() {
                        return Err(Error::domain(format!("E_{k} lists an element twice")));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn ratio_set(ratios: &[f64], k: u64) -> Vec<u64> {
        let mut set: Vec<u64> = ratios
            .iter()
            .map(|r| ((r * k as f64).floor() as u64).min(k.saturating_sub(1)))
            .filter(|&l| l >= 1)
            .collect();
        set.sort_unstable();
        set.dedup();
        set
    }

    /// E_k as an explicit sorted list. Intended for small schemes and tests.
    pub fn set(&self, k: u64) -> Vec<u64> {
        match self {
            SubsetScheme::Full => (1..k).collect(),
            SubsetScheme::Singleton => if k >= 2 { vec![1] } else { vec![] },
            SubsetScheme::Top => if k >= 2 { vec![k - 1] } else { vec![] },
            SubsetScheme::LastN { n } => (k.saturating_sub(*n).max(1)..k).collect(),
            SubsetScheme::Ratio { ratios } => Self::ratio_set(ratios, k),
            SubsetScheme::Custom { sets } => {
                let mut s = sets.get(k as usize - 1).cloned().unwrap_or_default();
                s.sort_unstable();
                s
            }
        }
    }

    /// |E_k|.
    pub fn size(&self, k: u64) -> u64 {
        match self {
            SubsetScheme::Full => k.saturating_sub(1),
            SubsetScheme::Singleton | SubsetScheme::Top => u64::from(k >= 2),
            SubsetScheme::LastN { n } => k.saturating_sub(1).min(*n),
            _ => self.set(k).len() as u64,
        }
    }

    /// Σ_{l ∈ E_k} l.
    pub fn sum(&self, k: u64) -> f64 {
        let lo_hi = |lo: u64, hi: u64| if hi < lo { 0.0 } else { (lo + hi) as f64 * (hi - lo + 1) as f64 / 2.0 };
        match self {
            SubsetScheme::Full => lo_hi(1, k.saturating_sub(1)),
            SubsetScheme::Singleton => if k >= 2 { 1.0 } else { 0.0 },
            SubsetScheme::Top => if k >= 2 { (k - 1) as f64 } else { 0.0 },
            SubsetScheme::LastN { n } => lo_hi(k.saturating_sub(*n).max(1), k.saturating_sub(1)),
            _ => self.set(k).iter().map(|&l| l as f64).sum(),
        }
    }

    /// Σ_{l ∈ E_k} l².
    pub fn sum_sq(&self, k: u64) -> f64 {
        let sq = |m: u64| m as f64 * (m + 1) as f64 * (2 * m + 1) as f64 / 6.0;
        match self {
            SubsetScheme::Full => sq(k.saturating_sub(1)),
            SubsetScheme::LastN { n } => {
                let lo = k.saturating_sub(*n).max(1);
                if k < 2 { 0.0 } else { sq(k - 1) - sq(lo - 1) }
            }
            _ => self.set(k).iter().map(|&l| (l as f64).powi(2)).sum(),
        }
    }

    /// μ_k = mean of E_k (0 when empty).
    pub fn mu(&self, k: u64) -> f64 {
        let s = self.size(k);
        if s == 0 { 0.0 } else { self.sum(k) / s as f64 }
    }

    /// p_k = |E_k|/k.
    pub fn p(&self, k: u64) -> f64 {
        self.size(k) as f64 / k as f64
    }

    /// A uniform element of E_k, `None` when E_k is empty.
    pub fn sample_element<R: Rng + ?Sized>(&self, k: u64, rng: &mut R) -> Option<u64> {
        match self {
            SubsetScheme::Full => (k >= 2).then(|| rng.random_range(1..k)),
            SubsetScheme::Singleton => (k >= 2).then_some(1),
            SubsetScheme::Top => (k >= 2).then(|| k - 1),
            SubsetScheme::LastN { n } => (k >= 2).then(|| rng.random_range(k.saturating_sub(*n).max(1)..k)),
            SubsetScheme::Ratio { ratios } => {
                let set = Self::ratio_set(ratios, k);
                (!set.is_empty()).then(|| set[rng.random_range(0..set.len())])
            }
            SubsetScheme::Custom { sets } => {
                let set = sets.get(k as usize - 1)?;
                (!set.is_empty()).then(|| set[rng.random_range(0..set.len())])
            }
        }
    }

    /// The number j of cards left to the right of card k: B_k X_k.
    pub fn draw_offset<R: Rng + ?Sized>(&self, k: u64, rng: &mut R) -> u64 {
        // card k lands in one of k slots; the slots indexed by E_k create
        // that many inversions, every other slot is the right end
        let slot = rng.random_range(0..k);
        let size = self.size(k);
        if slot < size { self.sample_element(k, rng).unwrap_or(0) } else { 0 }
    }

    /// Distinct ratios in the order the limit atoms are reported.
    fn distinct_ratios(ratios: &[f64]) -> Vec<f64> {
        let mut r = ratios.to_vec();
        r.sort_by(f64::total_cmp);
        r.dedup();
        r
    }

    /// Limit law of X_k/μ_k.
    pub fn limit_mixing(&self) -> Result<SchemeLimitLaw> {
        match self {
            SubsetScheme::Full => Ok(SchemeLimitLaw::UniformZeroTwo),
            SubsetScheme::Singleton | SubsetScheme::Top | SubsetScheme::LastN { .. } => Ok(SchemeLimitLaw::One),
            SubsetScheme::Ratio { ratios } => {
                self.validate(1)?;
                let r = Self::distinct_ratios(ratios);
                let mean = r.iter().sum::<f64>() / r.len() as f64;
                Ok(SchemeLimitLaw::Atoms(r.iter().map(|x| x / mean).collect()))
            }
            SubsetScheme::Custom { .. } => Err(Error::capability("no closed-form limit law for a custom scheme")),
        }
    }
}

/// Inputs to the shuffle classifier: μ(x), eventual |E_k|, and the limit
/// law of X_k/μ_k.
pub fn scheme_to_limit_inputs(scheme: &SubsetScheme) -> Result<(MuSchedule<f64>, SetSize, MixingLaw<f64>)> {
    if !matches!(scheme, SubsetScheme::Custom { .. }) {
        scheme.validate(1)?;
    }
    let linear = |c: f64| MuSchedule::new(c, vec![1.0]);
    match scheme {
        SubsetScheme::Full => Ok((linear(0.5)?, SetSize::Unbounded, MixingLaw::scheme(scheme.clone()))),
        SubsetScheme::Singleton => Ok((MuSchedule::new(1.0, vec![0.0])?, SetSize::Finite(1), MixingLaw::PointMassOne)),
        SubsetScheme::Top => Ok((linear(1.0)?, SetSize::Finite(1), MixingLaw::PointMassOne)),
        SubsetScheme::LastN { n } => Ok((linear(1.0)?, SetSize::Finite(*n), MixingLaw::PointMassOne)),
        SubsetScheme::Ratio { ratios } => {
            let r = SubsetScheme::distinct_ratios(ratios);
            let mean = r.iter().sum::<f64>() / r.len() as f64;
            let mixing = if r.len() == 1 {
                MixingLaw::PointMassOne
            } else {
                MixingLaw::uniform_atoms(r.iter().map(|x| x / mean).collect())?
            };
            Ok((linear(mean)?, SetSize::Finite(r.len() as u64), mixing))
        }
        SubsetScheme::Custom { .. } => {
            Err(Error::capability("custom schemes have no structured limit; classify them empirically"))
        }
    }
}

/// Simulated inversion counts I_n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InversionRun {
    pub n: u64,
    pub samples: Vec<u64>,
    /// M_n = Σ_k (|E_k|/k) μ_k = E I_n.
    pub mean_model: f64,
}

/// E I_n = Σ_{k≤n} Σ_{l∈E_k} l / k.
pub fn inversion_mean(scheme: &SubsetScheme, n: u64) -> f64 {
    (1..=n).map(|k| scheme.sum(k) / k as f64).sum()
}

/// `replicates` independent draws of I_n; replicate r uses substream r.
pub fn simulate_inversions(scheme: &SubsetScheme, n: u64, replicates: usize, rng: RngStream) -> Result<InversionRun> {
    if n == 0 || replicates == 0 {
        return Err(Error::domain("n and replicates must be positive"));
    }
    scheme.validate(n)?;
    let p = |k: u64| scheme.p(k);
    let sampler = SkipSampler::new(&p, n);
    let samples = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut g = rng.substream(r as u64).rng();
            let mut total = 0u64;
            let mut k = 0;
            while let Some(j) = sampler.next(k, &mut g) {
                total += scheme.sample_element(j, &mut g).unwrap_or(0);
                k = j;
            }
            total
        })
        .collect();
    Ok(InversionRun { n, samples, mean_model: inversion_mean(scheme, n) })
}

/// Result of performing the shuffle physically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShuffleOutcome {
    /// Card numbers from left to right.
    pub permutation: Vec<u64>,
    /// Σ B_k X_k accumulated while inserting.
    pub running_sum: u64,
    /// Inversions of `permutation` counted independently.
    pub inversions: u64,
}

/// Final row for the given insertion offsets: offsets[k−1] cards lie to
/// the right of card k just after it is inserted.
pub fn permutation_from_offsets(offsets: &[u64]) -> Result<Vec<u64>> {
    let n = offsets.len();
    for (i, &j) in offsets.iter().enumerate() {
        if j > i as u64 {
            return Err(Error::domain(format!("card {} cannot have {j} cards to its right", i + 1)));
        }
    }
    // later cards never reorder earlier ones, so card k's final slot is the
    // (k−1−j)-th slot still free after placing cards k+1..n
    let mut free = Fenwick::full(n);
    let mut row = vec![0u64; n];
    for k in (1..=n).rev() {
        let rank = k - 1 - offsets[k - 1] as usize;
        let slot = free.find_kth(rank);
        free.add(slot, -1);
        row[slot] = k as u64;
    }
    Ok(row)
}

/// Inversion count by merge sort.
pub fn count_inversions(perm: &[u64]) -> u64 {
    let mut a = perm.to_vec();
    let mut buf = vec![0; a.len()];
    merge_count(&mut a, &mut buf)
}

fn merge_count(a: &mut [u64], buf: &mut [u64]) -> u64 {
    let n = a.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = {
        let (l, r) = a.split_at_mut(mid);
        merge_count(l, &mut buf[..mid]) + merge_count(r, &mut buf[mid..])
    };
    let (mut i, mut j, mut o) = (0, mid, 0);
    while i < mid && j < n {
        if a[i] <= a[j] {
            buf[o] = a[i];
            i += 1;
        } else {
            buf[o] = a[j];
            count += (mid - i) as u64;
            j += 1;
        }
        o += 1;
    }
    buf[o..o + mid - i].copy_from_slice(&a[i..mid]);
    o += mid - i;
    buf[o..o + n - j].copy_from_slice(&a[j..n]);
    a.copy_from_slice(&buf[..n]);
    count
}

/// Runs the insertion shuffle for n cards and counts its inversions both
/// ways.
pub fn shuffle_oracle(scheme: &SubsetScheme, n: u64, rng: RngStream) -> Result<ShuffleOutcome> {
    if n == 0 || n > ORACLE_MAX_N {
        return Err(Error::domain(format!("oracle deck size must be in 1..={ORACLE_MAX_N}, got {n}")));
    }
    scheme.validate(n)?;
    let mut g = rng.rng();
    let offsets: Vec<u64> = (1..=n).map(|k| scheme.draw_offset(k, &mut g)).collect();
    let running_sum = offsets.iter().sum();
    let permutation = permutation_from_offsets(&offsets)?;
    let inversions = count_inversions(&permutation);
    Ok(ShuffleOutcome { permutation, running_sum, inversions })
}

/// Binary indexed tree over slot occupancy.
struct Fenwick {
    tree: Vec<i64>,
    log: u32,
}

impl Fenwick {
    fn full(n: usize) -> Self {
        let mut tree = vec![0i64; n + 1];
        for i in 1..=n {
            tree[i] += 1;
            let parent = i + (i & i.wrapping_neg());
            if parent <= n {
                tree[parent] += tree[i];
            }
        }
        let log = usize::BITS - n.leading_zeros();
        Self { tree, log }
    }

    fn add(&mut self, idx: usize, delta: i64) {
        let mut i = idx + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Zero-based position of the (rank+1)-th occupied slot.
    fn find_kth(&self, rank: usize) -> usize {
        let mut pos = 0;
        let mut remaining = rank as i64 + 1;
        for b in (0..self.log).rev() {
            let next = pos + (1 << b);
            if next < self.tree.len() && self.tree[next] < remaining {
                pos = next;
                remaining -= self.tree[next];
            }
        }
        pos
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn naive_permutation(offsets: &[u64]) -> Vec<u64> {
        let mut row: Vec<u64> = Vec::new();
        for (i, &j) in offsets.iter().enumerate() {
            let at = row.len() - j as usize;
            row.insert(at, i as u64 + 1);
        }
        row
    }

    fn naive_inversions(p: &[u64]) -> u64 {
        let mut c = 0;
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                c += u64::from(p[i] > p[j]);
            }
        }
        c
    }

    #[test]
    fn sets_respect_bounds() {
        let schemes = [
            SubsetScheme::Full,
            SubsetScheme::Singleton,
            SubsetScheme::Top,
            SubsetScheme::LastN { n: 3 },
            SubsetScheme::Ratio { ratios: vec![0.5, 1.0, 0.5] },
        ];
        for s in &schemes {
            assert!(s.set(1).is_empty(), "{s:?}");
            for k in 1..60 {
                let set = s.set(k);
                assert!(set.iter().all(|&l| l >= 1 && l < k), "{s:?} k={k}");
                assert_eq!(s.size(k), set.len() as u64, "{s:?} k={k}");
                assert_relative_eq!(s.sum(k), set.iter().map(|&l| l as f64).sum::<f64>());
                assert_relative_eq!(s.sum_sq(k), set.iter().map(|&l| (l * l) as f64).sum::<f64>());
            }
        }
        assert_eq!(SubsetScheme::Ratio { ratios: vec![0.5, 1.0] }.set(10), vec![5, 9]);
        assert_eq!(SubsetScheme::Ratio { ratios: vec![0.5, 1.0] }.set(2), vec![1]);
    }

    #[test]
    fn custom_validation() {
        let ok = SubsetScheme::Custom { sets: vec![vec![], vec![1], vec![1, 2]] };
        assert!(ok.validate(3).is_ok());
        assert!(ok.validate(4).is_err());
        let bad = SubsetScheme::Custom { sets: vec![vec![], vec![2]] };
        assert!(matches!(simulate_inversions(&bad, 2, 10, RngStream::new(0, 0)), Err(Error::Domain(_))));
    }

    #[test]
    fn offsets_to_permutation() {
        let offsets = [0, 1, 0, 2, 4, 1];
        let p = permutation_from_offsets(&offsets).unwrap();
        assert_eq!(p, naive_permutation(&offsets));
        assert_eq!(count_inversions(&p), 8);
        assert_eq!(permutation_from_offsets(&[0, 0, 0, 0]).unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(count_inversions(&[1, 2, 3, 4]), 0);
        assert!(permutation_from_offsets(&[1]).is_err());
    }

    #[test]
    fn oracle_small_full_decks() {
        for seed in 0..50 {
            let o = shuffle_oracle(&SubsetScheme::Full, 3, RngStream::new(seed, 0)).unwrap();
            assert!(o.inversions <= 3);
            assert_eq!(o.inversions, o.running_sum);
            assert_eq!(o.inversions, naive_inversions(&o.permutation));
        }
    }

    #[test]
    fn oracle_top_deck() {
        let o = shuffle_oracle(&SubsetScheme::Top, 100, RngStream::new(9, 0)).unwrap();
        assert_eq!(o.running_sum, o.inversions);
        assert_eq!(o.inversions, naive_inversions(&o.permutation));
        let mut sorted = o.permutation.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (1..=100).collect::<Vec<_>>());
        assert!(shuffle_oracle(&SubsetScheme::Top, ORACLE_MAX_N + 1, RngStream::new(9, 0)).is_err());
    }

    #[test]
    fn limit_inputs() {
        let (mu, n, mix) = scheme_to_limit_inputs(&SubsetScheme::Top).unwrap();
        assert_eq!((mu.c(), mu.a(), n, mix), (&1.0, &[1.0][..], SetSize::Finite(1), MixingLaw::PointMassOne));
        let (mu, n, mix) = scheme_to_limit_inputs(&SubsetScheme::Singleton).unwrap();
        assert_eq!((mu.a(), n, mix), (&[0.0][..], SetSize::Finite(1), MixingLaw::PointMassOne));
        let (mu, n, mix) = scheme_to_limit_inputs(&SubsetScheme::Ratio { ratios: vec![0.5, 1.0] }).unwrap();
        assert_eq!((mu.c(), n), (&0.75, SetSize::Finite(2)));
        assert_eq!(mix, MixingLaw::uniform_atoms(vec![2.0 / 3.0, 4.0 / 3.0]).unwrap());
        assert!(matches!(
            scheme_to_limit_inputs(&SubsetScheme::Custom { sets: vec![] }),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn mean_model_matches_full_formula() {
        let n = 1000;
        assert_relative_eq!(inversion_mean(&SubsetScheme::Full, n), (n * (n - 1)) as f64 / 4.0, max_relative = 1e-12);
        // Top: Σ (k−1)/k = n − H_n
        let h: f64 = (1..=n).map(|k| 1.0 / k as f64).sum();
        assert_relative_eq!(inversion_mean(&SubsetScheme::Top, n), n as f64 - h, max_relative = 1e-12);
    }

    #[test]
    fn simulated_counts_are_bounded_and_reproducible() {
        let a = simulate_inversions(&SubsetScheme::Full, 50, 200, RngStream::new(5, 0)).unwrap();
        let b = simulate_inversions(&SubsetScheme::Full, 50, 200, RngStream::new(5, 0)).unwrap();
        assert_eq!(a, b);
        assert!(a.samples.iter().all(|&s| s <= 50 * 49 / 2));
    }
}
