//! Distances between an empirical sample and a reference law.

use crate::error::{Error, Result};
use crate::numerics::DensityTable;

/// Number of midpoint quantiles used for Wasserstein-1.
pub const W1_QUANTILES: usize = 10_000;

fn sorted(sample: &[f64]) -> Result<Vec<f64>> {
    if sample.is_empty() {
        return Err(Error::domain("empty sample"));
    }
    if sample.iter().any(|x| x.is_nan()) {
        return Err(Error::domain("sample contains NaN"));
    }
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// sup_x |F_n(x) − F(x)| for a continuous reference CDF.
pub fn ks_distance(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    let v = sorted(sample)?;
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(d.clamp(0.0, 1.0))
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn two_sample_ks(a: &[f64], b: &[f64]) -> Result<f64> {
    let a = sorted(a)?;
    let b = sorted(b)?;
    Ok(two_sample_ks_sorted(&a, &b))
}

fn two_sample_ks_sorted(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

fn empirical_quantile(sorted: &[f64], u: f64) -> f64 {
    let idx = ((u * sorted.len() as f64) as usize).min(sorted.len() - 1);
    sorted[idx]
}

/// ∫_0^1 |Q_n(u) − Q(u)| du by the midpoint rule on [`W1_QUANTILES`] nodes.
pub fn wasserstein1(sample: &[f64], quantile: impl Fn(f64) -> f64) -> Result<f64> {
    let v = sorted(sample)?;
    Ok(w1_sorted(&v, quantile))
}

fn w1_sorted(v: &[f64], quantile: impl Fn(f64) -> f64) -> f64 {
    let m = W1_QUANTILES;
    (0..m)
        .map(|j| {
            let u = (j as f64 + 0.5) / m as f64;
            (empirical_quantile(v, u) - quantile(u)).abs()
        })
        .sum::<f64>()
        / m as f64
}

/// Reference law a sample is compared against.
#[derive(Debug, Clone, Copy)]
pub enum Reference<'a> {
    /// Law of `scale · D` where D has the tabulated CDF.
    Table { table: &'a DensityTable<f64>, scale: f64 },
    /// An already sorted reference sample.
    Sample(&'a [f64]),
    /// δ_c.
    PointMass(f64),
}

impl Reference<'_> {
    pub fn ks(&self, sample: &[f64]) -> Result<f64> {
        match *self {
            Reference::Table { table, scale } => ks_distance(sample, |x| table.cdf(x / scale)),
            Reference::Sample(reference) => Ok(two_sample_ks_sorted(&sorted(sample)?, reference)),
            Reference::PointMass(c) => {
                let v = sorted(sample)?;
                let n = v.len() as f64;
                let below = v.partition_point(|&x| x < c) as f64 / n;
                let at_or_below = v.partition_point(|&x| x <= c) as f64 / n;
                Ok(below.max(1.0 - at_or_below))
            }
        }
    }

    pub fn w1(&self, sample: &[f64]) -> Result<f64> {
        match *self {
            Reference::Table { table, scale } => wasserstein1(sample, |u| scale * table.quantile(u)),
            Reference::Sample(reference) => wasserstein1(sample, |u| empirical_quantile(reference, u)),
            Reference::PointMass(c) => {
                let v = sorted(sample)?;
                Ok(v.iter().map(|x| (x - c).abs()).sum::<f64>() / v.len() as f64)
            }
        }
    }
}

/// Mean, unbiased variance and the standard error of that variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub variance_se: f64,
    pub mean_se: f64,
}

pub fn moments(sample: &[f64]) -> Result<Moments> {
    if sample.len() < 2 {
        return Err(Error::domain("need at least two observations"));
    }
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    let (mut m2, mut m4) = (0.0, 0.0);
    for x in sample {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m4 += d2 * d2;
    }
    let variance = m2 / (n - 1.0);
    let central2 = m2 / n;
    let central4 = m4 / n;
    let variance_se = ((central4 - central2 * central2).max(0.0) / n).sqrt();
    Ok(Moments { mean, variance, variance_se, mean_se: (variance / n).sqrt() })
}
