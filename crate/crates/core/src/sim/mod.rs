//! Monte Carlo simulation of W_n = (1/M_n) Σ_{k≤n} B_k X_k.

pub mod bernoulli;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{classify_shuffle, classify_theorem2, LimitVerdict};
use crate::error::{Error, Result};
use crate::inversions::{scheme_to_limit_inputs, SubsetScheme};
use crate::numerics::{build_tables, DickmanParams, MixingLaw};
use crate::rng::RngStream;
use crate::sampler::sample_limit_scaled;
use crate::schedules::{eval_mu, CompensatedSum, MuSchedule, PSchedule};
use crate::stats::{moments, Reference};
use bernoulli::{ScheduleProb, SkipSampler, SuccessProbability};

pub use bernoulli::{next_success, K_STAR};

/// Size of the sampler batch used as reference for mixed Dickman limits.
pub const REFERENCE_DRAWS: usize = 1_000_000;
const REFERENCE_TOL: f64 = 1e-10;
const PATH_STREAM: u64 = 0;
const REFERENCE_STREAM: u64 = 1;

/// Model generating (B_k, X_k).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum SimModel {
    /// X_k = μ_k, B_k ~ Ber(p_k).
    DeterministicX { mu: MuSchedule<f64>, p: PSchedule<f64> },
    /// X_k uniform on E_k, p_k = |E_k|/k.
    SubsetUniform { scheme: SubsetScheme },
    /// B_k X_k = k·Y_k with Y_k ~ Poisson(θ₀/k).
    TruncatedPoisson { theta0: f64 },
}

/// The model's probabilities as a [`SuccessProbability`].
enum ModelProb<'a> {
    Schedule(ScheduleProb<'a, f64>),
    Scheme(&'a SubsetScheme),
    Poisson(f64),
}

impl SuccessProbability for ModelProb<'_> {
    fn prob(&self, k: u64) -> f64 {
        match self {
            ModelProb::Schedule(p) => p.prob(k),
            ModelProb::Scheme(s) => s.p(k),
            ModelProb::Poisson(t) => -(-t / k as f64).exp_m1(),
        }
    }
}

/// Draw from Poisson(λ) conditioned on being positive, by inversion.
pub fn zero_truncated_poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    let u: f64 = rng.random();
    let mut y = 1u64;
    let mut prob = lambda / lambda.exp_m1();
    let mut cum = prob;
    while u >= cum && prob > 0.0 {
        y += 1;
        prob *= lambda / y as f64;
        cum += prob;
    }
    y
}

impl SimModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            SimModel::DeterministicX { mu, p } => {
                mu.k0()?;
                p.k0()?;
                Ok(())
            }
            SimModel::SubsetUniform { scheme } => scheme.validate(1),
            SimModel::TruncatedPoisson { theta0 } if !(theta0.is_finite() && *theta0 > 0.0) => {
                Err(Error::domain(format!("theta0 must be positive, got {theta0}")))
            }
            SimModel::TruncatedPoisson { .. } => Ok(()),
        }
    }

    fn prob(&self) -> Result<ModelProb<'_>> {
        Ok(match self {
            SimModel::DeterministicX { p, .. } => ModelProb::Schedule(ScheduleProb::new(p)?),
            SimModel::SubsetUniform { scheme } => ModelProb::Scheme(scheme),
            SimModel::TruncatedPoisson { theta0 } => ModelProb::Poisson(*theta0),
        })
    }

    /// X_k given B_k = 1.
    fn draw_x<R: Rng + ?Sized>(&self, k: u64, rng: &mut R) -> f64 {
        match self {
            SimModel::DeterministicX { mu, .. } => eval_mu(mu, k).unwrap_or(0.0),
            SimModel::SubsetUniform { scheme } => scheme.sample_element(k, rng).unwrap_or(0) as f64,
            SimModel::TruncatedPoisson { theta0 } => (k * zero_truncated_poisson(theta0 / k as f64, rng)) as f64,
        }
    }

    /// (E B_kX_k, Var B_kX_k).
    fn term_moments(&self, k: u64) -> (f64, f64) {
        match self {
            SimModel::DeterministicX { mu, p } => {
                let p = p.value::<f64>(k).unwrap_or(0.0);
                let m = eval_mu(mu, k).unwrap_or(0.0);
                (p * m, p * (1.0 - p) * m * m)
            }
            SimModel::SubsetUniform { scheme } => {
                let kf = k as f64;
                let mean = scheme.sum(k) / kf;
                (mean, scheme.sum_sq(k) / kf - mean * mean)
            }
            SimModel::TruncatedPoisson { theta0 } => (*theta0, theta0 * k as f64),
        }
    }

    /// M_n and Σ Var(B_kX_k) at each grid point.
    pub fn mass_and_variance(&self, grid: &[u64]) -> Result<Vec<(f64, f64)>> {
        if grid.is_empty() || grid[0] == 0 || grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("n grid must be nonempty, positive and strictly increasing"));
        }
        let n_max = grid[grid.len() - 1];
        self.validate()?;
        let mut out = Vec::with_capacity(grid.len());
        let (mut mass, mut var) = (CompensatedSum::default(), CompensatedSum::default());
        for k in 1..=n_max {
            let (m, v) = self.term_moments(k);
            mass.add(m);
            var.add(v);
            if grid[out.len()] == k {
                let m_n = match self {
                    SimModel::TruncatedPoisson { theta0 } => k as f64 * theta0,
                    _ => mass.value(),
                };
                out.push((m_n, var.value()));
            }
        }
        Ok(out)
    }

    /// Predicted limit of W_n.
    pub fn verdict(&self) -> Result<LimitVerdict<f64>> {
        match self {
            SimModel::DeterministicX { mu, p } => Ok(classify_theorem2(mu, p)),
            SimModel::SubsetUniform { scheme } => {
                let (mu, size, mixing) = scheme_to_limit_inputs(scheme)?;
                Ok(classify_shuffle(&mu, size, &mixing))
            }
            SimModel::TruncatedPoisson { theta0 } => Ok(poisson_verdict(*theta0)),
        }
    }
}

/// Sum of n independent Pois(θ/k)·k divided by nθ converges to D_θ/θ.
pub fn poisson_verdict(theta0: f64) -> LimitVerdict<f64> {
    LimitVerdict::Dickman { theta: theta0, scale: 1.0 / theta0, mixing: MixingLaw::PointMassOne }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub model: SimModel,
    pub n_grid: Vec<u64>,
    pub replicates: usize,
    pub master_seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.n_grid[0] == 0 {
            return Err(Error::domain("n_grid must be nonempty with positive entries"));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("n_grid must be strictly increasing"));
        }
        if self.replicates < 100 {
            return Err(Error::domain(format!("replicates must be at least 100, got {}", self.replicates)));
        }
        self.model.validate()
    }
}

/// Results at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimPoint {
    pub n: u64,
    pub m_n: f64,
    pub samples: Vec<f64>,
    pub ks: f64,
    pub w1: f64,
    pub mean: f64,
    pub mean_se: f64,
    pub variance: f64,
    pub variance_se: f64,
    /// Σ Var(B_kX_k) / M_n².
    pub analytic_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub config: SimConfig,
    pub verdict: LimitVerdict<f64>,
    pub points: Vec<SimPoint>,
    pub version: String,
}

/// Partial sums Σ_{k≤n} B_kX_k at every grid n along one path.
fn path_sums<P: SuccessProbability + ?Sized, R: Rng + ?Sized>(
    model: &SimModel,
    sampler: &SkipSampler<'_, P>,
    grid: &[u64],
    rng: &mut R,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.len());
    let mut sum = 0.0;
    let mut k = 0;
    while let Some(j) = sampler.next(k, rng) {
        while out.len() < grid.len() && grid[out.len()] < j {
            out.push(sum);
        }
        sum += model.draw_x(j, rng);
        k = j;
    }
    out.resize(grid.len(), sum);
    out
}

pub fn simulate(config: &SimConfig, verdict: &LimitVerdict<f64>) -> Result<SimResult> {
    config.validate()?;
    let grid = &config.n_grid;
    let n_max = *grid.last().expect("validated");
    let mv = config.model.mass_and_variance(grid)?;

    let reference_table;
    let reference_sample;
    let reference = match verdict {
        LimitVerdict::Invalid { reason } => return Err(Error::domain(format!("cannot simulate toward an invalid verdict: {reason}"))),
        LimitVerdict::Degenerate { c } => Reference::PointMass(*c),
        LimitVerdict::Dickman { theta, scale, mixing } if mixing.is_point_mass_one() => {
            let x_max = (20.0 + 4.0 * theta).ceil();
            reference_table = build_tables(&DickmanParams::new(*theta)?, x_max, crate::numerics::default_tol())?;
            Reference::Table { table: &reference_table, scale: *scale }
        }
        LimitVerdict::Dickman { .. } => {
            let stream = RngStream::new(config.master_seed, REFERENCE_STREAM);
            let mut v = sample_limit_scaled(verdict, REFERENCE_TOL, stream, REFERENCE_DRAWS)?.values;
            v.sort_by(f64::total_cmp);
            reference_sample = v;
            Reference::Sample(&reference_sample)
        }
    };

    let prob = config.model.prob()?;
    let sampler = SkipSampler::new(&prob, n_max);
    let paths = RngStream::new(config.master_seed, PATH_STREAM);
    let sums: Vec<Vec<f64>> = (0..config.replicates)
        .into_par_iter()
        .map(|r| path_sums(&config.model, &sampler, grid, &mut paths.substream(r as u64).rng()))
        .collect();

    let mut points = Vec::with_capacity(grid.len());
    for (g, (&n, &(m_n, var_sum))) in grid.iter().zip(&mv).enumerate() {
        let samples: Vec<f64> = sums.iter().map(|s| s[g] / m_n).collect();
        let m = moments(&samples)?;
        points.push(SimPoint {
            n,
            m_n,
            ks: reference.ks(&samples)?,
            w1: reference.w1(&samples)?,
            mean: m.mean,
            mean_se: m.mean_se,
            variance: m.variance,
            variance_se: m.variance_se,
            analytic_variance: var_sum / (m_n * m_n),
            samples,
        });
    }
    Ok(SimResult {
        config: config.clone(),
        verdict: verdict.clone(),
        points,
        version: env!("CARGO_PKG_VERSION").to_string(),
    })
}
