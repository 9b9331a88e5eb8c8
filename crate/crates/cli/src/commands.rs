//! Subcommand implementations. Each computes its artifacts in memory, then
//! the run directory is created and written in one go.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use dickman::classifier::{classify_shuffle, classify_theorem2, LimitVerdict};
use dickman::numerics::default_tol;
use dickman::sampler::DEFAULT_TRUNCATION_TOL;
use dickman::stats::moments;
use dickman::{
    build_tables, cumulant, largest_prime_factor_sieve, sample_gd, scheme_to_limit_inputs, simulate,
    simulate_inversions, DickmanParams, MixingLaw, MuSchedule, PSchedule, Rational, RngStream, SimConfig, SimModel,
    SubsetScheme,
};

use crate::config::{self, Shape};
use crate::error::{CliError, CliResult};
use crate::output::{fmt_f64, now, RunDir, RunManifest};

/// Subcommands that read a config and write a run directory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Density,
    Sample,
    Classify,
    Simulate,
    Inversions,
    Smooth,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Density => "density",
            Kind::Sample => "sample",
            Kind::Classify => "classify",
            Kind::Simulate => "simulate",
            Kind::Inversions => "inversions",
            Kind::Smooth => "smooth",
        }
    }

    fn shape(self) -> &'static Shape {
        match self {
            Kind::Density => &config::DENSITY,
            Kind::Sample => &config::SAMPLE,
            Kind::Classify => &config::CLASSIFY,
            Kind::Simulate => &config::SIMULATE,
            Kind::Inversions => &config::INVERSIONS,
            Kind::Smooth => &config::SMOOTH,
        }
    }
}

pub enum Artifact {
    Csv { name: &'static str, header: &'static [&'static str], rows: Vec<Vec<String>> },
    Json { name: &'static str, value: Value },
}

/// What a subcommand produced: the normalized config echo, the files, and
/// a short text for stdout.
pub struct Output {
    pub echo: Value,
    pub artifacts: Vec<Artifact>,
    pub summary: String,
}

#[derive(Debug)]
pub struct RunReport {
    pub dir: PathBuf,
    pub summary: String,
}

/// Loads `config_path`, runs `kind` and writes `<out>/<kind>-<seed>/`.
pub fn execute(kind: Kind, config_path: &Path, out: &Path, seed: Option<u64>) -> CliResult<RunReport> {
    let loaded = config::load(config_path, kind.name(), kind.shape(), seed)?;
    let dir = RunDir::reserve(out, kind.name(), loaded.seed)?;
    let started_at = now();
    let output = match kind {
        Kind::Density => density(&loaded.config)?,
        Kind::Sample => sample(&loaded.config, loaded.seed)?,
        Kind::Classify => classify(&loaded.config)?,
        Kind::Simulate => run_simulate(&loaded.config, loaded.seed)?,
        Kind::Inversions => inversions(&loaded.config, loaded.seed)?,
        Kind::Smooth => smooth(&loaded.config)?,
    };
    dir.create()?;
    for artifact in output.artifacts {
        match artifact {
            Artifact::Csv { name, header, rows } => dir.write_csv(name, header, rows)?,
            Artifact::Json { name, value } => dir.write_json(name, &value)?,
        }
    }
    let manifest = RunManifest {
        subcommand: kind.name(),
        config: &output.echo,
        master_seed: loaded.seed,
        version: env!("CARGO_PKG_VERSION"),
        started_at,
        finished_at: now(),
    };
    dir.write_json("manifest.json", &manifest)?;
    Ok(RunReport { dir: dir.path().to_path_buf(), summary: output.summary })
}

fn echo<T: Serialize>(cfg: &T) -> CliResult<Value> {
    Ok(serde_json::to_value(cfg)?)
}

fn f(x: f64) -> String {
    fmt_f64(x)
}

fn default_points_per_unit() -> u32 {
    100
}

#[derive(Debug, Serialize, Deserialize)]
struct DensityConfig {
    theta: f64,
    x_max: f64,
    #[serde(default = "default_points_per_unit")]
    points_per_unit: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
}

const MAX_ROWS: f64 = 1e7;

fn density(raw: &Value) -> CliResult<Output> {
    let cfg: DensityConfig = config::parse(raw)?;
    if cfg.points_per_unit == 0 {
        return Err(CliError::Validation("points_per_unit must be positive".into()));
    }
    let per_unit = f64::from(cfg.points_per_unit);
    let count = (cfg.x_max * per_unit + 1e-9).floor();
    if !(count >= 1.0 && count <= MAX_ROWS) {
        return Err(CliError::Validation(format!("x_max · points_per_unit must be in [1, 1e7], got {count}")));
    }
    let table = build_tables(&DickmanParams::new(cfg.theta)?, cfg.x_max, cfg.tol.unwrap_or_else(default_tol))?;
    let rows = (1..=count as u64)
        .map(|i| {
            let x = i as f64 / per_unit;
            vec![f(x), f(table.rho(x)), f(table.density(x)), f(table.cdf(x))]
        })
        .collect();
    Ok(Output {
        echo: echo(&cfg)?,
        artifacts: vec![Artifact::Csv { name: "density.csv", header: &["x", "rho", "density", "cdf"], rows }],
        summary: format!("{count} rows, achieved error {:e}", table.achieved_error()),
    })
}

fn default_mixing() -> MixingLaw<f64> {
    MixingLaw::PointMassOne
}

#[derive(Debug, Serialize, Deserialize)]
struct SampleConfig {
    theta: f64,
    #[serde(default = "default_mixing")]
    mixing: MixingLaw<f64>,
    count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
}

const MAX_SAMPLE: usize = 100_000_000;

fn sample(raw: &Value, seed: u64) -> CliResult<Output> {
    let cfg: SampleConfig = config::parse(raw)?;
    if cfg.count < 2 || cfg.count > MAX_SAMPLE {
        return Err(CliError::Validation(format!("count must be in [2, 1e8], got {}", cfg.count)));
    }
    let tol = cfg.tol.unwrap_or(DEFAULT_TRUNCATION_TOL);
    let batch = sample_gd(cfg.theta, &cfg.mixing, tol, RngStream::new(seed, 0), cfg.count)?;
    let m = moments(&batch.values)?;
    let params = DickmanParams::new(cfg.theta)?;
    let k1 = cumulant(&params, &cfg.mixing, 1)?;
    let k2 = cumulant(&params, &cfg.mixing, 2)?;
    let rows = batch.values.iter().enumerate().map(|(i, v)| vec![i.to_string(), f(*v)]).collect();
    let summary_row = vec![
        cfg.count.to_string(),
        f(m.mean),
        f(m.mean_se),
        f(m.variance),
        f(m.variance_se),
        f(k1),
        f(k2),
        f(batch.bias_bound),
    ];
    Ok(Output {
        echo: echo(&cfg)?,
        artifacts: vec![
            Artifact::Csv { name: "samples.csv", header: &["index", "value"], rows },
            Artifact::Csv {
                name: "summary.csv",
                header: &["count", "mean", "mean_se", "variance", "variance_se", "kappa_1", "kappa_2", "bias_bound"],
                rows: vec![summary_row],
            },
        ],
        summary: format!("mean {} (κ1 {}), variance {} (κ2 {})", m.mean, k1, m.variance, k2),
    })
}

/// A number kept exactly: integer, decimal, or a "p/q" string.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Exact {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Exact {
    pub fn to_rational(&self) -> CliResult<Rational> {
        match self {
            Exact::Int(i) => Ok(Rational::from_integer(*i)),
            Exact::Float(x) => {
                Rational::approximate_float(*x).ok_or_else(|| CliError::Validation(format!("{x} has no rational form")))
            }
            Exact::Text(s) => s
                .trim()
                .parse::<Rational>()
                .map_err(|_| CliError::Validation(format!("`{s}` is not an integer or p/q fraction"))),
        }
    }
}

fn rationals(v: &[Exact]) -> CliResult<Vec<Rational>> {
    v.iter().map(Exact::to_rational).collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct ExactMu {
    c: Exact,
    #[serde(alias = "exponents")]
    a: Vec<Exact>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ExactP {
    c: Exact,
    #[serde(alias = "exponents")]
    b: Vec<Exact>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ClassifyConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mu: Option<ExactMu>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<ExactP>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scheme: Option<SubsetScheme>,
}

/// Verdict record: floating point fields plus exact fractions as text.
pub fn verdict_record(v: &LimitVerdict<Rational>) -> CliResult<Value> {
    let mut record = serde_json::to_value(v.to_f64())?;
    let exact = match v {
        LimitVerdict::Dickman { theta, scale, .. } => json!({"theta": theta.to_string(), "L": scale.to_string()}),
        LimitVerdict::Degenerate { c } => json!({"c": c.to_string()}),
        LimitVerdict::Invalid { .. } => Value::Null,
    };
    if !exact.is_null() {
        record["exact"] = exact;
    }
    Ok(record)
}

fn classify(raw: &Value) -> CliResult<Output> {
    let cfg: ClassifyConfig = config::parse(raw)?;
    let verdict = match (&cfg.mu, &cfg.p, &cfg.scheme) {
        (Some(mu), Some(p), None) => {
            let mu = MuSchedule::new(mu.c.to_rational()?, rationals(&mu.a)?)?;
            let p = PSchedule::new(p.c.to_rational()?, rationals(&p.b)?)?;
            classify_theorem2(&mu, &p)
        }
        (None, None, Some(scheme)) => {
            let (mu, size, mixing) = scheme_to_limit_inputs(scheme)?;
            let exact = |x: f64| Exact::Float(x).to_rational();
            let mu = MuSchedule::new(exact(*mu.c())?, mu.a().iter().map(|&a| exact(a)).collect::<CliResult<_>>()?)?;
            classify_shuffle(&mu, size, &mixing)
        }
        _ => return Err(CliError::Validation("classify needs either both `mu` and `p`, or `scheme` alone".into())),
    };
    let record = verdict_record(&verdict)?;
    Ok(Output {
        echo: echo(&cfg)?,
        summary: serde_json::to_string(&record)?,
        artifacts: vec![Artifact::Json { name: "verdict.json", value: record }],
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct SimulateConfig {
    model: SimModel,
    n_grid: Vec<u64>,
    replicates: usize,
}

pub const SIM_SAMPLES_HEADER: &[&str] = &["n", "replicate", "w"];
pub const SIM_DISTANCES_HEADER: &[&str] =
    &["n", "m_n", "ks", "w1", "mean", "mean_se", "variance", "variance_se", "analytic_variance"];

fn run_simulate(raw: &Value, seed: u64) -> CliResult<Output> {
    let cfg: SimulateConfig = config::parse(raw)?;
    let verdict = cfg.model.verdict()?;
    let sim = SimConfig { model: cfg.model.clone(), n_grid: cfg.n_grid.clone(), replicates: cfg.replicates, master_seed: seed };
    let result = simulate(&sim, &verdict)?;
    let mut samples = Vec::with_capacity(result.points.len() * cfg.replicates);
    let mut distances = Vec::with_capacity(result.points.len());
    for p in &result.points {
        for (r, w) in p.samples.iter().enumerate() {
            samples.push(vec![p.n.to_string(), r.to_string(), f(*w)]);
        }
        distances.push(vec![
            p.n.to_string(),
            f(p.m_n),
            f(p.ks),
            f(p.w1),
            f(p.mean),
            f(p.mean_se),
            f(p.variance),
            f(p.variance_se),
            f(p.analytic_variance),
        ]);
    }
    let summary = result
        .points
        .iter()
        .map(|p| format!("n={} ks={:.4} mean={:.4}", p.n, p.ks, p.mean))
        .collect::<Vec<_>>()
        .join("; ");
    Ok(Output {
        echo: echo(&cfg)?,
        artifacts: vec![
            Artifact::Csv { name: "samples.csv", header: SIM_SAMPLES_HEADER, rows: samples },
            Artifact::Csv { name: "distances.csv", header: SIM_DISTANCES_HEADER, rows: distances },
            Artifact::Json { name: "verdict.json", value: serde_json::to_value(&verdict)? },
        ],
        summary,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct InversionsConfig {
    scheme: SubsetScheme,
    n: u64,
    replicates: usize,
}

fn inversions(raw: &Value, seed: u64) -> CliResult<Output> {
    let cfg: InversionsConfig = config::parse(raw)?;
    let run = simulate_inversions(&cfg.scheme, cfg.n, cfg.replicates, RngStream::new(seed, 0))?;
    let rows = run
        .samples
        .iter()
        .enumerate()
        .map(|(r, &i)| vec![r.to_string(), i.to_string(), f(i as f64 / run.mean_model)])
        .collect();
    let values: Vec<f64> = run.samples.iter().map(|&i| i as f64).collect();
    let m = moments(&values)?;
    let max = cfg.n * (cfg.n - 1) / 2;
    Ok(Output {
        echo: echo(&cfg)?,
        artifacts: vec![
            Artifact::Csv { name: "inversions.csv", header: &["replicate", "inversions", "normalized"], rows },
            Artifact::Csv {
                name: "summary.csv",
                header: &["n", "m_n", "mean", "mean_se", "variance", "max_inversions"],
                rows: vec![vec![
                    cfg.n.to_string(),
                    f(run.mean_model),
                    f(m.mean),
                    f(m.mean_se),
                    f(m.variance),
                    max.to_string(),
                ]],
            },
        ],
        summary: format!("mean I_n {} vs M_n {}", m.mean, run.mean_model),
    })
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

#[derive(Debug, Serialize, Deserialize)]
struct SmoothConfig {
    #[serde(rename = "N")]
    n: u64,
    s: OneOrMany,
}

fn smooth(raw: &Value) -> CliResult<Output> {
    let cfg: SmoothConfig = config::parse(raw)?;
    let s_values = match &cfg.s {
        OneOrMany::One(s) => vec![*s],
        OneOrMany::Many(v) if !v.is_empty() => v.clone(),
        OneOrMany::Many(_) => return Err(CliError::Validation("s must not be empty".into())),
    };
    let lpf = largest_prime_factor_sieve(cfg.n)?;
    let counts = s_values
        .iter()
        .map(|&s| dickman::smooth::dickman_check_with(&lpf, s))
        .collect::<dickman::Result<Vec<_>>>()?;
    let rows = counts
        .iter()
        .map(|c| {
            vec![c.n.to_string(), c.y.to_string(), f(c.s), c.psi.to_string(), f(c.ratio), f(c.rho_s), f(c.abs_error)]
        })
        .collect();
    let summary = counts.iter().map(|c| format!("s={} ratio={:.6} rho={:.6}", c.s, c.ratio, c.rho_s)).collect::<Vec<_>>();
    Ok(Output {
        echo: echo(&cfg)?,
        artifacts: vec![
            Artifact::Csv { name: "smooth.csv", header: &["N", "y", "s", "psi", "ratio", "rho_s", "abs_error"], rows },
            Artifact::Json { name: "smooth.json", value: serde_json::to_value(&counts)? },
        ],
        summary: summary.join("; "),
    })
}
