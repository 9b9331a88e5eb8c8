//! Iterated-logarithm schedules c·x^{e_0}·Π_j (log^{(j)} x)^{e_j} for the
//! mean sequence μ_k and the success probabilities p_k.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Exponent, Scalar};

/// Smallest k with log^{(j)} k ≥ 1, indexed by j. The next entry,
/// e^{e^{e^e}}, does not fit in any machine integer.
const K0_BY_DEPTH: [u64; 4] = [1, 3, 16, 3_814_280];

/// Deepest nesting level that can be evaluated.
pub const MAX_EVAL_DEPTH: usize = K0_BY_DEPTH.len() - 1;

/// Shared representation: coefficient and exponent vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IteratedLog<E> {
    pub c: E,
    pub exponents: Vec<E>,
}

impl<E: Exponent> IteratedLog<E> {
    fn new(c: E, exponents: Vec<E>, what: &str) -> Result<Self> {
        if c <= E::zero() {
            return Err(Error::domain(format!("{what}: coefficient must be positive, got {c}")));
        }
        if exponents.is_empty() {
            return Err(Error::domain(format!("{what}: exponent vector must be nonempty")));
        }
        if exponents.iter().chain([&c]).any(|e| !e.to_f64().is_some_and(f64::is_finite)) {
            return Err(Error::domain(format!("{what}: coefficients must be finite")));
        }
        Ok(Self { c, exponents })
    }

    /// Deepest index carrying a nonzero exponent (0 if none).
    pub fn depth(&self) -> usize {
        self.exponents.iter().rposition(|e| !e.is_zero()).unwrap_or(0)
    }

    /// Clamping threshold: values below it are evaluated at it.
    pub fn k0(&self) -> Result<u64> {
        let depth = self.depth();
        K0_BY_DEPTH.get(depth).copied().ok_or_else(|| {
            Error::capability(format!(
                "log^({depth}) factor needs k ≥ e↑↑{depth}, beyond the representable range"
            ))
        })
    }

    /// x^{e_0} Π (log^{(j)} x)^{e_j}.
    fn shape<T: Scalar>(&self, x: T) -> T {
        let mut acc = T::one();
        let mut level = x;
        for (j, e) in self.exponents.iter().enumerate() {
            if j > 0 {
                level = level.ln();
            }
            if !e.is_zero() {
                acc = acc * level.powf(e.approx::<T>());
            }
        }
        acc
    }

    /// d/dx of the log shape: Σ_j e_j / (x · L_1 ⋯ L_j).
    fn log_shape_derivative<T: Scalar>(&self, x: T) -> T {
        let mut acc = T::zero();
        let mut level = x;
        let mut chain = x;
        for (j, e) in self.exponents.iter().enumerate() {
            if j > 0 {
                level = level.ln();
                chain = chain * level;
            }
            if !e.is_zero() {
                acc = acc + e.approx::<T>() / chain;
            }
        }
        acc
    }

    fn clamped<T: Scalar>(&self, k: u64) -> Result<T> {
        Ok(T::from_u64_lossy(k.max(self.k0()?)))
    }
}

/// μ(x) = c_μ x^{a_0} Π (log^{(j)} x)^{a_j}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MuLiteral<E>", into = "MuLiteral<E>", bound = "E: Exponent + Serialize + for<'a> Deserialize<'a>")]
pub struct MuSchedule<E> {
    inner: IteratedLog<E>,
}

/// p(x) = c_p / (x^{b_0} Π (log^{(j)} x)^{b_j}), clamped to at most 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PLiteral<E>", into = "PLiteral<E>", bound = "E: Exponent + Serialize + for<'a> Deserialize<'a>")]
pub struct PSchedule<E> {
    inner: IteratedLog<E>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MuLiteral<E> {
    c: E,
    #[serde(alias = "exponents")]
    a: Vec<E>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PLiteral<E> {
    c: E,
    #[serde(alias = "exponents")]
    b: Vec<E>,
}

impl<E: Exponent> TryFrom<MuLiteral<E>> for MuSchedule<E> {
    type Error = Error;
    fn try_from(l: MuLiteral<E>) -> Result<Self> {
        MuSchedule::new(l.c, l.a)
    }
}

impl<E: Exponent> From<MuSchedule<E>> for MuLiteral<E> {
    fn from(s: MuSchedule<E>) -> Self {
        MuLiteral { c: s.inner.c, a: s.inner.exponents }
    }
}

impl<E: Exponent> TryFrom<PLiteral<E>> for PSchedule<E> {
    type Error = Error;
    fn try_from(l: PLiteral<E>) -> Result<Self> {
        PSchedule::new(l.c, l.b)
    }
}

impl<E: Exponent> From<PSchedule<E>> for PLiteral<E> {
    fn from(s: PSchedule<E>) -> Self {
        PLiteral { c: s.inner.c, b: s.inner.exponents }
    }
}

impl<E: Exponent> MuSchedule<E> {
    pub fn new(c: E, a: Vec<E>) -> Result<Self> {
        Ok(Self { inner: IteratedLog::new(c, a, "mu schedule")? })
    }

    pub fn c(&self) -> &E {
        &self.inner.c
    }

    /// Exponents a_0, …, a_{J_μ}.
    pub fn a(&self) -> &[E] {
        &self.inner.exponents
    }

    /// a_j, zero beyond J_μ.
    pub fn a_at(&self, j: usize) -> E {
        self.a().get(j).cloned().unwrap_or_else(E::zero)
    }

    pub fn j(&self) -> usize {
        self.a().len() - 1
    }

    pub fn k0(&self) -> Result<u64> {
        self.inner.k0()
    }

    /// μ(max(k, k0)).
    pub fn value<T: Scalar>(&self, k: u64) -> Result<T> {
        let x = self.inner.clamped::<T>(k)?;
        Ok(self.inner.c.approx::<T>() * self.inner.shape(x))
    }

    /// μ′(k) by the product rule.
    pub fn derivative<T: Scalar>(&self, k: u64) -> Result<T> {
        let k0 = self.k0()?;
        if k < k0 {
            return Err(Error::domain(format!("derivative requested at k={k} below the clamp k0={k0}")));
        }
        let x = T::from_u64_lossy(k);
        Ok(self.value::<T>(k)? * self.inner.log_shape_derivative(x))
    }
}

impl<E: Exponent> PSchedule<E> {
    pub fn new(c: E, b: Vec<E>) -> Result<Self> {
        Ok(Self { inner: IteratedLog::new(c, b, "p schedule")? })
    }

    pub fn c(&self) -> &E {
        &self.inner.c
    }

    /// Exponents b_0, …, b_{J_p}.
    pub fn b(&self) -> &[E] {
        &self.inner.exponents
    }

    pub fn j(&self) -> usize {
        self.b().len() - 1
    }

    pub fn k0(&self) -> Result<u64> {
        self.inner.k0()
    }

    /// min(1, p(max(k, k0))).
    pub fn value<T: Scalar>(&self, k: u64) -> Result<T> {
        let x = self.inner.clamped::<T>(k)?;
        let v = self.inner.c.approx::<T>() / self.inner.shape(x);
        Ok(v.min(T::one()))
    }

    /// Whether p(x) eventually stays below 1, so that the Bernoulli
    /// probabilities are admissible for all large k.
    pub fn tends_below_one(&self) -> bool {
        match self.b().iter().find(|e| !e.is_zero()) {
            Some(first) => *first > E::zero(),
            None => self.inner.c < E::one(),
        }
    }
}

pub fn eval_mu<E: Exponent>(s: &MuSchedule<E>, k: u64) -> Result<f64> {
    s.value(k)
}

pub fn eval_p<E: Exponent>(s: &PSchedule<E>, k: u64) -> Result<f64> {
    s.value(k)
}

pub fn mu_increment<E: Exponent>(s: &MuSchedule<E>, k: u64) -> Result<f64> {
    s.derivative(k)
}

/// Running sums M_n = Σ_{k≤n} p_k μ_k.
#[derive(Debug, Clone, PartialEq)]
pub struct PrefixMass {
    values: Vec<f64>,
    k0: u64,
}

impl PrefixMass {
    /// M_n for 1 ≤ n ≤ n_max.
    pub fn at(&self, n: u64) -> Result<f64> {
        if n == 0 || n as usize > self.values.len() {
            return Err(Error::domain(format!("n={n} outside 1..={}", self.values.len())));
        }
        Ok(self.values[n as usize - 1])
    }

    pub fn n_max(&self) -> u64 {
        self.values.len() as u64
    }

    pub fn k0(&self) -> u64 {
        self.k0
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, t: f64) {
        let s = self.sum + t;
        if self.sum.abs() >= t.abs() {
            self.comp += (self.sum - s) + t;
        } else {
            self.comp += (t - s) + self.sum;
        }
        self.sum = s;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated prefix sums of a term sequence, k = 1..=n_max.
pub(crate) fn compensated_prefix(n_max: u64, mut term: impl FnMut(u64) -> f64) -> Vec<f64> {
    let mut acc = CompensatedSum::default();
    (1..=n_max)
        .map(|k| {
            acc.add(term(k));
            acc.value()
        })
        .collect()
}

pub fn prefix_mass<E: Exponent>(mu: &MuSchedule<E>, p: &PSchedule<E>, n_max: u64) -> Result<PrefixMass> {
    if n_max == 0 {
        return Err(Error::domain("n_max must be at least 1"));
    }
    let k0 = mu.k0()?.max(p.k0()?);
    let values = compensated_prefix(n_max, |k| {
        // k0 is known to be finite for both, so evaluation cannot fail
        eval_p(p, k).unwrap_or(0.0) * eval_mu(mu, k).unwrap_or(0.0)
    });
    Ok(PrefixMass { values, k0 })
}

/// Bertrand-scale test for Σ_k k^{d_0} Π (log^{(j)} k)^{d_j}: diverges iff
/// the first entry different from −1 exceeds −1, or every entry is −1.
pub fn series_diverges<E: Exponent>(d: &[E]) -> bool {
    let minus_one = -E::one();
    match d.iter().find(|e| **e != minus_one) {
        Some(first) => *first > minus_one,
        None => true,
    }
}

/// Outcome of the nontriviality check: Σ p_k = ∞ and M_n → ∞.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NontrivReport {
    pub sum_p_diverges: bool,
    pub mass_diverges: bool,
}

impl NontrivReport {
    pub fn is_ok(&self) -> bool {
        self.sum_p_diverges && self.mass_diverges
    }

    /// Human-readable list of the failing conditions.
    pub fn violations(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if !self.sum_p_diverges {
            v.push("sum of p_k converges");
        }
        if !self.mass_diverges {
            v.push("M_n stays bounded");
        }
        v
    }
}

pub fn validate_nontriv<E: Exponent>(mu: &MuSchedule<E>, p: &PSchedule<E>) -> NontrivReport {
    let neg_b: Vec<E> = p.b().iter().map(|b| -b.clone()).collect();
    let len = mu.a().len().max(p.b().len());
    let diff: Vec<E> = (0..len)
        .map(|j| mu.a_at(j) - p.b().get(j).cloned().unwrap_or_else(E::zero))
        .collect();
    NontrivReport { sum_p_diverges: series_diverges(&neg_b), mass_diverges: series_diverges(&diff) }
}
