use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inversions::SubsetScheme;
use crate::scalar::Scalar;
use crate::special::uniform_mgf_minus_one;

const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Law of the mixing variable X in GD^(X)(θ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "kind",
    rename_all = "snake_case",
    try_from = "MixingLiteral<T>",
    bound(deserialize = "T: Scalar + Deserialize<'de>")
)]
pub enum MixingLaw<T> {
    /// X ≡ 1, the plain generalized Dickman law.
    PointMassOne,
    /// Finitely many atoms. Build with [`MixingLaw::finite`].
    FiniteDiscrete { atoms: Vec<T>, weights: Vec<T>, mean: T },
    /// The limit law of X_k/μ_k for a card-insertion subset scheme.
    SchemeDerived { scheme: SubsetScheme },
}

/// Serialized form; the mean of a finite law is recomputed on input.
#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum MixingLiteral<T> {
    PointMassOne,
    FiniteDiscrete {
        atoms: Vec<T>,
        weights: Vec<T>,
        #[serde(default)]
        #[allow(dead_code)]
        mean: Option<T>,
    },
    SchemeDerived { scheme: SubsetScheme },
}

impl<T: Scalar> TryFrom<MixingLiteral<T>> for MixingLaw<T> {
    type Error = Error;

    fn try_from(lit: MixingLiteral<T>) -> Result<Self> {
        match lit {
            MixingLiteral::PointMassOne => Ok(MixingLaw::PointMassOne),
            MixingLiteral::FiniteDiscrete { atoms, weights, .. } => MixingLaw::finite(atoms, weights),
            MixingLiteral::SchemeDerived { scheme } => Ok(MixingLaw::SchemeDerived { scheme }),
        }
    }
}

impl<T: Scalar> MixingLaw<T> {
    /// Validated finite discrete law: atoms ≥ 0, weights a probability
    /// vector, and EX ≤ 1.
    pub fn finite(atoms: Vec<T>, weights: Vec<T>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != weights.len() {
            return Err(Error::domain("atoms and weights must be nonempty and of equal length"));
        }
        if atoms.iter().any(|a| !a.is_finite() || *a < T::zero()) {
            return Err(Error::domain("mixing atoms must be finite and nonnegative"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < T::zero()) {
            return Err(Error::domain("mixing weights must be nonnegative"));
        }
        let total = weights.iter().fold(T::zero(), |a, &w| a + w);
        let slack = T::lit(WEIGHT_SUM_TOL).max(T::epsilon() * T::lit(8.0));
        if (total - T::one()).abs() > slack {
            return Err(Error::domain(format!("mixing weights sum to {total}, not 1")));
        }
        let mean = atoms.iter().zip(&weights).fold(T::zero(), |acc, (&a, &w)| acc + a * w);
        if mean > T::one() + slack {
            return Err(Error::domain(format!("mixing mean {mean} exceeds 1")));
        }
        Ok(MixingLaw::FiniteDiscrete { atoms, weights, mean })
    }

    /// Equal weights on the given atoms.
    pub fn uniform_atoms(atoms: Vec<T>) -> Result<Self> {
        let w = T::one() / T::from_u64_lossy(atoms.len().max(1) as u64);
        let weights = vec![w; atoms.len()];
        Self::finite(atoms, weights)
    }

    pub fn point_mass_at_zero() -> Self {
        MixingLaw::FiniteDiscrete { atoms: vec![T::zero()], weights: vec![T::one()], mean: T::zero() }
    }

    pub fn scheme(scheme: SubsetScheme) -> Self {
        MixingLaw::SchemeDerived { scheme }
    }

    pub fn is_point_mass_one(&self) -> bool {
        match self {
            MixingLaw::PointMassOne => true,
            MixingLaw::FiniteDiscrete { atoms, weights, .. } => {
                atoms.iter().zip(weights).all(|(a, w)| *w == T::zero() || *a == T::one())
            }
            MixingLaw::SchemeDerived { .. } => {
                matches!(self.resolve(), Ok(ResolvedMixing::One))
            }
        }
    }

    /// Resolves scheme-derived laws into a concrete distribution.
    pub fn resolve(&self) -> Result<ResolvedMixing<T>> {
        match self {
            MixingLaw::PointMassOne => Ok(ResolvedMixing::One),
            MixingLaw::FiniteDiscrete { atoms, weights, .. } => {
                let mut cumulative = Vec::with_capacity(weights.len());
                let mut acc = T::zero();
                for &w in weights {
                    acc = acc + w;
                    cumulative.push(acc);
                }
                Ok(ResolvedMixing::Discrete { atoms: atoms.clone(), weights: weights.clone(), cumulative })
            }
            MixingLaw::SchemeDerived { scheme } => match scheme.limit_mixing()? {
                SchemeLimitLaw::One => Ok(ResolvedMixing::One),
                SchemeLimitLaw::UniformZeroTwo => Ok(ResolvedMixing::UniformZeroTwo),
                SchemeLimitLaw::Atoms(atoms) => {
                    let atoms: Vec<T> = atoms.into_iter().map(T::lit).collect();
                    MixingLaw::uniform_atoms(atoms)?.resolve()
                }
            },
        }
    }

    pub fn mean(&self) -> Result<T> {
        match self {
            MixingLaw::FiniteDiscrete { mean, .. } => Ok(*mean),
            _ => self.moment(1),
        }
    }

    /// E[X^m].
    pub fn moment(&self, m: u32) -> Result<T> {
        Ok(self.resolve()?.moment(m))
    }
}

/// Limit law of X_k/μ_k reported by a subset scheme.
#[derive(Debug, Clone, PartialEq)]
pub enum SchemeLimitLaw {
    One,
    UniformZeroTwo,
    Atoms(Vec<f64>),
}

/// A mixing law with every variant reduced to something directly
/// computable.
#[derive(Debug, Clone, PartialEq)]
pub enum ResolvedMixing<T> {
    One,
    Discrete { atoms: Vec<T>, weights: Vec<T>, cumulative: Vec<T> },
    /// Uniform on [0, 2]; the limit of X_k/μ_k for the full scheme.
    UniformZeroTwo,
}

impl<T: Scalar> ResolvedMixing<T> {
    pub fn moment(&self, m: u32) -> T {
        match self {
            ResolvedMixing::One => T::one(),
            ResolvedMixing::Discrete { atoms, weights, .. } => atoms
                .iter()
                .zip(weights)
                .fold(T::zero(), |acc, (&a, &w)| acc + w * a.powi(m as i32)),
            ResolvedMixing::UniformZeroTwo => {
                T::lit(2.0).powi(m as i32) / T::from_u64_lossy(u64::from(m) + 1)
            }
        }
    }

    /// E[e^{-sX}] − 1 without cancellation for small s.
    pub fn laplace_minus_one(&self, s: T) -> T {
        match self {
            ResolvedMixing::One => (-s).exp_m1(),
            ResolvedMixing::Discrete { atoms, weights, .. } => atoms
                .iter()
                .zip(weights)
                .fold(T::zero(), |acc, (&a, &w)| acc + w * (-s * a).exp_m1()),
            ResolvedMixing::UniformZeroTwo => uniform_mgf_minus_one(T::lit(2.0) * s),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        match self {
            ResolvedMixing::One => T::one(),
            ResolvedMixing::Discrete { atoms, cumulative, .. } => {
                let u = T::lit(rng.random::<f64>()) * cumulative[cumulative.len() - 1];
                // atom counts are tiny; linear cumulative search
                let idx = cumulative.iter().position(|&c| u < c).unwrap_or(atoms.len() - 1);
                atoms[idx]
            }
            ResolvedMixing::UniformZeroTwo => T::lit(2.0 * rng.random::<f64>()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn finite_validation() {
        assert!(MixingLaw::finite(vec![1.0_f64], vec![0.5]).is_err());
        assert!(MixingLaw::finite(vec![-1.0_f64], vec![1.0]).is_err());
        assert!(MixingLaw::finite(vec![2.0_f64], vec![1.0]).is_err(), "mean above 1");
        assert!(MixingLaw::finite(vec![1.0_f64, 2.0], vec![1.0]).is_err());
        let m = MixingLaw::finite(vec![2.0 / 3.0, 4.0 / 3.0], vec![0.5, 0.5]).unwrap();
        assert_relative_eq!(m.mean().unwrap(), 1.0, max_relative = 1e-15);
        assert!(!m.is_point_mass_one());
    }

    #[test]
    fn scheme_derived_moments() {
        let full: MixingLaw<f64> = MixingLaw::scheme(SubsetScheme::Full);
        assert_relative_eq!(full.mean().unwrap(), 1.0);
        assert_relative_eq!(full.moment(2).unwrap(), 4.0 / 3.0);
        let top: MixingLaw<f64> = MixingLaw::scheme(SubsetScheme::Top);
        assert!(top.is_point_mass_one());
        let custom: MixingLaw<f64> = MixingLaw::scheme(SubsetScheme::Custom { sets: vec![vec![]] });
        assert!(matches!(custom.moment(1), Err(Error::Capability(_))));
    }

    #[test]
    fn deserialization_validates() {
        let ok: MixingLaw<f64> =
            serde_json::from_str(r#"{"kind":"finite_discrete","atoms":[0.5,1.5],"weights":[0.5,0.5]}"#).unwrap();
        assert_relative_eq!(ok.mean().unwrap(), 1.0);
        let back: MixingLaw<f64> = serde_json::from_value(serde_json::to_value(&ok).unwrap()).unwrap();
        assert_eq!(back, ok);
        assert!(serde_json::from_str::<MixingLaw<f64>>(r#"{"kind":"finite_discrete","atoms":[3.0],"weights":[1.0]}"#).is_err());
    }

    #[test]
    fn discrete_sampling_hits_only_atoms() {
        use rand::SeedableRng;
        let m = MixingLaw::finite(vec![0.25_f64, 1.0], vec![0.75, 0.25]).unwrap().resolve().unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let draws: Vec<f64> = (0..20_000).map(|_| m.sample(&mut rng)).collect();
        assert!(draws.iter().all(|&x| x == 0.25 || x == 1.0));
        let frac = draws.iter().filter(|&&x| x == 0.25).count() as f64 / draws.len() as f64;
        assert!((frac - 0.75).abs() < 0.02);
    }
}
