//! Generalized Dickman distributions: numerics, exact-up-to-truncation
//! sampling, limit classification of normalized Bernoulli sums, Monte Carlo
//! verification, card-shuffle inversions and smooth-number checks.
//!
//! The numerical kernels are generic over [`Scalar`] (`f32`, `f64`) and the
//! schedule / classifier layer over [`Exponent`] (floats or exact
//! `Ratio<i64>`). Aliases for the common instantiations live at the root.

pub mod classifier;
pub mod error;
pub mod inversions;
pub mod numerics;
pub mod quadrature;
pub mod rng;
pub mod sampler;
pub mod scalar;
pub mod schedules;
pub mod sim;
pub mod smooth;
pub mod special;
pub mod stats;

pub use classifier::{classify_shuffle, classify_theorem2, KappaIndices, LimitVerdict, SetSize};
pub use error::{Error, Result};
pub use inversions::{
    scheme_to_limit_inputs, shuffle_oracle, simulate_inversions, InversionRun, ShuffleOutcome, SubsetScheme,
};
pub use numerics::{
    build_tables, cdf_via_recursion, cumulant, laplace, rho, DensityTable, DickmanParams, MixingLaw,
};
pub use rng::RngStream;
pub use sampler::{fixed_point_check, sample_gd, sample_limit_scaled, SampleBatch};
pub use scalar::{Exponent, Scalar};
pub use schedules::{
    eval_mu, eval_p, mu_increment, prefix_mass, series_diverges, validate_nontriv, MuSchedule, NontrivReport,
    PSchedule, PrefixMass,
};
pub use sim::{simulate, SimConfig, SimModel, SimPoint, SimResult};
pub use smooth::{dickman_check, largest_prime_factor_sieve, SmoothCount};
pub use stats::{ks_distance, two_sample_ks, wasserstein1};

/// Exact rational exponents.
pub type Rational = num_rational::Ratio<i64>;

pub type DickmanParams64 = DickmanParams<f64>;
pub type DickmanParams32 = DickmanParams<f32>;
pub type DensityTable64 = DensityTable<f64>;
pub type DensityTable32 = DensityTable<f32>;
pub type MixingLaw64 = MixingLaw<f64>;
pub type SampleBatch64 = SampleBatch<f64>;
pub type MuSchedule64 = MuSchedule<f64>;
pub type PSchedule64 = PSchedule<f64>;
pub type RationalMuSchedule = MuSchedule<Rational>;
pub type RationalPSchedule = PSchedule<Rational>;
pub type LimitVerdict64 = LimitVerdict<f64>;
pub type RationalLimitVerdict = LimitVerdict<Rational>;
