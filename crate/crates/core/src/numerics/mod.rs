//! Generalized Dickman law GD(θ) and its mixed variant GD^(X)(θ):
//! ρ_θ, density, CDF, Laplace transform and cumulants.

mod mixing;
mod table;

pub use mixing::{MixingLaw, ResolvedMixing, SchemeLimitLaw};
pub use table::{build_tables, cdf_via_recursion, default_tol, Construction, DensityTable};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::integrate_adaptive;
use crate::scalar::Scalar;

pub const DEFAULT_X_MAX: f64 = 20.0;

/// Shape parameter θ > 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DickmanParams<T> {
    theta: T,
}

impl<T: Scalar> DickmanParams<T> {
    pub fn new(theta: T) -> Result<Self> {
        if !(theta.is_finite() && theta > T::zero()) {
            return Err(Error::domain(format!("theta must be finite and positive, got {theta}")));
        }
        Ok(Self { theta })
    }

    pub fn theta(&self) -> T {
        self.theta
    }
}

/// ρ_θ(x): closed form on (0, 1], tabulated continuation beyond.
pub fn rho<T: Scalar>(params: &DickmanParams<T>, x: T) -> Result<T> {
    if !x.is_finite() {
        return Err(Error::domain(format!("x must be finite, got {x}")));
    }
    if x <= T::zero() {
        return Ok(T::zero());
    }
    if x <= T::one() {
        return Ok(x.powf(params.theta() - T::one()));
    }
    let x_max = x.ceil().max(T::lit(2.0));
    Ok(build_tables(params, x_max, default_tol())?.rho(x))
}

/// Laplace transform E e^{−λD} of GD^(X)(θ):
/// exp(θ ∫_0^1 (E e^{−λxX} − 1)/x dx).
pub fn laplace<T: Scalar>(params: &DickmanParams<T>, mixing: &MixingLaw<T>, lambda: T) -> Result<T> {
    if !(lambda.is_finite() && lambda >= T::zero()) {
        return Err(Error::domain(format!("lambda must be finite and nonnegative, got {lambda}")));
    }
    if lambda == T::zero() {
        return Ok(T::one());
    }
    let law = mixing.resolve()?;
    let integrand = |x: T| {
        if x == T::zero() {
            // removable singularity: limit is −λ E X
            -lambda * law.moment(1)
        } else {
            law.laplace_minus_one(lambda * x) / x
        }
    };
    let tol = T::epsilon() * T::lit(64.0);
    let (integral, _) = integrate_adaptive(integrand, T::zero(), T::one(), tol);
    Ok((params.theta() * integral).exp())
}

/// m-th cumulant θ E[X^m] / m.
pub fn cumulant<T: Scalar>(params: &DickmanParams<T>, mixing: &MixingLaw<T>, m: u32) -> Result<T> {
    if m == 0 {
        return Err(Error::domain("cumulant order must be at least 1"));
    }
    let moment = mixing.moment(m)?;
    Ok(params.theta() * moment / T::from_u64_lossy(u64::from(m)))
}
