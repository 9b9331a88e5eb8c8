//! Special functions and constants used by the density code.

use crate::scalar::Scalar;

/// Euler's constant γ.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_402_43;

pub fn euler_gamma<T: Scalar>() -> T {
    T::lit(EULER_GAMMA)
}

/// Natural log of |Γ(x)|.
pub fn ln_gamma<T: Scalar>(x: T) -> T {
    T::lit(libm::lgamma(x.as_f64()))
}

/// Γ(x).
pub fn gamma<T: Scalar>(x: T) -> T {
    T::lit(libm::tgamma(x.as_f64()))
}

/// Normalizing constant e^{-θγ}/Γ(θ) turning ρ_θ into a probability density.
pub fn dickman_normalizer<T: Scalar>(theta: T) -> T {
    (-theta * euler_gamma::<T>() - ln_gamma(theta)).exp()
}

/// (1 - e^{-t}) / t - 1, accurate for small t.
pub(crate) fn uniform_mgf_minus_one<T: Scalar>(t: T) -> T {
    if t.abs() < T::lit(1e-3) {
        // -t/2 + t^2/6 - t^3/24 + t^4/120
        let t2 = t * t;
        -t / T::lit(2.0) + t2 / T::lit(6.0) - t2 * t / T::lit(24.0) + t2 * t2 / T::lit(120.0)
    } else {
        -(-t).exp_m1() / t - T::one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_known_values() {
        assert_relative_eq!(gamma(1.0_f64), 1.0, max_relative = 1e-14);
        assert_relative_eq!(gamma(5.0_f64), 24.0, max_relative = 1e-14);
        assert_relative_eq!(gamma(0.5_f64), std::f64::consts::PI.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(gamma(0.1_f64), 9.513_507_698_668_732, max_relative = 1e-13);
        assert_relative_eq!(ln_gamma(30.0_f64), 71.257_038_967_168_01, max_relative = 1e-14);
    }

    #[test]
    fn normalizer_theta_one_is_exp_minus_gamma() {
        assert_relative_eq!(dickman_normalizer(1.0_f64), (-EULER_GAMMA).exp(), max_relative = 1e-14);
        assert_relative_eq!(dickman_normalizer(1.0_f32), 0.561_459_5, max_relative = 1e-6);
    }

    #[test]
    fn uniform_mgf_branches_agree() {
        for &t in &[1e-4_f64, 9.99e-4, 1.001e-3, 0.5, 3.0] {
            let direct = (1.0 - (-t).exp()) / t - 1.0;
            assert_relative_eq!(uniform_mgf_minus_one(t), direct, max_relative = 1e-9);
        }
    }
}
