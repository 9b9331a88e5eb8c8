//! Limit classification: the three-condition Dickman test and κ rule for
//! iterated-log schedules, and the sufficient conditions for card-insertion
//! shuffle schemes.

use serde::{Deserialize, Serialize};

use crate::numerics::MixingLaw;
use crate::scalar::Exponent;
use crate::schedules::{eval_mu, validate_nontriv, MuSchedule, PSchedule};

/// Predicted distributional limit of W_n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum LimitVerdict<E> {
    /// W_n → L · D^{(X)}_θ.
    Dickman {
        theta: E,
        #[serde(rename = "L")]
        scale: E,
        mixing: MixingLaw<f64>,
    },
    /// W_n → c in probability.
    Degenerate { c: E },
    Invalid { reason: String },
}

impl<E: Exponent> LimitVerdict<E> {
    pub fn is_dickman(&self) -> bool {
        matches!(self, LimitVerdict::Dickman { .. })
    }

    pub fn is_invalid(&self) -> bool {
        matches!(self, LimitVerdict::Invalid { .. })
    }

    fn invalid(reason: impl Into<String>) -> Self {
        LimitVerdict::Invalid { reason: reason.into() }
    }

    /// Lossy conversion to floating point parameters.
    pub fn to_f64(&self) -> LimitVerdict<f64> {
        let f = |e: &E| e.to_f64().unwrap_or(f64::NAN);
        match self {
            LimitVerdict::Dickman { theta, scale, mixing } => {
                LimitVerdict::Dickman { theta: f(theta), scale: f(scale), mixing: mixing.clone() }
            }
            LimitVerdict::Degenerate { c } => LimitVerdict::Degenerate { c: f(c) },
            LimitVerdict::Invalid { reason } => LimitVerdict::Invalid { reason: reason.clone() },
        }
    }
}

/// κ_μ = min{j : a_j ≠ 0}, κ_p = min{j : b_j ≠ 1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KappaIndices {
    pub kappa_mu: Option<usize>,
    pub kappa_p: Option<usize>,
}

impl KappaIndices {
    pub fn of<E: Exponent>(mu: &MuSchedule<E>, p: &PSchedule<E>) -> Self {
        KappaIndices {
            kappa_mu: mu.a().iter().position(|a| !a.is_zero()),
            kappa_p: p.b().iter().position(|b| !b.is_one()),
        }
    }
}

/// Whether the three Dickman conditions hold: J_p ≤ J_μ, b_j = 1 for
/// j ≤ J_p, a_j = 0 for j < J_p and a_{J_p} > 0.
pub fn three_conditions<E: Exponent>(mu: &MuSchedule<E>, p: &PSchedule<E>) -> bool {
    let jp = p.j();
    jp <= mu.j()
        && p.b().iter().all(|b| b.is_one())
        && mu.a()[..jp].iter().all(|a| a.is_zero())
        && mu.a()[jp] > E::zero()
}

pub fn classify_theorem2<E: Exponent>(mu: &MuSchedule<E>, p: &PSchedule<E>) -> LimitVerdict<E> {
    let jp = p.j();
    if jp >= 1 && p.b()[jp].is_zero() {
        return LimitVerdict::invalid(format!("last p exponent b_{jp} is zero"));
    }
    if !p.tends_below_one() {
        return LimitVerdict::invalid("p(x) does not eventually stay below 1");
    }
    let report = validate_nontriv(mu, p);
    if !report.is_ok() {
        return LimitVerdict::invalid(report.violations().join("; "));
    }
    if three_conditions(mu, p) {
        let a = mu.a()[jp].clone();
        let cp = p.c().clone();
        return LimitVerdict::Dickman {
            theta: cp.clone() / a.clone(),
            scale: a / cp,
            mixing: MixingLaw::PointMassOne,
        };
    }
    let k = KappaIndices::of(mu, p);
    let zero_limit = match k.kappa_mu {
        Some(km) if mu.a()[km] > E::zero() => match k.kappa_p {
            None => km < jp,
            Some(kp) => km < kp,
        },
        _ => false,
    };
    LimitVerdict::Degenerate { c: if zero_limit { E::zero() } else { E::one() } }
}

/// |E_k| for large k.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetSize {
    Finite(u64),
    Unbounded,
}

/// Largest n on which the boundedness of μ_n / Σ_{k≤n} μ_k/k is probed.
const BOUNDEDNESS_HORIZON: u64 = 1_000_000;
/// Allowed growth of the running maximum between the last two decades.
const BOUNDEDNESS_GROWTH: f64 = 0.01;

/// Running maximum of μ_n / Σ_{k≤n} μ_k/k at each decade up to the horizon.
fn decade_maxima<E: Exponent>(mu: &MuSchedule<E>) -> crate::error::Result<Vec<f64>> {
    let mut maxima = Vec::new();
    let mut sum = 0.0;
    let mut running = 0.0_f64;
    let mut next_decade = 10;
    for k in 1..=BOUNDEDNESS_HORIZON {
        let m = eval_mu(mu, k)?;
        sum += m / k as f64;
        running = running.max(m / sum);
        if k == next_decade {
            maxima.push(running);
            next_decade *= 10;
        }
    }
    Ok(maxima)
}

/// Classification of a subset scheme from its mean schedule μ_k ∼ μ(k),
/// the eventual size of E_k, and the limit law of X_k/μ_k.
pub fn classify_shuffle<E: Exponent>(scheme_mu: &MuSchedule<E>, set_size: SetSize, mixing: &MixingLaw<f64>) -> LimitVerdict<E> {
    let a0 = scheme_mu.a()[0].clone();
    if let SetSize::Finite(0) = set_size {
        return LimitVerdict::invalid("E_k must be nonempty for large k");
    }
    if a0 <= E::zero() {
        // μ_n / Σ μ_k/k → 0 for every such iterated-log μ
        return LimitVerdict::Degenerate { c: E::one() };
    }
    match set_size {
        SetSize::Finite(n) => {
            let Some(n) = E::from_u64(n) else {
                return LimitVerdict::invalid("set size not representable");
            };
            match mixing.mean() {
                Ok(m) if m <= 1.0 + 1e-12 => {}
                Ok(m) => return LimitVerdict::invalid(format!("mixing mean {m} exceeds 1")),
                Err(e) => return LimitVerdict::invalid(e.to_string()),
            }
            LimitVerdict::Dickman { theta: n.clone() / a0.clone(), scale: a0 / n, mixing: mixing.clone() }
        }
        SetSize::Unbounded => match decade_maxima(scheme_mu) {
            Ok(m) if m.len() >= 2 && m[m.len() - 1] <= m[m.len() - 2] * (1.0 + BOUNDEDNESS_GROWTH) => {
                LimitVerdict::Degenerate { c: E::one() }
            }
            Ok(_) => LimitVerdict::invalid("no sufficient condition for a shuffle limit holds"),
            Err(e) => LimitVerdict::invalid(e.to_string()),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    fn mu(a: &[f64]) -> MuSchedule<f64> {
        MuSchedule::new(1.0, a.to_vec()).unwrap()
    }

    fn p(b: &[f64]) -> PSchedule<f64> {
        PSchedule::new(1.0, b.to_vec()).unwrap()
    }

    fn dickman(theta: f64, scale: f64) -> LimitVerdict<f64> {
        LimitVerdict::Dickman { theta, scale, mixing: MixingLaw::PointMassOne }
    }

    #[test]
    fn schedule_examples() {
        assert_eq!(classify_theorem2(&mu(&[1.0]), &p(&[1.0])), dickman(1.0, 1.0));
        assert_eq!(classify_theorem2(&mu(&[0.0, 1.0]), &p(&[1.0, 1.0])), dickman(1.0, 1.0));
        assert_eq!(classify_theorem2(&mu(&[0.5, 2.0]), &p(&[1.0, 1.0])), LimitVerdict::Degenerate { c: 0.0 });
        assert_eq!(classify_theorem2(&mu(&[0.0]), &p(&[1.0])), LimitVerdict::Degenerate { c: 1.0 });
        assert_eq!(classify_theorem2(&mu(&[1.0]), &p(&[0.5])), LimitVerdict::Degenerate { c: 1.0 });
        assert!(classify_theorem2(&mu(&[1.0]), &p(&[2.0])).is_invalid());
    }

    #[test]
    fn theta_from_coefficients() {
        let m = MuSchedule::new(1.0, vec![2.0]).unwrap();
        let q = PSchedule::new(0.5, vec![1.0]).unwrap();
        assert_eq!(classify_theorem2(&m, &q), dickman(0.25, 4.0));
    }

    #[test]
    fn shape_violations_are_invalid() {
        assert!(classify_theorem2(&mu(&[1.0]), &p(&[1.0, 0.0])).is_invalid());
        assert!(classify_theorem2(&mu(&[1.0]), &p(&[-0.5])).is_invalid());
        assert!(classify_theorem2(&mu(&[-1.0]), &p(&[1.0])).is_invalid());
    }

    #[test]
    fn kappa_tie_gives_one() {
        // κ_μ = κ_p = 1 with a_1 > 0 falls through to c = 1
        let v = classify_theorem2(&mu(&[0.0, 1.0]), &p(&[1.0, 0.5]));
        assert_eq!(v, LimitVerdict::Degenerate { c: 1.0 });
    }

    #[test]
    fn rational_scale_identity_is_exact() {
        let r = |n, d| Ratio::new(n, d);
        let m = MuSchedule::new(r(1, 1), vec![r(0, 1), r(3, 7)]).unwrap();
        let q = PSchedule::new(r(2, 3), vec![r(1, 1), r(1, 1)]).unwrap();
        match classify_theorem2(&m, &q) {
            LimitVerdict::Dickman { theta, scale, .. } => {
                assert_eq!(theta, r(14, 9));
                assert_eq!(theta * scale, r(1, 1));
            }
            v => panic!("unexpected {v:?}"),
        }
    }

    #[test]
    fn shuffle_examples() {
        assert_eq!(classify_shuffle(&mu(&[1.0]), SetSize::Finite(1), &MixingLaw::PointMassOne), dickman(1.0, 1.0));
        let mix = MixingLaw::uniform_atoms(vec![2.0 / 3.0, 4.0 / 3.0]).unwrap();
        assert_eq!(
            classify_shuffle(&mu(&[1.0]), SetSize::Finite(2), &mix),
            LimitVerdict::Dickman { theta: 2.0, scale: 0.5, mixing: mix.clone() }
        );
        let half = MuSchedule::new(0.5, vec![1.0]).unwrap();
        assert_eq!(
            classify_shuffle(&half, SetSize::Unbounded, &MixingLaw::PointMassOne),
            LimitVerdict::Degenerate { c: 1.0 }
        );
        assert_eq!(
            classify_shuffle(&mu(&[0.0]), SetSize::Finite(1), &MixingLaw::PointMassOne),
            LimitVerdict::Degenerate { c: 1.0 }
        );
        assert!(classify_shuffle(&mu(&[1.0]), SetSize::Finite(0), &MixingLaw::PointMassOne).is_invalid());
    }

    #[test]
    fn verdict_record_shape() {
        let json = serde_json::to_value(dickman(1.0, 1.0)).unwrap();
        assert_eq!(json["kind"], "Dickman");
        assert_eq!(json["theta"], 1.0);
        assert_eq!(json["L"], 1.0);
    }
}
