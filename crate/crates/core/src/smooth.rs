//! Smooth-number counts Ψ(N, y) against the Dickman function.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{build_tables, default_tol, DickmanParams};

/// Largest N the sieve will allocate for.
pub const SIEVE_MAX_N: u64 = 100_000_000;

/// p⁺(n) for 0 ≤ n ≤ N, with p⁺(1) = 1 and p⁺(0) = 0.
///
/// A linear sieve fills in the smallest prime factor; the array is then
/// folded in increasing order via p⁺(n) = max(spf(n), p⁺(n / spf(n))).
pub fn largest_prime_factor_sieve(n: u64) -> Result<Vec<u32>> {
    if n > SIEVE_MAX_N {
        return Err(Error::capability(format!("sieve limited to N ≤ {SIEVE_MAX_N}, got {n}")));
    }
    let n = n as usize;
    let mut spf = vec![0u32; n + 1];
    let mut primes: Vec<u32> = Vec::new();
    for i in 2..=n {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u32);
        }
        let si = spf[i];
        for &p in &primes {
            let m = i * p as usize;
            if p > si || m > n {
                break;
            }
            spf[m] = p;
        }
    }
    if n >= 1 {
        spf[1] = 1;
    }
    for i in 2..=n {
        let p = spf[i];
        let rest = spf[i / p as usize];
        if rest > p {
            spf[i] = rest;
        }
    }
    Ok(spf)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothCount {
    #[serde(rename = "N")]
    pub n: u64,
    pub y: u64,
    pub s: f64,
    pub psi: u64,
    pub ratio: f64,
    pub rho_s: f64,
    pub abs_error: f64,
}

/// Ψ(N, y) from a precomputed sieve.
pub fn count_smooth(lpf: &[u32], y: u64) -> u64 {
    lpf.iter().skip(1).filter(|&&p| u64::from(p) <= y).count() as u64
}

/// y = ⌊N^{1/s}⌋, guarding against the root landing just below an integer.
pub fn smoothness_bound(n: u64, s: f64) -> u64 {
    let y = (n as f64).powf(1.0 / s);
    let r = y.round();
    if (y - r).abs() <= 1e-9 * r.max(1.0) { r as u64 } else { y.floor() as u64 }
}

/// Ψ(N, N^{1/s})/N compared with ρ(s).
pub fn dickman_check(n: u64, s: f64) -> Result<SmoothCount> {
    let lpf = largest_prime_factor_sieve(n)?;
    dickman_check_with(&lpf, s)
}

/// As [`dickman_check`] with the sieve of N reused.
pub fn dickman_check_with(lpf: &[u32], s: f64) -> Result<SmoothCount> {
    let n = lpf.len().saturating_sub(1) as u64;
    if !(s.is_finite() && s >= 1.0) {
        return Err(Error::domain(format!("s must be at least 1, got {s}")));
    }
    let y = smoothness_bound(n, s);
    if y < 2 {
        return Err(Error::domain(format!("N^(1/s) = {y} is below 2")));
    }
    let psi = count_smooth(lpf, y);
    let ratio = psi as f64 / n as f64;
    let params = DickmanParams::new(1.0)?;
    let rho_s = if s <= 1.0 { 1.0 } else { build_tables(&params, s.ceil().max(2.0), default_tol())?.rho(s) };
    Ok(SmoothCount { n, y, s, psi, ratio, rho_s, abs_error: (ratio - rho_s).abs() })
}
