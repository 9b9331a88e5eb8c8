use dickman::smooth::dickman_check_with;
use dickman::{dickman_check, largest_prime_factor_sieve, rho, DickmanParams};

#[test]
fn error_shrinks_with_n() {
    let small = largest_prime_factor_sieve(10_000).unwrap();
    let large = largest_prime_factor_sieve(1_000_000).unwrap();
    for s in [2.0, 2.5, 3.0] {
        let a = dickman_check_with(&small, s).unwrap();
        let b = dickman_check_with(&large, s).unwrap();
        assert!(b.abs_error < a.abs_error, "s={s}: {} vs {}", b.abs_error, a.abs_error);
    }
}

#[test]
fn s_equal_one_is_exact() {
    let c = dickman_check(1_000_000, 1.0).unwrap();
    assert_eq!(c.ratio, 1.0);
    assert_eq!(c.rho_s, 1.0);
}

#[test]
fn rho_values_match_core_numerics() {
    let c = dickman_check(1_000_000, 2.0).unwrap();
    assert_eq!(c.y, 1000);
    let expected = rho(&DickmanParams::new(1.0).unwrap(), 2.0).unwrap();
    assert!((c.rho_s - expected).abs() < 1e-12);
    assert!((c.rho_s - (1.0 - 2f64.ln())).abs() < 1e-10);
}

#[test]
fn psi_counts_against_brute_force() {
    let n = 5000u64;
    let lpf = largest_prime_factor_sieve(n).unwrap();
    let y = 17;
    let brute = (1..=n)
        .filter(|&m| {
            let mut r = m;
            for p in 2..=y {
                while r % p == 0 {
                    r /= p;
                }
            }
            r == 1
        })
        .count() as u64;
    assert_eq!(dickman::smooth::count_smooth(&lpf, y), brute);
}
