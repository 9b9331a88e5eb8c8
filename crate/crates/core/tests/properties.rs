use dickman::classifier::three_conditions;
use dickman::{
    classify_theorem2, series_diverges, shuffle_oracle, validate_nontriv, LimitVerdict, MuSchedule, PSchedule,
    Rational, RngStream, SubsetScheme,
};
use proptest::prelude::*;

fn small_rational() -> impl Strategy<Value = Rational> {
    // exponents from a coarse grid so that exact ties (0, 1, −1) occur often
    (-4i64..=4, prop_oneof![Just(1i64), Just(2i64)]).prop_map(|(n, d)| Rational::new(n, d))
}

fn positive_rational() -> impl Strategy<Value = Rational> {
    (1i64..=6, 1i64..=3).prop_map(|(n, d)| Rational::new(n, d))
}

fn schedules() -> impl Strategy<Value = (MuSchedule<Rational>, PSchedule<Rational>)> {
    (
        positive_rational(),
        prop::collection::vec(small_rational(), 1..4),
        positive_rational(),
        prop::collection::vec(small_rational(), 1..4),
    )
        .prop_map(|(cm, a, cp, b)| (MuSchedule::new(cm, a).unwrap(), PSchedule::new(cp, b).unwrap()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn verdicts_partition_the_inputs((mu, p) in schedules()) {
        let v = classify_theorem2(&mu, &p);
        let shape_ok = !(p.j() >= 1 && p.b()[p.j()] == Rational::from_integer(0)) && p.tends_below_one();
        let nontriv = validate_nontriv(&mu, &p).is_ok();
        match &v {
            LimitVerdict::Invalid { .. } => prop_assert!(!shape_ok || !nontriv),
            LimitVerdict::Dickman { theta, scale, mixing } => {
                prop_assert!(shape_ok && nontriv && three_conditions(&mu, &p));
                prop_assert_eq!(*theta * *scale, Rational::from_integer(1));
                prop_assert!(mixing.is_point_mass_one());
            }
            LimitVerdict::Degenerate { c } => {
                prop_assert!(shape_ok && nontriv && !three_conditions(&mu, &p));
                prop_assert!(*c == Rational::from_integer(0) || *c == Rational::from_integer(1));
            }
        }
    }

    #[test]
    fn rational_and_float_verdicts_agree((mu, p) in schedules()) {
        let to_f = |r: &Rational| *r.numer() as f64 / *r.denom() as f64;
        let mu_f = MuSchedule::new(to_f(mu.c()), mu.a().iter().map(to_f).collect()).unwrap();
        let p_f = PSchedule::new(to_f(p.c()), p.b().iter().map(to_f).collect()).unwrap();
        let exact = classify_theorem2(&mu, &p).to_f64();
        let float = classify_theorem2(&mu_f, &p_f);
        match (exact, float) {
            (LimitVerdict::Dickman { theta: a, .. }, LimitVerdict::Dickman { theta: b, .. }) => {
                prop_assert!((a - b).abs() <= 1e-12 * a.abs());
            }
            (a, b) => prop_assert_eq!(std::mem::discriminant(&a), std::mem::discriminant(&b)),
        }
    }

    #[test]
    fn divergence_is_decided_at_first_non_boundary_entry(d in prop::collection::vec(small_rational(), 1..5)) {
        let minus_one = Rational::from_integer(-1);
        let expected = match d.iter().find(|e| **e != minus_one) {
            Some(e) => *e > minus_one,
            None => true,
        };
        prop_assert_eq!(series_diverges(&d), expected);
        // prepending −1 never changes the verdict of the tail decision
        let mut longer = vec![minus_one];
        longer.extend(d.iter().cloned());
        prop_assert_eq!(series_diverges(&longer), expected);
    }
}

fn scheme_strategy() -> impl Strategy<Value = SubsetScheme> {
    prop_oneof![
        Just(SubsetScheme::Full),
        Just(SubsetScheme::Singleton),
        Just(SubsetScheme::Top),
        (1u64..6).prop_map(|n| SubsetScheme::LastN { n }),
        prop::collection::vec(0.05f64..=1.0, 1..4).prop_map(|ratios| SubsetScheme::Ratio { ratios }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn shuffle_counts_agree(scheme in scheme_strategy(), n in 1u64..=1000, seed in any::<u64>()) {
        let o = shuffle_oracle(&scheme, n, RngStream::new(seed, 0)).unwrap();
        prop_assert_eq!(o.running_sum, o.inversions);
        prop_assert!(o.inversions <= n * (n - 1) / 2);
    }
}
