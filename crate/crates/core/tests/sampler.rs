use dickman::stats::moments;
use dickman::{
    build_tables, fixed_point_check, ks_distance, sample_gd, DickmanParams, MixingLaw, RngStream,
};
use dickman::sampler::fixed_point_check_with_exponent;

#[test]
fn mean_and_variance_match_cumulants() {
    let cases = [
        (1.0, MixingLaw::PointMassOne),
        (2.0, MixingLaw::PointMassOne),
        (2.0, MixingLaw::uniform_atoms(vec![2.0 / 3.0, 4.0 / 3.0]).unwrap()),
        (0.5, MixingLaw::scheme(dickman::SubsetScheme::Full)),
    ];
    for (i, (theta, mix)) in cases.iter().enumerate() {
        let b = sample_gd(*theta, mix, 1e-8, RngStream::new(100, i as u64), 1_000_000).unwrap();
        let m = moments(&b.values).unwrap();
        let ex = mix.moment(1).unwrap();
        let ex2 = mix.moment(2).unwrap();
        assert!((m.mean - theta * ex).abs() < 4.0 * m.mean_se, "case {i}: mean {}", m.mean);
        assert!((m.variance - theta * ex2 / 2.0).abs() < 4.0 * m.variance_se, "case {i}: var {}", m.variance);
        assert!(b.bias_bound <= 1e-8 * (theta + 1.0) * ex);
    }
}

#[test]
fn samples_follow_the_tabulated_cdf() {
    for (i, theta) in [0.5, 1.0, 3.0].into_iter().enumerate() {
        let count = 100_000;
        let b = sample_gd(theta, &MixingLaw::PointMassOne, 1e-10, RngStream::new(200, i as u64), count).unwrap();
        let t = build_tables(&DickmanParams::new(theta).unwrap(), 30.0, 1e-10).unwrap();
        let d = ks_distance(&b.values, |x| t.cdf(x)).unwrap();
        assert!(d <= 1.63 / (count as f64).sqrt() + b.bias_bound, "θ={theta} KS={d}");
    }
}

#[test]
fn fixed_point_identity() {
    let one = MixingLaw::PointMassOne;
    let mix = MixingLaw::uniform_atoms(vec![2.0 / 3.0, 4.0 / 3.0]).unwrap();
    assert!(fixed_point_check(1.0, &one, 100_000, RngStream::new(300, 0)).unwrap() < 0.01);
    assert!(fixed_point_check(2.0, &mix, 100_000, RngStream::new(300, 1)).unwrap() < 0.01);
    let wrong = fixed_point_check_with_exponent(1.0, &one, 0.5, 100_000, RngStream::new(300, 2)).unwrap();
    assert!(wrong > 0.05);
}

#[test]
fn scaling_law() {
    let b = sample_gd(1.5, &MixingLaw::PointMassOne, 1e-8, RngStream::new(400, 0), 200_000).unwrap();
    for c in [0.1, 2.0, 7.5] {
        let scaled: Vec<f64> = b.values.iter().map(|v| c * v).collect();
        let m = moments(&scaled).unwrap();
        assert!((m.mean - c * 1.5).abs() < 4.0 * m.mean_se);
    }
}

#[test]
fn batches_do_not_depend_on_worker_count() {
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| sample_gd(1.0, &MixingLaw::PointMassOne, 1e-8, RngStream::new(7, 3), 50_000).unwrap())
    };
    let a = run(1);
    assert_eq!(a, run(2));
    assert_eq!(a, run(8));
}
