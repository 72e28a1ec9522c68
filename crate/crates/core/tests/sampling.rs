use subconc_core::martingale::{check_reduction_bound, reduce, verify_reduction};
use subconc_core::rng;
use subconc_core::{ConvexBody, PriorFamily, PriorPoint};

#[test]
fn uniform_shift_moments_at_a_million_draws() {
    // 10⁴ replicates of n = 100 coordinates
    let n = 100;
    let fam = PriorFamily::uniform_shift(1.0, 0.5, n).unwrap();
    let prior = PriorPoint::constant(vec![1.0], n);
    let mut rng = rng::stream(2024, 0, 0);
    let (mut s1, mut s2, mut s4, mut count) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..10_000 {
        for x in fam.draw(&prior, &mut rng) {
            assert!((0.5..=1.5).contains(&x[0]));
            let c = x[0] - 1.0;
            s1 += c;
            s2 += c * c;
            s4 += c.powi(4);
            count += 1.0;
        }
    }
    let var = 0.25 / 3.0;
    let mean = s1 / count;
    assert!(mean.abs() <= 4.0 * (var / count).sqrt(), "mean offset {mean}");
    let m2 = s2 / count;
    let se_m2 = ((s4 / count - m2 * m2) / count).sqrt();
    assert!((m2 - var).abs() <= 4.0 * se_m2, "variance {m2}");
}

#[test]
fn reduction_bound_never_fails() {
    let fam = PriorFamily::uniform_shift(1.0, 0.5, 5).unwrap();
    let priors = fam.corner_priors(&[1.0], 6, 11).unwrap();
    let theta = fam.theta().unwrap();
    let mut rng = rng::stream(5, 0, 0);
    for k in 0..100_000 {
        let prior = &priors[k % priors.len()];
        let rs = reduce(&fam, fam.draw(prior, &mut rng), prior).unwrap();
        assert!(check_reduction_bound(&rs, &theta).unwrap());
    }
}

#[test]
fn reduction_properties_at_a_million_draws() {
    let fam = PriorFamily::uniform_shift(1.0, 0.5, 4).unwrap();
    let prior = PriorPoint::Shift { mu: vec![vec![1.0], vec![-0.5], vec![0.0], vec![-1.0]] };
    let stats = verify_reduction(&fam, &prior, 250_000, 99).unwrap();
    assert!(stats.centered_within(4.0));
    assert!(stats.variance_dominated(4.0));
    assert!(stats.max_norm_y <= 2.0 * stats.m_bound);
    assert_eq!(stats.bound_failures, 0);
}

#[test]
fn ball_shift_reduction() {
    let body = ConvexBody::interval(vec![-0.2, -0.1, 0.0], vec![0.2, 0.1, 0.3]).unwrap();
    let fam = PriorFamily::ball_shift(0.5, 0.4, 6, body).unwrap();
    for prior in fam.corner_priors(&[0.0, 0.0, 1.0], 2, 1).unwrap() {
        let stats = verify_reduction(&fam, &prior, 20_000, 3).unwrap();
        assert!(stats.centered_within(4.0));
        assert!(stats.variance_dominated(4.0));
        assert_eq!(stats.bound_failures, 0);
    }
}
