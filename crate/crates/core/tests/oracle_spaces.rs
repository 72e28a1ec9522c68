use subconc_core::oracle::{reference_spaces, FiniteSpace};

#[test]
fn shipped_spaces_have_expected_verdicts() {
    let spaces = reference_spaces();
    assert_eq!(spaces.len(), 3);
    for space in &spaces {
        let report = space.run_suite(64, 3).unwrap();
        assert!(report.verdict_ok, "{}", space.name());
        assert!(report.moment.passed, "{}", space.name());
    }
    let control = spaces.iter().find(|s| s.name() == "negative_control").unwrap();
    assert!(!control.run_suite(64, 3).unwrap().independence.passed);
}

#[test]
fn trivial_space_moment_is_tight() {
    let space = reference_spaces().into_iter().find(|s| s.name() == "trivial").unwrap();
    let m = space.verify_moment_inequality().unwrap();
    // X uniform on {−1, 1}, n = 2: Ê[X̄²] = 1/2 = σ̄²/n
    assert_eq!(m.sigma_bar_sq, 1.0);
    assert!((m.lhs - 0.5).abs() < 1e-15);
    assert!(m.slack.abs() < 1e-15);
}

#[test]
fn three_atom_two_extreme_space() {
    let src = r#"
        name = "three_by_two"
        n = 3
        d = 1
        structure = "explicit"
        [[coordinates]]
        atoms = [[-1.0], [0.0], [2.0]]
        [[extremes]]
        marginals = [[0.5, 0.25, 0.25]]
        [[extremes]]
        marginals = [[0.25, 0.25, 0.5]]
    "#;
    let space: FiniteSpace = toml::from_str(src).unwrap();
    let m = space.verify_moment_inequality().unwrap();
    assert!(m.passed && m.slack > 0.0);
    let d = space.verify_conditional_domination().unwrap();
    assert!(d.passed);
}

#[test]
fn two_dimensional_space() {
    let src = r#"
        name = "planar"
        n = 2
        d = 2
        structure = "rectangular"
        [[coordinates]]
        atoms = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]
        [[extremes]]
        marginals = [[0.25, 0.25, 0.25, 0.25]]
        [[extremes]]
        marginals = [[0.5, 0.5, 0.0, 0.0]]
        [[extremes]]
        marginals = [[0.0, 0.5, 0.0, 0.5]]
    "#;
    let space: FiniteSpace = toml::from_str(src).unwrap();
    let report = space.run_suite(64, 1).unwrap();
    assert!(report.verdict_ok);
    assert!(report.theta.iter().all(|r| r.max_discrepancy <= 1e-12));
}
