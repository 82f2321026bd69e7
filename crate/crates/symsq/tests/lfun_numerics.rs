use std::path::PathBuf;

use num_complex::Complex64;
use symsq::characters::DirichletCharacter;
use symsq::eigendata::{load_eigendata, NewformData};
use symsq::lfun::afe::{
    completed_l_direct, completed_l_with, conductor_exponents, default_smoothings, epsilon_solved, AfeConfig,
};
use symsq::lfun::{completed_l, epsilon_factor, functional_equation_residual};

fn corpus(label: &str) -> NewformData {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(format!("{label}.json"));
    load_eigendata(&p).unwrap()
}

#[test]
fn untwisted_11a_is_smoothing_independent() {
    let f = corpus("11a");
    let triv = DirichletCharacter::trivial(1);
    let v = completed_l(&f, &triv, Complex64::new(1.5, 2.0)).unwrap();
    assert_eq!(v.conductor, 121);
    assert!((v.epsilon.value() - 1.0).norm() < 1e-12);
    assert!(v.error_bound < 1e-6, "{}", v.error_bound);
}

#[test]
fn afe_agrees_with_direct_sum_far_right() {
    let f = corpus("11a");
    let triv = DirichletCharacter::trivial(1);
    let s = Complex64::new(6.0, 0.3);
    let (g1, g2) = default_smoothings(s);
    let a = completed_l_with(&f, &triv, s, &AfeConfig::default(), g1, g2)
        .unwrap()
        .value();
    let d = completed_l_direct(&f, &triv, s, 2000).unwrap();
    assert!((a - d).norm() / d.norm() < 1e-10, "{a} vs {d}");
}

#[test]
fn formula_root_number_matches_solved_one() {
    let cases = [
        ("11a", "omega:7:1"),
        ("11a", "omega:5:2"),
        ("14a", "omega:11:1"),
        ("17a", "omega:5:1"),
        ("19a", "quad:-3"),
    ];
    for (label, spec) in cases {
        let f = corpus(label);
        let chi = DirichletCharacter::parse_spec(spec).unwrap();
        let ex = conductor_exponents(&f, &chi).unwrap();
        let q = ex.iter().map(|(a, b)| a.pow(*b)).product();
        let solved = epsilon_solved(&f, &chi, ex, q).unwrap().value();
        let formula = epsilon_factor(&f, &chi).unwrap();
        assert_eq!(formula.method, "formula");
        assert!(
            (solved - formula.value()).norm() < 1e-5,
            "{label} {spec}: {solved} vs {}",
            formula.value()
        );
    }
}

#[test]
fn twists_sharing_the_level_are_consistent() {
    for (label, spec) in [("11a", "quad:-11"), ("14a", "quad:-7"), ("15a", "quad:5")] {
        let f = corpus(label);
        let chi = DirichletCharacter::parse_spec(spec).unwrap();
        let v = completed_l(&f, &chi, Complex64::new(1.4, 2.5)).unwrap();
        assert_eq!(v.epsilon.method, "solved");
        assert!((v.epsilon.value().norm() - 1.0).abs() < 1e-8, "{label} {spec}");
        assert!(v.error_bound < 1e-8, "{label} {spec}: {}", v.error_bound);
    }
}

#[test]
fn functional_equation_holds_for_twists() {
    let f = corpus("11a");
    for spec in ["trivial", "quad:-3", "quad:-4", "omega:5:1"] {
        let chi = DirichletCharacter::parse_spec(spec).unwrap();
        let r = functional_equation_residual(&f, &chi, Complex64::new(1.2, 3.0)).unwrap();
        assert!(r < 1e-6, "{spec}: {r}");
    }
}
