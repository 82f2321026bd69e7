use std::path::PathBuf;

use num_bigint::BigInt;
use symsq::characters::{embed_cyclo_padic, DirichletCharacter};
use symsq::eigendata::{load_eigendata, NewformData};
use symsq::exact::{q_frac, q_int, Cyclo, Scalar};
use symsq::iwasawa::*;
use symsq::padic::{PadicNumber, PrecisionBudget};

fn corpus(label: &str) -> NewformData {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../corpus/{label}.json"));
    load_eigendata(&path).unwrap()
}

/// (1 − θ(p)p^n)·(−B_{n+1,θ}/(n+1)) with θ = χω^{−n}, computed in Q(ζ)
/// and embedded only at the end.
fn bernoulli_oracle(chi: &DirichletCharacter, p: u64, n: i64, prec: i64) -> PadicNumber {
    let theta = chi.mul(&DirichletCharacter::teichmuller_power(p, -n)).primitive_part();
    let b = bernoulli_chi(&theta, (n + 1) as usize).scale(&q_frac(-1, n + 1));
    let euler = Cyclo::int(1).minus(&theta.value(p as i64).scale(&q_int(p as i64).pow(n as i32)));
    embed_cyclo_padic(&euler.times(&b), p, prec).unwrap()
}

#[test]
fn kubota_leopoldt_interpolates_bernoulli_numbers() {
    let budget = PrecisionBudget::new(20, 20, 53);
    for (p, chars) in [
        (5u64, ["quad:-3", "quad:-4", "quad:-7"]),
        (7, ["quad:-3", "quad:-4", "quad:-8"]),
    ] {
        for spec in chars {
            let chi = DirichletCharacter::parse_spec(spec).unwrap();
            let kl = kubota_leopoldt(&chi, 1, p, &budget).unwrap();
            assert!(!kl.odd);
            for n in 0..=4 {
                let got = kl.interpolated_value(n).unwrap();
                let want = bernoulli_oracle(&chi, p, n, 30);
                assert!(got.agrees(&want, 20), "p={p} {spec} n={n}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn even_branch_of_an_odd_character_vanishes() {
    let chi = DirichletCharacter::parse_spec("quad:-4").unwrap();
    let kl = kubota_leopoldt(&chi, 0, 5, &PrecisionBudget::new(10, 8, 53)).unwrap();
    assert!(kl.odd);
    assert!(kl.series.coeffs.iter().all(|c| c == &BigInt::from(0)));
}

#[test]
fn a_series_is_multiplicative() {
    let budget = PrecisionBudget::new(20, 20, 53);
    for p in [5u64, 7] {
        for (a, b) in [(2i64, 3i64), (6, 11), (-1, 13)] {
            let lhs = a_char_series_int(a, p, &budget)
                .unwrap()
                .mul(&a_char_series_int(b, p, &budget).unwrap());
            let rhs = a_char_series_int(a * b, p, &budget).unwrap();
            assert!(lhs.agrees(&rhs, 20, 20), "p={p} a={a} b={b}");
        }
    }
    assert!(matches!(
        a_char_series_int(10, 5, &budget),
        Err(IwasawaError::DivisibleByP(_))
    ));
}

#[test]
fn primitive_correction_round_trips() {
    let budget = PrecisionBudget::new(20, 20, 53);
    let f = corpus("15a");
    let chi = DirichletCharacter::trivial(1);
    let g = kubota_leopoldt(&DirichletCharacter::parse_spec("quad:-4").unwrap(), 1, 7, &budget)
        .unwrap()
        .series;
    let factors: Vec<EulerSeries> = f
        .bad_primes()
        .into_iter()
        .map(|q| euler_series_one_var(&f, &chi, q, Sign::Plus, 7, &budget).unwrap())
        .collect();
    let corrected = primitive_correction(&g, &factors, true).unwrap();
    let residual = correction_residual(&corrected, &factors, &g).unwrap();
    assert!(is_zero_series(&residual));
}

#[test]
fn non_unit_factor_is_rejected_without_poles() {
    let budget = PrecisionBudget::new(10, 10, 53);
    let lin = LinearFactor {
        q: 2,
        scalar: "1".into(),
        scalar_value: BigInt::from(1),
        exp_x: 0,
        exp_y: 0,
        unit_constant: false,
    };
    let e = EulerSeries::from_factors(2, Sign::Plus, vec![lin], 5, &budget).unwrap();
    let g = IwasawaSeries::one(5, 10, 10);
    assert!(matches!(
        primitive_correction(&g, std::slice::from_ref(&e), false),
        Err(IwasawaError::NonInvertibleFactor(_))
    ));
    let with_pole = primitive_correction(&g, &[e], true).unwrap();
    assert_eq!(with_pole.poles.len(), 1);
}

#[test]
fn two_variable_series_specializes_to_one_variable() {
    let budget = PrecisionBudget::new(20, 20, 53);
    for (label, p, spec) in [("15a", 7u64, "trivial"), ("14a", 5, "quad:-3"), ("11a", 7, "quad:-4")] {
        let f = corpus(label);
        let chi = DirichletCharacter::parse_spec(spec).unwrap();
        for q in f.bad_primes() {
            if q == p {
                continue;
            }
            for sign in [Sign::Plus, Sign::Minus] {
                let one = euler_series_one_var(&f, &chi, q, sign, p, &budget).unwrap();
                let two = euler_series_two_var(&f, &chi, q, sign, p, &budget, 8).unwrap();
                let spec_y = two.specialize_y(f.m() as i64).unwrap();
                assert!(spec_y.agrees(&one.series, 20, 20), "{label} q={q} {spec}");
            }
        }
    }
}

#[test]
fn euler_series_matches_complex_factor_ratio() {
    let budget = PrecisionBudget::new(15, 15, 53);
    let f = corpus("15a");
    for spec in ["trivial", "quad:-4"] {
        let chi = DirichletCharacter::parse_spec(spec).unwrap();
        for q in [3u64, 5] {
            for n in 0..3 {
                let r = euler_series_crosscheck(&f, &chi, q, 7, n, &budget).unwrap();
                assert!(
                    r.matches,
                    "{spec} q={q} n={n}: {} vs {}",
                    r.series_value, r.complex_value
                );
            }
        }
    }
}

#[test]
fn omega_factor_forms_agree_and_reconstruct_values() {
    let chi = DirichletCharacter::parse_spec("quad:-4").unwrap();
    for n in 0..4 {
        let t = DirichletCharacter::parse_spec("quad:5").unwrap();
        let om = omega_factor(&t, n);
        assert!((om.re - om.via_gamma_r_re).abs() + (om.im - om.via_gamma_r_im).abs() < 1e-12 * (1.0 + om.re.abs()));
        let c = zeta_prime_check(&chi, 1, 5, n);
        if c.exact_re.abs() + c.exact_im.abs() > 0.0 {
            assert!(c.rel_error < 1e-9, "n={n}: {c:?}");
        }
    }
}
