use std::path::PathBuf;

use symsq::arith::val_p;
use symsq::characters::{base_change_gauss_check, DirichletCharacter};
use symsq::eigendata::{load_eigendata, NewformData};
use symsq::padic::{PadicNumber, PrecisionBudget};
use symsq::trivial_zero::*;

fn corpus(label: &str) -> NewformData {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../corpus/{label}.json"));
    load_eigendata(&path).unwrap()
}

fn budget(m: u32) -> PrecisionBudget {
    PrecisionBudget::new(m, 20, 53)
}

fn trivial_point(f: &NewformData) -> TwistPoint {
    TwistPoint::new(f.m() as i64, DirichletCharacter::trivial(1))
}

#[test]
fn steinberg_places_carry_the_trivial_zero() {
    for (label, p) in [("11a", 11u64), ("14a", 7)] {
        let f = corpus(label);
        let r = trivial_zero_report(&f, &trivial_point(&f), p, &budget(20)).unwrap();
        assert_eq!(r.g, 1, "{label}");
        assert!(r.places[0].steinberg && r.places[0].vanishing);
        assert_eq!(r.places[0].exact.as_deref(), Some("0"));
        assert!(r.routes_agree);
    }
}

#[test]
fn good_ordinary_prime_has_no_vanishing_factor() {
    let f = corpus("11a");
    let r = trivial_zero_report(&f, &trivial_point(&f), 5, &budget(20)).unwrap();
    assert_eq!(r.g, 0);
    assert!(!r.places[0].vanishing);
    assert!(!r.places[0].steinberg);
    // oracle: 1 − α^{−2} for α the unit root of X² − a_5X + 5
    let a5 = f.ap(5).unwrap().clone();
    let mut alpha = PadicNumber::from_rational(&a5, 5, 30);
    for _ in 0..40 {
        // α ← a_5 − 5/α converges to the unit root
        alpha = PadicNumber::from_rational(&a5, 5, 30).sub(&PadicNumber::from_int(5, 5, 30).div(&alpha).unwrap());
    }
    let expect = PadicNumber::from_int(1, 5, 30).sub(&alpha.mul(&alpha).inv().unwrap());
    assert_eq!(r.places[0].linear, expect.with_precision(20).to_string());
}

#[test]
fn ramified_twist_gives_trivial_factor() {
    let f = corpus("11a");
    let pt = TwistPoint::new(0, DirichletCharacter::parse_spec("gens:11:2/1/5").unwrap());
    let e = e1_factor(&f, &pt, 11, &budget(10)).unwrap();
    assert!(!e.vanishing);
    assert_eq!(e.exact.as_deref(), Some("1"));
}

#[test]
fn classification_and_formula_agree_across_corpus() {
    for label in ["11a", "14a", "15a", "17a", "19a"] {
        let f = corpus(label);
        for p in f.bad_primes() {
            if let Ok(r) = trivial_zero_report(&f, &trivial_point(&f), p, &budget(12)) {
                assert!(r.routes_agree, "{label} p={p}");
                let ap = f.ap(p).unwrap();
                let steinberg_count = usize::from(r.places[0].steinberg && ap * ap == symsq::exact::q_int(1));
                assert_eq!(r.g, steinberg_count, "{label} p={p}");
            }
        }
    }
}

#[test]
fn e2_is_one_at_primitive_places() {
    let f = corpus("14a");
    let e = e2_factor(&f, &trivial_point(&f), 7, &budget(10)).unwrap();
    assert!(e.primitive_at_p);
    assert_eq!(e.value, "1");
    let g = corpus("11a");
    let e = e2_factor(&g, &TwistPoint::new(1, DirichletCharacter::trivial(1)), 5, &budget(10)).unwrap();
    assert!(!e.primitive_at_p && !e.vanishing);
}

#[test]
fn factorization_scalar() {
    let f = corpus("11a");
    let s = factorization_check(&f, 11, &budget(20)).unwrap();
    assert!(s.scalar_vanishes);
    assert_eq!(s.order_lower_bound, 1);
    assert!(s.derivative_slot.is_some());
    let s = factorization_check(&f, 7, &budget(20)).unwrap();
    assert!(!s.scalar_vanishes);
}

#[test]
fn tate_parameter_of_11a() {
    let f = corpus("11a");
    // oracle: ord_11(j) from c4³/Δ of the Weierstrass model
    let c = f.curve.unwrap();
    let [b2, b4, b6, b8] = c.b_invariants();
    let disc = -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6;
    let c4 = b2 * b2 - 24 * b4;
    let ord_j = 3 * val_p(c4, 11) as i64 - val_p(disc, 11) as i64;
    let t = tate_period(&f, 11, &budget(30)).unwrap();
    assert_eq!(t.ord_q, -ord_j);
    assert_eq!(t.ord_q, 5);
    assert!(t.roundtrip_valuation >= 28, "{}", t.roundtrip_valuation);
    assert!(t.split);
    assert!(matches!(
        tate_period(&f, 5, &budget(30)),
        Err(TrivialZeroError::NotMultiplicative(5))
    ));
}

#[test]
fn l_invariant_is_stable_and_nonzero() {
    for (label, p) in [("11a", 11u64), ("14a", 7), ("15a", 5), ("17a", 17)] {
        let f = corpus(label);
        let r = l_invariant_report(&f, p, &budget(30)).unwrap();
        assert!(r.nonzero, "{label}");
        assert!(r.valuation >= 1);
        assert!(r.stable_digits >= 15, "{label}: {}", r.stable_digits);
        assert!(r.tate.roundtrip_valuation >= 28);
    }
}

#[test]
fn derivative_prediction_records() {
    let f = corpus("14a");
    let d = derivative_prediction(&f, 7, &DirichletCharacter::trivial(1), &budget(20)).unwrap();
    assert_eq!(d.recognized.as_deref(), Some("1"));
    assert!(d.recognition_stable);
    assert!(d.caveats.is_empty());
    assert_eq!(d.g, 1);
    let f = corpus("11a");
    let d = derivative_prediction(&f, 11, &DirichletCharacter::trivial(1), &budget(20)).unwrap();
    assert_eq!(d.recognized.as_deref(), Some("1"));
    assert!(d.caveats.iter().any(|c| c.contains("2 does not divide N")));
    assert!(matches!(
        derivative_prediction(&f, 5, &DirichletCharacter::trivial(1), &budget(20)),
        Err(TrivialZeroError::HypothesesNotMet(_))
    ));
}

#[test]
fn real_period_of_11a() {
    let l = period_lattice(&corpus("11a").curve.unwrap());
    assert!((l.real_period - 1.269209304279553).abs() < 1e-10, "{}", l.real_period);
}

#[test]
fn base_change_identity_for_all_small_cyclic_groups() {
    for n in 1..=12u64 {
        for f in (1..=n).filter(|f| n % f == 0) {
            let r = base_change_order(n, f).unwrap();
            assert!(r.holds, "n={n} f={f}: {}", r.product);
            assert_eq!(r.g, n / f);
        }
    }
}

#[test]
fn gauss_sum_discrepancies_are_small_roots_of_unity() {
    let pairs = [
        ("quad:-3", 5i64),
        ("quad:-4", 5),
        ("quad:5", -3),
        ("quad:-7", 5),
        ("quad:8", -3),
        ("omega:5:1", -3),
        ("omega:7:1", 5),
        ("omega:7:2", -4),
        ("quad:12", 5),
        ("omega:11:2", -3),
    ];
    for (spec, d) in pairs {
        let chi = DirichletCharacter::parse_spec(spec).unwrap();
        let r = base_change_gauss_check(&chi, d).unwrap();
        assert!(r.abs_minus_one < 1e-10, "{spec} {d}");
        assert!(r.root_order.is_some_and(|o| o <= 8), "{spec} {d}: {:?}", r.root_order);
    }
}
