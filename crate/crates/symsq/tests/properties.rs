use std::path::PathBuf;

use num_bigint::BigInt;
use proptest::prelude::*;
use symsq::characters::DirichletCharacter;
use symsq::eigendata::load_eigendata;
use symsq::exact::{q_frac, Cyclo, Scalar, Q};
use symsq::iwasawa::{a_char_series_int, IwasawaSeries};
use symsq::lfun::{route_b, sym2_imprimitive_series};
use symsq::padic::{PadicNumber, PrecisionBudget};
use symsq::qexpansion::FormalDirichletSeries;
use symsq::trivial_zero::base_change_order;

const SPECS: [&str; 8] = [
    "trivial",
    "quad:-3",
    "quad:-4",
    "quad:5",
    "quad:-7",
    "omega:5:1",
    "omega:7:2",
    "gens:11:2/1/5",
];

fn prime() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![3u64, 5, 7, 11, 13])
}

fn prime_to(p: u64) -> impl Strategy<Value = i64> {
    (-500i64..500).prop_filter("unit", move |a| a % p as i64 != 0)
}

proptest! {
    #[test]
    fn padic_division_inverts_multiplication(p in prime(), a in -10_000i64..10_000, b in 1i64..10_000) {
        prop_assume!(b % p as i64 != 0);
        let x = PadicNumber::from_int(a, p, 25);
        let y = PadicNumber::from_int(b, p, 25);
        prop_assert!(x.mul(&y).div(&y).unwrap().agrees(&x, 25));
        prop_assert!(x.add(&y).sub(&y).agrees(&x, 25));
    }

    #[test]
    fn padic_rationals_clear_denominators(p in prime(), n in -999i64..999, d in 1i64..999) {
        prop_assume!(d % p as i64 != 0);
        let x = PadicNumber::from_rational(&q_frac(n, d), p, 40);
        prop_assert!(x.mul(&PadicNumber::from_int(d, p, 40)).agrees(&PadicNumber::from_int(n, p, 40), 40));
    }

    #[test]
    fn unit_series_invert(p in prime(), c0 in 1i64..1000, rest in prop::collection::vec(-1000i64..1000, 7)) {
        prop_assume!(c0 % p as i64 != 0);
        let mut coeffs = vec![BigInt::from(c0)];
        coeffs.extend(rest.into_iter().map(BigInt::from));
        let s = IwasawaSeries::from_coeffs(p, 15, coeffs);
        let prod = s.mul(&s.inverse().unwrap());
        prop_assert!(prod.agrees(&IwasawaSeries::one(p, 15, 8), 15, 8));
    }

    #[test]
    fn characters_are_multiplicative(i in 0usize..SPECS.len(), a in -300i64..300, b in -300i64..300) {
        let chi = DirichletCharacter::parse_spec(SPECS[i]).unwrap();
        prop_assert_eq!(chi.value(a * b), chi.value(a).times(&chi.value(b)));
        let n = chi.modulus() as i64;
        prop_assert_eq!(chi.value(a), chi.value(a + 7 * n));
        if symsq::arith::gcd(a, n) == 1 {
            prop_assert_eq!(chi.mul(&chi.inverse()).value(a), Cyclo::int(1));
        }
    }

    #[test]
    fn dirichlet_series_inverse(coeffs in prop::collection::vec((-20i64..20, 1i64..6), 40)) {
        let s: FormalDirichletSeries<Q> =
            FormalDirichletSeries::from_fn(40, |n| if n == 1 { q_frac(1, 1) } else { let (a, b) = coeffs[n as usize - 1]; q_frac(a, b) });
        let prod = s.mul(&s.inverse().unwrap());
        prop_assert_eq!(prod.first_difference(&FormalDirichletSeries::one(40)), None);
    }

    #[test]
    fn base_change_product_is_a_power_of_f(n in 1u64..=24, k in 0usize..8) {
        let divisors: Vec<u64> = (1..=n).filter(|d| n % d == 0).collect();
        let f = divisors[k % divisors.len()];
        let r = base_change_order(n, f).unwrap();
        prop_assert!(r.holds, "n={} f={} product {}", n, f, r.product);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn a_series_is_a_character(p in prop::sample::select(vec![5u64, 7]), a in prime_to(5), b in prime_to(5)) {
        prop_assume!(a % p as i64 != 0 && b % p as i64 != 0);
        let budget = PrecisionBudget::new(12, 10, 53);
        let lhs = a_char_series_int(a, p, &budget).unwrap().mul(&a_char_series_int(b, p, &budget).unwrap());
        prop_assert!(lhs.agrees(&a_char_series_int(a * b, p, &budget).unwrap(), 12, 10));
    }

    #[test]
    fn euler_routes_agree(label in prop::sample::select(vec!["11a", "14a", "15a", "17a", "19a"]), i in 0usize..SPECS.len()) {
        let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../corpus/{label}.json"));
        let f = load_eigendata(&path).unwrap();
        let chi = DirichletCharacter::parse_spec(SPECS[i]).unwrap();
        let a = sym2_imprimitive_series(&f, &chi, 120).unwrap();
        let b = route_b(&f, &chi, 120).unwrap();
        prop_assert_eq!(a.first_difference(&b), None);
    }
}
