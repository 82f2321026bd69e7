//! Exact special values of Dirichlet L-functions through generalized
//! Bernoulli numbers.

use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::arith::factorize;
use crate::characters::{gauss_sum, DirichletCharacter};
use crate::exact::{q_frac, q_int, Cyclo, Scalar, Q};

fn binom(n: u64, k: u64) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

/// Classical Bernoulli numbers with B_1 = −1/2.
pub fn bernoulli(n: usize) -> Q {
    static CACHE: OnceLock<Mutex<Vec<Q>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(vec![Q::one()]));
    let mut b = cache.lock().unwrap();
    while b.len() <= n {
        let m = b.len() as u64;
        let mut s = Q::zero();
        for k in 0..m {
            s += Q::from(binom(m + 1, k)) * &b[k as usize];
        }
        let next = -s / Q::from(BigInt::from(m + 1));
        b.push(next);
    }
    b[n].clone()
}

/// B_n(x) = Σ binom(n,k) B_k x^{n−k}.
pub fn bernoulli_poly(n: usize, x: &Q) -> Q {
    let mut acc = Q::zero();
    let mut xp = Q::one();
    // accumulate from the top power down: term k uses x^{n−k}
    let mut powers = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        powers.push(xp.clone());
        xp *= x;
    }
    for k in 0..=n {
        acc += Q::from(binom(n as u64, k as u64)) * bernoulli(k) * &powers[n - k];
    }
    acc
}

/// Generalized Bernoulli number B_{n,χ} of the primitive character attached
/// to χ; B_{1,1} = 1/2 for the trivial character.
pub fn bernoulli_chi(chi: &DirichletCharacter, n: usize) -> Cyclo {
    let prim = chi.primitive_part();
    let f = prim.modulus();
    let mut acc = Cyclo::int(0);
    for a in 1..=f {
        let v = prim.value(a as i64);
        if v.is_zero_value() {
            continue;
        }
        acc = acc.plus(&v.scale(&bernoulli_poly(n, &q_frac(a as i64, f as i64))));
    }
    acc.scale(&q_int(f as i64).pow(n as i32 - 1)).minimize()
}

/// L(1−n, χ) = −B_{n,χ}/n for the primitive character attached to χ.
pub fn l_negative(chi: &DirichletCharacter, n: usize) -> Cyclo {
    assert!(n >= 1);
    bernoulli_chi(chi, n).scale(&q_frac(-1, n as i64))
}

/// ∏_{q | c} (1 − χ₀(q) q^{−s}) for integer s, using the primitive values.
pub fn euler_removal(chi: &DirichletCharacter, c: u64, s: i64) -> Cyclo {
    let prim = chi.primitive_part();
    let mut acc = Cyclo::int(1);
    for (q, _) in factorize(c) {
        let term = prim.value(q as i64).scale(&q_int(q as i64).pow(-s as i32));
        acc = acc.times(&Cyclo::int(1).minus(&term));
    }
    acc
}

/// L_c(1−n, χ): the value at 1−n with Euler factors at primes dividing c removed.
pub fn l_negative_imprimitive(chi: &DirichletCharacter, n: usize, c: u64) -> Cyclo {
    l_negative(chi, n).times(&euler_removal(chi, c, 1 - n as i64))
}

/// Algebraic part a with L(r, χ) = a·π^r, for r ≥ 1 and χ(−1) = (−1)^r:
/// a = (−1)^{1+(r−δ)/2} τ(χ) (2/f)^r B_{r,χ̄} / (2 i^δ r!).
pub fn l_positive_algebraic(chi: &DirichletCharacter, r: usize) -> Option<Cyclo> {
    let prim = chi.primitive_part();
    let delta = prim.parity() as usize;
    if r == 0 || (r + delta) % 2 != 0 {
        return None;
    }
    let f = prim.modulus() as i64;
    let tau = gauss_sum(&prim).exact;
    let b = bernoulli_chi(&prim.inverse(), r);
    let mut fact = Q::one();
    for i in 1..=r {
        fact *= q_int(i as i64);
    }
    let sign = if (1 + (r - delta) / 2) % 2 == 0 { 1 } else { -1 };
    let scalar = q_int(sign) * q_frac(2, f).pow(r as i32) / (q_int(2) * fact);
    let i_pow = Cyclo::zeta(4, -(delta as i64));
    Some(tau.times(&b).times(&i_pow).scale(&scalar).minimize())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_values() {
        assert_eq!(bernoulli(1), q_frac(-1, 2));
        assert_eq!(bernoulli(2), q_frac(1, 6));
        assert_eq!(bernoulli(4), q_frac(-1, 30));
        assert_eq!(bernoulli(3), q_int(0));
        let triv = DirichletCharacter::trivial(1);
        assert_eq!(bernoulli_chi(&triv, 2), Cyclo::rational(q_frac(1, 6)));
        assert_eq!(bernoulli_chi(&triv, 1), Cyclo::rational(q_frac(1, 2)));
        let chi4 = DirichletCharacter::kronecker_char(-4);
        assert_eq!(bernoulli_chi(&chi4, 1), Cyclo::rational(q_frac(-1, 2)));
        assert!(bernoulli_chi(&chi4, 2).is_zero_value());
    }

    #[test]
    fn positive_values() {
        let triv = DirichletCharacter::trivial(1);
        let z2 = l_positive_algebraic(&triv, 2).unwrap();
        assert_eq!(z2, Cyclo::rational(q_frac(1, 6)));
        // L(1, χ_{-4}) = π/4
        let chi4 = DirichletCharacter::kronecker_char(-4);
        assert_eq!(l_positive_algebraic(&chi4, 1).unwrap(), Cyclo::rational(q_frac(1, 4)));
        assert!(l_positive_algebraic(&chi4, 2).is_none());
    }

    #[test]
    fn imprimitive_constant_term() {
        // ζ(−3)(1 − 2³) = −7/120
        let v = l_negative_imprimitive(&DirichletCharacter::trivial(1), 4, 4);
        assert_eq!(v, Cyclo::rational(q_frac(-7, 120)));
    }
}
