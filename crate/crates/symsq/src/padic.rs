//! Capped-precision p-adic numbers.
//!
//! A nonzero element is `p^val · unit + O(p^prec)` with `unit` a p-adic unit
//! known modulo `p^(prec - val)`. Precision is tracked pessimistically: every
//! operation reports the smallest absolute precision its inputs guarantee.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::Q;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PadicError {
    #[error("{a} is divisible by p = {p}")]
    DivisibleByP { a: String, p: u64 },
    #[error("logarithm of zero")]
    ZeroInput,
    #[error("division by a value that is zero at precision {0}")]
    DivisionByZero(i64),
    #[error("p = {0} is not an odd prime")]
    BadPrime(u64),
}

/// Caps shared by every numeric routine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionBudget {
    /// p-adic digits.
    pub padic_digits: u32,
    /// Power-series truncation order.
    pub series_terms: usize,
    /// Binary digits for the complex side.
    pub float_bits: u32,
}

impl Default for PrecisionBudget {
    fn default() -> Self {
        PrecisionBudget {
            padic_digits: 20,
            series_terms: 20,
            float_bits: 53,
        }
    }
}

impl PrecisionBudget {
    pub fn new(padic_digits: u32, series_terms: usize, float_bits: u32) -> Self {
        assert!(padic_digits >= 1 && series_terms >= 1 && float_bits >= 1);
        PrecisionBudget {
            padic_digits,
            series_terms,
            float_bits,
        }
    }
}

pub fn check_prime(p: u64) -> Result<(), PadicError> {
    if p < 3 || !crate::arith::is_prime(p) {
        return Err(PadicError::BadPrime(p));
    }
    Ok(())
}

pub fn p_pow(p: u64, e: i64) -> BigInt {
    if e <= 0 {
        return BigInt::one();
    }
    num_traits::pow(BigInt::from(p), e as usize)
}

/// Splits a nonzero integer as p^v · u with p ∤ u.
pub fn split_p(n: &BigInt, p: u64) -> (i64, BigInt) {
    assert!(!n.is_zero());
    let pb = BigInt::from(p);
    let mut v = 0;
    let mut u = n.clone();
    loop {
        let (q, r) = u.div_rem(&pb);
        if !r.is_zero() {
            break;
        }
        u = q;
        v += 1;
    }
    (v, u)
}

pub fn inv_mod(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(m))
}

#[derive(Clone, PartialEq, Eq)]
pub struct PadicNumber {
    p: u64,
    unit: BigInt,
    val: i64,
    prec: i64,
}

impl fmt::Debug for PadicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for PadicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "O({}^{})", self.p, self.prec);
        }
        write!(
            f,
            "{}^{} * {} + O({}^{})",
            self.p, self.val, self.unit, self.p, self.prec
        )
    }
}

impl PadicNumber {
    pub fn zero(p: u64, prec: i64) -> Self {
        PadicNumber {
            p,
            unit: BigInt::zero(),
            val: prec,
            prec,
        }
    }

    fn normalized(p: u64, value: BigInt, val: i64, prec: i64) -> Self {
        // `value` is known modulo p^(prec - val) and scaled by p^val.
        if prec <= val {
            return Self::zero(p, prec);
        }
        let m = p_pow(p, prec - val);
        let value = value.mod_floor(&m);
        if value.is_zero() {
            return Self::zero(p, prec);
        }
        let (v, u) = split_p(&value, p);
        let val = val + v;
        let unit = u.mod_floor(&p_pow(p, prec - val));
        PadicNumber { p, unit, val, prec }
    }

    pub fn from_bigint(n: &BigInt, p: u64, prec: i64) -> Self {
        Self::normalized(p, n.clone(), 0, prec)
    }

    pub fn from_int(n: i64, p: u64, prec: i64) -> Self {
        Self::from_bigint(&BigInt::from(n), p, prec)
    }

    /// Embeds a rational number in Q_p to absolute precision `prec`.
    pub fn from_rational(x: &Q, p: u64, prec: i64) -> Self {
        if x.is_zero() {
            return Self::zero(p, prec);
        }
        let (vn, un) = split_p(x.numer(), p);
        let (vd, ud) = split_p(x.denom(), p);
        let val = vn - vd;
        if prec <= val {
            return Self::zero(p, prec);
        }
        let m = p_pow(p, prec - val);
        let unit = (un * inv_mod(&ud, &m).expect("unit denominator")).mod_floor(&m);
        PadicNumber { p, unit, val, prec }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn valuation(&self) -> i64 {
        self.val
    }

    pub fn precision(&self) -> i64 {
        self.prec
    }

    pub fn relative_precision(&self) -> i64 {
        (self.prec - self.val).max(0)
    }

    pub fn unit(&self) -> &BigInt {
        &self.unit
    }

    pub fn is_zero(&self) -> bool {
        self.unit.is_zero()
    }

    pub fn is_unit(&self) -> bool {
        !self.is_zero() && self.val == 0
    }

    /// Base-p digits of the unit part, least significant first.
    pub fn digits(&self) -> Vec<u64> {
        let mut out = Vec::new();
        let pb = BigInt::from(self.p);
        let mut u = self.unit.clone();
        for _ in 0..self.relative_precision() {
            let (q, r) = u.div_rem(&pb);
            out.push(r.to_u64().unwrap());
            u = q;
        }
        out
    }

    /// The integer representative in [0, p^prec) when the value is integral.
    pub fn residue(&self) -> Option<BigInt> {
        if self.val < 0 {
            return None;
        }
        if self.is_zero() {
            return Some(BigInt::zero());
        }
        Some(&self.unit * p_pow(self.p, self.val))
    }

    /// Representative scaled back to the ambient ring: p^val · unit.
    pub fn to_rational(&self) -> Q {
        if self.is_zero() {
            return Q::zero();
        }
        if self.val >= 0 {
            Q::from_integer(&self.unit * p_pow(self.p, self.val))
        } else {
            Q::new(self.unit.clone(), p_pow(self.p, -self.val))
        }
    }

    pub fn with_precision(&self, prec: i64) -> Self {
        let prec = prec.min(self.prec);
        if self.is_zero() {
            return Self::zero(self.p, prec);
        }
        Self::normalized(self.p, self.unit.clone(), self.val, prec)
    }

    fn same_prime(&self, o: &Self) {
        assert_eq!(self.p, o.p, "mixing primes {} and {}", self.p, o.p);
    }

    pub fn add(&self, o: &Self) -> Self {
        self.same_prime(o);
        let prec = self.prec.min(o.prec);
        let v = self.val.min(o.val).min(prec);
        let a = &self.unit * p_pow(self.p, self.val - v);
        let b = &o.unit * p_pow(self.p, o.val - v);
        Self::normalized(self.p, a + b, v, prec)
    }

    pub fn neg(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        Self::normalized(self.p, -self.unit.clone(), self.val, self.prec)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.same_prime(o);
        let prec = (self.val + o.prec).min(o.val + self.prec);
        if self.is_zero() || o.is_zero() {
            return Self::zero(self.p, prec);
        }
        Self::normalized(self.p, &self.unit * &o.unit, self.val + o.val, prec)
    }

    pub fn inv(&self) -> Result<Self, PadicError> {
        if self.is_zero() {
            return Err(PadicError::DivisionByZero(self.prec));
        }
        let rel = self.relative_precision();
        let m = p_pow(self.p, rel);
        let unit = inv_mod(&self.unit, &m).unwrap();
        Ok(PadicNumber {
            p: self.p,
            unit,
            val: -self.val,
            prec: -self.val + rel,
        })
    }

    pub fn div(&self, o: &Self) -> Result<Self, PadicError> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow(&self, e: u64) -> Self {
        if e == 0 {
            return Self::from_int(1, self.p, self.prec.max(1));
        }
        let mut r = self.clone();
        let mut b = self.clone();
        let mut k = e - 1;
        while k > 0 {
            if k & 1 == 1 {
                r = r.mul(&b);
            }
            b = b.mul(&b);
            k >>= 1;
        }
        r
    }

    /// True when the two values agree modulo p^k (k capped by available precision).
    pub fn agrees(&self, o: &Self, k: i64) -> bool {
        let d = self.sub(o);
        d.is_zero() && d.prec >= k.min(self.prec).min(o.prec) || d.val >= k
    }

    /// Teichmüller representative of the residue of a unit.
    pub fn teichmuller_of(&self) -> Result<Self, PadicError> {
        if !self.is_unit() {
            return Err(PadicError::DivisibleByP {
                a: self.to_string(),
                p: self.p,
            });
        }
        teichmuller(&self.unit, self.p, self.prec)
    }
}

/// ω(a): the (p−1)-th root of unity congruent to a modulo p.
pub fn teichmuller(a: &BigInt, p: u64, prec: i64) -> Result<PadicNumber, PadicError> {
    let pb = BigInt::from(p);
    if a.mod_floor(&pb).is_zero() {
        return Err(PadicError::DivisibleByP { a: a.to_string(), p });
    }
    let m = p_pow(p, prec);
    let mut x = a.mod_floor(&pb);
    for _ in 0..prec {
        x = x.modpow(&pb, &m);
    }
    Ok(PadicNumber::from_bigint(&x, p, prec))
}

/// log(1 + z) for z ≡ 0 mod p, returned modulo p^prec.
fn log_one_plus(z: &BigInt, p: u64, prec: i64) -> BigInt {
    let ilog = |n: i64| -> i64 {
        let mut k = 0;
        let mut t = p as i64;
        while t <= n {
            k += 1;
            t *= p as i64;
        }
        k
    };
    // z^n/n has valuation at least n − log_p(n); stop once that reaches prec.
    let mut last = 1i64;
    while last - ilog(last) < prec {
        last += 1;
    }
    let w = prec + ilog(last) + 1;
    let mw = p_pow(p, w);
    let mut sum = BigInt::zero();
    let mut zn = BigInt::one();
    for n in 1..=last {
        zn = (&zn * z).mod_floor(&mw);
        let (e, n_unit) = split_p(&BigInt::from(n), p);
        let term = (&zn / p_pow(p, e)) * inv_mod(&n_unit, &mw).unwrap();
        if n % 2 == 1 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    sum.mod_floor(&p_pow(p, prec))
}

/// Iwasawa-branch p-adic logarithm: log_p(p) = 0 and log_p(ω(a)) = 0.
pub fn padic_log(x: &PadicNumber) -> Result<PadicNumber, PadicError> {
    if x.is_zero() {
        return Err(PadicError::ZeroInput);
    }
    let p = x.p;
    let rel = x.relative_precision();
    let u = PadicNumber {
        p,
        unit: x.unit.clone(),
        val: 0,
        prec: rel,
    };
    let w = u.div(&u.teichmuller_of()?)?;
    let z = w.residue().unwrap() - BigInt::one();
    let v = log_one_plus(&z, p, rel);
    Ok(PadicNumber::from_bigint(&v, p, rel))
}

/// Integers modulo p^M: the coefficient ring of truncated Iwasawa series.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZpRing {
    pub p: u64,
    pub prec: i64,
    pub modulus: BigInt,
}

impl ZpRing {
    pub fn new(p: u64, prec: i64) -> Self {
        ZpRing {
            p,
            prec,
            modulus: p_pow(p, prec),
        }
    }

    pub fn reduce(&self, x: &BigInt) -> BigInt {
        x.mod_floor(&self.modulus)
    }

    /// Image of a p-integral rational; None if p divides the denominator.
    pub fn from_rational(&self, x: &Q) -> Option<BigInt> {
        let inv = inv_mod(x.denom(), &self.modulus)?;
        Some((x.numer() * inv).mod_floor(&self.modulus))
    }

    pub fn inv(&self, x: &BigInt) -> Option<BigInt> {
        inv_mod(x, &self.modulus)
    }

    pub fn to_padic(&self, x: &BigInt) -> PadicNumber {
        PadicNumber::from_bigint(x, self.p, self.prec)
    }

    pub fn valuation(&self, x: &BigInt) -> i64 {
        let r = self.reduce(x);
        if r.is_zero() {
            self.prec
        } else {
            split_p(&r, self.p).0
        }
    }

    /// Signed representative in (−p^M/2, p^M/2].
    pub fn centered(&self, x: &BigInt) -> BigInt {
        let r = self.reduce(x);
        if &r * 2 > self.modulus {
            r - &self.modulus
        } else {
            r
        }
    }
}

/// Hensel lift of the root of a monic polynomial congruent to `r0` modulo p,
/// assuming the root is simple modulo p. Coefficients low degree first.
pub fn hensel_root(coeffs: &[BigInt], r0: &BigInt, p: u64, prec: i64) -> Option<BigInt> {
    let ring = ZpRing::new(p, prec);
    let eval = |x: &BigInt| -> (BigInt, BigInt) {
        let mut f = BigInt::zero();
        let mut df = BigInt::zero();
        for c in coeffs.iter().rev() {
            df = ring.reduce(&(&df * x + &f));
            f = ring.reduce(&(&f * x + c));
        }
        (f, df)
    };
    let mut x = ring.reduce(r0);
    for _ in 0..(2 * prec + 2) {
        let (f, df) = eval(&x);
        if f.is_zero() {
            return Some(x);
        }
        let inv = ring.inv(&df)?;
        x = ring.reduce(&(&x - f * inv));
    }
    let (f, _) = eval(&x);
    if f.is_zero() {
        Some(x)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::q_frac;

    #[test]
    fn rational_embedding() {
        let x = PadicNumber::from_rational(&q_frac(1, 2), 5, 3);
        assert_eq!(x.residue().unwrap(), BigInt::from(63));
        assert_eq!(x.digits(), vec![3, 2, 2]);
        let z = PadicNumber::from_rational(&q_frac(0, 1), 7, 4);
        assert!(z.is_zero() && z.valuation() >= 4);
        let f = PadicNumber::from_int(5, 5, 3);
        assert_eq!(f.valuation(), 1);
        assert_eq!(f.unit(), &BigInt::from(1));
        let neg = PadicNumber::from_rational(&q_frac(7, 25), 5, 3);
        assert_eq!(neg.valuation(), -2);
        assert_eq!(neg.to_rational(), q_frac(7, 25));
    }

    #[test]
    fn teichmuller_examples() {
        let t = teichmuller(&BigInt::from(2), 5, 2).unwrap();
        assert_eq!(t.residue().unwrap(), BigInt::from(7));
        let one = teichmuller(&BigInt::from(1), 5, 10).unwrap();
        assert_eq!(one.residue().unwrap(), BigInt::from(1));
        for p in [5u64, 7, 11] {
            let m = teichmuller(&BigInt::from(p - 1), p, 12).unwrap();
            assert_eq!(m, PadicNumber::from_int(-1, p, 12));
        }
        assert!(teichmuller(&BigInt::from(10), 5, 3).is_err());
    }

    #[test]
    fn log_of_six() {
        // oracle: direct partial sums of Σ (−1)^{n+1} 5^n / n in exact rationals
        let mut s = Q::zero();
        for n in 1..=10i64 {
            let t = Q::new(num_traits::pow(BigInt::from(5), n as usize), BigInt::from(n));
            if n % 2 == 1 {
                s += t;
            } else {
                s -= t;
            }
        }
        let oracle = PadicNumber::from_rational(&s, 5, 3);
        let got = padic_log(&PadicNumber::from_int(6, 5, 3)).unwrap();
        assert_eq!(got, oracle);
        assert!(padic_log(&PadicNumber::from_int(1, 5, 8)).unwrap().is_zero());
        let w = teichmuller(&BigInt::from(3), 7, 10).unwrap();
        assert!(padic_log(&w).unwrap().is_zero());
        assert!(padic_log(&PadicNumber::from_int(5, 5, 8)).unwrap().is_zero());
    }

    #[test]
    fn hensel_unit_root() {
        // X^2 - X + 5 has a unit root ≡ 1 mod 5
        let c = vec![BigInt::from(5), BigInt::from(-1), BigInt::from(1)];
        let r = hensel_root(&c, &BigInt::from(1), 5, 20).unwrap();
        let ring = ZpRing::new(5, 20);
        assert_eq!(ring.reduce(&(&r * &r - &r + 5)), BigInt::zero());
    }
}
