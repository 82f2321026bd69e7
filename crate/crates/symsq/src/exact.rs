//! Exact scalars: rationals, cyclotomic numbers and quadratic extensions of
//! cyclotomic fields.
//!
//! Character values live in Q(ζ_n) and Satake parameters in a quadratic
//! extension of that field, so these two types cover every exact coefficient
//! the library produces.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{divisors, euler_phi, lcm};

pub type Q = BigRational;

pub fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn q_to_f64(x: &Q) -> f64 {
    // Ratio of two large integers computed through their bit lengths to avoid
    // overflow when numerator and denominator are both huge.
    let n = x.numer();
    let d = x.denom();
    let shift = (n.bits() as i64 - 900).max(0).max(d.bits() as i64 - 900);
    if shift > 0 {
        let ns = n >> shift as usize;
        let ds = d >> shift as usize;
        let nf = ns.to_f64().unwrap_or(f64::NAN);
        let df = ds.to_f64().unwrap_or(f64::NAN);
        return nf / df;
    }
    n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN)
}

/// Common interface for the exact coefficient types used by formal series.
pub trait Scalar: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn zero_value() -> Self;
    fn one_value() -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn negate(&self) -> Self;
    fn is_zero_value(&self) -> bool;
    fn from_q(x: Q) -> Self;
    fn scale(&self, x: &Q) -> Self {
        self.times(&Self::from_q(x.clone()))
    }
}

impl Scalar for Q {
    fn zero_value() -> Self {
        Zero::zero()
    }
    fn one_value() -> Self {
        One::one()
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn negate(&self) -> Self {
        -self
    }
    fn is_zero_value(&self) -> bool {
        Zero::is_zero(self)
    }
    fn from_q(x: Q) -> Self {
        x
    }
}

fn cyclotomic_cache() -> &'static Mutex<HashMap<u64, Vec<i64>>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Vec<i64>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Coefficients (low degree first) of the n-th cyclotomic polynomial.
pub fn cyclotomic_poly(n: u64) -> Vec<i64> {
    if let Some(v) = cyclotomic_cache().lock().unwrap().get(&n) {
        return v.clone();
    }
    // x^n - 1 divided by all Φ_d with d | n, d < n.
    let mut num = vec![0i64; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in divisors(n) {
        if d == n {
            continue;
        }
        let den = cyclotomic_poly(d);
        num = poly_div_exact(&num, &den);
    }
    cyclotomic_cache().lock().unwrap().insert(n, num.clone());
    num
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem: Vec<i64> = num.to_vec();
    let dd = den.len() - 1;
    let nd = rem.len() - 1;
    let mut quot = vec![0i64; nd - dd + 1];
    for i in (0..=nd - dd).rev() {
        let c = rem[i + dd] / den[dd];
        quot[i] = c;
        for j in 0..=dd {
            rem[i + j] -= c * den[j];
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0));
    quot
}

/// Element of Q(ζ_n), stored in the power basis 1, ζ, …, ζ^{φ(n)−1}.
#[derive(Clone)]
pub struct Cyclo {
    n: u64,
    c: Vec<Q>,
}

impl fmt::Debug for Cyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Cyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(r) = self.as_rational() {
            return write!(f, "{}", r);
        }
        let mut first = true;
        for (j, c) in self.c.iter().enumerate() {
            if Zero::is_zero(c) {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match j {
                0 => write!(f, "{}", c)?,
                _ => write!(f, "({})*z{}^{}", c, self.n, j)?,
            }
        }
        Ok(())
    }
}

impl Cyclo {
    pub fn order(&self) -> u64 {
        self.n
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.c
    }

    pub fn rational(x: Q) -> Self {
        Cyclo { n: 1, c: vec![x] }
    }

    pub fn int(k: i64) -> Self {
        Self::rational(q_int(k))
    }

    /// ζ_n^k.
    pub fn zeta(n: u64, k: i64) -> Self {
        assert!(n >= 1);
        let e = k.rem_euclid(n as i64) as usize;
        let mut poly = vec![Q::zero(); e + 1];
        poly[e] = Q::one();
        Self::reduce(n, poly)
    }

    fn reduce(n: u64, mut poly: Vec<Q>) -> Self {
        let phi = cyclotomic_poly(n);
        let d = phi.len() - 1;
        if poly.len() > d {
            for i in (d..poly.len()).rev() {
                let c = poly[i].clone();
                if Zero::is_zero(&c) {
                    continue;
                }
                for (j, &pj) in phi.iter().enumerate() {
                    let idx = i - d + j;
                    poly[idx] = &poly[idx] - &c * q_int(pj);
                }
            }
            poly.truncate(d);
        }
        poly.resize(d, Q::zero());
        Cyclo { n, c: poly }
    }

    /// Re-expresses the element in Q(ζ_m) for n | m.
    pub fn lift(&self, m: u64) -> Self {
        if m == self.n {
            return self.clone();
        }
        assert!(m % self.n == 0, "cannot lift Q(ζ_{}) into Q(ζ_{})", self.n, m);
        let step = (m / self.n) as usize;
        let mut poly = vec![Q::zero(); step * self.c.len().max(1)];
        for (j, c) in self.c.iter().enumerate() {
            poly[j * step] = c.clone();
        }
        Self::reduce(m, poly)
    }

    fn common(a: &Self, b: &Self) -> (Self, Self) {
        let m = lcm(a.n, b.n);
        (a.lift(m), b.lift(m))
    }

    pub fn as_rational(&self) -> Option<Q> {
        if self.c.iter().skip(1).all(Zero::is_zero) {
            Some(self.c.first().cloned().unwrap_or_else(Q::zero))
        } else {
            None
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        let mut z = Complex64::new(0.0, 0.0);
        for (j, c) in self.c.iter().enumerate() {
            if Zero::is_zero(c) {
                continue;
            }
            let ang = 2.0 * std::f64::consts::PI * j as f64 / self.n as f64;
            z += Complex64::from_polar(q_to_f64(c), ang);
        }
        z
    }

    /// Complex conjugation ζ ↦ ζ^{-1}.
    pub fn conj(&self) -> Self {
        let n = self.n as usize;
        let mut poly = vec![Q::zero(); n.max(1)];
        for (j, c) in self.c.iter().enumerate() {
            let e = (n - j % n) % n;
            poly[e] = &poly[e] + c;
        }
        Self::reduce(self.n, poly)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut r = Cyclo::int(1).lift(self.n);
        let mut b = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                r = r.times(&b);
            }
            b = b.times(&b);
            e >>= 1;
        }
        r
    }

    /// Multiplicative inverse via the regular representation.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero_value() {
            return None;
        }
        if let Some(r) = self.as_rational() {
            return Some(Cyclo::rational(r.recip()));
        }
        let d = self.c.len();
        // Column j of the matrix is self * ζ^j.
        let mut m: Vec<Vec<Q>> = vec![vec![Q::zero(); d + 1]; d];
        for j in 0..d {
            let col = self.times(&Cyclo::zeta(self.n, j as i64));
            for i in 0..d {
                m[i][j] = col.c[i].clone();
            }
        }
        m[0][d] = Q::one();
        for col in 0..d {
            let piv = (col..d).find(|&r| !Zero::is_zero(&m[r][col]))?;
            m.swap(col, piv);
            let inv = m[col][col].recip();
            for k in col..=d {
                m[col][k] = &m[col][k] * &inv;
            }
            for r in 0..d {
                if r != col && !Zero::is_zero(&m[r][col]) {
                    let f = m[r][col].clone();
                    for k in col..=d {
                        let t = &m[col][k] * &f;
                        m[r][k] = &m[r][k] - t;
                    }
                }
            }
        }
        Some(Cyclo {
            n: self.n,
            c: (0..d).map(|i| m[i][d].clone()).collect(),
        })
    }

    pub fn div(&self, other: &Self) -> Option<Self> {
        other.inv().map(|i| self.times(&i))
    }

    /// Smallest n' such that the element lies in Q(ζ_{n'}), when n' | n.
    pub fn minimize(&self) -> Self {
        for d in divisors(self.n) {
            if d == self.n {
                break;
            }
            if euler_phi(d) > euler_phi(self.n) {
                continue;
            }
            // Try to find a preimage: only the coefficients at multiples of
            // n/d may be nonzero after lifting, so test by round trip.
            let cand = self.restrict_to(d);
            if let Some(c) = cand {
                return c;
            }
        }
        self.clone()
    }

    fn restrict_to(&self, d: u64) -> Option<Self> {
        let phi_d = euler_phi(d) as usize;
        // Solve for coefficients of ζ_d^j, j < φ(d), by linear algebra on the
        // lifted basis.
        let basis: Vec<Cyclo> = (0..phi_d).map(|j| Cyclo::zeta(d, j as i64).lift(self.n)).collect();
        let rows = self.c.len();
        let mut m: Vec<Vec<Q>> = vec![vec![Q::zero(); phi_d + 1]; rows];
        for i in 0..rows {
            for (j, b) in basis.iter().enumerate() {
                m[i][j] = b.c[i].clone();
            }
            m[i][phi_d] = self.c[i].clone();
        }
        let mut row = 0;
        let mut pivcols = Vec::new();
        for col in 0..phi_d {
            if let Some(piv) = (row..rows).find(|&r| !Zero::is_zero(&m[r][col])) {
                m.swap(row, piv);
                let inv = m[row][col].recip();
                for k in col..=phi_d {
                    m[row][k] = &m[row][k] * &inv;
                }
                for r in 0..rows {
                    if r != row && !Zero::is_zero(&m[r][col]) {
                        let f = m[r][col].clone();
                        for k in col..=phi_d {
                            let t = &m[row][k] * &f;
                            m[r][k] = &m[r][k] - t;
                        }
                    }
                }
                pivcols.push(col);
                row += 1;
            }
        }
        if (row..rows).any(|r| !Zero::is_zero(&m[r][phi_d])) {
            return None;
        }
        let mut c = vec![Q::zero(); phi_d];
        for (r, &col) in pivcols.iter().enumerate() {
            c[col] = m[r][phi_d].clone();
        }
        Some(Cyclo { n: d, c })
    }
}

impl PartialEq for Cyclo {
    fn eq(&self, other: &Self) -> bool {
        if self.n == other.n {
            return self.c == other.c;
        }
        let (a, b) = Cyclo::common(self, other);
        a.c == b.c
    }
}

impl Scalar for Cyclo {
    fn zero_value() -> Self {
        Cyclo::int(0)
    }
    fn one_value() -> Self {
        Cyclo::int(1)
    }
    fn plus(&self, other: &Self) -> Self {
        let (a, b) = Cyclo::common(self, other);
        Cyclo {
            n: a.n,
            c: a.c.iter().zip(b.c.iter()).map(|(x, y)| x + y).collect(),
        }
    }
    fn minus(&self, other: &Self) -> Self {
        self.plus(&other.negate())
    }
    fn times(&self, other: &Self) -> Self {
        if let Some(r) = other.as_rational() {
            return Cyclo {
                n: self.n,
                c: self.c.iter().map(|x| x * &r).collect(),
            };
        }
        if let Some(r) = self.as_rational() {
            return Cyclo {
                n: other.n,
                c: other.c.iter().map(|x| x * &r).collect(),
            };
        }
        let (a, b) = Cyclo::common(self, other);
        let mut poly = vec![Q::zero(); a.c.len() + b.c.len()];
        for (i, x) in a.c.iter().enumerate() {
            if Zero::is_zero(x) {
                continue;
            }
            for (j, y) in b.c.iter().enumerate() {
                if Zero::is_zero(y) {
                    continue;
                }
                poly[i + j] = &poly[i + j] + x * y;
            }
        }
        Cyclo::reduce(a.n, poly)
    }
    fn negate(&self) -> Self {
        Cyclo {
            n: self.n,
            c: self.c.iter().map(|x| -x).collect(),
        }
    }
    fn is_zero_value(&self) -> bool {
        self.c.iter().all(Zero::is_zero)
    }
    fn from_q(x: Q) -> Self {
        Cyclo::rational(x)
    }
}

/// Element a + b·√d of a quadratic extension of a cyclotomic field.
///
/// When `d` is a rational square the element is folded back into the base
/// field at construction, so `b ≠ 0` always means a genuine extension.
#[derive(Clone, Debug)]
pub struct QuadExt {
    pub a: Cyclo,
    pub b: Cyclo,
    pub d: Cyclo,
}

fn rational_sqrt(x: &Q) -> Option<Q> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    if &(&n * &n) == x.numer() && &(&d * &d) == x.denom() {
        Some(Q::new(n, d))
    } else {
        None
    }
}

impl QuadExt {
    pub fn base(a: Cyclo) -> Self {
        QuadExt {
            a,
            b: Cyclo::int(0),
            d: Cyclo::int(0),
        }
    }

    pub fn new(a: Cyclo, b: Cyclo, d: Cyclo) -> Self {
        if b.is_zero_value() || d.is_zero_value() {
            return QuadExt::base(a);
        }
        if let Some(r) = d.as_rational().as_ref().and_then(rational_sqrt) {
            return QuadExt::base(a.plus(&b.scale(&r)));
        }
        QuadExt { a, b, d }
    }

    /// The square root of `d` as an element of the extension.
    pub fn sqrt_of(d: Cyclo) -> Self {
        QuadExt::new(Cyclo::int(0), Cyclo::int(1), d)
    }

    pub fn in_base(&self) -> Option<Cyclo> {
        if self.b.is_zero_value() {
            Some(self.a.clone())
        } else {
            None
        }
    }

    pub fn conj_sqrt(&self) -> Self {
        QuadExt {
            a: self.a.clone(),
            b: self.b.negate(),
            d: self.d.clone(),
        }
    }

    pub fn norm(&self) -> Cyclo {
        self.a.times(&self.a).minus(&self.b.times(&self.b).times(&self.d))
    }

    pub fn inv(&self) -> Option<Self> {
        let nrm = self.norm().inv()?;
        let c = self.conj_sqrt();
        Some(QuadExt::new(c.a.times(&nrm), c.b.times(&nrm), c.d))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut r = QuadExt::one_value();
        for _ in 0..e {
            r = r.times(self);
        }
        r
    }

    pub fn to_complex(&self) -> Complex64 {
        self.a.to_complex() + self.b.to_complex() * self.d.to_complex().sqrt()
    }

    fn join_d(&self, other: &Self) -> Cyclo {
        if self.b.is_zero_value() {
            return other.d.clone();
        }
        if other.b.is_zero_value() {
            return self.d.clone();
        }
        assert!(
            self.d == other.d,
            "mixing quadratic extensions with radicands {} and {}",
            self.d,
            other.d
        );
        self.d.clone()
    }
}

impl PartialEq for QuadExt {
    fn eq(&self, other: &Self) -> bool {
        if self.b.is_zero_value() && other.b.is_zero_value() {
            return self.a == other.a;
        }
        self.a == other.a && self.b == other.b && self.d == other.d
    }
}

impl Scalar for QuadExt {
    fn zero_value() -> Self {
        QuadExt::base(Cyclo::int(0))
    }
    fn one_value() -> Self {
        QuadExt::base(Cyclo::int(1))
    }
    fn plus(&self, other: &Self) -> Self {
        let d = self.join_d(other);
        QuadExt::new(self.a.plus(&other.a), self.b.plus(&other.b), d)
    }
    fn minus(&self, other: &Self) -> Self {
        self.plus(&other.negate())
    }
    fn times(&self, other: &Self) -> Self {
        let d = self.join_d(other);
        let a = self.a.times(&other.a).plus(&self.b.times(&other.b).times(&d));
        let b = self.a.times(&other.b).plus(&self.b.times(&other.a));
        QuadExt::new(a, b, d)
    }
    fn negate(&self) -> Self {
        QuadExt {
            a: self.a.negate(),
            b: self.b.negate(),
            d: self.d.clone(),
        }
    }
    fn is_zero_value(&self) -> bool {
        self.a.is_zero_value() && self.b.is_zero_value()
    }
    fn from_q(x: Q) -> Self {
        QuadExt::base(Cyclo::rational(x))
    }
}

impl From<Cyclo> for QuadExt {
    fn from(c: Cyclo) -> Self {
        QuadExt::base(c)
    }
}

/// The rational with denominator at most `max_den` closest to x along its
/// continued-fraction convergents, if one lies within `tol`.
pub fn recognize_rational(x: f64, max_den: i64, tol: f64) -> Option<Q> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let (h2, k2) = (ai * h1 + h0, ai * k1 + k0);
        if k2 > max_den as i128 {
            break;
        }
        if (h2 as f64 / k2 as f64 - x).abs() <= tol {
            return Some(Q::new(BigInt::from(h2), BigInt::from(k2)));
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let frac = r - a;
        if frac.abs() < 1e-300 {
            break;
        }
        r = 1.0 / frac;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomic_polys() {
        assert_eq!(cyclotomic_poly(1), vec![-1, 1]);
        assert_eq!(cyclotomic_poly(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_poly(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_poly(12), vec![1, 0, -1, 0, 1]);
    }

    #[test]
    fn roots_of_unity_arithmetic() {
        let i = Cyclo::zeta(4, 1);
        assert_eq!(i.times(&i), Cyclo::int(-1));
        let w = Cyclo::zeta(3, 1);
        let s = Cyclo::int(1).plus(&w).plus(&w.times(&w));
        assert!(s.is_zero_value());
        // ζ_6 lifted against ζ_4 lives in Q(ζ_12)
        let z6 = Cyclo::zeta(6, 1);
        assert_eq!(z6.times(&i).pow(12), Cyclo::int(1));
        assert_eq!(Cyclo::zeta(2, 1), Cyclo::int(-1));
    }

    #[test]
    fn inverse_and_conj() {
        let x = Cyclo::int(2).plus(&Cyclo::zeta(5, 1));
        let y = x.inv().unwrap();
        assert_eq!(x.times(&y), Cyclo::int(1));
        let z = Cyclo::zeta(7, 3);
        assert_eq!(z.times(&z.conj()), Cyclo::int(1));
        let c = x.to_complex() * y.to_complex();
        assert!((c.re - 1.0).abs() < 1e-12 && c.im.abs() < 1e-12);
    }

    #[test]
    fn minimize_finds_subfield() {
        let i = Cyclo::zeta(4, 1).lift(12);
        let m = i.minimize();
        assert_eq!(m.order(), 4);
        assert_eq!(m, Cyclo::zeta(4, 1));
    }

    #[test]
    fn quadratic_extension() {
        // (-1+i)(-1-i) = 2 with i = sqrt(-1) represented as a radical.
        let d = Cyclo::int(-1);
        let a = QuadExt::new(Cyclo::int(-1), Cyclo::int(1), d.clone());
        let b = a.conj_sqrt();
        assert_eq!(a.times(&b), QuadExt::from_q(q_int(2)));
        assert_eq!(a.plus(&b), QuadExt::from_q(q_int(-2)));
        let inv = a.inv().unwrap();
        assert_eq!(a.times(&inv), QuadExt::one_value());
        // square radicand folds back
        let r = QuadExt::new(Cyclo::int(1), Cyclo::int(1), Cyclo::int(9));
        assert_eq!(r, QuadExt::from_q(q_int(4)));
    }
}
