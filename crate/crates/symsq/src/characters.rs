//! Dirichlet characters stored as exact value tables.
//!
//! A character of modulus N with values in μ_n is a table `a ↦ k` meaning
//! χ(a) = ζ_n^k, with `None` on residues sharing a factor with N.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{
    factorize, field_discriminant, gcd, is_fundamental_discriminant, kronecker, lcm, primitive_root,
    primitive_root_prime_power, squarefree_part,
};
use crate::exact::{Cyclo, Scalar, Q};
use crate::padic::{p_pow, split_p, teichmuller, PadicNumber, ZpRing};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CharacterError {
    #[error("generator values are inconsistent at residue {0}")]
    Inconsistent(u64),
    #[error("generators do not span the unit group mod {0}")]
    NotSpanning(u64),
    #[error("generator {0} is not a unit")]
    NotUnit(u64),
    #[error("conductor {0} and discriminant {1} are not coprime")]
    NotCoprime(u64, i64),
    #[error("{0} is not a fundamental discriminant")]
    NotFundamental(i64),
    #[error("cannot parse character spec '{0}'")]
    BadSpec(String),
    #[error("modulus must be positive")]
    BadModulus,
}

/// JSON form: values on generators as exponents num/den of e^{2πi·num/den}.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacterSpec {
    pub modulus: u64,
    pub values: Vec<(u64, i64, i64)>,
}

#[derive(Debug, Clone)]
pub struct DirichletCharacter {
    modulus: u64,
    order: u64,
    table: Vec<Option<u64>>,
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus
            && (0..self.modulus).all(|a| self.value_frac(a as i64) == other.value_frac(a as i64))
    }
}

/// Canonical generators of (Z/N)^*, each lifted by CRT, with their orders.
pub fn unit_group_generators(n: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for (p, e) in factorize(n) {
        let pe = p.pow(e);
        let other = n / pe;
        let lift = |g: u64| -> u64 {
            // x ≡ g mod p^e, x ≡ 1 mod other
            (0..other.max(1))
                .map(|t| g + t * pe)
                .find(|x| x % other.max(1) == 1 % other.max(1))
                .unwrap()
                % n
        };
        if p == 2 {
            if e >= 2 {
                out.push((lift(pe - 1), 2));
            }
            if e >= 3 {
                out.push((lift(5), 1 << (e - 2)));
            }
        } else {
            out.push((lift(primitive_root_prime_power(p, e)), pe / p * (p - 1)));
        }
    }
    out
}

fn reduce_frac(num: i64, den: i64) -> (i64, i64) {
    let g = gcd(num, den).abs().max(1);
    let (mut n, mut d) = (num / g, den / g);
    if d < 0 {
        n = -n;
        d = -d;
    }
    (n.rem_euclid(d), d)
}

impl DirichletCharacter {
    pub fn trivial(modulus: u64) -> Self {
        let table = (0..modulus)
            .map(|a| {
                if gcd(a as i64, modulus as i64) == 1 || modulus == 1 {
                    Some(0)
                } else {
                    None
                }
            })
            .collect();
        DirichletCharacter {
            modulus,
            order: 1,
            table,
        }
    }

    /// Builds the table from values on generators; the generators must span
    /// the unit group and the values must define a homomorphism.
    pub fn from_generator_values(modulus: u64, values: &[(u64, i64, i64)]) -> Result<Self, CharacterError> {
        if modulus == 0 {
            return Err(CharacterError::BadModulus);
        }
        let mut order = 1u64;
        let mut reduced = Vec::new();
        for &(g, num, den) in values {
            if gcd(g as i64, modulus as i64) != 1 {
                return Err(CharacterError::NotUnit(g));
            }
            let (n, d) = reduce_frac(num, den);
            order = lcm(order, d as u64);
            reduced.push((g % modulus, n, d));
        }
        let mut table: Vec<Option<u64>> = vec![None; modulus as usize];
        let start = 1 % modulus;
        table[start as usize] = Some(0);
        let mut queue = vec![start];
        while let Some(a) = queue.pop() {
            let ka = table[a as usize].unwrap();
            for &(g, n, d) in &reduced {
                let b = (a * g) % modulus;
                let kg = (n as u64) * (order / d as u64);
                let kb = (ka + kg) % order;
                match table[b as usize] {
                    None => {
                        table[b as usize] = Some(kb);
                        queue.push(b);
                    }
                    Some(prev) if prev != kb => return Err(CharacterError::Inconsistent(b)),
                    _ => {}
                }
            }
        }
        for a in 0..modulus {
            let unit = gcd(a as i64, modulus as i64) == 1;
            if unit && table[a as usize].is_none() {
                return Err(CharacterError::NotSpanning(modulus));
            }
        }
        Ok(DirichletCharacter { modulus, order, table }.normalize_order())
    }

    pub fn from_spec(spec: &CharacterSpec) -> Result<Self, CharacterError> {
        Self::from_generator_values(spec.modulus, &spec.values)
    }

    /// Builds a character from a function returning exponents of ζ_order.
    pub fn from_fn(modulus: u64, order: u64, f: impl Fn(u64) -> u64) -> Self {
        let table = (0..modulus)
            .map(|a| {
                if gcd(a as i64, modulus as i64) == 1 || modulus == 1 {
                    Some(f(a) % order)
                } else {
                    None
                }
            })
            .collect();
        DirichletCharacter { modulus, order, table }.normalize_order()
    }

    /// a ↦ (D/a), primitive of conductor |D| for a fundamental discriminant D.
    pub fn kronecker_char(d: i64) -> Self {
        if d == 1 {
            return Self::trivial(1);
        }
        let m = d.unsigned_abs();
        Self::from_fn(m, 2, |a| if kronecker(d, a as i64) == -1 { 1 } else { 0 })
    }

    /// ω^i: the Teichmüller character mod p raised to the i-th power, with
    /// ω(g) = ζ_{p−1} for g the least primitive root.
    pub fn teichmuller_power(p: u64, i: i64) -> Self {
        let g = primitive_root(p);
        let order = p - 1;
        let e = i.rem_euclid(order as i64) as u64;
        let mut logs = vec![0u64; p as usize];
        let mut x = 1u64;
        for k in 0..order {
            logs[x as usize] = k;
            x = x * g % p;
        }
        Self::from_fn(p, order, |a| logs[a as usize] * e)
    }

    fn normalize_order(mut self) -> Self {
        // shrink the value group to the true order of the character
        let mut g = self.order;
        for k in self.table.iter().flatten() {
            g = num_integer::gcd(g, *k);
        }
        let g = num_integer::gcd(g, self.order).max(1);
        if g > 1 {
            self.order /= g;
            for k in self.table.iter_mut().flatten() {
                *k /= g;
            }
        }
        if self.order == 0 {
            self.order = 1;
        }
        self
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// Exponent k with χ(a) = ζ_order^k, or None when gcd(a, N) > 1.
    pub fn exponent(&self, a: i64) -> Option<u64> {
        let r = a.rem_euclid(self.modulus as i64) as usize;
        self.table[r]
    }

    /// χ(a) as a reduced fraction of a full turn, None off units.
    pub fn value_frac(&self, a: i64) -> Option<(u64, u64)> {
        self.exponent(a).map(|k| {
            let g = num_integer::gcd(k, self.order).max(1);
            if k == 0 {
                (0, 1)
            } else {
                (k / g, self.order / g)
            }
        })
    }

    pub fn value(&self, a: i64) -> Cyclo {
        match self.exponent(a) {
            None => Cyclo::int(0),
            Some(k) => Cyclo::zeta(self.order, k as i64),
        }
    }

    pub fn value_complex(&self, a: i64) -> Complex64 {
        match self.exponent(a) {
            None => Complex64::new(0.0, 0.0),
            Some(k) => {
                let ang = 2.0 * std::f64::consts::PI * k as f64 / self.order as f64;
                Complex64::from_polar(1.0, ang)
            }
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.table.iter().flatten().all(|&k| k == 0)
    }

    /// χ(−1) = (−1)^parity.
    pub fn parity(&self) -> u32 {
        match self.exponent(-1) {
            Some(k) if k != 0 => 1,
            _ => 0,
        }
    }

    pub fn is_even(&self) -> bool {
        self.parity() == 0
    }

    pub fn conductor(&self) -> u64 {
        let n = self.modulus;
        for d in crate::arith::divisors(n) {
            let ok =
                (0..n).all(|a| a % d != 1 % d || gcd(a as i64, n as i64) != 1 || self.table[a as usize] == Some(0));
            if ok {
                return d;
            }
        }
        n
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor() == self.modulus
    }

    pub fn primitive_part(&self) -> Self {
        let f = self.conductor();
        if f == self.modulus {
            return self.clone();
        }
        let table = (0..f)
            .map(|b| {
                if gcd(b as i64, f as i64) != 1 && f != 1 {
                    return None;
                }
                let mut a = b;
                while gcd(a as i64, self.modulus as i64) != 1 {
                    a += f;
                }
                self.table[a as usize]
            })
            .collect();
        DirichletCharacter {
            modulus: f,
            order: self.order,
            table,
        }
        .normalize_order()
    }

    /// Value of the primitive character attached to χ: zero exactly at
    /// primes dividing the conductor.
    pub fn primitive_value(&self, a: i64) -> Cyclo {
        self.primitive_part().value(a)
    }

    /// The same character viewed modulo a multiple of the modulus.
    pub fn induce(&self, m: u64) -> Self {
        assert!(m % self.modulus == 0);
        let table = (0..m)
            .map(|a| {
                if gcd(a as i64, m as i64) != 1 && m != 1 {
                    None
                } else {
                    self.table[(a % self.modulus) as usize]
                }
            })
            .collect();
        DirichletCharacter {
            modulus: m,
            order: self.order,
            table,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let m = lcm(self.modulus, other.modulus);
        let a = self.induce(m);
        let b = other.induce(m);
        let order = lcm(a.order, b.order);
        let table = (0..m as usize)
            .map(|i| match (a.table[i], b.table[i]) {
                (Some(x), Some(y)) => Some((x * (order / a.order) + y * (order / b.order)) % order),
                _ => None,
            })
            .collect();
        DirichletCharacter {
            modulus: m,
            order,
            table,
        }
        .normalize_order()
    }

    pub fn inverse(&self) -> Self {
        let table = self
            .table
            .iter()
            .map(|k| k.map(|k| (self.order - k) % self.order))
            .collect();
        DirichletCharacter {
            modulus: self.modulus,
            order: self.order,
            table,
        }
    }

    pub fn pow(&self, e: i64) -> Self {
        let o = self.order as i64;
        let table = self
            .table
            .iter()
            .map(|k| k.map(|k| ((k as i64 * e).rem_euclid(o)) as u64))
            .collect();
        DirichletCharacter {
            modulus: self.modulus,
            order: self.order,
            table,
        }
        .normalize_order()
    }

    /// Values on the canonical generators, for serialization.
    pub fn to_spec(&self) -> CharacterSpec {
        let values = unit_group_generators(self.modulus)
            .into_iter()
            .map(|(g, _)| {
                let (n, d) = self.value_frac(g as i64).unwrap();
                (g, n as i64, d as i64)
            })
            .collect();
        CharacterSpec {
            modulus: self.modulus,
            values,
        }
    }

    /// A `gens:` spec string accepted by [`DirichletCharacter::parse_spec`].
    pub fn spec_string(&self) -> String {
        if self.is_trivial() {
            return format!("trivial:{}", self.modulus);
        }
        let vals: Vec<String> = self
            .to_spec()
            .values
            .iter()
            .map(|(g, n, d)| format!("{g}/{n}/{d}"))
            .collect();
        format!("gens:{}:{}", self.modulus, vals.join(","))
    }

    /// Component at a prime q: the character of (Z/q^e)^* obtained by
    /// restricting along the CRT decomposition.
    pub fn component_at(&self, q: u64) -> Self {
        let e = factorize(self.modulus)
            .into_iter()
            .find(|&(p, _)| p == q)
            .map(|(_, e)| e)
            .unwrap_or(0);
        if e == 0 {
            return Self::trivial(1);
        }
        let qe = q.pow(e);
        let other = self.modulus / qe;
        let table = (0..qe)
            .map(|b| {
                if b % q == 0 {
                    return None;
                }
                let a = (0..other.max(1))
                    .map(|t| b + t * qe)
                    .find(|x| x % other.max(1) == 1 % other.max(1))
                    .unwrap();
                self.table[(a % self.modulus) as usize]
            })
            .collect();
        DirichletCharacter {
            modulus: qe,
            order: self.order,
            table,
        }
        .normalize_order()
    }

    pub fn is_ramified_at(&self, q: u64) -> bool {
        self.conductor() % q == 0
    }

    /// Spec strings: `trivial`, `trivial:N`, `quad:D`, `omega:p:i`,
    /// `gens:N:g/num/den,g/num/den`.
    pub fn parse_spec(s: &str) -> Result<Self, CharacterError> {
        let bad = || CharacterError::BadSpec(s.to_string());
        let parts: Vec<&str> = s.trim().split(':').collect();
        match parts.as_slice() {
            ["trivial"] | ["triv"] | ["1"] => Ok(Self::trivial(1)),
            ["trivial", n] => Ok(Self::trivial(n.parse().map_err(|_| bad())?)),
            ["quad", d] => {
                let d: i64 = d.parse().map_err(|_| bad())?;
                if !is_fundamental_discriminant(d) {
                    return Err(CharacterError::NotFundamental(d));
                }
                Ok(Self::kronecker_char(d))
            }
            ["omega", p, i] => {
                let p: u64 = p.parse().map_err(|_| bad())?;
                let i: i64 = i.parse().map_err(|_| bad())?;
                if !crate::arith::is_prime(p) || p < 3 {
                    return Err(bad());
                }
                Ok(Self::teichmuller_power(p, i))
            }
            ["gens", n, vals] => {
                let n: u64 = n.parse().map_err(|_| bad())?;
                let mut v = Vec::new();
                for item in vals.split(',').filter(|x| !x.is_empty()) {
                    let f: Vec<&str> = item.split('/').collect();
                    if f.len() != 3 {
                        return Err(bad());
                    }
                    v.push((
                        f[0].parse().map_err(|_| bad())?,
                        f[1].parse().map_err(|_| bad())?,
                        f[2].parse().map_err(|_| bad())?,
                    ));
                }
                Self::from_generator_values(n, &v)
            }
            _ => Err(bad()),
        }
    }
}

/// ω_ξ: the primitive quadratic character of Q(√ξ).
pub fn quadratic_char_of(xi: &Q) -> DirichletCharacter {
    assert!(!num_traits::Zero::is_zero(xi), "ξ must be nonzero");
    let n: i64 = xi.numer().try_into().expect("numerator fits in i64");
    let d: i64 = xi.denom().try_into().expect("denominator fits in i64");
    let s = squarefree_part(n * d);
    DirichletCharacter::kronecker_char(field_discriminant(s))
}

#[derive(Debug, Clone, Serialize)]
pub struct GaussSumValue {
    #[serde(skip)]
    pub exact: Cyclo,
    pub exact_text: String,
    pub re: f64,
    pub im: f64,
    pub modulus: u64,
}

impl GaussSumValue {
    pub fn complex(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// G(χ) = Σ_{a mod f} χ(a) e^{2πi a/f} on the primitive part of χ.
pub fn gauss_sum(chi: &DirichletCharacter) -> GaussSumValue {
    let prim = chi.primitive_part();
    let f = prim.modulus();
    let mut exact = Cyclo::int(0);
    let mut z = Complex64::new(0.0, 0.0);
    for a in 0..f {
        if let Some(k) = prim.exponent(a as i64) {
            let term = Cyclo::zeta(prim.order(), k as i64).times(&Cyclo::zeta(f, a as i64));
            exact = exact.plus(&term);
            let ang = 2.0 * std::f64::consts::PI * (k as f64 / prim.order() as f64 + a as f64 / f as f64);
            z += Complex64::from_polar(1.0, ang);
        }
    }
    GaussSumValue {
        exact_text: exact.to_string(),
        exact,
        re: z.re,
        im: z.im,
        modulus: chi.modulus(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GaussCheckReport {
    pub conductor: u64,
    pub discriminant: i64,
    pub ratio_re: f64,
    pub ratio_im: f64,
    /// k with ratio = i^k, when the ratio is a fourth root of unity.
    pub i_power: Option<u32>,
    /// Order of the ratio as a root of unity (None if not within tolerance).
    pub root_order: Option<u32>,
    pub abs_minus_one: f64,
    /// ω_d(f_χ)·G(ω_d)/√|d| from the classical product formula.
    pub predicted_i_power: u32,
    pub matches_prediction: bool,
    pub exact_one: bool,
}

/// Compares G(χ)·G(χω_d) with χ(|d|)·G(χ)²·√|d| and reports the unit ratio.
pub fn base_change_gauss_check(chi: &DirichletCharacter, d: i64) -> Result<GaussCheckReport, CharacterError> {
    if !is_fundamental_discriminant(d) {
        return Err(CharacterError::NotFundamental(d));
    }
    let f = chi.conductor();
    if gcd(f as i64, d) != 1 {
        return Err(CharacterError::NotCoprime(f, d));
    }
    let omega_d = DirichletCharacter::kronecker_char(d);
    let g_chi = gauss_sum(chi).complex();
    let g_tw = gauss_sum(&chi.primitive_part().mul(&omega_d)).complex();
    let lhs = g_chi * g_tw;
    let rhs = chi.primitive_part().value_complex(d.abs()) * g_chi * g_chi * (d.abs() as f64).sqrt();
    let ratio = lhs / rhs;
    let mut i_power = None;
    let mut root_order = None;
    for k in 0..8u32 {
        let z = Complex64::from_polar(1.0, std::f64::consts::PI * k as f64 / 4.0);
        if (ratio - z).norm() < 1e-9 {
            if k % 2 == 0 {
                i_power = Some(k / 2);
            }
            let g = num_integer::gcd(k, 8);
            root_order = Some(8 / g.max(1));
            if k == 0 {
                root_order = Some(1);
            }
        }
    }
    let sign = kronecker(d, f as i64);
    let mut pred = if sign == -1 { 2 } else { 0 };
    if d < 0 {
        pred += 1;
    }
    let pred = pred % 4;
    Ok(GaussCheckReport {
        conductor: f,
        discriminant: d,
        ratio_re: ratio.re,
        ratio_im: ratio.im,
        i_power,
        root_order,
        abs_minus_one: (ratio.norm() - 1.0).abs(),
        predicted_i_power: pred,
        matches_prediction: i_power == Some(pred),
        exact_one: i_power == Some(0),
    })
}

/// p-adic image of an element of Q(ζ_n) with n | p − 1, using
/// ζ_n ↦ ω(g)^{(p−1)/n} for g the least primitive root mod p.
pub fn embed_cyclo(x: &Cyclo, ring: &ZpRing) -> Option<BigInt> {
    let x = if (ring.p - 1) % x.order() == 0 {
        x.clone()
    } else {
        x.minimize()
    };
    let n = x.order();
    if (ring.p - 1) % n != 0 {
        return None;
    }
    let g = primitive_root(ring.p);
    let w = teichmuller(&BigInt::from(g), ring.p, ring.prec).ok()?;
    let zeta = ring.reduce(&w.residue()?.modpow(&BigInt::from((ring.p - 1) / n), &ring.modulus));
    let mut acc = BigInt::from(0);
    let mut zp = BigInt::from(1);
    for c in x.coeffs() {
        let cv = ring.from_rational(c)?;
        acc = ring.reduce(&(acc + cv * &zp));
        zp = ring.reduce(&(zp * &zeta));
    }
    Some(acc)
}

/// p-adic image of a cyclotomic number whose coefficients may carry p in
/// their denominators, to absolute precision `prec`.
pub fn embed_cyclo_padic(x: &Cyclo, p: u64, prec: i64) -> Option<PadicNumber> {
    let k = x.coeffs().iter().map(|c| split_p(c.denom(), p).0).max().unwrap_or(0);
    let y = x.scale(&Q::from_integer(p_pow(p, k)));
    let v = embed_cyclo(&y, &ZpRing::new(p, prec + k))?;
    Some(PadicNumber::from_rational(&Q::new(v, p_pow(p, k)), p, prec))
}

/// Convenience: χ(a) embedded p-adically.
pub fn padic_value(chi: &DirichletCharacter, a: i64, ring: &ZpRing) -> Option<BigInt> {
    embed_cyclo(&chi.value(a), ring)
}

/// Sorted summary used in reports.
pub fn describe(chi: &DirichletCharacter) -> BTreeMap<&'static str, serde_json::Value> {
    let mut m = BTreeMap::new();
    m.insert("modulus", serde_json::json!(chi.modulus()));
    m.insert("conductor", serde_json::json!(chi.conductor()));
    m.insert("order", serde_json::json!(chi.order()));
    m.insert("parity", serde_json::json!(chi.parity()));
    m.insert("values", serde_json::json!(chi.to_spec().values));
    m
}

/// p^k as BigInt, re-exported for callers working with embedded values.
pub fn modulus_power(p: u64, k: i64) -> BigInt {
    p_pow(p, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::q_int;

    #[test]
    fn conductor_examples() {
        assert_eq!(DirichletCharacter::trivial(12).conductor(), 1);
        let chi4 = DirichletCharacter::kronecker_char(-4);
        assert_eq!(chi4.conductor(), 4);
        let chi8 = chi4.induce(8);
        assert_eq!(chi8.conductor(), 4);
        assert_eq!(chi8.primitive_part(), chi4);
        assert_eq!(chi4.primitive_part(), chi4);
    }

    #[test]
    fn gauss_sum_examples() {
        let g5 = gauss_sum(&DirichletCharacter::kronecker_char(5));
        assert!((g5.re - 5f64.sqrt()).abs() < 1e-12 && g5.im.abs() < 1e-12);
        let g3 = gauss_sum(&DirichletCharacter::kronecker_char(-3));
        assert!(g3.re.abs() < 1e-12 && (g3.im - 3f64.sqrt()).abs() < 1e-12);
        let g1 = gauss_sum(&DirichletCharacter::trivial(1));
        assert!((g1.re - 1.0).abs() < 1e-12);
        // exact: G(χ_{-3})² = −3
        let e = g3.exact.times(&g3.exact);
        assert_eq!(e, Cyclo::int(-3));
    }

    #[test]
    fn quadratic_char_of_examples() {
        assert!(quadratic_char_of(&q_int(1)).is_trivial());
        let m = quadratic_char_of(&q_int(-1));
        assert_eq!(m.modulus(), 4);
        assert_eq!(m.parity(), 1);
        assert_eq!(quadratic_char_of(&q_int(12)), quadratic_char_of(&q_int(3)));
    }

    #[test]
    fn spec_round_trip() {
        let chi = DirichletCharacter::teichmuller_power(7, 1);
        let back = DirichletCharacter::from_spec(&chi.to_spec()).unwrap();
        assert_eq!(chi, back);
        let parsed = DirichletCharacter::parse_spec("gens:5:2/1/4").unwrap();
        assert_eq!(parsed.order(), 4);
        assert!(DirichletCharacter::from_generator_values(5, &[(2, 1, 3)]).is_err());
    }

    #[test]
    fn base_change_examples() {
        let r = base_change_gauss_check(&DirichletCharacter::trivial(1), -3).unwrap();
        assert_eq!(r.i_power, Some(1));
        assert!(r.matches_prediction);
        let chi5 = DirichletCharacter::kronecker_char(5);
        let a = base_change_gauss_check(&chi5, -3).unwrap();
        for _ in 0..3 {
            let b = base_change_gauss_check(&chi5, -3).unwrap();
            assert_eq!(a.i_power, b.i_power);
        }
        assert!(a.matches_prediction);
        assert!(base_change_gauss_check(&chi5, 4).is_err());
        assert!(base_change_gauss_check(&chi5, 5).is_err());
    }

    #[test]
    fn teichmuller_embedding_is_consistent() {
        let ring = ZpRing::new(7, 10);
        let w = DirichletCharacter::teichmuller_power(7, 1);
        for a in 1..7i64 {
            let emb = padic_value(&w, a, &ring).unwrap();
            let t = teichmuller(&BigInt::from(a), 7, 10).unwrap();
            assert_eq!(emb, t.residue().unwrap());
        }
    }
}
