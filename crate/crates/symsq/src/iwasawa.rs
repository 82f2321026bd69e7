//! Iwasawa power series over Z_p.
//!
//! Series live in Z_p[[T]] truncated at T^terms with coefficients modulo
//! p^digits. The distinguished generator of 1 + pZ_p is u = 1 + p, the
//! point attached to an integer n is T = u^n − 1, and ⟨z⟩ = z/ω(z).
//!
//! Branch convention for Kubota–Leopoldt series: for η = χω^i even, the
//! series G_{χ,i} satisfies
//!
//!   G(u^n − 1) = (1 − θ(c)c^{n+1})(1 − θ(p)p^n) L(−n, θ),  θ = ηω^{−n−1},
//!
//! where θ is taken primitive and c is the auxiliary regularizing integer.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::arith::{factorize, gcd, primitive_root};
use crate::characters::{embed_cyclo_padic, gauss_sum, DirichletCharacter};
use crate::eigendata::{EigenError, LocalKind, NewformData, Subcase};
use crate::exact::{q_int, Cyclo, Scalar, Q};
use crate::lfun::gamma::{gamma, gamma_r};
use crate::lfun::hecke::hecke_l;
use crate::lfun::sym2_euler_factor;
use crate::lvalues::bernoulli_poly;
use crate::padic::{
    check_prime, hensel_root, p_pow, padic_log, split_p, teichmuller, PadicError, PadicNumber, PrecisionBudget, ZpRing,
};

pub use crate::lvalues::bernoulli_chi;

#[derive(Debug, Error)]
pub enum IwasawaError {
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error("{0} is divisible by p")]
    DivisibleByP(String),
    #[error("linear factor {0} has a non-unit constant term")]
    NonInvertibleFactor(String),
    #[error("{0} does not lie in Q_p")]
    NotInQp(String),
    #[error("minimal-twist eigenvalue missing at q = {0}")]
    MissingMinimalTwist(u64),
    #[error("q = {0} coincides with p")]
    PrimeEqualsP(u64),
    #[error("{0} is not p-integral")]
    NonIntegral(String),
    #[error("constant term is not a unit")]
    NonUnitConstant,
    #[error("precision exhausted: {0}")]
    PrecisionLoss(String),
    #[error("evaluation point must lie in pZ_p")]
    OutsideDisc,
}

/// u = 1 + p.
pub fn generator_u(p: u64) -> BigInt {
    BigInt::from(p + 1)
}

fn padic_u_pow(p: u64, n: i64, prec: i64) -> Result<PadicNumber, IwasawaError> {
    let u = PadicNumber::from_bigint(&generator_u(p), p, prec);
    let v = u.pow(n.unsigned_abs());
    Ok(if n < 0 { v.inv()? } else { v })
}

/// T = u^n − 1.
pub fn weight_point(p: u64, n: i64, prec: i64) -> Result<PadicNumber, IwasawaError> {
    Ok(padic_u_pow(p, n, prec)?.sub(&PadicNumber::from_int(1, p, prec)))
}

/// Character values in Z/p^W via ζ_{p−1} ↦ ω(g) for g the least primitive root.
#[derive(Debug, Clone)]
pub struct CharEmbedding {
    ring: ZpRing,
    zeta: BigInt,
}

impl CharEmbedding {
    pub fn new(p: u64, prec: i64) -> Result<Self, IwasawaError> {
        let w = teichmuller(&BigInt::from(primitive_root(p)), p, prec)?;
        Ok(CharEmbedding {
            ring: ZpRing::new(p, prec),
            zeta: w.residue().unwrap_or_default(),
        })
    }

    pub fn value(&self, chi: &DirichletCharacter, a: i64) -> Result<BigInt, IwasawaError> {
        let p = self.ring.p;
        match chi.value_frac(a) {
            None => Ok(BigInt::zero()),
            Some((k, n)) => {
                if (p - 1) % n != 0 {
                    return Err(IwasawaError::NotInQp(format!("a character of order {n}")));
                }
                Ok(self.zeta.modpow(&BigInt::from(k * ((p - 1) / n)), &self.ring.modulus))
            }
        }
    }

    pub fn padic(&self, chi: &DirichletCharacter, a: i64) -> Result<PadicNumber, IwasawaError> {
        Ok(PadicNumber::from_bigint(
            &self.value(chi, a)?,
            self.ring.p,
            self.ring.prec,
        ))
    }
}

/// ⟨z⟩ = z/ω(z) for a p-adic unit z.
pub fn angle(z: &PadicNumber) -> Result<PadicNumber, IwasawaError> {
    Ok(z.div(&z.teichmuller_of()?)?)
}

// ---------------------------------------------------------------------------
// Series

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearFactor {
    pub q: u64,
    /// s in 1 − s·A_q(Y)^{exp_y}·A_q(X)^{exp_x}, as a residue modulo p^digits.
    pub scalar: String,
    #[serde(skip)]
    pub scalar_value: BigInt,
    pub exp_x: i32,
    pub exp_y: i32,
    pub unit_constant: bool,
}

impl LinearFactor {
    pub fn describe(&self) -> String {
        format!(
            "1 - {}*A_{}(Y)^{}*A_{}(X)^{}",
            self.scalar, self.q, self.exp_y, self.q, self.exp_x
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IwasawaSeries {
    pub p: u64,
    pub digits: i64,
    pub coeffs: Vec<BigInt>,
    pub branch: Option<i64>,
    /// The represented function is this series divided by each listed factor.
    pub poles: Vec<LinearFactor>,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WeierstrassData {
    pub mu: Option<i64>,
    pub lambda: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesDump {
    pub p: u64,
    pub branch: Option<i64>,
    pub digits: i64,
    pub terms: usize,
    /// [valuation, base-p digits of the unit part, least significant first]
    pub coeffs: Vec<(i64, Vec<u64>)>,
    pub mu: Option<i64>,
    pub lambda: Option<usize>,
    pub poles: Vec<String>,
    pub flags: Vec<String>,
}

impl IwasawaSeries {
    pub fn from_coeffs(p: u64, digits: i64, coeffs: Vec<BigInt>) -> Self {
        let ring = ZpRing::new(p, digits);
        IwasawaSeries {
            p,
            digits,
            coeffs: coeffs.iter().map(|c| ring.reduce(c)).collect(),
            branch: None,
            poles: Vec::new(),
            flags: Vec::new(),
        }
    }

    pub fn zero(p: u64, digits: i64, terms: usize) -> Self {
        Self::from_coeffs(p, digits, vec![BigInt::zero(); terms])
    }

    pub fn one(p: u64, digits: i64, terms: usize) -> Self {
        let mut s = Self::zero(p, digits, terms);
        if terms > 0 {
            s.coeffs[0] = BigInt::one();
        }
        s
    }

    pub fn ring(&self) -> ZpRing {
        ZpRing::new(self.p, self.digits)
    }

    pub fn terms(&self) -> usize {
        self.coeffs.len()
    }

    fn combine(&self, o: &Self, f: impl Fn(&BigInt, &BigInt) -> BigInt) -> Self {
        assert_eq!(self.p, o.p);
        let digits = self.digits.min(o.digits);
        let n = self.terms().min(o.terms());
        let coeffs = (0..n).map(|i| f(&self.coeffs[i], &o.coeffs[i])).collect();
        Self::from_coeffs(self.p, digits, coeffs)
    }

    pub fn add(&self, o: &Self) -> Self {
        self.combine(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.combine(o, |a, b| a - b)
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        let mut s = Self::from_coeffs(self.p, self.digits, self.coeffs.iter().map(|x| x * c).collect());
        s.branch = self.branch;
        s
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.p, o.p);
        let digits = self.digits.min(o.digits);
        let ring = ZpRing::new(self.p, digits);
        let n = self.terms().min(o.terms());
        let mut out = vec![BigInt::zero(); n];
        for (i, a) in self.coeffs.iter().take(n).enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().take(n - i).enumerate() {
                out[i + j] += a * b;
            }
        }
        let coeffs = out.iter().map(|c| ring.reduce(c)).collect();
        Self::from_coeffs(self.p, digits, coeffs)
    }

    pub fn inverse(&self) -> Result<Self, IwasawaError> {
        let ring = self.ring();
        let b0 = self
            .coeffs
            .first()
            .and_then(|c| ring.inv(c))
            .ok_or(IwasawaError::NonUnitConstant)?;
        let mut out = vec![b0.clone()];
        for n in 1..self.terms() {
            let mut acc = BigInt::zero();
            for j in 1..=n {
                acc += &self.coeffs[j] * &out[n - j];
            }
            out.push(ring.reduce(&(-acc * &b0)));
        }
        Ok(Self::from_coeffs(self.p, self.digits, out))
    }

    /// Value at a point x of pZ_p. The result carries the precision
    /// min(digits, terms·v(x)) guaranteed by the truncation.
    pub fn eval(&self, x: &PadicNumber) -> Result<PadicNumber, IwasawaError> {
        let v = if x.is_zero() { i64::MAX / 4 } else { x.valuation() };
        if v < 1 {
            return Err(IwasawaError::OutsideDisc);
        }
        let prec = self.digits.min(v.saturating_mul(self.terms() as i64));
        let x = x.with_precision(self.digits);
        let mut acc = PadicNumber::zero(self.p, self.digits);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(&x).add(&PadicNumber::from_bigint(c, self.p, self.digits));
        }
        Ok(acc.with_precision(prec))
    }

    /// Value at u^n − 1.
    pub fn eval_at(&self, n: i64) -> Result<PadicNumber, IwasawaError> {
        self.eval(&weight_point(self.p, n, self.digits + 2)?)
    }

    pub fn weierstrass(&self) -> WeierstrassData {
        let ring = self.ring();
        let mut mu = None;
        let mut lambda = None;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let v = ring.valuation(c);
            if mu.is_none_or(|m| v < m) {
                mu = Some(v);
                lambda = Some(i);
            }
        }
        WeierstrassData { mu, lambda }
    }

    /// Agreement modulo (p^digits, T^terms).
    pub fn agrees(&self, o: &Self, digits: i64, terms: usize) -> bool {
        let m = p_pow(self.p, digits);
        (0..terms).all(|i| match (self.coeffs.get(i), o.coeffs.get(i)) {
            (Some(a), Some(b)) => (a - b).mod_floor(&m).is_zero(),
            _ => false,
        })
    }

    pub fn dump(&self) -> SeriesDump {
        let w = self.weierstrass();
        SeriesDump {
            p: self.p,
            branch: self.branch,
            digits: self.digits,
            terms: self.terms(),
            coeffs: self
                .coeffs
                .iter()
                .map(|c| {
                    let x = PadicNumber::from_bigint(c, self.p, self.digits);
                    if x.is_zero() {
                        (self.digits, Vec::new())
                    } else {
                        (x.valuation(), x.digits())
                    }
                })
                .collect(),
            mu: w.mu,
            lambda: w.lambda,
            poles: self.poles.iter().map(|f| f.describe()).collect(),
            flags: self.flags.clone(),
        }
    }
}

// ---------------------------------------------------------------------------
// A_z(X) = (1+X)^{log_p z / log_p u}

fn fact_valuation(n: usize, p: u64) -> i64 {
    let mut v = 0;
    let mut k = p as usize;
    while k <= n {
        v += (n / k) as i64;
        k *= p as usize;
    }
    v
}

/// Σ binom(a, j) X^j for a ∈ Z_p known to absolute precision a.precision().
fn binomial_series(a: &PadicNumber, digits: i64, terms: usize) -> Result<IwasawaSeries, IwasawaError> {
    let p = a.prime();
    let w = a.precision();
    let loss = fact_valuation(terms.saturating_sub(1), p);
    if w - loss < digits {
        return Err(IwasawaError::PrecisionLoss(format!(
            "exponent known to {w} digits, need {}",
            digits + loss
        )));
    }
    let big = p_pow(p, w);
    let ring = ZpRing::new(p, digits);
    let a_int = a
        .residue()
        .ok_or_else(|| IwasawaError::NonIntegral("exponent".into()))?;
    let mut num = BigInt::one();
    let mut fv = 0i64;
    let mut fu = BigInt::one();
    let mut out = vec![BigInt::one()];
    for j in 1..terms {
        num = (num * (&a_int - BigInt::from(j - 1))).mod_floor(&big);
        let (v, r) = split_p(&BigInt::from(j), p);
        fv += v;
        fu = (fu * r).mod_floor(&ring.modulus);
        let q = &num / p_pow(p, fv);
        let inv = ring.inv(&fu).expect("unit");
        out.push(ring.reduce(&(q * inv)));
    }
    Ok(IwasawaSeries::from_coeffs(p, digits, out))
}

/// log_p(z)/log_p(u) for a p-adic unit z, at absolute precision `prec`.
pub fn log_ratio(z: &PadicNumber, prec: i64) -> Result<PadicNumber, IwasawaError> {
    let p = z.prime();
    if !z.is_unit() {
        return Err(IwasawaError::DivisibleByP(z.to_string()));
    }
    let lz = padic_log(&z.with_precision(prec + 1))?;
    let lu = padic_log(&PadicNumber::from_bigint(&generator_u(p), p, prec + 1))?;
    Ok(lz.div(&lu)?.with_precision(prec))
}

/// A_z(X) for a p-adic unit z.
pub fn a_char_series(z: &PadicNumber, budget: &PrecisionBudget) -> Result<IwasawaSeries, IwasawaError> {
    a_power_series(z, 1, budget.padic_digits as i64, budget.series_terms)
}

/// A_z(X) for an integer z prime to p.
pub fn a_char_series_int(z: i64, p: u64, budget: &PrecisionBudget) -> Result<IwasawaSeries, IwasawaError> {
    if z.rem_euclid(p as i64) == 0 {
        return Err(IwasawaError::DivisibleByP(z.to_string()));
    }
    let digits = budget.padic_digits as i64;
    let w = digits + fact_valuation(budget.series_terms, p) + 4;
    a_char_series(&PadicNumber::from_int(z, p, w), budget)
}

/// A_z(X)^e.
fn a_power_series(z: &PadicNumber, e: i64, digits: i64, terms: usize) -> Result<IwasawaSeries, IwasawaError> {
    let p = z.prime();
    let w = digits + fact_valuation(terms, p) + 2;
    let a = log_ratio(z, w.min(z.precision() - 1))?;
    let a = a.mul(&PadicNumber::from_int(e, p, w));
    binomial_series(&a, digits, terms)
}

// ---------------------------------------------------------------------------
// Kubota–Leopoldt

const NODE_OFFSET: i64 = 5;

#[derive(Debug, Clone)]
pub struct KubotaLeopoldt {
    /// G including the c-regularization; integral.
    pub series: IwasawaSeries,
    /// 1 − η(c)⟨c⟩A_c(T), whose value at u^n − 1 is the factor 1 − θ(c)c^{n+1}.
    pub c_factor: IwasawaSeries,
    pub c: i64,
    pub branch: i64,
    pub odd: bool,
}

impl KubotaLeopoldt {
    /// (1 − θ(p)p^n)L(−n, θ) at θ = ηω^{−n−1}, from the series.
    pub fn interpolated_value(&self, n: i64) -> Result<PadicNumber, IwasawaError> {
        let g = self.series.eval_at(n)?;
        let c = self.c_factor.eval_at(n)?;
        Ok(g.div(&c)?)
    }
}

/// The auxiliary integer c: prime to f·p with ⟨c⟩ a topological generator.
pub fn auxiliary_c(p: u64, conductor: u64) -> i64 {
    let p2 = (p * p) as i128;
    (2..)
        .find(|&c: &i64| {
            gcd(c, (conductor * p) as i64) == 1 && {
                let mut x = 1i128;
                for _ in 0..p - 1 {
                    x = x * c as i128 % p2;
                }
                x != 1
            }
        })
        .unwrap()
}

/// f^n Σ_{a ≤ f} θ(a) B_{n+1}(a/f) = B_{n+1,θ}, in Q_p.
fn bernoulli_padic(
    theta: &DirichletCharacter,
    n1: usize,
    emb: &CharEmbedding,
    prec: i64,
) -> Result<PadicNumber, IwasawaError> {
    let p = emb.ring.p;
    let f = theta.modulus();
    let fpow = q_int(f as i64).pow(n1 as i32 - 1);
    let mut acc = PadicNumber::zero(p, prec);
    for a in 1..=f {
        let v = emb.value(theta, a as i64)?;
        if v.is_zero() {
            continue;
        }
        let b = bernoulli_poly(n1, &Q::new(BigInt::from(a), BigInt::from(f))) * &fpow;
        acc = acc.add(&PadicNumber::from_bigint(&v, p, prec).mul(&PadicNumber::from_rational(&b, p, prec)));
    }
    Ok(acc)
}

fn kl_node_value(
    eta: &DirichletCharacter,
    n: i64,
    c: i64,
    emb: &CharEmbedding,
    prec: i64,
) -> Result<PadicNumber, IwasawaError> {
    let p = emb.ring.p;
    let theta = eta
        .mul(&DirichletCharacter::teichmuller_power(p, -(n + 1)))
        .primitive_part();
    let b = bernoulli_padic(&theta, (n + 1) as usize, emb, prec)?;
    let l = b.neg().div(&PadicNumber::from_int(n + 1, p, prec))?;
    let euler = PadicNumber::from_int(1, p, prec).sub(&emb.padic(&theta, p as i64)?.mul(&PadicNumber::from_bigint(
        &p_pow(p, n),
        p,
        prec,
    )));
    let cz = PadicNumber::from_int(c, p, prec);
    let cfac = PadicNumber::from_int(1, p, prec).sub(&emb.padic(eta, c)?.mul(&angle(&cz)?.pow((n + 1) as u64)));
    Ok(cfac.mul(&euler).mul(&l))
}

/// Newton interpolation through (T_k, V_k); coefficients of T^j for j < terms.
fn newton_series(
    nodes: &[PadicNumber],
    values: &[PadicNumber],
    terms: usize,
) -> Result<Vec<PadicNumber>, IwasawaError> {
    let n = nodes.len();
    let mut d = values.to_vec();
    for k in 1..n {
        for i in (k..n).rev() {
            d[i] = d[i].sub(&d[i - 1]).div(&nodes[i].sub(&nodes[i - k]))?;
        }
    }
    let p = nodes[0].prime();
    let mut poly = vec![d[n - 1].clone()];
    for k in (0..n - 1).rev() {
        let mut next = vec![PadicNumber::zero(p, d[k].precision()); (poly.len() + 1).min(terms)];
        for (j, c) in poly.iter().enumerate() {
            if j + 1 < next.len() {
                next[j + 1] = next[j + 1].add(c);
            }
            next[j] = next[j].sub(&c.mul(&nodes[k]));
        }
        next[0] = next[0].add(&d[k]);
        poly = next;
    }
    Ok(poly)
}

pub fn kubota_leopoldt(
    chi: &DirichletCharacter,
    branch: i64,
    p: u64,
    budget: &PrecisionBudget,
) -> Result<KubotaLeopoldt, IwasawaError> {
    check_prime(p)?;
    let digits = budget.padic_digits as i64;
    let terms = budget.series_terms;
    let eta = chi.mul(&DirichletCharacter::teichmuller_power(p, branch));
    let c = auxiliary_c(p, eta.conductor());
    let emb = CharEmbedding::new(p, digits + 2)?;
    let ec = emb.value(&eta, c)?;
    let cz = PadicNumber::from_int(c, p, digits + fact_valuation(terms, p) + 4);
    let ac = a_char_series(&cz, budget)?;
    let lead = ZpRing::new(p, digits).reduce(&(&ec * angle(&cz)?.residue().unwrap()));
    let c_factor = IwasawaSeries::one(p, digits, terms).sub(&ac.scale(&lead));
    if eta.parity() == 1 {
        let mut series = IwasawaSeries::zero(p, digits, terms);
        series.branch = Some(branch);
        series.flags.push("odd character: the measure vanishes".into());
        return Ok(KubotaLeopoldt {
            series,
            c_factor,
            c,
            branch,
            odd: true,
        });
    }
    let nodes_n = digits as usize + terms + 2;
    let work =
        digits + (nodes_n as i64) * (p as i64) / (p as i64 - 1) + 2 * (nodes_n as f64).log(p as f64).ceil() as i64 + 8;
    let emb = CharEmbedding::new(p, work)?;
    let ns: Vec<i64> = (0..nodes_n as i64).map(|k| NODE_OFFSET + k).collect();
    let values: Vec<PadicNumber> = ns
        .par_iter()
        .map(|&n| kl_node_value(&eta, n, c, &emb, work))
        .collect::<Result<_, _>>()?;
    let nodes: Vec<PadicNumber> = ns.iter().map(|&n| weight_point(p, n, work)).collect::<Result<_, _>>()?;
    let poly = newton_series(&nodes, &values, terms)?;
    let ring = ZpRing::new(p, digits);
    let mut coeffs = Vec::with_capacity(terms);
    for (j, x) in poly.iter().enumerate() {
        if x.precision() < digits {
            return Err(IwasawaError::PrecisionLoss(format!(
                "coefficient {j} known to {} digits",
                x.precision()
            )));
        }
        if !x.is_zero() && x.valuation() < 0 {
            return Err(IwasawaError::NonIntegral(format!("coefficient {j}")));
        }
        coeffs.push(ring.reduce(&x.residue().unwrap()));
    }
    coeffs.resize(terms, BigInt::zero());
    let mut series = IwasawaSeries::from_coeffs(p, digits, coeffs);
    series.branch = Some(branch);
    series.flags.push(format!(
        "interpolates L(-n, eta*omega^(-n-1)) with eta = chi*omega^{branch}"
    ));
    Ok(KubotaLeopoldt {
        series,
        c_factor,
        c,
        branch,
        odd: false,
    })
}

// ---------------------------------------------------------------------------
// ζ′ and the archimedean quotient

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OmegaFactor {
    pub n: u32,
    pub delta: u32,
    pub re: f64,
    pub im: f64,
    /// The same quantity computed as i^{−δ}Γ_R(n+1+δ)/Γ_R(δ−n).
    pub via_gamma_r_re: f64,
    pub via_gamma_r_im: f64,
}

/// Ω(θ, n) = i^{−δ} π^{−n−1/2} Γ((n+1+δ)/2)/Γ((δ−n)/2), so that
/// L(−n, θ) = τ(θ) f^n Ω(θ, n) L(1+n, θ̄) for θ primitive of conductor f.
pub fn omega_factor(theta: &DirichletCharacter, n: u32) -> OmegaFactor {
    use num_complex::Complex64;
    use std::f64::consts::PI;
    let delta = theta.parity();
    let i_pow = Complex64::i().powu((4 - delta) % 4);
    let (explicit, quotient) = if (n + delta) % 2 == 0 {
        (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    } else {
        let num = gamma(Complex64::new((n + 1 + delta) as f64 / 2.0, 0.0));
        let den = gamma(Complex64::new((delta as f64 - n as f64) / 2.0, 0.0));
        let e = i_pow * PI.powf(-(n as f64) - 0.5) * num / den;
        let q = i_pow * gamma_r(Complex64::new((n + 1 + delta) as f64, 0.0))
            / gamma_r(Complex64::new(delta as f64 - n as f64, 0.0));
        (e, q)
    };
    OmegaFactor {
        n,
        delta,
        re: explicit.re,
        im: explicit.im,
        via_gamma_r_re: quotient.re,
        via_gamma_r_im: quotient.im,
    }
}

#[derive(Debug, Clone)]
pub struct ZetaPrime {
    pub series: IwasawaSeries,
    /// Prime-to-p conductor f′ divided out through A_{f′}.
    pub f_prime: u64,
    pub gauss_sum: String,
    /// False when τ(η′) does not lie in Q_p and was left in the normalization.
    pub gauss_divided: bool,
}

/// ζ′ = G · A_{f′}(X)^{−1} · τ(η′)^{−1} with η′ the prime-to-p part of
/// η = χω^i and f′ its conductor.
pub fn zeta_prime_measure(
    chi: &DirichletCharacter,
    branch: i64,
    p: u64,
    budget: &PrecisionBudget,
) -> Result<ZetaPrime, IwasawaError> {
    let kl = kubota_leopoldt(chi, branch, p, budget)?;
    let eta = chi
        .mul(&DirichletCharacter::teichmuller_power(p, branch))
        .primitive_part();
    let mut f_prime = eta.conductor();
    while f_prime % p == 0 {
        f_prime /= p;
    }
    let eta_prime = prime_to_p_part(&eta, p);
    let digits = budget.padic_digits as i64;
    let mut series = if f_prime > 1 {
        kl.series.mul(&a_char_series_int(f_prime as i64, p, budget)?.inverse()?)
    } else {
        kl.series.clone()
    };
    let g = gauss_sum(&eta_prime);
    let mut gauss_divided = false;
    if let Some(t) = embed_cyclo_padic(&g.exact, p, digits + 2) {
        if t.is_unit() {
            let inv = t.inv()?.residue().unwrap();
            series = series.scale(&inv);
            gauss_divided = true;
        }
    }
    series.branch = Some(branch);
    series.flags = kl.series.flags.clone();
    series
        .flags
        .push("zeta-prime normalization: N_p(z)^s with the branch twist of the Kubota-Leopoldt series".into());
    if !gauss_divided {
        series
            .flags
            .push("Gauss sum of the prime-to-p part left undivided".into());
    }
    Ok(ZetaPrime {
        series,
        f_prime,
        gauss_sum: g.exact_text,
        gauss_divided,
    })
}

fn prime_to_p_part(chi: &DirichletCharacter, p: u64) -> DirichletCharacter {
    let mut out = DirichletCharacter::trivial(1);
    for (q, _) in factorize(chi.modulus()) {
        if q != p {
            out = out.mul(&chi.component_at(q));
        }
    }
    out.primitive_part()
}

#[derive(Debug, Clone, Serialize)]
pub struct ZetaPrimeCheck {
    pub n: u32,
    pub conductor: u64,
    /// L(−n, θ) from generalized Bernoulli numbers.
    pub exact_re: f64,
    pub exact_im: f64,
    /// τ(θ) f^n Ω(θ, n) L(1+n, θ̄) from the complex side.
    pub complex_re: f64,
    pub complex_im: f64,
    pub recognized: Option<String>,
    pub rel_error: f64,
}

/// Compares the Bernoulli value L(−n, θ), θ = χω^{i−n−1}, with the value
/// reconstructed from L(1+n, θ̄) and the archimedean quotient.
pub fn zeta_prime_check(chi: &DirichletCharacter, branch: i64, p: u64, n: u32) -> ZetaPrimeCheck {
    let theta = chi
        .mul(&DirichletCharacter::teichmuller_power(p, branch - n as i64 - 1))
        .primitive_part();
    let f = theta.modulus();
    let exact = crate::lvalues::l_negative(&theta, n as usize + 1);
    let ex = exact.to_complex();
    let om = omega_factor(&theta, n);
    let tau = gauss_sum(&theta).complex();
    let l = hecke_l(&theta.inverse(), num_complex::Complex64::new(1.0 + n as f64, 0.0));
    let cx = tau * (f as f64).powi(n as i32) * num_complex::Complex64::new(om.re, om.im) * l;
    let recognized = exact
        .as_rational()
        .and_then(|_| crate::exact::recognize_rational(cx.re, 1_000_000, 1e-8))
        .map(|q| q.to_string());
    ZetaPrimeCheck {
        n,
        conductor: f,
        exact_re: ex.re,
        exact_im: ex.im,
        complex_re: cx.re,
        complex_im: cx.im,
        recognized,
        rel_error: (cx - ex).norm() / ex.norm().max(1e-300),
    }
}

// ---------------------------------------------------------------------------
// Euler-factor series at bad primes

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "+" | "plus" => Some(Sign::Plus),
            "-" | "minus" => Some(Sign::Minus),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EulerSeries {
    pub q: u64,
    pub sign: Sign,
    pub factors: Vec<LinearFactor>,
    pub series: IwasawaSeries,
    pub flags: Vec<String>,
}

/// A root r of the primitive Euler factor at q that is not a root of the
/// imprimitive one, together with its weight degree (the power of q^m in r).
struct ExtraRoot {
    value: PadicNumber,
    weight: i32,
}

fn satake_alpha(lam: &Q, c: &Q, p: u64, prec: i64) -> Result<PadicNumber, IwasawaError> {
    let ring = ZpRing::new(p, prec);
    let l = ring
        .from_rational(lam)
        .ok_or_else(|| IwasawaError::NonIntegral("minimal-twist eigenvalue".into()))?;
    let cc = ring
        .from_rational(c)
        .ok_or_else(|| IwasawaError::NonIntegral("Hecke constant".into()))?;
    let coeffs = vec![cc.clone(), -l.clone(), BigInt::one()];
    let pb = BigInt::from(p);
    for r0 in 0..p {
        let r = BigInt::from(r0);
        let fv = (&cc - &l * &r + &r * &r).mod_floor(&pb);
        let dv = (BigInt::from(2) * &r - &l).mod_floor(&pb);
        if fv.is_zero() && !dv.is_zero() {
            if let Some(root) = hensel_root(&coeffs, &r, p, prec) {
                return Ok(PadicNumber::from_bigint(&root, p, prec));
            }
        }
    }
    Err(IwasawaError::NotInQp("Satake parameter of the minimal twist".into()))
}

fn extra_roots(
    f: &NewformData,
    chi: &DirichletCharacter,
    q: u64,
    emb: &CharEmbedding,
    flags: &mut Vec<String>,
) -> Result<Vec<ExtraRoot>, IwasawaError> {
    let p = emb.ring.p;
    let prec = emb.ring.prec;
    let lt = f.classify_local_type(q)?;
    let m = f.m() as i32;
    let chi_d = chi.inverse();
    let tau = chi_d.mul(&f.psi);
    let pv = |c: &DirichletCharacter| emb.padic(&c.primitive_part(), q as i64);
    let qpow = |e: i32| PadicNumber::from_rational(&q_int(q as i64).pow(e), p, prec);
    let root = |value: PadicNumber, weight: i32| ExtraRoot { value, weight };
    let alpha = || -> Result<(PadicNumber, PadicNumber), IwasawaError> {
        let lam = lt
            .minimal_twist_aq
            .clone()
            .ok_or(IwasawaError::MissingMinimalTwist(q))?;
        let c = q_int(q as i64).pow(m + 1);
        let a = satake_alpha(&lam, &c, p, prec)?;
        let b = PadicNumber::from_rational(&c, p, prec).div(&a)?;
        Ok((a, b))
    };
    if !lt.bad {
        return Ok(Vec::new());
    }
    let roots = match lt.kind {
        LocalKind::Steinberg => {
            flags.push("Steinberg prime: identity series".into());
            Vec::new()
        }
        LocalKind::PrincipalRamifiedOne if !lt.a_q.is_zero() => {
            let a2 = PadicNumber::from_rational(&(&lt.a_q * &lt.a_q), p, prec);
            let chipsi2 = chi_d.mul(&f.psi.pow(2));
            vec![
                root(pv(&tau)?.mul(&qpow(m + 1)), 1),
                root(pv(&chipsi2)?.mul(&qpow(2 * m + 2)).div(&a2)?, 2),
            ]
        }
        LocalKind::PrincipalRamifiedOne => {
            let (a, b) = alpha()?;
            let chipsi2 = chi_d.mul(&f.psi.pow(2));
            vec![
                root(pv(&chi_d)?.mul(&a.mul(&a)), 0),
                root(pv(&tau)?.mul(&qpow(m + 1)), 1),
                root(pv(&chipsi2)?.mul(&b.mul(&b)), 2),
            ]
        }
        LocalKind::PrincipalUnramified => {
            let (a, b) = alpha()?;
            let t = pv(&tau)?;
            vec![
                root(t.mul(&a.mul(&a)), 0),
                root(t.mul(&qpow(m + 1)), 1),
                root(t.mul(&b.mul(&b)), 2),
            ]
        }
        LocalKind::Supercuspidal => {
            let t = pv(&tau.pow(2))?.mul(&qpow(m + 1));
            let ramified = tau.is_ramified_at(q);
            if matches!(lt.subcase, Subcase::S41 | Subcase::S42 | Subcase::S43) && ramified {
                flags.push("root quadratic in the twisting character: template exact on the base branch".into());
            }
            match lt.subcase {
                Subcase::S40 => vec![root(pv(&tau)?.mul(&qpow(m + 1)).neg(), 1)],
                Subcase::S41 if ramified => vec![root(t.clone(), 1), root(t.neg(), 1)],
                Subcase::S42 if ramified => vec![root(t.neg(), 1)],
                Subcase::S43 if ramified => vec![root(t, 1)],
                _ => Vec::new(),
            }
        }
    };
    Ok(roots.into_iter().filter(|r| !r.value.is_zero()).collect())
}

fn padic_residue(x: &PadicNumber, what: &str, digits: i64) -> Result<BigInt, IwasawaError> {
    if !x.is_zero() && x.valuation() < 0 {
        return Err(IwasawaError::NonIntegral(what.to_string()));
    }
    Ok(ZpRing::new(x.prime(), digits).reduce(&x.residue().unwrap_or_default()))
}

fn linear_factor(q: u64, s: BigInt, exp_x: i32, exp_y: i32, p: u64, digits: i64) -> LinearFactor {
    let ring = ZpRing::new(p, digits);
    let one_minus = ring.reduce(&(BigInt::one() - &s));
    LinearFactor {
        q,
        scalar: ring.centered(&s).to_string(),
        unit_constant: ring.valuation(&one_minus) == 0,
        scalar_value: s,
        exp_x,
        exp_y,
    }
}

/// Linear factors of ℰ_q^± with Y left free: E⁺ uses s = r/q against
/// A_q(X)^{−1}, E⁻ the dual 1/r against A_q(X).
fn euler_factors(
    f: &NewformData,
    chi: &DirichletCharacter,
    q: u64,
    sign: Sign,
    p: u64,
    digits: i64,
    flags: &mut Vec<String>,
) -> Result<Vec<(LinearFactor, PadicNumber)>, IwasawaError> {
    if q == p {
        return Err(IwasawaError::PrimeEqualsP(q));
    }
    check_prime(p)?;
    let work = digits + 4;
    let emb = CharEmbedding::new(p, work)?;
    let roots = extra_roots(f, chi, q, &emb, flags)?;
    let qp = PadicNumber::from_int(q as i64, p, work);
    let mut out = Vec::new();
    for r in roots {
        let (s, ex, ey) = match sign {
            Sign::Plus => (r.value.div(&qp)?, -1, r.weight),
            Sign::Minus => (r.value.inv()?, 1, -r.weight),
        };
        let sv = padic_residue(&s, "Euler-factor scalar", digits)?;
        out.push((linear_factor(q, sv, ex, ey, p, digits), s));
    }
    if q == 2 {
        flags.push("factor at q = 2: points where it vanishes are excluded from interpolation".into());
    }
    Ok(out)
}

fn factor_series(fac: &LinearFactor, p: u64, digits: i64, terms: usize) -> Result<IwasawaSeries, IwasawaError> {
    let w = digits + fact_valuation(terms, p) + 4;
    let a = a_power_series(
        &PadicNumber::from_int(fac.q as i64, p, w),
        fac.exp_x as i64,
        digits,
        terms,
    )?;
    Ok(IwasawaSeries::one(p, digits, terms).sub(&a.scale(&fac.scalar_value)))
}

impl EulerSeries {
    pub fn from_factors(
        q: u64,
        sign: Sign,
        factors: Vec<LinearFactor>,
        p: u64,
        budget: &PrecisionBudget,
    ) -> Result<Self, IwasawaError> {
        let digits = budget.padic_digits as i64;
        let terms = budget.series_terms;
        let mut series = IwasawaSeries::one(p, digits, terms);
        for fac in &factors {
            series = series.mul(&factor_series(fac, p, digits, terms)?);
        }
        Ok(EulerSeries {
            q,
            sign,
            factors,
            series,
            flags: Vec::new(),
        })
    }
}

pub fn euler_series_one_var(
    f: &NewformData,
    chi: &DirichletCharacter,
    q: u64,
    sign: Sign,
    p: u64,
    budget: &PrecisionBudget,
) -> Result<EulerSeries, IwasawaError> {
    let mut flags = Vec::new();
    let facs = euler_factors(f, chi, q, sign, p, budget.padic_digits as i64, &mut flags)?;
    let mut e = EulerSeries::from_factors(q, sign, facs.into_iter().map(|(l, _)| l).collect(), p, budget)?;
    e.flags = flags;
    Ok(e)
}

#[derive(Debug, Clone)]
pub struct TwoVarSeries {
    pub p: u64,
    pub digits: i64,
    /// coeffs[i][j] multiplies X^i Y^j.
    pub coeffs: Vec<Vec<BigInt>>,
    pub factors: Vec<LinearFactor>,
    /// Set when the series carries the divisor (1+X) − u(1+Y).
    pub delta_divisor: bool,
    pub excluded_points: Vec<String>,
    pub flags: Vec<String>,
}

impl TwoVarSeries {
    pub fn one(p: u64, digits: i64, x_terms: usize, y_terms: usize) -> Self {
        let mut coeffs = vec![vec![BigInt::zero(); y_terms]; x_terms];
        coeffs[0][0] = BigInt::one();
        TwoVarSeries {
            p,
            digits,
            coeffs,
            factors: Vec::new(),
            delta_divisor: false,
            excluded_points: Vec::new(),
            flags: Vec::new(),
        }
    }

    pub fn x_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn y_terms(&self) -> usize {
        self.coeffs.first().map_or(0, |r| r.len())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let ring = ZpRing::new(self.p, self.digits.min(o.digits));
        let (nx, ny) = (self.x_terms().min(o.x_terms()), self.y_terms().min(o.y_terms()));
        let mut out = vec![vec![BigInt::zero(); ny]; nx];
        for i1 in 0..nx {
            for j1 in 0..ny {
                let a = &self.coeffs[i1][j1];
                if a.is_zero() {
                    continue;
                }
                for i2 in 0..nx - i1 {
                    for j2 in 0..ny - j1 {
                        out[i1 + i2][j1 + j2] += a * &o.coeffs[i2][j2];
                    }
                }
            }
        }
        for row in &mut out {
            for c in row.iter_mut() {
                *c = ring.reduce(c);
            }
        }
        TwoVarSeries {
            p: self.p,
            digits: ring.prec,
            coeffs: out,
            factors: Vec::new(),
            delta_divisor: self.delta_divisor || o.delta_divisor,
            excluded_points: Vec::new(),
            flags: Vec::new(),
        }
    }

    /// Y ↦ u^m − 1: the arithmetic point of weight m + 2.
    pub fn specialize_y(&self, m: i64) -> Result<IwasawaSeries, IwasawaError> {
        let y = weight_point(self.p, m, self.digits + 2)?;
        let coeffs = self
            .coeffs
            .iter()
            .map(|row| {
                IwasawaSeries::from_coeffs(self.p, self.digits, row.clone())
                    .eval(&y)
                    .map(|v| v.residue().unwrap_or_default())
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut s = IwasawaSeries::from_coeffs(self.p, self.digits, coeffs);
        s.flags = self.flags.clone();
        Ok(s)
    }
}

/// ℰ_q^±(X, Y): each one-variable scalar s = σ⟨q⟩^{m·w} is split as σ
/// times A_q(Y)^w, so that Y = u^m − 1 recovers the one-variable series.
pub fn euler_series_two_var(
    f: &NewformData,
    chi: &DirichletCharacter,
    q: u64,
    sign: Sign,
    p: u64,
    budget: &PrecisionBudget,
    y_terms: usize,
) -> Result<TwoVarSeries, IwasawaError> {
    let digits = budget.padic_digits as i64;
    let terms = budget.series_terms;
    let mut flags = Vec::new();
    let facs = euler_factors(f, chi, q, sign, p, digits, &mut flags)?;
    let m = f.m() as i64;
    let w = digits + fact_valuation(terms.max(y_terms), p) + 4;
    let qang = angle(&PadicNumber::from_int(q as i64, p, w))?;
    let mut out = TwoVarSeries::one(p, digits, terms, y_terms);
    let mut factors = Vec::new();
    for (lin, s) in facs {
        let shift = qang.pow((m * lin.exp_y.unsigned_abs() as i64) as u64);
        let sigma = if lin.exp_y >= 0 { s.div(&shift)? } else { s.mul(&shift) };
        let sv = padic_residue(&sigma, "two-variable scalar", digits)?;
        let fac = linear_factor(q, sv.clone(), lin.exp_x, lin.exp_y, p, digits);
        let zq = PadicNumber::from_int(q as i64, p, w);
        let ax = a_power_series(&zq, lin.exp_x as i64, digits, terms)?;
        let ay = a_power_series(&zq, lin.exp_y as i64, digits, y_terms)?;
        let mut term = TwoVarSeries::one(p, digits, terms, y_terms);
        let ring = ZpRing::new(p, digits);
        for i in 0..terms {
            for j in 0..y_terms {
                let prod = &ax.coeffs[i] * &ay.coeffs[j] * &sv;
                term.coeffs[i][j] = ring.reduce(&(&term.coeffs[i][j] - prod));
            }
        }
        out = out.mul(&term);
        if q == 2 {
            out.excluded_points.push(fac.describe());
        }
        factors.push(fac);
    }
    out.factors = factors;
    out.flags = flags;
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct EulerCrossCheck {
    pub q: u64,
    pub n: i64,
    pub series_value: String,
    pub complex_value: String,
    pub agreement_digits: i64,
    pub matches: bool,
}

/// E⁺_q(u^n − 1) from the series against P_q(X)/D_q(X) at X = q^{−(n+1)},
/// P the primitive and D the imprimitive factor for χ^{−1}ω^n.
pub fn euler_series_crosscheck(
    f: &NewformData,
    chi: &DirichletCharacter,
    q: u64,
    p: u64,
    n: i64,
    budget: &PrecisionBudget,
) -> Result<EulerCrossCheck, IwasawaError> {
    let e = euler_series_one_var(f, chi, q, Sign::Plus, p, budget)?;
    let sv = e.series.eval_at(n)?;
    let twist = chi.inverse().mul(&DirichletCharacter::teichmuller_power(p, n));
    let prim = sym2_euler_factor(f, q, &twist).map_err(|err| match err {
        crate::lfun::LfunError::Eigen(e) => IwasawaError::Eigen(e),
        other => IwasawaError::NotInQp(other.to_string()),
    })?;
    let x = Cyclo::rational(q_int(q as i64).pow(-(n as i32) - 1));
    let aq = Cyclo::rational(f.ap(q)?.clone());
    let d = Cyclo::int(1).minus(&aq.times(&aq).times(&twist.value(q as i64)).times(&x));
    let digits = budget.padic_digits as i64;
    let pe =
        embed_cyclo_padic(&prim.eval(&x), p, digits + 4).ok_or_else(|| IwasawaError::NotInQp("Euler factor".into()))?;
    let de = embed_cyclo_padic(&d, p, digits + 4).ok_or_else(|| IwasawaError::NotInQp("Euler factor".into()))?;
    let cv = pe.div(&de)?;
    let k = sv.precision().min(cv.precision());
    Ok(EulerCrossCheck {
        q,
        n,
        series_value: sv.to_string(),
        complex_value: cv.with_precision(k).to_string(),
        agreement_digits: k,
        matches: sv.agrees(&cv, k),
    })
}

// ---------------------------------------------------------------------------
// Primitive correction

/// F = G·∏ℰ_q⁺(X)^{−1}. Linear factors with non-unit constant term are
/// recorded as poles when `allow_poles` is set and rejected otherwise.
pub fn primitive_correction(
    g: &IwasawaSeries,
    factors: &[EulerSeries],
    allow_poles: bool,
) -> Result<IwasawaSeries, IwasawaError> {
    let mut out = g.clone();
    for e in factors {
        for lin in &e.factors {
            if !lin.unit_constant {
                if allow_poles {
                    out.poles.push(lin.clone());
                    continue;
                }
                return Err(IwasawaError::NonInvertibleFactor(lin.describe()));
            }
            let s = factor_series(lin, g.p, g.digits, g.terms())?;
            out = out.mul(&s.inverse()?);
        }
    }
    out.branch = g.branch;
    out.flags = g.flags.clone();
    Ok(out)
}

/// F·∏(non-pole factors) − G, which vanishes identically at the working
/// precision when the correction is exact.
pub fn correction_residual(
    f: &IwasawaSeries,
    factors: &[EulerSeries],
    g: &IwasawaSeries,
) -> Result<IwasawaSeries, IwasawaError> {
    let mut acc = f.clone();
    for e in factors {
        for lin in &e.factors {
            if lin.unit_constant {
                acc = acc.mul(&factor_series(lin, f.p, f.digits, f.terms())?);
            }
        }
    }
    Ok(acc.sub(g))
}

pub fn is_zero_series(s: &IwasawaSeries) -> bool {
    s.coeffs.iter().all(|c| c.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn budget(d: u32, t: usize) -> PrecisionBudget {
        PrecisionBudget::new(d, t, 53)
    }

    #[test]
    fn a_series_basics() {
        let b = budget(15, 12);
        let a = a_char_series_int(7, 5, &b).unwrap();
        assert_eq!(a.coeffs[0], BigInt::one());
        let at1 = a.eval_at(1).unwrap();
        let seven = angle(&PadicNumber::from_int(7, 5, 20)).unwrap();
        assert!(at1.agrees(&seven, 12));
        let at2 = a.eval_at(2).unwrap();
        assert!(at2.agrees(&seven.pow(2), 12));
        let a3 = a_char_series_int(3, 5, &b).unwrap();
        let a21 = a_char_series_int(21, 5, &b).unwrap();
        assert!(a.mul(&a3).agrees(&a21, 15, 12));
    }

    #[test]
    fn inverse_round_trip() {
        let s = IwasawaSeries::from_coeffs(7, 10, vec![3.into(), 5.into(), (-2).into(), 11.into()]);
        let t = s.mul(&s.inverse().unwrap());
        assert!(t.agrees(&IwasawaSeries::one(7, 10, 4), 10, 4));
        let bad = IwasawaSeries::from_coeffs(7, 10, vec![7.into(), 1.into()]);
        assert!(matches!(bad.inverse(), Err(IwasawaError::NonUnitConstant)));
    }

    #[test]
    fn kl_trivial_matches_zeta() {
        // η = ω², n = 1: θ = ω^0, value (1 − p)ζ(−1)·c-factor
        let b = budget(12, 12);
        let kl = kubota_leopoldt(&DirichletCharacter::trivial(1), 2, 5, &b).unwrap();
        let v = kl.interpolated_value(1).unwrap();
        let expect = PadicNumber::from_rational(&(Q::new(BigInt::from(-4), BigInt::from(-12))), 5, 20);
        assert!(v.agrees(&expect, 10), "{v} vs {expect}");
    }

    #[test]
    fn odd_branch_is_zero() {
        let kl = kubota_leopoldt(&DirichletCharacter::trivial(1), 1, 5, &budget(8, 6)).unwrap();
        assert!(kl.odd);
        assert!(is_zero_series(&kl.series));
    }
}
