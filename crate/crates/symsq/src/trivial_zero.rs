//! Trivial zeros of the p-adic symmetric square.
//!
//! The p-local factors E₁ and E₂, the improved-function factorization, Tate
//! periods and L-invariants of curves with multiplicative reduction, the
//! assembled derivative prediction, and the order-g combinatorics of
//! abelian base change.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::arith::{is_fundamental_discriminant, is_squarefree, kronecker, val_p};
use crate::characters::{embed_cyclo_padic, DirichletCharacter};
use crate::eigendata::{Curve, EigenError, LocalKind, NewformData};
use crate::exact::{q_int, recognize_rational, Cyclo, Scalar, Q};
use crate::lfun::afe::{completed_l_with, AfeConfig, Smoothing};
use crate::padic::{check_prime, hensel_root, padic_log, PadicError, PadicNumber, PrecisionBudget};

#[derive(Debug, Error)]
pub enum TrivialZeroError {
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error("λ(T(p)) is not a p-adic unit at p = {0}")]
    NonOrdinary(u64),
    #[error("no multiplicative reduction at p = {0}")]
    NotMultiplicative(u64),
    #[error("hypotheses not met: {0}")]
    HypothesesNotMet(String),
    #[error("f = {f} does not divide n = {n}")]
    NonDivisor { n: u64, f: u64 },
    #[error("the form carries no Weierstrass model")]
    MissingCurve,
    #[error("{0} does not lie in Q_p")]
    NotInQp(String),
    #[error("complex L-value failed: {0}")]
    Lfun(String),
}

/// A point Q = (s, ε) of weight space together with the twisting character.
#[derive(Debug, Clone)]
pub struct TwistPoint {
    pub s: i64,
    pub chi: DirichletCharacter,
    /// Finite-order character of 1 + pZ_p, as a character mod p^k.
    pub eps: DirichletCharacter,
}

impl TwistPoint {
    pub fn new(s: i64, chi: DirichletCharacter) -> Self {
        TwistPoint {
            s,
            chi,
            eps: DirichletCharacter::trivial(1),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalFactorValue {
    pub p: u64,
    pub steinberg: bool,
    /// λ(T(p)): a_p at a prime of the level, the unit root otherwise.
    pub lambda: String,
    /// λ(T(p^{2β−2α₀}))·p^{−(β−α₀)(s+1)}.
    pub prefactor: String,
    /// 1 − θ₀(p)p^s λ^{−2} with θ = χεω^{−s}.
    pub linear: String,
    pub value: String,
    pub exact: Option<String>,
    pub provenance: String,
    pub vanishing: bool,
}

fn prov(digits: i64) -> String {
    format!("padic({digits})")
}

fn show(x: &PadicNumber) -> String {
    x.to_string()
}

fn theta_value_at_p(theta: &DirichletCharacter, p: u64, prec: i64) -> Result<(Cyclo, PadicNumber), TrivialZeroError> {
    let prim = theta.primitive_part();
    let v = prim.value(p as i64);
    let e = embed_cyclo_padic(&v, p, prec).ok_or_else(|| TrivialZeroError::NotInQp(format!("θ₀({p})")))?;
    Ok((v, e))
}

fn p_exponent(chi: &DirichletCharacter, p: u64) -> u32 {
    val_p(chi.conductor() as i64, p)
}

/// λ(T(p)) as a p-adic unit, and exactly when it is rational.
fn lambda_tp(f: &NewformData, p: u64, prec: i64) -> Result<(PadicNumber, Option<Q>), TrivialZeroError> {
    let ap = f.ap(p)?.clone();
    let ap_p = PadicNumber::from_rational(&ap, p, prec);
    if ap_p.is_zero() || ap_p.valuation() != 0 {
        return Err(TrivialZeroError::NonOrdinary(p));
    }
    if f.is_bad(p) {
        return Ok((ap_p, Some(ap)));
    }
    // unit root of X² − a_p X + ψ(p)p^{k−1}
    let c =
        embed_cyclo_padic(&f.hecke_constant(p), p, prec + 2).ok_or_else(|| TrivialZeroError::NotInQp("ψ(p)".into()))?;
    let coeffs = [c.residue().unwrap_or_default(), -ap_p.residue().unwrap(), BigInt::one()];
    let r0 = ap_p.residue().unwrap() % BigInt::from(p);
    let root = hensel_root(&coeffs, &r0, p, prec).ok_or(TrivialZeroError::NonOrdinary(p))?;
    Ok((PadicNumber::from_bigint(&root, p, prec), None))
}

fn is_steinberg(f: &NewformData, p: u64) -> Result<bool, TrivialZeroError> {
    Ok(f.is_bad(p) && f.classify_local_type(p)?.kind == LocalKind::Steinberg)
}

/// E₁ at the single place above p.
pub fn e1_factor(
    f: &NewformData,
    pt: &TwistPoint,
    p: u64,
    budget: &PrecisionBudget,
) -> Result<LocalFactorValue, TrivialZeroError> {
    check_prime(p)?;
    let digits = budget.padic_digits as i64;
    let prec = digits + 4;
    let (lam, lam_exact) = lambda_tp(f, p, prec)?;
    let theta = pt
        .chi
        .mul(&pt.eps)
        .mul(&DirichletCharacter::teichmuller_power(p, -pt.s));
    let alpha0 = p_exponent(&theta, p) as i64;
    let beta = [1, alpha0, p_exponent(&pt.chi, p) as i64, p_exponent(&pt.eps, p) as i64]
        .into_iter()
        .max()
        .unwrap();
    let (tv, tp) = theta_value_at_p(&theta, p, prec)?;
    let ps = PadicNumber::from_rational(&q_int(p as i64).pow(pt.s as i32), p, prec);
    let lam2_inv = lam.mul(&lam).inv()?;
    let linear = PadicNumber::from_int(1, p, prec).sub(&tp.mul(&ps).mul(&lam2_inv));
    let pre_exp = -((beta - alpha0) * (pt.s + 1)) as i32;
    let prefactor = lam.pow((2 * beta - 2 * alpha0) as u64).mul(&PadicNumber::from_rational(
        &q_int(p as i64).pow(pre_exp),
        p,
        prec,
    ));
    let value = prefactor.mul(&linear);
    let vanishing = linear.is_zero() || linear.valuation() >= digits;
    let exact = lam_exact.map(|l| {
        let lin = Cyclo::int(1).minus(&tv.scale(&(q_int(p as i64).pow(pt.s as i32) / (&l * &l))));
        let pre = (l.pow((2 * beta - 2 * alpha0) as i32)) * q_int(p as i64).pow(pre_exp);
        lin.scale(&pre).minimize().to_string()
    });
    Ok(LocalFactorValue {
        p,
        steinberg: is_steinberg(f, p)?,
        lambda: show(&lam.with_precision(digits)),
        prefactor: show(&prefactor.with_precision(digits)),
        linear: show(&linear.with_precision(digits)),
        value: show(&value.with_precision(digits)),
        provenance: if exact.is_some() { "exact".into() } else { prov(digits) },
        exact,
        vanishing,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct E2Value {
    pub p: u64,
    pub primitive_at_p: bool,
    pub first: Option<String>,
    pub second: Option<String>,
    pub value: String,
    pub provenance: String,
    pub vanishing: bool,
    pub notes: Vec<String>,
}

/// E₂ at the place above p: 1 when f is primitive at p, otherwise
/// (1 − (χ⁻¹ε⁻¹ω^sψ)₀(p)p^{m−s})(1 − (χ⁻¹ε⁻¹ω^sψ²)₀(p)λ^{−2}p^{2m+1−s}).
pub fn e2_factor(
    f: &NewformData,
    pt: &TwistPoint,
    p: u64,
    budget: &PrecisionBudget,
) -> Result<E2Value, TrivialZeroError> {
    check_prime(p)?;
    let digits = budget.padic_digits as i64;
    let prec = digits + 4;
    let (lam, _) = lambda_tp(f, p, prec)?;
    if f.is_bad(p) {
        return Ok(E2Value {
            p,
            primitive_at_p: true,
            first: None,
            second: None,
            value: "1".into(),
            provenance: "exact".into(),
            vanishing: false,
            notes: Vec::new(),
        });
    }
    let m = f.m() as i64;
    let base = pt
        .chi
        .inverse()
        .mul(&pt.eps.inverse())
        .mul(&DirichletCharacter::teichmuller_power(p, pt.s));
    let (_, t1) = theta_value_at_p(&base.mul(&f.psi), p, prec)?;
    let (_, t2) = theta_value_at_p(&base.mul(&f.psi.pow(2)), p, prec)?;
    let pp = |e: i64| PadicNumber::from_rational(&q_int(p as i64).pow(e as i32), p, prec);
    let one = PadicNumber::from_int(1, p, prec);
    let first = one.sub(&t1.mul(&pp(m - pt.s)));
    let second = one.sub(&t2.mul(&lam.mul(&lam).inv()?).mul(&pp(2 * m + 1 - pt.s)));
    let value = first.mul(&second);
    let vanishing = value.is_zero() || value.valuation() >= digits;
    let mut notes = Vec::new();
    if first.is_zero() {
        notes.push("first factor 1 - p^(m-s) vanishes at s = m with trivial twist; not counted in g".into());
    }
    Ok(E2Value {
        p,
        primitive_at_p: false,
        first: Some(show(&first.with_precision(digits))),
        second: Some(show(&second.with_precision(digits))),
        value: show(&value.with_precision(digits)),
        provenance: prov(digits),
        vanishing,
        notes,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LeadingTermSlots {
    pub l_invariant: Option<String>,
    pub f_p: u64,
    pub algebraic_l_value: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrivialZeroReport {
    pub form: String,
    pub p: u64,
    pub s: i64,
    pub character: String,
    pub places: Vec<LocalFactorValue>,
    pub g: usize,
    /// Product of the non-vanishing E₁ factors.
    pub e_star: String,
    pub e_star_provenance: String,
    /// Steinberg with a_p² = 1, read off the local classification.
    pub classification_predicts_vanishing: bool,
    pub routes_agree: bool,
    pub leading_term: LeadingTermSlots,
}

pub fn trivial_zero_report(
    f: &NewformData,
    pt: &TwistPoint,
    p: u64,
    budget: &PrecisionBudget,
) -> Result<TrivialZeroReport, TrivialZeroError> {
    let digits = budget.padic_digits as i64;
    let place = e1_factor(f, pt, p, budget)?;
    let places = vec![place];
    let g = places.iter().filter(|x| x.vanishing).count();
    let mut e_star = PadicNumber::from_int(1, p, digits);
    if places.iter().any(|x| !x.vanishing) {
        e_star = e_star.mul(&e1_value_padic(f, pt, p, budget)?);
    }
    let ap = f.ap(p)?;
    let trivial_point =
        pt.s == f.m() as i64 && pt.chi.primitive_part().is_trivial() && pt.eps.primitive_part().is_trivial();
    let predicted = trivial_point && is_steinberg(f, p)? && (ap * ap) == Q::one();
    let formula_vanishes = g > 0;
    let l_inv = if g > 0 && f.curve.is_some() {
        l_invariant(f, p, budget).ok().map(|x| x.to_string())
    } else {
        None
    };
    Ok(TrivialZeroReport {
        form: f.label.clone(),
        p,
        s: pt.s,
        character: pt.chi.spec_string(),
        places,
        g,
        e_star: show(&e_star),
        e_star_provenance: prov(digits),
        classification_predicts_vanishing: predicted,
        routes_agree: !trivial_point || predicted == formula_vanishes,
        leading_term: LeadingTermSlots {
            l_invariant: l_inv,
            f_p: 1,
            algebraic_l_value: "L(1, Sym^2 f)/Omega(f), see predict-derivative".into(),
        },
    })
}

/// The numerical E₁ value, as used in products.
pub fn e1_value_padic(
    f: &NewformData,
    pt: &TwistPoint,
    p: u64,
    budget: &PrecisionBudget,
) -> Result<PadicNumber, TrivialZeroError> {
    let digits = budget.padic_digits as i64;
    let prec = digits + 4;
    let (lam, _) = lambda_tp(f, p, prec)?;
    let theta = pt
        .chi
        .mul(&pt.eps)
        .mul(&DirichletCharacter::teichmuller_power(p, -pt.s));
    let alpha0 = p_exponent(&theta, p) as i64;
    let beta = [1, alpha0, p_exponent(&pt.chi, p) as i64, p_exponent(&pt.eps, p) as i64]
        .into_iter()
        .max()
        .unwrap();
    let (_, tp) = theta_value_at_p(&theta, p, prec)?;
    let ps = PadicNumber::from_rational(&q_int(p as i64).pow(pt.s as i32), p, prec);
    let linear = PadicNumber::from_int(1, p, prec).sub(&tp.mul(&ps).mul(&lam.mul(&lam).inv()?));
    let pre = lam.pow((2 * beta - 2 * alpha0) as u64).mul(&PadicNumber::from_rational(
        &q_int(p as i64).pow(-((beta - alpha0) * (pt.s + 1)) as i32),
        p,
        prec,
    ));
    Ok(pre.mul(&linear).with_precision(digits))
}

#[derive(Debug, Clone, Serialize)]
pub struct FactorizationStatement {
    pub form: String,
    pub p: u64,
    /// ∏_{places} (1 − λ(T(ϖ))^{−2}).
    pub scalar: String,
    pub scalar_is_unit: bool,
    pub scalar_vanishes: bool,
    pub order_lower_bound: usize,
    pub derivative_slot: Option<String>,
    pub statement: String,
}

/// The scalar relating the function at Q₀ = (0, 1) to the improved one.
pub fn factorization_check(
    f: &NewformData,
    p: u64,
    budget: &PrecisionBudget,
) -> Result<FactorizationStatement, TrivialZeroError> {
    let digits = budget.padic_digits as i64;
    let (lam, _) = lambda_tp(f, p, digits + 4)?;
    let one = PadicNumber::from_int(1, p, digits + 4);
    let scalar = one.sub(&lam.mul(&lam).inv()?).with_precision(digits);
    let vanishes = scalar.is_zero();
    let order = usize::from(vanishes);
    let slot = if vanishes && f.curve.is_some() {
        l_invariant(f, p, budget).ok().map(|x| x.to_string())
    } else {
        None
    };
    Ok(FactorizationStatement {
        form: f.label.clone(),
        p,
        scalar: show(&scalar),
        scalar_is_unit: !vanishes && scalar.valuation() == 0,
        scalar_vanishes: vanishes,
        order_lower_bound: order,
        derivative_slot: slot,
        statement: format!(
            "L_p(Q0, P) = prod_(places above {p}) (1 - lambda(T(p))^-2) * L_p^+(P); order of vanishing at Q0 >= {order}"
        ),
    })
}

// ---------------------------------------------------------------------------
// Tate periods

/// Coefficients of q·j(q) = E₄(q)³/∏(1 − qⁿ)²⁴, up to q^{n−1}.
fn qj_series(n: usize) -> Vec<BigInt> {
    let mut e4 = vec![BigInt::zero(); n];
    e4[0] = BigInt::one();
    for (k, c) in e4.iter_mut().enumerate().skip(1) {
        let s3: u64 = (1..=k as u64).filter(|d| k as u64 % d == 0).map(|d| d * d * d).sum();
        *c = BigInt::from(240u64 * s3);
    }
    let mul = |a: &[BigInt], b: &[BigInt]| {
        let mut out = vec![BigInt::zero(); n];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().take(n - i).enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    };
    let mut num = mul(&mul(&e4, &e4), &e4);
    // divide by ∏(1 − q^k)^24, one factor at a time
    for k in 1..n {
        for _ in 0..24 {
            for i in k..n {
                let t = num[i - k].clone();
                num[i] += t;
            }
        }
    }
    num
}

/// Coefficients c_k of q = Σ c_k x^k with x = 1/j, k = 0..n−1.
fn q_of_inverse_j(n: usize) -> Vec<BigInt> {
    let pj = qj_series(n);
    let mut q = vec![BigInt::zero(); n];
    for _ in 0..n {
        // q ← x·P(q)
        let mut acc = vec![BigInt::zero(); n];
        let mut qpow = vec![BigInt::zero(); n];
        qpow[0] = BigInt::one();
        for c in &pj {
            for i in 0..n {
                acc[i] += c * &qpow[i];
            }
            let mut next = vec![BigInt::zero(); n];
            for (i, a) in qpow.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for (j, b) in q.iter().take(n - i).enumerate() {
                    next[i + j] += a * b;
                }
            }
            qpow = next;
        }
        let mut shifted = vec![BigInt::zero(); n];
        shifted[1..n].clone_from_slice(&acc[..n - 1]);
        q = shifted;
    }
    q
}

#[derive(Debug, Clone, Serialize)]
pub struct TatePeriodData {
    pub curve: Curve,
    pub p: u64,
    pub q: String,
    pub q_digits: Vec<u64>,
    pub ord_q: i64,
    pub log_q: String,
    pub split: bool,
    pub twist_discriminant: Option<i64>,
    pub budget: i64,
    pub series_terms: usize,
    /// v(j(q)⁻¹ − j⁻¹) − v(j⁻¹).
    pub roundtrip_valuation: i64,
    pub provenance: String,
    #[serde(skip)]
    pub q_value: PadicNumber,
    #[serde(skip)]
    pub log_value: PadicNumber,
}

fn smallest_nonsplit_twist(p: u64) -> i64 {
    (3i64..)
        .flat_map(|a| [-a, a])
        .find(|&d| is_fundamental_discriminant(d) && d % p as i64 != 0 && kronecker(d, p as i64) == -1)
        .unwrap()
}

/// The Tate parameter q with j(q) = j(E), for E multiplicative at p.
pub fn tate_period(f: &NewformData, p: u64, budget: &PrecisionBudget) -> Result<TatePeriodData, TrivialZeroError> {
    check_prime(p)?;
    let curve = f.curve.ok_or(TrivialZeroError::MissingCurve)?;
    let m = budget.padic_digits as i64;
    let j = curve.j_invariant();
    if j.is_zero() {
        return Err(TrivialZeroError::NotMultiplicative(p));
    }
    let vj = val_p(j.numer().to_i64().unwrap_or(0), p) as i64 - val_p(j.denom().to_i64().unwrap_or(1), p) as i64;
    let vj = if j.numer().to_i64().is_none() || j.denom().to_i64().is_none() {
        PadicNumber::from_rational(&j, p, 8).valuation()
    } else {
        vj
    };
    if vj >= 0 || !f.is_bad(p) || f.level % (p * p) == 0 {
        return Err(TrivialZeroError::NotMultiplicative(p));
    }
    let v = -vj;
    let prec = m + v + 4;
    let terms = ((m + v + 4) / v + 2) as usize;
    let coeffs = q_of_inverse_j(terms);
    let x = PadicNumber::from_rational(&(Q::one() / &j), p, prec);
    let mut q = PadicNumber::zero(p, prec);
    for c in coeffs.iter().rev() {
        q = q.mul(&x).add(&PadicNumber::from_bigint(c, p, prec));
    }
    let q = q.with_precision(m + v);
    // round trip x' = q/P(q)
    let pj = qj_series(terms);
    let mut pq = PadicNumber::zero(p, prec);
    for c in pj.iter().rev() {
        pq = pq.mul(&q).add(&PadicNumber::from_bigint(c, p, prec));
    }
    let x2 = q.div(&pq)?;
    let diff = x2.sub(&x);
    let rt = if diff.is_zero() {
        diff.precision()
    } else {
        diff.valuation()
    } - x.valuation();
    let ap = f.ap(p)?.clone();
    let split = ap == Q::one();
    if p != 2 {
        let c6 = curve.c6();
        let unit = PadicNumber::from_rational(&(-c6), p, 4);
        if !unit.is_zero() {
            let r = unit.unit().to_i64().unwrap_or(0).rem_euclid(p as i64);
            let sq = kronecker(r, p as i64) == 1;
            debug_assert_eq!(sq, split, "split test from c6 disagrees with a_p");
        }
    }
    let log_q = padic_log(&q)?.with_precision(m);
    Ok(TatePeriodData {
        curve,
        p,
        q: show(&q),
        q_digits: q.digits(),
        ord_q: v,
        log_q: show(&log_q),
        split,
        twist_discriminant: if split { None } else { Some(smallest_nonsplit_twist(p)) },
        budget: m,
        series_terms: terms,
        roundtrip_valuation: rt,
        provenance: prov(m),
        q_value: q,
        log_value: log_q,
    })
}

/// ℒ = log_p(q)/ord_p(q).
pub fn l_invariant(f: &NewformData, p: u64, budget: &PrecisionBudget) -> Result<PadicNumber, TrivialZeroError> {
    let t = tate_period(f, p, budget)?;
    Ok(t.log_value
        .div(&PadicNumber::from_int(t.ord_q, p, t.log_value.precision()))?)
}

#[derive(Debug, Clone, Serialize)]
pub struct LInvariantReport {
    pub tate: TatePeriodData,
    pub l_invariant: String,
    pub valuation: i64,
    pub nonzero: bool,
    pub stable_digits: i64,
    pub comparison_budget: i64,
}

/// ℒ at the given budget, compared with a recomputation ten digits finer.
pub fn l_invariant_report(
    f: &NewformData,
    p: u64,
    budget: &PrecisionBudget,
) -> Result<LInvariantReport, TrivialZeroError> {
    let tate = tate_period(f, p, budget)?;
    let l = l_invariant(f, p, budget)?;
    let finer = PrecisionBudget::new(budget.padic_digits + 10, budget.series_terms, budget.float_bits);
    let l2 = l_invariant(f, p, &finer)?;
    let d = l.sub(&l2.with_precision(l.precision()));
    let stable = if d.is_zero() { l.precision() } else { d.valuation() };
    Ok(LInvariantReport {
        l_invariant: show(&l),
        valuation: if l.is_zero() { l.precision() } else { l.valuation() },
        nonzero: !l.is_zero(),
        stable_digits: stable,
        comparison_budget: budget.padic_digits as i64 + 10,
        tate,
    })
}

// ---------------------------------------------------------------------------
// Period lattice and derivative prediction

fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        if (a - b).abs() <= 1e-16 * a.abs() {
            break;
        }
        let (x, y) = ((a + b) / 2.0, (a * b).sqrt());
        a = x;
        b = y;
    }
    (a + b) / 2.0
}

fn cubic_roots(b2: f64, b4: f64, b6: f64) -> Vec<Complex64> {
    // roots of x³ + (b2/4)x² + (b4/2)x + b6/4 by Durand–Kerner
    let c = [b6 / 4.0, b4 / 2.0, b2 / 4.0];
    let eval = |x: Complex64| ((x + c[2]) * x + c[1]) * x + c[0];
    let mut r = [
        Complex64::new(0.4, 0.9),
        Complex64::new(0.4, 0.9).powu(2),
        Complex64::new(0.4, 0.9).powu(3),
    ];
    let scale = 1.0 + c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for z in r.iter_mut() {
        *z *= scale;
    }
    for _ in 0..500 {
        let old = r;
        for i in 0..3 {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..3 {
                if i != j {
                    den *= r[i] - r[j];
                }
            }
            r[i] -= eval(r[i]) / den;
        }
        if (0..3).all(|i| (r[i] - old[i]).norm() < 1e-15 * scale) {
            break;
        }
    }
    r.to_vec()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PeriodLattice {
    pub real_period: f64,
    pub imag_period: f64,
    /// Covolume of the period lattice.
    pub area: f64,
    pub components: u32,
}

/// The period lattice of the Néron differential by the arithmetic–geometric mean.
pub fn period_lattice(curve: &Curve) -> PeriodLattice {
    let [b2, b4, b6, _] = curve.b_invariants();
    let (b2, b4, b6) = (b2 as f64, b4 as f64, b6 as f64);
    let disc = crate::exact::q_to_f64(&curve.discriminant());
    let roots = cubic_roots(b2, b4, b6);
    if disc > 0.0 {
        let mut e: Vec<f64> = roots.iter().map(|z| z.re).collect();
        e.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let w1 = std::f64::consts::PI / agm((e[0] - e[2]).sqrt(), (e[0] - e[1]).sqrt());
        let w2 = std::f64::consts::PI / agm((e[0] - e[2]).sqrt(), (e[1] - e[2]).sqrt());
        PeriodLattice {
            real_period: 2.0 * w1,
            imag_period: w2,
            area: w1 * w2,
            components: 2,
        }
    } else {
        let e1 = roots
            .iter()
            .min_by(|a, b| a.im.abs().partial_cmp(&b.im.abs()).unwrap())
            .unwrap()
            .re;
        let z = (3.0 * e1 * e1 + b2 * e1 / 2.0 + b4 / 2.0).sqrt();
        let beta = 3.0 * e1 + b2 / 4.0;
        let w1 = 2.0 * std::f64::consts::PI / agm(2.0 * z.sqrt(), (2.0 * z + beta).sqrt());
        let w2i = std::f64::consts::PI / agm(2.0 * z.sqrt(), (2.0 * z - beta).sqrt());
        PeriodLattice {
            real_period: w1,
            imag_period: w2i,
            area: w1 * w2i,
            components: 1,
        }
    }
}

const GENUS_ONE_LEVELS: [u64; 12] = [11, 14, 15, 17, 19, 20, 21, 24, 27, 32, 36, 49];

#[derive(Debug, Clone, Serialize)]
pub struct DerivativePrediction {
    pub form: String,
    pub p: u64,
    pub g: usize,
    pub l_invariant: String,
    pub f_p: u64,
    pub l_value_sym2_at_1: f64,
    pub l_value_error: f64,
    /// Ω(f) = (2π)²⟨f, f⟩ = deg(φ)·covolume of the period lattice.
    pub omega: f64,
    pub modular_degree: Option<u64>,
    /// π·L(1, Sym² f)/Ω(f).
    pub ratio: f64,
    pub recognized: Option<String>,
    pub recognized_refined: Option<String>,
    pub recognition_stable: bool,
    /// ℒ·f_p·(recognized ratio), up to the unpinned normalization scalar.
    pub predicted_derivative: Option<String>,
    pub normalization_scalar: String,
    pub caveats: Vec<String>,
    pub statement: String,
}

fn sym2_l_at_one(f: &NewformData, cfg: &AfeConfig) -> Result<(f64, f64), TrivialZeroError> {
    let s = Complex64::new(1.0, 0.0);
    let chi = DirichletCharacter::trivial(1);
    let v = completed_l_with(
        f,
        &chi,
        s,
        cfg,
        Smoothing { nu: cfg.nu, s0: s },
        Smoothing {
            nu: cfg.nu * 1.6,
            s0: s,
        },
    )
    .map_err(|e| TrivialZeroError::Lfun(e.to_string()))?;
    let l = v.value() / Complex64::new(v.gamma_re, v.gamma_im);
    Ok((l.re, v.error_bound / Complex64::new(v.gamma_re, v.gamma_im).norm()))
}

pub fn derivative_prediction(
    f: &NewformData,
    p: u64,
    chi: &DirichletCharacter,
    budget: &PrecisionBudget,
) -> Result<DerivativePrediction, TrivialZeroError> {
    let mut failed = Vec::new();
    if !is_steinberg(f, p)? {
        failed.push(format!("f is not Steinberg at {p}"));
    }
    if f.weight != 2 {
        failed.push("weight is not 2".to_string());
    }
    if !f.psi.primitive_part().is_trivial() {
        failed.push("nebentypus is not trivial".to_string());
    }
    if !chi.primitive_part().is_trivial() {
        failed.push("twisting character is not trivial".to_string());
    }
    if f.curve.is_none() {
        failed.push("no elliptic curve attached".to_string());
    }
    if !failed.is_empty() {
        return Err(TrivialZeroError::HypothesesNotMet(failed.join("; ")));
    }
    let mut caveats = Vec::new();
    if f.level % 2 != 0 {
        caveats.push("2 does not divide N: the missing Euler factor at 2 may vanish".to_string());
    }
    if !is_squarefree(f.level) {
        caveats.push("conductor is not squarefree".to_string());
    }
    let curve = f.curve.unwrap();
    let report = trivial_zero_report(f, &TwistPoint::new(f.m() as i64, chi.clone()), p, budget)?;
    let l_inv = l_invariant(f, p, budget)?;
    let (l1, err) = sym2_l_at_one(f, &AfeConfig::default())?;
    let finer = AfeConfig {
        terms: 3000,
        step: 0.025,
        ..AfeConfig::default()
    };
    let (l1b, _) = sym2_l_at_one(f, &finer)?;
    let lattice = period_lattice(&curve);
    let degree = GENUS_ONE_LEVELS.contains(&f.level).then_some(1u64);
    if degree.is_none() {
        caveats.push("modular degree unknown: Omega(f) taken as the lattice covolume".to_string());
    }
    let omega = lattice.area * degree.unwrap_or(1) as f64;
    let ratio = std::f64::consts::PI * l1 / omega;
    let ratio_b = std::f64::consts::PI * l1b / omega;
    let rec = recognize_rational(ratio, 10_000, 1e-7);
    let rec_b = recognize_rational(ratio_b, 10_000, 1e-7);
    let stable = rec.is_some() && rec == rec_b;
    let predicted = rec.as_ref().map(|r| {
        let rp = PadicNumber::from_rational(r, p, l_inv.precision());
        l_inv.mul(&rp).to_string()
    });
    Ok(DerivativePrediction {
        form: f.label.clone(),
        p,
        g: report.g,
        l_invariant: l_inv.to_string(),
        f_p: 1,
        l_value_sym2_at_1: l1,
        l_value_error: err,
        omega,
        modular_degree: degree,
        ratio,
        recognized: rec.map(|r| r.to_string()),
        recognized_refined: rec_b.map(|r| r.to_string()),
        recognition_stable: stable,
        predicted_derivative: predicted,
        normalization_scalar: "unpinned nonzero constant relating L_p(s, Sym^2 f) to the Hida-family specialization"
            .into(),
        caveats,
        statement: format!(
            "ord_(s=0) L_p(s, Sym^2 f) >= {g}; d/ds L_p(s, Sym^2 f)|_(s=0) = L * f_p * L(1, Sym^2 f)/Omega(f)",
            g = report.g
        ),
    })
}

// ---------------------------------------------------------------------------
// Base change

#[derive(Debug, Clone, Serialize)]
pub struct BaseChangeOrder {
    pub n: u64,
    pub f: u64,
    pub g: u64,
    pub product: String,
    pub expected: String,
    pub holds: bool,
    pub nontrivial_characters: u64,
}

/// For H cyclic of order n and Frobenius of order f: g = n/f and
/// ∏_{φ(Frob) ≠ 1} (1 − φ(Frob)) = f^g in Q(ζ_n).
pub fn base_change_order(n: u64, f: u64) -> Result<BaseChangeOrder, TrivialZeroError> {
    if f == 0 || n == 0 || n % f != 0 {
        return Err(TrivialZeroError::NonDivisor { n, f });
    }
    let g = n / f;
    let mut prod = Cyclo::int(1);
    let mut count = 0;
    for j in 0..n {
        // φ_j(Frob) with Frob = generator^{n/f}
        let e = (j * g) % n;
        if e == 0 {
            continue;
        }
        count += 1;
        prod = prod.times(&Cyclo::int(1).minus(&Cyclo::zeta(n, e as i64)));
    }
    let expected = BigInt::from(f).pow(g as u32);
    let prod = prod.minimize();
    let holds = prod
        .as_rational()
        .is_some_and(|r| r == Q::from_integer(expected.clone()));
    Ok(BaseChangeOrder {
        n,
        f,
        g,
        product: prod.to_string(),
        expected: expected.to_string(),
        holds,
        nontrivial_characters: count,
    })
}

/// Whether ψψ′^{−2}χ^{−1} is the quadratic character of an imaginary
/// quadratic field of discriminant d (over Q, ψ′ is trivial).
pub fn cm_pole_predicate(f: &NewformData, chi: &DirichletCharacter, d: i64) -> bool {
    if d >= 0 || !is_fundamental_discriminant(d) {
        return false;
    }
    let c = f.psi.mul(&chi.inverse()).primitive_part();
    let k = DirichletCharacter::kronecker_char(d).primitive_part();
    c.modulus() == k.modulus() && (1..=c.modulus() as i64).all(|a| c.value(a) == k.value(a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_j_series_starts_classically() {
        let c = q_of_inverse_j(4);
        assert_eq!(c[1], BigInt::from(1));
        assert_eq!(c[2], BigInt::from(744));
        assert_eq!(c[3], BigInt::from(750420));
    }

    #[test]
    fn base_change_small_cases() {
        assert_eq!(base_change_order(2, 2).unwrap().product, "2");
        let r = base_change_order(6, 3).unwrap();
        assert_eq!(r.g, 2);
        assert!(r.holds);
        assert!(base_change_order(5, 1).unwrap().holds);
        assert!(base_change_order(6, 4).is_err());
    }
}
