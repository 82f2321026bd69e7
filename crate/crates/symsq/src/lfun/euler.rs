use num_traits::Zero;
use serde::Serialize;

use crate::arith::{gcd, primes_up_to};
use crate::characters::DirichletCharacter;
use crate::eigendata::{LocalKind, NewformData, Subcase};
use crate::exact::{q_int, Cyclo, Scalar, Q};
use crate::qexpansion::{l_n_inverse, FormalDirichletSeries};

use super::LfunError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FactorTag {
    Good,
    /// Ramified twist of an unramified principal series.
    CaseI,
    /// Principal series with one ramified character.
    CaseII,
    Steinberg,
    Sigma40,
    Sigma41,
    Sigma42,
    Sigma43,
    SupercuspidalOther,
}

/// 1 + c₁X + c₂X² + c₃X³ with X = q^{−s} in the arithmetic normalization
/// (center of symmetry at m + 3/2).
#[derive(Debug, Clone, PartialEq)]
pub struct EulerFactor {
    pub q: u64,
    pub m: u32,
    pub coeffs: Vec<Cyclo>,
    pub tag: FactorTag,
}

impl EulerFactor {
    fn from_roots(q: u64, m: u32, tag: FactorTag, roots: &[Cyclo]) -> Self {
        let mut coeffs = vec![Cyclo::int(1)];
        for r in roots {
            let mut next = coeffs.clone();
            next.push(Cyclo::int(0));
            for (i, c) in coeffs.iter().enumerate() {
                next[i + 1] = next[i + 1].minus(&c.times(r));
            }
            coeffs = next;
        }
        let mut f = EulerFactor { q, m, coeffs, tag };
        f.trim();
        f
    }

    fn cubic(q: u64, m: u32, tag: FactorTag, e1: Cyclo, e2: Cyclo, e3: Cyclo) -> Self {
        let mut f = EulerFactor {
            q,
            m,
            coeffs: vec![Cyclo::int(1), e1.negate(), e2, e3.negate()],
            tag,
        };
        f.trim();
        f
    }

    fn trim(&mut self) {
        while self.coeffs.len() > 1 && self.coeffs.last().unwrap().is_zero_value() {
            self.coeffs.pop();
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficients in the variable q^{−s} of the unitary normalization
    /// (center 1/2): c_j ↦ c_j·q^{−j(m+1)}.
    pub fn automorphic(&self) -> Vec<Cyclo> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c.scale(&q_int(self.q as i64).pow(-(j as i32) * (self.m as i32 + 1))))
            .collect()
    }

    pub fn eval(&self, x: &Cyclo) -> Cyclo {
        let mut acc = Cyclo::int(0);
        for c in self.coeffs.iter().rev() {
            acc = acc.times(x).plus(c);
        }
        acc
    }

    /// Coefficients of 1/P(X) up to X^r.
    pub fn inverse_series(&self, r: u32) -> Vec<Cyclo> {
        let mut out = vec![Cyclo::int(1)];
        for n in 1..=r as usize {
            let mut acc = Cyclo::int(0);
            for j in 1..self.coeffs.len().min(n + 1) {
                acc = acc.minus(&self.coeffs[j].times(&out[n - j]));
            }
            out.push(acc);
        }
        out
    }
}

fn qpow(q: u64, e: i32) -> Q {
    q_int(q as i64).pow(e)
}

/// Local factor of L(s, Sym²f ⊗ χ) at q, via the twist χψ of the base change.
pub fn sym2_euler_factor(f: &NewformData, q: u64, chi: &DirichletCharacter) -> Result<EulerFactor, LfunError> {
    let lt = f.classify_local_type(q)?;
    let m = f.m();
    let chi0 = chi.primitive_value(q as i64);
    let tau = chi.mul(&f.psi);
    let tau0 = tau.primitive_value(q as i64);
    let qm1 = qpow(q, m as i32 + 1);
    if !lt.bad {
        let a = Cyclo::rational(lt.a_q.clone());
        let c = f.hecke_constant(q);
        let e1 = a.times(&a).minus(&c);
        let e2 = c.times(&e1);
        let e3 = c.times(&c).times(&c);
        let y = chi0;
        return Ok(EulerFactor::cubic(
            q,
            m,
            FactorTag::Good,
            e1.times(&y),
            e2.times(&y).times(&y),
            e3.times(&y).times(&y).times(&y),
        ));
    }
    Ok(match lt.kind {
        LocalKind::Steinberg => EulerFactor::from_roots(q, m, FactorTag::Steinberg, &[tau0.scale(&qpow(q, m as i32))]),
        LocalKind::PrincipalRamifiedOne => {
            let a2 = &lt.a_q * &lt.a_q;
            let r1 = chi0.scale(&a2);
            let r2 = tau0.scale(&qm1);
            let chipsi2 = chi.mul(&f.psi.pow(2)).primitive_value(q as i64);
            let r3 = if a2.is_zero() {
                Cyclo::int(0)
            } else {
                chipsi2.scale(&(qpow(q, 2 * m as i32 + 2) / &a2))
            };
            EulerFactor::from_roots(q, m, FactorTag::CaseII, &[r1, r2, r3])
        }
        LocalKind::PrincipalUnramified => {
            let lam = lt
                .minimal_twist_aq
                .clone()
                .ok_or(LfunError::Eigen(crate::eigendata::EigenError::AmbiguousType(q)))?;
            let l = Cyclo::rational(lam);
            let c = Cyclo::rational(qm1.clone());
            let e1 = l.times(&l).minus(&c);
            let e2 = c.times(&e1);
            let e3 = c.times(&c).times(&c);
            let y = tau0;
            EulerFactor::cubic(
                q,
                m,
                FactorTag::CaseI,
                e1.times(&y),
                e2.times(&y).times(&y),
                e3.times(&y).times(&y).times(&y),
            )
        }
        LocalKind::Supercuspidal => {
            let ramified = tau.is_ramified_at(q);
            let t2 = tau.pow(2).primitive_value(q as i64).scale(&qm1);
            match lt.subcase {
                Subcase::S40 => EulerFactor::from_roots(q, m, FactorTag::Sigma40, &[tau0.scale(&qm1).negate()]),
                Subcase::S41 if ramified => {
                    EulerFactor::from_roots(q, m, FactorTag::Sigma41, &[t2.clone(), t2.negate()])
                }
                Subcase::S42 if ramified => EulerFactor::from_roots(q, m, FactorTag::Sigma42, &[t2.negate()]),
                Subcase::S43 if ramified => EulerFactor::from_roots(q, m, FactorTag::Sigma43, &[t2]),
                _ => EulerFactor::from_roots(q, m, FactorTag::SupercuspidalOther, &[]),
            }
        }
    })
}

fn max_power(q: u64, bound: u64) -> u32 {
    let mut e = 0;
    let mut x = 1u64;
    while x <= bound / q {
        x *= q;
        e += 1;
    }
    e
}

/// Expansion of ∏_q P_q(q^{−s})^{−1} given the local polynomials.
fn product_of_inverses(
    bound: u64,
    local: impl Fn(u64) -> Result<EulerFactor, LfunError>,
) -> Result<FormalDirichletSeries<Cyclo>, LfunError> {
    let mut tables = std::collections::BTreeMap::new();
    for q in primes_up_to(bound) {
        let fac = local(q)?;
        tables.insert(q, fac.inverse_series(max_power(q, bound)));
    }
    Ok(FormalDirichletSeries::from_euler_product(bound, |q, e| {
        tables[&q][e as usize].clone()
    }))
}

/// Imprimitive series 𝓛(s, f, χ) = ∏ D_q(χ(q)q^{−s})^{−1}, with D_q = 1 − a_q²X
/// at primes dividing the level.
pub fn sym2_imprimitive_series(
    f: &NewformData,
    chi: &DirichletCharacter,
    bound: u64,
) -> Result<FormalDirichletSeries<Cyclo>, LfunError> {
    product_of_inverses(bound, |q| {
        let x = chi.value(q as i64);
        let a = Cyclo::rational(f.ap(q)?.clone());
        if f.is_bad(q) {
            return Ok(EulerFactor::from_roots(
                q,
                f.m(),
                FactorTag::Steinberg,
                &[a.times(&a).times(&x)],
            ));
        }
        let c = f.hecke_constant(q);
        let e1 = a.times(&a).minus(&c);
        let e2 = c.times(&e1);
        let e3 = c.times(&c).times(&c);
        Ok(EulerFactor::cubic(
            q,
            f.m(),
            FactorTag::Good,
            e1.times(&x),
            e2.times(&x).times(&x),
            e3.times(&x).times(&x).times(&x),
        ))
    })
}

/// Dirichlet coefficients of the primitive L(s, Sym²f ⊗ χ).
pub fn sym2_primitive_series(
    f: &NewformData,
    chi: &DirichletCharacter,
    bound: u64,
) -> Result<FormalDirichletSeries<Cyclo>, LfunError> {
    product_of_inverses(bound, |q| sym2_euler_factor(f, q, chi))
}

/// Route A (Euler product) checked against route B
/// (L_N(2s − 2m − 2, ψ²χ²)·Σ λ(T(n²))χ(n)n^{−s}); returns route A.
pub fn sym2_dirichlet_coeffs(
    f: &NewformData,
    chi: &DirichletCharacter,
    bound: u64,
) -> Result<FormalDirichletSeries<Cyclo>, LfunError> {
    let a = sym2_imprimitive_series(f, chi, bound)?;
    let b = route_b(f, chi, bound)?;
    match a.first_difference(&b) {
        None => Ok(a),
        Some(n) => Err(LfunError::IdentityMismatch(n)),
    }
}

pub fn route_b(
    f: &NewformData,
    chi: &DirichletCharacter,
    bound: u64,
) -> Result<FormalDirichletSeries<Cyclo>, LfunError> {
    let m = f.m() as i32;
    let mut ln = FormalDirichletSeries::zero(bound);
    let mut n = 1u64;
    while n * n <= bound {
        if gcd(n as i64, f.level as i64) == 1 {
            let v = f.psi.value(n as i64).times(&chi.value(n as i64));
            ln.set(n * n, v.times(&v).scale(&qpow(n, 2 * m + 2)));
        }
        n += 1;
    }
    let mut sq = FormalDirichletSeries::zero(bound);
    for n in 1..=bound {
        let c = chi.value(n as i64);
        if !c.is_zero_value() {
            sq.set(n, f.lambda(n * n)?.times(&c));
        }
    }
    debug_assert!(ln
        .mul(&l_n_inverse(f, chi, bound))
        .first_difference(&FormalDirichletSeries::one(bound))
        .is_none());
    Ok(ln.mul(&sq))
}
