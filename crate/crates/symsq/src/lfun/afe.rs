//! Smoothed approximate functional equation for Λ(s, Sym²f ⊗ χ).
//!
//! With w = 2m + 3 and any entire g of Gaussian decay on vertical lines,
//!
//!   Λ(s)g(s) = Σ a_n F(s, n) + ε Σ ā_n F*(w − s, n),
//!
//! where F(s, n) = (1/2πi)∫ γ(z)g(z)Q^{z/2}n^{−z} dz/(z − s) along Re z = c
//! and F* uses g(w − z) in place of g(z). The integrals are computed by the
//! trapezoid rule, which converges geometrically for analytic integrands.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{factorize, gcd};
use crate::characters::DirichletCharacter;
use crate::eigendata::{LocalKind, NewformData};

use super::euler::sym2_primitive_series;
use super::gamma::{ln_gamma_sym2, sym2_kappa};
use super::hecke::hecke_root_number;
use super::LfunError;

#[derive(Debug, Clone, Serialize)]
pub struct EpsilonData {
    pub re: f64,
    pub im: f64,
    pub conductor: u64,
    pub exponents: BTreeMap<u64, u32>,
    /// "formula" when assembled from Gauss sums, "solved" when fixed from
    /// two smoothed evaluations.
    pub method: String,
}

impl EpsilonData {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Conductor exponents of Sym²f ⊗ χ at each ramified prime.
pub fn conductor_exponents(f: &NewformData, chi: &DirichletCharacter) -> Result<BTreeMap<u64, u32>, LfunError> {
    let prim = chi.primitive_part();
    let a = |c: &DirichletCharacter, q: u64| -> u32 {
        let cond = c.conductor();
        factorize(cond)
            .into_iter()
            .find(|&(p, _)| p == q)
            .map(|(_, e)| e)
            .unwrap_or(0)
    };
    let tau = prim.mul(&f.psi);
    let mut primes: Vec<u64> = factorize(f.level).into_iter().map(|(q, _)| q).collect();
    primes.extend(factorize(prim.modulus()).into_iter().map(|(q, _)| q));
    primes.sort_unstable();
    primes.dedup();
    let mut out = BTreeMap::new();
    for q in primes {
        let e = if !f.is_bad(q) {
            3 * a(&prim, q)
        } else {
            match f.classify_local_type(q)?.kind {
                LocalKind::Steinberg => {
                    if tau.is_ramified_at(q) {
                        3 * a(&tau, q)
                    } else {
                        2
                    }
                }
                LocalKind::PrincipalRamifiedOne => a(&prim, q) + a(&tau, q) + a(&prim.mul(&f.psi.pow(2)), q),
                LocalKind::PrincipalUnramified => 3 * a(&tau, q),
                LocalKind::Supercuspidal => return Err(LfunError::MissingSupercuspidalEpsilon(q)),
            }
        };
        if e > 0 {
            out.insert(q, e);
        }
    }
    Ok(out)
}

/// Global root number. For χ of conductor prime to the level it is
/// χ(N′)·ε(χ)³ with N′ the conductor of the untwisted square and ε(χ) the
/// Dirichlet root number; otherwise it is solved from two smoothings.
pub fn epsilon_factor(f: &NewformData, chi: &DirichletCharacter) -> Result<EpsilonData, LfunError> {
    let exps = conductor_exponents(f, chi)?;
    let conductor = exps.iter().map(|(q, e)| q.pow(*e)).product();
    let prim = chi.primitive_part();
    if gcd(prim.modulus() as i64, f.level as i64) == 1 {
        let base = conductor_exponents(f, &DirichletCharacter::trivial(1))?;
        let n0: u64 = base.iter().map(|(q, e)| q.pow(*e)).product();
        let e_chi = hecke_root_number(&prim);
        let eps = prim.value_complex(n0 as i64) * e_chi * e_chi * e_chi;
        return Ok(EpsilonData {
            re: eps.re,
            im: eps.im,
            conductor,
            exponents: exps,
            method: "formula".into(),
        });
    }
    epsilon_solved(f, chi, exps, conductor)
}

/// ε fixed numerically: with A_i, B_i the two halves of the smoothed identity
/// for smoothings g_i, eliminating Λ(s) gives ε = (A₁g₂ − A₂g₁)/(B₂g₁ − B₁g₂).
pub fn epsilon_solved(
    f: &NewformData,
    chi: &DirichletCharacter,
    exps: BTreeMap<u64, u32>,
    conductor: u64,
) -> Result<EpsilonData, LfunError> {
    let cfg = AfeConfig::default();
    let s = Complex64::new(f.m() as f64 + 1.5, 0.37);
    let dual = chi.inverse();
    let a = AfeSetup::new(f, chi, &cfg)?;
    let b = AfeSetup::new(f, &dual, &cfg)?;
    let g1 = Smoothing { nu: cfg.nu, s0: s };
    let g2 = Smoothing {
        nu: cfg.nu * 1.7,
        s0: s + Complex64::new(0.0, 0.5),
    };
    let (a1, b1) = a.parts(&b, s, g1, conductor as f64);
    let (a2, b2) = a.parts(&b, s, g2, conductor as f64);
    let (v1, v2) = (g1.eval(s), g2.eval(s));
    let eps = (a1 * v2 - a2 * v1) / (b2 * v1 - b1 * v2);
    Ok(EpsilonData {
        re: eps.re,
        im: eps.im,
        conductor,
        exponents: exps,
        method: "solved".into(),
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AfeConfig {
    pub nu: f64,
    pub t_max: f64,
    pub step: f64,
    pub terms: u64,
    /// Distance of the integration line from the right-most singularity.
    pub margin: f64,
}

impl Default for AfeConfig {
    fn default() -> Self {
        AfeConfig {
            nu: 0.05,
            t_max: 40.0,
            step: 0.05,
            terms: 1500,
            margin: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Smoothing {
    pub nu: f64,
    pub s0: Complex64,
}

impl Smoothing {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.nu * (z - self.s0) * (z - self.s0)).exp()
    }
}

struct AfeSetup {
    coeffs: Vec<Complex64>,
    m: u32,
    k: u32,
    kappa: u32,
    cfg: AfeConfig,
}

impl AfeSetup {
    fn new(f: &NewformData, chi: &DirichletCharacter, cfg: &AfeConfig) -> Result<Self, LfunError> {
        let terms = cfg.terms.min(f.ap_bound);
        let series = sym2_primitive_series(f, chi, terms)?;
        let coeffs = series.coeffs().iter().map(|c| c.to_complex()).collect();
        Ok(AfeSetup {
            coeffs,
            m: f.m(),
            k: f.weight,
            kappa: sym2_kappa(f, chi),
            cfg: *cfg,
        })
    }

    /// Σ_n a_n (1/2πi)∫ γ(z) h(z) Q^{z/2} n^{−z} dz/(z − s0) on Re z = c.
    fn smoothed_sum(&self, s0: Complex64, h: impl Fn(Complex64) -> Complex64 + Sync, q: f64, c: f64) -> Complex64 {
        let steps = (self.cfg.t_max / self.cfg.step).round() as i64;
        let nodes: Vec<(Complex64, Complex64)> = (-steps..=steps)
            .map(|j| {
                let z = Complex64::new(c, j as f64 * self.cfg.step);
                let w = (ln_gamma_sym2(self.m, self.k, self.kappa, z) + z / 2.0 * q.ln()).exp() * h(z) / (z - s0);
                (z, w)
            })
            .collect();
        // dz = i dt, so (1/2πi)∫ … dz = (1/2π)∫ … dt
        let scale = self.cfg.step / (2.0 * std::f64::consts::PI);
        let per_n: Vec<Complex64> = (1..self.coeffs.len())
            .into_par_iter()
            .map(|n| {
                let a = self.coeffs[n];
                if a.norm() == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let ln = (n as f64).ln();
                let mut acc = Complex64::new(0.0, 0.0);
                for (z, w) in &nodes {
                    acc += w * (-z * ln).exp();
                }
                a * acc * scale
            })
            .collect();
        pairwise_sum(&per_n)
    }

    /// The two halves (direct, dual) of the smoothed identity at s.
    fn parts(&self, dual: &AfeSetup, s: Complex64, g: Smoothing, q: f64) -> (Complex64, Complex64) {
        let w = 2.0 * self.m as f64 + 3.0;
        let c = (self.m as f64 + 2.0 + self.cfg.margin)
            .max(s.re + self.cfg.margin)
            .max(w - s.re + self.cfg.margin);
        let direct = self.smoothed_sum(s, |z| g.eval(z), q, c);
        let reflected = dual.smoothed_sum(Complex64::new(w, 0.0) - s, |z| g.eval(Complex64::new(w, 0.0) - z), q, c);
        (direct, reflected)
    }
}

/// Deterministic tree reduction so results do not depend on thread count.
pub fn pairwise_sum(xs: &[Complex64]) -> Complex64 {
    match xs.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => xs[0],
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CompletedLValue {
    pub s_re: f64,
    pub s_im: f64,
    pub re: f64,
    pub im: f64,
    /// γ(s)·Q^{s/2}
    pub gamma_re: f64,
    pub gamma_im: f64,
    /// |difference| between two smoothings, used as the error estimate.
    pub error_bound: f64,
    pub terms: u64,
    pub conductor: u64,
    pub epsilon: EpsilonData,
}

impl CompletedLValue {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

pub fn completed_l_with(
    f: &NewformData,
    chi: &DirichletCharacter,
    s: Complex64,
    cfg: &AfeConfig,
    g1: Smoothing,
    g2: Smoothing,
) -> Result<CompletedLValue, LfunError> {
    let eps = epsilon_factor(f, chi)?;
    let a = AfeSetup::new(f, chi, cfg)?;
    let b = AfeSetup::new(f, &chi.inverse(), cfg)?;
    let q = eps.conductor as f64;
    let eval = |g: Smoothing| {
        let (x, y) = a.parts(&b, s, g, q);
        (x + eps.value() * y) / g.eval(s)
    };
    let v1 = eval(g1);
    let v2 = eval(g2);
    let gam = (ln_gamma_sym2(f.m(), f.weight, a.kappa, s) + s / 2.0 * q.ln()).exp();
    let err = (v1 - v2).norm();
    if !v1.re.is_finite() || !v1.im.is_finite() {
        return Err(LfunError::ConvergenceError(format!("non-finite value at s = {s}")));
    }
    Ok(CompletedLValue {
        s_re: s.re,
        s_im: s.im,
        re: v1.re,
        im: v1.im,
        gamma_re: gam.re,
        gamma_im: gam.im,
        error_bound: err,
        terms: a.coeffs.len() as u64 - 1,
        conductor: eps.conductor,
        epsilon: eps,
    })
}

pub fn default_smoothings(s: Complex64) -> (Smoothing, Smoothing) {
    (
        Smoothing { nu: 0.05, s0: s },
        Smoothing {
            nu: 0.08,
            s0: s + Complex64::new(0.3, 0.4),
        },
    )
}

pub fn completed_l(f: &NewformData, chi: &DirichletCharacter, s: Complex64) -> Result<CompletedLValue, LfunError> {
    let (g1, g2) = default_smoothings(s);
    completed_l_with(f, chi, s, &AfeConfig::default(), g1, g2)
}

/// |Λ(s, χ) − ε Λ(w − s, χ̄)| / max(|Λ(s, χ)|, 1), each side with its own
/// smoothing.
pub fn functional_equation_residual(f: &NewformData, chi: &DirichletCharacter, s: Complex64) -> Result<f64, LfunError> {
    let cfg = AfeConfig::default();
    let w = Complex64::new(2.0 * f.m() as f64 + 3.0, 0.0);
    let lhs = completed_l_with(
        f,
        chi,
        s,
        &cfg,
        Smoothing { nu: 0.05, s0: s },
        Smoothing { nu: 0.07, s0: s },
    )?;
    let r = w - s;
    let rhs = completed_l_with(
        f,
        &chi.inverse(),
        r,
        &cfg,
        Smoothing {
            nu: 0.09,
            s0: r + Complex64::new(0.2, -0.3),
        },
        Smoothing { nu: 0.06, s0: r },
    )?;
    let d = lhs.value() - lhs.epsilon.value() * rhs.value();
    Ok(d.norm() / lhs.value().norm().max(1.0))
}

/// Λ(s) from the Dirichlet series directly, for Re s in the region of
/// absolute convergence.
pub fn completed_l_direct(
    f: &NewformData,
    chi: &DirichletCharacter,
    s: Complex64,
    terms: u64,
) -> Result<Complex64, LfunError> {
    let series = sym2_primitive_series(f, chi, terms.min(f.ap_bound))?;
    let parts: Vec<Complex64> = (1..=series.bound())
        .map(|n| series.get(n).to_complex() * (-s * (n as f64).ln()).exp())
        .collect();
    let l = pairwise_sum(&parts);
    let eps = epsilon_factor(f, chi)?;
    let q = eps.conductor as f64;
    Ok((ln_gamma_sym2(f.m(), f.weight, sym2_kappa(f, chi), s) + s / 2.0 * q.ln()).exp() * l)
}
