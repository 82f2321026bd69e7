use std::f64::consts::PI;

use num_complex::Complex64;

use crate::characters::{gauss_sum, DirichletCharacter};
use crate::exact::q_to_f64;
use crate::lvalues::bernoulli;

use super::gamma::ln_gamma;
use super::LfunError;

/// Hurwitz ζ(s, a) for 0 < a ≤ 1 by Euler–Maclaurin summation.
pub fn hurwitz_zeta(s: Complex64, a: f64) -> Complex64 {
    let (regular, x) = hurwitz_regular(s, a);
    regular + Complex64::new(x, 0.0).powc(Complex64::new(1.0, 0.0) - s) / (s - 1.0)
}

const EM_TERMS: usize = 24;

/// ζ(s, a) minus its pole term x^{1−s}/(s − 1), together with x.
fn hurwitz_regular(s: Complex64, a: f64) -> (Complex64, f64) {
    const J: usize = 14;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..EM_TERMS {
        acc += Complex64::new(k as f64 + a, 0.0).powc(-s);
    }
    let x = EM_TERMS as f64 + a;
    let xs = Complex64::new(x, 0.0).powc(-s);
    acc += xs / 2.0;
    // Σ B_{2j}/(2j)! · s(s+1)…(s+2j−2) · x^{−s−2j+1}
    let mut rising = s;
    let mut fact = 2.0;
    let mut xp = xs / x;
    for j in 1..=J {
        let b = q_to_f64(&bernoulli(2 * j));
        acc += b / fact * rising * xp;
        rising *= (s + (2 * j - 1) as f64) * (s + (2 * j) as f64);
        fact *= ((2 * j + 1) * (2 * j + 2)) as f64;
        xp /= x * x;
    }
    (acc, x)
}

/// (x^{1−s} − 1)/(s − 1), continuous through s = 1.
fn pole_difference(s: Complex64, x: f64) -> Complex64 {
    let u = (Complex64::new(1.0, 0.0) - s) * x.ln();
    if u.norm() < 1e-4 {
        -x.ln() * (1.0 + u / 2.0 + u * u / 6.0 + u * u * u / 24.0)
    } else {
        (u.exp() - 1.0) / (s - 1.0)
    }
}

/// L(s, χ) = f^{−s} Σ_{a mod f} χ(a) ζ(s, a/f) for the primitive character.
/// For χ nontrivial the pole terms cancel since Σ χ(a) = 0, which keeps
/// s = 1 finite.
pub fn hecke_l(chi: &DirichletCharacter, s: Complex64) -> Complex64 {
    let prim = chi.primitive_part();
    let f = prim.modulus();
    if f == 1 {
        return hurwitz_zeta(s, 1.0);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 1..=f {
        let v = prim.value_complex(a as i64);
        if v.norm() == 0.0 {
            continue;
        }
        let (regular, x) = hurwitz_regular(s, a as f64 / f as f64);
        acc += v * (regular + pole_difference(s, x));
    }
    acc * Complex64::new(f as f64, 0.0).powc(-s)
}

/// Λ(s, χ) = (f/π)^{s/2} Γ((s+δ)/2) L(s, χ).
pub fn hecke_completed(chi: &DirichletCharacter, s: Complex64) -> Complex64 {
    let prim = chi.primitive_part();
    let f = prim.modulus() as f64;
    let delta = prim.parity() as f64;
    ((s / 2.0) * (f / PI).ln() + ln_gamma((s + delta) / 2.0)).exp() * hecke_l(&prim, s)
}

/// Root number τ(χ)/(i^δ √f).
pub fn hecke_root_number(chi: &DirichletCharacter) -> Complex64 {
    let prim = chi.primitive_part();
    let g = gauss_sum(&prim).complex();
    let idelta = Complex64::i().powu(prim.parity());
    g / (idelta * (prim.modulus() as f64).sqrt())
}

/// |Λ(s, χ) − ε Λ(1−s, χ̄)| / max(|Λ(s, χ)|, 1).
pub fn hecke_fe_residual(chi: &DirichletCharacter, s: Complex64) -> Result<f64, LfunError> {
    if !chi.is_primitive() {
        return Err(LfunError::NotPrimitive);
    }
    let lhs = hecke_completed(chi, s);
    let rhs = hecke_root_number(chi) * hecke_completed(&chi.inverse(), Complex64::new(1.0, 0.0) - s);
    Ok((lhs - rhs).norm() / lhs.norm().max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_two() {
        let v = hecke_l(&DirichletCharacter::trivial(1), Complex64::new(2.0, 0.0));
        assert!((v.re - PI * PI / 6.0).abs() < 1e-13);
        let l4 = hecke_l(&DirichletCharacter::kronecker_char(-4), Complex64::new(1.0, 0.0));
        assert!((l4.re - PI / 4.0).abs() < 1e-13);
    }

    #[test]
    fn functional_equation() {
        let chi = DirichletCharacter::kronecker_char(5);
        let r = hecke_fe_residual(&chi, Complex64::new(0.3, 0.7)).unwrap();
        assert!(r < 1e-10, "{r}");
        let even = DirichletCharacter::kronecker_char(5);
        assert!(hecke_l(&even, Complex64::new(0.0, 0.0)).norm() < 1e-12);
    }
}
