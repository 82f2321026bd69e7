use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::characters::DirichletCharacter;
use crate::eigendata::NewformData;

const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
];

/// log Γ(z) by Stirling's series after shifting Re z past 15, with the
/// reflection formula on the left half-plane. The branch is continuous
/// along vertical lines, which is all the exponentiated uses need.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // Γ(z)Γ(1−z) = π / sin(πz)
        let s = (Complex64::new(PI, 0.0) * z).sin();
        return Complex64::new(PI.ln(), 0.0) - s.ln() - ln_gamma(Complex64::new(1.0, 0.0) - z);
    }
    let mut shift = Complex64::new(0.0, 0.0);
    let mut w = z;
    while w.re < 15.0 {
        shift += w.ln();
        w += 1.0;
    }
    let mut series = Complex64::new(0.0, 0.0);
    let w2 = w * w;
    let mut wp = w;
    for c in STIRLING {
        series += c / wp;
        wp *= w2;
    }
    (w - 0.5) * w.ln() - w + 0.5 * (2.0 * PI).ln() + series - shift
}

pub fn gamma(z: Complex64) -> Complex64 {
    ln_gamma(z).exp()
}

/// Γ_R(s) = π^{−s/2} Γ(s/2).
pub fn gamma_r(s: Complex64) -> Complex64 {
    (-s / 2.0 * PI.ln() + ln_gamma(s / 2.0)).exp()
}

/// Γ_C(s) = 2 (2π)^{−s} Γ(s).
pub fn gamma_c(s: Complex64) -> Complex64 {
    2.0 * (-s * (2.0 * PI).ln() + ln_gamma(s)).exp()
}

pub fn ln_gamma_r(s: Complex64) -> Complex64 {
    -s / 2.0 * PI.ln() + ln_gamma(s / 2.0)
}

pub fn ln_gamma_c(s: Complex64) -> Complex64 {
    2f64.ln() - s * (2.0 * PI).ln() + ln_gamma(s)
}

fn near_nonpositive_integer(z: Complex64) -> bool {
    z.im.abs() < 1e-12 && z.re < 0.5 && (z.re - z.re.round()).abs() < 1e-12
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GammaValue {
    pub re: f64,
    pub im: f64,
    pub kappa: u32,
    pub pole: bool,
}

/// κ ≡ m + parity(χψ) mod 2: the real Γ-factor of the twisted symmetric square.
pub fn sym2_kappa(f: &NewformData, chi: &DirichletCharacter) -> u32 {
    (f.m() + chi.mul(&f.psi).parity()) % 2
}

/// log of Γ_R(s − m − κ)·Γ_C(s − m − 2 + k).
pub fn ln_gamma_sym2(m: u32, k: u32, kappa: u32, s: Complex64) -> Complex64 {
    ln_gamma_r(s - (m + kappa) as f64) + ln_gamma_c(s - m as f64 - 2.0 + k as f64)
}

pub fn gamma_factor_kappa(m: u32, k: u32, kappa: u32, s: Complex64) -> GammaValue {
    let a = (s - (m + kappa) as f64) / 2.0;
    let b = s - m as f64 - 2.0 + k as f64;
    if near_nonpositive_integer(a) || near_nonpositive_integer(b) {
        return GammaValue {
            re: f64::NAN,
            im: f64::NAN,
            kappa,
            pole: true,
        };
    }
    let v = ln_gamma_sym2(m, k, kappa, s).exp();
    GammaValue {
        re: v.re,
        im: v.im,
        kappa,
        pole: false,
    }
}

pub fn gamma_factor(f: &NewformData, chi: &DirichletCharacter, s: Complex64) -> GammaValue {
    gamma_factor_kappa(f.m(), f.weight, sym2_kappa(f, chi), s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        let one = Complex64::new(1.0, 0.0);
        assert!((gamma_r(one) - 1.0).norm() < 1e-14);
        let g2 = gamma_c(Complex64::new(2.0, 0.0));
        assert!((g2.re - 1.0 / (2.0 * PI * PI)).abs() < 1e-15);
        assert!((gamma(Complex64::new(5.0, 0.0)).re - 24.0).abs() < 1e-11);
        assert!((gamma(Complex64::new(0.5, 0.0)).re - PI.sqrt()).abs() < 1e-14);
        // Γ(1+it)Γ(1−it) = πt / sinh(πt)
        let t = 2.3;
        let z = Complex64::new(1.0, t);
        let prod = gamma(z) * gamma(z.conj());
        assert!((prod.re - PI * t / (PI * t).sinh()).abs() < 1e-14);
        let v = gamma_factor_kappa(0, 2, 1, Complex64::new(2.0, 0.0));
        assert!((v.re - 1.0 / (2.0 * PI * PI)).abs() < 1e-14);
        assert!(gamma_factor_kappa(0, 2, 0, Complex64::new(0.0, 0.0)).pole);
    }
}
