//! Complex side of the symmetric square: Euler factors at every prime,
//! Γ- and ε-factors, the smoothed approximate functional equation, and
//! Dirichlet L-functions with their functional equation.

pub mod afe;
pub mod euler;
pub mod gamma;
pub mod hecke;

use thiserror::Error;

use crate::eigendata::EigenError;

pub use afe::{completed_l, epsilon_factor, functional_equation_residual, CompletedLValue, EpsilonData};
pub use euler::{
    route_b, sym2_dirichlet_coeffs, sym2_euler_factor, sym2_imprimitive_series, sym2_primitive_series, EulerFactor,
    FactorTag,
};
pub use gamma::{gamma_c, gamma_factor, gamma_r, GammaValue};
pub use hecke::{hecke_fe_residual, hecke_l, hurwitz_zeta};

#[derive(Debug, Error)]
pub enum LfunError {
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error("route A and route B differ first at index {0}")]
    IdentityMismatch(u64),
    #[error("need coefficients up to {0}")]
    InsufficientCoefficients(u64),
    #[error("supercuspidal ε-factor at q = {0} must be supplied")]
    MissingSupercuspidalEpsilon(u64),
    #[error("series did not converge: {0}")]
    ConvergenceError(String),
    #[error("character must be primitive")]
    NotPrimitive,
}
