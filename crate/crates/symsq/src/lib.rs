//! Symmetric-square L-functions of modular eigenforms: exact Euler factors and
//! Dirichlet series, theta and Eisenstein q-expansions, complex L-values,
//! Iwasawa power series, trivial zeros and L-invariants.

pub mod arith;
pub mod characters;
pub mod cli;
pub mod eigendata;
pub mod exact;
pub mod iwasawa;
pub mod lfun;
pub mod lvalues;
pub mod padic;
pub mod qexpansion;
pub mod trivial_zero;
