//! Numerical toolkit for the ground-state energy of dilute one-dimensional
//! Bose gases, spinless fermions and anyons.

pub mod acceptance;
pub mod config;
pub mod ed_oracle;
pub mod error;
pub mod free_fermi;
pub mod lieb_liniger;
pub mod oracles;
pub mod potential;
pub mod quadrature;
pub mod scattering;
pub mod sweep;
pub mod trial_states;
pub mod validator;

pub use error::{Error, Result};
pub use potential::{Potential, PotentialComponent};
