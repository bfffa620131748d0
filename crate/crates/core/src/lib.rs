//! Quantum Bell–Ziv–Zakai lower bounds on the mean-square error of
//! multiparameter estimation with Gaussian priors, their Heisenberg-limit
//! asymptote, and brute-force oracles that check the bounds hold.

pub mod bound;
pub mod cli;
pub mod error;
pub mod io;
pub mod oracle;
pub mod prior;
pub mod quadrature;
pub mod resource;
pub mod specfun;
pub mod waveform;

#[cfg(test)]
pub(crate) mod testutil;

pub use bound::{
    bzzb_generic, directional_bound, parameter_bound, scan, weighted_photon_upper, z_integral,
    BoundResult, Regime,
};
pub use error::{Error, Result};
pub use prior::{Direction, GaussianPrior, OUProcess};
pub use resource::{ProbeSpectrum, ResourceSummary};
pub use specfun::{lambda, solve_lambda, LambdaConstant};
