//! Numerical toolkit for the higher-order semilinear heat equation
//! `u_t + (-Delta)^m u = |u|^p` with singular initial data.
//!
//! The library computes the sign-changing polyharmonic kernel and the positive
//! fractional (stable) kernel as cached radial profiles, evaluates the
//! power-tailed majorizing kernel built from the stable one, estimates the
//! comparison constants that make it a majorant, classifies initial data
//! against existence and non-existence thresholds around the critical exponent
//! `1 + 2m/N`, and constructs mild solutions by weighted Picard iteration on a
//! periodic spectral grid.
//!
//! Start from the `examples/` directory: each example is a runnable tour of one
//! capability. The thin `polyheat` binary exposes the same operations as
//! subcommands with CSV output.

pub mod cache;
pub mod cli;
pub mod config;
pub mod criteria;
pub mod error;
pub mod grid;
pub mod majorant;
pub mod params;
pub mod profile;
pub mod quad;
pub mod report;
pub mod solver;
pub mod testfn;

pub use error::{Error, Result};
pub use params::ProblemParams;
pub use profile::{KernelKind, RadialKernelProfile};
