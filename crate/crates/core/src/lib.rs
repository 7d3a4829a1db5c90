//! Claims-reserving engines for run-off triangles: the Mack chain ladder and
//! the half-normal Bayesian chain ladder with conjugate inverse-gamma priors,
//! together with the special functions, quadrature, and generative simulator
//! used to check them.
//!
//! The crate is `no_std` and needs only `alloc`.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod distributions;
pub mod error;
pub mod numerics;
pub mod oracle;
pub mod reserving;
pub mod simulator;
pub mod triangle;

pub use distributions::{HalfNormal, InverseGamma};
pub use error::{Error, Result};
pub use reserving::{
    bayes_factors, bayes_posteriors, bayes_reserve, compare, elicit_prior, mack_factors,
    mack_reserve, project, AlphaChoice, Comparison, DevFactors, ElicitationMode, Method, PriorSpec,
    ReserveReport,
};
pub use simulator::{
    recovery_study, simulate_triangle, FirstColumnLaw, GenerativeSpec, RecoveryPlan,
    RecoverySummary, ThetaLaw,
};
pub use triangle::{FutureCellIndex, Triangle, TriangleKind, ValidationOptions};
