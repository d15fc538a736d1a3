//! Risk-adjustable distributionally robust chance-constrained programs.
//!
//! A chance constraint `P(T x >= xi) >= 1 - alpha` is enforced for every
//! distribution within Wasserstein distance `epsilon` of the empirical sample
//! distribution, and the risk level `alpha` is itself a decision with cost
//! `g(alpha)`. The crate provides:
//!
//! - [`samples`]: the worst-case VaR engine and the VaR staircase.
//! - [`model`]: a small mixed-integer conic model with LP/MPS I/O.
//! - [`reformulate`]: the finite MILP, continuous MISOCP, MILP-binary and
//!   stochastic builders plus their cutting planes.
//! - [`solve`]: dual simplex, branch-and-cut and enumeration oracles.
//! - [`instances`]: transportation and building-load generators.
//! - [`harness`]: end-to-end runs, reports and comparisons.

pub mod error;
pub mod harness;
pub mod instances;
pub mod model;
pub mod reformulate;
pub mod samples;
pub mod solve;

pub use error::{DrccError, Result};
pub use samples::{RiskBounds, RiskCost, SampleSet, VarCurve, VarLevel, VarVariant};
