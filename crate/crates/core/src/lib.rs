//! Numerical verification of Hermite–Hadamard type integral inequalities.
//!
//! The crate evaluates both sides of a family of bounds on the deviation
//! functionals
//!
//! ```text
//! D1(f) = (1/(b-a)) ∫ f  -  (b f(b) - a f(a)) / (b-a)
//! D2(f) = D1(f) ± (b f'(b) + a f'(a)) / 2
//! ```
//!
//! for test functions with closed-form derivatives, checks the convexity and
//! monotonicity hypotheses of each bound on a grid, and runs seeded property
//! suites over randomly generated instances.
//!
//! Modules:
//! - [`funcspec`]: test functions, intervals, grid hypothesis checks
//! - [`quad`]: adaptive Simpson quadrature and the deviation functionals
//! - [`special`]: Gamma and Beta functions
//! - [`bounds`]: right-hand-side evaluators and [`bounds::evaluate_bound`]
//! - [`means`]: arithmetic / generalized logarithmic means and the
//!   proposition checks built on them
//! - [`hiprec`]: high-precision substitution oracle used to confirm
//!   proposition violations
//! - [`harness`]: seeded trial generation, suites, counterexample shrinking
//! - [`report`] and [`cli`]: serialization and the command-line front end

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod error;
pub mod funcspec;
pub mod harness;
pub mod hiprec;
pub mod means;
pub mod quad;
pub mod report;
pub mod special;

pub use error::{Error, Result};
