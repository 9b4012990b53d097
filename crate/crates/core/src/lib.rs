//! Energy-minimal radial deformations between concentric annuli.
//!
//! This crate computes neohookean-energy minimizers among radial maps
//! h(x) = H(|x|)·x/|x| between the normalized annuli A(1, R) and A(1, R*)
//! in ℝⁿ, n ≥ 2, for stored energies Φ of the Jacobian that are positive
//! and convex:
//!
//! * [`material`] — stored-energy bundles Φ, Φ̇, Φ̈, χ = 1/Φ̈ and their
//!   hypothesis checks;
//! * [`kinematics`] — pointwise geometry of radial maps and the energy
//!   density Λ = t^{n−1}(‖Dh‖ⁿ + Φ(det Dh));
//! * [`euler_lagrange`] — ODE right-hand sides, the auxiliary reduction
//!   v̇ = G(v, s), and a finite-difference variational residual oracle;
//! * [`solver`] — adaptive shooting: P(λ) = H_λ(R), the critical radius R∘
//!   below which no diffeomorphic minimizer exists, and the BVP solve;
//! * [`quadratic`] — closed forms for the planar quadratic family,
//!   including the κ-dependent Nitsche bound;
//! * [`energy`] — energy quadrature, convexity/coercivity checks, and an
//!   independent discrete variational minimizer;
//! * [`comparison`] — profile ordering under Φ̈-ordering of materials;
//! * [`verify`] — the cross-module consistency suites behind `annuli verify`.
//!
//! Batch operations (critical-radius sweeps, competitor energy batches) run
//! data-parallel under the default `parallel` feature and fall back to
//! sequential loops without it.

// precondition guards are written as `!(x > 0.0)` so NaN inputs fail them
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod comparison;
pub mod energy;
pub mod error;
pub mod euler_lagrange;
pub mod kinematics;
pub mod material;
pub mod ode;
pub mod quadratic;
pub mod quadrature;
pub mod roots;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use kinematics::{AnnulusProblem, RadialProfile, Regime};
pub use material::StoredEnergy;
pub use solver::{BvpOutcome, ShootingOutcome, SolverConfig};
