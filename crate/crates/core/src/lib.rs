//! Convex problems of Bolza over left-continuous arcs of bounded variation.
//!
//! The crate is organised bottom-up:
//!
//! * [`measure`]: grids, the base measure, vector measures with atoms, BV arcs
//!   and continuous piecewise-linear arcs, pairings.
//! * [`convex`]: exact calculus for separable piecewise linear-quadratic
//!   functions (conjugates, recession functions, subdifferentials) and a
//!   sampled Legendre transform.
//! * [`integrand`]: time-dependent integrands `K_t(x, u) = φ_t(x) + ψ_t(u)`,
//!   endpoint costs, the functional `J_K` and regularity of domain maps.
//! * [`solver`]: primal and dual discretisations, duality gaps, value sweeps
//!   and lineality checks.
//! * [`optimality`]: residuals of the optimality system and certificates.
//! * [`ode`]: Picard iteration for measure-driven equations with Gronwall bounds.
//! * [`io`] and [`cli`]: JSON input formats and the `bolza` command line.

pub mod cli;
pub mod convex;
pub mod error;
pub mod integrand;
pub mod io;
pub mod measure;
pub mod ode;
pub mod optimality;
pub mod solver;

pub use error::{BolzaError, Result};
