//! Solver and estimate auditor for the initial-boundary value problem
//!
//! ```text
//! u_t + sum_{j=1}^{l} (-1)^{j+1} D^{2j+1} u + u^k D u = 0,   x in (0, L)
//! D^i u(t,0) = D^i u(t,L) = D^l u(t,L) = 0,                  i = 0..l-1
//! ```
//!
//! The nonlinear problem is solved the way its local well-posedness is
//! proved: the nonlinearity is frozen along a candidate trajectory, the
//! resulting linear problem is solved exactly (up to discretization), and the
//! map from candidate to solution is iterated to its fixed point. Every
//! inequality and explicit constant the argument relies on can be evaluated
//! on the discrete solution through [`estimates`].
//!
//! Layout:
//! - [`grid`]: uniform grid, finite differences, trapezoid norms
//! - [`operator`]: the banded dispersion operator with eliminated boundary conditions
//! - [`linear`]: stationary and Crank–Nicolson evolution solves
//! - [`fixedpoint`]: the Picard map, the V-norm and the contraction monitor
//! - [`estimates`]: inequality checkers, the energy identity and the existence-time budget

pub mod banded;
pub mod error;
pub mod estimates;
pub mod fixedpoint;
pub mod grid;
pub mod initial;
pub mod linear;
pub mod manufactured;
pub mod operator;
pub mod samples;
mod stencil;
pub mod suite;

pub use error::{Error, Result};
pub use estimates::{ExistenceBudget, InequalityVerdict};
pub use fixedpoint::{ContractionLog, PicardOptions, VNorm};
pub use grid::{Grid, GridFunction, NormReport};
pub use initial::InitialCondition;
pub use linear::{Forcing, StationaryResult, Trajectory};
pub use operator::DispersionOperator;
