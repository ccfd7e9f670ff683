//! Discrete minimization of the penalized Nash quotient
//! `I_alpha(u) = (int |grad u|^2 + (alpha0 - alpha) int u^2) (int |u|^{1+eps})^{4/(n(1+eps))} / (int u^2)^{1+2/n}`
//! on the circle and on round spheres (zonal reduction), with blow-up diagnostics.

mod diagnostics;
mod functional;
mod grid;
mod minimize;
mod sweep;

pub use diagnostics::{concentration_diagnostics, delta_key, ConcentrationReport, DEFAULT_DELTAS};
pub use functional::{euler_residual_norm, evaluate_i_alpha};
pub use grid::{build_grid, ManifoldGrid, MIN_RESOLUTION};
pub use minimize::{
    initial_state, minimize, minimize_traced, objective_at, state_at, InitKind, MinimizerState, Trace,
    DEFAULT_BUMP_WIDTH, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
pub use sweep::{alpha_sweep, EpsSchedule, SweepOptions, SweepPoint};
