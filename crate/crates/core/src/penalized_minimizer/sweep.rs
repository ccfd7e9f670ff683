use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::extremal_profile::RadialFunction;

use super::diagnostics::{concentration_diagnostics, ConcentrationReport};
use super::grid::ManifoldGrid;
use super::minimize::{minimize, MinimizerState};

/// Map `alpha -> eps_alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum EpsSchedule {
    /// `eps = c alpha`.
    Proportional(f64),
    Fixed(f64),
}

impl EpsSchedule {
    pub fn eps(&self, alpha: f64) -> f64 {
        match *self {
            EpsSchedule::Proportional(c) => c * alpha,
            EpsSchedule::Fixed(e) => e,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub max_iter: usize,
    pub tol: f64,
    /// Start each run from the previous solution instead of `init`.
    pub warm_start: bool,
    /// Thread cap for independent (non-warm-started) runs.
    pub threads: Option<usize>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            max_iter: super::minimize::DEFAULT_MAX_ITER,
            tol: super::minimize::DEFAULT_TOL,
            warm_start: true,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub state: MinimizerState,
    pub report: ConcentrationReport,
    /// `A_alpha int |grad u|^2`.
    pub a_dirichlet: f64,
    /// `B_alpha int u^{1+eps}`.
    pub b_mass: f64,
}

/// Runs `minimize` for each alpha (strictly decreasing) and computes diagnostics
/// against `reference`. Results are ordered as `alphas`.
#[allow(clippy::too_many_arguments)]
pub fn alpha_sweep(
    grid: &ManifoldGrid,
    alphas: &[f64],
    alpha0: f64,
    schedule: EpsSchedule,
    init: &[f64],
    reference: &RadialFunction,
    deltas: &[f64],
    options: SweepOptions,
) -> Result<Vec<SweepPoint>> {
    if alphas.is_empty() {
        return Err(invalid("need at least one alpha"));
    }
    if alphas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(invalid("alphas must be strictly decreasing"));
    }
    let finish = |state: MinimizerState| -> Result<SweepPoint> {
        let report = concentration_diagnostics(&state, grid, reference, deltas)?;
        let p: f64 = grid.integrate(|i| state.u[i] * super::functional::pow_eps(state.u[i], state.eps_alpha));
        Ok(SweepPoint {
            a_dirichlet: state.a_alpha * state.dirichlet,
            b_mass: state.b_alpha * p,
            state,
            report,
        })
    };
    if options.warm_start {
        let mut start = init.to_vec();
        let mut out = Vec::with_capacity(alphas.len());
        for &alpha in alphas {
            let state = minimize(
                grid,
                alpha,
                alpha0,
                schedule.eps(alpha),
                &start,
                options.max_iter,
                options.tol,
            )?;
            start.clone_from(&state.u);
            out.push(finish(state)?);
        }
        return Ok(out);
    }
    let run = || -> Result<Vec<SweepPoint>> {
        alphas
            .par_iter()
            .map(|&alpha| {
                minimize(
                    grid,
                    alpha,
                    alpha0,
                    schedule.eps(alpha),
                    init,
                    options.max_iter,
                    options.tol,
                )
                .and_then(finish)
            })
            .collect()
    };
    match options.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| invalid(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}
