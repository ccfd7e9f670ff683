use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constants::ManifoldKind;
use crate::error::{invalid, Error, Result};

use super::functional::{check_inputs, coefficients, euler_residual, evaluate_i_alpha};
use super::grid::ManifoldGrid;

pub const DEFAULT_MAX_ITER: usize = 20_000;
pub const DEFAULT_TOL: f64 = 1e-8;
const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-12;
/// Relative slack under which an objective change is treated as roundoff.
const ROUNDOFF: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizerState {
    pub u: Vec<f64>,
    pub alpha: f64,
    pub alpha0: f64,
    pub eps_alpha: f64,
    #[serde(rename = "A_alpha")]
    pub a_alpha: f64,
    #[serde(rename = "B_alpha")]
    pub b_alpha: f64,
    pub k_alpha: f64,
    pub mu_alpha: f64,
    /// `int |grad u|^2`.
    pub dirichlet: f64,
    pub residual: f64,
    pub x_max_index: usize,
    pub iterations: usize,
    pub converged: bool,
}

/// Objective and `int u^2` after each accepted step (entry 0 is the projected start).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub objective: Vec<f64>,
    pub l2: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum InitKind {
    Constant,
    /// `exp(-(d/width)^2)` around node 0.
    Bump {
        width: f64,
    },
    /// Independent uniform values in `[0.5, 1.5)`.
    Random {
        seed: u64,
    },
}

/// Default bump width as a fraction of the model's size parameter.
pub const DEFAULT_BUMP_WIDTH: f64 = 0.3;

pub fn initial_state(grid: &ManifoldGrid, init: InitKind) -> Result<Vec<f64>> {
    match init {
        InitKind::Constant => Ok(vec![1.0; grid.len()]),
        InitKind::Bump { width } => {
            if !(width > 0.0) {
                return Err(invalid("bump width must be positive"));
            }
            let origin = match grid.model.kind {
                ManifoldKind::RoundSphere => None,
                _ => Some(0),
            };
            Ok((0..grid.len())
                .map(|i| {
                    let d = match origin {
                        Some(o) => grid.distance(i, o),
                        None => grid.model.size_param * grid.nodes[i],
                    };
                    (-(d / width).powi(2)).exp()
                })
                .collect())
        }
        InitKind::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok((0..grid.len()).map(|_| rng.gen_range(0.5..1.5)).collect())
        }
    }
}

fn project(u: &[f64], grid: &ManifoldGrid) -> Option<Vec<f64>> {
    let v: Vec<f64> = u.iter().map(|x| x.max(0.0)).collect();
    let l2 = grid.inner(&v, &v);
    if l2 > 0.0 && l2.is_finite() {
        let s = l2.sqrt();
        Some(v.iter().map(|x| x / s).collect())
    } else {
        None
    }
}

fn argmax(u: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in u.iter().enumerate() {
        if x > u[best] {
            best = i;
        }
    }
    best
}

/// Assembles the full state for a projected `u`.
pub fn state_at(
    u: Vec<f64>,
    grid: &ManifoldGrid,
    alpha: f64,
    alpha0: f64,
    eps_alpha: f64,
    iterations: usize,
    tol: f64,
) -> MinimizerState {
    let c = coefficients(&u, grid, alpha0 - alpha, eps_alpha);
    let (_, residual) = euler_residual(&u, grid, &c, eps_alpha);
    MinimizerState {
        x_max_index: argmax(&u),
        u,
        alpha,
        alpha0,
        eps_alpha,
        a_alpha: c.a,
        b_alpha: c.b,
        k_alpha: c.k,
        mu_alpha: c.mu,
        dirichlet: c.dirichlet,
        residual,
        iterations,
        converged: residual <= tol,
    }
}

/// Minimizes `I_alpha` over `{u >= 0, int u^2 = 1}`.
///
/// Each step solves `(2A K + W diag(|k| + (4/n) B eps u^{eps-1})) d = -W E`,
/// where `E` is the Euler residual (the gradient of `I_alpha` on the
/// constraint set in the weighted metric), then backtracks on
/// `u -> normalize(max(u + t d, 0))`.
pub fn minimize(
    grid: &ManifoldGrid,
    alpha: f64,
    alpha0: f64,
    eps_alpha: f64,
    init: &[f64],
    max_iter: usize,
    tol: f64,
) -> Result<MinimizerState> {
    minimize_traced(grid, alpha, alpha0, eps_alpha, init, max_iter, tol, None)
}

#[allow(clippy::too_many_arguments)]
pub fn minimize_traced(
    grid: &ManifoldGrid,
    alpha: f64,
    alpha0: f64,
    eps_alpha: f64,
    init: &[f64],
    max_iter: usize,
    tol: f64,
    mut trace: Option<&mut Trace>,
) -> Result<MinimizerState> {
    check_inputs(init, grid, eps_alpha)?;
    if !(alpha > 0.0 && alpha.is_finite() && alpha0.is_finite()) {
        return Err(invalid("alpha must be positive and alpha0 finite"));
    }
    if !(tol > 0.0) {
        return Err(invalid("tol must be positive"));
    }
    if init.iter().any(|&x| x < 0.0) {
        return Err(invalid("initial state must be nonnegative"));
    }
    let mut u = project(init, grid).ok_or(Error::Degenerate("initial state is identically zero"))?;
    let n = grid.dim() as f64;
    let penalty = alpha0 - alpha;
    let objective = |v: &[f64]| coefficients(v, grid, penalty, eps_alpha).mu;
    let mut f = objective(&u);
    if let Some(t) = trace.as_deref_mut() {
        t.objective.push(f);
        t.l2.push(grid.inner(&u, &u));
    }
    let mut step: f64 = 1.0;

    for it in 0..max_iter {
        let c = coefficients(&u, grid, penalty, eps_alpha);
        let (e, r) = euler_residual(&u, grid, &c, eps_alpha);
        if r <= tol {
            return Ok(state_at(u, grid, alpha, alpha0, eps_alpha, it, tol));
        }
        let g: Vec<f64> = e.iter().zip(&grid.weights).map(|(e, w)| e * w).collect();
        let diag: Vec<f64> = u
            .iter()
            .map(|&x| {
                let curvature = if eps_alpha > 0.0 {
                    4.0 / n * c.b * eps_alpha * x.max(1e-300).powf(eps_alpha - 1.0)
                } else {
                    0.0
                };
                c.k.abs().max(1e-12) + curvature
            })
            .collect();
        let d: Vec<f64> = grid.solve_shifted(2.0 * c.a, &diag, &g).iter().map(|x| -x).collect();
        let slope: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();

        step = (2.0 * step).min(1.0);
        let accepted = loop {
            let trial: Vec<f64> = u.iter().zip(&d).map(|(x, y)| x + step * y).collect();
            if let Some(v) = project(&trial, grid) {
                let fv = objective(&v);
                if fv <= f + ARMIJO * step * slope {
                    break Some((v, fv));
                }
                if fv <= f + ROUNDOFF * f.abs() {
                    let cv = coefficients(&v, grid, penalty, eps_alpha);
                    if euler_residual(&v, grid, &cv, eps_alpha).1 < r {
                        break Some((v, fv));
                    }
                }
            }
            step *= 0.5;
            if step < MIN_STEP {
                break None;
            }
        };
        match accepted {
            Some((v, fv)) => {
                u = v;
                f = fv;
                if let Some(t) = trace.as_deref_mut() {
                    t.objective.push(f);
                    t.l2.push(grid.inner(&u, &u));
                }
            }
            None => {
                return Err(Error::StepSizeFailure {
                    iterations: it,
                    residual: r,
                })
            }
        }
    }
    Ok(state_at(u, grid, alpha, alpha0, eps_alpha, max_iter, tol))
}

/// Recomputes `I_alpha` at the state's `u`; equals `mu_alpha` for projected states.
pub fn objective_at(state: &MinimizerState, grid: &ManifoldGrid) -> Result<f64> {
    evaluate_i_alpha(&state.u, grid, state.alpha, state.alpha0, state.eps_alpha)
}
