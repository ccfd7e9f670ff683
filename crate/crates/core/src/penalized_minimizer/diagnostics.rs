use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::constants::ManifoldKind;
use crate::error::{invalid, Result};
use crate::extremal_profile::RadialFunction;

use super::functional::pow_eps;
use super::grid::ManifoldGrid;
use super::minimize::MinimizerState;

pub const DEFAULT_DELTAS: [f64; 4] = [0.5, 1.0, 2.0, 4.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    /// Concentration radius `a_alpha = A_alpha^{1/2}`.
    pub a_alpha: f64,
    /// Keyed by the decimal form of `delta` (e.g. `"0.5"`).
    pub mass_in_ball: BTreeMap<String, f64>,
    pub l2_mass_in_ball: BTreeMap<String, f64>,
    pub decay_sup: f64,
    pub rescaled_profile: RadialFunction,
    pub profile_deviation: f64,
}

pub fn delta_key(delta: f64) -> String {
    format!("{delta}")
}

impl ConcentrationReport {
    pub fn mass_at(&self, delta: f64) -> Option<f64> {
        self.mass_in_ball.get(&delta_key(delta)).copied()
    }

    pub fn l2_mass_at(&self, delta: f64) -> Option<f64> {
        self.l2_mass_in_ball.get(&delta_key(delta)).copied()
    }
}

/// Nodes along one geodesic ray from `x_max` (the longer side on the sphere),
/// ordered by distance.
fn ray(grid: &ManifoldGrid, m: usize) -> Vec<usize> {
    let n = grid.len();
    match grid.model.kind {
        ManifoldKind::Circle => (0..=n / 2).map(|k| (m + k) % n).collect(),
        _ => {
            if n - m > m {
                (m..n).collect()
            } else {
                (0..=m).rev().collect()
            }
        }
    }
}

/// Blow-up diagnostics of a minimizer around its maximum point. On the sphere
/// distances are colatitude gaps, which is exact for zonal states maximal at a pole.
pub fn concentration_diagnostics(
    state: &MinimizerState,
    grid: &ManifoldGrid,
    reference: &RadialFunction,
    deltas: &[f64],
) -> Result<ConcentrationReport> {
    if state.u.len() != grid.len() {
        return Err(invalid("state does not live on this grid"));
    }
    if reference.dim != grid.dim() {
        return Err(invalid("reference profile dimension does not match the grid"));
    }
    if deltas.iter().any(|d| !(*d > 0.0)) {
        return Err(invalid("ball multipliers must be positive"));
    }
    let u = &state.u;
    let m = state.x_max_index;
    let a = state.a_alpha.sqrt();
    let eps = state.eps_alpha;
    let dist: Vec<f64> = (0..grid.len()).map(|i| grid.distance(i, m)).collect();
    let p_total = grid.integrate(|i| u[i] * pow_eps(u[i], eps));
    let l2_total = grid.integrate(|i| u[i] * u[i]);

    let mut mass_in_ball = BTreeMap::new();
    let mut l2_mass_in_ball = BTreeMap::new();
    for &delta in deltas {
        let radius = delta * a;
        let inside = |i: usize| dist[i] <= radius;
        let p = grid.integrate(|i| if inside(i) { u[i] * pow_eps(u[i], eps) } else { 0.0 });
        let l2 = grid.integrate(|i| if inside(i) { u[i] * u[i] } else { 0.0 });
        mass_in_ball.insert(delta_key(delta), (p / p_total).min(1.0));
        l2_mass_in_ball.insert(delta_key(delta), (l2 / l2_total).min(1.0));
    }

    let half_n = grid.dim() as f64 / 2.0;
    let decay_sup = (0..grid.len()).map(|i| u[i] * dist[i].powf(half_n)).fold(0.0, f64::max);

    let peak = u[m];
    let nodes = ray(grid, m);
    let radii: Vec<f64> = nodes.iter().map(|&i| dist[i] / a).collect();
    let values: Vec<f64> = nodes.iter().map(|&i| u[i] / peak).collect();
    let rescaled_profile = RadialFunction::new(grid.dim(), radii, values)?;
    let profile_deviation = rescaled_profile
        .grid
        .iter()
        .zip(&rescaled_profile.values)
        .map(|(&r, &v)| (v - reference.value_at(r)).abs())
        .fold(0.0, f64::max);

    Ok(ConcentrationReport {
        a_alpha: a,
        mass_in_ball,
        l2_mass_in_ball,
        decay_sup,
        rescaled_profile,
        profile_deviation,
    })
}
