use serde::{Deserialize, Serialize};

use crate::constants::{unit_sphere_area, ManifoldKind, ManifoldModel};
use crate::error::{invalid, Result};
use crate::numerics::GaussLegendre;

pub const MIN_RESOLUTION: usize = 32;

/// One-dimensional discretization of a model manifold.
///
/// Circle: `resolution` equispaced arclength nodes, periodic.
/// Sphere: cell-centered colatitudes `theta_i = (i + 1/2) pi / N` of the zonal
/// reduction; `weights[i]` is the volume of the latitude band around `theta_i`.
///
/// The Laplacian (positive convention) is `W^{-1} K` with the stiffness
/// `K = sum_e c_e (e_i - e_j)(e_i - e_j)^T` over edges `(i, i+1)` (and
/// `(N-1, 0)` on the circle), so it is symmetric in the weighted inner product
/// and annihilates constants by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldGrid {
    pub model: ManifoldModel,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `conductances[i]` couples nodes `i` and `i + 1` (mod N on the circle).
    pub conductances: Vec<f64>,
    pub periodic: bool,
}

pub fn build_grid(model: &ManifoldModel, resolution: usize) -> Result<ManifoldGrid> {
    if resolution < MIN_RESOLUTION {
        return Err(invalid(format!(
            "resolution must be at least {MIN_RESOLUTION}, got {resolution}"
        )));
    }
    let n = resolution;
    match model.kind {
        ManifoldKind::Circle => {
            let length = model.size_param;
            let h = length / n as f64;
            Ok(ManifoldGrid {
                model: *model,
                nodes: (0..n).map(|i| i as f64 * h).collect(),
                weights: vec![h; n],
                conductances: vec![1.0 / h; n],
                periodic: true,
            })
        }
        ManifoldKind::RoundSphere => {
            if model.dim < 2 {
                return Err(invalid(
                    "zonal sphere grids need dim >= 2; use the circle model for n = 1",
                ));
            }
            let dim = model.dim;
            let radius = model.size_param;
            let area = unit_sphere_area(dim - 1);
            let h = std::f64::consts::PI / n as f64;
            let rule = GaussLegendre::new(8);
            let p = dim as i32 - 1;
            let band = |a: f64, b: f64| {
                if dim == 2 {
                    a.cos() - b.cos()
                } else {
                    rule.integrate(a, b, |t| t.sin().powi(p))
                }
            };
            let nodes: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
            let scale = radius.powi(dim as i32) * area;
            let weights = (0..n).map(|i| scale * band(i as f64 * h, (i + 1) as f64 * h)).collect();
            let edge_scale = radius.powi(dim as i32 - 2) * area / h;
            let conductances = (1..n).map(|j| edge_scale * (j as f64 * h).sin().powi(p)).collect();
            Ok(ManifoldGrid {
                model: *model,
                nodes,
                weights,
                conductances,
                periodic: false,
            })
        }
        ManifoldKind::FlatTorus => Err(invalid(
            "minimization on flat tori is not supported (only circle and zonal sphere grids)",
        )),
    }
}

impl ManifoldGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.model.dim
    }

    fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.len();
        self.conductances
            .iter()
            .enumerate()
            .map(move |(e, &c)| (e, (e + 1) % n, c))
    }

    /// `K u`.
    pub fn stiffness(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for (i, j, c) in self.edges() {
            let flux = c * (u[j] - u[i]);
            out[i] -= flux;
            out[j] += flux;
        }
        out
    }

    /// `Delta u = W^{-1} K u`.
    pub fn laplacian(&self, u: &[f64]) -> Vec<f64> {
        self.stiffness(u)
            .iter()
            .zip(&self.weights)
            .map(|(k, w)| k / w)
            .collect()
    }

    /// `int |grad u|^2 = u^T K u`.
    pub fn dirichlet(&self, u: &[f64]) -> f64 {
        self.edges().map(|(i, j, c)| c * (u[j] - u[i]).powi(2)).sum()
    }

    /// `int f` for nodal values `f`.
    pub fn integrate(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.weights.iter().enumerate().map(|(i, w)| w * f(i)).sum()
    }

    /// Weighted inner product `sum w_i a_i b_i`.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.integrate(|i| a[i] * b[i])
    }

    /// Geodesic distance between nodes. On the sphere this is the colatitude
    /// gap, i.e. the distance between the corresponding parallels.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let gap = (self.nodes[i] - self.nodes[j]).abs();
        match self.model.kind {
            ManifoldKind::Circle => gap.min(self.model.size_param - gap),
            _ => self.model.size_param * gap,
        }
    }

    /// Solves `(s K + W diag(d)) x = rhs` for `s >= 0` and `d > 0`
    /// (tridiagonal, or cyclic tridiagonal on the circle).
    pub fn solve_shifted(&self, s: f64, d: &[f64], rhs: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut diag: Vec<f64> = (0..n).map(|i| self.weights[i] * d[i]).collect();
        let mut off = vec![0.0; n];
        for (i, j, c) in self.edges() {
            diag[i] += s * c;
            diag[j] += s * c;
            off[i] = -s * c;
        }
        if !self.periodic {
            return thomas(&off[..n - 1], &diag, &off[..n - 1], rhs);
        }
        // Sherman-Morrison on the wrap-around coupling off[n-1] between 0 and n-1.
        let corner = off[n - 1];
        let gamma = -diag[0];
        let mut main = diag.clone();
        main[0] -= gamma;
        main[n - 1] -= corner * corner / gamma;
        let y = thomas(&off[..n - 1], &main, &off[..n - 1], rhs);
        let mut z_rhs = vec![0.0; n];
        z_rhs[0] = gamma;
        z_rhs[n - 1] = corner;
        let z = thomas(&off[..n - 1], &main, &off[..n - 1], &z_rhs);
        let fact = (y[0] + corner * y[n - 1] / gamma) / (1.0 + z[0] + corner * z[n - 1] / gamma);
        y.iter().zip(&z).map(|(a, b)| a - fact * b).collect()
    }
}

/// Tridiagonal solve: `lower[i]` couples rows `i+1, i`, `upper[i]` couples `i, i+1`.
fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = if n > 1 { upper[0] / diag[0] } else { 0.0 };
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i - 1] * c[i - 1];
        if i + 1 < n {
            c[i] = upper[i] / m;
        }
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / m;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn weights_sum_to_volume() {
        let circle = build_grid(&ManifoldModel::circle(2.0 * PI).unwrap(), 64).unwrap();
        assert!((circle.weights.iter().sum::<f64>() - 2.0 * PI).abs() < 1e-12);
        for (dim, r) in [(2, 1.0), (3, 2.0), (4, 0.5)] {
            let model = ManifoldModel::round_sphere(dim, r).unwrap();
            let g = build_grid(&model, 128).unwrap();
            let total: f64 = g.weights.iter().sum();
            assert!((total / model.volume - 1.0).abs() < 1e-8, "dim {dim}");
        }
    }

    #[test]
    fn rejects_small_resolution_and_torus() {
        assert!(build_grid(&ManifoldModel::circle(1.0).unwrap(), 31).is_err());
        assert!(build_grid(&ManifoldModel::flat_torus(2, 1.0).unwrap(), 64).is_err());
    }

    #[test]
    fn shifted_solve_inverts_operator() {
        for model in [
            ManifoldModel::circle(3.0).unwrap(),
            ManifoldModel::round_sphere(2, 1.0).unwrap(),
        ] {
            let g = build_grid(&model, 40).unwrap();
            let d: Vec<f64> = (0..40).map(|i| 1.0 + 0.1 * i as f64).collect();
            let x: Vec<f64> = (0..40).map(|i| (0.3 * i as f64).sin()).collect();
            let kx = g.stiffness(&x);
            let rhs: Vec<f64> = (0..40).map(|i| 0.7 * kx[i] + g.weights[i] * d[i] * x[i]).collect();
            let got = g.solve_shifted(0.7, &d, &rhs);
            for (a, b) in got.iter().zip(&x) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn circle_distance_wraps() {
        let g = build_grid(&ManifoldModel::circle(4.0).unwrap(), 32).unwrap();
        assert!((g.distance(0, 31) - 0.125).abs() < 1e-15);
        assert!((g.distance(0, 16) - 2.0).abs() < 1e-15);
    }
}
