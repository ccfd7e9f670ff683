use crate::error::{invalid, Error, Result};

use super::grid::ManifoldGrid;

/// `u^eps` for `u >= 0`, with `0^eps = 0`.
pub(crate) fn pow_eps(u: f64, eps: f64) -> f64 {
    if u > 0.0 {
        u.powf(eps)
    } else {
        0.0
    }
}

/// Discrete
/// `I_alpha(u) = (int |grad u|^2 + (alpha0 - alpha) int u^2) (int |u|^{1+eps})^{4/(n(1+eps))} / (int u^2)^{1+2/n}`.
pub fn evaluate_i_alpha(u: &[f64], grid: &ManifoldGrid, alpha: f64, alpha0: f64, eps_alpha: f64) -> Result<f64> {
    check_inputs(u, grid, eps_alpha)?;
    let l2 = grid.inner(u, u);
    if !(l2 > 0.0) {
        return Err(Error::Degenerate("u has zero L2 norm"));
    }
    let n = grid.dim() as f64;
    let p = grid.integrate(|i| u[i].abs().powf(1.0 + eps_alpha));
    let q = 4.0 / (n * (1.0 + eps_alpha));
    Ok((grid.dirichlet(u) + (alpha0 - alpha) * l2) * p.powf(q) / l2.powf(1.0 + 2.0 / n))
}

pub(crate) fn check_inputs(u: &[f64], grid: &ManifoldGrid, eps_alpha: f64) -> Result<()> {
    if u.len() != grid.len() {
        return Err(invalid(format!(
            "u has {} values for a grid of {} nodes",
            u.len(),
            grid.len()
        )));
    }
    if !u.iter().all(|x| x.is_finite()) {
        return Err(invalid("u must be finite"));
    }
    if !(eps_alpha >= 0.0 && eps_alpha.is_finite()) {
        return Err(invalid(format!("eps_alpha must be nonnegative, got {eps_alpha}")));
    }
    Ok(())
}

/// Coefficients of the Euler equation at a nonnegative `u` with `int u^2 = 1`.
#[derive(Debug, Clone)]
pub(crate) struct Coefficients {
    pub stiffness_u: Vec<f64>,
    pub dirichlet: f64,
    pub a: f64,
    pub b: f64,
    pub k: f64,
    pub mu: f64,
}

pub(crate) fn coefficients(u: &[f64], grid: &ManifoldGrid, penalty: f64, eps: f64) -> Coefficients {
    let n = grid.dim() as f64;
    let stiffness_u = grid.stiffness(u);
    let dirichlet: f64 = u.iter().zip(&stiffness_u).map(|(a, b)| a * b).sum();
    let p = grid.integrate(|i| u[i] * pow_eps(u[i], eps));
    let q = 4.0 / (n * (1.0 + eps));
    let a = p.powf(q);
    let g = dirichlet + penalty;
    let mu = g * a;
    let b = g * p.powf(q - 1.0);
    let k = 4.0 / n * mu + 2.0 * dirichlet * a;
    Coefficients {
        stiffness_u,
        dirichlet,
        a,
        b,
        k,
        mu,
    }
}

/// Nodal Euler residual `2 A Delta u + (4/n) B u^eps - k u` and its weighted L2 norm.
pub(crate) fn euler_residual(u: &[f64], grid: &ManifoldGrid, c: &Coefficients, eps: f64) -> (Vec<f64>, f64) {
    let n = grid.dim() as f64;
    let e: Vec<f64> = (0..u.len())
        .map(|i| 2.0 * c.a * c.stiffness_u[i] / grid.weights[i] + 4.0 / n * c.b * pow_eps(u[i], eps) - c.k * u[i])
        .collect();
    let norm = grid.inner(&e, &e).sqrt();
    (e, norm)
}

/// Weighted L2 norm of the Euler residual at `u` (normalized to `int u^2 = 1` first).
pub fn euler_residual_norm(u: &[f64], grid: &ManifoldGrid, alpha: f64, alpha0: f64, eps_alpha: f64) -> Result<f64> {
    check_inputs(u, grid, eps_alpha)?;
    let l2 = grid.inner(u, u);
    if !(l2 > 0.0) {
        return Err(Error::Degenerate("u has zero L2 norm"));
    }
    let v: Vec<f64> = u.iter().map(|x| x.abs() / l2.sqrt()).collect();
    let c = coefficients(&v, grid, alpha0 - alpha, eps_alpha);
    Ok(euler_residual(&v, grid, &c, eps_alpha).1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::ManifoldModel;
    use crate::penalized_minimizer::grid::build_grid;
    use std::f64::consts::PI;

    fn sphere() -> ManifoldGrid {
        build_grid(&ManifoldModel::round_sphere(2, 1.0).unwrap(), 128).unwrap()
    }

    #[test]
    fn constant_value_matches_closed_form() {
        let g = sphere();
        let vol = 4.0 * PI;
        let (alpha, alpha0, eps) = (0.3, 1.7, 0.05);
        let c = vol.powf(-0.5);
        let u = vec![c; g.len()];
        let got = evaluate_i_alpha(&u, &g, alpha, alpha0, eps).unwrap();
        // int u^2 = 1, int u^{1+eps} = Vol^{(1-eps)/2}
        let expected = (alpha0 - alpha) * vol.powf((1.0 - eps) / 2.0).powf(4.0 / (2.0 * (1.0 + eps)));
        assert!((got / expected - 1.0).abs() < 1e-12);
        let circle = build_grid(&ManifoldModel::circle(2.0 * PI).unwrap(), 64).unwrap();
        let flat = vec![1.0; 64];
        assert_eq!(evaluate_i_alpha(&flat, &circle, 0.2, 0.2, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn constants_are_critical() {
        let g = sphere();
        let u = vec![2.0; g.len()];
        for (alpha, alpha0, eps) in [(0.1, 1.0, 0.01), (0.5, 0.5, 0.0), (1.0, 3.0, 0.3)] {
            assert!(euler_residual_norm(&u, &g, alpha, alpha0, eps).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn directional_derivative_vanishes_at_constant() {
        let g = sphere();
        let c = (4.0 * PI).powf(-0.5);
        let (alpha, alpha0, eps) = (0.2, 2.0, 0.02);
        let at = |t: f64| {
            let u: Vec<f64> = g.nodes.iter().map(|th| c + t * th.cos()).collect();
            evaluate_i_alpha(&u, &g, alpha, alpha0, eps).unwrap()
        };
        let h = 1e-4;
        let slope = (at(h) - at(-h)) / (2.0 * h);
        assert!(slope.abs() < 1e-6, "{slope}");
    }

    #[test]
    fn rejects_zero_and_mismatched_input() {
        let g = sphere();
        assert!(matches!(
            evaluate_i_alpha(&vec![0.0; g.len()], &g, 0.1, 1.0, 0.0),
            Err(Error::Degenerate(_))
        ));
        assert!(evaluate_i_alpha(&[1.0; 3], &g, 0.1, 1.0, 0.0).is_err());
    }
}
