//! First nonzero radial Neumann eigenvalue of the Laplacian on the unit ball of
//! `R^n`, by shooting on `u'' + (n-1)/r u' + lambda u = 0`, `u(0) = 1`, `u'(0) = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// End of the series start near the coordinate singularity at `r = 0`.
pub const SERIES_RADIUS: f64 = 1e-3;
pub const DEFAULT_GRID_SIZE: usize = 4096;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const SCAN_SAMPLES: usize = 256;
pub const MIN_GRID_SIZE: usize = 16;

/// Default upper end of the lambda scan, `4 (n + 2)^2`.
pub fn default_bracket(dim: usize) -> f64 {
    let m = dim as f64 + 2.0;
    4.0 * m * m
}

/// Output of a single shot at fixed `lambda`.
#[derive(Debug, Clone)]
pub struct Shot {
    pub u_at_1: f64,
    pub derivative_at_1: f64,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub derivatives: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialEigenSolution {
    pub dim: usize,
    pub lambda1: f64,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// `u'` on the grid, as produced by the integrator.
    pub derivatives: Vec<f64>,
    pub u_at_1: f64,
    pub derivative_at_1: f64,
}

/// Taylor start `u(r) = 1 - lambda r^2/(2n) + lambda^2 r^4/(8n(n+2))` and its derivative.
fn series_start(dim: usize, lambda: f64, r: f64) -> (f64, f64) {
    let n = dim as f64;
    let r2 = r * r;
    let c1 = lambda / (2.0 * n);
    let c2 = lambda * lambda / (8.0 * n * (n + 2.0));
    (1.0 - c1 * r2 + c2 * r2 * r2, -2.0 * c1 * r + 4.0 * c2 * r2 * r)
}

/// Integrates the radial ODE from the series start to `r = 1` with `grid_size`
/// classical RK4 steps. The returned grid is `0, r0, r0 + h, ..., 1`.
pub fn shoot(dim: usize, lambda: f64, grid_size: usize) -> Result<Shot> {
    if dim < 1 {
        return Err(invalid("dim must be at least 1"));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid(format!("lambda must be positive, got {lambda}")));
    }
    if grid_size < MIN_GRID_SIZE {
        return Err(invalid(format!(
            "grid_size must be at least {MIN_GRID_SIZE}, got {grid_size}"
        )));
    }

    let geometric = dim as f64 - 1.0;
    let rhs = |r: f64, u: f64, p: f64| (p, -geometric / r * p - lambda * u);

    let r0 = SERIES_RADIUS;
    let h = (1.0 - r0) / grid_size as f64;
    let (mut u, mut p) = series_start(dim, lambda, r0);

    let mut grid = Vec::with_capacity(grid_size + 2);
    let mut values = Vec::with_capacity(grid_size + 2);
    let mut derivatives = Vec::with_capacity(grid_size + 2);
    grid.extend([0.0, r0]);
    values.extend([1.0, u]);
    derivatives.extend([0.0, p]);

    for step in 0..grid_size {
        let r = r0 + step as f64 * h;
        let (k1u, k1p) = rhs(r, u, p);
        let (k2u, k2p) = rhs(r + 0.5 * h, u + 0.5 * h * k1u, p + 0.5 * h * k1p);
        let (k3u, k3p) = rhs(r + 0.5 * h, u + 0.5 * h * k2u, p + 0.5 * h * k2p);
        let (k4u, k4p) = rhs(r + h, u + h * k3u, p + h * k3p);
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        let r_next = if step + 1 == grid_size {
            1.0
        } else {
            r0 + (step + 1) as f64 * h
        };
        if !(u.is_finite() && p.is_finite()) {
            return Err(Error::IntegratorInstability { lambda, radius: r_next });
        }
        grid.push(r_next);
        values.push(u);
        derivatives.push(p);
    }

    Ok(Shot {
        u_at_1: u,
        derivative_at_1: p,
        grid,
        values,
        derivatives,
    })
}

/// Smallest `lambda > 0` with `u'(1; lambda) = 0`, using the default grid size.
pub fn solve_lambda1(dim: usize, bracket_hi: f64, tol: f64) -> Result<RadialEigenSolution> {
    solve_lambda1_on_grid(dim, bracket_hi, tol, DEFAULT_GRID_SIZE)
}

/// [`solve_lambda1`] with the default bracket and tolerance.
pub fn solve_default(dim: usize) -> Result<RadialEigenSolution> {
    solve_lambda1(dim, default_bracket(dim), DEFAULT_TOL)
}

/// Scan `u'(1; lambda)` on `SCAN_SAMPLES` equispaced points of `(0, bracket_hi]`,
/// then bisect the first sign change down to `tol`.
pub fn solve_lambda1_on_grid(dim: usize, bracket_hi: f64, tol: f64, grid_size: usize) -> Result<RadialEigenSolution> {
    if !(tol > 0.0) {
        return Err(invalid("tol must be positive"));
    }
    if !(bracket_hi > 0.0 && bracket_hi.is_finite()) {
        return Err(invalid("bracket_hi must be positive and finite"));
    }
    let slope = |lambda: f64| shoot(dim, lambda, grid_size).map(|s| s.derivative_at_1);

    let step = bracket_hi / SCAN_SAMPLES as f64;
    let mut lo = step;
    let mut f_lo = slope(lo)?;
    let mut hi = None;
    for j in 2..=SCAN_SAMPLES {
        let lambda = step * j as f64;
        let f = slope(lambda)?;
        if f == 0.0 {
            hi = Some((lambda, f));
            lo = lambda;
            f_lo = f;
            break;
        }
        if f.signum() != f_lo.signum() {
            hi = Some((lambda, f));
            break;
        }
        lo = lambda;
        f_lo = f;
    }
    let (mut hi, _) = hi.ok_or(Error::BracketTooSmall { dim, bracket_hi })?;

    if f_lo != 0.0 {
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let f = slope(mid)?;
            if f == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if f.signum() == f_lo.signum() {
                lo = mid;
                f_lo = f;
            } else {
                hi = mid;
            }
        }
    } else {
        hi = lo;
    }

    let lambda1 = 0.5 * (lo + hi);
    let shot = shoot(dim, lambda1, grid_size)?;
    Ok(RadialEigenSolution {
        dim,
        lambda1,
        u_at_1: shot.u_at_1,
        derivative_at_1: shot.derivative_at_1,
        grid: shot.grid,
        values: shot.values,
        derivatives: shot.derivatives,
    })
}

impl RadialEigenSolution {
    /// Number of sign changes of `u` on the open interval `(0, 1)`.
    pub fn sign_changes(&self) -> usize {
        self.values
            .windows(2)
            .filter(|w| w[0] != 0.0 && w[1] != 0.0 && w[0].signum() != w[1].signum())
            .count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn one_dimensional_shot_is_cosine() {
        let s = shoot(1, 1.0, 4096).unwrap();
        assert!((s.derivative_at_1 + 1f64.sin()).abs() < 1e-10);
        assert!((s.u_at_1 - 1f64.cos()).abs() < 1e-10);
        let s = shoot(1, PI * PI, 4096).unwrap();
        assert!(s.derivative_at_1.abs() < 1e-9);
        for (r, v) in s.grid.iter().zip(&s.values) {
            assert!((v - (PI * r).cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn three_dimensional_shot_is_spherical_bessel() {
        // u(r) = sin(pi r)/(pi r); u(1) = 0, u'(1) = (pi cos pi - sin pi)/pi = -1.
        let s = shoot(3, PI * PI, 4096).unwrap();
        assert!(s.u_at_1.abs() < 1e-9, "u(1) = {}", s.u_at_1);
        assert!((s.derivative_at_1 + 1.0).abs() < 1e-8);
        assert_eq!(s.values[0], 1.0);
        assert_eq!(*s.grid.last().unwrap(), 1.0);
    }

    #[test]
    fn shoot_rejects_bad_input() {
        assert!(matches!(shoot(0, 1.0, 64), Err(Error::InvalidInput(_))));
        assert!(matches!(shoot(2, -1.0, 64), Err(Error::InvalidInput(_))));
        assert!(matches!(shoot(2, 1.0, 8), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn tiny_bracket_is_reported() {
        let err = solve_lambda1(2, 5.0, 1e-8).unwrap_err();
        assert!(matches!(err, Error::BracketTooSmall { dim: 2, .. }));
    }

    #[test]
    fn first_mode_changes_sign_once() {
        for dim in 1..=8 {
            let eig = solve_default(dim).unwrap();
            assert_eq!(eig.sign_changes(), 1, "dim {dim}");
            assert_eq!(eig.values[0], 1.0);
            assert!(eig.lambda1 > 0.0);
            assert!(eig.derivative_at_1.abs() < 1e-8, "dim {dim}: {}", eig.derivative_at_1);
        }
    }
}
