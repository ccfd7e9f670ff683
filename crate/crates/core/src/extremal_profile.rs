//! Radial functions on `R^n`, their quadrature, and the compactly supported
//! extremal profile built from the ball eigenfunction.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::ball_eigen::RadialEigenSolution;
use crate::constants::{unit_ball_volume, NashConstants};
use crate::error::{invalid, Result};
use crate::numerics::{differentiate, interpolate, stencil_start, GaussLegendre};

pub const QUADRATURE_POINTS: usize = 16;
pub const QUADRATURE_PANELS: usize = 256;
/// Local interpolation stencil used to evaluate samples at quadrature nodes.
const INTERP_WIDTH: usize = 6;
/// Finite-difference stencil for `f'`.
const FD_WIDTH: usize = 5;

/// A radial function `f(|x|)` on `R^n`, sampled on `[0, support_radius]` and zero beyond.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialFunction {
    pub dim: usize,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub support_radius: f64,
}

impl RadialFunction {
    pub fn new(dim: usize, grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if dim < 1 {
            return Err(invalid("dimension must be at least 1"));
        }
        if grid.len() < FD_WIDTH || grid.len() != values.len() {
            return Err(invalid(format!(
                "need at least {FD_WIDTH} samples with matching lengths (grid {}, values {})",
                grid.len(),
                values.len()
            )));
        }
        if grid[0] != 0.0 {
            return Err(invalid("radial grid must start at 0"));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) || !grid.iter().all(|r| r.is_finite()) {
            return Err(invalid("radial grid must be finite and strictly increasing"));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(invalid("radial function values must be finite"));
        }
        let support_radius = *grid.last().unwrap();
        Ok(Self {
            dim,
            grid,
            values,
            support_radius,
        })
    }

    /// Samples `f` on `samples` equispaced radii of `[0, radius]`.
    pub fn from_fn(dim: usize, radius: f64, samples: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if !(radius > 0.0) || samples < FD_WIDTH {
            return Err(invalid("need a positive radius and enough samples"));
        }
        let grid: Vec<f64> = (0..samples)
            .map(|i| {
                if i + 1 == samples {
                    radius
                } else {
                    radius * i as f64 / (samples - 1) as f64
                }
            })
            .collect();
        let values = grid.iter().map(|&r| f(r)).collect();
        Self::new(dim, grid, values)
    }

    /// Value at radius `r` (interpolated; zero outside the support).
    pub fn value_at(&self, r: f64) -> f64 {
        if r > self.support_radius {
            0.0
        } else {
            interpolate(&self.grid, &self.values, r, INTERP_WIDTH)
        }
    }

    /// `c f`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| c * v).collect(),
            ..self.clone()
        }
    }

    /// `f(. / s)`.
    pub fn dilated(&self, s: f64) -> Self {
        Self {
            grid: self.grid.iter().map(|r| r * s).collect(),
            support_radius: self.support_radius * s,
            ..self.clone()
        }
    }

    /// `f'` on the grid (5-point stencils, one-sided at the ends).
    pub fn derivative(&self) -> Vec<f64> {
        differentiate(&self.grid, &self.values, FD_WIDTH)
    }

    /// `f` resampled on `samples` equispaced radii of the support.
    pub fn resample(&self, samples: usize) -> Vec<(f64, f64)> {
        let samples = samples.max(2);
        (0..samples)
            .map(|i| {
                let r = self.support_radius * i as f64 / (samples - 1) as f64;
                (r, self.value_at(r))
            })
            .collect()
    }

    /// CSV dump with header `r,value`, one row per stored sample.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "r,value")?;
        for (r, v) in self.grid.iter().zip(&self.values) {
            writeln!(out, "{r:.17e},{v:.17e}")?;
        }
        Ok(())
    }

    /// Interpolation stencils and measure weights at every Gauss node.
    fn quadrature_map(&self) -> QuadratureMap {
        let rule = GaussLegendre::new(QUADRATURE_POINTS);
        let n = self.dim;
        let total = QUADRATURE_POINTS * QUADRATURE_PANELS;
        let mut map = QuadratureMap {
            starts: Vec::with_capacity(total),
            stencils: Vec::with_capacity(total),
            measure: Vec::with_capacity(total),
        };
        let scale = n as f64 * unit_ball_volume(n);
        let panel = self.support_radius / QUADRATURE_PANELS as f64;
        for p in 0..QUADRATURE_PANELS {
            let a = panel * p as f64;
            let b = if p + 1 == QUADRATURE_PANELS {
                self.support_radius
            } else {
                a + panel
            };
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let r = mid + half * x;
                let start = stencil_start(&self.grid, r, INTERP_WIDTH);
                map.starts.push(start);
                map.stencils
                    .push(lagrange_weights(&self.grid[start..start + INTERP_WIDTH], r));
                map.measure.push(scale * w * half * r.powi(n as i32 - 1));
            }
        }
        map
    }
}

struct QuadratureMap {
    starts: Vec<usize>,
    stencils: Vec<[f64; INTERP_WIDTH]>,
    measure: Vec<f64>,
}

impl QuadratureMap {
    fn integrate(&self, samples: &[f64], integrand: impl Fn(f64) -> f64) -> f64 {
        let mut total = 0.0;
        for q in 0..self.measure.len() {
            let s = &samples[self.starts[q]..self.starts[q] + INTERP_WIDTH];
            let v: f64 = self.stencils[q].iter().zip(s).map(|(w, x)| w * x).sum();
            total += self.measure[q] * integrand(v);
        }
        total
    }
}

fn lagrange_weights(xs: &[f64], x: f64) -> [f64; INTERP_WIDTH] {
    let mut out = [0.0; INTERP_WIDTH];
    for j in 0..INTERP_WIDTH {
        let mut num = 1.0;
        let mut den = 1.0;
        for m in 0..INTERP_WIDTH {
            if m != j {
                num *= x - xs[m];
                den *= xs[j] - xs[m];
            }
        }
        out[j] = num / den;
    }
    out
}

/// `(int |grad f|^2, int |f|, int f^2)` sharing one set of quadrature stencils.
pub fn nash_integrals(f: &RadialFunction) -> (f64, f64, f64) {
    let map = f.quadrature_map();
    let d = f.derivative();
    (
        map.integrate(&d, |v| v * v),
        map.integrate(&f.values, f64::abs),
        map.integrate(&f.values, |v| v * v),
    )
}

/// `int_{R^n} |f|^power`.
pub fn integrate(f: &RadialFunction, power: f64) -> f64 {
    f.quadrature_map().integrate(&f.values, |v| v.abs().powf(power))
}

/// `int_{R^n} f` (no absolute value).
pub fn signed_integral(f: &RadialFunction) -> f64 {
    f.quadrature_map().integrate(&f.values, |v| v)
}

/// `int_{R^n} |grad f|^2 = n |B| int f'(r)^2 r^{n-1} dr`.
pub fn dirichlet_energy(f: &RadialFunction) -> f64 {
    let d = f.derivative();
    f.quadrature_map().integrate(&d, |v| v * v)
}

/// The eigenfunction itself as a radial function on the unit ball.
pub fn eigenfunction(eig: &RadialEigenSolution) -> RadialFunction {
    RadialFunction {
        dim: eig.dim,
        grid: eig.grid.clone(),
        values: eig.values.clone(),
        support_radius: 1.0,
    }
}

/// `v = u - u(1)` on the unit ball, zero outside.
pub fn build_v(eig: &RadialEigenSolution) -> RadialFunction {
    let u1 = eig.u_at_1;
    let mut values: Vec<f64> = eig.values.iter().map(|u| u - u1).collect();
    if let Some(last) = values.last_mut() {
        *last = 0.0;
    }
    RadialFunction {
        dim: eig.dim,
        grid: eig.grid.clone(),
        values,
        support_radius: 1.0,
    }
}

/// `phi(r) = k v(lambda0 r)`, supported on `[0, 1/lambda0]`.
pub fn build_phi(eig: &RadialEigenSolution, consts: &NashConstants, k: f64) -> Result<RadialFunction> {
    if eig.dim != consts.dim {
        return Err(invalid("eigen solution and constants have different dimensions"));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(invalid(format!("k must be positive, got {k}")));
    }
    let v = build_v(eig);
    let lambda0 = consts.lambda0;
    let grid: Vec<f64> = v.grid.iter().map(|r| r / lambda0).collect();
    let support_radius = *grid.last().unwrap();
    Ok(RadialFunction {
        dim: v.dim,
        grid,
        values: v.values.iter().map(|x| k * x).collect(),
        support_radius,
    })
}

/// The profile normalized to `phi(0) = 1`, used as the blow-up reference.
pub fn unit_height_phi(eig: &RadialEigenSolution, consts: &NashConstants) -> Result<RadialFunction> {
    build_phi(eig, consts, 1.0 / (1.0 - eig.u_at_1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball_eigen::solve_default;
    use std::f64::consts::PI;

    #[test]
    fn constant_on_unit_ball_integrates_to_volume() {
        let f = RadialFunction::from_fn(3, 1.0, 101, |_| 1.0).unwrap();
        assert!((integrate(&f, 1.0) - 4.0 * PI / 3.0).abs() < 1e-12);
        assert!(dirichlet_energy(&f).abs() < 1e-12);
    }

    #[test]
    fn tent_in_one_dimension() {
        let f = RadialFunction::from_fn(1, 1.0, 257, |r| (1.0 - r).max(0.0)).unwrap();
        assert!((dirichlet_energy(&f) - 2.0).abs() < 1e-12);
        assert!((integrate(&f, 1.0) - 1.0).abs() < 1e-12);
        assert!((integrate(&f, 2.0) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn one_dimensional_v_is_shifted_cosine() {
        let eig = solve_default(1).unwrap();
        let v = build_v(&eig);
        for (r, x) in v.grid.iter().zip(&v.values) {
            assert!((x - ((PI * r).cos() + 1.0)).abs() < 1e-8);
        }
        assert_eq!(*v.values.last().unwrap(), 0.0);
        assert_eq!(v.values[0], 1.0 - eig.u_at_1);
        assert!((integrate(&v, 1.0) - 2.0).abs() < 1e-8);
        assert!((integrate(&v, 2.0) - 3.0).abs() < 1e-8);
    }

    #[test]
    fn phi_support_and_height() {
        let eig = solve_default(2).unwrap();
        let c = NashConstants::from_lambda1(2, eig.lambda1);
        let phi = build_phi(&eig, &c, 1.0).unwrap();
        assert!((phi.support_radius - 1.0 / (PI / 2.0).sqrt()).abs() < 1e-12);
        assert_eq!(*phi.values.last().unwrap(), 0.0);
        assert_eq!(phi.value_at(phi.support_radius * 1.5), 0.0);
        let phi3 = build_phi(&eig, &c, 3.0).unwrap();
        assert!((phi3.values[0] - 3.0 * (1.0 - eig.u_at_1)).abs() < 1e-15);
        assert!(build_phi(&eig, &c, 0.0).is_err());
        assert!((unit_height_phi(&eig, &c).unwrap().values[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eigenfunction_rayleigh_quotient() {
        for dim in [1, 2, 5] {
            let eig = solve_default(dim).unwrap();
            let u = eigenfunction(&eig);
            let ratio = dirichlet_energy(&u) / integrate(&u, 2.0);
            assert!((ratio / eig.lambda1 - 1.0).abs() < 1e-6, "dim {dim}: {ratio}");
        }
    }

    #[test]
    fn rejects_malformed_samples() {
        assert!(RadialFunction::new(2, vec![0.0, 0.1, 0.1, 0.3, 0.4], vec![1.0; 5]).is_err());
        assert!(RadialFunction::new(2, vec![0.1, 0.2, 0.3, 0.4, 0.5], vec![1.0; 5]).is_err());
        assert!(RadialFunction::new(2, vec![0.0, 0.1, 0.2, 0.3, 0.4], vec![f64::NAN; 5]).is_err());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let f = RadialFunction::from_fn(2, 1.0, 9, |r| 1.0 - r).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "r,value");
        assert_eq!(lines.len(), 10);
        let last: Vec<f64> = lines[9].split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(last, vec![1.0, 0.0]);
    }
}
