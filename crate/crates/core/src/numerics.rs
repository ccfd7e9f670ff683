//! Small numerical kernels shared by the radial and manifold code: Gauss-Legendre
//! rules, finite-difference weights on arbitrary grids and local polynomial
//! interpolation of sampled data.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(points: usize) -> Self {
        assert!(points >= 1, "Gauss-Legendre rule needs at least one point");
        let n = points;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Integrates `f` over `[a, b]` with this rule.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Fornberg's algorithm: weights `c[m][j]` such that the `m`-th derivative at `z`
/// is approximated by `sum_j c[m][j] f(x[j])`, for `m = 0..=max_order`.
pub fn fd_weights(z: f64, x: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// First index of the `width`-point window of `grid` nearest to `x`.
pub(crate) fn stencil_start(grid: &[f64], x: f64, width: usize) -> usize {
    let n = grid.len();
    let width = width.min(n);
    let pos = grid.partition_point(|&g| g < x);
    let start = pos.saturating_sub(width / 2);
    start.min(n - width)
}

/// Local Lagrange interpolation of samples `(grid, values)` at `x`, using the
/// `width` grid points surrounding `x`.
pub fn interpolate(grid: &[f64], values: &[f64], x: f64, width: usize) -> f64 {
    let width = width.min(grid.len());
    let start = stencil_start(grid, x, width);
    let xs = &grid[start..start + width];
    let ys = &values[start..start + width];
    // Exact node hit avoids 0/0 in the barycentric form.
    if let Some(k) = xs.iter().position(|&g| g == x) {
        return ys[k];
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..width {
        let mut prod = x - xs[j];
        for m in 0..width {
            if m != j {
                prod *= xs[j] - xs[m];
            }
        }
        let t = 1.0 / prod;
        num += t * ys[j];
        den += t;
    }
    num / den
}

/// Derivative of sampled data at every grid point by `width`-point
/// finite-difference stencils: centered in the interior, one-sided at the ends.
pub fn differentiate(grid: &[f64], values: &[f64], width: usize) -> Vec<f64> {
    let n = grid.len();
    let width = width.min(n);
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(width / 2).min(n - width);
            let xs = &grid[start..start + width];
            let z = grid[i];
            // d/dz of the Lagrange basis: sum over k != j of prod_{m != j,k} (z - x_m),
            // divided by prod_{m != j} (x_j - x_m).
            let mut total = 0.0;
            for j in 0..width {
                let mut den = 1.0;
                let mut num = 0.0;
                for k in 0..width {
                    if k == j {
                        continue;
                    }
                    den *= xs[j] - xs[k];
                    num += xs
                        .iter()
                        .enumerate()
                        .filter(|&(m, _)| m != j && m != k)
                        .map(|(_, x)| z - x)
                        .product::<f64>();
                }
                total += num / den * values[start + j];
            }
            total
        })
        .collect()
}
