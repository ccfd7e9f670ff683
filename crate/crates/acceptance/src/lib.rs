//! Reference values computed independently of the library's solvers.

use nash_sharp::penalized_minimizer::ManifoldGrid;

/// `J_1` by its power series (adequate for `x < 10`).
pub fn bessel_j1(x: f64) -> f64 {
    let mut term = x / 2.0;
    let mut sum = term;
    for m in 1..60 {
        term *= -(x * x / 4.0) / (m as f64 * (m as f64 + 1.0));
        sum += term;
    }
    sum
}

/// Root of `f` in `[lo, hi]` by plain bisection; `f` must change sign.
pub fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// First positive zero of `J_1`.
pub fn first_bessel_j1_zero() -> f64 {
    bisect(3.0, 4.5, bessel_j1)
}

/// First positive root of `tan x = x`, which is `sqrt(lambda1)` for the 3-ball.
pub fn first_tan_root() -> f64 {
    use std::f64::consts::PI;
    bisect(PI + 1e-9, 1.5 * PI - 1e-9, |x| x.tan() - x)
}

/// Number of eigenvalues below `x` of the symmetric tridiagonal matrix
/// `(diag, off)`, by Sturm sequence.
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = diag[0] - x;
    if d < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let prev = if d == 0.0 { 1e-300 } else { d };
        d = diag[i] - x - off[i - 1] * off[i - 1] / prev;
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// `index`-th smallest eigenvalue (from 0) of the symmetric tridiagonal matrix in `[lo, hi]`.
pub fn tridiagonal_eigenvalue(diag: &[f64], off: &[f64], index: usize, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sturm_count(diag, off, mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `index`-th eigenvalue of `W^{-1} K` on a non-periodic grid, through the
/// similar symmetric matrix `W^{-1/2} K W^{-1/2}`.
pub fn grid_eigenvalue(grid: &ManifoldGrid, index: usize) -> f64 {
    let n = grid.len();
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n - 1];
    for (e, &c) in grid.conductances.iter().enumerate().take(n - 1) {
        diag[e] += c;
        diag[e + 1] += c;
        off[e] = -c / (grid.weights[e] * grid.weights[e + 1]).sqrt();
    }
    for (d, w) in diag.iter_mut().zip(&grid.weights) {
        *d /= w;
    }
    let bound = diag
        .iter()
        .zip(off.iter().chain([&0.0]))
        .map(|(d, o)| d + 2.0 * o.abs())
        .fold(0.0, f64::max);
    tridiagonal_eigenvalue(&diag, &off, index, -1.0, bound + 1.0)
}
