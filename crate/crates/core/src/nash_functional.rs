//! The Euclidean Nash quotient
//! `I(u) = int |grad u|^2 (int |u|)^{4/n} / (int u^2)^{1+2/n}`
//! on radial functions, and a randomized check of its sharp lower bound.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ball_eigen::solve_default;
use crate::constants::NashConstants;
use crate::error::{invalid, Error, Result};
use crate::extremal_profile::{build_phi, nash_integrals, RadialFunction};

/// A sample counts as a failure when `normalized < 1 - FAILURE_TOL`.
pub const FAILURE_TOL: f64 = 1e-6;
pub const HOMOGENEITY_SCALES: [f64; 3] = [0.5, 3.0, 100.0];
pub const DILATION_SCALES: [f64; 2] = [0.5, 2.0];
const FAMILY_SAMPLES: usize = 1025;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NashReport {
    pub value: f64,
    pub normalized: f64,
    pub gradient_term: f64,
    pub l1_term: f64,
    pub l2_term: f64,
}

pub fn evaluate(u: &RadialFunction, consts: &NashConstants) -> Result<NashReport> {
    if u.dim != consts.dim {
        return Err(invalid("function and constants have different dimensions"));
    }
    let n = u.dim as f64;
    let (gradient_term, l1_term, l2_term) = nash_integrals(u);
    if !(l2_term > 0.0) {
        return Err(Error::Degenerate("function has zero L2 norm"));
    }
    let value = gradient_term * l1_term.powf(4.0 / n) / l2_term.powf(1.0 + 2.0 / n);
    if !value.is_finite() {
        return Err(invalid("Nash quotient is not finite"));
    }
    Ok(NashReport {
        value,
        normalized: value * consts.a0,
        gradient_term,
        l1_term,
        l2_term,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Gaussian,
    Tent,
    TruncatedPolynomial,
    Spline,
    PhiPerturbation,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Gaussian,
        Family::Tent,
        Family::TruncatedPolynomial,
        Family::Spline,
        Family::PhiPerturbation,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
    pub min_normalized: f64,
    pub failures: usize,
    /// Largest relative change of `I` under `u -> c u`.
    pub max_homogeneity_error: f64,
    /// Largest relative change of `I` under `u -> u(. / s)`.
    pub max_dilation_error: f64,
}

/// Cubic B-spline kernel, supported on `[-2, 2]`.
fn cubic_bspline(t: f64) -> f64 {
    let a = t.abs();
    if a < 1.0 {
        (4.0 - 6.0 * a * a + 3.0 * a * a * a) / 6.0
    } else if a < 2.0 {
        (2.0 - a).powi(3) / 6.0
    } else {
        0.0
    }
}

/// Draws one random radial function of the given family.
pub fn sample_family<R: Rng>(family: Family, dim: usize, phi: &RadialFunction, rng: &mut R) -> Result<RadialFunction> {
    match family {
        Family::Gaussian => {
            let w = rng.gen_range(0.2..3.0);
            let h = rng.gen_range(0.1..10.0);
            RadialFunction::from_fn(dim, 7.0 * w, FAMILY_SAMPLES, |r| h * (-(r / w).powi(2)).exp())
        }
        Family::Tent => {
            let w = rng.gen_range(0.2..3.0);
            let h = rng.gen_range(0.1..10.0);
            RadialFunction::from_fn(dim, w, FAMILY_SAMPLES, |r| h * (1.0 - r / w).max(0.0))
        }
        Family::TruncatedPolynomial => {
            let radius = rng.gen_range(0.2..3.0);
            let coeffs: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..1.0)).collect();
            let lead = rng.gen_range(1..=4);
            RadialFunction::from_fn(dim, radius, FAMILY_SAMPLES, |r| {
                let s = 1.0 - (r / radius).powi(2);
                let mut total = s.powi(lead);
                for (k, c) in coeffs.iter().enumerate() {
                    total += c * s.powi(k as i32 + 1);
                }
                total
            })
        }
        Family::Spline => {
            let count = rng.gen_range(1..=5);
            let bumps: Vec<(f64, f64, f64)> = (0..count)
                .map(|_| {
                    (
                        rng.gen_range(0.1..1.0),
                        rng.gen_range(0.0..2.0),
                        rng.gen_range(0.1..0.6),
                    )
                })
                .collect();
            let radius = bumps.iter().map(|&(_, c, s)| c + 2.0 * s).fold(0.0, f64::max);
            RadialFunction::from_fn(dim, radius, FAMILY_SAMPLES, |r| {
                bumps.iter().map(|&(a, c, s)| a * cubic_bspline((r - c) / s)).sum()
            })
        }
        Family::PhiPerturbation => {
            let support = phi.support_radius;
            let width = rng.gen_range(0.05..0.4) * support;
            let center = rng.gen_range(0.0..(support - width));
            let eps = rng.gen_range(-0.1..0.1) * phi.values[0];
            Ok(perturb_phi(phi, eps, center, width))
        }
    }
}

/// `phi + eps * (1 - ((r - center)/width)^2)^3_+`.
pub fn perturb_phi(phi: &RadialFunction, eps: f64, center: f64, width: f64) -> RadialFunction {
    let values = phi
        .grid
        .iter()
        .zip(&phi.values)
        .map(|(&r, &p)| {
            let t = (r - center) / width;
            p + eps * (1.0 - t * t).max(0.0).powi(3)
        })
        .collect();
    RadialFunction { values, ..phi.clone() }
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

struct TrialOutcome {
    normalized: f64,
    homogeneity: f64,
    dilation: f64,
}

fn run_trial(
    dim: usize,
    consts: &NashConstants,
    phi: &RadialFunction,
    seed: u64,
    index: usize,
) -> Result<TrialOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let family = Family::ALL[index % Family::ALL.len()];
    let u = sample_family(family, dim, phi, &mut rng)?;
    let base = evaluate(&u, consts)?;
    let mut homogeneity: f64 = 0.0;
    for c in HOMOGENEITY_SCALES {
        homogeneity = homogeneity.max(relative_gap(evaluate(&u.scaled(c), consts)?.value, base.value));
    }
    let mut dilation: f64 = 0.0;
    for s in DILATION_SCALES {
        dilation = dilation.max(relative_gap(evaluate(&u.dilated(s), consts)?.value, base.value));
    }
    Ok(TrialOutcome {
        normalized: base.normalized,
        homogeneity,
        dilation,
    })
}

/// Evaluates `trials` random radial functions (cycling through [`Family::ALL`]).
/// Trial `i` draws from its own generator stream, so the report does not
/// depend on scheduling.
pub fn property_suite(dim: usize, consts: &NashConstants, trials: usize, seed: u64) -> Result<SuiteReport> {
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    if dim != consts.dim {
        return Err(invalid("dimension does not match constants"));
    }
    let eig = solve_default(dim)?;
    let phi = build_phi(&eig, consts, 1.0)?;
    let outcomes: Vec<TrialOutcome> = (0..trials)
        .into_par_iter()
        .map(|i| run_trial(dim, consts, &phi, seed, i))
        .collect::<Result<_>>()?;
    let mut report = SuiteReport {
        dim,
        trials,
        seed,
        min_normalized: f64::INFINITY,
        failures: 0,
        max_homogeneity_error: 0.0,
        max_dilation_error: 0.0,
    };
    for o in &outcomes {
        report.min_normalized = report.min_normalized.min(o.normalized);
        if o.normalized < 1.0 - FAILURE_TOL {
            report.failures += 1;
        }
        report.max_homogeneity_error = report.max_homogeneity_error.max(o.homogeneity);
        report.max_dilation_error = report.max_dilation_error.max(o.dilation);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn consts(dim: usize) -> NashConstants {
        NashConstants::from_lambda1(dim, solve_default(dim).unwrap().lambda1)
    }

    #[test]
    fn gaussian_in_one_dimension() {
        let c = consts(1);
        let u = RadialFunction::from_fn(1, 12.0, 4001, |r| (-r * r).exp()).unwrap();
        let rep = evaluate(&u, &c).unwrap();
        let s = (PI / 2.0).sqrt();
        assert!((rep.gradient_term - s).abs() < 1e-9);
        assert!((rep.l1_term - PI.sqrt()).abs() < 1e-12);
        assert!((rep.l2_term - s).abs() < 1e-12);
        assert!((rep.value - 2.0 * PI).abs() < 1e-8);
        assert!(rep.normalized > 1.0);
    }

    #[test]
    fn tent_in_one_dimension() {
        let c = consts(1);
        let u = RadialFunction::from_fn(1, 1.0, 513, |r| 1.0 - r).unwrap();
        let rep = evaluate(&u, &c).unwrap();
        assert!((rep.value - 6.75).abs() < 1e-10);
        assert!((rep.normalized - 6.75 * 27.0 / (16.0 * PI * PI)).abs() < 1e-10);
        assert!((rep.normalized - 1.15412).abs() < 1e-5);
    }

    #[test]
    fn zero_function_is_degenerate() {
        let u = RadialFunction::from_fn(2, 1.0, 33, |_| 0.0).unwrap();
        assert!(matches!(evaluate(&u, &consts(2)), Err(Error::Degenerate(_))));
    }

    #[test]
    fn phi_is_optimal_along_perturbations() {
        let eig = solve_default(2).unwrap();
        let c = consts(2);
        let phi = build_phi(&eig, &c, 1.0).unwrap();
        let (center, width) = (0.2 * phi.support_radius, 0.3 * phi.support_radius);
        let at = |eps: f64| evaluate(&perturb_phi(&phi, eps, center, width), &c).unwrap().normalized;
        let zero = at(0.0);
        assert!((zero - 1.0).abs() < 1e-4);
        for k in -10..=10 {
            let eps = 0.01 * k as f64 * phi.values[0];
            assert!(at(eps) >= zero - 1e-9, "eps {eps}");
        }
    }

    #[test]
    fn suite_rejects_zero_trials() {
        assert!(property_suite(2, &consts(2), 0, 1).is_err());
    }

    #[test]
    fn suite_is_deterministic() {
        let c = consts(2);
        let a = property_suite(2, &c, 20, 11).unwrap();
        let b = property_suite(2, &c, 20, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.failures, 0);
    }
}
