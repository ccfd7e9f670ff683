//! Closed-form constants of the sharp L2-Nash inequality and the curvature
//! threshold for model manifolds.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::ball_eigen::RadialEigenSolution;
use crate::error::{invalid, Result};

/// Volume of the unit ball of `R^n`, by `|B_n| = |B_{n-2}| 2 pi / n`.
pub fn unit_ball_volume(dim: usize) -> f64 {
    assert!(dim >= 1, "dimension must be at least 1");
    let mut vol = if dim % 2 == 1 { 2.0 } else { PI };
    let mut k = if dim % 2 == 1 { 1 } else { 2 };
    while k < dim {
        k += 2;
        vol *= 2.0 * PI / k as f64;
    }
    vol
}

/// Surface area of the unit sphere `S^n` (the boundary of the unit ball of `R^(n+1)`).
pub fn unit_sphere_area(dim: usize) -> f64 {
    (dim as f64 + 1.0) * unit_ball_volume(dim + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NashConstants {
    pub dim: usize,
    pub vol_unit_ball: f64,
    pub lambda1: f64,
    pub a0: f64,
    pub lambda0: f64,
    pub threshold_coeff: f64,
}

pub fn compute_constants(dim: usize, eig: &RadialEigenSolution) -> Result<NashConstants> {
    if eig.dim != dim {
        return Err(invalid(format!(
            "eigen solution is for dim {}, constants requested for dim {dim}",
            eig.dim
        )));
    }
    Ok(NashConstants::from_lambda1(dim, eig.lambda1))
}

impl NashConstants {
    pub fn from_lambda1(dim: usize, lambda1: f64) -> Self {
        let n = dim as f64;
        let ball = unit_ball_volume(dim);
        let a0 = (n + 2.0).powf((n + 2.0) / n) / (2f64.powf(2.0 / n) * n * lambda1 * ball.powf(2.0 / n));
        let lambda0 = (((n + 2.0) / 2.0).powf(-2.0 / n) * ball.powf(2.0 / n)).sqrt();
        let threshold_coeff =
            ball.powf(-2.0 / n) / (6.0 * n) * (2.0 / (n + 2.0) + (n - 2.0) / lambda1) * ((n + 2.0) / 2.0).powf(2.0 / n);
        Self {
            dim,
            vol_unit_ball: ball,
            lambda1,
            a0,
            lambda0,
            threshold_coeff,
        }
    }

    /// `A_0(n)^{-1}`, the sharp Euclidean lower bound of the Nash quotient.
    pub fn inv_a0(&self) -> f64 {
        1.0 / self.a0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifoldKind {
    Circle,
    RoundSphere,
    FlatTorus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManifoldModel {
    pub kind: ManifoldKind,
    pub dim: usize,
    pub size_param: f64,
    pub volume: f64,
    pub max_scalar_curvature: f64,
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {x}")))
    }
}

impl ManifoldModel {
    /// Circle of length `length`.
    pub fn circle(length: f64) -> Result<Self> {
        positive("circle length", length)?;
        Ok(Self {
            kind: ManifoldKind::Circle,
            dim: 1,
            size_param: length,
            volume: length,
            max_scalar_curvature: 0.0,
        })
    }

    /// Round sphere `S^n(r)`.
    pub fn round_sphere(dim: usize, radius: f64) -> Result<Self> {
        if dim < 1 {
            return Err(invalid("sphere dimension must be at least 1"));
        }
        positive("sphere radius", radius)?;
        let n = dim as f64;
        Ok(Self {
            kind: ManifoldKind::RoundSphere,
            dim,
            size_param: radius,
            volume: radius.powi(dim as i32) * unit_sphere_area(dim),
            max_scalar_curvature: n * (n - 1.0) / (radius * radius),
        })
    }

    /// Flat torus `R^n / (side Z)^n`.
    pub fn flat_torus(dim: usize, side: f64) -> Result<Self> {
        if dim < 1 {
            return Err(invalid("torus dimension must be at least 1"));
        }
        positive("torus side", side)?;
        Ok(Self {
            kind: ManifoldKind::FlatTorus,
            dim,
            size_param: side,
            volume: side.powi(dim as i32),
            max_scalar_curvature: 0.0,
        })
    }

    /// Model with explicit volume and curvature bound, e.g. a compact hyperbolic
    /// quotient whose volume is not a function of one size parameter.
    pub fn from_raw(
        kind: ManifoldKind,
        dim: usize,
        size_param: f64,
        volume: f64,
        max_scalar_curvature: f64,
    ) -> Result<Self> {
        if dim < 1 {
            return Err(invalid("dimension must be at least 1"));
        }
        positive("volume", volume)?;
        if !max_scalar_curvature.is_finite() {
            return Err(invalid("max scalar curvature must be finite"));
        }
        Ok(Self {
            kind,
            dim,
            size_param,
            volume,
            max_scalar_curvature,
        })
    }

    /// `Vol(M)^{-2/n}`, the constant-function lower bound for the second constant.
    pub fn volume_bound(&self) -> f64 {
        self.volume.powf(-2.0 / self.dim as f64)
    }
}

/// Curvature threshold: `|B|^{-2/n}/(6n) (2/(n+2) + (n-2)/lambda1) ((n+2)/2)^{2/n} max S_g`.
pub fn threshold(dim: usize, consts: &NashConstants, model: &ManifoldModel) -> Result<f64> {
    if consts.dim != dim || model.dim != dim {
        return Err(invalid(format!(
            "dimension mismatch: requested {dim}, constants {}, model {}",
            consts.dim, model.dim
        )));
    }
    Ok(consts.threshold_coeff * model.max_scalar_curvature)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorollaryCheck {
    pub verdict: Verdict,
    pub margin: f64,
    pub threshold: f64,
    pub volume_bound: f64,
}

/// Whether `Vol(M)^{-2/n}` exceeds the curvature threshold, which guarantees
/// extremal functions. The margin is not claimed to be sharp.
pub fn corollary_check(consts: &NashConstants, model: &ManifoldModel) -> Result<CorollaryCheck> {
    let t = threshold(model.dim, consts, model)?;
    let volume_bound = model.volume_bound();
    let margin = volume_bound - t;
    let verdict = if margin > 0.0 { Verdict::Holds } else { Verdict::Fails };
    Ok(CorollaryCheck {
        verdict,
        margin,
        threshold: t,
        volume_bound,
    })
}
