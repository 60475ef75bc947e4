//! Unnormalized target densities.
//!
//! Built-in kernels are peak-normalized (value 1 at the mode), so with unit
//! weights `p̃ ≤ 1` everywhere. Evaluation happens in direct space; far tails
//! underflow to exactly 0.

use serde::{Deserialize, Serialize};

use crate::error::{SamplerError, ValidationError};

/// Evaluation contract for an unnormalized density `p̃(x) ≥ 0`.
///
/// Implementations must be pure: the engine evaluates them concurrently from
/// many particles and relies on repeated calls returning the same value.
pub trait Density: Sync {
    fn dim(&self) -> usize;

    /// `x.len() == self.dim()` is guaranteed by the caller.
    fn eval(&self, x: &[f64]) -> f64;
}

impl<D: Density + ?Sized> Density for &D {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        (**self).eval(x)
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn check_dim(expected: usize, actual: usize) -> Result<(), SamplerError> {
    if expected == actual {
        Ok(())
    } else {
        Err(SamplerError::DimensionMismatch { expected, actual })
    }
}

/// `exp(-‖x - mean‖² / (2 std²))`.
pub fn density_gaussian_iso(x: &[f64], mean: &[f64], std: f64) -> Result<f64, SamplerError> {
    check_dim(mean.len(), x.len())?;
    if !(std > 0.0 && std.is_finite()) {
        return Err(ValidationError::new("std", "std must be positive").into());
    }
    Ok(gaussian_kernel(x, mean, std))
}

fn gaussian_kernel(x: &[f64], mean: &[f64], std: f64) -> f64 {
    (-squared_distance(x, mean) / (2.0 * std * std)).exp()
}

/// One weighted isotropic Gaussian bump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub std: f64,
}

/// Weighted sum of peak-normalized isotropic Gaussians. Weights need not sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureSpec {
    pub components: Vec<MixtureComponent>,
}

impl MixtureSpec {
    pub fn validate(&self) -> Result<usize, ValidationError> {
        let first = self
            .components
            .first()
            .ok_or_else(|| ValidationError::new("components", "mixture needs at least one component"))?;
        let dim = first.mean.len();
        if dim == 0 {
            return Err(ValidationError::new("mean", "component mean must be nonempty"));
        }
        for c in &self.components {
            if !(c.weight > 0.0 && c.weight.is_finite()) {
                return Err(ValidationError::new("weight", "component weight must be positive"));
            }
            if !(c.std > 0.0 && c.std.is_finite()) {
                return Err(ValidationError::new("std", "component std must be positive"));
            }
            if c.mean.len() != dim {
                return Err(ValidationError::new("mean", "component means differ in dimension"));
            }
            if c.mean.iter().any(|m| !m.is_finite()) {
                return Err(ValidationError::new("mean", "component mean must be finite"));
            }
        }
        Ok(dim)
    }

    fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.components
            .iter()
            .map(|c| c.weight * gaussian_kernel(x, &c.mean, c.std))
            .sum()
    }
}

/// `Σ_k w_k exp(-‖x - μ_k‖² / (2σ_k²))`.
pub fn density_mixture(x: &[f64], spec: &MixtureSpec) -> Result<f64, SamplerError> {
    let dim = spec.validate()?;
    check_dim(dim, x.len())?;
    Ok(spec.eval_unchecked(x))
}

/// Curved 2-d density `exp(-x₁²/(2s²) - (x₂ - b(x₁² - s²))²/2)`.
pub fn density_banana(x: &[f64], curvature: f64, scale: f64) -> Result<f64, SamplerError> {
    check_dim(2, x.len())?;
    Ok(banana(x, curvature, scale))
}

fn banana(x: &[f64], b: f64, s: f64) -> f64 {
    let ridge = x[1] - b * (x[0] * x[0] - s * s);
    (-x[0] * x[0] / (2.0 * s * s) - ridge * ridge / 2.0).exp()
}

/// Annulus `exp(-(‖x‖ - r0)² / (2w²))` in 2-d.
pub fn density_ring(x: &[f64], radius: f64, width: f64) -> Result<f64, SamplerError> {
    check_dim(2, x.len())?;
    Ok(ring(x, radius, width))
}

fn ring(x: &[f64], r0: f64, w: f64) -> f64 {
    let r = x[0].hypot(x[1]);
    (-(r - r0) * (r - r0) / (2.0 * w * w)).exp()
}

/// A built-in benchmark target, as written in run configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TargetDensity {
    Gaussian { mean: Vec<f64>, std: f64 },
    Mixture(MixtureSpec),
    Banana { curvature: f64, scale: f64 },
    Ring { radius: f64, width: f64 },
}

impl TargetDensity {
    pub const KINDS: &'static [&'static str] = &["gaussian", "mixture", "banana", "ring"];

    /// Standard Gaussian kernel in `dim` dimensions centered at the origin.
    pub fn standard_gaussian(dim: usize) -> Self {
        TargetDensity::Gaussian {
            mean: vec![0.0; dim],
            std: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        let positive = |v: f64, key: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ValidationError::new(key, format!("{key} must be positive")))
            }
        };
        match self {
            TargetDensity::Gaussian { mean, std } => {
                if mean.is_empty() || mean.iter().any(|m| !m.is_finite()) {
                    return Err(ValidationError::new("mean", "mean must be a nonempty finite vector"));
                }
                positive(*std, "std")
            }
            TargetDensity::Mixture(spec) => spec.validate().map(|_| ()),
            TargetDensity::Banana { curvature, scale } => {
                if !curvature.is_finite() {
                    return Err(ValidationError::new("curvature", "curvature must be finite"));
                }
                positive(*scale, "scale")
            }
            TargetDensity::Ring { radius, width } => {
                positive(*radius, "radius")?;
                positive(*width, "width")
            }
        }
    }

    /// Known high-density points, used as default mode centers for occupancy.
    pub fn mode_centers(&self) -> Option<Vec<Vec<f64>>> {
        match self {
            TargetDensity::Gaussian { mean, .. } => Some(vec![mean.clone()]),
            TargetDensity::Mixture(spec) => {
                Some(spec.components.iter().map(|c| c.mean.clone()).collect())
            }
            TargetDensity::Banana { curvature, scale } => {
                Some(vec![vec![0.0, -curvature * scale * scale]])
            }
            TargetDensity::Ring { .. } => None,
        }
    }

    /// Marginal CDF of the normalized target along `axis`, where it has closed form.
    pub fn marginal_cdf(&self, axis: usize, x: f64) -> Option<f64> {
        match self {
            TargetDensity::Gaussian { mean, std } => Some(normal_cdf((x - mean[axis]) / std)),
            TargetDensity::Mixture(spec) => {
                // Component k has mass w_k (sqrt(2π) σ_k)^d; the marginal mixes in those proportions.
                let dim = spec.components[0].mean.len() as i32;
                let (num, den) = spec.components.iter().fold((0.0, 0.0), |(n, d), c| {
                    let mass = c.weight * c.std.powi(dim);
                    (n + mass * normal_cdf((x - c.mean[axis]) / c.std), d + mass)
                });
                Some(num / den)
            }
            TargetDensity::Banana { scale, .. } if axis == 0 => Some(normal_cdf(x / scale)),
            _ => None,
        }
    }
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

impl Density for TargetDensity {
    fn dim(&self) -> usize {
        match self {
            TargetDensity::Gaussian { mean, .. } => mean.len(),
            TargetDensity::Mixture(spec) => spec.components.first().map_or(0, |c| c.mean.len()),
            TargetDensity::Banana { .. } | TargetDensity::Ring { .. } => 2,
        }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            TargetDensity::Gaussian { mean, std } => gaussian_kernel(x, mean, *std),
            TargetDensity::Mixture(spec) => spec.eval_unchecked(x),
            TargetDensity::Banana { curvature, scale } => banana(x, *curvature, *scale),
            TargetDensity::Ring { radius, width } => ring(x, *radius, *width),
        }
    }
}
