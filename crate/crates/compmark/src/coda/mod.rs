//! Aitchison geometry on the simplex: closure, perturbation, powering,
//! the log-ratio inner product, and coordinate transforms.

mod stats;
mod transform;

pub use stats::{center, metric_variance, variation_matrix, CompositionSample};
pub use transform::{
    alpha_transform, helmert_pivot, transform, transform_inverse, Coordinates, TransformSpec,
};

use crate::error::{Error, Result};

/// Relative tolerance for the sum-to-constant closure check.
pub const CLOSURE_TOL: f64 = 1e-9;

/// How zero parts are treated when building a composition from raw data.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ZeroPolicy {
    /// Reject any zero part.
    #[default]
    Strict,
    /// Multiplicative replacement: zeros become 0.65 times the smallest
    /// positive part, followed by re-closure.
    Replace,
    /// Keep zeros as-is; only the alpha-family transforms can handle them.
    AlphaOnly,
}

/// A D-part composition: strictly positive parts summing to a constant `total_constant`
/// (zero parts can occur only via [`ZeroPolicy::AlphaOnly`]).
#[derive(Debug, Clone, PartialEq)]
pub struct Composition {
    parts: Vec<f64>,
    total_constant: f64,
}

impl Composition {
    /// Closure operation: rescale nonnegative raw entries so they sum to `total_constant`.
    pub fn closure(raw: &[f64], total_constant: f64) -> Result<Self> {
        Self::closure_with_policy(raw, total_constant, ZeroPolicy::Strict)
    }

    /// Closure with an explicit zero policy.
    pub fn closure_with_policy(
        raw: &[f64],
        total_constant: f64,
        policy: ZeroPolicy,
    ) -> Result<Self> {
        if raw.len() < 2 {
            return Err(Error::TooFewParts(raw.len()));
        }
        if !(total_constant > 0.0) {
            return Err(Error::InvalidParam(format!(
                "total constant must be positive, got {total_constant}"
            )));
        }
        for (i, &v) in raw.iter().enumerate() {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::NegativeEntry { index: i, value: v });
            }
        }
        let sum: f64 = raw.iter().sum();
        if sum == 0.0 {
            return Err(Error::AllZero);
        }
        let mut parts: Vec<f64> = raw.iter().map(|&v| total_constant * v / sum).collect();
        if let Some(i) = parts.iter().position(|&v| v == 0.0) {
            match policy {
                ZeroPolicy::Strict => return Err(Error::ZeroPart { index: i }),
                ZeroPolicy::Replace => {
                    let delta = 0.65
                        * parts
                            .iter()
                            .copied()
                            .filter(|&v| v > 0.0)
                            .fold(f64::INFINITY, f64::min);
                    for v in parts.iter_mut() {
                        if *v == 0.0 {
                            *v = delta;
                        }
                    }
                    let s: f64 = parts.iter().sum();
                    for v in parts.iter_mut() {
                        *v *= total_constant / s;
                    }
                }
                ZeroPolicy::AlphaOnly => {}
            }
        }
        Ok(Self {
            parts,
            total_constant,
        })
    }

    /// Wrap parts that are already closed; validates the sum-to-constant invariant.
    pub fn from_parts(parts: Vec<f64>, total_constant: f64) -> Result<Self> {
        if parts.len() < 2 {
            return Err(Error::TooFewParts(parts.len()));
        }
        for (i, &v) in parts.iter().enumerate() {
            if !(v > 0.0) {
                return Err(Error::NonPositivePart { index: i, value: v });
            }
        }
        let sum: f64 = parts.iter().sum();
        if (sum - total_constant).abs() > CLOSURE_TOL * total_constant {
            return Err(Error::TotalConstantMismatch {
                left: sum,
                right: total_constant,
            });
        }
        Ok(Self {
            parts,
            total_constant,
        })
    }

    /// The neutral element of perturbation: all parts equal.
    pub fn neutral(dim: usize, total_constant: f64) -> Result<Self> {
        Self::closure(&vec![1.0; dim], total_constant)
    }

    pub fn parts(&self) -> &[f64] {
        &self.parts
    }

    pub fn dim(&self) -> usize {
        self.parts.len()
    }

    pub fn total_constant(&self) -> f64 {
        self.total_constant
    }

    pub fn has_zero(&self) -> bool {
        self.parts.iter().any(|&v| v == 0.0)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        if (self.total_constant - other.total_constant).abs()
            > CLOSURE_TOL * self.total_constant
        {
            return Err(Error::TotalConstantMismatch {
                left: self.total_constant,
                right: other.total_constant,
            });
        }
        Ok(())
    }

    fn check_positive(&self) -> Result<()> {
        if let Some(i) = self.parts.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::NonPositivePart {
                index: i,
                value: self.parts[i],
            });
        }
        Ok(())
    }
}

/// Perturbation, the group operation of the simplex.
pub fn perturb(c: &Composition, other: &Composition) -> Result<Composition> {
    c.check_compatible(other)?;
    c.check_positive()?;
    other.check_positive()?;
    let raw: Vec<f64> = c
        .parts
        .iter()
        .zip(&other.parts)
        .map(|(a, b)| a * b)
        .collect();
    Composition::closure(&raw, c.total_constant)
}

/// Powering by a real exponent.
pub fn power(xi: f64, c: &Composition) -> Result<Composition> {
    c.check_positive()?;
    let raw: Vec<f64> = c.parts.iter().map(|&v| v.powf(xi)).collect();
    Composition::closure(&raw, c.total_constant)
}

/// Perturbation difference `c ⊖ other`, realized as `perturb(c, power(-1, other))`.
pub fn perturb_inverse(c: &Composition, other: &Composition) -> Result<Composition> {
    perturb(c, &power(-1.0, other)?)
}

/// Log-ratio inner product on the simplex:
/// `(1/2D) Σ_l Σ_j log(c_l/c_j) log(c'_l/c'_j)`.
pub fn ait_inner(c: &Composition, other: &Composition) -> Result<f64> {
    if c.dim() != other.dim() {
        return Err(Error::DimensionMismatch {
            left: c.dim(),
            right: other.dim(),
        });
    }
    c.check_positive()?;
    other.check_positive()?;
    let d = c.dim();
    let la: Vec<f64> = c.parts.iter().map(|v| v.ln()).collect();
    let lb: Vec<f64> = other.parts.iter().map(|v| v.ln()).collect();
    let mut acc = 0.0;
    for l in 0..d {
        for j in 0..d {
            acc += (la[l] - la[j]) * (lb[l] - lb[j]);
        }
    }
    Ok(acc / (2.0 * d as f64))
}

/// Norm induced by [`ait_inner`].
pub fn ait_norm(c: &Composition) -> Result<f64> {
    Ok(ait_inner(c, c)?.sqrt())
}

/// Distance induced by the inner product: `‖c ⊖ other‖`.
pub fn ait_dist(c: &Composition, other: &Composition) -> Result<f64> {
    c.check_compatible(other)?;
    ait_norm(&perturb_inverse(c, other)?)
}
