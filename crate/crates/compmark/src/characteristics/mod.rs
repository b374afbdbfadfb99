//! Functional mark summary characteristics: test functions over point pairs,
//! kernel ratio estimators on a distance grid, normalizing constants, and
//! mark-weighted K/L functions.

mod estimate;
mod testfn;

pub use estimate::{
    conditional_moments_at_r, estimate_cross, estimate_kappa, estimate_mark_weighted_k,
    estimate_nabla, estimate_rho2, estimate_tf_density, l_transform, normalizer,
    ConditionalMoments, EdgeCorrection,
};
pub(crate) use estimate::{nabla_values, nabla_values_all_components, PairCache, SpecEval};
pub use testfn::{eval_test_function, TestFunctionMoments};
pub(crate) use testfn::CoordinateSet;

use crate::coda::TransformSpec;
use crate::error::{Error, Result};
use crate::pattern::{MarkedPattern, RGrid};

/// The six classical test-function families evaluated on an ordered pair of marks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestFamily {
    /// Product of the two marks (mark correlation family).
    Product,
    /// Mark of the first point only.
    First,
    /// Mark of the second point only.
    Second,
    /// Half squared difference (mark variogram family).
    HalfSquaredDiff,
    /// Product after centering by the unconditional mean (Shimatani-Moran I).
    CenteredProduct,
    /// Product after centering by the conditional mean at distance r (Schlather I).
    ConditionallyCentered,
}

impl TestFamily {
    /// Conventional short symbol used in curve labels.
    pub fn symbol(&self) -> &'static str {
        match self {
            TestFamily::Product => "tau",
            TestFamily::First => "tau_first",
            TestFamily::Second => "tau_second",
            TestFamily::HalfSquaredDiff => "gamma",
            TestFamily::CenteredProduct => "iota_shi",
            TestFamily::ConditionallyCentered => "iota_sch",
        }
    }
}

/// Whether a characteristic targets one coordinate pair or the whole composition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    /// Coordinates `j` (first point) and `l` (second point), 0-based.
    Componentwise { j: usize, l: usize },
    /// The whole composition through the coordinate-space inner product.
    Compositional,
}

/// Which mark set an argument of a cross characteristic draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkSet {
    Primary,
    Secondary,
}

/// Cross-composition and cross-type filters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrossSpec {
    /// Mark set for the first point of each ordered pair.
    pub first: MarkSet,
    /// Mark set for the second point.
    pub second: MarkSet,
    /// Restrict ordered pairs to `type(x1) = p`, `type(x2) = q`.
    pub types: Option<(u32, u32)>,
}

/// Full specification of a test function over transformed marks.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunctionSpec {
    pub family: TestFamily,
    pub scope: Scope,
    pub transform: TransformSpec,
    pub cross: Option<CrossSpec>,
}

impl TestFunctionSpec {
    pub fn new(family: TestFamily, scope: Scope, transform: TransformSpec) -> Self {
        Self {
            family,
            scope,
            transform,
            cross: None,
        }
    }

    pub fn with_cross(mut self, cross: CrossSpec) -> Self {
        self.cross = Some(cross);
        self
    }

    /// Validate scope and indices against a mark dimension `d`.
    pub fn validate(&self, d: usize) -> Result<()> {
        self.transform.validate(d)?;
        let dim = self.transform.coord_dim(d);
        match self.scope {
            Scope::Componentwise { j, l } => {
                if j >= dim {
                    return Err(Error::IndexOutOfRange { index: j, dim });
                }
                if l >= dim {
                    return Err(Error::IndexOutOfRange { index: l, dim });
                }
                Ok(())
            }
            Scope::Compositional => {
                if matches!(self.family, TestFamily::First | TestFamily::Second) {
                    return Err(Error::InvalidSpec(
                        "single-argument test functions have no compositional form".into(),
                    ));
                }
                if matches!(self.transform, TransformSpec::Alr) {
                    return Err(Error::InvalidSpec(
                        "compositional scope needs a norm-preserving representation; \
                         use lr, clr or ilr coordinates"
                            .into(),
                    ));
                }
                Ok(())
            }
        }
    }
}

/// Kernel used by the ratio estimators; each integrates to one on its support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Kernel {
    #[default]
    Epanechnikov,
    Box,
    GaussianTruncated,
}

impl Kernel {
    /// Half-width of the support for bandwidth `b`.
    pub fn support_radius(&self, b: f64) -> f64 {
        match self {
            Kernel::Epanechnikov | Kernel::Box => b,
            Kernel::GaussianTruncated => 3.0 * b,
        }
    }

    /// Kernel value at offset `u`.
    pub fn eval(&self, u: f64, b: f64) -> f64 {
        match self {
            Kernel::Epanechnikov => {
                let t = u / b;
                if t.abs() <= 1.0 {
                    0.75 * (1.0 - t * t) / b
                } else {
                    0.0
                }
            }
            Kernel::Box => {
                if (u / b).abs() <= 1.0 {
                    0.5 / b
                } else {
                    0.0
                }
            }
            Kernel::GaussianTruncated => {
                let t = u / b;
                if t.abs() <= 3.0 {
                    // renormalized so the truncated density integrates to one
                    const NORM: f64 = 0.9973002039367398;
                    (-0.5 * t * t).exp() / ((2.0 * std::f64::consts::PI).sqrt() * b * NORM)
                } else {
                    0.0
                }
            }
        }
    }

    /// Peak value, used to convert kernel mass into an effective pair count.
    pub fn peak(&self, b: f64) -> f64 {
        self.eval(0.0, b)
    }
}

/// Grid, bandwidth, kernel and masking rule shared by all estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    pub rgrid: RGrid,
    pub bandwidth: f64,
    pub kernel: Kernel,
    /// Grid entries whose kernel mass corresponds to fewer ordered pairs than
    /// this are masked rather than reported.
    pub min_pairs: usize,
}

impl EstimatorConfig {
    pub fn new(rgrid: RGrid, bandwidth: f64, kernel: Kernel) -> Result<Self> {
        if !(bandwidth > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "bandwidth must be positive, got {bandwidth}"
            )));
        }
        Ok(Self {
            rgrid,
            bandwidth,
            kernel,
            min_pairs: 5,
        })
    }

    pub fn with_min_pairs(mut self, min_pairs: usize) -> Self {
        self.min_pairs = min_pairs;
        self
    }

    /// Default configuration for a pattern: bandwidth `0.15/sqrt(intensity)`
    /// and 128 grid points from the bandwidth to a quarter of the short
    /// window side.
    pub fn default_for(p: &MarkedPattern) -> Result<Self> {
        let lambda = p.intensity()?;
        let b = 0.15 / lambda.sqrt();
        let r_max = p.window().min_side() / 4.0;
        if b >= r_max {
            return Err(Error::InvalidConfig(format!(
                "default bandwidth {b} exceeds grid maximum {r_max}; set them explicitly"
            )));
        }
        Self::new(RGrid::linspace(b, r_max, 128)?, b, Kernel::Epanechnikov)
    }
}

/// A characteristic evaluated on a distance grid; masked entries are reported
/// as gaps, never as zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicCurve {
    pub rgrid: RGrid,
    pub values: Vec<Option<f64>>,
    pub label: String,
    pub normalizer: Option<f64>,
}

impl CharacteristicCurve {
    pub fn is_fully_masked(&self) -> bool {
        self.values.iter().all(|v| v.is_none())
    }

    /// Indices and values of unmasked entries.
    pub fn unmasked(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|x| (i, x)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kernels_integrate_to_one() {
        let b = 0.37;
        for kernel in [Kernel::Epanechnikov, Kernel::Box, Kernel::GaussianTruncated] {
            let s = kernel.support_radius(b);
            let steps = 20_000;
            let h = 2.0 * s / steps as f64;
            let integral: f64 = (0..=steps)
                .map(|i| {
                    let u = -s + i as f64 * h;
                    let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
                    w * kernel.eval(u, b) * h
                })
                .sum();
            assert_relative_eq!(integral, 1.0, epsilon = 1e-4);
        }
    }

    #[test]
    fn spec_validation() {
        let spec = TestFunctionSpec::new(
            TestFamily::Product,
            Scope::Componentwise { j: 0, l: 3 },
            TransformSpec::IlrPivot,
        );
        // D=4 gives 3 ilr coordinates, so l=3 is out of range
        assert!(matches!(
            spec.validate(4),
            Err(Error::IndexOutOfRange { index: 3, dim: 3 })
        ));

        let spec = TestFunctionSpec::new(
            TestFamily::First,
            Scope::Compositional,
            TransformSpec::Clr,
        );
        assert!(matches!(spec.validate(3), Err(Error::InvalidSpec(_))));

        let spec = TestFunctionSpec::new(
            TestFamily::Product,
            Scope::Compositional,
            TransformSpec::Alr,
        );
        assert!(spec.validate(3).is_err());
    }
}
