//! Test-function evaluation on transformed mark coordinates.

use crate::coda::{transform, Composition, Coordinates, TransformSpec};
use crate::error::{Error, Result};

use super::{Scope, TestFamily, TestFunctionSpec};

/// Moments a test function may need: the unconditional coordinate means for
/// the centered-product family, the conditional means at the pair's distance
/// for the conditionally centered family.
#[derive(Debug, Clone, Default)]
pub struct TestFunctionMoments {
    pub mean: Option<Vec<f64>>,
    pub conditional_mean: Option<Vec<f64>>,
}

/// Evaluate a test function on the coordinates of an ordered pair of marks.
pub fn eval_test_function(
    spec: &TestFunctionSpec,
    z1: &Coordinates,
    z2: &Coordinates,
    moments: &TestFunctionMoments,
) -> Result<f64> {
    if z1.values.len() != z2.values.len() && spec.scope == Scope::Compositional {
        return Err(Error::DimensionMismatch {
            left: z1.values.len(),
            right: z2.values.len(),
        });
    }
    let omega = spec.transform.omega(z1.source_dim);
    match spec.scope {
        Scope::Componentwise { j, l } => {
            if j >= z1.values.len() {
                return Err(Error::IndexOutOfRange {
                    index: j,
                    dim: z1.values.len(),
                });
            }
            if l >= z2.values.len() {
                return Err(Error::IndexOutOfRange {
                    index: l,
                    dim: z2.values.len(),
                });
            }
            let a = z1.values[j];
            let b = z2.values[l];
            match spec.family {
                TestFamily::Product => Ok(a * b),
                TestFamily::First => Ok(a),
                TestFamily::Second => Ok(b),
                TestFamily::HalfSquaredDiff => Ok(0.5 * (a - b) * (a - b)),
                TestFamily::CenteredProduct => {
                    let mu = moments
                        .mean
                        .as_ref()
                        .ok_or(Error::MissingMoments("unconditional coordinate means"))?;
                    Ok((a - mu[j]) * (b - mu[l]))
                }
                TestFamily::ConditionallyCentered => {
                    let mu = moments
                        .conditional_mean
                        .as_ref()
                        .ok_or(Error::MissingMoments("conditional coordinate means"))?;
                    Ok((a - mu[j]) * (b - mu[l]))
                }
            }
        }
        Scope::Compositional => {
            let dot = |xs: &[f64], ys: &[f64]| -> f64 {
                xs.iter().zip(ys).map(|(x, y)| x * y).sum()
            };
            match spec.family {
                TestFamily::Product => Ok(omega * dot(&z1.values, &z2.values)),
                TestFamily::HalfSquaredDiff => {
                    let s: f64 = z1
                        .values
                        .iter()
                        .zip(&z2.values)
                        .map(|(x, y)| (x - y) * (x - y))
                        .sum();
                    Ok(0.5 * omega * s)
                }
                TestFamily::CenteredProduct => {
                    let mu = moments
                        .mean
                        .as_ref()
                        .ok_or(Error::MissingMoments("unconditional coordinate means"))?;
                    let s: f64 = z1
                        .values
                        .iter()
                        .zip(&z2.values)
                        .zip(mu)
                        .map(|((x, y), m)| (x - m) * (y - m))
                        .sum();
                    Ok(omega * s)
                }
                TestFamily::ConditionallyCentered => {
                    let mu = moments
                        .conditional_mean
                        .as_ref()
                        .ok_or(Error::MissingMoments("conditional coordinate means"))?;
                    let s: f64 = z1
                        .values
                        .iter()
                        .zip(&z2.values)
                        .zip(mu)
                        .map(|((x, y), m)| (x - m) * (y - m))
                        .sum();
                    Ok(omega * s)
                }
                TestFamily::First | TestFamily::Second => Err(Error::InvalidSpec(
                    "single-argument test functions have no compositional form".into(),
                )),
            }
        }
    }
}

/// Transformed marks of a pattern as a dense row-major matrix.
#[derive(Debug, Clone)]
pub(crate) struct CoordinateSet {
    pub data: Vec<f64>,
    pub n: usize,
    pub dim: usize,
    pub omega: f64,
}

impl CoordinateSet {
    pub fn from_marks(marks: &[Composition], spec: &TransformSpec) -> Result<Self> {
        let d = marks
            .first()
            .map(|c| c.dim())
            .ok_or(Error::EmptyPattern)?;
        spec.validate(d)?;
        let dim = spec.coord_dim(d);
        let mut data = Vec::with_capacity(marks.len() * dim);
        for c in marks {
            let z = transform(c, spec)?;
            data.extend_from_slice(&z.values);
        }
        Ok(Self {
            data,
            n: marks.len(),
            dim,
            omega: spec.omega(d),
        })
    }

    /// Scalar columns (log-totals and similar) as a 1-dimensional set.
    pub fn from_scalar(values: Vec<f64>) -> Self {
        Self {
            n: values.len(),
            data: values,
            dim: 1,
            omega: 1.0,
        }
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Per-coordinate sample mean.
    pub fn means(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for i in 0..self.n {
            for (acc, v) in m.iter_mut().zip(self.row(i)) {
                *acc += v;
            }
        }
        for acc in m.iter_mut() {
            *acc /= self.n as f64;
        }
        m
    }

    /// Sample covariance matrix (divisor `n - 1`).
    pub fn covariance(&self) -> Result<Vec<Vec<f64>>> {
        if self.n < 2 {
            return Err(Error::SampleTooSmall(self.n, 2));
        }
        let mu = self.means();
        let mut cov = vec![vec![0.0; self.dim]; self.dim];
        for i in 0..self.n {
            let row = self.row(i);
            for j in 0..self.dim {
                let dj = row[j] - mu[j];
                for l in j..self.dim {
                    cov[j][l] += dj * (row[l] - mu[l]);
                }
            }
        }
        let denom = self.n as f64 - 1.0;
        for j in 0..self.dim {
            for l in j..self.dim {
                cov[j][l] /= denom;
                cov[l][j] = cov[j][l];
            }
        }
        Ok(cov)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coda::Composition;
    use approx::assert_relative_eq;

    fn coords(parts: &[f64], spec: &TransformSpec) -> Coordinates {
        transform(&Composition::closure(parts, 1.0).unwrap(), spec).unwrap()
    }

    #[test]
    fn compositional_product_on_identical_marks_is_norm() {
        let z = coords(&[0.2, 0.3, 0.5], &TransformSpec::Clr);
        let spec = TestFunctionSpec::new(
            TestFamily::Product,
            Scope::Compositional,
            TransformSpec::Clr,
        );
        let v = eval_test_function(&spec, &z, &z, &TestFunctionMoments::default()).unwrap();
        let norm: f64 = z.values.iter().map(|x| x * x).sum();
        assert_relative_eq!(v, norm, epsilon = 1e-14);
        assert!(v >= 0.0);
    }

    #[test]
    fn variogram_two_part_hand_value() {
        let z1 = coords(&[0.2, 0.8], &TransformSpec::IlrPivot);
        let z2 = coords(&[0.8, 0.2], &TransformSpec::IlrPivot);
        let spec = TestFunctionSpec::new(
            TestFamily::HalfSquaredDiff,
            Scope::Componentwise { j: 0, l: 0 },
            TransformSpec::IlrPivot,
        );
        let v = eval_test_function(&spec, &z1, &z2, &TestFunctionMoments::default()).unwrap();
        // oracle: pivot coordinate of (0.2,0.8) is sqrt(1/2) ln(1/4)
        let z = 0.5f64.sqrt() * 0.25f64.ln();
        let oracle = 0.5 * (z - (-z)) * (z - (-z));
        assert_relative_eq!(v, oracle, epsilon = 1e-12);
        assert_relative_eq!(v, 1.9218120556728056, epsilon = 1e-12);

        // compositional form coincides for a 2-part composition
        let spec_cc = TestFunctionSpec::new(
            TestFamily::HalfSquaredDiff,
            Scope::Compositional,
            TransformSpec::IlrPivot,
        );
        let vc = eval_test_function(&spec_cc, &z1, &z2, &TestFunctionMoments::default()).unwrap();
        assert_relative_eq!(vc, v, epsilon = 1e-14);
    }

    #[test]
    fn lr_weighted_inner_matches_clr_inner() {
        let spec_lr = TestFunctionSpec::new(
            TestFamily::Product,
            Scope::Compositional,
            TransformSpec::Lr,
        );
        let spec_clr = TestFunctionSpec::new(
            TestFamily::Product,
            Scope::Compositional,
            TransformSpec::Clr,
        );
        let a_lr = coords(&[0.2, 0.3, 0.5], &TransformSpec::Lr);
        let b_lr = coords(&[0.1, 0.6, 0.3], &TransformSpec::Lr);
        let a_clr = coords(&[0.2, 0.3, 0.5], &TransformSpec::Clr);
        let b_clr = coords(&[0.1, 0.6, 0.3], &TransformSpec::Clr);
        let none = TestFunctionMoments::default();
        let v_lr = eval_test_function(&spec_lr, &a_lr, &b_lr, &none).unwrap();
        let v_clr = eval_test_function(&spec_clr, &a_clr, &b_clr, &none).unwrap();
        assert_relative_eq!(v_lr, v_clr, epsilon = 1e-12);
    }

    #[test]
    fn missing_moments_reported() {
        let z = coords(&[0.2, 0.8], &TransformSpec::IlrPivot);
        let spec = TestFunctionSpec::new(
            TestFamily::CenteredProduct,
            Scope::Componentwise { j: 0, l: 0 },
            TransformSpec::IlrPivot,
        );
        assert!(matches!(
            eval_test_function(&spec, &z, &z, &TestFunctionMoments::default()),
            Err(Error::MissingMoments(_))
        ));
    }
}
