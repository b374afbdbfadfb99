//! First-order statistics of a compositional sample: geometric center,
//! variation matrix and metric variance.

use crate::error::{Error, Result};

use super::transform::{transform, transform_inverse, Coordinates, TransformSpec};
use super::Composition;

/// A homogeneous sample of compositions (equal dimension and total constant).
#[derive(Debug, Clone)]
pub struct CompositionSample {
    items: Vec<Composition>,
}

impl CompositionSample {
    pub fn new(items: Vec<Composition>) -> Result<Self> {
        let first = items.first().ok_or(Error::EmptySample)?;
        let (d, w) = (first.dim(), first.total_constant());
        for c in &items {
            if c.dim() != d {
                return Err(Error::DimensionMismatch {
                    left: c.dim(),
                    right: d,
                });
            }
            if (c.total_constant() - w).abs() > super::CLOSURE_TOL * w {
                return Err(Error::TotalConstantMismatch {
                    left: c.total_constant(),
                    right: w,
                });
            }
        }
        Ok(Self { items })
    }

    pub fn items(&self) -> &[Composition] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.items[0].dim()
    }

    pub fn total_constant(&self) -> f64 {
        self.items[0].total_constant()
    }
}

/// The closed geometric mean of a sample: `clr⁻¹` of the mean of the
/// centered log-ratio coordinates.
pub fn center(sample: &CompositionSample) -> Result<Composition> {
    let n = sample.len() as f64;
    let d = sample.dim();
    let mut acc = vec![0.0; d];
    for c in sample.items() {
        let z = transform(c, &TransformSpec::Clr)?;
        for (a, v) in acc.iter_mut().zip(&z.values) {
            *a += v;
        }
    }
    for a in acc.iter_mut() {
        *a /= n;
    }
    transform_inverse(&Coordinates {
        values: acc,
        transform: TransformSpec::Clr,
        source_dim: d,
        total_constant: sample.total_constant(),
    })
}

/// Variation matrix: `t_jl` is the sample variance (divisor `n-1`) of
/// `log(c_j/c_l)`. With `normalized` the matrix is halved.
pub fn variation_matrix(sample: &CompositionSample, normalized: bool) -> Result<Vec<Vec<f64>>> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::SampleTooSmall(n, 2));
    }
    let d = sample.dim();
    let logs: Vec<Vec<f64>> = sample
        .items()
        .iter()
        .map(|c| {
            c.parts()
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    if v > 0.0 {
                        Ok(v.ln())
                    } else {
                        Err(Error::NonPositivePart { index: i, value: v })
                    }
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let scale = if normalized { 0.5 } else { 1.0 };
    let mut t = vec![vec![0.0; d]; d];
    for j in 0..d {
        for l in j + 1..d {
            let ratios: Vec<f64> = logs.iter().map(|row| row[j] - row[l]).collect();
            let mean = ratios.iter().sum::<f64>() / n as f64;
            let var =
                ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
            t[j][l] = scale * var;
            t[l][j] = scale * var;
        }
    }
    Ok(t)
}

/// Metric (total) variance: `(1/2D) Σ_jl t_jl`, the average squared distance
/// to the geometric center.
pub fn metric_variance(sample: &CompositionSample) -> Result<f64> {
    let t = variation_matrix(sample, false)?;
    let d = sample.dim() as f64;
    let sum: f64 = t.iter().flatten().sum();
    Ok(sum / (2.0 * d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coda::ait_dist;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    fn comp(parts: &[f64]) -> Composition {
        Composition::closure(parts, 1.0).unwrap()
    }

    #[test]
    fn center_of_constant_sample() {
        let c = comp(&[0.2, 0.3, 0.5]);
        let s = CompositionSample::new(vec![c.clone(), c.clone(), c.clone()]).unwrap();
        let cen = center(&s).unwrap();
        for (a, b) in cen.parts().iter().zip(c.parts()) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn center_of_mirrored_pair_is_uniform() {
        let s = CompositionSample::new(vec![comp(&[0.2, 0.8]), comp(&[0.8, 0.2])]).unwrap();
        let cen = center(&s).unwrap();
        assert_relative_eq!(cen.parts()[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(cen.parts()[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn center_matches_geometric_mean_per_part() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let items: Vec<Composition> = (0..100)
            .map(|_| {
                let raw: Vec<f64> = (0..4).map(|_| rng.random_range(0.05..5.0)).collect();
                comp(&raw)
            })
            .collect();
        let s = CompositionSample::new(items.clone()).unwrap();
        let cen = center(&s).unwrap();
        // independent oracle: per-part geometric means followed by closure
        let d = 4;
        let mut geo = vec![0.0f64; d];
        for c in &items {
            for (g, &p) in geo.iter_mut().zip(c.parts()) {
                *g += p.ln();
            }
        }
        let raw: Vec<f64> = geo.iter().map(|g| (g / items.len() as f64).exp()).collect();
        let oracle = Composition::closure(&raw, 1.0).unwrap();
        for (a, b) in cen.parts().iter().zip(oracle.parts()) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn center_invariant_under_permutation() {
        let items = vec![comp(&[0.2, 0.8]), comp(&[0.5, 0.5]), comp(&[0.7, 0.3])];
        let mut shuffled = items.clone();
        shuffled.reverse();
        let c1 = center(&CompositionSample::new(items).unwrap()).unwrap();
        let c2 = center(&CompositionSample::new(shuffled).unwrap()).unwrap();
        for (a, b) in c1.parts().iter().zip(c2.parts()) {
            assert_relative_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn constant_sample_has_zero_dispersion() {
        let c = comp(&[0.2, 0.3, 0.5]);
        let s = CompositionSample::new(vec![c.clone(), c.clone(), c]).unwrap();
        let t = variation_matrix(&s, false).unwrap();
        for row in &t {
            for v in row {
                assert_relative_eq!(*v, 0.0, epsilon = 1e-14);
            }
        }
        assert_relative_eq!(metric_variance(&s).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn variation_diagonal_is_zero() {
        let s = CompositionSample::new(vec![comp(&[0.2, 0.8]), comp(&[0.6, 0.4])]).unwrap();
        let t = variation_matrix(&s, false).unwrap();
        assert_eq!(t[0][0], 0.0);
        assert_eq!(t[1][1], 0.0);
        let tn = variation_matrix(&s, true).unwrap();
        assert_relative_eq!(tn[0][1], 0.5 * t[0][1], epsilon = 1e-14);
    }

    #[test]
    fn metric_variance_matches_distance_to_center() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let items: Vec<Composition> = (0..50)
            .map(|_| {
                let raw: Vec<f64> = (0..5).map(|_| rng.random_range(0.05..5.0)).collect();
                comp(&raw)
            })
            .collect();
        let s = CompositionSample::new(items.clone()).unwrap();
        let mvar = metric_variance(&s).unwrap();
        // independent oracle: average squared distance to the center
        let cen = center(&s).unwrap();
        let direct: f64 = items
            .iter()
            .map(|c| ait_dist(c, &cen).unwrap().powi(2))
            .sum::<f64>()
            / (items.len() as f64 - 1.0);
        assert_relative_eq!(mvar, direct, max_relative = 1e-9);
    }

    #[test]
    fn small_samples_rejected() {
        let s = CompositionSample::new(vec![comp(&[0.2, 0.8])]).unwrap();
        assert!(variation_matrix(&s, false).is_err());
        assert!(CompositionSample::new(vec![]).is_err());
    }
}
