//! Synthetic marked patterns: binomial/Poisson points with logistic-normal
//! or geostatistical composition marks on the ilr scale.

use nalgebra::DMatrix;
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::coda::{transform_inverse, Coordinates, Composition, TransformSpec};
use crate::error::{Error, Result};

use super::{MarkedPattern, Window};

/// Point-count model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointModel {
    /// Fixed number of independent uniform points.
    Binomial(usize),
    /// Homogeneous Poisson process with the given intensity.
    Poisson(f64),
}

/// Mark model on the ilr (pivot) scale; compositions are obtained by inverting
/// the coordinates, so `D = mean.len() + 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum MarkModel {
    /// Marks i.i.d. logistic-normal: ilr coordinates drawn from N(mean, cov).
    IidLogisticNormal { mean: Vec<f64>, cov: Vec<Vec<f64>> },
    /// Gaussian random field per ilr coordinate with exponential covariance
    /// `σ² exp(-d/range)`; a range of zero makes that coordinate white noise.
    GeostatIlr {
        mean: Vec<f64>,
        variances: Vec<f64>,
        ranges: Vec<f64>,
    },
}

impl MarkModel {
    fn coord_dim(&self) -> usize {
        match self {
            MarkModel::IidLogisticNormal { mean, .. } => mean.len(),
            MarkModel::GeostatIlr { mean, .. } => mean.len(),
        }
    }
}

/// Log-normal model for the totals attached to each point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TotalsModel {
    pub log_mean: f64,
    pub log_sd: f64,
}

/// Draw a marked pattern. Runs with the same seed are bit-identical.
pub fn simulate_pattern(
    window: Window,
    points: PointModel,
    marks: MarkModel,
    totals: Option<TotalsModel>,
    seed: u64,
) -> Result<MarkedPattern> {
    let dt = marks.coord_dim();
    if dt == 0 {
        return Err(Error::InvalidParam("mark model needs dimension >= 1".into()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    let n = match points {
        PointModel::Binomial(n) => n,
        PointModel::Poisson(lambda) => {
            if !(lambda > 0.0) {
                return Err(Error::InvalidParam(format!(
                    "intensity must be positive, got {lambda}"
                )));
            }
            let pois = Poisson::new(lambda * window.area())
                .map_err(|e| Error::InvalidParam(format!("poisson: {e}")))?;
            pois.sample(&mut rng) as usize
        }
    };

    let locations: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            (
                rng.random_range(window.x_min..window.x_max),
                rng.random_range(window.y_min..window.y_max),
            )
        })
        .collect();

    // coords[i] holds the ilr coordinates of point i
    let coords: Vec<Vec<f64>> = match &marks {
        MarkModel::IidLogisticNormal { mean, cov } => {
            if cov.len() != dt || cov.iter().any(|r| r.len() != dt) {
                return Err(Error::InvalidParam(format!(
                    "covariance must be {dt}x{dt}"
                )));
            }
            let sigma = DMatrix::from_fn(dt, dt, |i, j| cov[i][j]);
            let chol = sigma
                .cholesky()
                .ok_or_else(|| Error::InvalidParam("covariance not positive definite".into()))?;
            let l = chol.l();
            (0..n)
                .map(|_| {
                    let eps: Vec<f64> =
                        (0..dt).map(|_| StandardNormal.sample(&mut rng)).collect();
                    (0..dt)
                        .map(|j| {
                            mean[j]
                                + (0..=j).map(|k| l[(j, k)] * eps[k]).sum::<f64>()
                        })
                        .collect()
                })
                .collect()
        }
        MarkModel::GeostatIlr {
            mean,
            variances,
            ranges,
        } => {
            if variances.len() != dt || ranges.len() != dt {
                return Err(Error::InvalidParam(
                    "variances and ranges must match the mean dimension".into(),
                ));
            }
            if variances.iter().any(|&v| !(v > 0.0)) {
                return Err(Error::InvalidParam("variances must be positive".into()));
            }
            if ranges.iter().any(|&r| r < 0.0) {
                return Err(Error::InvalidParam("ranges must be nonnegative".into()));
            }
            let mut per_coord: Vec<Vec<f64>> = Vec::with_capacity(dt);
            for j in 0..dt {
                let eps: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
                if ranges[j] == 0.0 || n == 0 {
                    per_coord
                        .push(eps.iter().map(|e| mean[j] + variances[j].sqrt() * e).collect());
                } else {
                    let rho = ranges[j];
                    let cov = DMatrix::from_fn(n, n, |a, b| {
                        let (xa, ya) = locations[a];
                        let (xb, yb) = locations[b];
                        let d = ((xa - xb).powi(2) + (ya - yb).powi(2)).sqrt();
                        let c = variances[j] * (-d / rho).exp();
                        if a == b {
                            c + 1e-10
                        } else {
                            c
                        }
                    });
                    let chol = cov.cholesky().ok_or_else(|| {
                        Error::InvalidParam("field covariance not positive definite".into())
                    })?;
                    let l = chol.l();
                    per_coord.push(
                        (0..n)
                            .map(|a| {
                                mean[j] + (0..=a).map(|k| l[(a, k)] * eps[k]).sum::<f64>()
                            })
                            .collect(),
                    );
                }
            }
            (0..n)
                .map(|i| (0..dt).map(|j| per_coord[j][i]).collect())
                .collect()
        }
    };

    let mark_vec: Vec<Composition> = coords
        .into_iter()
        .map(|values| {
            transform_inverse(&Coordinates {
                values,
                transform: TransformSpec::IlrPivot,
                source_dim: dt + 1,
                total_constant: 1.0,
            })
        })
        .collect::<Result<_>>()?;

    let total_vec = totals.map(|tm| {
        (0..n)
            .map(|_| {
                let e: f64 = StandardNormal.sample(&mut rng);
                (tm.log_mean + tm.log_sd * e).exp()
            })
            .collect::<Vec<f64>>()
    });

    MarkedPattern::new(window, locations, mark_vec, total_vec, None)
}
