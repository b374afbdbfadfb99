//! Log-ratio coordinate representations of compositions.

use crate::error::{Error, Result};

use super::Composition;

/// Which map carries compositions to real coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum TransformSpec {
    /// Parts used as-is (scalar-mark machinery as a special case).
    Identity,
    /// All `D²` ordered log-ratios `log(c_j1/c_j2)`, indexed `(1,1)…(D,D)`.
    Lr,
    /// Additive log-ratio relative to the last part.
    Alr,
    /// Centered log-ratio relative to the geometric mean.
    Clr,
    /// Isometric log-ratio in pivot coordinates (the default orthonormal basis).
    IlrPivot,
    /// Isometric log-ratio in a user-supplied orthonormal contrast basis;
    /// rows must be orthonormal and sum to zero.
    IlrBasis(Vec<Vec<f64>>),
    /// Centered alpha-transformation (sum-to-zero, zero-tolerant).
    AlphaClr(f64),
    /// Isometric alpha-transformation (orthonormal coordinates, zero-tolerant).
    AlphaIlr(f64),
}

impl TransformSpec {
    /// Coordinate dimension produced for a `D`-part composition.
    pub fn coord_dim(&self, d: usize) -> usize {
        match self {
            TransformSpec::Identity => d,
            TransformSpec::Lr => d * d,
            TransformSpec::Alr => d - 1,
            TransformSpec::Clr => d,
            TransformSpec::IlrPivot | TransformSpec::IlrBasis(_) => d - 1,
            TransformSpec::AlphaClr(_) => d,
            TransformSpec::AlphaIlr(_) => d - 1,
        }
    }

    /// Weight `ω` that carries the coordinate-space Euclidean inner product back
    /// to the simplex inner product: `1/2D` for the log-ratio representation,
    /// `1` otherwise.
    pub fn omega(&self, d: usize) -> f64 {
        match self {
            TransformSpec::Lr => 1.0 / (2.0 * d as f64),
            _ => 1.0,
        }
    }

    /// Validate the spec against a composition dimension.
    pub fn validate(&self, d: usize) -> Result<()> {
        if d < 2 {
            return Err(Error::TooFewParts(d));
        }
        match self {
            TransformSpec::IlrBasis(basis) => {
                if basis.len() != d - 1 || basis.iter().any(|row| row.len() != d) {
                    return Err(Error::InvalidTransform(format!(
                        "basis must be ({}x{}), got ({}x{})",
                        d - 1,
                        d,
                        basis.len(),
                        basis.first().map_or(0, |r| r.len())
                    )));
                }
                for (i, row) in basis.iter().enumerate() {
                    let s: f64 = row.iter().sum();
                    if s.abs() > 1e-10 {
                        return Err(Error::InvalidTransform(format!(
                            "basis row {i} sums to {s}, expected 0"
                        )));
                    }
                    for (j, other) in basis.iter().enumerate() {
                        let dot: f64 = row.iter().zip(other).map(|(a, b)| a * b).sum();
                        let expect = if i == j { 1.0 } else { 0.0 };
                        if (dot - expect).abs() > 1e-10 {
                            return Err(Error::InvalidTransform(format!(
                                "basis rows {i},{j} have inner product {dot}, expected {expect}"
                            )));
                        }
                    }
                }
                Ok(())
            }
            TransformSpec::AlphaClr(alpha) | TransformSpec::AlphaIlr(alpha) => {
                if !(*alpha > 0.0) {
                    Err(Error::InvalidAlpha(*alpha))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// True for the alpha family, which tolerates zero parts.
    pub fn tolerates_zeros(&self) -> bool {
        matches!(
            self,
            TransformSpec::AlphaClr(_) | TransformSpec::AlphaIlr(_) | TransformSpec::Identity
        )
    }
}

/// A transformed composition together with the bookkeeping needed to invert it.
#[derive(Debug, Clone, PartialEq)]
pub struct Coordinates {
    pub values: Vec<f64>,
    pub transform: TransformSpec,
    pub source_dim: usize,
    pub total_constant: f64,
}

impl Coordinates {
    fn new(
        values: Vec<f64>,
        transform: TransformSpec,
        source_dim: usize,
        total_constant: f64,
    ) -> Result<Self> {
        let expected = transform.coord_dim(source_dim);
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                left: values.len(),
                right: expected,
            });
        }
        if matches!(
            transform,
            TransformSpec::Clr | TransformSpec::AlphaClr(_)
        ) {
            let s: f64 = values.iter().sum();
            debug_assert!(s.abs() < 1e-9, "centered coordinates must sum to zero");
        }
        Ok(Self {
            values,
            transform,
            source_dim,
            total_constant,
        })
    }
}

/// The `(D-1) x D` orthonormal contrast matrix whose rows generate pivot coordinates.
///
/// Row `j` (0-based) carries `sqrt((D-j-1)/(D-j))` at position `j` and balances it
/// against the remaining parts. Orthonormality and zero row sums are checked at
/// construction.
pub fn helmert_pivot(d: usize) -> Vec<Vec<f64>> {
    assert!(d >= 2, "need at least two parts");
    let mut rows = Vec::with_capacity(d - 1);
    for j in 0..d - 1 {
        let tail = (d - j - 1) as f64;
        let a = (tail / (tail + 1.0)).sqrt();
        let mut row = vec![0.0; d];
        row[j] = a;
        for k in j + 1..d {
            row[k] = -a / tail;
        }
        rows.push(row);
    }
    for (i, ri) in rows.iter().enumerate() {
        debug_assert!(ri.iter().sum::<f64>().abs() < 1e-12);
        for (j, rj) in rows.iter().enumerate() {
            let dot: f64 = ri.iter().zip(rj).map(|(a, b)| a * b).sum();
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!(
                (dot - expect).abs() < 1e-10,
                "contrast basis failed orthonormality check"
            );
        }
    }
    rows
}

fn clr_values(c: &Composition) -> Result<Vec<f64>> {
    let logs: Vec<f64> = c
        .parts()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if v > 0.0 {
                Ok(v.ln())
            } else {
                Err(Error::NonPositivePart { index: i, value: v })
            }
        })
        .collect::<Result<_>>()?;
    let mean = logs.iter().sum::<f64>() / logs.len() as f64;
    Ok(logs.iter().map(|l| l - mean).collect())
}

fn contract(values: &[f64], basis: &[Vec<f64>]) -> Vec<f64> {
    basis
        .iter()
        .map(|row| row.iter().zip(values).map(|(h, v)| h * v).sum())
        .collect()
}

fn aclr_values(c: &Composition, alpha: f64) -> Result<Vec<f64>> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    // work on the unit-closed composition so the coordinates do not depend on
    // the total-constant convention
    let w = c.total_constant();
    let powered: Vec<f64> = c.parts().iter().map(|&v| (v / w).powf(alpha)).collect();
    let mean = powered.iter().sum::<f64>() / powered.len() as f64;
    Ok(powered.iter().map(|p| (p - mean) / alpha).collect())
}

/// Apply a coordinate transform to a composition.
pub fn transform(c: &Composition, spec: &TransformSpec) -> Result<Coordinates> {
    spec.validate(c.dim())?;
    let d = c.dim();
    let values = match spec {
        TransformSpec::Identity => c.parts().to_vec(),
        TransformSpec::Lr => {
            let logs: Vec<f64> = c
                .parts()
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    if v > 0.0 {
                        Ok(v.ln())
                    } else {
                        Err(Error::NonPositivePart { index: i, value: v })
                    }
                })
                .collect::<Result<_>>()?;
            let mut out = Vec::with_capacity(d * d);
            for j1 in 0..d {
                for j2 in 0..d {
                    out.push(logs[j1] - logs[j2]);
                }
            }
            out
        }
        TransformSpec::Alr => {
            c.check_positive()?;
            let last = c.parts()[d - 1].ln();
            c.parts()[..d - 1].iter().map(|v| v.ln() - last).collect()
        }
        TransformSpec::Clr => clr_values(c)?,
        TransformSpec::IlrPivot => contract(&clr_values(c)?, &helmert_pivot(d)),
        TransformSpec::IlrBasis(basis) => contract(&clr_values(c)?, basis),
        TransformSpec::AlphaClr(alpha) => aclr_values(c, *alpha)?,
        TransformSpec::AlphaIlr(alpha) => contract(&aclr_values(c, *alpha)?, &helmert_pivot(d)),
    };
    Coordinates::new(values, spec.clone(), d, c.total_constant())
}

/// Invert a coordinate representation back to the simplex.
///
/// Defined for `clr`, `ilr` (pivot or custom basis), `alr` (the reference part
/// is carried in the spec) and `identity`. The log-ratio matrix and the alpha
/// family are not invertible here.
pub fn transform_inverse(z: &Coordinates) -> Result<Composition> {
    let d = z.source_dim;
    match &z.transform {
        TransformSpec::Identity => Composition::closure(&z.values, z.total_constant),
        TransformSpec::Clr => {
            let raw: Vec<f64> = z.values.iter().map(|v| v.exp()).collect();
            Composition::closure(&raw, z.total_constant)
        }
        TransformSpec::IlrPivot => {
            let basis = helmert_pivot(d);
            inverse_from_ilr(&z.values, &basis, d, z.total_constant)
        }
        TransformSpec::IlrBasis(basis) => inverse_from_ilr(&z.values, basis, d, z.total_constant),
        TransformSpec::Alr => {
            let mut raw: Vec<f64> = z.values.iter().map(|v| v.exp()).collect();
            raw.push(1.0);
            Composition::closure(&raw, z.total_constant)
        }
        TransformSpec::Lr => Err(Error::UnsupportedInverse("log-ratio matrix coordinates")),
        TransformSpec::AlphaClr(_) | TransformSpec::AlphaIlr(_) => {
            Err(Error::UnsupportedInverse("alpha-family coordinates"))
        }
    }
}

fn inverse_from_ilr(
    values: &[f64],
    basis: &[Vec<f64>],
    d: usize,
    total_constant: f64,
) -> Result<Composition> {
    // clr = z · H reconstructs the zero-sum representation
    let mut clr = vec![0.0; d];
    for (zj, row) in values.iter().zip(basis) {
        for (c, h) in clr.iter_mut().zip(row) {
            *c += zj * h;
        }
    }
    let raw: Vec<f64> = clr.iter().map(|v| v.exp()).collect();
    Composition::closure(&raw, total_constant)
}

/// Alpha-family transform. `centered` selects the sum-to-zero D-dimensional
/// form; otherwise the `(D-1)`-dimensional orthonormal-coordinate form is
/// returned.
pub fn alpha_transform(c: &Composition, alpha: f64, centered: bool) -> Result<Coordinates> {
    let spec = if centered {
        TransformSpec::AlphaClr(alpha)
    } else {
        TransformSpec::AlphaIlr(alpha)
    };
    transform(c, &spec)
}
