//! Marked point patterns in a rectangular window.

mod simulate;

pub use simulate::{simulate_pattern, MarkModel, PointModel, TotalsModel};

use crate::coda::Composition;
use crate::error::{Error, Result};

/// Rectangular observation window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Window {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        if !(x_max > x_min && y_max > y_min) {
            return Err(Error::InvalidWindow(format!(
                "degenerate bounds [{x_min},{x_max}]x[{y_min},{y_max}]"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            y_min,
            y_max,
        })
    }

    pub fn unit_square() -> Self {
        Self {
            x_min: 0.0,
            x_max: 1.0,
            y_min: 0.0,
            y_max: 1.0,
        }
    }

    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn min_side(&self) -> f64 {
        self.width().min(self.height())
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }
}

/// A spatial point pattern with composition-valued marks, optional totals,
/// optional type labels and an optional secondary mark set for
/// cross-composition analyses. Immutable after validation.
#[derive(Debug, Clone)]
pub struct MarkedPattern {
    window: Window,
    points: Vec<(f64, f64)>,
    marks: Vec<Composition>,
    totals: Option<Vec<f64>>,
    types: Option<Vec<u32>>,
    marks_b: Option<Vec<Composition>>,
}

impl MarkedPattern {
    pub fn new(
        window: Window,
        points: Vec<(f64, f64)>,
        marks: Vec<Composition>,
        totals: Option<Vec<f64>>,
        types: Option<Vec<u32>>,
    ) -> Result<Self> {
        let p = Self {
            window,
            points,
            marks,
            totals,
            types,
            marks_b: None,
        };
        p.validate()?;
        Ok(p)
    }

    /// Attach a secondary composition-valued mark set (its own dimension is allowed).
    pub fn with_marks_b(mut self, marks_b: Vec<Composition>) -> Result<Self> {
        if marks_b.len() != self.len() {
            return Err(Error::LengthMismatch {
                field: "marks_b",
                got: marks_b.len(),
                expected: self.len(),
            });
        }
        check_marks_homogeneous(&marks_b)?;
        self.marks_b = Some(marks_b);
        Ok(self)
    }

    /// Re-check every structural invariant, reporting the first violation.
    pub fn validate(&self) -> Result<()> {
        let n = self.points.len();
        if self.marks.len() != n {
            return Err(Error::LengthMismatch {
                field: "marks",
                got: self.marks.len(),
                expected: n,
            });
        }
        if let Some(t) = &self.totals {
            if t.len() != n {
                return Err(Error::LengthMismatch {
                    field: "totals",
                    got: t.len(),
                    expected: n,
                });
            }
            for (i, &y) in t.iter().enumerate() {
                if !(y > 0.0) {
                    return Err(Error::NonPositiveTotal { index: i, value: y });
                }
            }
        }
        if let Some(ty) = &self.types {
            if ty.len() != n {
                return Err(Error::LengthMismatch {
                    field: "types",
                    got: ty.len(),
                    expected: n,
                });
            }
        }
        for (i, &(x, y)) in self.points.iter().enumerate() {
            if !self.window.contains(x, y) {
                return Err(Error::OutOfWindow { index: i, x, y });
            }
        }
        check_marks_homogeneous(&self.marks)?;
        // simplicity: no duplicate locations within 1e-12
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            self.points[a]
                .partial_cmp(&self.points[b])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        for w in order.windows(2) {
            let (a, b) = (w[0], w[1]);
            if (self.points[a].0 - self.points[b].0).abs() <= 1e-12
                && (self.points[a].1 - self.points[b].1).abs() <= 1e-12
            {
                return Err(Error::NotSimple {
                    first: a.min(b),
                    second: a.max(b),
                });
            }
        }
        Ok(())
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn marks(&self) -> &[Composition] {
        &self.marks
    }

    pub fn totals(&self) -> Option<&[f64]> {
        self.totals.as_deref()
    }

    pub fn types(&self) -> Option<&[u32]> {
        self.types.as_deref()
    }

    pub fn marks_b(&self) -> Option<&[Composition]> {
        self.marks_b.as_deref()
    }

    /// Mark dimension D.
    pub fn mark_dim(&self) -> usize {
        self.marks.first().map_or(0, |c| c.dim())
    }

    /// Estimated intensity of the unmarked process: `n / area`.
    pub fn intensity(&self) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::EmptyPattern);
        }
        Ok(self.len() as f64 / self.window.area())
    }

    /// All `n(n-1)` ordered distinct pairs with their Euclidean distance,
    /// in deterministic order (first index ascending, then second).
    pub fn pair_distances(&self) -> Result<impl Iterator<Item = (usize, usize, f64)> + '_> {
        if self.len() < 2 {
            return Err(Error::TooFewPoints(2));
        }
        let n = self.len();
        Ok((0..n).flat_map(move |i| {
            (0..n).filter(move |&j| j != i).map(move |j| {
                let (xi, yi) = self.points[i];
                let (xj, yj) = self.points[j];
                (i, j, ((xi - xj).powi(2) + (yi - yj).powi(2)).sqrt())
            })
        }))
    }

    /// Rebuild the pattern with marks (and joint per-point records) reordered
    /// by `idx`: new point `i` receives the records of old point `idx[i]`.
    pub(crate) fn with_mark_order(&self, idx: &[usize]) -> Self {
        let marks = idx.iter().map(|&k| self.marks[k].clone()).collect();
        let totals = self
            .totals
            .as_ref()
            .map(|t| idx.iter().map(|&k| t[k]).collect());
        let marks_b = self
            .marks_b
            .as_ref()
            .map(|m| idx.iter().map(|&k| m[k].clone()).collect());
        Self {
            window: self.window,
            points: self.points.clone(),
            marks,
            totals,
            types: self.types.clone(),
            marks_b,
        }
    }
}

fn check_marks_homogeneous(marks: &[Composition]) -> Result<()> {
    if let Some(first) = marks.first() {
        let (d, w) = (first.dim(), first.total_constant());
        for c in marks {
            if c.dim() != d {
                return Err(Error::DimensionMismatch {
                    left: c.dim(),
                    right: d,
                });
            }
            if (c.total_constant() - w).abs() > crate::coda::CLOSURE_TOL * w {
                return Err(Error::TotalConstantMismatch {
                    left: c.total_constant(),
                    right: w,
                });
            }
        }
    }
    Ok(())
}

/// Strictly increasing positive evaluation distances for all curves.
#[derive(Debug, Clone, PartialEq)]
pub struct RGrid {
    values: Vec<f64>,
}

impl RGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 grid points, got {}",
                values.len()
            )));
        }
        if !(values[0] > 0.0) {
            return Err(Error::InvalidGrid("first grid point must be positive".into()));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("grid must be strictly increasing".into()));
        }
        Ok(Self { values })
    }

    /// Evenly spaced grid of `n` points on `[r_min, r_max]`.
    pub fn linspace(r_min: f64, r_max: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGrid("need at least 2 grid points".into()));
        }
        if !(r_min > 0.0 && r_max > r_min) {
            return Err(Error::InvalidGrid(format!(
                "need 0 < r_min < r_max, got [{r_min}, {r_max}]"
            )));
        }
        let step = (r_max - r_min) / (n - 1) as f64;
        Self::new((0..n).map(|i| r_min + step * i as f64).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}
