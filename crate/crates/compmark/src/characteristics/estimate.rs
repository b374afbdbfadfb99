//! Kernel ratio estimators over the ordered-pair stream.
//!
//! All accumulation runs over fixed-size pair blocks that are reduced in
//! block order, so results are bit-stable across thread counts.

use std::ops::Range;

use rayon::prelude::*;

use crate::coda::{transform_inverse, Composition, Coordinates, TransformSpec};
use crate::error::{Error, Result};
use crate::pattern::MarkedPattern;

use super::testfn::CoordinateSet;
use super::{
    CharacteristicCurve, CrossSpec, EstimatorConfig, MarkSet, Scope, TestFamily, TestFunctionSpec,
};

const PAIR_BLOCK: usize = 8192;

/// Edge handling for the mark-weighted K function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgeCorrection {
    /// No correction; the documented small-sample bias near the boundary applies.
    #[default]
    None,
    /// Translation correction `area / area_of_shifted_overlap`.
    Translation,
}

/// Distances and kernel weights of every unordered pair that can reach the
/// grid; shared by all curves on the same pattern and grid.
pub(crate) struct PairCache {
    pub pairs: Vec<(u32, u32)>,
    pub offsets: Vec<u32>,
    pub hits: Vec<(u32, f64)>,
    /// Ordered-pair kernel mass per grid entry (both directions of each pair).
    pub denom: Vec<f64>,
    /// Kernel mass expressed as an equivalent count of ordered pairs at the peak.
    pub eff_pairs: Vec<f64>,
    pub masked: Vec<bool>,
}

impl PairCache {
    pub fn build(points: &[(f64, f64)], cfg: &EstimatorConfig) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::TooFewPoints(2));
        }
        let grid = cfg.rgrid.values();
        let d = grid.len();
        let support = cfg.kernel.support_radius(cfg.bandwidth);
        let reach_max = grid[d - 1] + support;
        let reach_min = grid[0] - support;

        let n = points.len();
        let mut pairs = Vec::new();
        let mut offsets = vec![0u32];
        let mut hits: Vec<(u32, f64)> = Vec::new();
        let mut denom = vec![0.0; d];
        for i in 0..n {
            for j in i + 1..n {
                let dx = points[i].0 - points[j].0;
                let dy = points[i].1 - points[j].1;
                let dist = (dx * dx + dy * dy).sqrt();
                if dist > reach_max || dist < reach_min {
                    continue;
                }
                let lo = grid.partition_point(|&r| r < dist - support);
                let hi = grid.partition_point(|&r| r <= dist + support);
                if lo == hi {
                    continue;
                }
                pairs.push((i as u32, j as u32));
                for (g, &r) in grid.iter().enumerate().take(hi).skip(lo) {
                    let w = cfg.kernel.eval(dist - r, cfg.bandwidth);
                    if w > 0.0 {
                        hits.push((g as u32, w));
                        denom[g] += 2.0 * w;
                    }
                }
                offsets.push(hits.len() as u32);
            }
        }
        let peak = cfg.kernel.peak(cfg.bandwidth);
        let eff_pairs: Vec<f64> = denom.iter().map(|m| m / peak).collect();
        let masked: Vec<bool> = eff_pairs
            .iter()
            .map(|&e| e < cfg.min_pairs as f64)
            .collect();
        Ok(Self {
            pairs,
            offsets,
            hits,
            denom,
            eff_pairs,
            masked,
        })
    }

    #[inline]
    pub(crate) fn pair_hits(&self, p: usize) -> &[(u32, f64)] {
        &self.hits[self.offsets[p] as usize..self.offsets[p + 1] as usize]
    }
}

/// Sum per-block partial accumulators in block order.
pub(crate) fn par_accumulate<F>(npairs: usize, width: usize, block: F) -> Vec<f64>
where
    F: Fn(Range<usize>, &mut [f64]) + Sync,
{
    let nblocks = npairs.div_ceil(PAIR_BLOCK).max(1);
    let partials: Vec<Vec<f64>> = (0..nblocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = vec![0.0; width];
            let start = b * PAIR_BLOCK;
            if start < npairs {
                block(start..((b + 1) * PAIR_BLOCK).min(npairs), &mut acc);
            }
            acc
        })
        .collect();
    let mut out = vec![0.0; width];
    for p in partials {
        for (o, v) in out.iter_mut().zip(p) {
            *o += v;
        }
    }
    out
}

/// A test-function specification bound to the transformed marks of a pattern.
pub(crate) struct SpecEval {
    pub family: TestFamily,
    pub scope: Scope,
    pub omega: f64,
    first: CoordinateSet,
    second: Option<CoordinateSet>,
    /// `(labels, p, q)`: ordered pairs restricted to `type(x1)=p`, `type(x2)=q`.
    type_filter: Option<(Vec<u32>, u32, u32)>,
}

impl SpecEval {
    pub fn prepare(p: &MarkedPattern, spec: &TestFunctionSpec) -> Result<Self> {
        spec.validate(p.mark_dim())?;
        let cross = spec.cross;
        let set_for = |set: MarkSet| -> Result<CoordinateSet> {
            match set {
                MarkSet::Primary => CoordinateSet::from_marks(p.marks(), &spec.transform),
                MarkSet::Secondary => {
                    let marks_b = p.marks_b().ok_or(Error::MissingMarkSetB)?;
                    CoordinateSet::from_marks(marks_b, &spec.transform)
                }
            }
        };
        let (first, second) = match cross {
            None => (set_for(MarkSet::Primary)?, None),
            Some(c) => {
                let f = set_for(c.first)?;
                let s = if c.first == c.second {
                    None
                } else {
                    Some(set_for(c.second)?)
                };
                (f, s)
            }
        };
        let type_filter = match cross.and_then(|c| c.types) {
            None => None,
            Some((tp, tq)) => {
                let labels = p.types().ok_or(Error::MissingTypes)?.to_vec();
                if !matches!(
                    spec.family,
                    TestFamily::Product | TestFamily::First | TestFamily::Second
                ) {
                    return Err(Error::InvalidSpec(
                        "type-filtered pairs support only the mean-based families".into(),
                    ));
                }
                Some((labels, tp, tq))
            }
        };
        // componentwise indices must also fit the secondary set
        if let (Scope::Componentwise { l, .. }, Some(s)) = (spec.scope, second.as_ref()) {
            if l >= s.dim {
                return Err(Error::IndexOutOfRange { index: l, dim: s.dim });
            }
        }
        if spec.scope == Scope::Compositional {
            if let Some(s) = second.as_ref() {
                if s.dim != first.dim {
                    return Err(Error::DimensionMismatch {
                        left: first.dim,
                        right: s.dim,
                    });
                }
            }
        }
        let omega = first.omega;
        Ok(Self {
            family: spec.family,
            scope: spec.scope,
            omega,
            first,
            second,
            type_filter,
        })
    }

    #[inline]
    fn second(&self) -> &CoordinateSet {
        self.second.as_ref().unwrap_or(&self.first)
    }

    pub fn has_filter(&self) -> bool {
        self.type_filter.is_some()
    }

    /// Indicator that the ordered pair (first point `i`, second point `k`)
    /// passes the type filter. Type labels stay attached to locations.
    #[inline]
    fn admits(&self, i: usize, k: usize) -> f64 {
        match &self.type_filter {
            None => 1.0,
            Some((labels, p, q)) => {
                if labels[i] == *p && labels[k] == *q {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Coordinate means of the two argument sets, honoring the type filter
    /// and the current mark assignment.
    fn argument_means(&self, perm: Option<&[usize]>) -> Result<(Vec<f64>, Vec<f64>)> {
        let mean_of = |set: &CoordinateSet, stratum: Option<(&[u32], u32)>| -> Result<Vec<f64>> {
            let mut acc = vec![0.0; set.dim];
            let mut count = 0usize;
            for i in 0..set.n {
                if let Some((labels, wanted)) = stratum {
                    if labels[i] != wanted {
                        continue;
                    }
                }
                let row = set.row(perm.map_or(i, |p| p[i]));
                for (a, v) in acc.iter_mut().zip(row) {
                    *a += v;
                }
                count += 1;
            }
            if count == 0 {
                return Err(Error::InvalidSpec("empty type stratum for moments".into()));
            }
            for a in acc.iter_mut() {
                *a /= count as f64;
            }
            Ok(acc)
        };
        match &self.type_filter {
            None => {
                let m1 = mean_of(&self.first, None)?;
                let m2 = if self.second.is_some() {
                    mean_of(self.second(), None)?
                } else {
                    m1.clone()
                };
                Ok((m1, m2))
            }
            Some((labels, p, q)) => {
                let m1 = mean_of(&self.first, Some((labels, *p)))?;
                let m2 = mean_of(self.second(), Some((labels, *q)))?;
                Ok((m1, m2))
            }
        }
    }

    /// Evaluate the test function for the ordered pair (first `pi`, second `pk`)
    /// where `pi`/`pk` already point at mark rows. `mu1`/`mu2` carry whatever
    /// centering the family requires.
    #[inline]
    fn t_value(&self, pi: usize, pk: usize, mu1: &[f64], mu2: &[f64]) -> f64 {
        let a = self.first.row(pi);
        let b = self.second().row(pk);
        match self.scope {
            Scope::Componentwise { j, l } => match self.family {
                TestFamily::Product => a[j] * b[l],
                TestFamily::First => a[j],
                TestFamily::Second => b[l],
                TestFamily::HalfSquaredDiff => 0.5 * (a[j] - b[l]) * (a[j] - b[l]),
                TestFamily::CenteredProduct | TestFamily::ConditionallyCentered => {
                    (a[j] - mu1[j]) * (b[l] - mu2[l])
                }
            },
            Scope::Compositional => {
                let mut s = 0.0;
                match self.family {
                    TestFamily::Product => {
                        for (x, y) in a.iter().zip(b) {
                            s += x * y;
                        }
                    }
                    TestFamily::HalfSquaredDiff => {
                        for (x, y) in a.iter().zip(b) {
                            s += 0.5 * (x - y) * (x - y);
                        }
                    }
                    TestFamily::CenteredProduct | TestFamily::ConditionallyCentered => {
                        for (((x, y), m1), m2) in a.iter().zip(b).zip(mu1).zip(mu2) {
                            s += (x - m1) * (y - m2);
                        }
                    }
                    TestFamily::First | TestFamily::Second => unreachable!("rejected by validate"),
                }
                self.omega * s
            }
        }
    }
}

/// Conditional coordinate means per grid entry, as needed by the
/// conditionally centered family. `mu1` centers the first argument, `mu2`
/// the second; each is a flat `[grid][coord]` table with a validity flag.
struct ConditionalTable {
    mu1: Vec<f64>,
    mu2: Vec<f64>,
    valid: Vec<bool>,
    dim1: usize,
    dim2: usize,
}

fn conditional_table(
    cache: &PairCache,
    eval: &SpecEval,
    perm: Option<&[usize]>,
) -> ConditionalTable {
    let d = cache.denom.len();
    let dim1 = eval.first.dim;
    let dim2 = eval.second().dim;
    let width = d * (dim1 + dim2 + 1);
    let acc = par_accumulate(cache.pairs.len(), width, |range, acc| {
        let (sum1, rest) = acc.split_at_mut(d * dim1);
        let (sum2, mass) = rest.split_at_mut(d * dim2);
        for p in range {
            let (i, k) = cache.pairs[p];
            let (i, k) = (i as usize, k as usize);
            let (pi, pk) = (perm.map_or(i, |o| o[i]), perm.map_or(k, |o| o[k]));
            let f_ik = eval.admits(i, k);
            let f_ki = eval.admits(k, i);
            if f_ik == 0.0 && f_ki == 0.0 {
                continue;
            }
            let first_i = eval.first.row(pi);
            let first_k = eval.first.row(pk);
            let second_i = eval.second().row(pi);
            let second_k = eval.second().row(pk);
            for &(g, w) in cache.pair_hits(p) {
                let g = g as usize;
                mass[g] += (f_ik + f_ki) * w;
                for c in 0..dim1 {
                    sum1[g * dim1 + c] += w * (f_ik * first_i[c] + f_ki * first_k[c]);
                }
                for c in 0..dim2 {
                    sum2[g * dim2 + c] += w * (f_ik * second_k[c] + f_ki * second_i[c]);
                }
            }
        }
    });
    let (sum1, rest) = acc.split_at(d * dim1);
    let (sum2, mass) = rest.split_at(d * dim2);
    let mut mu1 = vec![0.0; d * dim1];
    let mut mu2 = vec![0.0; d * dim2];
    let mut valid = vec![false; d];
    for g in 0..d {
        if mass[g] > 0.0 {
            valid[g] = true;
            for c in 0..dim1 {
                mu1[g * dim1 + c] = sum1[g * dim1 + c] / mass[g];
            }
            for c in 0..dim2 {
                mu2[g * dim2 + c] = sum2[g * dim2 + c] / mass[g];
            }
        }
    }
    ConditionalTable {
        mu1,
        mu2,
        valid,
        dim1,
        dim2,
    }
}

/// Ratio-estimator values for one test function; `None` marks grid entries
/// with insufficient kernel mass.
pub(crate) fn nabla_values(
    cache: &PairCache,
    cfg: &EstimatorConfig,
    eval: &SpecEval,
    perm: Option<&[usize]>,
) -> Result<Vec<Option<f64>>> {
    let d = cache.denom.len();
    let needs_uncond_mean = eval.family == TestFamily::CenteredProduct;
    let (mu1, mu2) = if needs_uncond_mean {
        eval.argument_means(perm)?
    } else {
        (Vec::new(), Vec::new())
    };

    if eval.family == TestFamily::ConditionallyCentered {
        let table = conditional_table(cache, eval, perm);
        let acc = par_accumulate(cache.pairs.len(), 2 * d, |range, acc| {
            let (num, den) = acc.split_at_mut(d);
            for p in range {
                let (i, k) = cache.pairs[p];
                let (i, k) = (i as usize, k as usize);
                let (pi, pk) = (perm.map_or(i, |o| o[i]), perm.map_or(k, |o| o[k]));
                let f_ik = eval.admits(i, k);
                let f_ki = eval.admits(k, i);
                if f_ik == 0.0 && f_ki == 0.0 {
                    continue;
                }
                for &(g, w) in cache.pair_hits(p) {
                    let g = g as usize;
                    if !table.valid[g] {
                        continue;
                    }
                    let m1 = &table.mu1[g * table.dim1..(g + 1) * table.dim1];
                    let m2 = &table.mu2[g * table.dim2..(g + 1) * table.dim2];
                    let mut tsum = 0.0;
                    if f_ik > 0.0 {
                        tsum += eval.t_value(pi, pk, m1, m2);
                    }
                    if f_ki > 0.0 {
                        tsum += eval.t_value(pk, pi, m1, m2);
                    }
                    num[g] += tsum * w;
                    den[g] += (f_ik + f_ki) * w;
                }
            }
        });
        return Ok(finish_ratio(cache, cfg, eval, &acc));
    }

    let acc = if eval.has_filter() {
        par_accumulate(cache.pairs.len(), 2 * d, |range, acc| {
            let (num, den) = acc.split_at_mut(d);
            for p in range {
                let (i, k) = cache.pairs[p];
                let (i, k) = (i as usize, k as usize);
                let (pi, pk) = (perm.map_or(i, |o| o[i]), perm.map_or(k, |o| o[k]));
                let f_ik = eval.admits(i, k);
                let f_ki = eval.admits(k, i);
                if f_ik == 0.0 && f_ki == 0.0 {
                    continue;
                }
                let mut tsum = 0.0;
                if f_ik > 0.0 {
                    tsum += eval.t_value(pi, pk, &mu1, &mu2);
                }
                if f_ki > 0.0 {
                    tsum += eval.t_value(pk, pi, &mu1, &mu2);
                }
                for &(g, w) in cache.pair_hits(p) {
                    num[g as usize] += tsum * w;
                    den[g as usize] += (f_ik + f_ki) * w;
                }
            }
        })
    } else {
        let mut acc = par_accumulate(cache.pairs.len(), d, |range, num| {
            for p in range {
                let (i, k) = cache.pairs[p];
                let (i, k) = (i as usize, k as usize);
                let (pi, pk) = (perm.map_or(i, |o| o[i]), perm.map_or(k, |o| o[k]));
                let tsum =
                    eval.t_value(pi, pk, &mu1, &mu2) + eval.t_value(pk, pi, &mu1, &mu2);
                for &(g, w) in cache.pair_hits(p) {
                    num[g as usize] += tsum * w;
                }
            }
        });
        acc.extend_from_slice(&cache.denom);
        acc
    };
    Ok(finish_ratio(cache, cfg, eval, &acc))
}

fn finish_ratio(
    cache: &PairCache,
    cfg: &EstimatorConfig,
    eval: &SpecEval,
    acc: &[f64],
) -> Vec<Option<f64>> {
    let d = cache.denom.len();
    let (num, den) = acc.split_at(d);
    let peak = cfg.kernel.peak(cfg.bandwidth);
    (0..d)
        .map(|g| {
            let effective = if eval.has_filter() || eval.family == TestFamily::ConditionallyCentered
            {
                den[g] / peak
            } else {
                cache.eff_pairs[g]
            };
            if effective < cfg.min_pairs as f64 || den[g] == 0.0 {
                None
            } else {
                Some(num[g] / den[g])
            }
        })
        .collect()
}

/// All diagonal componentwise curves in one pass, as stacked rows used by the
/// combined test vector.
pub(crate) fn nabla_values_all_components(
    cache: &PairCache,
    cfg: &EstimatorConfig,
    coords: &CoordinateSet,
    family: TestFamily,
    perm: Option<&[usize]>,
) -> Result<Vec<Vec<Option<f64>>>> {
    let d = cache.denom.len();
    let dim = coords.dim;
    if matches!(family, TestFamily::First | TestFamily::Second) {
        return Err(Error::InvalidSpec(
            "combined vectors use two-argument test functions".into(),
        ));
    }
    let mu: Vec<f64> = if family == TestFamily::CenteredProduct {
        let mut acc = vec![0.0; dim];
        for i in 0..coords.n {
            let row = coords.row(perm.map_or(i, |o| o[i]));
            for (a, v) in acc.iter_mut().zip(row) {
                *a += v;
            }
        }
        acc.iter().map(|a| a / coords.n as f64).collect()
    } else {
        vec![0.0; dim]
    };

    // conditional means per grid entry when the family requires them
    let cond: Option<Vec<f64>> = if family == TestFamily::ConditionallyCentered {
        let acc = par_accumulate(cache.pairs.len(), d * dim, |range, acc| {
            for p in range {
                let (i, k) = cache.pairs[p];
                let (pi, pk) = (
                    perm.map_or(i as usize, |o| o[i as usize]),
                    perm.map_or(k as usize, |o| o[k as usize]),
                );
                let ri = coords.row(pi);
                let rk = coords.row(pk);
                for &(g, w) in cache.pair_hits(p) {
                    let base = g as usize * dim;
                    for c in 0..dim {
                        acc[base + c] += w * (ri[c] + rk[c]);
                    }
                }
            }
        });
        let mut mu_r = vec![0.0; d * dim];
        for g in 0..d {
            if cache.denom[g] > 0.0 {
                for c in 0..dim {
                    mu_r[g * dim + c] = acc[g * dim + c] / cache.denom[g];
                }
            }
        }
        Some(mu_r)
    } else {
        None
    };

    let acc = par_accumulate(cache.pairs.len(), d * dim, |range, acc| {
        for p in range {
            let (i, k) = cache.pairs[p];
            let (pi, pk) = (
                perm.map_or(i as usize, |o| o[i as usize]),
                perm.map_or(k as usize, |o| o[k as usize]),
            );
            let ri = coords.row(pi);
            let rk = coords.row(pk);
            for &(g, w) in cache.pair_hits(p) {
                let base = g as usize * dim;
                match family {
                    TestFamily::Product => {
                        for c in 0..dim {
                            acc[base + c] += w * 2.0 * ri[c] * rk[c];
                        }
                    }
                    TestFamily::HalfSquaredDiff => {
                        for c in 0..dim {
                            let diff = ri[c] - rk[c];
                            acc[base + c] += w * diff * diff;
                        }
                    }
                    TestFamily::CenteredProduct => {
                        for c in 0..dim {
                            acc[base + c] += w * 2.0 * (ri[c] - mu[c]) * (rk[c] - mu[c]);
                        }
                    }
                    TestFamily::ConditionallyCentered => {
                        let mu_r = cond.as_ref().unwrap();
                        for c in 0..dim {
                            let m = mu_r[base + c];
                            acc[base + c] += w * 2.0 * (ri[c] - m) * (rk[c] - m);
                        }
                    }
                    _ => unreachable!(),
                }
            }
        }
    });
    Ok((0..dim)
        .map(|c| {
            (0..d)
                .map(|g| {
                    if cache.masked[g] || cache.denom[g] == 0.0 {
                        None
                    } else {
                        Some(acc[g * dim + c] / cache.denom[g])
                    }
                })
                .collect()
        })
        .collect())
}

fn scope_label(spec: &TestFunctionSpec) -> String {
    let tag = match &spec.transform {
        TransformSpec::Identity => "id",
        TransformSpec::Lr => "lr",
        TransformSpec::Alr => "alr",
        TransformSpec::Clr => "clr",
        TransformSpec::IlrPivot | TransformSpec::IlrBasis(_) => "ilr",
        TransformSpec::AlphaClr(_) => "aclr",
        TransformSpec::AlphaIlr(_) => "ailr",
    };
    match spec.scope {
        Scope::Componentwise { j, l } => {
            format!("{}_{}{}[{}]", spec.family.symbol(), j + 1, l + 1, tag)
        }
        Scope::Compositional => format!("{}_cc[{}]", spec.family.symbol(), tag),
    }
}

/// Kernel estimator of the second-order product density of the unmarked
/// process; entries with empty kernel support are masked.
pub fn estimate_rho2(p: &MarkedPattern, cfg: &EstimatorConfig) -> Result<CharacteristicCurve> {
    let cache = PairCache::build(p.points(), cfg)?;
    let area = p.window().area();
    let values = cfg
        .rgrid
        .values()
        .iter()
        .enumerate()
        .map(|(g, &r)| {
            if cache.denom[g] == 0.0 {
                None
            } else {
                Some(cache.denom[g] / (2.0 * std::f64::consts::PI * r * area))
            }
        })
        .collect();
    Ok(CharacteristicCurve {
        rgrid: cfg.rgrid.clone(),
        values,
        label: "rho2".into(),
        normalizer: None,
    })
}

/// Test-function-weighted second-order density (the numerator of the ratio
/// estimator, with its geometric constants kept).
pub fn estimate_tf_density(
    p: &MarkedPattern,
    spec: &TestFunctionSpec,
    cfg: &EstimatorConfig,
) -> Result<CharacteristicCurve> {
    let cache = PairCache::build(p.points(), cfg)?;
    let eval = SpecEval::prepare(p, spec)?;
    let (mu1, mu2) = if eval.family == TestFamily::CenteredProduct {
        eval.argument_means(None)?
    } else if eval.family == TestFamily::ConditionallyCentered {
        return Err(Error::InvalidSpec(
            "conditionally centered density is not defined standalone".into(),
        ));
    } else {
        (Vec::new(), Vec::new())
    };
    let d = cache.denom.len();
    let num = par_accumulate(cache.pairs.len(), d, |range, num| {
        for pp in range {
            let (i, k) = cache.pairs[pp];
            let (i, k) = (i as usize, k as usize);
            let f_ik = eval.admits(i, k);
            let f_ki = eval.admits(k, i);
            let mut tsum = 0.0;
            if f_ik > 0.0 {
                tsum += eval.t_value(i, k, &mu1, &mu2);
            }
            if f_ki > 0.0 {
                tsum += eval.t_value(k, i, &mu1, &mu2);
            }
            for &(g, w) in cache.pair_hits(pp) {
                num[g as usize] += tsum * w;
            }
        }
    });
    let area = p.window().area();
    let values = cfg
        .rgrid
        .values()
        .iter()
        .enumerate()
        .map(|(g, &r)| {
            if cache.denom[g] == 0.0 {
                None
            } else {
                Some(num[g] / (2.0 * std::f64::consts::PI * r * area))
            }
        })
        .collect();
    Ok(CharacteristicCurve {
        rgrid: cfg.rgrid.clone(),
        values,
        label: format!("rho2_{}", scope_label(spec)),
        normalizer: None,
    })
}

/// Kernel ratio estimator of a mark characteristic on the grid.
pub fn estimate_nabla(
    p: &MarkedPattern,
    spec: &TestFunctionSpec,
    cfg: &EstimatorConfig,
) -> Result<CharacteristicCurve> {
    let cache = PairCache::build(p.points(), cfg)?;
    let eval = SpecEval::prepare(p, spec)?;
    let values = nabla_values(&cache, cfg, &eval, None)?;
    Ok(CharacteristicCurve {
        rgrid: cfg.rgrid.clone(),
        values,
        label: scope_label(spec),
        normalizer: None,
    })
}

/// Normalizing constant of a characteristic, from the global mark moments.
pub fn normalizer(spec: &TestFunctionSpec, p: &MarkedPattern) -> Result<f64> {
    if p.len() < 2 {
        return Err(Error::TooFewPoints(2));
    }
    let eval = SpecEval::prepare(p, spec)?;
    normalizer_from_eval(&eval, None)
}

/// Normalizer under a given mark assignment. Covariances are invariant under
/// mark permutation (joint records move as units), so only the type-filtered
/// means depend on `perm`.
pub(crate) fn normalizer_from_eval(eval: &SpecEval, perm: Option<&[usize]>) -> Result<f64> {
    let (mu1, mu2) = eval.argument_means(perm)?;
    let first = &eval.first;
    let second = eval.second();
    match eval.scope {
        Scope::Componentwise { j, l } => match eval.family {
            TestFamily::Product => Ok(mu1[j] * mu2[l]),
            TestFamily::First => Ok(mu1[j]),
            TestFamily::Second => Ok(mu2[l]),
            TestFamily::HalfSquaredDiff => {
                let var1 = first.covariance()?[j][j];
                let var2 = second.covariance()?[l][l];
                Ok(0.5 * (var1 + var2 + (mu1[j] - mu2[l]).powi(2)))
            }
            TestFamily::CenteredProduct | TestFamily::ConditionallyCentered => {
                // covariance of coordinate j of the first set and l of the
                // second, paired over points
                cross_covariance(first, second, j, l)
            }
        },
        Scope::Compositional => match eval.family {
            TestFamily::Product => {
                Ok(eval.omega * mu1.iter().zip(&mu2).map(|(a, b)| a * b).sum::<f64>())
            }
            TestFamily::HalfSquaredDiff => {
                let cov1 = first.covariance()?;
                let cov2 = second.covariance()?;
                let s: f64 = (0..first.dim)
                    .map(|j| 0.5 * (cov1[j][j] + cov2[j][j] + (mu1[j] - mu2[j]).powi(2)))
                    .sum();
                Ok(eval.omega * s)
            }
            TestFamily::CenteredProduct | TestFamily::ConditionallyCentered => {
                let s: f64 = (0..first.dim)
                    .map(|j| cross_covariance(first, second, j, j))
                    .sum::<Result<f64>>()?;
                Ok(eval.omega * s)
            }
            TestFamily::First | TestFamily::Second => Err(Error::InvalidSpec(
                "single-argument test functions have no compositional form".into(),
            )),
        },
    }
}

fn cross_covariance(a: &CoordinateSet, b: &CoordinateSet, j: usize, l: usize) -> Result<f64> {
    if a.n < 2 {
        return Err(Error::SampleTooSmall(a.n, 2));
    }
    let mu_a: f64 = (0..a.n).map(|i| a.row(i)[j]).sum::<f64>() / a.n as f64;
    let mu_b: f64 = (0..b.n).map(|i| b.row(i)[l]).sum::<f64>() / b.n as f64;
    let s: f64 = (0..a.n)
        .map(|i| (a.row(i)[j] - mu_a) * (b.row(i)[l] - mu_b))
        .sum();
    Ok(s / (a.n as f64 - 1.0))
}

/// Normalized characteristic: the ratio curve divided by its
/// independent-mark limit.
pub fn estimate_kappa(
    p: &MarkedPattern,
    spec: &TestFunctionSpec,
    cfg: &EstimatorConfig,
) -> Result<CharacteristicCurve> {
    let norm = normalizer(spec, p)?;
    if !(norm.abs() > 0.0) {
        return Err(Error::DegenerateNormalizer);
    }
    let mut curve = estimate_nabla(p, spec, cfg)?;
    for v in curve.values.iter_mut() {
        if let Some(x) = v.as_mut() {
            *x /= norm;
        }
    }
    curve.label = format!("kappa_{}", curve.label);
    curve.normalizer = Some(norm);
    Ok(curve)
}

/// Kernel-weighted conditional coordinate means per grid entry.
pub struct ConditionalMoments {
    pub rgrid: crate::pattern::RGrid,
    pub transform: TransformSpec,
    pub source_dim: usize,
    /// `means[g]` is `None` where the kernel mass is insufficient.
    pub means: Vec<Option<Vec<f64>>>,
}

impl ConditionalMoments {
    /// Conditional geometric centers per grid entry; defined when the means
    /// live in clr coordinates.
    pub fn centers(&self) -> Result<Vec<Option<Composition>>> {
        if self.transform != TransformSpec::Clr {
            return Err(Error::InvalidSpec(
                "conditional centers need clr coordinates".into(),
            ));
        }
        self.means
            .iter()
            .map(|m| {
                m.as_ref()
                    .map(|values| {
                        transform_inverse(&Coordinates {
                            values: values.clone(),
                            transform: TransformSpec::Clr,
                            source_dim: self.source_dim,
                            total_constant: 1.0,
                        })
                    })
                    .transpose()
            })
            .collect()
    }
}

/// Conditional mark means at each grid distance (the moment table feeding the
/// conditionally centered family).
pub fn conditional_moments_at_r(
    p: &MarkedPattern,
    transform: &TransformSpec,
    cfg: &EstimatorConfig,
) -> Result<ConditionalMoments> {
    let cache = PairCache::build(p.points(), cfg)?;
    let coords = CoordinateSet::from_marks(p.marks(), transform)?;
    let d = cache.denom.len();
    let dim = coords.dim;
    let acc = par_accumulate(cache.pairs.len(), d * dim, |range, acc| {
        for pp in range {
            let (i, k) = cache.pairs[pp];
            let ri = coords.row(i as usize);
            let rk = coords.row(k as usize);
            for &(g, w) in cache.pair_hits(pp) {
                let base = g as usize * dim;
                for c in 0..dim {
                    acc[base + c] += w * (ri[c] + rk[c]);
                }
            }
        }
    });
    let means = (0..d)
        .map(|g| {
            if cache.masked[g] || cache.denom[g] == 0.0 {
                None
            } else {
                Some(
                    (0..dim)
                        .map(|c| acc[g * dim + c] / cache.denom[g])
                        .collect(),
                )
            }
        })
        .collect();
    Ok(ConditionalMoments {
        rgrid: cfg.rgrid.clone(),
        transform: transform.clone(),
        source_dim: p.mark_dim(),
        means,
    })
}

/// Mark-weighted K function: cumulative test-function mass within distance r,
/// scaled to the unmarked K under independent marks.
pub fn estimate_mark_weighted_k(
    p: &MarkedPattern,
    spec: &TestFunctionSpec,
    cfg: &EstimatorConfig,
    edge: EdgeCorrection,
) -> Result<CharacteristicCurve> {
    if spec.family == TestFamily::ConditionallyCentered {
        return Err(Error::InvalidSpec(
            "conditional centering is not defined for cumulative statistics".into(),
        ));
    }
    let n = p.len();
    if n < 2 {
        return Err(Error::TooFewPoints(2));
    }
    let norm = normalizer(spec, p)?;
    if !(norm.abs() > 0.0) {
        return Err(Error::DegenerateNormalizer);
    }
    let eval = SpecEval::prepare(p, spec)?;
    let (mu1, mu2) = if eval.family == TestFamily::CenteredProduct {
        eval.argument_means(None)?
    } else {
        (Vec::new(), Vec::new())
    };
    let grid = cfg.rgrid.values();
    let d = grid.len();
    let r_max = grid[d - 1];
    let area = p.window().area();
    let (w_win, h_win) = (p.window().width(), p.window().height());
    let points = p.points();

    // bin each qualifying pair at the first grid entry covering its distance,
    // then cumulate
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = vec![0.0; d];
            for k in i + 1..n {
                let dx = points[i].0 - points[k].0;
                let dy = points[i].1 - points[k].1;
                let dist = (dx * dx + dy * dy).sqrt();
                if dist > r_max {
                    continue;
                }
                let g = grid.partition_point(|&r| r < dist);
                if g >= d {
                    continue;
                }
                let w_edge = match edge {
                    EdgeCorrection::None => 1.0,
                    EdgeCorrection::Translation => {
                        area / ((w_win - dx.abs()) * (h_win - dy.abs()))
                    }
                };
                let mut tsum = 0.0;
                if eval.admits(i, k) > 0.0 {
                    tsum += eval.t_value(i, k, &mu1, &mu2);
                }
                if eval.admits(k, i) > 0.0 {
                    tsum += eval.t_value(k, i, &mu1, &mu2);
                }
                acc[g] += tsum * w_edge;
            }
            acc
        })
        .collect();
    let mut binned = vec![0.0; d];
    for row in rows {
        for (b, v) in binned.iter_mut().zip(row) {
            *b += v;
        }
    }
    let scale = area / (n as f64 * (n as f64 - 1.0) * norm);
    let mut running = 0.0;
    let values = binned
        .iter()
        .map(|&v| {
            running += v;
            Some(running * scale)
        })
        .collect();
    Ok(CharacteristicCurve {
        rgrid: cfg.rgrid.clone(),
        values,
        label: format!("K_{}", scope_label(spec)),
        normalizer: Some(norm),
    })
}

/// Variance-stabilized version `L = sqrt(K/pi)`; negative K entries are masked.
pub fn l_transform(k_curve: &CharacteristicCurve) -> CharacteristicCurve {
    let values = k_curve
        .values
        .iter()
        .map(|v| {
            v.and_then(|x| {
                if x >= 0.0 {
                    Some((x / std::f64::consts::PI).sqrt())
                } else {
                    None
                }
            })
        })
        .collect();
    CharacteristicCurve {
        rgrid: k_curve.rgrid.clone(),
        values,
        label: format!("L{}", k_curve.label.strip_prefix('K').unwrap_or(&k_curve.label)),
        normalizer: k_curve.normalizer,
    }
}

/// Cross-composition (and cross-type) ratio estimator; requires the cross
/// filters to be present in the spec.
pub fn estimate_cross(
    p: &MarkedPattern,
    spec: &TestFunctionSpec,
    cfg: &EstimatorConfig,
) -> Result<CharacteristicCurve> {
    if spec.cross.is_none() {
        return Err(Error::InvalidSpec(
            "cross estimator needs cross filters; use estimate_nabla otherwise".into(),
        ));
    }
    estimate_nabla(p, spec, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coda::Composition;
    use crate::pattern::{MarkedPattern, RGrid, Window};
    use approx::assert_relative_eq;

    fn comp(parts: &[f64]) -> Composition {
        Composition::closure(parts, 1.0).unwrap()
    }

    fn two_point_pattern() -> MarkedPattern {
        MarkedPattern::new(
            Window::unit_square(),
            vec![(0.2, 0.5), (0.8, 0.5)],
            vec![comp(&[0.2, 0.8]), comp(&[0.8, 0.2])],
            None,
            None,
        )
        .unwrap()
    }

    fn fixture_config() -> EstimatorConfig {
        EstimatorConfig::new(
            RGrid::new(vec![0.3, 0.6, 0.9]).unwrap(),
            0.1,
            Kernel::Box,
        )
        .unwrap()
        .with_min_pairs(1)
    }

    use super::super::Kernel;

    #[test]
    fn rho2_two_point_fixture() {
        let p = two_point_pattern();
        let cfg = fixture_config();
        let curve = estimate_rho2(&p, &cfg).unwrap();
        // two ordered pairs at distance 0.6, box kernel peak 1/(2b)
        let oracle = 2.0 * (0.5 / 0.1) / (2.0 * std::f64::consts::PI * 0.6 * 1.0);
        assert_relative_eq!(curve.values[1].unwrap(), oracle, epsilon = 1e-12);
        // grid entries beyond kernel reach are masked
        assert!(curve.values[0].is_none());
        assert!(curve.values[2].is_none());
    }

    #[test]
    fn nabla_two_point_product_fixture() {
        let p = two_point_pattern();
        let cfg = fixture_config();
        let spec = TestFunctionSpec::new(
            TestFamily::Product,
            Scope::Componentwise { j: 0, l: 0 },
            TransformSpec::IlrPivot,
        );
        let curve = estimate_nabla(&p, &spec, &cfg).unwrap();
        let z = 0.5f64.sqrt() * 0.25f64.ln();
        assert_relative_eq!(curve.values[1].unwrap(), z * (-z), epsilon = 1e-12);
        assert_relative_eq!(curve.values[1].unwrap(), -0.9609060278386368, epsilon = 1e-12);
    }

    #[test]
    fn constant_marks_give_flat_curves() {
        let marks = vec![comp(&[0.3, 0.7]); 4];
        let p = MarkedPattern::new(
            Window::unit_square(),
            vec![(0.1, 0.1), (0.4, 0.2), (0.6, 0.7), (0.9, 0.4)],
            marks,
            None,
            None,
        )
        .unwrap();
        let cfg = EstimatorConfig::new(
            RGrid::linspace(0.1, 0.9, 16).unwrap(),
            0.15,
            Kernel::Epanechnikov,
        )
        .unwrap()
        .with_min_pairs(1);
        let vario = estimate_nabla(
            &p,
            &TestFunctionSpec::new(
                TestFamily::HalfSquaredDiff,
                Scope::Componentwise { j: 0, l: 0 },
                TransformSpec::IlrPivot,
            ),
            &cfg,
        )
        .unwrap();
        for (_, v) in vario.unmasked() {
            assert_relative_eq!(v, 0.0, epsilon = 1e-14);
        }
        let prod = estimate_nabla(
            &p,
            &TestFunctionSpec::new(
                TestFamily::Product,
                Scope::Componentwise { j: 0, l: 0 },
                TransformSpec::IlrPivot,
            ),
            &cfg,
        )
        .unwrap();
        let z = 0.5f64.sqrt() * (0.3f64 / 0.7).ln();
        for (_, v) in prod.unmasked() {
            assert_relative_eq!(v, z * z, epsilon = 1e-12);
        }
    }

    #[test]
    fn kappa_two_point_fixture() {
        let p = two_point_pattern();
        let cfg = fixture_config();
        let spec = TestFunctionSpec::new(
            TestFamily::Product,
            Scope::Componentwise { j: 0, l: 0 },
            TransformSpec::IlrPivot,
        );
        let curve = estimate_kappa(&p, &spec, &cfg).unwrap();
        // z1 = -z2, so the mean is 0 and the normalizer degenerates to 0*0 = 0
        // ... unless marks are asymmetric; build an asymmetric pair instead
        assert!(curve.normalizer.is_some());
        let p2 = MarkedPattern::new(
            Window::unit_square(),
            vec![(0.2, 0.5), (0.8, 0.5)],
            vec![comp(&[0.2, 0.8]), comp(&[0.4, 0.6])],
            None,
            None,
        )
        .unwrap();
        let curve = estimate_kappa(&p2, &spec, &cfg).unwrap();
        let z1 = 0.5f64.sqrt() * 0.25f64.ln();
        let z2 = 0.5f64.sqrt() * (0.4f64 / 0.6).ln();
        let mean = 0.5 * (z1 + z2);
        assert_relative_eq!(
            curve.values[1].unwrap(),
            z1 * z2 / (mean * mean),
            epsilon = 1e-12
        );
    }

    #[test]
    fn kappa_constant_marks_is_one() {
        let marks = vec![comp(&[0.3, 0.7]); 3];
        let p = MarkedPattern::new(
            Window::unit_square(),
            vec![(0.1, 0.1), (0.5, 0.5), (0.9, 0.2)],
            marks,
            None,
            None,
        )
        .unwrap();
        let cfg = EstimatorConfig::new(
            RGrid::linspace(0.2, 0.9, 8).unwrap(),
            0.2,
            Kernel::Epanechnikov,
        )
        .unwrap()
        .with_min_pairs(1);
        let spec = TestFunctionSpec::new(
            TestFamily::Product,
            Scope::Componentwise { j: 0, l: 0 },
            TransformSpec::IlrPivot,
        );
        let curve = estimate_kappa(&p, &spec, &cfg).unwrap();
        for (_, v) in curve.unmasked() {
            assert_relative_eq!(v, 1.0, epsilon = 1e-12);
        }
        // degenerate: variogram normalizer vanishes for constant marks
        let spec4 = TestFunctionSpec::new(
            TestFamily::HalfSquaredDiff,
            Scope::Componentwise { j: 0, l: 0 },
            TransformSpec::IlrPivot,
        );
        assert!(matches!(
            estimate_kappa(&p, &spec4, &cfg),
            Err(Error::DegenerateNormalizer)
        ));
    }

    #[test]
    fn normalizer_identities() {
        // zeta_jj collapses to the plain variance
        let p = MarkedPattern::new(
            Window::unit_square(),
            vec![(0.1, 0.1), (0.4, 0.6), (0.8, 0.3), (0.6, 0.9)],
            vec![
                comp(&[0.2, 0.3, 0.5]),
                comp(&[0.1, 0.6, 0.3]),
                comp(&[0.4, 0.4, 0.2]),
                comp(&[0.25, 0.25, 0.5]),
            ],
            None,
            None,
        )
        .unwrap();
        let zeta = normalizer(
            &TestFunctionSpec::new(
                TestFamily::HalfSquaredDiff,
                Scope::Componentwise { j: 1, l: 1 },
                TransformSpec::Clr,
            ),
            &p,
        )
        .unwrap();
        let sigma = normalizer(
            &TestFunctionSpec::new(
                TestFamily::CenteredProduct,
                Scope::Componentwise { j: 1, l: 1 },
                TransformSpec::Clr,
            ),
            &p,
        )
        .unwrap();
        assert_relative_eq!(zeta, sigma, epsilon = 1e-12);

        // the lr-weighted variance sum equals the clr variance sum
        let lr = normalizer(
            &TestFunctionSpec::new(
                TestFamily::HalfSquaredDiff,
                Scope::Compositional,
                TransformSpec::Lr,
            ),
            &p,
        )
        .unwrap();
        let clr = normalizer(
            &TestFunctionSpec::new(
                TestFamily::HalfSquaredDiff,
                Scope::Compositional,
                TransformSpec::Clr,
            ),
            &p,
        )
        .unwrap();
        assert_relative_eq!(lr, clr, epsilon = 1e-10);

        // double-sum estimator agrees with the moment product for the product family
        let spec1 = TestFunctionSpec::new(
            TestFamily::Product,
            Scope::Componentwise { j: 0, l: 1 },
            TransformSpec::Clr,
        );
        let norm = normalizer(&spec1, &p).unwrap();
        let coords = CoordinateSet::from_marks(p.marks(), &TransformSpec::Clr).unwrap();
        let n = coords.n as f64;
        let mut double_sum = 0.0;
        for i in 0..coords.n {
            for h in 0..coords.n {
                double_sum += coords.row(i)[0] * coords.row(h)[1];
            }
        }
        assert_relative_eq!(norm, double_sum / (n * n), epsilon = 1e-12);
    }

    #[test]
    fn conditional_moments_fixtures() {
        let p = two_point_pattern();
        let cfg = fixture_config();
        let m = conditional_moments_at_r(&p, &TransformSpec::IlrPivot, &cfg).unwrap();
        // symmetric two-point pattern averages the two coordinates
        let z = 0.5f64.sqrt() * 0.25f64.ln();
        let mu = m.means[1].as_ref().unwrap();
        assert_relative_eq!(mu[0], 0.5 * (z + (-z)), epsilon = 1e-12);
        assert!(m.means[0].is_none());

        // constant marks: conditional mean equals the constant and the
        // conditional center equals the mark
        let marks = vec![comp(&[0.3, 0.7]); 2];
        let pc = MarkedPattern::new(
            Window::unit_square(),
            vec![(0.2, 0.5), (0.8, 0.5)],
            marks,
            None,
            None,
        )
        .unwrap();
        let m = conditional_moments_at_r(&pc, &TransformSpec::Clr, &cfg).unwrap();
        let centers = m.centers().unwrap();
        let cen = centers[1].as_ref().unwrap();
        assert_relative_eq!(cen.parts()[0], 0.3, epsilon = 1e-12);
        assert_relative_eq!(cen.parts()[1], 0.7, epsilon = 1e-12);
    }

    #[test]
    fn k_function_reduces_to_ripley_for_constant_marks() {
        let pts = vec![
            (0.12, 0.21),
            (0.45, 0.33),
            (0.71, 0.62),
            (0.23, 0.85),
            (0.56, 0.13),
            (0.91, 0.44),
        ];
        let marks = vec![comp(&[0.3, 0.7]); pts.len()];
        let p = MarkedPattern::new(Window::unit_square(), pts.clone(), marks, None, None).unwrap();
        let cfg = EstimatorConfig::new(
            RGrid::linspace(0.05, 0.6, 24).unwrap(),
            0.05,
            Kernel::Epanechnikov,
        )
        .unwrap();
        let spec = TestFunctionSpec::new(
            TestFamily::Product,
            Scope::Componentwise { j: 0, l: 0 },
            TransformSpec::Identity,
        );
        let k = estimate_mark_weighted_k(&p, &spec, &cfg, EdgeCorrection::None).unwrap();
        // independent oracle: plain Ripley estimate
        let n = pts.len() as f64;
        for (g, &r) in cfg.rgrid.values().iter().enumerate() {
            let mut count = 0.0;
            for i in 0..pts.len() {
                for j in 0..pts.len() {
                    if i != j {
                        let d = ((pts[i].0 - pts[j].0).powi(2) + (pts[i].1 - pts[j].1).powi(2))
                            .sqrt();
                        if d <= r {
                            count += 1.0;
                        }
                    }
                }
            }
            let ripley = count / (n * (n - 1.0));
            assert_relative_eq!(k.values[g].unwrap(), ripley, epsilon = 1e-12);
        }
        // monotone in r
        let vals: Vec<f64> = k.values.iter().map(|v| v.unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] >= w[0]));
        // L transform
        let l = l_transform(&k);
        for (g, v) in l.values.iter().enumerate() {
            assert_relative_eq!(
                v.unwrap(),
                (k.values[g].unwrap() / std::f64::consts::PI).sqrt(),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn cross_reduces_to_plain_componentwise() {
        let p = MarkedPattern::new(
            Window::unit_square(),
            vec![(0.1, 0.1), (0.4, 0.6), (0.8, 0.3)],
            vec![
                comp(&[0.2, 0.3, 0.5]),
                comp(&[0.1, 0.6, 0.3]),
                comp(&[0.4, 0.4, 0.2]),
            ],
            None,
            None,
        )
        .unwrap();
        let cfg = EstimatorConfig::new(
            RGrid::linspace(0.2, 0.8, 8).unwrap(),
            0.2,
            Kernel::Epanechnikov,
        )
        .unwrap()
        .with_min_pairs(1);
        let plain = TestFunctionSpec::new(
            TestFamily::Product,
            Scope::Componentwise { j: 0, l: 1 },
            TransformSpec::Clr,
        );
        let crossed = plain.clone().with_cross(CrossSpec {
            first: MarkSet::Primary,
            second: MarkSet::Primary,
            types: None,
        });
        let a = estimate_nabla(&p, &plain, &cfg).unwrap();
        let b = estimate_cross(&p, &crossed, &cfg).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn cross_type_two_point_fixture() {
        let p = MarkedPattern::new(
            Window::unit_square(),
            vec![(0.2, 0.5), (0.8, 0.5)],
            vec![comp(&[0.2, 0.8]), comp(&[0.8, 0.2])],
            None,
            Some(vec![1, 2]),
        )
        .unwrap();
        let cfg = fixture_config();
        let spec = TestFunctionSpec::new(
            TestFamily::Product,
            Scope::Componentwise { j: 0, l: 0 },
            TransformSpec::IlrPivot,
        )
        .with_cross(CrossSpec {
            first: MarkSet::Primary,
            second: MarkSet::Primary,
            types: Some((1, 2)),
        });
        let curve = estimate_cross(&p, &spec, &cfg).unwrap();
        // exactly one admitted ordered pair: the estimate is t on that pair
        let z = 0.5f64.sqrt() * 0.25f64.ln();
        assert_relative_eq!(curve.values[1].unwrap(), z * (-z), epsilon = 1e-12);

        // empty stratum: all masked, no panic
        let spec_empty = TestFunctionSpec::new(
            TestFamily::Product,
            Scope::Componentwise { j: 0, l: 0 },
            TransformSpec::IlrPivot,
        )
        .with_cross(CrossSpec {
            first: MarkSet::Primary,
            second: MarkSet::Primary,
            types: Some((1, 9)),
        });
        let curve = estimate_cross(&p, &spec_empty, &cfg).unwrap();
        assert!(curve.is_fully_masked());
    }

    #[test]
    fn cross_requires_secondary_set_when_asked() {
        let p = two_point_pattern();
        let cfg = fixture_config();
        let spec = TestFunctionSpec::new(
            TestFamily::Product,
            Scope::Componentwise { j: 0, l: 0 },
            TransformSpec::IlrPivot,
        )
        .with_cross(CrossSpec {
            first: MarkSet::Primary,
            second: MarkSet::Secondary,
            types: None,
        });
        assert!(matches!(
            estimate_cross(&p, &spec, &cfg),
            Err(Error::MissingMarkSetB)
        ));
        let p2 = two_point_pattern()
            .with_marks_b(vec![comp(&[0.5, 0.5]), comp(&[0.6, 0.4])])
            .unwrap();
        assert!(estimate_cross(&p2, &spec, &cfg).is_ok());
    }
}
