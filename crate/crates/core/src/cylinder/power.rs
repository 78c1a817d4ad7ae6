use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::construction::TowerLevels;
use crate::rational::{Enclosure, ExactRational};

use super::{CylinderError, CylinderSet, IntervalSet, PieceDecomposition};

fn ensure_depth(level: usize, levels: &TowerLevels) -> Result<(), CylinderError> {
    if level > levels.depth() {
        Err(CylinderError::DepthUnavailable { requested: level, available: levels.depth() })
    } else {
        Ok(())
    }
}

/// Rewrites `[A]_n` at a deeper level: `A + C_{n+1} + ... + C_{to_level}`.
/// A target at or above the current level returns the input unchanged.
pub fn refine(cyl: &CylinderSet, to_level: usize, levels: &TowerLevels) -> Result<CylinderSet, CylinderError> {
    ensure_depth(to_level, levels)?;
    let mut set = cyl.set.clone();
    for k in cyl.level + 1..=to_level {
        set = set.translate_by_offsets(levels.offsets(k));
    }
    Ok(CylinderSet::new(to_level.max(cyl.level), set))
}

/// `T^m [A]_n` as resolved pieces plus the part of `A` still spilling out of
/// the tower at the depth limit (in source coordinates at that level).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerImage {
    pub pieces: PieceDecomposition,
    pub residual: Option<CylinderSet>,
}

impl PowerImage {
    pub fn is_resolved(&self) -> bool {
        self.residual.is_none()
    }

    pub fn resolved_measure(&self, levels: &TowerLevels) -> ExactRational {
        self.pieces.measure(levels)
    }

    pub fn residual_measure(&self, levels: &TowerLevels) -> ExactRational {
        self.residual.as_ref().map_or_else(ExactRational::zero, |r| r.measure(levels))
    }

    /// Enclosure of `mu(T^m A cap B)`: resolved overlap below, plus the
    /// residual mass (capped by `mu(B)`) above.
    pub fn intersection(&self, b: &CylinderSet, levels: &TowerLevels) -> Result<Enclosure, CylinderError> {
        let proj = self.project(b.level, levels)?;
        Ok(self.intersection_projected(&proj, b, levels))
    }

    pub fn project(&self, level: usize, levels: &TowerLevels) -> Result<ProjectedPieces, CylinderError> {
        ProjectedPieces::new(&self.pieces, level, levels)
    }

    /// As [`PowerImage::intersection`], reusing a projection of the pieces to
    /// `b`'s level.
    pub fn intersection_projected(&self, proj: &ProjectedPieces, b: &CylinderSet, levels: &TowerLevels) -> Enclosure {
        let lower = proj.measure_with(b, levels);
        if self.residual.is_none() {
            return Enclosure::exact(lower);
        }
        let upper = (&lower + self.residual_measure(levels)).min(b.measure(levels));
        Enclosure::new(lower, upper)
    }
}

/// Image of `[A]_n` under `T^m`. Points with `a + m` inside `F_k` are emitted
/// as `[a + m]_k`; the rest are refined one level and retried, down to
/// `max_depth` (clamped below by the cylinder's own level).
pub fn image_under_power(
    m: impl Into<BigInt>,
    cyl: &CylinderSet,
    levels: &TowerLevels,
    max_depth: usize,
) -> Result<PowerImage, CylinderError> {
    let m = m.into();
    cyl.check(levels)?;
    let max_depth = max_depth.max(cyl.level);
    ensure_depth(max_depth, levels)?;
    let zero = BigInt::zero();
    let mut pieces = PieceDecomposition::new();
    let mut pending = cyl.set.clone();
    let mut level = cyl.level;
    loop {
        let (inside, outside) = pending.split_by_window(&m, &zero, levels.h(level));
        pieces.push(level, inside.shifted(&m));
        if outside.is_empty() {
            return Ok(PowerImage { pieces, residual: None });
        }
        if level == max_depth {
            return Ok(PowerImage { pieces, residual: Some(CylinderSet::new(level, outside)) });
        }
        level += 1;
        pending = outside.translate_by_offsets(levels.offsets(level));
    }
}

/// Strict form of [`image_under_power`]: any residual is an error.
pub fn apply_power(
    m: impl Into<BigInt>,
    cyl: &CylinderSet,
    levels: &TowerLevels,
    max_depth: usize,
) -> Result<PieceDecomposition, CylinderError> {
    let img = image_under_power(m, cyl, levels, max_depth)?;
    match img.residual {
        None => Ok(img.pieces),
        Some(ref r) => Err(CylinderError::DepthExhausted {
            resolved: img.resolved_measure(levels),
            residual: r.measure(levels),
        }),
    }
}

/// Number of points of `deep` (a subset of `F_from`) lying in the
/// refinement of `shallow` (a subset of `F_to`, `to <= from`).
///
/// Works by projecting `deep` down through the copies of `C_k` instead of
/// refining `shallow` upward. Whole copies are counted in bulk.
fn overlap_count(
    deep: &IntervalSet,
    from: usize,
    shallow: &IntervalSet,
    to: usize,
    levels: &TowerLevels,
) -> BigInt {
    if shallow.is_empty() || deep.is_empty() {
        return BigInt::zero();
    }
    let base = shallow.cardinality();
    let mut total = BigInt::zero();
    let mut current: Vec<(BigInt, BigInt)> = deep.intervals().to_vec();
    for k in (to + 1..=from).rev() {
        let offsets = levels.offsets(k);
        let h = levels.h(k - 1);
        let mut whole = BigInt::zero();
        let mut next = Vec::with_capacity(current.len() * 2);
        for (a, b) in &current {
            let first = offsets.partition_point(|c| c + h <= *a);
            let end = offsets.partition_point(|c| c < b);
            if first >= end {
                continue;
            }
            let boundary = if end - first == 1 { vec![first] } else { vec![first, end - 1] };
            if end - first > 2 {
                whole += end - first - 2;
            }
            for i in boundary {
                let c = &offsets[i];
                let lo = a - c;
                let hi = b - c;
                let lo = if lo.is_negative() { BigInt::zero() } else { lo };
                let hi = if &hi > h { h.clone() } else { hi };
                if lo.is_zero() && &hi == h {
                    whole += 1u32;
                } else {
                    next.push((lo, hi));
                }
            }
        }
        if !whole.is_zero() {
            let per_copy = &base * levels.cuts_product(k - 1) / levels.cuts_product(to);
            total += whole * per_copy;
        }
        current = next;
    }
    for (a, b) in &current {
        total += shallow.count_in_range(a, b);
    }
    total
}

/// Weighted multiset of intervals: `(a, b, w)` counts each point of `[a, b)`
/// `w` times. Identical intervals are combined and touching intervals of equal
/// weight are merged.
fn normalize(items: Vec<(BigInt, BigInt, BigInt)>) -> Vec<(BigInt, BigInt, BigInt)> {
    let mut summed: BTreeMap<(BigInt, BigInt), BigInt> = BTreeMap::new();
    for (a, b, w) in items {
        *summed.entry((a, b)).or_insert_with(BigInt::zero) += w;
    }
    let mut by_weight: BTreeMap<BigInt, Vec<(BigInt, BigInt)>> = BTreeMap::new();
    for ((a, b), w) in summed {
        by_weight.entry(w).or_default().push((a, b));
    }
    let mut out = Vec::new();
    for (w, runs) in by_weight {
        let mut merged: Vec<(BigInt, BigInt)> = Vec::with_capacity(runs.len());
        for (a, b) in runs {
            match merged.last_mut() {
                Some((_, end)) if *end == a => *end = b,
                _ => merged.push((a, b)),
            }
        }
        out.extend(merged.into_iter().map(|(a, b)| (a, b, w.clone())));
    }
    out
}

/// Pieces pushed down to one level by forgetting the deeper coordinates,
/// ready to be intersected with any cylinder at that level.
#[derive(Clone, Debug)]
pub struct ProjectedPieces {
    level: usize,
    /// `r_0 ... r_{D-1}` for the deepest piece level `D`.
    denom: BigInt,
    weighted: Vec<(BigInt, BigInt, BigInt)>,
    /// Whole copies of lower towers met on the way, in units of `|B|`.
    whole: BigInt,
    shallow: Vec<CylinderSet>,
}

impl ProjectedPieces {
    pub fn new(pieces: &PieceDecomposition, level: usize, levels: &TowerLevels) -> Result<Self, CylinderError> {
        ensure_depth(level, levels)?;
        let deepest = pieces.pieces().last().map_or(level, |p| p.level.max(level));
        ensure_depth(deepest, levels)?;
        let denom = levels.cuts_product(deepest).clone();
        let shallow = pieces.pieces().iter().filter(|p| p.level < level).cloned().collect();
        let mut deep = pieces.pieces().iter().rev().filter(|p| p.level >= level).peekable();
        let mut current: Vec<(BigInt, BigInt, BigInt)> = Vec::new();
        let mut whole = BigInt::zero();
        for k in (level..=deepest).rev() {
            if let Some(p) = deep.next_if(|p| p.level == k) {
                let w = &denom / levels.cuts_product(k);
                current.extend(p.set.intervals().iter().map(|(a, b)| (a.clone(), b.clone(), w.clone())));
                current = normalize(current);
            }
            if k == level {
                break;
            }
            let offsets = levels.offsets(k);
            let h = levels.h(k - 1);
            let per_copy = levels.cuts_product(k - 1) / levels.cuts_product(level);
            let mut next = Vec::with_capacity(current.len() * 2);
            for (a, b, w) in &current {
                let first = offsets.partition_point(|c| c + h <= *a);
                let end = offsets.partition_point(|c| c < b);
                if first >= end {
                    continue;
                }
                if end - first > 2 {
                    whole += w * (end - first - 2) * &per_copy;
                }
                let boundary = if end - first == 1 { vec![first] } else { vec![first, end - 1] };
                for i in boundary {
                    let c = &offsets[i];
                    let lo = a - c;
                    let hi = b - c;
                    let lo = if lo.is_negative() { BigInt::zero() } else { lo };
                    let hi = if &hi > h { h.clone() } else { hi };
                    if lo.is_zero() && &hi == h {
                        whole += w * &per_copy;
                    } else {
                        next.push((lo, hi, w.clone()));
                    }
                }
            }
            current = normalize(next);
        }
        Ok(ProjectedPieces { level, denom, weighted: current, whole, shallow })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// `mu(pieces cap [B])` for `B` at the projection level.
    pub fn measure_with(&self, b: &CylinderSet, levels: &TowerLevels) -> ExactRational {
        assert_eq!(b.level, self.level, "projection level mismatch");
        let mut count = &self.whole * b.set.cardinality();
        for (a, e, w) in &self.weighted {
            let c = b.set.count_in_range(a, e);
            if !c.is_zero() {
                count += c * w;
            }
        }
        let mut total = ExactRational::new(count, self.denom.clone());
        for p in &self.shallow {
            let c = overlap_count(&b.set, b.level, &p.set, p.level, levels);
            if !c.is_zero() {
                total += ExactRational::new(c, levels.cuts_product(b.level).clone());
            }
        }
        total
    }
}

/// `mu(P cap [B])` for a piece decomposition `P`. Deeper pieces are projected
/// down to `B`'s level; shallower ones meet the projection of `B`.
pub fn intersect_measure(
    a: &PieceDecomposition,
    b: &CylinderSet,
    levels: &TowerLevels,
) -> Result<ExactRational, CylinderError> {
    ensure_depth(b.level, levels)?;
    Ok(ProjectedPieces::new(a, b.level, levels)?.measure_with(b, levels))
}

/// Enclosure of `mu(T^m A cap B)`. Negative powers use
/// `mu(T^m A cap B) = mu(A cap T^{-m} B)`, since along negative powers the
/// bottom copy never leaves the spillover.
pub fn correlation_enclosure(
    m: impl Into<BigInt>,
    a: &CylinderSet,
    b: &CylinderSet,
    levels: &TowerLevels,
    max_depth: usize,
) -> Result<Enclosure, CylinderError> {
    let m = m.into();
    if m.is_negative() {
        return correlation_enclosure(-m, b, a, levels, max_depth);
    }
    b.check(levels)?;
    let img = image_under_power(m, a, levels, max_depth)?;
    let e = img.intersection(b, levels)?;
    let cap = a.measure(levels);
    if e.upper > cap {
        return Ok(Enclosure::new(e.lower.clone().min(cap.clone()), cap));
    }
    Ok(e)
}

/// `mu(T^m A cap B)` exactly, or `DepthExhausted` with the resolved lower
/// bound and the unresolved residual measure.
pub fn correlation(
    m: impl Into<BigInt>,
    a: &CylinderSet,
    b: &CylinderSet,
    levels: &TowerLevels,
    max_depth: usize,
) -> Result<ExactRational, CylinderError> {
    let e = correlation_enclosure(m, a, b, levels, max_depth)?;
    exact_or_exhausted(e)
}

pub(crate) fn exact_or_exhausted(e: Enclosure) -> Result<ExactRational, CylinderError> {
    if e.is_exact() {
        Ok(e.lower)
    } else {
        let residual = e.width();
        Err(CylinderError::DepthExhausted { resolved: e.lower, residual })
    }
}

/// `prod_i mu(T^{n_i m} A_i cap B_i)`: the correlation of
/// `T^{n_1} x ... x T^{n_d}` on product cylinders.
pub fn product_correlation_enclosure(
    powers: &[i64],
    m: impl Into<BigInt>,
    a: &[CylinderSet],
    b: &[CylinderSet],
    levels: &TowerLevels,
    max_depth: usize,
) -> Result<Enclosure, CylinderError> {
    if powers.is_empty() || powers.len() != a.len() || a.len() != b.len() {
        return Err(CylinderError::LengthMismatch);
    }
    let m = m.into();
    let mut acc = Enclosure::exact(ExactRational::from_integer(1.into()));
    for ((p, ai), bi) in powers.iter().zip(a).zip(b) {
        let e = correlation_enclosure(&m * p, ai, bi, levels, max_depth)?;
        // both factors are non-negative
        acc = Enclosure::new(&acc.lower * &e.lower, &acc.upper * &e.upper);
    }
    Ok(acc)
}

pub fn product_correlation(
    powers: &[i64],
    m: impl Into<BigInt>,
    a: &[CylinderSet],
    b: &[CylinderSet],
    levels: &TowerLevels,
    max_depth: usize,
) -> Result<ExactRational, CylinderError> {
    exact_or_exhausted(product_correlation_enclosure(powers, m, a, b, levels, max_depth)?)
}
