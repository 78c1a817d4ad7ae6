//! Cylinders `[A]_n` as interval sets over tower levels, their images under
//! powers of `T`, and exact measures of intersections.

mod interval;
mod power;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::construction::TowerLevels;
use crate::rational::ExactRational;

pub use interval::IntervalSet;
pub use power::{
    apply_power, correlation, correlation_enclosure, image_under_power, intersect_measure,
    product_correlation, product_correlation_enclosure, refine, PowerImage, ProjectedPieces,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CylinderError {
    #[error("level {requested} requested but only {available} levels are materialized")]
    DepthUnavailable { requested: usize, available: usize },
    #[error("cylinder at level {level} is not contained in F_{level}")]
    OutOfRange { level: usize },
    #[error("spillover unresolved at the depth limit: resolved {resolved}, residual measure {residual}")]
    DepthExhausted {
        resolved: ExactRational,
        residual: ExactRational,
    },
    #[error("argument lists have different lengths")]
    LengthMismatch,
}

/// The cylinder `[A]_n` for `A` a subset of `F_n = [0, h_n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CylinderSet {
    pub level: usize,
    pub set: IntervalSet,
}

impl CylinderSet {
    pub fn new(level: usize, set: IntervalSet) -> Self {
        CylinderSet { level, set }
    }

    pub fn empty(level: usize) -> Self {
        CylinderSet::new(level, IntervalSet::empty())
    }

    pub fn points<I, T>(level: usize, points: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<BigInt>,
    {
        CylinderSet::new(level, IntervalSet::from_points(points))
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    /// `|A| / (r_0 ... r_{n-1})`.
    pub fn measure(&self, levels: &TowerLevels) -> ExactRational {
        ExactRational::new(self.set.cardinality(), levels.cuts_product(self.level).clone())
    }

    pub fn check(&self, levels: &TowerLevels) -> Result<(), CylinderError> {
        if self.level > levels.depth() {
            return Err(CylinderError::DepthUnavailable {
                requested: self.level,
                available: levels.depth(),
            });
        }
        if !self.set.is_subset_of_range(&BigInt::zero(), levels.h(self.level)) {
            return Err(CylinderError::OutOfRange { level: self.level });
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct CylinderLiteral {
    level: usize,
    intervals: Vec<(Endpoint, Endpoint)>,
}

#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct Endpoint(#[serde(with = "crate::rational::bigint_string")] BigInt);

impl Serialize for CylinderSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CylinderLiteral {
            level: self.level,
            intervals: self
                .set
                .intervals()
                .iter()
                .map(|(a, b)| (Endpoint(a.clone()), Endpoint(b.clone())))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CylinderSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let lit = CylinderLiteral::deserialize(d)?;
        let set = IntervalSet::new(lit.intervals.into_iter().map(|(a, b)| (a.0, b.0)).collect());
        if set.has_negative() {
            return Err(serde::de::Error::custom("cylinder endpoints must be non-negative"));
        }
        Ok(CylinderSet::new(lit.level, set))
    }
}

/// Pairwise disjoint cylinders, at most one per level, ordered by level.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PieceDecomposition {
    pieces: Vec<CylinderSet>,
}

impl PieceDecomposition {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `set` at `level`, merging with an existing piece there.
    pub fn push(&mut self, level: usize, set: IntervalSet) {
        if set.is_empty() {
            return;
        }
        match self.pieces.binary_search_by_key(&level, |p| p.level) {
            Ok(i) => self.pieces[i].set = self.pieces[i].set.union(&set),
            Err(i) => self.pieces.insert(i, CylinderSet::new(level, set)),
        }
    }

    pub fn pieces(&self) -> &[CylinderSet] {
        &self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn measure(&self, levels: &TowerLevels) -> ExactRational {
        self.pieces.iter().map(|p| p.measure(levels)).sum()
    }

    /// All pieces expressed at one common level.
    pub fn refined_to(&self, level: usize, levels: &TowerLevels) -> Result<CylinderSet, CylinderError> {
        let mut acc = IntervalSet::empty();
        for p in &self.pieces {
            acc = acc.union(&refine(p, level, levels)?.set);
        }
        Ok(CylinderSet::new(level, acc))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{build_levels, Schedule, SeqSpec};
    use crate::rational::from_int;

    #[test]
    fn literal_round_trip() {
        let c = CylinderSet::new(2, IntervalSet::new(vec![(0.into(), 3.into()), (7.into(), 8.into())]));
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(json, r#"{"level":2,"intervals":[["0","3"],["7","8"]]}"#);
        let back: CylinderSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
        let ints: CylinderSet = serde_json::from_str(r#"{"level":0,"intervals":[[0,1]]}"#).unwrap();
        assert_eq!(ints, CylinderSet::points(0, [0]));
        assert!(serde_json::from_str::<CylinderSet>(r#"{"level":0,"intervals":[["-1","1"]]}"#).is_err());
    }

    #[test]
    fn measure_and_range_check() {
        let s = Schedule::high_staircase("b", 1, SeqSpec::constant(3), SeqSpec::list([1, 2]));
        let l = build_levels(&s, 2).unwrap();
        assert_eq!(CylinderSet::points(1, [0, 2, 5]).measure(&l), from_int(1));
        assert_eq!(CylinderSet::points(1, [9]).check(&l), Err(CylinderError::OutOfRange { level: 1 }));
        assert!(matches!(
            CylinderSet::points(3, [0]).check(&l),
            Err(CylinderError::DepthUnavailable { requested: 3, available: 2 })
        ));
    }

    #[test]
    fn pieces_stay_sorted_by_level() {
        let mut p = PieceDecomposition::new();
        p.push(2, IntervalSet::singleton(4));
        p.push(0, IntervalSet::singleton(1));
        p.push(2, IntervalSet::singleton(1));
        p.push(1, IntervalSet::empty());
        let levels: Vec<usize> = p.pieces().iter().map(|c| c.level).collect();
        assert_eq!(levels, vec![0, 2]);
        assert_eq!(p.pieces()[1].set, IntervalSet::from_points([1, 4]));
    }
}
