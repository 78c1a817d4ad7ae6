use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

/// Finite subset of the integers as sorted, disjoint, non-adjacent half-open
/// intervals `[a, b)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntervalSet {
    intervals: Vec<(BigInt, BigInt)>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet { intervals: Vec::new() }
    }

    /// Normalizes arbitrary (possibly overlapping, unsorted, empty) intervals.
    pub fn new(mut raw: Vec<(BigInt, BigInt)>) -> Self {
        raw.retain(|(a, b)| a < b);
        raw.sort();
        Self::from_sorted(raw)
    }

    /// Merges intervals already sorted by start.
    fn from_sorted(raw: Vec<(BigInt, BigInt)>) -> Self {
        let mut out: Vec<(BigInt, BigInt)> = Vec::with_capacity(raw.len());
        for (a, b) in raw {
            if a >= b {
                continue;
            }
            match out.last_mut() {
                Some((_, end)) if a <= *end => {
                    if b > *end {
                        *end = b;
                    }
                }
                _ => out.push((a, b)),
            }
        }
        IntervalSet { intervals: out }
    }

    pub fn range(a: impl Into<BigInt>, b: impl Into<BigInt>) -> Self {
        Self::new(vec![(a.into(), b.into())])
    }

    pub fn singleton(a: impl Into<BigInt>) -> Self {
        let a = a.into();
        let b = &a + 1u32;
        IntervalSet { intervals: vec![(a, b)] }
    }

    pub fn from_points<I, T>(points: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<BigInt>,
    {
        Self::new(
            points
                .into_iter()
                .map(|p| {
                    let p = p.into();
                    let q = &p + 1u32;
                    (p, q)
                })
                .collect(),
        )
    }

    pub fn intervals(&self) -> &[(BigInt, BigInt)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn cardinality(&self) -> BigInt {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    pub fn min(&self) -> Option<&BigInt> {
        self.intervals.first().map(|(a, _)| a)
    }

    /// Largest element.
    pub fn max(&self) -> Option<BigInt> {
        self.intervals.last().map(|(_, b)| b - 1u32)
    }

    pub fn contains(&self, x: &BigInt) -> bool {
        let idx = self.intervals.partition_point(|(_, b)| b <= x);
        self.intervals.get(idx).is_some_and(|(a, _)| a <= x)
    }

    pub fn is_subset_of_range(&self, lo: &BigInt, hi: &BigInt) -> bool {
        match (self.intervals.first(), self.intervals.last()) {
            (Some((a, _)), Some((_, b))) => a >= lo && b <= hi,
            _ => true,
        }
    }

    /// Number of elements inside `[lo, hi)`.
    pub fn count_in_range(&self, lo: &BigInt, hi: &BigInt) -> BigInt {
        let mut total = BigInt::zero();
        let start = self.intervals.partition_point(|(_, b)| b <= lo);
        for (a, b) in &self.intervals[start..] {
            if a >= hi {
                break;
            }
            let s = a.max(lo);
            let e = b.min(hi);
            if s < e {
                total += e - s;
            }
        }
        total
    }

    pub fn shifted(&self, by: &BigInt) -> Self {
        IntervalSet {
            intervals: self.intervals.iter().map(|(a, b)| (a + by, b + by)).collect(),
        }
    }

    /// Splits into the elements `x` with `lo <= x + by < hi` and the rest,
    /// both in the original coordinates.
    pub fn split_by_window(&self, by: &BigInt, lo: &BigInt, hi: &BigInt) -> (Self, Self) {
        let lo = lo - by;
        let hi = hi - by;
        let mut inside = Vec::new();
        let mut outside = Vec::new();
        for (a, b) in &self.intervals {
            if b <= &lo || a >= &hi {
                outside.push((a.clone(), b.clone()));
                continue;
            }
            if a < &lo {
                outside.push((a.clone(), lo.clone()));
            }
            inside.push((a.max(&lo).clone(), b.min(&hi).clone()));
            if b > &hi {
                outside.push((hi.clone(), b.clone()));
            }
        }
        (IntervalSet { intervals: inside }, IntervalSet::from_sorted(outside))
    }

    /// Minkowski sum with a sorted offset list whose translates are disjoint
    /// and ordered: `self + offsets`.
    pub fn translate_by_offsets(&self, offsets: &[BigInt]) -> Self {
        let mut raw = Vec::with_capacity(self.intervals.len() * offsets.len());
        for c in offsets {
            raw.extend(self.intervals.iter().map(|(a, b)| (a + c, b + c)));
        }
        // Sorted because every copy lies strictly after the previous one.
        Self::from_sorted(raw)
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut raw = Vec::with_capacity(self.intervals.len() + other.intervals.len());
        let (mut i, mut j) = (0, 0);
        while i < self.intervals.len() || j < other.intervals.len() {
            let take_left = match (self.intervals.get(i), other.intervals.get(j)) {
                (Some(x), Some(y)) => x.0 <= y.0,
                (Some(_), None) => true,
                _ => false,
            };
            if take_left {
                raw.push(self.intervals[i].clone());
                i += 1;
            } else {
                raw.push(other.intervals[j].clone());
                j += 1;
            }
        }
        Self::from_sorted(raw)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.intervals.len() && j < other.intervals.len() {
            let (a0, b0) = &self.intervals[i];
            let (a1, b1) = &other.intervals[j];
            let s = a0.max(a1);
            let e = b0.min(b1);
            if s < e {
                out.push((s.clone(), e.clone()));
            }
            if b0 < b1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalSet { intervals: out }
    }

    pub fn difference(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        let mut j = 0;
        for (a, b) in &self.intervals {
            let mut cur = a.clone();
            while j < other.intervals.len() && other.intervals[j].1 <= cur {
                j += 1;
            }
            let mut k = j;
            while k < other.intervals.len() && &other.intervals[k].0 < b {
                let (oa, ob) = &other.intervals[k];
                if oa > &cur {
                    out.push((cur.clone(), oa.clone()));
                }
                if ob > &cur {
                    cur = ob.clone();
                }
                if &cur >= b {
                    break;
                }
                k += 1;
            }
            if &cur < b {
                out.push((cur, b.clone()));
            }
        }
        IntervalSet { intervals: out }
    }

    pub fn has_negative(&self) -> bool {
        self.min().is_some_and(Signed::is_negative)
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (a, b)) in self.intervals.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            if b - a == BigInt::from(1) {
                write!(f, "{a}")?;
            } else {
                write!(f, "[{a}, {b})")?;
            }
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn to_points(s: &IntervalSet) -> BTreeSet<i64> {
        s.intervals()
            .iter()
            .flat_map(|(a, b)| {
                let a: i64 = a.try_into().unwrap();
                let b: i64 = b.try_into().unwrap();
                a..b
            })
            .collect()
    }

    fn arb_set() -> impl Strategy<Value = (IntervalSet, BTreeSet<i64>)> {
        proptest::collection::vec((0i64..60, 0i64..6), 0..8).prop_map(|raw| {
            let set = IntervalSet::new(raw.iter().map(|&(a, l)| (BigInt::from(a), BigInt::from(a + l))).collect());
            let pts = raw.iter().flat_map(|&(a, l)| a..a + l).collect();
            (set, pts)
        })
    }

    #[test]
    fn normalization_merges_adjacent() {
        let s = IntervalSet::new(vec![
            (BigInt::from(5), BigInt::from(7)),
            (BigInt::from(0), BigInt::from(2)),
            (BigInt::from(2), BigInt::from(3)),
            (BigInt::from(6), BigInt::from(6)),
        ]);
        assert_eq!(s, IntervalSet::new(vec![(0.into(), 3.into()), (5.into(), 7.into())]));
        assert_eq!(s.intervals().len(), 2);
        assert_eq!(s.cardinality(), BigInt::from(5));
    }

    #[test]
    fn window_split() {
        let s = IntervalSet::from_points([0, 2, 5]);
        let (inside, outside) = s.split_by_window(&BigInt::from(8), &BigInt::zero(), &BigInt::from(9));
        assert_eq!(inside, IntervalSet::singleton(0));
        assert_eq!(outside, IntervalSet::from_points([2, 5]));
    }

    #[test]
    fn offsets_translate() {
        let s = IntervalSet::from_points([0, 2, 5]);
        let offsets: Vec<BigInt> = [0, 11, 23].iter().map(|&x| BigInt::from(x)).collect();
        assert_eq!(
            s.translate_by_offsets(&offsets),
            IntervalSet::from_points([0, 2, 5, 11, 13, 16, 23, 25, 28])
        );
    }

    proptest! {
        #[test]
        fn set_algebra_matches_point_sets((a, pa) in arb_set(), (b, pb) in arb_set()) {
            prop_assert_eq!(to_points(&a), pa.clone());
            prop_assert_eq!(to_points(&a.union(&b)), pa.union(&pb).copied().collect::<BTreeSet<_>>());
            prop_assert_eq!(to_points(&a.intersection(&b)), pa.intersection(&pb).copied().collect::<BTreeSet<_>>());
            prop_assert_eq!(to_points(&a.difference(&b)), pa.difference(&pb).copied().collect::<BTreeSet<_>>());
            prop_assert_eq!(a.cardinality(), BigInt::from(pa.len()));
            let lo = BigInt::from(10);
            let hi = BigInt::from(40);
            prop_assert_eq!(a.count_in_range(&lo, &hi), BigInt::from(pa.range(10..40).count()));
            for x in 0..70 {
                prop_assert_eq!(a.contains(&BigInt::from(x)), pa.contains(&x));
            }
        }

        #[test]
        fn window_split_partitions((a, pa) in arb_set(), by in -30i64..30) {
            let (inside, outside) = a.split_by_window(&BigInt::from(by), &BigInt::zero(), &BigInt::from(25));
            let expect_in: BTreeSet<i64> = pa.iter().copied().filter(|x| (0..25).contains(&(x + by))).collect();
            let expect_out: BTreeSet<i64> = pa.difference(&expect_in).copied().collect();
            prop_assert_eq!(to_points(&inside), expect_in);
            prop_assert_eq!(to_points(&outside), expect_out);
        }
    }
}
