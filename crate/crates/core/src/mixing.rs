//! Finite-stage checks of mixing behaviour: correlation scans over the
//! intervals `[h_n, 2H_n)`, Cesàro norms, the averaging inequality and
//! discrepancies against weak-limit targets.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::construction::TowerLevels;
use crate::cylinder::{
    correlation_enclosure, image_under_power, CylinderError, CylinderSet, IntervalSet, PowerImage,
    ProjectedPieces,
};
use crate::rational::{as_record, bigint_string, from_int, ratio, sqrt_enclosure, Enclosure, ExactRational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MixingError {
    #[error(transparent)]
    Cylinder(#[from] CylinderError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type TestPair = (CylinderSet, CylinderSet);

/// Every pair of singleton cylinders `{f}, {g}` with `f, g` in `F_1`
/// (or `F_0` when only stage 0 is materialized).
pub fn canonical_test_set(levels: &TowerLevels) -> Vec<TestPair> {
    let level = levels.depth().min(1);
    let h = levels.h(level).to_u64().expect("h_1 fits in u64");
    let singles: Vec<CylinderSet> = (0..h).map(|f| CylinderSet::points(level, [f])).collect();
    singles
        .iter()
        .flat_map(|a| singles.iter().map(move |b| (a.clone(), b.clone())))
        .collect()
}

/// Deterministic times in `[h_n, 2H_n)`: both ends, `H_n`, and an even grid
/// of `samples` points. Short intervals are listed in full.
pub fn sample_times(levels: &TowerLevels, stage: usize, samples: usize) -> Vec<BigInt> {
    let lo = levels.h(stage).clone();
    let hi = levels.big_h(stage) * 2u32;
    let len = &hi - &lo;
    if len <= BigInt::from(samples.max(3)) {
        return num_iter(&lo, &hi);
    }
    let mut times = vec![lo.clone(), levels.big_h(stage).clone(), &hi - 1u32];
    for i in 0..samples {
        times.push(&lo + &len * i / samples);
    }
    times.sort();
    times.dedup();
    times
}

fn num_iter(lo: &BigInt, hi: &BigInt) -> Vec<BigInt> {
    let mut out = Vec::new();
    let mut t = lo.clone();
    while &t < hi {
        out.push(t.clone());
        t += 1u32;
    }
    out
}

/// Correlations `mu(T^m A cap B)` for one time over many pairs, reusing the
/// image of each distinct `A`.
fn correlations_at(
    m: &BigInt,
    tests: &[TestPair],
    levels: &TowerLevels,
    max_depth: usize,
) -> Result<Vec<Enclosure>, CylinderError> {
    if m.is_negative() {
        let swapped: Vec<TestPair> = tests.iter().map(|(a, b)| (b.clone(), a.clone())).collect();
        return correlations_at(&-m, &swapped, levels, max_depth);
    }
    let mut images: BTreeMap<&CylinderSet, PowerImage> = BTreeMap::new();
    let mut projections: BTreeMap<(&CylinderSet, usize), ProjectedPieces> = BTreeMap::new();
    let mut out = Vec::with_capacity(tests.len());
    for (a, b) in tests {
        b.check(levels)?;
        if !images.contains_key(a) {
            images.insert(a, image_under_power(m.clone(), a, levels, max_depth)?);
        }
        let img = &images[a];
        if !projections.contains_key(&(a, b.level)) {
            projections.insert((a, b.level), img.project(b.level, levels)?);
        }
        let e = img.intersection_projected(&projections[&(a, b.level)], b, levels);
        let cap = a.measure(levels);
        out.push(if e.upper > cap { Enclosure::new(e.lower.min(cap.clone()), cap) } else { e });
    }
    Ok(out)
}

fn max_enclosure(values: &[Enclosure]) -> Enclosure {
    values.iter().fold(Enclosure::zero(), |acc, e| acc.max(e))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageRecord {
    pub stage: usize,
    #[serde(with = "bigint_string")]
    pub interval_start: BigInt,
    #[serde(with = "bigint_string")]
    pub interval_end: BigInt,
    #[serde(with = "bigint_string::vec")]
    pub times: Vec<BigInt>,
    /// Maximum over the test set at each time.
    pub values: Vec<Enclosure>,
    pub max: Enclosure,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayReport {
    pub power: i64,
    pub test_sets: String,
    pub test_pairs: usize,
    pub records: Vec<StageRecord>,
}

impl DecayReport {
    pub fn is_exact(&self) -> bool {
        self.records.iter().all(|r| r.values.iter().all(Enclosure::is_exact))
    }

    pub fn stage_max(&self, stage: usize) -> Option<&Enclosure> {
        self.records.iter().find(|r| r.stage == stage).map(|r| &r.max)
    }
}

/// For each stage, evaluates `mu(T^{j m} A cap B)` at the sampled times `m`
/// and keeps the per-time maximum over the test pairs. An empty test set
/// yields no records.
pub fn scan_mixing_intervals(
    levels: &TowerLevels,
    tests: &[TestPair],
    test_label: &str,
    stages: RangeInclusive<usize>,
    samples: usize,
    power: i64,
    max_depth: usize,
) -> Result<DecayReport, MixingError> {
    if power == 0 {
        return Err(MixingError::InvalidArgument("power must be non-zero".into()));
    }
    if *stages.end() > levels.depth() {
        return Err(CylinderError::DepthUnavailable { requested: *stages.end(), available: levels.depth() }.into());
    }
    let mut records = Vec::new();
    for stage in stages.filter(|_| !tests.is_empty()) {
        let times = sample_times(levels, stage, samples);
        let values = times
            .par_iter()
            .map(|m| correlations_at(&(m * power), tests, levels, max_depth).map(|v| max_enclosure(&v)))
            .collect::<Result<Vec<_>, _>>()?;
        records.push(StageRecord {
            stage,
            interval_start: levels.h(stage).clone(),
            interval_end: levels.big_h(stage) * 2u32,
            max: max_enclosure(&values),
            times,
            values,
        });
    }
    Ok(DecayReport { power, test_sets: test_label.to_string(), test_pairs: tests.len(), records })
}

/// Autocorrelations `mu(T^q B cap B)` for `q = 0..=max_lag`.
pub fn autocorrelations(
    b: &CylinderSet,
    max_lag: usize,
    levels: &TowerLevels,
    max_depth: usize,
) -> Result<Vec<Enclosure>, CylinderError> {
    (0..=max_lag)
        .into_par_iter()
        .map(|q| correlation_enclosure(BigInt::from(q), b, b, levels, max_depth))
        .collect()
}

/// `‖(1/l) Σ_{i<l} U^{-ik} 1_B‖² = μ(B)/l + (2/l²) Σ_{p=1}^{l-1} (l-p) c(pk)`
/// where `c` is the autocorrelation (an even function of the lag).
fn cesaro_from(mu_b: &ExactRational, k: usize, l: usize, autocorr: &[Enclosure]) -> Enclosure {
    let l_q = from_int(l);
    let mut acc = Enclosure::exact(mu_b / &l_q);
    let scale = ratio(2, l * l);
    for p in 1..l {
        let weight = &scale * from_int(l - p);
        acc = acc.add(&autocorr[p * k].scale(&weight));
    }
    acc
}

/// Squared norm of the Cesàro average along multiples of `k`, as an enclosure.
pub fn cesaro_norm_enclosure(
    k: i64,
    l: usize,
    b: &CylinderSet,
    levels: &TowerLevels,
    max_depth: usize,
) -> Result<Enclosure, MixingError> {
    if l == 0 {
        return Err(MixingError::InvalidArgument("l must be at least 1".into()));
    }
    let k = k.unsigned_abs() as usize;
    let auto = if l == 1 { Vec::new() } else { autocorrelations(b, (l - 1) * k, levels, max_depth)? };
    b.check(levels)?;
    Ok(cesaro_from(&b.measure(levels), k, l, &auto))
}

pub fn cesaro_norm(
    k: i64,
    l: usize,
    b: &CylinderSet,
    levels: &TowerLevels,
    max_depth: usize,
) -> Result<ExactRational, MixingError> {
    let e = cesaro_norm_enclosure(k, l, b, levels, max_depth)?;
    if e.is_exact() {
        Ok(e.lower)
    } else {
        Err(CylinderError::DepthExhausted { resolved: e.lower.clone(), residual: e.width() }.into())
    }
}

/// Both sides of
/// `‖(1/R)Σ_{i<R} U^{-i}1_B‖ ≤ ‖(1/L)Σ_{i<L} U^{-ir}1_B‖ + (rL/R)√μ(B)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityReport {
    #[serde(rename = "R")]
    pub big_r: usize,
    #[serde(rename = "L")]
    pub big_l: usize,
    pub r: usize,
    pub lhs: Enclosure,
    pub rhs: Enclosure,
    /// Decided on the safe side: `lhs.upper <= rhs.lower`.
    pub holds: bool,
}

fn sqrt_of(e: &Enclosure, bits: u32) -> Enclosure {
    let (lo, _) = sqrt_enclosure(&e.lower.clone().max(ExactRational::zero()), bits);
    let (_, hi) = sqrt_enclosure(&e.upper.clone().max(ExactRational::zero()), bits);
    Enclosure::new(lo, hi)
}

/// Evaluates the inequality from a precomputed autocorrelation sequence of
/// length at least `max(R - 1, (L - 1) r) + 1`.
pub fn averaging_inequality_from_sequence(
    big_r: usize,
    big_l: usize,
    r: usize,
    mu_b: &ExactRational,
    autocorr: &[Enclosure],
    bits: u32,
) -> Result<InequalityReport, MixingError> {
    if big_r == 0 || big_l == 0 || r == 0 {
        return Err(MixingError::InvalidArgument("R, L and r must be positive".into()));
    }
    let needed = (big_r - 1).max((big_l - 1) * r);
    if autocorr.len() <= needed {
        return Err(MixingError::InvalidArgument(format!("autocorrelation needed up to lag {needed}")));
    }
    let lhs = sqrt_of(&cesaro_from(mu_b, 1, big_r, autocorr), bits);
    let first = sqrt_of(&cesaro_from(mu_b, r, big_l, autocorr), bits);
    let root_mu = sqrt_of(&Enclosure::exact(mu_b.clone()), bits);
    let rhs = first.add(&root_mu.scale(&ratio(r * big_l, big_r)));
    let holds = lhs.upper <= rhs.lower;
    Ok(InequalityReport { big_r, big_l, r, lhs, rhs, holds })
}

pub fn check_averaging_inequality(
    big_r: usize,
    big_l: usize,
    r: usize,
    b: &CylinderSet,
    levels: &TowerLevels,
    max_depth: usize,
    bits: u32,
) -> Result<InequalityReport, MixingError> {
    b.check(levels)?;
    let lag = big_r.max(1).saturating_sub(1).max(big_l.saturating_sub(1) * r);
    let auto = autocorrelations(b, lag, levels, max_depth)?;
    averaging_inequality_from_sequence(big_r, big_l, r, &b.measure(levels), &auto, bits)
}

/// Finite operator polynomial `Σ_j α_j U^{-j}` with `j >= -1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct WeakLimitTarget {
    #[serde(serialize_with = "serialize_coefficients")]
    coefficients: BTreeMap<i64, ExactRational>,
}

fn serialize_coefficients<S: serde::Serializer>(
    c: &BTreeMap<i64, ExactRational>,
    s: S,
) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(c.len()))?;
    for (j, a) in c {
        map.serialize_entry(&j.to_string(), &crate::rational::RationalRecord::new(a, false))?;
    }
    map.end()
}

impl WeakLimitTarget {
    pub fn new(coefficients: BTreeMap<i64, ExactRational>) -> Result<Self, MixingError> {
        if coefficients.keys().any(|&j| j < -1) {
            return Err(MixingError::InvalidArgument("target exponents must be >= -1".into()));
        }
        Ok(WeakLimitTarget { coefficients: coefficients.into_iter().filter(|(_, a)| !a.is_zero()).collect() })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn identity() -> Self {
        Self::term(0, from_int(1))
    }

    /// `α U^{-j}`.
    pub fn term(j: i64, alpha: ExactRational) -> Self {
        Self::new(BTreeMap::from([(j, alpha)])).expect("valid exponent")
    }

    /// `P_q = (1/(q+1)) Σ_{j=0}^{q} U^{-j}`.
    pub fn averaging(q: usize) -> Self {
        let w = ratio(1, q + 1);
        Self::new((0..=q as i64).map(|j| (j, w.clone())).collect()).expect("valid exponents")
    }

    pub fn coefficients(&self) -> &BTreeMap<i64, ExactRational> {
        &self.coefficients
    }

    /// `Σ_j α_j μ(T^{-j} A cap B)`.
    pub fn evaluate(
        &self,
        a: &CylinderSet,
        b: &CylinderSet,
        levels: &TowerLevels,
        max_depth: usize,
    ) -> Result<Enclosure, CylinderError> {
        let mut acc = Enclosure::zero();
        for (j, alpha) in &self.coefficients {
            let c = correlation_enclosure(BigInt::from(-j), a, b, levels, max_depth)?;
            acc = acc.add(&c.scale(alpha));
        }
        Ok(acc)
    }
}

/// Whether every test set sits in `[r_k, h_k - z_k - r_k)` at its level `k`,
/// away from the bottom and top levels that the limit argument discards.
pub fn in_proof_window(tests: &[TestPair], levels: &TowerLevels) -> bool {
    let inside = |c: &CylinderSet| {
        let k = c.level;
        let lo = BigInt::from(levels.r(k));
        let hi = levels.h(k) - levels.z(k) - BigInt::from(levels.r(k));
        c.set.is_subset_of_range(&lo, &hi)
    };
    tests.iter().all(|(a, b)| inside(a) && inside(b))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeakLimitReport {
    pub target: WeakLimitTarget,
    #[serde(with = "bigint_string::vec")]
    pub times: Vec<BigInt>,
    /// `sup_{(A,B)} |<U^m 1_A, 1_B> - Σ_j α_j <U^{-j} 1_A, 1_B>|` per time.
    pub discrepancies: Vec<Enclosure>,
    pub in_proof_window: bool,
}

pub fn weak_limit_discrepancy(
    times: &[BigInt],
    target: &WeakLimitTarget,
    tests: &[TestPair],
    levels: &TowerLevels,
    max_depth: usize,
) -> Result<WeakLimitReport, MixingError> {
    let targets = tests
        .par_iter()
        .map(|(a, b)| target.evaluate(a, b, levels, max_depth))
        .collect::<Result<Vec<_>, _>>()?;
    let discrepancies = times
        .par_iter()
        .map(|m| {
            let values = correlations_at(m, tests, levels, max_depth)?;
            let diffs: Vec<Enclosure> = values.iter().zip(&targets).map(|(v, t)| v.sub(t).abs()).collect();
            Ok(max_enclosure(&diffs))
        })
        .collect::<Result<Vec<_>, CylinderError>>()?;
    Ok(WeakLimitReport {
        target: target.clone(),
        times: times.to_vec(),
        discrepancies,
        in_proof_window: in_proof_window(tests, levels),
    })
}

/// Contribution of one subtower of stage `k` to `<U^{H_k} 1_[A]_k, 1_[B]_k>`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubtowerTerm {
    pub index: usize,
    /// `c(i+1) - c(i) - H_k`: `T^{H_k}` carries copy `i` onto copy `i+1`
    /// moved down by this amount. Absent for the top copy.
    #[serde(with = "opt_bigint", skip_serializing_if = "Option::is_none")]
    pub shift: Option<BigInt>,
    /// `mu(T^{H_k}[A + c(i)]_{k+1} cap [B]_k)` from the image machinery.
    pub direct: Enclosure,
    /// `|(A - shift) cap B| / (r_k r_0 ... r_{k-1})`, from the offsets alone.
    #[serde(with = "opt_record", skip_serializing_if = "Option::is_none")]
    pub predicted: Option<ExactRational>,
}

mod opt_bigint {
    use num_bigint::BigInt;
    pub fn serialize<S: serde::Serializer>(v: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => s.serialize_str(&x.to_string()),
            None => s.serialize_none(),
        }
    }
}

mod opt_record {
    use crate::rational::{ExactRational, RationalRecord};
    use serde::Serialize;
    pub fn serialize<S: serde::Serializer>(v: &Option<ExactRational>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref().map(|q| RationalRecord::new(q, false)).serialize(s)
    }
}

/// Subtowers sharing a shift `s`, with the coefficient `count / r_k` that
/// multiplies `<U^{-s} 1_A, 1_B>` in the limit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftGroup {
    pub shift: i64,
    pub count: usize,
    #[serde(with = "as_record")]
    pub coefficient: ExactRational,
    /// Sum of the predicted terms of the group.
    #[serde(with = "as_record")]
    pub predicted: ExactRational,
    /// `<U^{-s} 1_A, 1_B> = mu(T^{-s} A cap B)`.
    pub inner_product: Enclosure,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeakLimitDecomposition {
    pub stage: usize,
    #[serde(with = "bigint_string")]
    pub time: BigInt,
    /// `mu(T^{H_k} A cap B)`.
    pub total: Enclosure,
    pub terms: Vec<SubtowerTerm>,
    pub groups: Vec<ShiftGroup>,
    /// The top copy's contribution: `total` minus the handled subtowers.
    pub remainder: Enclosure,
}

impl WeakLimitDecomposition {
    /// Total equals the sum of direct terms, and every direct term below the
    /// top copy equals its prediction.
    pub fn is_consistent(&self) -> bool {
        let sum = self.terms.iter().fold(Enclosure::zero(), |acc, t| acc.add(&t.direct));
        let summed = sum.is_exact() && self.total.is_exact() && sum == self.total;
        summed
            && self
                .terms
                .iter()
                .all(|t| t.predicted.as_ref().is_none_or(|p| t.direct.value() == Some(p)))
    }

    pub fn coefficient(&self, shift: i64) -> ExactRational {
        self.groups
            .iter()
            .find(|g| g.shift == shift)
            .map_or_else(ExactRational::zero, |g| g.coefficient.clone())
    }
}

/// Splits `<U^{H_k} 1_[A]_k, 1_[B]_k>` over the `r_k` subtowers of stage `k`.
pub fn weak_limit_decomposition(
    stage: usize,
    a: &CylinderSet,
    b: &CylinderSet,
    levels: &TowerLevels,
    max_depth: usize,
) -> Result<WeakLimitDecomposition, MixingError> {
    if a.level != stage || b.level != stage {
        return Err(MixingError::InvalidArgument(format!("test sets must live at level {stage}")));
    }
    if stage + 1 > levels.depth() {
        return Err(CylinderError::DepthUnavailable { requested: stage + 1, available: levels.depth() }.into());
    }
    a.check(levels)?;
    b.check(levels)?;
    let time = levels.big_h(stage).clone();
    let offsets = levels.offsets(stage + 1);
    let r = offsets.len();
    let weight = ExactRational::new(BigInt::one(), levels.cuts_product(stage + 1).clone());
    let h = levels.h(stage);

    let mut terms = Vec::with_capacity(r);
    for (i, c) in offsets.iter().enumerate() {
        let copy = CylinderSet::new(stage + 1, a.set.shifted(c));
        let direct = correlation_enclosure(time.clone(), &copy, b, levels, max_depth)?;
        let shift = offsets.get(i + 1).map(|next| next - c - &time);
        let predicted = shift.as_ref().filter(|s| !s.is_negative()).map(|s| {
            let moved = a.set.shifted(&-s).intersection(&IntervalSet::range(0, h.clone()));
            ExactRational::from_integer(moved.intersection(&b.set).cardinality()) * &weight
        });
        terms.push(SubtowerTerm { index: i, shift, direct, predicted });
    }
    let total = correlation_enclosure(time.clone(), a, b, levels, max_depth)?;

    let mut by_shift: BTreeMap<i64, (usize, ExactRational)> = BTreeMap::new();
    for t in &terms {
        if let (Some(s), Some(p)) = (&t.shift, &t.predicted) {
            let s = s.to_i64().ok_or_else(|| MixingError::InvalidArgument("shift out of range".into()))?;
            let entry = by_shift.entry(s).or_insert((0, ExactRational::zero()));
            entry.0 += 1;
            entry.1 += p;
        }
    }
    let mut groups = Vec::with_capacity(by_shift.len());
    for (shift, (count, predicted)) in by_shift {
        groups.push(ShiftGroup {
            shift,
            count,
            coefficient: ratio(count, r),
            predicted,
            inner_product: correlation_enclosure(BigInt::from(-shift), a, b, levels, max_depth)?,
        });
    }
    let handled = terms
        .iter()
        .filter(|t| t.predicted.is_some())
        .fold(Enclosure::zero(), |acc, t| acc.add(&t.direct));
    let remainder = total.sub(&handled);
    Ok(WeakLimitDecomposition { stage, time, total, terms, groups, remainder })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{build_levels, Schedule, SeqSpec};

    fn schedule(depth: usize) -> TowerLevels {
        let s = Schedule::high_staircase("b", 1, SeqSpec::constant(3), SeqSpec::constant(1));
        build_levels(&s, depth).unwrap()
    }

    fn zero() -> CylinderSet {
        CylinderSet::points(0, [0])
    }

    #[test]
    fn stage_zero_scan() {
        let l = schedule(6);
        assert_eq!(sample_times(&l, 0, 16), vec![BigInt::from(1), BigInt::from(2), BigInt::from(3)]);
        let rep = scan_mixing_intervals(&l, &[(zero(), zero())], "zero", 0..=0, 16, 1, 6).unwrap();
        let vals: Vec<_> = rep.records[0].values.iter().map(|e| e.value().unwrap().clone()).collect();
        assert_eq!(vals, vec![from_int(0), ratio(1, 3), ratio(1, 3)]);

        let empty = (CylinderSet::empty(0), CylinderSet::empty(0));
        let rep = scan_mixing_intervals(&l, &[empty], "empty", 0..=1, 4, 1, 6).unwrap();
        assert!(rep.records.iter().all(|r| r.max.value().is_some_and(Zero::is_zero)));
        assert!(scan_mixing_intervals(&l, &[], "none", 0..=0, 4, 0, 6).is_err());
    }

    #[test]
    fn sampled_times_stay_in_interval() {
        let l = schedule(5);
        for n in 0..=4 {
            let t = sample_times(&l, n, 10);
            assert!(t.windows(2).all(|w| w[0] < w[1]));
            assert!(t.iter().all(|m| m >= l.h(n) && *m < l.big_h(n) * 2u32));
            assert!(t.contains(l.big_h(n)));
        }
    }

    #[test]
    fn cesaro_examples() {
        let l = schedule(4);
        assert_eq!(cesaro_norm(1, 1, &zero(), &l, 4).unwrap(), from_int(1));
        assert_eq!(cesaro_norm(1, 2, &zero(), &l, 4).unwrap(), ratio(1, 2));
        assert_eq!(cesaro_norm(2, 2, &zero(), &l, 4).unwrap(), ratio(2, 3));
    }

    #[test]
    fn inequality_examples() {
        let l = schedule(6);
        let rep = check_averaging_inequality(6, 2, 2, &zero(), &l, 6, 64).unwrap();
        assert!(rep.holds);
        let same = check_averaging_inequality(4, 4, 1, &zero(), &l, 6, 64).unwrap();
        assert!(same.holds);
        let empty = check_averaging_inequality(5, 3, 2, &CylinderSet::empty(0), &l, 6, 64).unwrap();
        assert!(empty.holds && empty.lhs.value().is_some_and(Zero::is_zero));
    }

    #[test]
    fn weak_limit_targets() {
        let l = schedule(4);
        let tests = vec![(zero(), zero())];
        let rep = weak_limit_discrepancy(&[BigInt::zero()], &WeakLimitTarget::identity(), &tests, &l, 4).unwrap();
        assert!(rep.discrepancies[0].value().is_some_and(Zero::is_zero));
        let rep = weak_limit_discrepancy(&[BigInt::from(2)], &WeakLimitTarget::empty(), &tests, &l, 4).unwrap();
        assert_eq!(rep.discrepancies[0].value(), Some(&ratio(1, 3)));
        assert_eq!(WeakLimitTarget::averaging(2).coefficients().len(), 3);
        assert!(WeakLimitTarget::new(BTreeMap::from([(-2, from_int(1))])).is_err());
    }

    #[test]
    fn partially_high_decomposition() {
        let s = Schedule::high_staircase("ph", 4, SeqSpec::constant(3), SeqSpec::constant(1))
            .with_prefix(SeqSpec::constant(1));
        let l = build_levels(&s, 40).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let d = weak_limit_decomposition(0, &CylinderSet::points(0, [a]), &CylinderSet::points(0, [b]), &l, 40)
                    .unwrap();
                assert!(d.is_consistent(), "{a} {b}");
                assert_eq!(d.coefficient(1), ratio(1, 3));
            }
        }
    }
}
