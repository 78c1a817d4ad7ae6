use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::rational::{as_record, bigint_string, ExactRational};

use super::TowerLevels;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

pub const FINITE_PREFIX_NOTE: &str =
    "asymptotic limits are not decidable from a finite prefix; the verdict describes the materialized stages only";

/// Finite-prefix view of the restricted growth condition.
///
/// `ratios[i]` and `cuts_over_height[i]` belong to stage `n = i + 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthReport {
    pub stages: Vec<usize>,
    /// `g_n = r_n^2 / (r_0 ... r_{n-1})`
    #[serde(with = "as_record::vec")]
    pub ratios: Vec<ExactRational>,
    /// `r_n^2 / h_n`
    #[serde(with = "as_record::vec")]
    pub cuts_over_height: Vec<ExactRational>,
    #[serde(with = "as_record")]
    pub threshold: ExactRational,
    pub tail_decreasing: bool,
    pub verdict: Verdict,
    pub note: &'static str,
}

/// Verdict rule: PASS when the second half of the `g_n` prefix (at least two
/// terms) strictly decreases and the last term is below `threshold`; FAIL
/// when the last step does not decrease; INCONCLUSIVE otherwise.
pub fn check_restricted_growth(levels: &TowerLevels, threshold: &ExactRational) -> GrowthReport {
    let depth = levels.depth();
    let stages: Vec<usize> = (1..=depth).collect();
    let ratios: Vec<ExactRational> = stages
        .iter()
        .map(|&n| {
            let r = BigInt::from(levels.r(n));
            ExactRational::new(&r * &r, levels.cuts_product(n).clone())
        })
        .collect();
    let cuts_over_height = stages
        .iter()
        .map(|&n| {
            let r = BigInt::from(levels.r(n));
            ExactRational::new(&r * &r, levels.h(n).clone())
        })
        .collect();

    let tail_len = (ratios.len() / 2).max(2).min(ratios.len());
    let tail = &ratios[ratios.len() - tail_len..];
    let tail_decreasing = tail.len() >= 2 && tail.windows(2).all(|w| w[1] < w[0]);
    let verdict = match ratios.as_slice() {
        [.., prev, last] if last >= prev => Verdict::Fail,
        [_, _, ..] if tail_decreasing && ratios.last().expect("nonempty") < threshold => Verdict::Pass,
        _ => Verdict::Inconclusive,
    };
    GrowthReport {
        stages,
        ratios,
        cuts_over_height,
        threshold: threshold.clone(),
        tail_decreasing,
        verdict,
        note: FINITE_PREFIX_NOTE,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MeasureRegime {
    /// No spacer layers: partial sums stay at zero.
    Finite,
    /// `z_n / h_n` bounded below on the second half of the prefix, so the
    /// partial sums grow at least linearly there.
    DivergentTrend,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureReport {
    /// `mu(X_n)` for `n = 0..=depth`.
    #[serde(with = "as_record::vec")]
    pub tower_measures: Vec<ExactRational>,
    /// `sum_{k=1}^{n} z_k / h_k` for `n = 0..=depth`.
    #[serde(with = "as_record::vec")]
    pub spacer_partial_sums: Vec<ExactRational>,
    /// `r_0 ... r_{n-1}`. A fragment that starts at stage `n` and is normalized
    /// by `mu([0]_0) = 1` is rescaled to the global measure by its reciprocal.
    #[serde(with = "bigint_string::vec")]
    pub renormalization: Vec<BigInt>,
    /// Empirical `d_n / r_n`.
    #[serde(with = "as_record::vec")]
    pub prefix_ratios: Vec<ExactRational>,
    pub regime: MeasureRegime,
    pub note: &'static str,
}

pub fn measure_report(levels: &TowerLevels) -> MeasureReport {
    let depth = levels.depth();
    let tower_measures = (0..=depth).map(|n| levels.tower_measure(n)).collect();
    let terms: Vec<ExactRational> = (1..=depth)
        .map(|k| ExactRational::new(levels.z(k).clone(), levels.h(k).clone()))
        .collect();
    let mut spacer_partial_sums = vec![ExactRational::zero()];
    for t in &terms {
        let next = spacer_partial_sums.last().expect("nonempty") + t;
        spacer_partial_sums.push(next);
    }
    let regime = if terms.iter().all(Zero::is_zero) && levels.z(0).is_zero() {
        MeasureRegime::Finite
    } else {
        let tail = &terms[terms.len() / 2..];
        let floor = ExactRational::new(BigInt::one(), BigInt::from(2 * (depth + 1)));
        if !tail.is_empty() && tail.iter().all(|t| t >= &floor) {
            MeasureRegime::DivergentTrend
        } else {
            MeasureRegime::Inconclusive
        }
    };
    MeasureReport {
        tower_measures,
        spacer_partial_sums,
        renormalization: (0..=depth).map(|n| levels.cuts_product(n).clone()).collect(),
        prefix_ratios: (0..=depth)
            .map(|n| ExactRational::new(BigInt::from(levels.d(n)), BigInt::from(levels.r(n))))
            .collect(),
        regime,
        note: FINITE_PREFIX_NOTE,
    }
}
