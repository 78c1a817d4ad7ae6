use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::rational::{bigint_string, ExactRational};

use super::{ConstructionError, Schedule};

/// Materialized tower data for stages `0..=depth`.
///
/// `offsets(n)` is `C_n` for `1 <= n <= depth`; `F_n = [0, h_n)` is implicit.
/// Cut counts and spacers are also kept for stage `depth` so that growth
/// diagnostics can look one stage ahead.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TowerLevels {
    schedule: String,
    depth: usize,
    #[serde(with = "bigint_string::vec")]
    h: Vec<BigInt>,
    #[serde(rename = "bigH", with = "bigint_string::vec")]
    big_h: Vec<BigInt>,
    #[serde(with = "bigint_string::vec")]
    z: Vec<BigInt>,
    r: Vec<usize>,
    d: Vec<usize>,
    #[serde(rename = "C", serialize_with = "serialize_offsets")]
    offsets: Vec<Vec<BigInt>>,
    #[serde(with = "bigint_string::vec")]
    cuts_product: Vec<BigInt>,
}

fn serialize_offsets<S: serde::Serializer>(v: &[Vec<BigInt>], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for c in v {
        seq.serialize_element(&c.iter().map(ToString::to_string).collect::<Vec<_>>())?;
    }
    seq.end()
}

/// Builds `C_{n+1}` and `h_{n+1}` from stage `n`.
///
/// `c(0) = 0`; for `i < d` the gap `c(i+1) - c(i)` is the supplied prefix
/// offset or `H_n + 1`; for `i >= d` it is `H_n + i - d`. The height is
/// `h_{n+1} = c(r)`. With `d = 0` this is the high staircase.
fn next_stage(
    stage: usize,
    h: &BigInt,
    big_h: &BigInt,
    cuts: usize,
    d: usize,
    prefix: Option<&[BigInt]>,
) -> Result<(Vec<BigInt>, BigInt), ConstructionError> {
    let mut c = Vec::with_capacity(cuts + 1);
    c.push(BigInt::zero());
    for i in 0..cuts {
        let prev = &c[i];
        let next = if i < d {
            match prefix {
                Some(list) => list[i].clone(),
                None => prev + big_h + 1u32,
            }
        } else {
            prev + big_h + BigInt::from(i - d)
        };
        if &next - prev < *h {
            return Err(ConstructionError::OffsetOverlap { stage, index: i + 1 });
        }
        c.push(next);
    }
    let top = c.pop().expect("cuts >= 2");
    Ok((c, top))
}

/// Materializes the schedule to `depth` stages with exact arithmetic.
pub fn build_levels(schedule: &Schedule, depth: usize) -> Result<TowerLevels, ConstructionError> {
    schedule.validate_h0()?;
    let mut h = vec![schedule.h0.clone()];
    let mut big_h = Vec::with_capacity(depth + 1);
    let mut z = Vec::with_capacity(depth + 1);
    let mut r = Vec::with_capacity(depth + 1);
    let mut d = Vec::with_capacity(depth + 1);
    let mut offsets = Vec::with_capacity(depth);
    let mut cuts_product = vec![BigInt::one()];
    for n in 0..=depth {
        let params = schedule.stage(n)?;
        big_h.push(&h[n] + &params.spacer);
        z.push(params.spacer.clone());
        r.push(params.cuts);
        d.push(params.prefix_width);
        if n == depth {
            break;
        }
        let (c, top) = next_stage(
            n,
            &h[n],
            &big_h[n],
            params.cuts,
            params.prefix_width,
            params.prefix_offsets.as_deref(),
        )?;
        offsets.push(c);
        h.push(top);
        cuts_product.push(&cuts_product[n] * BigInt::from(params.cuts));
    }
    Ok(TowerLevels {
        schedule: schedule.name.clone(),
        depth,
        h,
        big_h,
        z,
        r,
        d,
        offsets,
        cuts_product,
    })
}

impl TowerLevels {
    pub fn schedule_name(&self) -> &str {
        &self.schedule
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn h(&self, n: usize) -> &BigInt {
        &self.h[n]
    }

    pub fn heights(&self) -> &[BigInt] {
        &self.h
    }

    /// `H_n = h_n + z_n`.
    pub fn big_h(&self, n: usize) -> &BigInt {
        &self.big_h[n]
    }

    pub fn z(&self, n: usize) -> &BigInt {
        &self.z[n]
    }

    /// `r_n = #C_{n+1}`, available for `n <= depth`.
    pub fn r(&self, n: usize) -> usize {
        self.r[n]
    }

    pub fn d(&self, n: usize) -> usize {
        self.d[n]
    }

    /// `C_n` for `1 <= n <= depth`, sorted with first element 0.
    pub fn offsets(&self, n: usize) -> &[BigInt] {
        assert!(n >= 1 && n <= self.depth, "C_{n} not materialized (depth {})", self.depth);
        &self.offsets[n - 1]
    }

    /// `r_0 * ... * r_{n-1}`: the number of level-`n` unit levels per unit of measure.
    pub fn cuts_product(&self, n: usize) -> &BigInt {
        &self.cuts_product[n]
    }

    /// Measure of one level `[f]_n`, with each level of `F_0` weighing 1.
    pub fn level_weight(&self, n: usize) -> ExactRational {
        ExactRational::new(BigInt::one(), self.cuts_product[n].clone())
    }

    /// `mu(X_n) = h_n / (r_0 ... r_{n-1})`.
    pub fn tower_measure(&self, n: usize) -> ExactRational {
        ExactRational::new(self.h[n].clone(), self.cuts_product[n].clone())
    }

    /// Checks the structural invariants of every materialized stage.
    pub fn verify(&self) -> Result<(), String> {
        for n in 0..self.depth {
            let c = &self.offsets[n];
            let h = &self.h[n];
            if c.len() != self.r[n] || c[0] != BigInt::zero() {
                return Err(format!("C_{} malformed", n + 1));
            }
            for w in c.windows(2) {
                if &w[1] - &w[0] < *h {
                    return Err(format!("copies in C_{} overlap", n + 1));
                }
            }
            if c.last().expect("nonempty") + h > self.h[n + 1] {
                return Err(format!("F_{n} + C_{} exceeds F_{}", n + 1, n + 1));
            }
            if self.big_h[n] != h + &self.z[n] {
                return Err(format!("H_{n} != h_{n} + z_{n}"));
            }
            if self.d[n] == 0 {
                let r = BigInt::from(self.r[n]);
                let expected = &r * &self.big_h[n] + &r * (&r - 1u32) / 2u32;
                if expected != self.h[n + 1] {
                    return Err(format!("h_{} breaks the staircase recurrence", n + 1));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::SeqSpec;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn pure_staircase_first_stage() {
        let s = Schedule::pure_staircase("p", 2, SeqSpec::constant(2));
        let l = build_levels(&s, 1).unwrap();
        assert_eq!(l.h(1), &BigInt::from(5));
        assert_eq!(l.offsets(1), ints(&[0, 2]).as_slice());
    }

    #[test]
    fn high_staircase_two_stages() {
        let s = Schedule::high_staircase("b", 1, SeqSpec::constant(3), SeqSpec::list([1, 2]));
        let l = build_levels(&s, 2).unwrap();
        assert_eq!(l.heights(), ints(&[1, 9, 36]).as_slice());
        assert_eq!(l.offsets(1), ints(&[0, 2, 5]).as_slice());
        assert_eq!(l.offsets(2), ints(&[0, 11, 23]).as_slice());
        assert_eq!(l.big_h(1), &BigInt::from(11));
        assert_eq!(l.cuts_product(2), &BigInt::from(9));
        l.verify().unwrap();
    }

    #[test]
    fn depth_zero_keeps_only_h0() {
        let s = Schedule::pure_staircase("p", 7, SeqSpec::constant(2));
        let l = build_levels(&s, 0).unwrap();
        assert_eq!(l.heights(), ints(&[7]).as_slice());
        assert_eq!(l.tower_measure(0), ExactRational::from_integer(BigInt::from(7)));
    }

    #[test]
    fn partially_high_default_prefix() {
        // d = 1, r = 3, H = 2: c = (0, 3, 5), h_1 = 8.
        let s = Schedule::high_staircase("ph", 1, SeqSpec::constant(3), SeqSpec::constant(1))
            .with_prefix(SeqSpec::constant(1));
        let l = build_levels(&s, 1).unwrap();
        assert_eq!(l.offsets(1), ints(&[0, 3, 5]).as_slice());
        assert_eq!(l.h(1), &BigInt::from(8));
        l.verify().unwrap();
    }

    #[test]
    fn full_prefix_sets_the_height() {
        let s = Schedule::high_staircase("ph", 2, SeqSpec::constant(2), SeqSpec::constant(0))
            .with_prefix(SeqSpec::constant(2))
            .with_prefix_offsets(0, ints(&[2, 9]));
        let l = build_levels(&s, 1).unwrap();
        assert_eq!(l.offsets(1), ints(&[0, 2]).as_slice());
        assert_eq!(l.h(1), &BigInt::from(9));
    }

    #[test]
    fn overlapping_prefix_is_rejected() {
        let s = Schedule::high_staircase("ph", 4, SeqSpec::constant(3), SeqSpec::constant(1))
            .with_prefix(SeqSpec::constant(1))
            .with_prefix_offsets(0, ints(&[3]));
        assert_eq!(
            build_levels(&s, 1),
            Err(ConstructionError::OffsetOverlap { stage: 0, index: 1 })
        );
    }

    #[test]
    fn single_cut_is_invalid() {
        let s = Schedule::pure_staircase("p", 1, SeqSpec::constant(1));
        assert!(matches!(build_levels(&s, 1), Err(ConstructionError::InvalidSchedule { .. })));
    }
}
