use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::bigint_string;

use super::ConstructionError;

/// Declarative integer sequence `n -> a_n`, total on `n >= 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SeqSpec {
    /// `a_n = value`
    Const {
        #[serde(with = "bigint_string")]
        value: BigInt,
    },
    /// `a_n = start + step * n`
    Affine {
        #[serde(with = "bigint_string")]
        start: BigInt,
        #[serde(with = "bigint_string")]
        step: BigInt,
    },
    /// `a_n = start * ratio^n`
    Geometric {
        #[serde(with = "bigint_string")]
        start: BigInt,
        #[serde(with = "bigint_string")]
        ratio: BigInt,
    },
    /// Explicit prefix; past the end, `tail` is evaluated at `n - values.len()`.
    /// Without a tail the last value repeats.
    List {
        #[serde(with = "bigint_string::vec")]
        values: Vec<BigInt>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tail: Option<Box<SeqSpec>>,
    },
}

impl SeqSpec {
    pub fn constant(value: impl Into<BigInt>) -> Self {
        SeqSpec::Const { value: value.into() }
    }

    pub fn affine(start: impl Into<BigInt>, step: impl Into<BigInt>) -> Self {
        SeqSpec::Affine { start: start.into(), step: step.into() }
    }

    pub fn geometric(start: impl Into<BigInt>, ratio: impl Into<BigInt>) -> Self {
        SeqSpec::Geometric { start: start.into(), ratio: ratio.into() }
    }

    pub fn list<I, T>(values: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<BigInt>,
    {
        SeqSpec::List { values: values.into_iter().map(Into::into).collect(), tail: None }
    }

    pub fn list_with_tail<I, T>(values: I, tail: SeqSpec) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<BigInt>,
    {
        SeqSpec::List { values: values.into_iter().map(Into::into).collect(), tail: Some(Box::new(tail)) }
    }

    pub fn eval(&self, n: usize) -> BigInt {
        match self {
            SeqSpec::Const { value } => value.clone(),
            SeqSpec::Affine { start, step } => start + step * BigInt::from(n),
            SeqSpec::Geometric { start, ratio } => start * num_traits::pow(ratio.clone(), n),
            SeqSpec::List { values, tail } => {
                if n < values.len() {
                    values[n].clone()
                } else if let Some(tail) = tail {
                    tail.eval(n - values.len())
                } else {
                    values.last().cloned().unwrap_or_else(BigInt::zero)
                }
            }
        }
    }

    fn is_well_formed(&self) -> bool {
        match self {
            SeqSpec::List { values, tail } => match tail {
                Some(t) => t.is_well_formed(),
                None => !values.is_empty(),
            },
            _ => true,
        }
    }
}

/// Parameters of a single cut-and-stack stage `n -> n+1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageParams {
    pub cuts: usize,
    pub spacer: BigInt,
    pub prefix_width: usize,
    pub prefix_offsets: Option<Vec<BigInt>>,
}

/// Generator of (C,F) parameters: initial height, cuts `r_n`, flat spacer
/// layer `z_n`, and the optional partially-high prefix width `d_n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub name: String,
    #[serde(with = "bigint_string")]
    pub h0: BigInt,
    pub r: SeqSpec,
    pub z: SeqSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<SeqSpec>,
    /// Stage `n` -> explicit offsets `c_{n+1}(1..=d_n)` for the prefix subtowers.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub prefix_offsets: BTreeMap<usize, OffsetList>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OffsetList(#[serde(with = "bigint_string::vec")] pub Vec<BigInt>);

impl Schedule {
    /// High staircase with `d_n = 0`.
    pub fn high_staircase(name: &str, h0: impl Into<BigInt>, r: SeqSpec, z: SeqSpec) -> Self {
        Schedule {
            name: name.to_string(),
            h0: h0.into(),
            r,
            z,
            d: None,
            prefix_offsets: BTreeMap::new(),
        }
    }

    /// Pure staircase: high staircase with `z_n = 0`.
    pub fn pure_staircase(name: &str, h0: impl Into<BigInt>, r: SeqSpec) -> Self {
        Self::high_staircase(name, h0, r, SeqSpec::constant(0))
    }

    pub fn with_prefix(mut self, d: SeqSpec) -> Self {
        self.d = Some(d);
        self
    }

    pub fn with_prefix_offsets(mut self, stage: usize, offsets: Vec<BigInt>) -> Self {
        self.prefix_offsets.insert(stage, OffsetList(offsets));
        self
    }

    /// Validated parameters for stage `n`.
    pub fn stage(&self, n: usize) -> Result<StageParams, ConstructionError> {
        let invalid = |reason: String| ConstructionError::InvalidSchedule { stage: n, reason };
        if !self.r.is_well_formed() || !self.z.is_well_formed() || !self.d.as_ref().is_none_or(SeqSpec::is_well_formed) {
            return Err(invalid("empty list sequence without a tail".into()));
        }
        let r = self.r.eval(n);
        if r < BigInt::from(2) {
            return Err(invalid(format!("r_{n} = {r}, need at least 2 cuts")));
        }
        let cuts = r.to_usize().ok_or_else(|| invalid(format!("r_{n} = {r} is too large to materialize")))?;
        let spacer = self.z.eval(n);
        if spacer.is_negative() {
            return Err(invalid(format!("z_{n} = {spacer} is negative")));
        }
        let d = self.d.as_ref().map_or_else(BigInt::zero, |d| d.eval(n));
        if d.is_negative() || d > r {
            return Err(invalid(format!("d_{n} = {d} outside [0, r_{n}]")));
        }
        let prefix_width = d.to_usize().expect("bounded by r");
        let prefix_offsets = match self.prefix_offsets.get(&n) {
            Some(OffsetList(list)) => {
                if list.len() != prefix_width {
                    return Err(invalid(format!(
                        "{} prefix offsets supplied, d_{n} = {prefix_width}",
                        list.len()
                    )));
                }
                Some(list.clone())
            }
            None => None,
        };
        Ok(StageParams { cuts, spacer, prefix_width, prefix_offsets })
    }

    pub fn validate_h0(&self) -> Result<(), ConstructionError> {
        if self.h0 < BigInt::one() {
            return Err(ConstructionError::InvalidSchedule {
                stage: 0,
                reason: format!("h0 = {} must be positive", self.h0),
            });
        }
        Ok(())
    }
}

/// One piece of a concatenated schedule: its parameters are used for
/// `stopping_time` stages before the next fragment takes over.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fragment {
    pub schedule: Schedule,
    pub stopping_time: usize,
}

/// Lays fragment parameters end to end. Fragment `k+1` starts from the
/// terminal tower of fragment `k`, so every `h0` after the first is ignored.
/// The last fragment keeps running past its stopping time.
pub fn concatenate(fragments: &[Fragment]) -> Result<Schedule, ConstructionError> {
    let (last, init) = fragments.split_last().ok_or(ConstructionError::EmptyFragmentList)?;
    if let Some((i, _)) = fragments.iter().enumerate().find(|(_, f)| f.stopping_time == 0) {
        return Err(ConstructionError::InvalidStoppingTime { fragment: i });
    }
    if init.is_empty() {
        return Ok(last.schedule.clone());
    }

    let any_prefix = fragments.iter().any(|f| f.schedule.d.is_some());
    let zero = SeqSpec::constant(0);
    let mut r_vals = Vec::new();
    let mut z_vals = Vec::new();
    let mut d_vals = Vec::new();
    let mut prefix_offsets = BTreeMap::new();
    let mut offset = 0usize;
    for frag in init {
        let s = &frag.schedule;
        for n in 0..frag.stopping_time {
            r_vals.push(s.r.eval(n));
            z_vals.push(s.z.eval(n));
            d_vals.push(s.d.as_ref().unwrap_or(&zero).eval(n));
        }
        for (&stage, list) in s.prefix_offsets.range(..frag.stopping_time) {
            prefix_offsets.insert(offset + stage, list.clone());
        }
        offset += frag.stopping_time;
    }
    for (&stage, list) in &last.schedule.prefix_offsets {
        prefix_offsets.insert(offset + stage, list.clone());
    }

    let tail_of = |spec: &SeqSpec| Some(Box::new(spec.clone()));
    let name = fragments.iter().map(|f| f.schedule.name.as_str()).collect::<Vec<_>>().join("+");
    Ok(Schedule {
        name,
        h0: fragments[0].schedule.h0.clone(),
        r: SeqSpec::List { values: r_vals, tail: tail_of(&last.schedule.r) },
        z: SeqSpec::List { values: z_vals, tail: tail_of(&last.schedule.z) },
        d: any_prefix.then(|| SeqSpec::List {
            values: d_vals,
            tail: tail_of(last.schedule.d.as_ref().unwrap_or(&zero)),
        }),
        prefix_offsets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequence_kinds() {
        assert_eq!(SeqSpec::constant(3).eval(10), BigInt::from(3));
        assert_eq!(SeqSpec::affine(2, 1).eval(4), BigInt::from(6));
        assert_eq!(SeqSpec::geometric(3, 2).eval(5), BigInt::from(96));
        let l = SeqSpec::list([1, 2]);
        assert_eq!(l.eval(0), BigInt::from(1));
        assert_eq!(l.eval(7), BigInt::from(2));
        let t = SeqSpec::list_with_tail([5], SeqSpec::affine(10, 1));
        assert_eq!(t.eval(0), BigInt::from(5));
        assert_eq!(t.eval(1), BigInt::from(10));
        assert_eq!(t.eval(3), BigInt::from(12));
    }

    #[test]
    fn seq_json_accepts_numbers_and_strings() {
        let s: SeqSpec = serde_json::from_str(r#"{"kind":"affine","start":2,"step":"1"}"#).unwrap();
        assert_eq!(s, SeqSpec::affine(2, 1));
        let out = serde_json::to_string(&s).unwrap();
        assert_eq!(out, r#"{"kind":"affine","start":"2","step":"1"}"#);
    }

    #[test]
    fn stage_validation() {
        let bad = Schedule::pure_staircase("bad", 1, SeqSpec::list([3, 1]));
        assert!(bad.stage(0).is_ok());
        assert!(matches!(bad.stage(1), Err(ConstructionError::InvalidSchedule { stage: 1, .. })));
        let neg = Schedule::high_staircase("neg", 1, SeqSpec::constant(2), SeqSpec::constant(-1));
        assert!(neg.stage(0).is_err());
        let wide = Schedule::pure_staircase("wide", 1, SeqSpec::constant(2)).with_prefix(SeqSpec::constant(3));
        assert!(wide.stage(0).is_err());
        let empty = Schedule::pure_staircase("e", 1, SeqSpec::List { values: vec![], tail: None });
        assert!(empty.stage(0).is_err());
        let zero_h = Schedule::pure_staircase("h", 0, SeqSpec::constant(2));
        assert!(zero_h.validate_h0().is_err());
    }

    #[test]
    fn prefix_offset_count_must_match_width() {
        let s = Schedule::high_staircase("p", 1, SeqSpec::constant(3), SeqSpec::constant(1))
            .with_prefix(SeqSpec::constant(1))
            .with_prefix_offsets(0, vec![BigInt::from(3), BigInt::from(7)]);
        assert!(matches!(s.stage(0), Err(ConstructionError::InvalidSchedule { .. })));
    }

    #[test]
    fn concatenation_lays_stages_end_to_end() {
        let a = Schedule::high_staircase("a", 1, SeqSpec::constant(3), SeqSpec::constant(1));
        let b = Schedule::high_staircase("b", 99, SeqSpec::constant(4), SeqSpec::constant(2));
        let joined = concatenate(&[
            Fragment { schedule: a.clone(), stopping_time: 1 },
            Fragment { schedule: b, stopping_time: 1 },
        ])
        .unwrap();
        assert_eq!(joined.h0, BigInt::from(1));
        assert_eq!(joined.r.eval(0), BigInt::from(3));
        assert_eq!(joined.r.eval(1), BigInt::from(4));
        assert_eq!(joined.z.eval(0), BigInt::from(1));
        assert_eq!(joined.z.eval(5), BigInt::from(2));
        assert!(joined.d.is_none());

        let single = concatenate(&[Fragment { schedule: a.clone(), stopping_time: 4 }]).unwrap();
        assert_eq!(single, a);
        assert!(matches!(concatenate(&[]), Err(ConstructionError::EmptyFragmentList)));
        assert!(matches!(
            concatenate(&[Fragment { schedule: a, stopping_time: 0 }]),
            Err(ConstructionError::InvalidStoppingTime { fragment: 0 })
        ));
    }

    #[test]
    fn concatenation_remaps_prefix_offsets() {
        let a = Schedule::high_staircase("a", 1, SeqSpec::constant(3), SeqSpec::constant(1));
        let b = Schedule::high_staircase("b", 1, SeqSpec::constant(3), SeqSpec::constant(1))
            .with_prefix(SeqSpec::constant(1))
            .with_prefix_offsets(0, vec![BigInt::from(40)]);
        let joined = concatenate(&[
            Fragment { schedule: a, stopping_time: 2 },
            Fragment { schedule: b, stopping_time: 3 },
        ])
        .unwrap();
        assert_eq!(joined.d.as_ref().unwrap().eval(0), BigInt::zero());
        assert_eq!(joined.d.as_ref().unwrap().eval(2), BigInt::one());
        assert_eq!(joined.prefix_offsets.keys().copied().collect::<Vec<_>>(), vec![2]);
    }
}
