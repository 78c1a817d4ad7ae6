//! Autocorrelation sequences of cylinder indicators and multiplicity sets of
//! exponential (Poisson) operators.
//!
//! The multiplicity sets are the combinatorial consequence of the structure
//! theorem for `exp(U_T)`. They are conditional on its hypotheses (simple
//! spectrum of `U_T` and mutually singular convolution powers), which are not
//! checked here.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::One;
use serde::{Serialize, Serializer};

use crate::construction::TowerLevels;
use crate::cylinder::{correlation_enclosure, image_under_power, CylinderError, CylinderSet};
use crate::rational::{Enclosure, ExactRational};

/// `m -> <U^m 1_f, 1_f>` for `|m| <= M`, stored for `m >= 0` only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectralSequence {
    pub f: CylinderSet,
    values: Vec<Enclosure>,
}

impl SpectralSequence {
    pub fn max_lag(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, m: i64) -> Option<&Enclosure> {
        self.values.get(m.unsigned_abs() as usize)
    }

    /// Values for `m = 0..=M`.
    pub fn nonnegative(&self) -> &[Enclosure] {
        &self.values
    }

    pub fn is_exact(&self) -> bool {
        self.values.iter().all(Enclosure::is_exact)
    }

    /// `(m, value)` for `m = -M..=M`.
    pub fn rows(&self) -> impl Iterator<Item = (i64, &Enclosure)> {
        let max = self.max_lag() as i64;
        (-max..=max).map(move |m| (m, self.get(m).expect("in range")))
    }
}

/// Computes the sequence for `0 <= m <= max_lag`; negative lags follow by
/// symmetry. Unresolved entries are kept as enclosures.
pub fn spectral_sequence(
    f: &CylinderSet,
    max_lag: usize,
    levels: &TowerLevels,
    max_depth: usize,
) -> Result<SpectralSequence, CylinderError> {
    let values = (0..=max_lag)
        .map(|m| correlation_enclosure(BigInt::from(m), f, f, levels, max_depth))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SpectralSequence { f: f.clone(), values })
}

/// Strict variant: fails with `DepthExhausted` on the first unresolved lag.
pub fn spectral_sequence_exact(
    f: &CylinderSet,
    max_lag: usize,
    levels: &TowerLevels,
    max_depth: usize,
) -> Result<Vec<ExactRational>, CylinderError> {
    (0..=max_lag)
        .map(|m| {
            let img = image_under_power(BigInt::from(m), f, levels, max_depth)?;
            match img.intersection(f, levels)? {
                e if e.is_exact() => Ok(e.lower),
                e => Err(CylinderError::DepthExhausted {
                    resolved: e.lower,
                    residual: img.residual_measure(levels),
                }),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Multiplicity {
    Finite(BigUint),
    Infinity,
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Multiplicity::Finite(n) => write!(f, "{n}"),
            Multiplicity::Infinity => write!(f, "inf"),
        }
    }
}

impl Serialize for Multiplicity {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Sorted, duplicate-free subset of `{1, 2, ...} ∪ {∞}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct MultiplicitySet(Vec<Multiplicity>);

impl MultiplicitySet {
    pub fn new(mut values: Vec<Multiplicity>) -> Self {
        values.sort();
        values.dedup();
        MultiplicitySet(values)
    }

    pub fn values(&self) -> &[Multiplicity] {
        &self.0
    }

    pub fn finite_values(&self) -> Vec<BigUint> {
        self.0
            .iter()
            .filter_map(|m| match m {
                Multiplicity::Finite(n) => Some(n.clone()),
                Multiplicity::Infinity => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpectralError {
    #[error("p must exceed 1, got {0}")]
    InvalidP(BigInt),
    #[error("n_max must be at least 1")]
    EmptyRange,
}

/// `{(2n)! / (2^n n!) : 1 <= n <= n_max}`, i.e. the double factorials
/// `1, 3, 3*5, 3*5*7, ...`: multiplicities of `exp` of the symmetric square.
pub fn exp_multiplicities_symmetric_square(n_max: usize) -> Result<MultiplicitySet, SpectralError> {
    if n_max == 0 {
        return Err(SpectralError::EmptyRange);
    }
    let mut a = BigUint::one();
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        if n > 1 {
            a *= BigUint::from(2 * n - 1);
        }
        out.push(Multiplicity::Finite(a.clone()));
    }
    Ok(MultiplicitySet::new(out))
}

/// `{p^k : 1 <= k <= n_max}`, the multiplicities for the product with the
/// identity on `p` points.
pub fn exp_multiplicities_identity_product(p: &BigInt, n_max: usize) -> Result<MultiplicitySet, SpectralError> {
    if *p <= BigInt::one() {
        return Err(SpectralError::InvalidP(p.clone()));
    }
    if n_max == 0 {
        return Err(SpectralError::EmptyRange);
    }
    let base = p.magnitude().clone();
    let mut acc = BigUint::one();
    let out = (0..n_max)
        .map(|_| {
            acc *= &base;
            Multiplicity::Finite(acc.clone())
        })
        .collect();
    Ok(MultiplicitySet::new(out))
}
