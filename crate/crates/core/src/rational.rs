//! Exact rationals, rational enclosures and their text renderings.

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

/// Arbitrary-precision rational kept in canonical form (positive denominator,
/// coprime numerator and denominator). All measures and inner products use it.
pub type ExactRational = BigRational;

pub fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> ExactRational {
    BigRational::new(num.into(), den.into())
}

pub fn from_int(n: impl Into<BigInt>) -> ExactRational {
    BigRational::from_integer(n.into())
}

/// JSON form of an exact rational: decimal-string numerator and denominator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalRecord {
    pub num: String,
    pub den: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub decimal: Option<String>,
}

impl RationalRecord {
    pub fn new(q: &ExactRational, with_decimal: bool) -> Self {
        RationalRecord {
            num: q.numer().to_string(),
            den: q.denom().to_string(),
            decimal: with_decimal.then(|| to_decimal(q, DECIMAL_DIGITS)),
        }
    }

    pub fn value(&self) -> Result<ExactRational, String> {
        let num: BigInt = self.num.parse().map_err(|_| format!("bad numerator {:?}", self.num))?;
        let den: BigInt = self.den.parse().map_err(|_| format!("bad denominator {:?}", self.den))?;
        if den.is_zero() {
            return Err("zero denominator".into());
        }
        Ok(BigRational::new(num, den))
    }
}

/// Significant digits used whenever a decimal rendering is requested.
pub const DECIMAL_DIGITS: usize = 30;

/// Renders `q` in scientific notation with `digits` significant digits,
/// truncated toward zero. Zero renders as `0`.
pub fn to_decimal(q: &ExactRational, digits: usize) -> String {
    let digits = digits.max(1);
    if q.is_zero() {
        return "0".to_string();
    }
    let negative = q.is_negative();
    let num = q.numer().abs();
    let den = q.denom().clone();
    // Find exponent e with 10^e <= |q| < 10^(e+1).
    let num_len = num.to_string().len() as i64;
    let den_len = den.to_string().len() as i64;
    let mut exp = num_len - den_len;
    let ten = BigInt::from(10u32);
    let pow10 = |k: i64| -> BigInt { num_traits::pow(ten.clone(), k.unsigned_abs() as usize) };
    let ge_pow = |e: i64| -> bool {
        if e >= 0 {
            num >= &den * pow10(e)
        } else {
            &num * pow10(-e) >= den
        }
    };
    while !ge_pow(exp) {
        exp -= 1;
    }
    while ge_pow(exp + 1) {
        exp += 1;
    }
    // mantissa = floor(|q| * 10^(digits-1-exp))
    let shift = digits as i64 - 1 - exp;
    let mantissa = if shift >= 0 {
        (&num * pow10(shift)) / &den
    } else {
        &num / (&den * pow10(-shift))
    };
    let m = mantissa.to_string();
    let (head, tail) = m.split_at(1);
    let sign = if negative { "-" } else { "" };
    if tail.is_empty() {
        format!("{sign}{head}e{exp}")
    } else {
        format!("{sign}{head}.{tail}e{exp}")
    }
}

/// Rational enclosure `lower <= sqrt(q) <= upper` with `upper - lower <= 2^-bits`.
/// Perfect squares give `lower == upper`. Panics on negative input.
pub fn sqrt_enclosure(q: &ExactRational, bits: u32) -> (ExactRational, ExactRational) {
    assert!(!q.is_negative(), "square root of a negative rational");
    let num = q.numer().to_biguint().expect("non-negative");
    let den = q.denom().to_biguint().expect("positive");
    // sqrt(n/d) = sqrt(n*d)/d; scale by 2^bits for the fractional resolution.
    let scaled = (&num * &den) << (2 * bits as usize);
    let root = scaled.sqrt();
    let scale = &den << bits as usize;
    let to_q = |n: BigUint| BigRational::new(BigInt::from_biguint(Sign::Plus, n), BigInt::from_biguint(Sign::Plus, scale.clone()));
    let lower = to_q(root.clone());
    if &root * &root == scaled {
        (lower.clone(), lower)
    } else {
        (lower, to_q(root + 1u32))
    }
}

/// A closed rational interval `[lower, upper]`. Values that depend on a
/// truncated refinement are reported this way; resolved values are degenerate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enclosure {
    pub lower: ExactRational,
    pub upper: ExactRational,
}

impl Enclosure {
    pub fn exact(q: ExactRational) -> Self {
        Enclosure { lower: q.clone(), upper: q }
    }

    pub fn new(lower: ExactRational, upper: ExactRational) -> Self {
        debug_assert!(lower <= upper);
        Enclosure { lower, upper }
    }

    pub fn zero() -> Self {
        Self::exact(ExactRational::zero())
    }

    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }

    pub fn value(&self) -> Option<&ExactRational> {
        self.is_exact().then_some(&self.lower)
    }

    pub fn width(&self) -> ExactRational {
        &self.upper - &self.lower
    }

    pub fn add(&self, other: &Enclosure) -> Enclosure {
        Enclosure::new(&self.lower + &other.lower, &self.upper + &other.upper)
    }

    pub fn sub(&self, other: &Enclosure) -> Enclosure {
        Enclosure::new(&self.lower - &other.upper, &self.upper - &other.lower)
    }

    pub fn scale(&self, k: &ExactRational) -> Enclosure {
        let a = &self.lower * k;
        let b = &self.upper * k;
        if a <= b {
            Enclosure::new(a, b)
        } else {
            Enclosure::new(b, a)
        }
    }

    pub fn abs(&self) -> Enclosure {
        if !self.lower.is_negative() {
            self.clone()
        } else if !self.upper.is_positive() {
            Enclosure::new(-&self.upper, -&self.lower)
        } else {
            let hi = (-&self.lower).max(self.upper.clone());
            Enclosure::new(ExactRational::zero(), hi)
        }
    }

    /// Pointwise maximum: the enclosure of `max(x, y)`.
    pub fn max(&self, other: &Enclosure) -> Enclosure {
        Enclosure::new(
            self.lower.clone().max(other.lower.clone()),
            self.upper.clone().max(other.upper.clone()),
        )
    }

    pub fn contains(&self, q: &ExactRational) -> bool {
        &self.lower <= q && q <= &self.upper
    }
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact() {
            write!(f, "{}", self.lower)
        } else {
            write!(f, "[{}, {}]", self.lower, self.upper)
        }
    }
}

impl Serialize for Enclosure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        if self.is_exact() {
            return RationalRecord::new(&self.lower, false).serialize(s);
        }
        let mut map = s.serialize_map(Some(2))?;
        map.serialize_entry("lower", &RationalRecord::new(&self.lower, false))?;
        map.serialize_entry("upper", &RationalRecord::new(&self.upper, false))?;
        map.end()
    }
}

/// Serde adapter writing an [`ExactRational`] as a [`RationalRecord`].
pub mod as_record {
    use super::{ExactRational, RationalRecord};
    use serde::{Serialize, Serializer};

    pub fn serialize<S: Serializer>(q: &ExactRational, s: S) -> Result<S::Ok, S::Error> {
        RationalRecord::new(q, false).serialize(s)
    }

    pub mod vec {
        use super::{ExactRational, RationalRecord};
        use serde::{Serialize, Serializer};

        pub fn serialize<S: Serializer>(v: &[ExactRational], s: S) -> Result<S::Ok, S::Error> {
            v.iter().map(|q| RationalRecord::new(q, false)).collect::<Vec<_>>().serialize(s)
        }
    }
}

/// Exact integer ceiling of `a / b` for `b > 0`.
pub fn div_ceil(a: &BigInt, b: &BigInt) -> BigInt {
    let (q, r) = a.div_mod_floor(b);
    if r.is_zero() {
        q
    } else {
        q + BigInt::one()
    }
}

/// Serde adapter: exact integers as decimal strings (numbers are accepted on input).
pub mod bigint_string {
    use num_bigint::BigInt;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Str(String),
        Int(i64),
    }

    pub fn parse<E: de::Error>(raw: &str) -> Result<BigInt, E> {
        raw.trim().parse().map_err(|_| E::custom(format!("not an integer: {raw:?}")))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Str(s) => parse(&s),
            Raw::Int(i) => Ok(BigInt::from(i)),
        }
    }

    pub mod vec {
        use super::Raw;
        use num_bigint::BigInt;
        use serde::{ser::SerializeSeq, Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for x in v {
                seq.serialize_element(&x.to_string())?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
            Vec::<Raw>::deserialize(d)?
                .into_iter()
                .map(|r| match r {
                    Raw::Str(s) => super::parse(&s),
                    Raw::Int(i) => Ok(BigInt::from(i)),
                })
                .collect()
        }
    }
}
