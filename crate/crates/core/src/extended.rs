//! Extended real numbers for quantities that may legitimately diverge.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A real number or one of the two infinities. Finite values never hold NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedValue {
    Finite(f64),
    PosInf,
    NegInf,
}

impl ExtendedValue {
    /// Maps an `f64` onto the extended line. NaN is rejected with `None`.
    pub fn from_f64(x: f64) -> Option<Self> {
        if x.is_nan() {
            None
        } else if x == f64::INFINITY {
            Some(Self::PosInf)
        } else if x == f64::NEG_INFINITY {
            Some(Self::NegInf)
        } else {
            Some(Self::Finite(x))
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Self::Finite(x) => x,
            Self::PosInf => f64::INFINITY,
            Self::NegInf => f64::NEG_INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Self::Finite(x) => Some(x),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Self::Finite(_))
    }

    /// Unwraps a finite value.
    ///
    /// # Panics
    /// Panics on either infinity.
    pub fn expect_finite(self, what: &str) -> f64 {
        match self {
            Self::Finite(x) => x,
            other => panic!("{what}: expected a finite value, got {other}"),
        }
    }
}

impl From<f64> for ExtendedValue {
    fn from(x: f64) -> Self {
        Self::from_f64(x).expect("NaN is not an extended real")
    }
}

impl fmt::Display for ExtendedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(x) => write!(f, "{x}"),
            Self::PosInf => f.write_str("+inf"),
            Self::NegInf => f.write_str("-inf"),
        }
    }
}

impl PartialOrd for ExtendedValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.to_f64().partial_cmp(&other.to_f64())
    }
}

impl Neg for ExtendedValue {
    type Output = Self;
    fn neg(self) -> Self {
        match self {
            Self::Finite(x) => Self::Finite(-x),
            Self::PosInf => Self::NegInf,
            Self::NegInf => Self::PosInf,
        }
    }
}

/// `+inf + -inf` is undefined; it resolves to `None` rather than NaN.
pub fn checked_add(a: ExtendedValue, b: ExtendedValue) -> Option<ExtendedValue> {
    use ExtendedValue::*;
    match (a, b) {
        (PosInf, NegInf) | (NegInf, PosInf) => None,
        (PosInf, _) | (_, PosInf) => Some(PosInf),
        (NegInf, _) | (_, NegInf) => Some(NegInf),
        (Finite(x), Finite(y)) => ExtendedValue::from_f64(x + y),
    }
}

impl Add for ExtendedValue {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        checked_add(self, rhs).expect("indeterminate form inf - inf")
    }
}

impl Sub for ExtendedValue {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

// JSON has no infinities; they travel as the strings "+inf" / "-inf".
impl Serialize for ExtendedValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Self::Finite(x) => s.serialize_f64(*x),
            Self::PosInf => s.serialize_str("+inf"),
            Self::NegInf => s.serialize_str("-inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(Self::Finite(x)),
            Repr::Text(t) => match t.as_str() {
                "+inf" | "inf" => Ok(Self::PosInf),
                "-inf" => Ok(Self::NegInf),
                other => Err(serde::de::Error::custom(format!(
                    "invalid extended value {other:?}"
                ))),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_conventions() {
        use ExtendedValue::*;
        assert_eq!(Finite(1.0) + PosInf, PosInf);
        assert_eq!(NegInf - Finite(3.0), NegInf);
        assert_eq!(-PosInf, NegInf);
        assert!(checked_add(PosInf, NegInf).is_none());
        assert!(ExtendedValue::from_f64(f64::NAN).is_none());
        assert!(NegInf < Finite(-1e300) && Finite(1e300) < PosInf);
    }

    #[test]
    fn json_roundtrip() {
        let vals = [ExtendedValue::Finite(2.5), ExtendedValue::PosInf, ExtendedValue::NegInf];
        let text = serde_json::to_string(&vals).unwrap();
        assert_eq!(text, r#"[2.5,"+inf","-inf"]"#);
        let back: Vec<ExtendedValue> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, vals);
    }
}
