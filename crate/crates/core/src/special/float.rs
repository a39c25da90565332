//! Arbitrary-precision floating values with their working precision attached.

use std::cmp::Ordering;
use std::fmt;

use rug::float::Constant;
use rug::Float;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

/// Smallest working precision accepted anywhere in the crate.
pub const MIN_PRECISION: u32 = 64;

/// A floating value computed at a recorded working precision (in bits).
///
/// The precision travels with the value so every derived result can state
/// how many bits it was computed with.
#[derive(Clone, Debug)]
pub struct BigFloat(Float);

impl BigFloat {
    /// Wraps `value`, raising its precision to [`MIN_PRECISION`] if needed.
    pub fn from_float(value: Float) -> Self {
        if value.prec() < MIN_PRECISION {
            BigFloat(Float::with_val(MIN_PRECISION, &value))
        } else {
            BigFloat(value)
        }
    }

    pub fn with_val<T>(prec: u32, val: T) -> Self
    where
        Float: rug::Assign<T>,
    {
        BigFloat::from_float(Float::with_val(prec.max(MIN_PRECISION), val))
    }

    pub fn zero(prec: u32) -> Self {
        BigFloat::with_val(prec, 0)
    }

    pub fn precision(&self) -> u32 {
        self.0.prec()
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn into_float(self) -> Float {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    /// Decimal digits sufficient to round-trip at the stored precision.
    pub fn to_decimal_string(&self) -> String {
        self.0.to_string_radix(10, None)
    }
}

impl From<Float> for BigFloat {
    fn from(value: Float) -> Self {
        BigFloat::from_float(value)
    }
}

impl PartialEq for BigFloat {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl PartialOrd for BigFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl fmt::Display for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal_string())
    }
}

impl Serialize for BigFloat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("BigFloat", 2)?;
        st.serialize_field("precision", &self.precision())?;
        st.serialize_field("value", &self.to_decimal_string())?;
        st.end()
    }
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

pub fn euler_gamma(prec: u32) -> Float {
    Float::with_val(prec, Constant::Euler)
}

/// `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_difference(a: &Float, b: &Float) -> Float {
    let prec = a.prec().max(b.prec());
    let diff = Float::with_val(prec, a - b).abs();
    let scale = Float::with_val(prec, a.abs_ref()).max(&Float::with_val(prec, b.abs_ref()));
    if scale.is_zero() {
        Float::with_val(prec, 0)
    } else {
        diff / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_is_floored() {
        let x = BigFloat::with_val(16, 1.5);
        assert_eq!(x.precision(), MIN_PRECISION);
        assert_eq!(x.to_f64(), 1.5);
    }

    #[test]
    fn serializes_with_precision_tag() {
        let x = BigFloat::with_val(128, 0.25);
        let v = serde_json::to_value(&x).unwrap();
        assert_eq!(v["precision"], 128);
        let s = v["value"].as_str().unwrap();
        let back = Float::with_val(128, Float::parse(s).unwrap());
        assert_eq!(back, 0.25);
    }

    #[test]
    fn relative_difference_of_zeroes() {
        let z = Float::new(64);
        assert!(relative_difference(&z, &z).is_zero());
    }
}
