//! Configurable-precision real numbers.
//!
//! Every numeric quantity in the crate is a [`Scalar`], a thin wrapper over an
//! MPFR float. The working precision is a process-wide setting: values are
//! created at [`precision_bits()`] and arithmetic rounds to the wider of the two
//! operand precisions, so results are deterministic for a fixed setting.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;
use std::sync::atomic::{AtomicU32, Ordering as AtomicOrdering};

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Assign, Float};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Smallest accepted working precision.
pub const MIN_PRECISION_BITS: u32 = 64;

/// Precision used when nothing else has been configured.
pub const DEFAULT_PRECISION_BITS: u32 = 256;

static PRECISION_BITS: AtomicU32 = AtomicU32::new(DEFAULT_PRECISION_BITS);

/// Current working precision in bits.
pub fn precision_bits() -> u32 {
    PRECISION_BITS.load(AtomicOrdering::Relaxed)
}

/// Sets the process-wide working precision. Values created earlier keep their
/// own precision.
pub fn set_precision_bits(bits: u32) -> Result<()> {
    if bits < MIN_PRECISION_BITS {
        return Err(Error::InvalidInput(format!(
            "precision_bits must be at least {MIN_PRECISION_BITS}, got {bits}"
        )));
    }
    if u64::from(bits) > u64::from(rug::float::prec_max()) {
        return Err(Error::InvalidInput(format!("precision_bits {bits} is too large")));
    }
    PRECISION_BITS.store(bits, AtomicOrdering::Relaxed);
    Ok(())
}

/// A real number carried at the configured binary precision.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct Scalar(Float);

impl Scalar {
    pub fn zero() -> Self {
        Scalar(Float::new(precision_bits()))
    }

    pub fn one() -> Self {
        Self::from_i64(1)
    }

    pub fn from_f64(v: f64) -> Self {
        Scalar(Float::with_val(precision_bits(), v))
    }

    pub fn from_i64(v: i64) -> Self {
        Scalar(Float::with_val(precision_bits(), v))
    }

    /// Exact rational `num / den` rounded once.
    pub fn ratio(num: i64, den: i64) -> Self {
        let mut r = Float::with_val(precision_bits(), num);
        r /= den;
        Scalar(r)
    }

    /// `2^exp`, exact.
    pub fn pow2(exp: i32) -> Self {
        let mut r = Float::with_val(precision_bits(), 1);
        r <<= exp;
        Scalar(r)
    }

    pub fn pi() -> Self {
        Scalar(Float::with_val(precision_bits(), Constant::Pi))
    }

    /// Unit roundoff `2^(1 - prec)` of the working precision.
    pub fn epsilon() -> Self {
        Self::pow2(1 - precision_bits() as i32)
    }

    pub fn from_float(f: Float) -> Self {
        Scalar(f)
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn into_float(self) -> Float {
        self.0
    }

    pub fn precision(&self) -> u32 {
        self.0.prec()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn is_sign_negative(&self) -> bool {
        self.0.is_sign_negative() && !self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.cmp0() == Some(Ordering::Less)
    }

    pub fn is_positive(&self) -> bool {
        self.0.cmp0() == Some(Ordering::Greater)
    }

    /// Is the value an exact integer?
    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn to_i64(&self) -> Option<i64> {
        if !self.0.is_integer() {
            return None;
        }
        let v = self.0.to_f64();
        (v.abs() < 9.0e15).then_some(v as i64)
    }

    pub fn abs(&self) -> Self {
        Scalar(self.0.clone().abs())
    }

    pub fn sqrt(&self) -> Self {
        Scalar(self.0.clone().sqrt())
    }

    pub fn exp(&self) -> Self {
        Scalar(self.0.clone().exp())
    }

    pub fn ln(&self) -> Self {
        Scalar(self.0.clone().ln())
    }

    pub fn cos(&self) -> Self {
        Scalar(self.0.clone().cos())
    }

    pub fn powi(&self, n: i32) -> Self {
        Scalar(self.0.clone().pow(n))
    }

    /// `self^e` for `self >= 0`.
    pub fn powf(&self, e: &Scalar) -> Self {
        Scalar(self.0.clone().pow(&e.0))
    }

    pub fn square(&self) -> Self {
        Scalar(self.0.clone().square())
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Total order; panics on NaN, which the solvers never produce.
    pub fn cmp_total(&self, other: &Self) -> Ordering {
        self.partial_cmp(other).expect("NaN in Scalar comparison")
    }

    /// `self += a * b` with a single rounding.
    pub fn add_mul(&mut self, a: &Scalar, b: &Scalar) {
        self.0 += &a.0 * &b.0;
    }

    /// `self -= a * b` with a single rounding.
    pub fn sub_mul(&mut self, a: &Scalar, b: &Scalar) {
        self.0 -= &a.0 * &b.0;
    }

    pub fn set(&mut self, other: &Scalar) {
        self.0.assign(&other.0);
    }

    /// Scientific notation with `digits` significant decimal digits.
    pub fn to_sci(&self, digits: usize) -> String {
        if self.0.is_zero() {
            return "0".to_string();
        }
        self.0.to_string_radix(10, Some(digits.max(1)))
    }

    /// Exact hexadecimal representation; parses back to the identical value.
    pub fn to_hex(&self) -> String {
        self.0.to_string_radix(16, None)
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let parsed = Float::parse_radix(s, 16)
            .map_err(|e| Error::InvalidInput(format!("bad hex scalar {s:?}: {e}")))?;
        Ok(Scalar(Float::with_val(precision_bits(), parsed)))
    }
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

impl From<f64> for Scalar {
    fn from(v: f64) -> Self {
        Scalar::from_f64(v)
    }
}

impl From<i64> for Scalar {
    fn from(v: i64) -> Self {
        Scalar::from_i64(v)
    }
}

impl From<i32> for Scalar {
    fn from(v: i32) -> Self {
        Scalar::from_i64(i64::from(v))
    }
}

impl From<usize> for Scalar {
    fn from(v: usize) -> Self {
        Scalar::from_i64(v as i64)
    }
}

impl FromStr for Scalar {
    type Err = Error;

    /// Parses a decimal literal at the working precision (correctly rounded,
    /// so `"0.1"` is nearer to one tenth than the f64 literal).
    fn from_str(s: &str) -> Result<Self> {
        let parsed = Float::parse(s.trim())
            .map_err(|e| Error::InvalidInput(format!("bad number {s:?}: {e}")))?;
        Ok(Scalar(Float::with_val(precision_bits(), parsed)))
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(p) => f.write_str(&self.to_sci(p)),
            None => f.write_str(&self.to_sci(20)),
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar({})", self.to_sci(24))
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Scalar::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-self.0)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-self.0.clone())
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $assign_tr:ident, $assign:ident) => {
        impl $assign_tr<&Scalar> for Scalar {
            fn $assign(&mut self, rhs: &Scalar) {
                self.0.$assign(&rhs.0);
            }
        }
        impl $assign_tr<Scalar> for Scalar {
            fn $assign(&mut self, rhs: Scalar) {
                self.0.$assign(&rhs.0);
            }
        }
        impl $tr<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(mut self, rhs: &Scalar) -> Scalar {
                self.0.$assign(&rhs.0);
                self
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(mut self, rhs: Scalar) -> Scalar {
                self.0.$assign(&rhs.0);
                self
            }
        }
        impl $tr<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                let prec = self.0.prec().max(rhs.0.prec());
                let mut out = Float::with_val(prec, &self.0);
                out.$assign(&rhs.0);
                Scalar(out)
            }
        }
        impl $tr<Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, AddAssign, add_assign);
binop!(Sub, sub, SubAssign, sub_assign);
binop!(Mul, mul, MulAssign, mul_assign);
binop!(Div, div, DivAssign, div_assign);

macro_rules! int_binop {
    ($tr:ident, $method:ident, $assign_tr:ident, $assign:ident) => {
        impl $assign_tr<i64> for Scalar {
            fn $assign(&mut self, rhs: i64) {
                self.0.$assign(rhs);
            }
        }
        impl $tr<i64> for Scalar {
            type Output = Scalar;
            fn $method(mut self, rhs: i64) -> Scalar {
                self.0.$assign(rhs);
                self
            }
        }
        impl $tr<i64> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: i64) -> Scalar {
                self.clone().$method(rhs)
            }
        }
    };
}

int_binop!(Add, add, AddAssign, add_assign);
int_binop!(Sub, sub, SubAssign, sub_assign);
int_binop!(Mul, mul, MulAssign, mul_assign);
int_binop!(Div, div, DivAssign, div_assign);

impl Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Scalar> for Scalar {
    fn sum<I: Iterator<Item = &'a Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |acc, x| acc + x)
    }
}
