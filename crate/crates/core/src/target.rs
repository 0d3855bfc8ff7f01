//! Target functions `f` on [-1, 1].
//!
//! A target lives on an original interval `[-a, a]` and is evaluated through
//! the substitution `x = a * u`, so every solver works on `u` in [-1, 1].
//! Second derivatives are taken with respect to `u`, which brings in the
//! chain-rule factor `a^2`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    /// `scale * |x|^lambda`
    AbsPow,
    /// `scale * exp(x)`
    ExpFn,
}

impl TargetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TargetKind::AbsPow => "abs_pow",
            TargetKind::ExpFn => "exp_fn",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    kind: TargetKind,
    exponent: Scalar,
    half_width: Scalar,
    scale: Scalar,
}

impl TargetSpec {
    /// `|x|^lambda` on [-1, 1], `lambda > 0`.
    pub fn abs_pow(lambda: Scalar) -> Result<Self> {
        if !lambda.is_positive() || !lambda.is_finite() {
            return Err(Error::InvalidInput(format!(
                "exponent must be positive, got {lambda}"
            )));
        }
        Ok(TargetSpec {
            kind: TargetKind::AbsPow,
            exponent: lambda,
            half_width: Scalar::one(),
            scale: Scalar::one(),
        })
    }

    pub fn abs_pow_f64(lambda: f64) -> Result<Self> {
        Self::abs_pow(Scalar::from_f64(lambda))
    }

    /// `exp(x)` on [-1, 1].
    pub fn exp_fn() -> Self {
        TargetSpec {
            kind: TargetKind::ExpFn,
            exponent: Scalar::zero(),
            half_width: Scalar::one(),
            scale: Scalar::one(),
        }
    }

    /// Same function, original interval `[-a, a]`.
    pub fn with_half_width(mut self, a: Scalar) -> Result<Self> {
        if !a.is_positive() || !a.is_finite() {
            return Err(Error::InvalidInput(format!(
                "half width must be positive, got {a}"
            )));
        }
        self.half_width = a;
        Ok(self)
    }

    pub fn with_scale(mut self, scale: Scalar) -> Self {
        self.scale = scale;
        self
    }

    pub fn kind(&self) -> TargetKind {
        self.kind
    }

    pub fn exponent(&self) -> &Scalar {
        &self.exponent
    }

    pub fn half_width(&self) -> &Scalar {
        &self.half_width
    }

    pub fn scale(&self) -> &Scalar {
        &self.scale
    }

    /// Exponent used for `n^lambda` scaling of error sequences (0 for `exp`).
    pub fn lambda(&self) -> &Scalar {
        &self.exponent
    }

    /// Convex on [-1, 1]: `|x|^lambda` with `lambda >= 1` (or the constant
    /// `lambda = 0`), and `exp`, each with a nonnegative prefactor.
    pub fn is_convex(&self) -> bool {
        if self.scale.is_negative() {
            return false;
        }
        match self.kind {
            TargetKind::ExpFn => true,
            TargetKind::AbsPow => self.exponent >= Scalar::one() || self.exponent.is_zero(),
        }
    }

    pub fn is_even(&self) -> bool {
        self.kind == TargetKind::AbsPow
    }

    /// Is the target itself a polynomial, and of which degree?
    pub fn polynomial_degree(&self) -> Option<usize> {
        match self.kind {
            TargetKind::AbsPow if self.exponent.is_integer() => {
                let k = self.exponent.to_i64()?;
                (k % 2 == 0).then_some(k as usize)
            }
            _ => None,
        }
    }

    /// `f` at `u` in [-1, 1].
    pub fn eval(&self, u: &Scalar) -> Result<Scalar> {
        if u.abs() > Scalar::one() {
            return Err(Error::OutOfDomain(u.clone()));
        }
        Ok(self.eval_unchecked(u))
    }

    pub fn eval_unchecked(&self, u: &Scalar) -> Scalar {
        let x = &self.half_width * u;
        let mut v = match self.kind {
            TargetKind::ExpFn => x.exp(),
            TargetKind::AbsPow => abs_pow_value(&x.abs(), &self.exponent),
        };
        v *= &self.scale;
        v
    }

    /// `d^2/du^2` of this target as a new target.
    ///
    /// For `scale |a u|^lambda` this is `scale lambda (lambda-1) a^2 |a u|^(lambda-2)`;
    /// for `scale exp(a u)` it is `scale a^2 exp(a u)`. Requires `lambda >= 2`
    /// for the power family, since otherwise `f''` is unbounded near 0.
    pub fn second_derivative(&self) -> Result<TargetSpec> {
        let a2 = self.half_width.square();
        match self.kind {
            TargetKind::ExpFn => Ok(TargetSpec {
                scale: &self.scale * &a2,
                ..self.clone()
            }),
            TargetKind::AbsPow => {
                let two = Scalar::from_i64(2);
                if self.exponent < two {
                    return Err(Error::InvalidInput(format!(
                        "second derivative of |x|^{} is unbounded near 0 (need lambda >= 2)",
                        self.exponent
                    )));
                }
                let lam = &self.exponent;
                let factor = lam * &(lam - &Scalar::one());
                Ok(TargetSpec {
                    kind: TargetKind::AbsPow,
                    exponent: lam - &two,
                    half_width: self.half_width.clone(),
                    scale: &self.scale * &factor * &a2,
                })
            }
        }
    }

    /// Compact label used in cache keys and diagnostics.
    pub fn key(&self) -> String {
        format!(
            "{}:{}:{}:{}",
            self.kind.as_str(),
            self.exponent.to_hex(),
            self.half_width.to_hex(),
            self.scale.to_hex()
        )
    }
}

impl fmt::Display for TargetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TargetKind::AbsPow => write!(
                f,
                "{:.6}*|{:.6}u|^{:.6}",
                self.scale, self.half_width, self.exponent
            ),
            TargetKind::ExpFn => write!(f, "{:.6}*exp({:.6}u)", self.scale, self.half_width),
        }
    }
}

/// `|x|^lambda` for `x >= 0`, with `0^0 = 1` and `0^lambda = 0` otherwise.
fn abs_pow_value(x: &Scalar, lambda: &Scalar) -> Scalar {
    if x.is_zero() {
        return if lambda.is_zero() {
            Scalar::one()
        } else {
            Scalar::zero()
        };
    }
    if lambda.is_integer() {
        if let Some(k) = lambda.to_i64().filter(|k| (0..=64).contains(k)) {
            return x.powi(k as i32);
        }
    }
    (lambda * &x.ln()).exp()
}
