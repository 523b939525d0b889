use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest log-magnitude that converts back to an ordinary `f64`.
const MAX_CONVERTIBLE_LOG: f64 = 700.0;

/// A real number stored as `sign · exp(log_mag)`.
///
/// Quantities such as `N!·e^{2N}` overflow `f64` long before the values of `N`
/// this crate works with, so every large intermediate lives in this form. A
/// `sign` of zero is an exact zero and its `log_mag` is ignored (kept at −∞).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScaledReal {
    sign: i8,
    log_mag: f64,
}

impl ScaledReal {
    pub const ZERO: ScaledReal = ScaledReal {
        sign: 0,
        log_mag: f64::NEG_INFINITY,
    };
    pub const ONE: ScaledReal = ScaledReal {
        sign: 1,
        log_mag: 0.0,
    };

    /// Builds a value from its parts. A zero sign or a magnitude of `exp(-inf)`
    /// normalizes to [`ScaledReal::ZERO`].
    pub fn from_parts(sign: i8, log_mag: f64) -> Self {
        if sign == 0 || log_mag == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            Self {
                sign: sign.signum(),
                log_mag,
            }
        }
    }

    pub fn from_real(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self::from_parts(if x > 0.0 { 1 } else { -1 }, x.abs().ln())
        }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    /// Natural log of the magnitude; `-inf` for zero.
    pub fn log_mag(&self) -> f64 {
        self.log_mag
    }

    pub fn log10_mag(&self) -> f64 {
        self.log_mag / std::f64::consts::LN_10
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn abs(self) -> Self {
        Self::from_parts(self.sign.abs(), self.log_mag)
    }

    /// Converts to `f64`, refusing magnitudes that would over- or underflow.
    pub fn to_real_checked(self) -> Result<f64> {
        if self.sign == 0 {
            return Ok(0.0);
        }
        if !(self.log_mag.abs() < MAX_CONVERTIBLE_LOG) {
            return Err(Error::OutOfRange {
                log_mag: self.log_mag,
            });
        }
        Ok(f64::from(self.sign) * self.log_mag.exp())
    }

    /// Converts to `f64` with IEEE saturation (`inf` or `0`) instead of an error.
    pub fn to_real_lossy(self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            f64::from(self.sign) * self.log_mag.exp()
        }
    }

    pub fn checked_div(self, rhs: Self) -> Result<Self> {
        if rhs.sign == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::from_parts(
            self.sign * rhs.sign,
            self.log_mag - rhs.log_mag,
        ))
    }

    /// Square root of a nonnegative value; negative input is an error.
    pub fn sqrt(self) -> Result<Self> {
        match self.sign {
            0 => Ok(Self::ZERO),
            1 => Ok(Self::from_parts(1, 0.5 * self.log_mag)),
            _ => Err(Error::DegenerateVariance(self.to_real_lossy())),
        }
    }

    /// Multiplies by `exp(shift)`.
    pub fn scale_exp(self, shift: f64) -> Self {
        Self::from_parts(self.sign, self.log_mag + shift)
    }

    /// Value relative to `exp(reference)`, as a plain `f64`.
    pub fn relative_to(self, reference: f64) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            f64::from(self.sign) * (self.log_mag - reference).exp()
        }
    }

    pub fn powi(self, n: i32) -> Self {
        let sign = if self.sign < 0 && n % 2 != 0 { -1 } else { 1 };
        if self.sign == 0 {
            return if n == 0 { Self::ONE } else { Self::ZERO };
        }
        Self::from_parts(sign, self.log_mag * f64::from(n))
    }
}

impl Default for ScaledReal {
    fn default() -> Self {
        Self::ZERO
    }
}

impl From<f64> for ScaledReal {
    fn from(x: f64) -> Self {
        Self::from_real(x)
    }
}

impl Add for ScaledReal {
    type Output = ScaledReal;

    fn add(self, rhs: Self) -> Self {
        if self.sign == 0 {
            return rhs;
        }
        if rhs.sign == 0 {
            return self;
        }
        let (big, small) = if self.log_mag >= rhs.log_mag {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let ratio = (small.log_mag - big.log_mag).exp();
        if big.sign == small.sign {
            Self::from_parts(big.sign, big.log_mag + ratio.ln_1p())
        } else if ratio == 1.0 {
            Self::ZERO
        } else {
            Self::from_parts(big.sign, big.log_mag + (-ratio).ln_1p())
        }
    }
}

impl Neg for ScaledReal {
    type Output = ScaledReal;

    fn neg(self) -> Self {
        Self::from_parts(-self.sign, self.log_mag)
    }
}

impl Sub for ScaledReal {
    type Output = ScaledReal;

    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for ScaledReal {
    type Output = ScaledReal;

    fn mul(self, rhs: Self) -> Self {
        Self::from_parts(self.sign * rhs.sign, self.log_mag + rhs.log_mag)
    }
}

impl Mul<f64> for ScaledReal {
    type Output = ScaledReal;

    fn mul(self, rhs: f64) -> Self {
        self * Self::from_real(rhs)
    }
}

impl PartialEq for ScaledReal {
    fn eq(&self, other: &Self) -> bool {
        self.sign == other.sign && (self.sign == 0 || self.log_mag == other.log_mag)
    }
}

impl PartialOrd for ScaledReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                0 => Some(Ordering::Equal),
                1 => self.log_mag.partial_cmp(&other.log_mag),
                _ => other.log_mag.partial_cmp(&self.log_mag),
            },
            ord => Some(ord),
        }
    }
}

impl fmt::Display for ScaledReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            s => write!(f, "{}exp({})", if s < 0 { "-" } else { "" }, self.log_mag),
        }
    }
}
