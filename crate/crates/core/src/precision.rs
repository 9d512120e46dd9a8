//! Binary64 and software extended precision.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use astro_float::{BigFloat, RoundingMode, Sign};

use crate::error::{invalid, LabError};

/// Significand bits used by [`Ext`].
pub const EXT_BITS: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    #[default]
    Binary64,
    Extended,
}

impl Precision {
    pub fn as_str(self) -> &'static str {
        match self {
            Precision::Binary64 => "f64",
            Precision::Extended => "ext",
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Precision {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "f64" | "binary64" => Ok(Precision::Binary64),
            "ext" | "extended" => Ok(Precision::Extended),
            other => Err(invalid("precision", format!("unknown precision {other:?}"))),
        }
    }
}

/// A 256-bit software float.
#[derive(Clone)]
pub struct Ext(BigFloat);

impl Ext {
    pub fn zero() -> Self {
        Ext(BigFloat::from_u64(0, EXT_BITS))
    }

    pub fn one() -> Self {
        Ext::from_u64(1)
    }

    pub fn from_u64(v: u64) -> Self {
        Ext(BigFloat::from_u64(v, EXT_BITS))
    }

    pub fn from_i64(v: i64) -> Self {
        Ext(BigFloat::from_i64(v, EXT_BITS))
    }

    pub fn from_f64(v: f64) -> Self {
        Ext(BigFloat::from_f64(v, EXT_BITS))
    }

    pub fn ratio(p: i64, q: i64) -> Self {
        Ext::from_i64(p) / Ext::from_i64(q)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        !self.0.is_zero() && self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        !self.0.is_zero() && self.0.is_positive()
    }

    pub fn abs(&self) -> Self {
        Ext(self.0.abs())
    }

    pub fn square(&self) -> Self {
        self * self
    }

    /// Rounds to the nearest binary64 (up to one ulp of double rounding).
    pub fn to_f64(&self) -> f64 {
        if self.0.is_zero() {
            return 0.0;
        }
        let Some((words, _, sign, exp, _)) = self.0.as_raw_parts() else {
            return f64::NAN;
        };
        let len = words.len();
        let hi = words[len - 1] as f64;
        let lo = if len > 1 { words[len - 2] as f64 } else { 0.0 };
        // value = 0.m * 2^exp with the top word holding the leading bits
        let mag = (hi + lo * 2f64.powi(-64)) * 2f64.powi(exp - 64);
        match sign {
            Sign::Neg => -mag,
            Sign::Pos => mag,
        }
    }

    /// Square root by Newton refinement of the binary64 root.
    pub fn sqrt(&self) -> Self {
        if self.0.is_zero() {
            return Ext::zero();
        }
        if self.is_negative() {
            return Ext(BigFloat::nan(None));
        }
        let seed = self.to_f64().sqrt();
        let mut y = if seed.is_finite() && seed > 0.0 {
            Ext::from_f64(seed)
        } else {
            Ext(self.0.sqrt(EXT_BITS, RM))
        };
        let half = Ext::ratio(1, 2);
        // 53 -> 106 -> 212 -> 424 bits
        for _ in 0..3 {
            y = &half * &(&y + &(self / &y));
        }
        y
    }

    /// `self^(m/2)` for an odd or even integer `m >= 0`.
    pub fn pow_half(&self, m: u32) -> Self {
        let int = self.powi((m / 2) as usize);
        if m % 2 == 1 {
            &int * &self.sqrt()
        } else {
            int
        }
    }

    pub fn powi(&self, e: usize) -> Self {
        Ext(self.0.powi(e, EXT_BITS, RM))
    }

    pub fn recip(&self) -> Self {
        Ext::one() / self
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Default for Ext {
    fn default() -> Self {
        Ext::zero()
    }
}

impl fmt::Debug for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ext({:e})", self.to_f64())
    }
}

impl PartialEq for Ext {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl PartialOrd for Ext {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl From<f64> for Ext {
    fn from(v: f64) -> Self {
        Ext::from_f64(v)
    }
}

impl From<u64> for Ext {
    fn from(v: u64) -> Self {
        Ext::from_u64(v)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $inner:ident) => {
        impl<'a> $tr<&'a Ext> for &'a Ext {
            type Output = Ext;
            fn $m(self, rhs: &'a Ext) -> Ext {
                Ext(self.0.$inner(&rhs.0, EXT_BITS, RM))
            }
        }
        impl $tr<Ext> for Ext {
            type Output = Ext;
            fn $m(self, rhs: Ext) -> Ext {
                Ext(self.0.$inner(&rhs.0, EXT_BITS, RM))
            }
        }
        impl<'a> $tr<&'a Ext> for Ext {
            type Output = Ext;
            fn $m(self, rhs: &'a Ext) -> Ext {
                Ext(self.0.$inner(&rhs.0, EXT_BITS, RM))
            }
        }
        impl<'a> $tr<Ext> for &'a Ext {
            type Output = Ext;
            fn $m(self, rhs: Ext) -> Ext {
                Ext(self.0.$inner(&rhs.0, EXT_BITS, RM))
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div);

impl Neg for Ext {
    type Output = Ext;
    fn neg(self) -> Ext {
        Ext(BigFloat::neg(&self.0))
    }
}

impl Neg for &Ext {
    type Output = Ext;
    fn neg(self) -> Ext {
        Ext(BigFloat::neg(&self.0))
    }
}
