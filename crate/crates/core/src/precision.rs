//! Scalar abstraction shared by double and double-double arithmetic.

use num_traits::Float;
use serde::{Deserialize, Serialize};
use std::fmt::Debug;
use twofloat::TwoFloat;

/// Real scalar usable by the banded kernels and the Newton polish.
pub trait Real: Float + Debug + Send + Sync + 'static {
    /// Goes through `NumCast`; `twofloat`'s `FromPrimitive::from_f64` drops
    /// the fractional part.
    fn of(x: f64) -> Self {
        num_traits::cast(x).expect("f64 is representable")
    }
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
    /// Quotient correct to the working precision.
    fn quot(self, d: Self) -> Self {
        self / d
    }
}

impl Real for f64 {}

impl Real for TwoFloat {
    /// `twofloat`'s `/` is only accurate to about one double; one residual
    /// correction restores the full width.
    fn quot(self, d: Self) -> Self {
        let q = self / d;
        q + (self - q * d) / d
    }
}

/// Double-double scalar, about 31 significant digits.
pub type Extended = TwoFloat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Double,
    #[default]
    Extended,
}

impl Precision {
    pub const ENV: &'static str = "PADE_SPECT_PRECISION";

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "double" => Some(Precision::Double),
            "extended" => Some(Precision::Extended),
            _ => None,
        }
    }

    /// Reads `PADE_SPECT_PRECISION`; unset means extended.
    pub fn from_env() -> Result<Self, String> {
        match std::env::var(Self::ENV) {
            Ok(v) => Self::parse(&v).ok_or_else(|| format!("{}={v} is not double|extended", Self::ENV)),
            Err(_) => Ok(Precision::default()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extended_carries_more_digits() {
        let x = Extended::of(2.0).sqrt();
        let err = (x * x - Extended::of(2.0)).abs().to_f64_lossy();
        assert!(err < 1e-30);
    }

    #[test]
    fn extended_division_is_full_width() {
        let a = Extended::of(1006667901.2598907) + Extended::of(5.4707901736906515e-8);
        let b = Extended::of(-0.0009684825417466231) + Extended::of(-1.1256064179879083e-20);
        let back = (a * b).quot(a);
        assert!(((back - b) / b).abs().to_f64_lossy() < 1e-30);
    }

    #[test]
    fn fractional_values_survive_conversion() {
        assert_eq!(Extended::of(1.5).hi(), 1.5);
    }

    #[test]
    fn parse_precision() {
        assert_eq!(Precision::parse("Extended"), Some(Precision::Extended));
        assert_eq!(Precision::parse("double"), Some(Precision::Double));
        assert_eq!(Precision::parse("quad"), None);
    }
}
