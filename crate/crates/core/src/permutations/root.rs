use std::cmp::Ordering;
use std::fmt;
use std::iter::Product;
use std::ops::Mul;
use std::str::FromStr;

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// The root of unity `exp(i 2π num/den)`, stored as a reduced fraction of a turn.
///
/// Comparison and multiplication are exact integer operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RootOfUnity {
    num: u64,
    den: u64,
}

impl RootOfUnity {
    pub const ONE: RootOfUnity = RootOfUnity { num: 0, den: 1 };
    pub const MINUS_ONE: RootOfUnity = RootOfUnity { num: 1, den: 2 };

    /// `exp(i 2π num/den)`; `num` is taken modulo `den`. Panics if `den == 0`.
    pub fn new(num: i64, den: u64) -> Self {
        assert!(den > 0, "root of unity needs a positive denominator");
        let den_i = den as i128;
        let num = (num as i128).rem_euclid(den_i) as u64;
        let g = num.gcd(&den);
        Self {
            num: num / g,
            den: den / g,
        }
    }

    pub fn numerator(self) -> u64 {
        self.num
    }

    pub fn denominator(self) -> u64 {
        self.den
    }

    pub fn is_one(self) -> bool {
        self.num == 0
    }

    /// The phase as a fraction of a full turn, in `[0, 1)`.
    pub fn turns(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn to_complex(self) -> Complex64 {
        match (self.num, self.den) {
            (0, _) => Complex64::new(1.0, 0.0),
            (1, 2) => Complex64::new(-1.0, 0.0),
            (1, 4) => Complex64::new(0.0, 1.0),
            (3, 4) => Complex64::new(0.0, -1.0),
            _ => Complex64::from_polar(1.0, std::f64::consts::TAU * self.turns()),
        }
    }

    pub fn pow(self, k: u64) -> Self {
        let num = ((self.num as u128 * k as u128) % self.den as u128) as i64;
        Self::new(num, self.den)
    }

    pub fn inverse(self) -> Self {
        Self::new(-(self.num as i64), self.den)
    }
}

impl Default for RootOfUnity {
    fn default() -> Self {
        Self::ONE
    }
}

impl Mul for RootOfUnity {
    type Output = RootOfUnity;

    fn mul(self, rhs: Self) -> Self {
        let den = self.den.lcm(&rhs.den);
        let num = (self.num as u128 * (den / self.den) as u128 + rhs.num as u128 * (den / rhs.den) as u128)
            % den as u128;
        Self::new(num as i64, den)
    }
}

impl Product for RootOfUnity {
    fn product<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ONE, |a, b| a * b)
    }
}

impl<'a> Product<&'a RootOfUnity> for RootOfUnity {
    fn product<I: Iterator<Item = &'a Self>>(iter: I) -> Self {
        iter.copied().product()
    }
}

/// Orders by phase in `[0, 2π)`.
impl Ord for RootOfUnity {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl PartialOrd for RootOfUnity {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for RootOfUnity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for RootOfUnity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = |message: &str| Error::Parse {
            position: 0,
            message: format!("{message} in phase fraction {s:?}"),
        };
        let (num, den) = s.trim().split_once('/').ok_or_else(|| bad("missing '/'"))?;
        let num: i64 = num.trim().parse().map_err(|_| bad("bad numerator"))?;
        let den: u64 = den.trim().parse().map_err(|_| bad("bad denominator"))?;
        if den == 0 {
            return Err(bad("zero denominator"));
        }
        Ok(Self::new(num, den))
    }
}

impl Serialize for RootOfUnity {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RootOfUnity {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
