use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Exact half-integer quantum number, stored as twice its value.
///
/// All comparisons, arithmetic, and triangle tests are integer-exact. Used for
/// every j, m, F, M_F, M_I, M_J, I, J in the crate.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct HalfInt {
    twice: i32,
}

impl HalfInt {
    /// Value from twice the quantum number (`from_twice(9)` is 9/2).
    pub const fn from_twice(twice: i32) -> Self {
        HalfInt { twice }
    }

    /// Integer-valued quantum number.
    pub const fn new(n: i32) -> Self {
        HalfInt { twice: 2 * n }
    }

    pub const fn twice(self) -> i32 {
        self.twice
    }

    pub fn value(self) -> f64 {
        self.twice as f64 / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    pub const fn is_negative(self) -> bool {
        self.twice < 0
    }

    /// 2j+1, the multiplicity of a spin-j manifold. Panics for negative j.
    pub fn multiplicity(self) -> usize {
        assert!(self.twice >= 0, "multiplicity of negative angular momentum");
        (self.twice + 1) as usize
    }

    /// True iff `m` is a valid projection of `j`: |m| <= j and j - m integer.
    pub fn valid_projection(j: HalfInt, m: HalfInt) -> bool {
        j.twice >= 0 && m.twice.abs() <= j.twice && (j.twice - m.twice) % 2 == 0
    }

    /// Projections m = j, j-1, ..., -j in descending order.
    pub fn projections(self) -> impl Iterator<Item = HalfInt> {
        let top = self.twice;
        let count = if top >= 0 { (top + 1) as usize } else { 0 };
        (0..count).map(move |k| HalfInt::from_twice(top - 2 * k as i32))
    }

    /// True iff (a, b, c) can form a triangle with integer perimeter.
    pub fn triangle(a: HalfInt, b: HalfInt, c: HalfInt) -> bool {
        a.twice >= 0
            && b.twice >= 0
            && c.twice >= 0
            && (a.twice + b.twice + c.twice) % 2 == 0
            && c.twice <= a.twice + b.twice
            && c.twice >= (a.twice - b.twice).abs()
    }

    /// Values c = |a-b|, ..., a+b allowed by the triangle rule, ascending.
    pub fn couplings(a: HalfInt, b: HalfInt) -> impl Iterator<Item = HalfInt> {
        let lo = (a.twice - b.twice).abs();
        let hi = a.twice + b.twice;
        (0..=((hi - lo) / 2)).map(move |k| HalfInt::from_twice(lo + 2 * k))
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt::from_twice(self.twice + rhs.twice)
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt::from_twice(self.twice - rhs.twice)
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt::from_twice(-self.twice)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice % 2 == 0 {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

impl fmt::Debug for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Parses "3", "-2", "9/2", "-11/2". Doubled values must be written over 2.
impl std::str::FromStr for HalfInt {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            if den.trim() != "2" {
                return Err(format!("half-integer denominator must be 2, got {s:?}"));
            }
            let n: i32 = num
                .trim()
                .parse()
                .map_err(|_| format!("invalid half-integer {s:?}"))?;
            if n % 2 == 0 {
                return Err(format!("{s:?} reduces to an integer; write it without /2"));
            }
            Ok(HalfInt::from_twice(n))
        } else {
            let n: i32 = s.parse().map_err(|_| format!("invalid half-integer {s:?}"))?;
            Ok(HalfInt::new(n))
        }
    }
}

impl TryFrom<String> for HalfInt {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<HalfInt> for String {
    fn from(h: HalfInt) -> String {
        h.to_string()
    }
}
