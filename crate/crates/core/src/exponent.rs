//! Exact rational exponent vectors.

use std::fmt;
use std::ops::{Add, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Normalized rational number (`den > 0`, `gcd(num, den) = 1`).
pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// Parses `p`, `p/q` or a decimal like `0.25` exactly.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        if fp.is_empty() || !fp.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let neg = ip.starts_with('-');
        let ip = ip.trim_start_matches(['-', '+']);
        let whole: BigInt = if ip.is_empty() { BigInt::zero() } else { ip.parse().ok()? };
        let frac: BigInt = fp.parse().ok()?;
        let scale = num_traits::pow(BigInt::from(10), fp.len());
        let v = BigRational::new(whole * &scale + frac, scale);
        return Some(if neg { -v } else { v });
    }
    s.parse::<BigInt>().ok().map(BigRational::from_integer)
}

pub fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Exact `f64 -> Rational`; `None` for non-finite input.
pub fn rational_from_f64(x: f64) -> Option<Rational> {
    BigRational::from_float(x)
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // huge numerators/denominators: shift both down first
        let n = r.numer().bits() as i64;
        let d = r.denom().bits() as i64;
        let shift = (n.max(d) - 1000).max(0) as usize;
        let nf = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let df = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        nf / df
    })
}

pub fn lcm_big(a: &BigInt, b: &BigInt) -> BigInt {
    a.lcm(b)
}

/// Point of `Q^n`. Ordering is lexicographic on the coordinates, which is the
/// selection order used throughout the crate.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Exponent(pub Vec<Rational>);

impl Exponent {
    pub fn zero(n: usize) -> Self {
        Exponent(vec![Rational::zero(); n])
    }

    pub fn from_ints(v: &[i64]) -> Self {
        Exponent(v.iter().map(|&x| int(x)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn is_integer(&self) -> bool {
        self.0.iter().all(|c| c.is_integer())
    }

    /// All coordinates are even integers.
    pub fn is_even(&self) -> bool {
        self.0.iter().all(|c| c.is_integer() && c.numer().is_even())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|c| !c.is_negative())
    }

    /// Every coordinate has an odd denominator.
    pub fn has_odd_denominators(&self) -> bool {
        self.0.iter().all(|c| c.denom().is_odd())
    }

    /// Every coordinate has an even numerator (zero counts as even).
    pub fn has_even_numerators(&self) -> bool {
        self.0.iter().all(|c| c.numer().is_even())
    }

    pub fn scale(&self, s: &Rational) -> Exponent {
        Exponent(self.0.iter().map(|c| c * s).collect())
    }

    pub fn half(&self) -> Exponent {
        self.scale(&rat(1, 2))
    }

    pub fn double(&self) -> Exponent {
        self.scale(&int(2))
    }

    pub fn midpoint(&self, other: &Exponent) -> Exponent {
        (self + other).half()
    }

    /// `(1 - t) self + t other`.
    pub fn lerp(&self, other: &Exponent, t: &Rational) -> Exponent {
        let one_t = Rational::one() - t;
        Exponent(self.0.iter().zip(&other.0).map(|(a, b)| a * &one_t + b * t).collect())
    }

    /// Least common multiple of the coordinate denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        self.0.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(rational_to_f64).collect()
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(fmt_rational).collect()
    }

    pub fn from_strings<S: AsRef<str>>(v: &[S]) -> Option<Exponent> {
        v.iter().map(|s| parse_rational(s.as_ref())).collect::<Option<Vec<_>>>().map(Exponent)
    }
}

impl Add for &Exponent {
    type Output = Exponent;
    fn add(self, o: &Exponent) -> Exponent {
        Exponent(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Exponent {
    type Output = Exponent;
    fn sub(self, o: &Exponent) -> Exponent {
        Exponent(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", fmt_rational(c))?;
        }
        write!(f, ")")
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        Exponent::from_strings(&v).ok_or_else(|| serde::de::Error::custom("bad rational coordinate"))
    }
}

/// Serde helpers for rationals written as `"p/q"` strings.
pub mod rational_str {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(fmt_rational).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_rational(s).ok_or_else(|| serde::de::Error::custom("bad rational")))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rational("3/6"), Some(rat(1, 2)));
        assert_eq!(parse_rational("-4"), Some(int(-4)));
        assert_eq!(parse_rational("0.25"), Some(rat(1, 4)));
        assert_eq!(parse_rational("-1.5"), Some(rat(-3, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
    }

    #[test]
    fn parity_predicates() {
        let e = Exponent(vec![rat(2, 3), rat(4, 1), int(0)]);
        assert!(e.has_odd_denominators());
        assert!(e.has_even_numerators());
        assert!(!e.is_even());
        assert!(Exponent::from_ints(&[4, 2]).is_even());
        assert!(!Exponent(vec![rat(1, 2)]).has_odd_denominators());
    }

    #[test]
    fn lerp_and_midpoint() {
        let a = Exponent::from_ints(&[0, 0]);
        let b = Exponent::from_ints(&[4, 2]);
        assert_eq!(a.lerp(&b, &rat(1, 2)), Exponent::from_ints(&[2, 1]));
        assert_eq!(a.midpoint(&b), Exponent::from_ints(&[2, 1]));
        assert_eq!(Exponent(vec![rat(1, 6), rat(3, 4)]).denominator_lcm(), BigInt::from(12));
    }

    #[test]
    fn huge_rationals_convert() {
        let big = num_traits::pow(BigInt::from(10), 400);
        let r = BigRational::new(big.clone() * 3, big);
        assert!((rational_to_f64(&r) - 3.0).abs() < 1e-12);
    }
}
