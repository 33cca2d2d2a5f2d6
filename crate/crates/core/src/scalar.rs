//! Scalar abstraction shared by every computation in the crate.
//!
//! All auction arithmetic is generic over [`Scalar`]. Floating point types
//! (`f32`, `f64`) are supported for speed, and [`BigRational`] for exact
//! results on tables with decimal inputs such as `0.6` or `14.2`.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

pub trait Scalar:
    Clone + Debug + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Parses `"14.2"`, `"-3"`, `"1e-9"` or `"71/5"`.
    fn from_decimal(text: &str) -> Option<Self>;

    /// Text that [`Scalar::from_decimal`] maps back to the same value.
    fn to_exact_string(&self) -> String;

    /// Strictly above zero. `Signed::is_positive` counts `0.0` as positive
    /// for floats.
    fn gt_zero(&self) -> bool {
        *self > Self::zero()
    }

    fn lt_zero(&self) -> bool {
        *self < Self::zero()
    }

    fn of_usize(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize fits in scalar")
    }

    /// Lossy view used for rendering and machine reports.
    fn approx(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn from_decimal(text: &str) -> Option<Self> {
        parse_float(text)
    }

    fn to_exact_string(&self) -> String {
        format!("{self:?}")
    }
}

impl Scalar for f32 {
    fn from_decimal(text: &str) -> Option<Self> {
        parse_float(text).map(|v| v as f32)
    }

    fn to_exact_string(&self) -> String {
        format!("{self:?}")
    }
}

fn parse_float(text: &str) -> Option<f64> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: f64 = num.trim().parse().ok()?;
        let den: f64 = den.trim().parse().ok()?;
        if den == 0.0 {
            return None;
        }
        return Some(num / den);
    }
    let v: f64 = text.parse().ok()?;
    v.is_finite().then_some(v)
}

impl Scalar for BigRational {
    fn from_decimal(text: &str) -> Option<Self> {
        parse_rational(text.trim())
    }

    fn to_exact_string(&self) -> String {
        rational_to_string(self)
    }
}

fn parse_rational(text: &str) -> Option<BigRational> {
    if let Some((num, den)) = text.split_once('/') {
        let num = parse_rational(num.trim())?;
        let den = parse_rational(den.trim())?;
        if den.is_zero() {
            return None;
        }
        return Some(num / den);
    }

    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(at) => (&text[..at], text[at + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }

    let digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u8);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

/// Terminating decimals print as decimals, everything else as `p/q`.
fn rational_to_string(value: &BigRational) -> String {
    let denom = value.denom();
    let mut rest = denom.clone();
    let (mut twos, mut fives) = (0usize, 0usize);
    let two = BigInt::from(2u8);
    let five = BigInt::from(5u8);
    while rest.is_multiple_of(&two) {
        rest /= &two;
        twos += 1;
    }
    while rest.is_multiple_of(&five) {
        rest /= &five;
        fives += 1;
    }
    if !rest.is_one() {
        return format!("{}/{}", value.numer(), denom);
    }

    let places = twos.max(fives);
    let scaled = value * BigRational::from_integer(num_traits::pow(BigInt::from(10u8), places));
    let digits = scaled.to_integer().abs().to_string();
    let sign = if value.is_negative() { "-" } else { "" };
    if places == 0 {
        return format!("{sign}{digits}");
    }
    let padded = format!("{digits:0>width$}", width = places + 1);
    let (int_part, frac_part) = padded.split_at(padded.len() - places);
    format!("{sign}{int_part}.{frac_part}")
}

/// `a > b` by more than `tol`.
pub fn gt<T: Scalar>(a: &T, b: &T, tol: &T) -> bool {
    *a > b.clone() + tol.clone()
}

/// `a >= b` allowing `a` to fall short by up to `tol`.
pub fn ge<T: Scalar>(a: &T, b: &T, tol: &T) -> bool {
    a.clone() + tol.clone() >= *b
}

pub fn approx_eq<T: Scalar>(a: &T, b: &T, tol: &T) -> bool {
    (a.clone() - b.clone()).abs() <= *tol
}

pub fn max_of<T: Scalar>(a: T, b: T) -> T {
    if b > a {
        b
    } else {
        a
    }
}

pub fn sum<T: Scalar, I: IntoIterator<Item = T>>(items: I) -> T {
    items.into_iter().fold(T::zero(), |acc, v| acc + v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(text: &str) -> BigRational {
        BigRational::from_decimal(text).unwrap()
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(q("14.2"), BigRational::new(71.into(), 5.into()));
        assert_eq!(q("-0.15"), BigRational::new((-3).into(), 20.into()));
        assert_eq!(q("1e-9"), BigRational::new(1.into(), 1_000_000_000.into()));
        assert_eq!(q("2.5E2"), BigRational::from_integer(250.into()));
        assert_eq!(q("41/3"), BigRational::new(41.into(), 3.into()));
        assert_eq!(q(".5"), BigRational::new(1.into(), 2.into()));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "abc", "1.2.3", "1/0", "--1", "e5"] {
            assert!(BigRational::from_decimal(bad).is_none(), "{bad}");
        }
        assert!(f64::from_decimal("nan").is_none());
    }

    #[test]
    fn exact_strings() {
        assert_eq!(q("14.2").to_exact_string(), "14.2");
        assert_eq!(q("-0.05").to_exact_string(), "-0.05");
        assert_eq!(q("7").to_exact_string(), "7");
        assert_eq!(q("41/3").to_exact_string(), "41/3");
        assert_eq!(0.6f64.to_exact_string(), "0.6");
    }

    #[test]
    fn tolerance_comparisons() {
        let tol = 1e-9;
        assert!(!gt(&1.0, &1.0, &tol));
        assert!(ge(&(1.0 - 1e-12), &1.0, &tol));
        assert!(gt(&1.1, &1.0, &tol));
        assert!(approx_eq(&0.3, &(0.1 + 0.2), &tol));
    }

    proptest::proptest! {
        #[test]
        fn rational_text_round_trip(n in -1_000_000i64..1_000_000, d in 1i64..5000) {
            let v = BigRational::new(n.into(), d.into());
            proptest::prop_assert_eq!(BigRational::from_decimal(&v.to_exact_string()), Some(v));
        }
    }
}
