//! Numeric backing for chains: exact rationals or 64-bit floats.
//!
//! Every algorithm in the crate is generic over [`Scalar`], so the same code
//! path produces exact certificates and fast float sweeps.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational.
pub type Rational = BigRational;

/// Which numeric tower a chain is backed by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NumericMode {
    Exact,
    Float,
}

impl std::str::FromStr for NumericMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "float" => Ok(Self::Float),
            other => Err(Error::Parse(format!("numeric mode must be exact or float, got {other:?}"))),
        }
    }
}

impl std::fmt::Display for NumericMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Exact => "exact",
            Self::Float => "float",
        })
    }
}

pub trait Scalar:
    Num + Signed + Clone + PartialOrd + Debug + Display + Send + Sync + Sum + 'static
{
    const MODE: NumericMode;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_int(k: i64) -> Self {
        Self::from_ratio(k, 1)
    }

    fn to_f64(&self) -> f64;

    /// Admissible error on row sums and distribution totals.
    fn sum_tolerance() -> Self;

    /// Slack used when testing strict inequalities (zero in exact mode).
    fn slack() -> Self;

    /// Lossless text form: `p/q` for rationals, shortest round-trip float otherwise.
    fn to_text(&self) -> String;

    fn from_text(s: &str) -> Result<Self>;

    fn is_exact() -> bool {
        Self::MODE == NumericMode::Exact
    }
}

impl Scalar for Rational {
    const MODE: NumericMode = NumericMode::Exact;

    fn from_ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        // Large numerators/denominators overflow f64 individually; scale first.
        match (self.numer().to_f64(), self.denom().to_f64()) {
            (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
            _ => {
                let shift = self.denom().bits().saturating_sub(900) as usize;
                let n = (self.numer() >> shift).to_f64().unwrap_or(f64::NAN);
                let d = (self.denom() >> shift).to_f64().unwrap_or(f64::NAN);
                n / d
            }
        }
    }

    fn sum_tolerance() -> Self {
        Rational::zero()
    }

    fn slack() -> Self {
        Rational::zero()
    }

    fn to_text(&self) -> String {
        format_rational(self)
    }

    fn from_text(s: &str) -> Result<Self> {
        parse_rational(s)
    }
}

impl Scalar for f64 {
    const MODE: NumericMode = NumericMode::Float;

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn sum_tolerance() -> Self {
        1e-12
    }

    fn slack() -> Self {
        1e-9
    }

    fn to_text(&self) -> String {
        format!("{self}")
    }

    fn from_text(s: &str) -> Result<Self> {
        if s.contains('/') {
            return Ok(Scalar::to_f64(&parse_rational(s)?));
        }
        s.trim()
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("{s:?}: {e}")))
    }
}

/// `p/q` with `q > 0`; integers print without the denominator.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Accepts `p/q`, integers and finite decimals (`0.75` becomes `3/4`).
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(Rational::new(digits, den));
    }
    let k: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(k))
}

pub fn rational(num: i64, den: i64) -> Rational {
    Rational::from_ratio(num, den)
}

/// Converts between numeric towers through the text form.
pub fn convert<A: Scalar, B: Scalar>(x: &A) -> B {
    match (A::MODE, B::MODE) {
        (NumericMode::Float, NumericMode::Exact) => {
            let r = Rational::from_float(x.to_f64()).expect("finite float");
            B::from_text(&format_rational(&r)).expect("rational text")
        }
        _ => B::from_text(&x.to_text()).expect("scalar text"),
    }
}

/// Serde helper: writes any scalar in its lossless text form.
pub fn as_text<S: Scalar, Ser: serde::Serializer>(value: &S, ser: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
    ser.serialize_str(&value.to_text())
}

pub fn vec_as_text<S: Scalar, Ser: serde::Serializer>(values: &[S], ser: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
    ser.collect_seq(values.iter().map(Scalar::to_text))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("3/4").unwrap(), rational(3, 4));
        assert_eq!(parse_rational("0.75").unwrap(), rational(3, 4));
        assert_eq!(parse_rational("-2").unwrap(), rational(-2, 1));
        assert_eq!(parse_rational(" 6/8 ").unwrap(), rational(3, 4));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1.").is_err());
    }

    #[test]
    fn text_round_trip() {
        let r = rational(104, 7);
        assert_eq!(r.to_text(), "104/7");
        assert_eq!(Rational::from_text(&r.to_text()).unwrap(), r);
        assert_eq!(rational(16, 1).to_text(), "16");
        assert_eq!(f64::from_text("1/4").unwrap(), 0.25);
    }

    #[test]
    fn huge_rationals_convert_to_float() {
        let big = num_traits::pow(BigInt::from(4), 2000);
        let r = Rational::new(big.clone() * 3, big * 4);
        assert!((Scalar::to_f64(&r) - 0.75).abs() < 1e-15);
        let tiny = Rational::new(BigInt::from(1), num_traits::pow(BigInt::from(2), 1500));
        assert_eq!(Scalar::to_f64(&tiny), 0.0);
    }

    #[test]
    fn convert_between_modes() {
        let x: f64 = convert(&rational(1, 3));
        assert!((x - 1.0 / 3.0).abs() < 1e-15);
        let r: Rational = convert(&0.5f64);
        assert_eq!(r, rational(1, 2));
    }
}
