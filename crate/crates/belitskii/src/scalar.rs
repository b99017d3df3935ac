//! The exact base field: Gaussian rationals ℚ(i).
//!
//! Every quantity in this crate is a [`Scalar`] — a complex number with
//! arbitrary-precision rational real and imaginary parts. There is no
//! floating point anywhere; all arithmetic is exact, so canonical forms
//! compare with plain equality.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use thiserror::Error;

/// An element of ℚ(i): `re + im·i` with both parts exact rationals.
///
/// `BigRational` keeps fractions reduced with positive denominators, so
/// structural equality is field equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Scalar {
    pub re: BigRational,
    pub im: BigRational,
}

/// Errors from [`parse_scalar`].
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScalarParseError {
    #[error("malformed scalar {0:?}")]
    MalformedScalar(String),
    #[error("zero denominator in scalar {0:?}")]
    ZeroDenominator(String),
}

impl Scalar {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Scalar { re, im }
    }

    pub fn zero() -> Self {
        Scalar::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar::new(BigRational::one(), BigRational::zero())
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        Scalar::new(BigRational::zero(), BigRational::one())
    }

    pub fn from_int(v: i64) -> Self {
        Scalar::new(BigRational::from_integer(BigInt::from(v)), BigRational::zero())
    }

    /// `num/den` as a real scalar. Panics if `den == 0`.
    pub fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Scalar::new(
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            BigRational::zero(),
        )
    }

    /// `re + im·i` from integer parts.
    pub fn from_parts(re: i64, im: i64) -> Self {
        Scalar::new(
            BigRational::from_integer(BigInt::from(re)),
            BigRational::from_integer(BigInt::from(im)),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    /// Complex conjugate.
    pub fn conj(&self) -> Self {
        Scalar::new(self.re.clone(), -self.im.clone())
    }

    /// Squared modulus `re² + im²` (a rational; zero iff self is zero).
    pub fn norm(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm();
        Some(Scalar::new(&self.re / &n, -&self.im / &n))
    }
}

/// Total order on ℚ(i): lexicographic by (re, im).
///
/// ℂ has no field-compatible order; this one exists purely to make
/// eigenvalue ordering (and hence every canonical form) deterministic.
pub fn scalar_total_order(a: &Scalar, b: &Scalar) -> Ordering {
    a.re.cmp(&b.re).then_with(|| a.im.cmp(&b.im))
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        scalar_total_order(self, other)
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        Scalar::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        Scalar::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        Scalar::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

/// Division panics on a zero divisor; use [`Scalar::inv`] when the divisor
/// is not known to be nonzero.
impl Div for &Scalar {
    type Output = Scalar;
    fn div(self, rhs: &Scalar) -> Scalar {
        let inv = rhs.inv().expect("scalar division by zero");
        self * &inv
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::new(-self.re.clone(), -self.im.clone())
    }
}

macro_rules! forward_owned {
    ($trait:ident, $method:ident) => {
        impl $trait for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

fn format_rat(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Scalar {
    /// Prints in the same grammar [`parse_scalar`] accepts; the output
    /// re-parses to an equal value.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        if self.im.is_zero() {
            return write!(f, "{}", format_rat(&self.re));
        }
        let im_part = {
            let mag = self.im.abs();
            let sign = if self.im.is_negative() { "-" } else { "+" };
            if mag.is_one() {
                (sign, String::new())
            } else {
                (sign, format_rat(&mag))
            }
        };
        if self.re.is_zero() {
            let lead = if im_part.0 == "-" { "-" } else { "" };
            write!(f, "{}{}i", lead, im_part.1)
        } else {
            write!(f, "{}{}{}i", format_rat(&self.re), im_part.0, im_part.1)
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek();
        if b.is_some() {
            self.pos += 1;
        }
        b
    }

    fn eat_sign(&mut self) -> Option<bool> {
        match self.peek() {
            Some(b'+') => {
                self.pos += 1;
                Some(false)
            }
            Some(b'-') => {
                self.pos += 1;
                Some(true)
            }
            _ => None,
        }
    }

    fn eat_digits(&mut self) -> Option<&'a [u8]> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if self.pos == start {
            None
        } else {
            Some(&self.bytes[start..self.pos])
        }
    }
}

fn digits_to_int(d: &[u8]) -> BigInt {
    // Safe: eat_digits only returns ASCII digits.
    std::str::from_utf8(d).unwrap().parse().unwrap()
}

/// Parse one rational `int ("/" posint)?`; the sign is handled by callers.
fn parse_rat(c: &mut Cursor, text: &str) -> Result<BigRational, ScalarParseError> {
    let numer = c
        .eat_digits()
        .ok_or_else(|| ScalarParseError::MalformedScalar(text.to_string()))?;
    let numer = digits_to_int(numer);
    if c.peek() == Some(b'/') {
        c.bump();
        let denom = c
            .eat_digits()
            .ok_or_else(|| ScalarParseError::MalformedScalar(text.to_string()))?;
        let denom = digits_to_int(denom);
        if denom.is_zero() {
            return Err(ScalarParseError::ZeroDenominator(text.to_string()));
        }
        Ok(BigRational::new(numer, denom))
    } else {
        Ok(BigRational::from_integer(numer))
    }
}

fn signed(neg: bool, r: BigRational) -> BigRational {
    if neg {
        -r
    } else {
        r
    }
}

/// Parse the scalar grammar
/// `sign? rat ( sign rat? "i" )?  |  sign? rat? "i"`
/// with `rat = int ("/" posint)?`. No whitespace is allowed.
pub fn parse_scalar(text: &str) -> Result<Scalar, ScalarParseError> {
    let malformed = || ScalarParseError::MalformedScalar(text.to_string());
    let mut c = Cursor {
        bytes: text.as_bytes(),
        pos: 0,
    };
    let neg1 = c.eat_sign().unwrap_or(false);

    // Leading `i` with no magnitude: "i", "-i", "+i".
    if c.peek() == Some(b'i') {
        c.bump();
        if c.peek().is_some() {
            return Err(malformed());
        }
        return Ok(Scalar::new(
            BigRational::zero(),
            signed(neg1, BigRational::one()),
        ));
    }

    let first = parse_rat(&mut c, text)?;
    match c.peek() {
        None => Ok(Scalar::new(signed(neg1, first), BigRational::zero())),
        Some(b'i') => {
            c.bump();
            if c.peek().is_some() {
                return Err(malformed());
            }
            Ok(Scalar::new(BigRational::zero(), signed(neg1, first)))
        }
        Some(b'+') | Some(b'-') => {
            let neg2 = c.eat_sign().unwrap();
            let mag = if c.peek() == Some(b'i') {
                BigRational::one()
            } else {
                parse_rat(&mut c, text)?
            };
            if c.bump() != Some(b'i') || c.peek().is_some() {
                return Err(malformed());
            }
            Ok(Scalar::new(signed(neg1, first), signed(neg2, mag)))
        }
        Some(_) => Err(malformed()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(text: &str) -> Scalar {
        parse_scalar(text).unwrap()
    }

    #[test]
    fn parses_basic_forms() {
        assert_eq!(s("0"), Scalar::zero());
        assert_eq!(s("1/2-3/4i"), Scalar::new(
            BigRational::new(1.into(), 2.into()),
            BigRational::new((-3).into(), 4.into()),
        ));
        assert_eq!(s("i"), Scalar::i());
        assert_eq!(s("-i"), -Scalar::i());
        assert_eq!(s("+i"), Scalar::i());
        assert_eq!(s("3i"), Scalar::from_parts(0, 3));
        assert_eq!(s("-7/2"), Scalar::from_ratio(-7, 2));
        assert_eq!(s("3+i"), Scalar::from_parts(3, 1));
        assert_eq!(s("3-i"), Scalar::from_parts(3, -1));
        assert_eq!(s("003"), Scalar::from_int(3));
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["", "+", "-", "3+4", "1 + i", "i3", "3ii", "3+-4i", "3/", "/4", "1.5", "3i4"] {
            assert!(
                matches!(parse_scalar(bad), Err(ScalarParseError::MalformedScalar(_))),
                "expected malformed: {bad:?}"
            );
        }
    }

    #[test]
    fn rejects_zero_denominator() {
        assert!(matches!(
            parse_scalar("1/0"),
            Err(ScalarParseError::ZeroDenominator(_))
        ));
        assert!(matches!(
            parse_scalar("2-3/0i"),
            Err(ScalarParseError::ZeroDenominator(_))
        ));
    }

    #[test]
    fn total_order_is_lex() {
        assert_eq!(scalar_total_order(&s("1"), &s("1")), Ordering::Equal);
        assert_eq!(scalar_total_order(&s("5i"), &s("1-5i")), Ordering::Less);
        assert_eq!(scalar_total_order(&s("2-i"), &s("2")), Ordering::Less);
    }

    #[test]
    fn display_round_trips_special_cases() {
        for text in ["0", "1", "-1", "i", "-i", "3i", "-3i", "1/2", "3+i", "3-i", "1/2-3/4i", "-2+5/3i"] {
            let v = s(text);
            assert_eq!(s(&v.to_string()), v, "round trip through {:?}", v.to_string());
        }
        assert_eq!(s("3+1i").to_string(), "3+i");
        assert_eq!(s("0i").to_string(), "0");
    }

    #[test]
    fn field_arithmetic() {
        let a = s("1/2-3/4i");
        let b = s("2+i");
        assert_eq!(&(&a + &b) - &b, a);
        assert_eq!(&(&a * &b) / &b, a);
        assert_eq!(&a * &a.inv().unwrap(), Scalar::one());
        assert_eq!(Scalar::zero().inv(), None);
        assert_eq!(&Scalar::i() * &Scalar::i(), Scalar::from_int(-1));
    }

    fn arb_rat() -> impl Strategy<Value = BigRational> {
        (-20i64..=20, 1i64..=12)
            .prop_map(|(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    fn arb_scalar() -> impl Strategy<Value = Scalar> {
        (arb_rat(), arb_rat()).prop_map(|(re, im)| Scalar::new(re, im))
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(v in arb_scalar()) {
            prop_assert_eq!(s(&v.to_string()), v);
        }

        #[test]
        fn exact_ops(a in arb_scalar(), b in arb_scalar()) {
            prop_assert_eq!(&(&a + &b) - &b, a.clone());
            if !b.is_zero() {
                prop_assert_eq!(&(&a * &b) / &b, a);
            }
        }

        #[test]
        fn order_total_and_antisymmetric(a in arb_scalar(), b in arb_scalar()) {
            let ab = scalar_total_order(&a, &b);
            let ba = scalar_total_order(&b, &a);
            prop_assert_eq!(ab, ba.reverse());
            prop_assert_eq!(ab == Ordering::Equal, a == b);
        }
    }
}
