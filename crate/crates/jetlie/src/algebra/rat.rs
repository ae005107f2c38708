//! Exact rational numbers.
//!
//! Values that fit a machine word pair are kept inline; everything else falls
//! back to an arbitrary-precision fraction. The representation is canonical
//! (lowest terms, positive denominator, inline whenever possible), so derived
//! equality and hashing agree with numeric equality.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};

use crate::Error;

#[derive(Clone)]
enum Repr {
    Small(i64, i64),
    Big(Box<BigRational>),
}

/// An exact rational number in lowest terms.
#[derive(Clone)]
pub struct Rat(Repr);

fn gcd_i128(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Rat {
    pub fn zero() -> Rat {
        Rat(Repr::Small(0, 1))
    }

    pub fn one() -> Rat {
        Rat(Repr::Small(1, 1))
    }

    pub fn from_int(n: i64) -> Rat {
        Rat(Repr::Small(n, 1))
    }

    /// Builds `n/d`; panics when `d == 0`.
    pub fn new(n: i64, d: i64) -> Rat {
        assert!(d != 0, "zero denominator");
        Rat::from_i128(n as i128, d as i128)
    }

    fn from_i128(n: i128, d: i128) -> Rat {
        let (mut n, mut d) = (n, d);
        if d < 0 {
            n = -n;
            d = -d;
        }
        let g = gcd_i128(n, d);
        if g > 1 {
            n /= g;
            d /= g;
        }
        if n == 0 {
            return Rat::zero();
        }
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(a), Ok(b)) => Rat(Repr::Small(a, b)),
            _ => Rat(Repr::Big(Box::new(BigRational::new_raw(
                BigInt::from(n),
                BigInt::from(d),
            )))),
        }
    }

    fn from_big(r: BigRational) -> Rat {
        if let (Some(n), Some(d)) = (r.numer().to_i64(), r.denom().to_i64()) {
            return Rat(Repr::Small(n, d));
        }
        Rat(Repr::Big(Box::new(r)))
    }

    /// Builds a rational from big integer numerator and denominator.
    pub fn from_bigints(n: BigInt, d: BigInt) -> Result<Rat, Error> {
        if d.is_zero() {
            return Err(Error::Domain("zero denominator".into()));
        }
        Ok(Rat::from_big(BigRational::new(n, d)))
    }

    pub fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Repr::Big(b) => (**b).clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0, _))
    }

    pub fn is_one(&self) -> bool {
        matches!(self.0, Repr::Small(1, 1))
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(_, d) => *d == 1,
            Repr::Big(b) => b.is_integer(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n < 0,
            Repr::Big(b) => b.is_negative(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, _) => BigInt::from(*n),
            Repr::Big(b) => b.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small(_, d) => BigInt::from(*d),
            Repr::Big(b) => b.denom().clone(),
        }
    }

    pub fn abs(&self) -> Rat {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Multiplicative inverse; errors on zero.
    pub fn recip(&self) -> Result<Rat, Error> {
        if self.is_zero() {
            return Err(Error::Domain("division by zero".into()));
        }
        Ok(match &self.0 {
            Repr::Small(n, d) => Rat::from_i128(*d as i128, *n as i128),
            Repr::Big(b) => Rat::from_big(b.recip()),
        })
    }

    pub fn pow(&self, e: u32) -> Rat {
        let mut acc = Rat::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Converts to `i64` when integral and in range.
    pub fn to_i64(&self) -> Option<i64> {
        match &self.0 {
            Repr::Small(n, 1) => Some(*n),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small(n, d) => *n as f64 / *d as f64,
            Repr::Big(b) => b.to_f64().unwrap_or(f64::NAN),
        }
    }
}

impl Default for Rat {
    fn default() -> Rat {
        Rat::zero()
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Rat {
        Rat::from_int(n)
    }
}

impl From<i32> for Rat {
    fn from(n: i32) -> Rat {
        Rat::from_int(n as i64)
    }
}

impl From<u64> for Rat {
    fn from(n: u64) -> Rat {
        Rat::from_big(BigRational::from_integer(BigInt::from(n)))
    }
}

impl From<BigInt> for Rat {
    fn from(n: BigInt) -> Rat {
        Rat::from_big(BigRational::from_integer(n))
    }
}

impl PartialEq for Rat {
    fn eq(&self, other: &Rat) -> bool {
        match (&self.0, &other.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => a == c && b == d,
            (Repr::Big(x), Repr::Big(y)) => x == y,
            _ => false,
        }
    }
}

impl Eq for Rat {}

impl Hash for Rat {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match &self.0 {
            Repr::Small(n, d) => {
                0u8.hash(state);
                n.hash(state);
                d.hash(state);
            }
            Repr::Big(b) => {
                1u8.hash(state);
                b.numer().hash(state);
                b.denom().hash(state);
            }
        }
    }
}

impl PartialOrd for Rat {
    fn partial_cmp(&self, other: &Rat) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rat {
    fn cmp(&self, other: &Rat) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => {
                (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128))
            }
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

fn add_ref(a: &Rat, b: &Rat) -> Rat {
    match (&a.0, &b.0) {
        (Repr::Small(0, _), _) => b.clone(),
        (_, Repr::Small(0, _)) => a.clone(),
        (Repr::Small(n1, d1), Repr::Small(n2, d2)) => {
            if d1 == d2 {
                Rat::from_i128(*n1 as i128 + *n2 as i128, *d1 as i128)
            } else {
                Rat::from_i128(
                    *n1 as i128 * *d2 as i128 + *n2 as i128 * *d1 as i128,
                    *d1 as i128 * *d2 as i128,
                )
            }
        }
        _ => Rat::from_big(a.to_big() + b.to_big()),
    }
}

fn mul_ref(a: &Rat, b: &Rat) -> Rat {
    match (&a.0, &b.0) {
        (Repr::Small(0, _), _) | (_, Repr::Small(0, _)) => Rat::zero(),
        (Repr::Small(1, 1), _) => b.clone(),
        (_, Repr::Small(1, 1)) => a.clone(),
        (Repr::Small(n1, d1), Repr::Small(n2, d2)) => Rat::from_i128(
            *n1 as i128 * *n2 as i128,
            *d1 as i128 * *d2 as i128,
        ),
        _ => Rat::from_big(a.to_big() * b.to_big()),
    }
}

fn neg_ref(a: &Rat) -> Rat {
    match &a.0 {
        Repr::Small(n, d) => Rat::from_i128(-(*n as i128), *d as i128),
        Repr::Big(b) => Rat::from_big(-(**b).clone()),
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        neg_ref(self)
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        neg_ref(&self)
    }
}

macro_rules! binop {
    ($tr:ident, $f:ident, $body:expr) => {
        impl $tr<&Rat> for &Rat {
            type Output = Rat;
            fn $f(self, rhs: &Rat) -> Rat {
                $body(self, rhs)
            }
        }
        impl $tr<Rat> for Rat {
            type Output = Rat;
            fn $f(self, rhs: Rat) -> Rat {
                $body(&self, &rhs)
            }
        }
        impl $tr<&Rat> for Rat {
            type Output = Rat;
            fn $f(self, rhs: &Rat) -> Rat {
                $body(&self, rhs)
            }
        }
        impl $tr<Rat> for &Rat {
            type Output = Rat;
            fn $f(self, rhs: Rat) -> Rat {
                $body(self, &rhs)
            }
        }
    };
}

binop!(Add, add, add_ref);
binop!(Sub, sub, |a: &Rat, b: &Rat| add_ref(a, &neg_ref(b)));
binop!(Mul, mul, mul_ref);
binop!(Div, div, |a: &Rat, b: &Rat| mul_ref(
    a,
    &b.recip().expect("division by zero")
));

impl AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, rhs: &Rat) {
        *self = add_ref(self, rhs);
    }
}

impl AddAssign<Rat> for Rat {
    fn add_assign(&mut self, rhs: Rat) {
        *self = add_ref(self, &rhs);
    }
}

impl SubAssign<&Rat> for Rat {
    fn sub_assign(&mut self, rhs: &Rat) {
        *self = add_ref(self, &neg_ref(rhs));
    }
}

impl MulAssign<&Rat> for Rat {
    fn mul_assign(&mut self, rhs: &Rat) {
        *self = mul_ref(self, rhs);
    }
}

impl Zero for Rat {
    fn zero() -> Rat {
        Rat::zero()
    }
    fn is_zero(&self) -> bool {
        Rat::is_zero(self)
    }
}

impl One for Rat {
    fn one() -> Rat {
        Rat::one()
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(n, 1) => write!(f, "{n}"),
            Repr::Small(n, d) => write!(f, "{n}/{d}"),
            Repr::Big(b) => {
                if b.is_integer() {
                    write!(f, "{}", b.numer())
                } else {
                    write!(f, "{}/{}", b.numer(), b.denom())
                }
            }
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rat {
    type Err = Error;

    /// Parses `p` or `p/q`. Decimal notation is rejected.
    fn from_str(s: &str) -> Result<Rat, Error> {
        let s = s.trim();
        if s.contains('.') || s.contains('e') || s.contains('E') {
            return Err(Error::Domain(format!(
                "decimal literal `{s}` is not exact; write it as a fraction p/q"
            )));
        }
        let parse = |t: &str| {
            t.trim()
                .parse::<BigInt>()
                .map_err(|_| Error::Domain(format!("invalid rational literal `{s}`")))
        };
        match s.split_once('/') {
            Some((a, b)) => Rat::from_bigints(parse(a)?, parse(b)?),
            None => Ok(Rat::from(parse(s)?)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_forms() {
        assert_eq!(Rat::new(2, 4), Rat::new(1, 2));
        assert_eq!(Rat::new(3, -6), Rat::new(-1, 2));
        assert_eq!(Rat::new(0, -5), Rat::zero());
        assert_eq!(Rat::new(0, -5).to_string(), "0");
    }

    #[test]
    fn overflow_promotes_and_demotes() {
        let big = Rat::from_int(i64::MAX);
        let sq = &big * &big;
        assert!(matches!(sq.0, Repr::Big(_)));
        let back = &sq / &big;
        assert_eq!(back, big);
        assert!(matches!(back.0, Repr::Small(_, _)));
    }

    #[test]
    fn parse_and_reject_decimals() {
        assert_eq!("3/6".parse::<Rat>().unwrap(), Rat::new(1, 2));
        assert_eq!("-7".parse::<Rat>().unwrap(), Rat::from_int(-7));
        assert!("0.5".parse::<Rat>().is_err());
        assert!("1/0".parse::<Rat>().is_err());
    }

    #[test]
    fn ordering() {
        assert!(Rat::new(1, 3) < Rat::new(1, 2));
        assert!(Rat::new(-1, 2) < Rat::zero());
    }
}
