//! Exact complex coefficients with rational real and imaginary parts.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// A Gaussian rational `re + i·im`.
///
/// Ordering is lexicographic on `(re, im)`; it only exists so that
/// canonical forms can be sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coef {
    pub re: BigRational,
    pub im: BigRational,
}

impl Coef {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn zero() -> Self {
        Self::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn i() -> Self {
        Self::new(BigRational::zero(), BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Self::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::new(
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            BigRational::zero(),
        )
    }

    /// Exact binary value of an `f64`; non-finite input yields `None`.
    pub fn from_f64(re: f64) -> Option<Self> {
        Some(Self::new(BigRational::from_float(re)?, BigRational::zero()))
    }

    pub fn from_complex64(z: Complex64) -> Option<Self> {
        Some(Self::new(
            BigRational::from_float(z.re)?,
            BigRational::from_float(z.im)?,
        ))
    }

    /// Parses a decimal literal such as `12`, `0.25` or `1.5e-3` exactly.
    pub fn from_decimal_str(s: &str) -> Option<Self> {
        let (mantissa, exp) = match s.find(['e', 'E']) {
            Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
            None => (s, 0),
        };
        let (int_part, frac_part) = match mantissa.find('.') {
            Some(pos) => (&mantissa[..pos], &mantissa[pos + 1..]),
            None => (mantissa, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        let digits = format!("{int_part}{frac_part}");
        let num: BigInt = digits.parse().ok()?;
        let scale = exp - frac_part.len() as i32;
        let ten = BigInt::from(10);
        let value = if scale >= 0 {
            BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
        } else {
            BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
        };
        Some(Self::new(value, BigRational::zero()))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let norm = &self.re * &self.re + &self.im * &self.im;
        Some(Self::new(&self.re / &norm, -(&self.im / &norm)))
    }

    /// Integer power; negative exponents require a nonzero base.
    pub fn powi(&self, n: i32) -> Option<Self> {
        let base = if n < 0 { self.recip()? } else { self.clone() };
        let mut acc = Self::one();
        let mut sq = base;
        let mut k = n.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &sq;
            }
            k >>= 1;
            if k > 0 {
                sq = &sq * &sq;
            }
        }
        Some(acc)
    }

    pub fn to_complex64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

impl Default for Coef {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i64> for Coef {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl<'a> Add<&'a Coef> for &'a Coef {
    type Output = Coef;
    fn add(self, rhs: &Coef) -> Coef {
        Coef::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl<'a> Sub<&'a Coef> for &'a Coef {
    type Output = Coef;
    fn sub(self, rhs: &Coef) -> Coef {
        Coef::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl<'a> Mul<&'a Coef> for &'a Coef {
    type Output = Coef;
    fn mul(self, rhs: &Coef) -> Coef {
        if self.im.is_zero() && rhs.im.is_zero() {
            return Coef::new(&self.re * &rhs.re, BigRational::zero());
        }
        Coef::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl<'a> Div<&'a Coef> for &'a Coef {
    type Output = Option<Coef>;
    fn div(self, rhs: &Coef) -> Option<Coef> {
        Some(self * &rhs.recip()?)
    }
}

impl Add for Coef {
    type Output = Coef;
    fn add(self, rhs: Coef) -> Coef {
        &self + &rhs
    }
}

impl Mul for Coef {
    type Output = Coef;
    fn mul(self, rhs: Coef) -> Coef {
        &self * &rhs
    }
}

impl Neg for Coef {
    type Output = Coef;
    fn neg(self) -> Coef {
        Coef::new(-self.re, -self.im)
    }
}

impl<'a> Neg for &'a Coef {
    type Output = Coef;
    fn neg(self) -> Coef {
        Coef::new(-self.re.clone(), -self.im.clone())
    }
}

fn fmt_rational(r: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Coef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => fmt_rational(&self.re, f),
            (true, false) => {
                if self.im.is_one() {
                    write!(f, "i")
                } else if (-self.im.clone()).is_one() {
                    write!(f, "-i")
                } else {
                    fmt_rational(&self.im, f)?;
                    write!(f, "*i")
                }
            }
            (false, false) => {
                write!(f, "(")?;
                fmt_rational(&self.re, f)?;
                if self.im.is_negative() {
                    write!(f, " - ")?;
                    fmt_rational(&self.im.abs(), f)?;
                } else {
                    write!(f, " + ")?;
                    fmt_rational(&self.im, f)?;
                }
                write!(f, "*i)")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_parsing_is_exact() {
        assert_eq!(Coef::from_decimal_str("0.3").unwrap(), Coef::from_ratio(3, 10));
        assert_eq!(Coef::from_decimal_str("1.5e-3").unwrap(), Coef::from_ratio(3, 2000));
        assert_eq!(Coef::from_decimal_str("12").unwrap(), Coef::from_int(12));
        assert_eq!(Coef::from_decimal_str("2E2").unwrap(), Coef::from_int(200));
        assert!(Coef::from_decimal_str(".").is_none());
    }

    #[test]
    fn gaussian_arithmetic() {
        let a = Coef::new(BigRational::from_integer(1.into()), BigRational::from_integer(2.into()));
        let b = a.conj();
        assert_eq!(&a * &b, Coef::from_int(5));
        assert_eq!((&a / &a).unwrap(), Coef::one());
        assert_eq!(Coef::i().powi(2).unwrap(), Coef::from_int(-1));
        assert_eq!(Coef::i().powi(-1).unwrap(), -Coef::i());
        assert!(Coef::zero().recip().is_none());
    }
}
