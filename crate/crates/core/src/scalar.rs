//! Coefficient rings shared by every engine: exact big rationals, `f64`,
//! and dual numbers `a + εa′` over either.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational used for every symbolic coefficient.
pub type Rational = BigRational;

/// Builds an exact rational `num/den`.
///
/// Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact integer as a rational.
pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// A commutative ring with a partial inverse.
///
/// Implemented for [`Rational`], `f64` and [`Dual`]. Arithmetic is by value;
/// callers clone where needed.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
    fn from_i64(v: i64) -> Self;

    fn from_rational(v: &Rational) -> Self;

    /// Multiplicative inverse, `None` when the element is not a unit.
    fn try_inv(&self) -> Option<Self>;

    /// Zero test; exact for rationals, `|x| <= tol` for floats.
    fn is_negligible(&self, tol: f64) -> bool;

    fn to_f64(&self) -> f64;

    /// Tag naming the arithmetic mode, used in serialized payloads.
    fn mode() -> &'static str;

    fn pow(&self, exp: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..exp {
            acc = acc * self.clone();
        }
        acc
    }
}

impl Scalar for Rational {
    fn from_i64(v: i64) -> Self {
        int(v)
    }

    fn from_rational(v: &Rational) -> Self {
        v.clone()
    }

    fn try_inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.recip())
        }
    }

    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn mode() -> &'static str {
        "exact"
    }
}

impl Scalar for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_rational(v: &Rational) -> Self {
        ToPrimitive::to_f64(v).unwrap_or(f64::NAN)
    }

    fn try_inv(&self) -> Option<Self> {
        if *self == 0.0 {
            None
        } else {
            Some(1.0 / self)
        }
    }

    fn is_negligible(&self, tol: f64) -> bool {
        self.abs() <= tol
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn mode() -> &'static str {
        "float"
    }
}

/// Dual number `re + ε·eps` with `ε² = 0`.
///
/// This is the 2×2 upper-triangular matrix `(re eps; 0 re)`; the ε-part of a
/// product obeys the Leibniz rule.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

impl<T> Dual<T> {
    pub const fn new(re: T, eps: T) -> Self {
        Dual { re, eps }
    }
}

impl<T: Scalar> Dual<T> {
    /// Embeds a plain value with zero ε-part.
    pub fn real(re: T) -> Self {
        Dual { re, eps: T::zero() }
    }

    /// The nilpotent generator `ε`.
    pub fn epsilon() -> Self {
        Dual { re: T::zero(), eps: T::one() }
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Dual { re: self.re + rhs.re, eps: self.eps + rhs.eps }
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Dual { re: self.re - rhs.re, eps: self.eps - rhs.eps }
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let eps = self.re.clone() * rhs.eps + self.eps * rhs.re.clone();
        Dual { re: self.re * rhs.re, eps }
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual { re: -self.re, eps: -self.eps }
    }
}

impl<T: Scalar> Zero for Dual<T> {
    fn zero() -> Self {
        Dual { re: T::zero(), eps: T::zero() }
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.eps.is_zero()
    }
}

impl<T: Scalar> One for Dual<T> {
    fn one() -> Self {
        Dual::real(T::one())
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn from_i64(v: i64) -> Self {
        Dual::real(T::from_i64(v))
    }

    fn from_rational(v: &Rational) -> Self {
        Dual::real(T::from_rational(v))
    }

    /// `(a + εb)⁻¹ = a⁻¹ − ε b a⁻²`.
    fn try_inv(&self) -> Option<Self> {
        let inv = self.re.try_inv()?;
        let eps = -(self.eps.clone() * inv.clone() * inv.clone());
        Some(Dual { re: inv, eps })
    }

    fn is_negligible(&self, tol: f64) -> bool {
        self.re.is_negligible(tol) && self.eps.is_negligible(tol)
    }

    fn to_f64(&self) -> f64 {
        self.re.to_f64()
    }

    fn mode() -> &'static str {
        T::mode()
    }
}

impl<T: fmt::Display> fmt::Display for Dual<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + ε·{})", self.re, self.eps)
    }
}

/// Renders a rational as `"p"` or `"p/q"`.
pub fn format_rational(v: &Rational) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

/// Parses `"p"`, `"p/q"` or a finite decimal such as `"-0.25"`.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        let negative = whole.starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), frac);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let mut num: BigInt = digits.parse().ok()?;
        if negative {
            num = -num;
        }
        let den = num_traits::pow(BigInt::from(10), frac.len());
        return Some(Rational::new(num, den));
    }
    text.parse::<BigInt>().ok().map(Rational::from_integer)
}

/// `n!` as a big integer.
pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Binomial coefficient `C(n, k)`, zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Catalan number `C_n = C(2n, n)/(n+1)`.
pub fn catalan(n: u64) -> BigInt {
    binomial(2 * n, n) / BigInt::from(n + 1)
}

/// Sign of a rational as -1, 0 or 1.
pub fn signum(v: &Rational) -> i32 {
    if v.is_zero() {
        0
    } else if v.is_positive() {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_product_is_leibniz() {
        let a = Dual::new(int(3), int(5));
        let b = Dual::new(int(-2), int(7));
        let p = a * b;
        assert_eq!(p.re, int(-6));
        assert_eq!(p.eps, int(3 * 7 + 5 * -2));
    }

    #[test]
    fn dual_inverse() {
        let a = Dual::new(rat(2, 3), int(4));
        let inv = a.try_inv().unwrap();
        assert_eq!(a * inv, Dual::one());
        assert!(Dual::new(int(0), int(1)).try_inv().is_none());
    }

    #[test]
    fn rational_parse_and_format() {
        assert_eq!(parse_rational("3/6"), Some(rat(1, 2)));
        assert_eq!(parse_rational("-0.25"), Some(rat(-1, 4)));
        assert_eq!(parse_rational("7"), Some(int(7)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
        assert_eq!(format_rational(&rat(-10, 4)), "-5/2");
        assert_eq!(format_rational(&int(42)), "42");
    }

    #[test]
    fn counting_helpers() {
        assert_eq!(binomial(8, 3), BigInt::from(56));
        assert_eq!(binomial(3, 5), BigInt::zero());
        let cats: Vec<BigInt> = (0..7).map(catalan).collect();
        let expected: Vec<BigInt> = [1, 1, 2, 5, 14, 42, 132].iter().map(|&v| BigInt::from(v)).collect();
        assert_eq!(cats, expected);
        assert_eq!(factorial(5), BigInt::from(120));
    }
}
