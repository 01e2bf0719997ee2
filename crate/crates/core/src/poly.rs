//! Exact Laurent polynomials in `N` (and optionally `M`) with big-rational
//! coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde_json::{json, Map, Value};

use crate::scalar::{binomial, format_rational, Rational, Scalar};

/// `M^m · N^n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub m: u32,
    pub n: i32,
}

/// Sparse polynomial; zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LaurentPoly {
    terms: BTreeMap<Monomial, Rational>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        LaurentPoly::default()
    }

    pub fn constant(c: Rational) -> Self {
        LaurentPoly::term(0, 0, c)
    }

    /// `c · M^m N^n`.
    pub fn term(m: u32, n: i32, c: Rational) -> Self {
        let mut p = LaurentPoly::zero();
        p.add_term(Monomial { m, n }, c);
        p
    }

    /// `Σ coeffs[k] N^{−k}`.
    pub fn from_inverse_powers(coeffs: &[Rational]) -> Self {
        let mut p = LaurentPoly::zero();
        for (k, c) in coeffs.iter().enumerate() {
            p.add_term(Monomial { m: 0, n: -(k as i32) }, c.clone());
        }
        p
    }

    pub fn add_term(&mut self, mono: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(mono).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&mono);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    /// True when no power of `M` appears.
    pub fn is_univariate(&self) -> bool {
        self.terms.keys().all(|k| k.m == 0)
    }

    pub fn coefficient(&self, m: u32, n: i32) -> Rational {
        self.terms.get(&Monomial { m, n }).cloned().unwrap_or_else(Rational::zero)
    }

    /// Coefficient of `N^{−k}` (with `M⁰`).
    pub fn coeff_inv(&self, k: u32) -> Rational {
        self.coefficient(0, -(k as i32))
    }

    /// Coefficients of `N⁰, N⁻¹, …` up to the lowest power present.
    /// Fails on positive powers of `N` or on any `M`.
    pub fn inverse_power_coeffs(&self) -> Option<Vec<Rational>> {
        if !self.is_univariate() || self.terms.keys().any(|k| k.n > 0) {
            return None;
        }
        let depth = self.terms.keys().map(|k| (-k.n) as usize).max().map_or(0, |d| d + 1);
        Some((0..depth).map(|k| self.coeff_inv(k as u32)).collect())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = LaurentPoly::zero();
        for (k, v) in &self.terms {
            out.add_term(*k, v * c);
        }
        out
    }

    /// Evaluates at `M = m`, `N = n` in any scalar ring.
    pub fn eval<T: Scalar>(&self, m: &T, n: &T) -> Option<T> {
        let n_inv = n.try_inv();
        let mut acc = T::zero();
        for (k, c) in &self.terms {
            let n_pow = if k.n >= 0 { n.pow(k.n as u32) } else { n_inv.as_ref()?.pow(k.n.unsigned_abs()) };
            acc = acc + T::from_rational(c) * m.pow(k.m) * n_pow;
        }
        Some(acc)
    }

    /// Exact evaluation of a univariate polynomial at `N = n`.
    pub fn eval_n(&self, n: &Rational) -> Option<Rational> {
        if !self.is_univariate() {
            return None;
        }
        self.eval(&Rational::zero(), n)
    }

    /// Substitutes `M = cN + c′`, leaving a polynomial in `N` alone.
    pub fn substitute_m(&self, c: &Rational, c_prime: &Rational) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (k, coeff) in &self.terms {
            for j in 0..=k.m {
                let weight = Rational::from_integer(binomial(k.m as u64, j as u64))
                    * Scalar::pow(c, j)
                    * Scalar::pow(c_prime, k.m - j);
                out.add_term(Monomial { m: 0, n: k.n + j as i32 }, coeff * weight);
            }
        }
        out
    }

    /// `{"variable": "N^-1", "terms": {"k": "p/q"}}` for univariate data in
    /// `N⁻¹`; otherwise `{"variable": "M,N^-1", "terms": {"a,b": ...}}`
    /// keyed by `M^a N^{−b}`.
    pub fn to_json(&self) -> Value {
        let mut terms = Map::new();
        if self.is_univariate() {
            for (k, c) in &self.terms {
                terms.insert((-k.n).to_string(), json!(format_rational(c)));
            }
            json!({ "variable": "N^-1", "terms": terms })
        } else {
            for (k, c) in &self.terms {
                terms.insert(format!("{},{}", k.m, -k.n), json!(format_rational(c)));
            }
            json!({ "variable": "M,N^-1", "terms": terms })
        }
    }
}

impl Add for LaurentPoly {
    type Output = LaurentPoly;
    fn add(mut self, rhs: LaurentPoly) -> LaurentPoly {
        for (k, c) in rhs.terms {
            self.add_term(k, c);
        }
        self
    }
}

impl Sub for LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: LaurentPoly) -> LaurentPoly {
        self + (-rhs)
    }
}

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly { terms: self.terms.into_iter().map(|(k, c)| (k, -c)).collect() }
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (a, x) in &self.terms {
            for (b, y) in &rhs.terms {
                out.add_term(Monomial { m: a.m + b.m, n: a.n + b.n }, x * y);
            }
        }
        out
    }
}

impl Mul for LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: LaurentPoly) -> LaurentPoly {
        &self * &rhs
    }
}

impl fmt::Display for LaurentPoly {
    /// Highest power of `N` first, e.g. `2 + 5N^-1 + 5N^-2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.terms.iter().rev() {
            let negative = c < &Rational::zero();
            let magnitude = if negative { -c.clone() } else { c.clone() };
            if first {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative { "-" } else { "+" })?;
            }
            first = false;
            let mut vars = String::new();
            match k.m {
                0 => {}
                1 => vars.push('M'),
                m => vars.push_str(&format!("M^{m}")),
            }
            match k.n {
                0 => {}
                1 => vars.push('N'),
                n => vars.push_str(&format!("N^{n}")),
            }
            if vars.is_empty() {
                write!(f, "{}", format_rational(&magnitude))?;
            } else if magnitude.is_one() {
                write!(f, "{vars}")?;
            } else {
                write!(f, "{}{vars}", format_rational(&magnitude))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn inv(coeffs: &[i64]) -> LaurentPoly {
        LaurentPoly::from_inverse_powers(&coeffs.iter().map(|&c| int(c)).collect::<Vec<_>>())
    }

    #[test]
    fn arithmetic_and_display() {
        let p = inv(&[2, 5, 5]);
        assert_eq!(p.to_string(), "2 + 5N^-1 + 5N^-2");
        assert_eq!((p.clone() - p.clone()).to_string(), "0");
        let q = LaurentPoly::term(1, -1, int(1));
        assert_eq!((&q * &q).to_string(), "M^2N^-2");
        assert_eq!((inv(&[1, -1]) * inv(&[1, 1])).to_string(), "1 - N^-2");
    }

    #[test]
    fn evaluation() {
        let p = inv(&[2, 5, 5]);
        assert_eq!(p.eval_n(&int(50)), Some(int(2) + rat(5, 50) + rat(5, 2500)));
        assert!((p.eval(&0.0, &50.0).unwrap() - 2.102).abs() < 1e-12);
        let w = LaurentPoly::term(2, -2, int(1)) + LaurentPoly::term(1, -1, int(1));
        assert_eq!(w.eval(&int(6), &int(3)), Some(int(6)));
    }

    #[test]
    fn substitution_extracts_limits() {
        // M²N⁻² + MN⁻¹ at M = cN + c′.
        let w = LaurentPoly::term(2, -2, int(1)) + LaurentPoly::term(1, -1, int(1));
        let (c, cp) = (int(2), int(3));
        let s = w.substitute_m(&c, &cp);
        assert_eq!(s.coeff_inv(0), &c * &c + &c);
        assert_eq!(s.coeff_inv(1), int(2) * &c * &cp + &cp);
        assert_eq!(s.coeff_inv(2), &cp * &cp);
    }

    #[test]
    fn json_encoding() {
        let p = inv(&[1, 1]);
        assert_eq!(p.to_json(), json!({"variable": "N^-1", "terms": {"0": "1", "1": "1"}}));
        let w = LaurentPoly::term(2, -2, rat(1, 2));
        assert_eq!(w.to_json(), json!({"variable": "M,N^-1", "terms": {"2,2": "1/2"}}));
        assert_eq!(inv(&[2, 0, 5]).inverse_power_coeffs(), Some(vec![int(2), int(0), int(5)]));
    }
}
