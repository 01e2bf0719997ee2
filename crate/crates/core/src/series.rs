//! Truncated formal power series with a regime tag.
//!
//! [`PowerZ`] series are expansions `Σ aₖ uᵏ` in a small variable (the
//! argument of `R`, `r`). [`InvZ`] series are expansions `Σ aₖ wᵏ` in
//! `w = 1/z`, i.e. asymptotic series at infinity such as `G` and `g`.
//! Only a `PowerZ` series can be composed with another series, so an
//! expression like `R(G(z))` type-checks and `G(R(u))` does not.

use std::fmt;
use std::marker::PhantomData;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

use crate::scalar::{Dual, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("leading coefficient is not invertible")]
    NotInvertible,
    #[error("inner series of a composition must have zero constant term")]
    NonzeroConstant,
    #[error("series must start at order one with an invertible coefficient")]
    NotReversible,
}

/// Small-variable regime.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PowerZ;

/// Regime of expansions in `1/z` at infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InvZ;

/// Coefficients `a₀, …, a_L`; everything beyond `L` is unknown.
#[derive(Clone, Debug, PartialEq)]
pub struct Series<C, R> {
    coeffs: Vec<C>,
    regime: PhantomData<R>,
}

impl<C: Scalar, R> Series<C, R> {
    pub fn new(coeffs: Vec<C>) -> Self {
        Series { coeffs, regime: PhantomData }
    }

    pub fn zero(len: usize) -> Self {
        Series::new(vec![C::zero(); len])
    }

    /// Number of known coefficients, `L + 1`.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> C {
        self.coeffs.get(k).cloned().unwrap_or_else(C::zero)
    }

    pub fn truncate(&self, len: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.resize(len, C::zero());
        Series::new(c)
    }

    pub fn scale(&self, s: &C) -> Self {
        Series::new(self.coeffs.iter().map(|a| a.clone() * s.clone()).collect())
    }

    /// Multiplies by `x^k`, keeping the length.
    pub fn shift_up(&self, k: usize) -> Self {
        let n = self.len();
        let mut c = vec![C::zero(); n.min(k)];
        c.extend(self.coeffs.iter().take(n.saturating_sub(k)).cloned());
        Series::new(c)
    }

    /// Divides by `x^k`; fails unless the first `k` coefficients vanish.
    /// The result is `k` coefficients shorter.
    pub fn shift_down(&self, k: usize) -> Option<Self> {
        if self.coeffs.iter().take(k).any(|c| !c.is_zero()) {
            return None;
        }
        Some(Series::new(self.coeffs.iter().skip(k).cloned().collect()))
    }

    /// Formal derivative in the series' own variable.
    pub fn derivative(&self) -> Self {
        let c = (1..self.len()).map(|k| self.coeffs[k].clone() * C::from_i64(k as i64)).collect();
        Series::new(c)
    }

    /// `1/f`, requiring an invertible constant term.
    pub fn reciprocal(&self) -> Result<Self, SeriesError> {
        let n = self.len();
        let inv0 = self.coeff(0).try_inv().ok_or(SeriesError::NotInvertible)?;
        let mut out = vec![C::zero(); n];
        if n == 0 {
            return Ok(Series::new(out));
        }
        out[0] = inv0.clone();
        for k in 1..n {
            let mut acc = C::zero();
            for j in 1..=k {
                acc = acc + self.coeffs[j].clone() * out[k - j].clone();
            }
            out[k] = -(acc * inv0.clone());
        }
        Ok(Series::new(out))
    }

    /// Evaluates the truncated polynomial.
    pub fn eval(&self, x: &C) -> C {
        self.coeffs.iter().rev().fold(C::zero(), |acc, a| acc * x.clone() + a.clone())
    }
}

impl<C: Scalar> Series<C, PowerZ> {
    /// `self ∘ inner`; `inner` must have zero constant term. The result has
    /// the regime and length of `inner`.
    pub fn compose<R2>(&self, inner: &Series<C, R2>) -> Result<Series<C, R2>, SeriesError> {
        compose_coeffs(&self.coeffs, inner)
    }

    /// Compositional inverse `H` with `self(H(u)) = u`.
    pub fn reverse(&self) -> Result<Series<C, PowerZ>, SeriesError> {
        reverse_coeffs(&self.coeffs)
    }

    /// The identity series `u`.
    pub fn variable(len: usize) -> Self {
        let mut c = vec![C::zero(); len];
        if len > 1 {
            c[1] = C::one();
        }
        Series::new(c)
    }
}

impl<C: Scalar> Series<C, InvZ> {
    /// Composition `F ∘ H` where `F(w) = self`: a function at infinity with
    /// `w` replaced by a small-variable series.
    pub fn compose_w(&self, inner: &Series<C, PowerZ>) -> Result<Series<C, PowerZ>, SeriesError> {
        compose_coeffs(&self.coeffs, inner)
    }

    /// For `G(z) = F(1/z)` with `F(w) = a₁w + …`, the series `H` in the
    /// small variable with `F(H(u)) = u`; then `K(u) = 1/H(u)` inverts `G`.
    pub fn inverse_at_infinity(&self) -> Result<Series<C, PowerZ>, SeriesError> {
        reverse_coeffs(&self.coeffs)
    }

    /// `dG/dz = −w² F′(w)`.
    pub fn derivative_z(&self) -> Self {
        let f_prime: Series<C, InvZ> = self.derivative().truncate(self.len());
        f_prime.shift_up(2).scale(&-C::one())
    }

    /// `Σ mₙ z^{−(n+1)}` from `m₀, …, m_L`.
    pub fn from_moments(moments: &[C]) -> Self {
        let mut c = vec![C::zero()];
        c.extend(moments.iter().cloned());
        Series::new(c)
    }

    /// `mₙ` read back from the coefficient of `z^{−(n+1)}`.
    pub fn moments(&self) -> Vec<C> {
        self.coeffs.iter().skip(1).cloned().collect()
    }
}

fn compose_coeffs<C: Scalar, R2>(outer: &[C], inner: &Series<C, R2>) -> Result<Series<C, R2>, SeriesError> {
    if !inner.coeff(0).is_zero() {
        return Err(SeriesError::NonzeroConstant);
    }
    let n = inner.len();
    let mut acc: Series<C, R2> = Series::zero(n);
    for a in outer.iter().take(n).rev() {
        acc = &acc * inner;
        acc.coeffs[0] = acc.coeffs[0].clone() + a.clone();
    }
    Ok(acc)
}

/// Reversion term by term: each new coefficient of `F(H)` is linear in
/// the newest coefficient of `H`, with slope `a₁`.
fn reverse_coeffs<C: Scalar>(f: &[C]) -> Result<Series<C, PowerZ>, SeriesError> {
    let n = f.len();
    if n < 2 || !f[0].is_zero() {
        return Err(SeriesError::NotReversible);
    }
    let inv1 = f[1].try_inv().ok_or(SeriesError::NotReversible)?;
    let mut h: Series<C, PowerZ> = Series::zero(n);
    h.coeffs[1] = inv1.clone();
    for k in 2..n {
        let fh = compose_coeffs(f, &h.truncate(k + 1))?;
        let residual = fh.coeff(k);
        h.coeffs[k] = -(residual * inv1.clone());
    }
    Ok(h)
}

impl<C: Scalar, R> Add for &Series<C, R> {
    type Output = Series<C, R>;
    fn add(self, rhs: &Series<C, R>) -> Series<C, R> {
        let n = self.len().min(rhs.len());
        Series::new((0..n).map(|k| self.coeffs[k].clone() + rhs.coeffs[k].clone()).collect())
    }
}

impl<C: Scalar, R> Sub for &Series<C, R> {
    type Output = Series<C, R>;
    fn sub(self, rhs: &Series<C, R>) -> Series<C, R> {
        let n = self.len().min(rhs.len());
        Series::new((0..n).map(|k| self.coeffs[k].clone() - rhs.coeffs[k].clone()).collect())
    }
}

impl<C: Scalar, R> Neg for &Series<C, R> {
    type Output = Series<C, R>;
    fn neg(self) -> Series<C, R> {
        Series::new(self.coeffs.iter().map(|a| -a.clone()).collect())
    }
}

/// Cauchy product, truncated to the shorter length.
impl<C: Scalar, R> Mul for &Series<C, R> {
    type Output = Series<C, R>;
    fn mul(self, rhs: &Series<C, R>) -> Series<C, R> {
        let n = self.len().min(rhs.len());
        let mut out = vec![C::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate().take(n) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate().take(n - i) {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Series::new(out)
    }
}

impl<T: Scalar, R> Series<Dual<T>, R> {
    /// Packs `f + εg` coefficientwise.
    pub fn from_parts(re: &Series<T, R>, eps: &Series<T, R>) -> Self {
        let n = re.len().min(eps.len());
        Series::new((0..n).map(|k| Dual::new(re.coeffs[k].clone(), eps.coeffs[k].clone())).collect())
    }

    /// `(f, g)` from `f + εg`.
    pub fn split(&self) -> (Series<T, R>, Series<T, R>) {
        (
            Series::new(self.coeffs.iter().map(|d| d.re.clone()).collect()),
            Series::new(self.coeffs.iter().map(|d| d.eps.clone()).collect()),
        )
    }
}

impl<C: Scalar + fmt::Display, R> fmt::Display for Series<C, R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Reads the same coefficients in another variable.
pub(crate) fn retag<C: Scalar, R1, R2>(s: Series<C, R1>) -> Series<C, R2> {
    Series { coeffs: s.coeffs, regime: PhantomData }
}
