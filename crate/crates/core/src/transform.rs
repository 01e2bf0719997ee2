//! Cauchy and R-transforms as truncated series, with their infinitesimal
//! parts, and closed-form evaluators for the GOE and Wishart cases.
//!
//! Moments `m₀, …, m_L` and cumulants `κ₁, …, κ_L` are the natural truncation
//! pair: `G` is stored as `[0, m₀, …, m_L]` in `w = 1/z`, `R(u) = Σ κ_{k+1} uᵏ`
//! as `[κ₁, …, κ_L]`, and `r` likewise holds `κ′₁, …, κ′_L`.

use num_complex::Complex64;
use thiserror::Error;

use crate::scalar::{Dual, Scalar};
use crate::series::{retag, InvZ, PowerZ, Series, SeriesError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("G must start with a nonzero 1/z coefficient")]
    NotInvertible,
    #[error("infinitesimal Cauchy transform must have zero 1/z coefficient (got m′₀ ≠ 0)")]
    NonzeroMass,
    #[error("total mass m₀ must be 1")]
    NotNormalized,
    #[error("series lengths disagree: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("point {re}+{im}i lies on the cut; evaluate from the upper half-plane")]
    OnSupport { re: f64, im: f64 },
    #[error("parameter c must be positive, got {0}")]
    BadRatio(f64),
}

/// `G(z) = Σ mₙ z^{−(n+1)}`.
pub fn cauchy_series<C: Scalar>(moments: &[C]) -> Series<C, InvZ> {
    Series::from_moments(moments)
}

/// `H(u)` with `G(1/H(u)) = u`, so that `K = 1/H`.
pub fn k_inverse<C: Scalar>(cauchy: &Series<C, InvZ>) -> Result<Series<C, PowerZ>, TransformError> {
    if cauchy.len() < 2 || cauchy.coeff(1).try_inv().is_none() {
        return Err(TransformError::NotInvertible);
    }
    Ok(cauchy.inverse_at_infinity()?)
}

/// `R(u) = K(u) − 1/u` from `G`. Over [`Dual`] coefficients this returns
/// `R + εr` from `G + εg`.
pub fn r_transform<C: Scalar>(cauchy: &Series<C, InvZ>) -> Result<Series<C, PowerZ>, TransformError> {
    let h = k_inverse(cauchy)?;
    // R = (u/H − 1)/u.
    let h_over_u = h.shift_down(1).ok_or(TransformError::NotInvertible)?;
    let u_over_h = h_over_u.reciprocal()?;
    if u_over_h.coeff(0) != C::one() {
        return Err(TransformError::NotNormalized);
    }
    Ok(Series::new(u_over_h.coeffs()[1..].to_vec()))
}

/// Inverse of [`r_transform`]: solves `G = w / (1 − w R(G))` order by order.
/// `r` holds `κ₁, …, κ_L`; the result holds `m₀, …, m_L` with `m₀ = 1`.
pub fn cauchy_from_r<C: Scalar>(r: &Series<C, PowerZ>) -> Series<C, InvZ> {
    let len = r.len() + 2;
    let w: Series<C, InvZ> = Series::new((0..len).map(|k| if k == 1 { C::one() } else { C::zero() }).collect());
    let one: Series<C, InvZ> = Series::new((0..len).map(|k| if k == 0 { C::one() } else { C::zero() }).collect());
    let mut g = w.clone();
    for _ in 0..len {
        let rg = r.compose(&g).expect("G has zero constant term");
        let denom = &one - &rg.shift_up(1);
        g = denom.reciprocal().expect("unit constant term").shift_up(1);
    }
    g
}

/// `g = −r(G)·G′`. `r` holds `κ′₁, …, κ′_L` and must be one shorter than
/// the moment list behind `G`.
pub fn g_from_r<C: Scalar>(
    r: &Series<C, PowerZ>,
    cauchy: &Series<C, InvZ>,
) -> Result<Series<C, InvZ>, TransformError> {
    if cauchy.len() != r.len() + 2 {
        return Err(TransformError::LengthMismatch(cauchy.len(), r.len() + 2));
    }
    if cauchy.coeff(1).try_inv().is_none() || !cauchy.coeff(0).is_zero() {
        return Err(TransformError::NotInvertible);
    }
    let r_of_g = r.compose(cauchy)?;
    Ok(-&(&r_of_g * &cauchy.derivative_z()))
}

/// Inverse of [`g_from_r`]: `r(u) = −g(K(u))·K′(u)`, computed as
/// `q(H)·H′` with `q(w) = g(w)/w²` and `H = 1/K`.
pub fn r_from_g<C: Scalar>(
    inf_cauchy: &Series<C, InvZ>,
    cauchy: &Series<C, InvZ>,
) -> Result<Series<C, PowerZ>, TransformError> {
    if inf_cauchy.len() != cauchy.len() {
        return Err(TransformError::LengthMismatch(inf_cauchy.len(), cauchy.len()));
    }
    if !inf_cauchy.coeff(0).is_zero() {
        return Err(TransformError::NotInvertible);
    }
    if !inf_cauchy.coeff(1).is_zero() {
        return Err(TransformError::NonzeroMass);
    }
    let h = k_inverse(cauchy)?;
    let order = cauchy.len() - 2;
    let q: Series<C, PowerZ> = retag(inf_cauchy.shift_down(2).expect("checked above"));
    let q_of_h = q.compose(&h.truncate(order))?;
    Ok(&q_of_h * &h.derivative().truncate(order))
}

/// `(κ′ₙ)` from `(mₙ, m′ₙ)` via the dual-number route: the ε-part of the
/// R-transform of `G + εg`.
pub fn dual_r_transform<C: Scalar>(
    cauchy: &Series<C, InvZ>,
    inf_cauchy: &Series<C, InvZ>,
) -> Result<Series<Dual<C>, PowerZ>, TransformError> {
    if inf_cauchy.len() != cauchy.len() {
        return Err(TransformError::LengthMismatch(inf_cauchy.len(), cauchy.len()));
    }
    r_transform(&Series::from_parts(cauchy, inf_cauchy))
}

/// `R(u) = u` for the semicircle law.
pub fn semicircle_r<C: Scalar>(order: usize) -> Series<C, PowerZ> {
    Series::new((0..order).map(|k| if k == 1 { C::one() } else { C::zero() }).collect())
}

/// GOE infinitesimal R-transform `u/(1 − u²)`: `κ′ₙ = 1` for even `n`.
pub fn goe_r<C: Scalar>(order: usize) -> Series<C, PowerZ> {
    Series::new((0..order).map(|k| if k % 2 == 1 { C::one() } else { C::zero() }).collect())
}

/// Constant cumulants `value/(1 − u)`: the MP law for `value = c`, the
/// Wishart infinitesimal part for `value = c′`.
pub fn constant_r<C: Scalar>(value: &C, order: usize) -> Series<C, PowerZ> {
    Series::new(vec![value.clone(); order])
}

fn upper_sqrt_product(z: Complex64, a: f64, b: f64) -> Complex64 {
    // √(z−a)·√(z−b) with principal roots is analytic off [a, b] and ~ z at ∞.
    (z - a).sqrt() * (z - b).sqrt()
}

fn on_cut(z: Complex64, a: f64, b: f64) -> bool {
    z.im == 0.0 && z.re >= a && z.re <= b
}

/// Semicircle Cauchy transform `(z − √(z−2)√(z+2))/2`.
pub fn semicircle_g(z: Complex64) -> Result<Complex64, TransformError> {
    if on_cut(z, -2.0, 2.0) {
        return Err(TransformError::OnSupport { re: z.re, im: z.im });
    }
    Ok((z - upper_sqrt_product(z, -2.0, 2.0)) / 2.0)
}

/// GOE infinitesimal Cauchy transform `G(z)/(z² − 4)`.
pub fn goe_g_closed(z: Complex64) -> Result<Complex64, TransformError> {
    Ok(semicircle_g(z)? / (z * z - 4.0))
}

/// Support `[(1−√c)², (1+√c)²]` of the MP law with ratio `c`.
pub fn mp_edges(c: f64) -> Result<(f64, f64), TransformError> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(TransformError::BadRatio(c));
    }
    let s = c.sqrt();
    Ok(((1.0 - s).powi(2), (1.0 + s).powi(2)))
}

/// `P(z) = √((z−a)(z−b))` on the branch with `P(z)/z → 1`.
pub fn mp_p(c: f64, z: Complex64) -> Result<Complex64, TransformError> {
    let (a, b) = mp_edges(c)?;
    Ok(upper_sqrt_product(z, a, b))
}

fn check_mp_point(c: f64, z: Complex64) -> Result<(f64, f64), TransformError> {
    let (a, b) = mp_edges(c)?;
    if on_cut(z, a, b) || z == Complex64::new(0.0, 0.0) {
        return Err(TransformError::OnSupport { re: z.re, im: z.im });
    }
    Ok((a, b))
}

/// MP Cauchy transform `(z + 1 − c − P(z))/(2z)`, moments `Σ_{NC(n)} c^{#π}`.
pub fn mp_cauchy(c: f64, z: Complex64) -> Result<Complex64, TransformError> {
    let (a, b) = check_mp_point(c, z)?;
    let p = upper_sqrt_product(z, a, b);
    Ok((z + 1.0 - c - p) / (2.0 * z))
}

/// `dG/dz` of the MP law.
pub fn mp_cauchy_derivative(c: f64, z: Complex64) -> Result<Complex64, TransformError> {
    let (a, b) = check_mp_point(c, z)?;
    let p = upper_sqrt_product(z, a, b);
    let dp = (2.0 * z - a - b) / (2.0 * p);
    Ok(((1.0 - dp) * z - (z + 1.0 - c - p)) / (2.0 * z * z))
}

/// Wishart infinitesimal Cauchy transform `−c′G′(z)/(1 − G(z))`.
pub fn wishart_g(c: f64, c_prime: f64, z: Complex64) -> Result<Complex64, TransformError> {
    let g = mp_cauchy(c, z)?;
    let dg = mp_cauchy_derivative(c, z)?;
    Ok(-c_prime * dg / (1.0 - g))
}

/// The same function written through `P` alone,
/// `−c′/(zP) · ((1−c)² − (1+c)z − (1−c)P)/(P + z − 1 + c)`.
pub fn wishart_g_explicit(c: f64, c_prime: f64, z: Complex64) -> Result<Complex64, TransformError> {
    let (a, b) = check_mp_point(c, z)?;
    let p = upper_sqrt_product(z, a, b);
    let num = (1.0 - c).powi(2) - (1.0 + c) * z - (1.0 - c) * p;
    Ok(-c_prime / (z * p) * num / (p + z - 1.0 + c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cumulant::{univariate_cumulants_to_moments, univariate_moments_to_cumulants};
    use crate::genus::{goe_infinitesimal_moment, wishart_limits, Caps};
    use crate::scalar::{catalan, int, rat, Rational};
    use crate::word::Word;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn semicircle_moments(order: usize) -> Vec<Rational> {
        (0..=order).map(|n| if n % 2 == 0 { Rational::from_integer(catalan((n / 2) as u64)) } else { int(0) }).collect()
    }

    #[test]
    fn r_transform_of_semicircle() {
        let g = cauchy_series(&semicircle_moments(10));
        let r = r_transform(&g).unwrap();
        assert_eq!(r, semicircle_r::<Rational>(10));
        assert_eq!(cauchy_from_r(&r), g);
    }

    #[test]
    fn goe_g_from_r_reproduces_inf_moments() {
        let order = 12;
        let g = cauchy_series(&semicircle_moments(order));
        let inf = g_from_r(&goe_r::<Rational>(order), &g).unwrap();
        let expect: Vec<Rational> =
            (0..=order).map(|n| if n == 0 { int(0) } else { goe_infinitesimal_moment(n, &Caps::default()).unwrap() }).collect();
        assert_eq!(inf.moments(), expect);
        assert_eq!(&inf.moments()[1..7], &[int(0), int(1), int(0), int(5), int(0), int(22)]);
        assert_eq!(r_from_g(&inf, &g).unwrap(), goe_r::<Rational>(order));
        let zero = g_from_r(&Series::zero(order), &g).unwrap();
        assert!(zero.coeffs().iter().all(|c| *c == int(0)));
    }

    #[test]
    fn wishart_infinitesimal_cumulants_are_constant() {
        let (c, cp) = (rat(3, 2), rat(2, 3));
        let order = 10;
        let (m, mp): (Vec<_>, Vec<_>) = (0..=order)
            .map(|n| if n == 0 { (int(1), int(0)) } else { wishart_limits(&Word::power(0, n), &c, &cp) })
            .unzip();
        let g = cauchy_series(&m);
        let inf = cauchy_series(&mp);
        assert_eq!(r_from_g(&inf, &g).unwrap(), constant_r(&cp, order));
        assert_eq!(r_transform(&g).unwrap(), constant_r(&c, order));
        assert_eq!(g_from_r(&constant_r(&cp, order), &g).unwrap(), inf);
        let dual = dual_r_transform(&g, &inf).unwrap();
        let (re, eps) = dual.split();
        assert_eq!(re, constant_r(&c, order));
        assert_eq!(eps, constant_r(&cp, order));
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = cauchy_series(&semicircle_moments(4));
        let bad = cauchy_series(&[int(1), int(0), int(0), int(0), int(0)]);
        assert_eq!(r_from_g(&bad, &g), Err(TransformError::NonzeroMass));
        let massless = cauchy_series(&[int(0), int(1), int(0), int(0), int(0)]);
        assert_eq!(r_from_g(&cauchy_series(&vec![int(0); 5]), &massless), Err(TransformError::NotInvertible));
        assert!(matches!(g_from_r(&goe_r::<Rational>(2), &g), Err(TransformError::LengthMismatch(..))));
    }

    fn arb_rationals(len: usize) -> impl Strategy<Value = Vec<Rational>> {
        proptest::collection::vec((-7i64..8, 1i64..4), len).prop_map(|v| v.into_iter().map(|(a, b)| rat(a, b)).collect())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn g_r_roundtrip(r in arb_rationals(10), kappa in arb_rationals(10)) {
            let kappa = Series::new(kappa);
            let g = cauchy_from_r(&kappa);
            let r = Series::new(r);
            let inf = g_from_r(&r, &g).unwrap();
            prop_assert_eq!(r_from_g(&inf, &g).unwrap(), r.clone());
            prop_assert_eq!(r_transform(&g).unwrap(), kappa.clone());
            // Dual route agrees with the separate formula.
            let (re, eps) = dual_r_transform(&g, &inf).unwrap().split();
            prop_assert_eq!(re, kappa);
            prop_assert_eq!(eps, r);
        }

        #[test]
        fn agrees_with_partition_sums(kappa in arb_rationals(8), kp in arb_rationals(8)) {
            let pairs: Vec<(Rational, Rational)> = kappa.iter().cloned().zip(kp.iter().cloned()).collect();
            let moments = univariate_cumulants_to_moments(&pairs).unwrap();
            let g = cauchy_from_r(&Series::new(kappa));
            let inf = g_from_r(&Series::new(kp), &g).unwrap();
            let (m, mp): (Vec<_>, Vec<_>) = moments.into_iter().unzip();
            prop_assert_eq!(&g.moments()[1..], &m[..]);
            prop_assert_eq!(&inf.moments()[1..], &mp[..]);
            let back = univariate_moments_to_cumulants(&m.into_iter().zip(mp).collect::<Vec<_>>()).unwrap();
            let (k2, kp2): (Vec<_>, Vec<_>) = back.into_iter().unzip();
            prop_assert_eq!(k2, r_transform(&g).unwrap().coeffs().to_vec());
            prop_assert_eq!(kp2, r_from_g(&inf, &g).unwrap().coeffs().to_vec());
        }
    }

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn closed_forms_behave_at_infinity() {
        let z = c64(1e4, 1.0);
        assert!((semicircle_g(z).unwrap() * z - 1.0).norm() < 1e-6);
        assert!((goe_g_closed(z).unwrap() * z * z * z - 1.0).norm() < 1e-6);
        for c in [0.5, 1.0, 3.0] {
            assert!((mp_cauchy(c, z).unwrap() * z - 1.0).norm() < 1e-3);
            assert!((mp_p(c, z).unwrap() / z - 1.0).norm() < 1e-3);
        }
        assert!(semicircle_g(c64(1.0, 0.0)).is_err());
        assert!(semicircle_g(c64(3.0, 0.0)).is_ok());
        assert!(mp_cauchy(3.0, c64(1.0, 0.0)).is_err());
        assert!(mp_cauchy(-1.0, c64(1.0, 1.0)).is_err());
    }

    #[test]
    fn goe_residues_are_quarter() {
        for pole in [2.0, -2.0] {
            let z = c64(pole + 1e-9, 1e-9);
            let res = (z - pole) * goe_g_closed(z).unwrap();
            assert!((res - 0.25).norm() < 1e-4, "{res}");
        }
    }

    #[test]
    fn wishart_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for c in [0.3, 1.0, 2.5] {
            for _ in 0..20 {
                let z = c64(rng.random_range(-3.0..8.0), rng.random_range(0.05..3.0));
                let a = wishart_g(c, 1.7, z).unwrap();
                let b = wishart_g_explicit(c, 1.7, z).unwrap();
                assert!((a - b).norm() < 1e-10 * (1.0 + a.norm()), "c={c} z={z}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn derived_voiculescu_relation() {
        // G′(z)·(−G(z)⁻² + R′(G(z))) = 1 off the support.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let z = c64(rng.random_range(-4.0..4.0), rng.random_range(0.1..3.0));
            let g = semicircle_g(z).unwrap();
            let dg = -g * g / (1.0 - g * g);
            // dG/dz from the closed form by a central difference.
            let h = 1e-6;
            let fd = (semicircle_g(z + h).unwrap() - semicircle_g(z - h).unwrap()) / (2.0 * h);
            assert!((dg - fd).norm() < 1e-6);
            assert!((fd * (-1.0 / (g * g) + 1.0) - 1.0).norm() < 1e-6);

            let c = 2.0;
            let gm = mp_cauchy(c, z).unwrap();
            let dgm = mp_cauchy_derivative(c, z).unwrap();
            let r_prime = c / ((1.0 - gm) * (1.0 - gm));
            assert!((dgm * (-1.0 / (gm * gm) + r_prime) - 1.0).norm() < 1e-9);
            assert!((1.0 / gm + c / (1.0 - gm) - z).norm() < 1e-9);
        }
    }
}
