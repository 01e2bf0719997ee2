//! Exact `E tr(XA₁⋯XAₙ)` over the GOE for constant rational matrices.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_traits::{One, Zero};

use super::LabError;
use crate::genus::Caps;
use crate::nc::{enumerate_pairings, signed_pairing, signed_pairing_trace_data, KDeltaComplement};
use crate::perm::{Permutation, SignPattern};
use crate::scalar::{int, parse_rational, Rational, Scalar};

pub type ExactMatrix = DMatrix<Rational>;

/// `diag(entries)`.
pub fn exact_diagonal(entries: &[Rational]) -> ExactMatrix {
    let n = entries.len();
    DMatrix::from_fn(n, n, |i, j| if i == j { entries[i].clone() } else { Rational::zero() })
}

pub fn exact_identity(n: usize) -> ExactMatrix {
    exact_diagonal(&vec![Rational::one(); n])
}

/// Product that skips zero entries on both sides, so diagonal and tiled
/// matrices multiply in time proportional to their non-zeros.
pub fn exact_mul(a: &ExactMatrix, b: &ExactMatrix) -> ExactMatrix {
    let (rows, inner, cols) = (a.nrows(), a.ncols(), b.ncols());
    let b_rows: Vec<Vec<(usize, &Rational)>> = (0..b.nrows())
        .map(|k| (0..cols).filter_map(|j| Some((j, &b[(k, j)])).filter(|(_, v)| !v.is_zero())).collect())
        .collect();
    let mut out = DMatrix::from_element(rows, cols, Rational::zero());
    for i in 0..rows {
        for k in 0..inner {
            let x = &a[(i, k)];
            if x.is_zero() {
                continue;
            }
            for &(j, y) in &b_rows[k] {
                out[(i, j)] += x * y;
            }
        }
    }
    out
}

/// Square matrix from rows separated by `;` and entries by `,`, e.g.
/// `"1,2;0,-1/2"`.
pub fn parse_exact_matrix(text: &str) -> Result<ExactMatrix, LabError> {
    let bad = || LabError::BadMatrix(text.to_string());
    let rows: Vec<Vec<Rational>> = text
        .split(';')
        .map(|row| row.split(',').map(|e| parse_rational(e.trim()).ok_or_else(bad)).collect())
        .collect::<Result<_, _>>()?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(bad());
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j].clone()))
}

pub fn exact_trace(a: &ExactMatrix) -> Rational {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)].clone()).fold(Rational::zero(), |s, v| s + v)
}

/// Common size of a family of square matrices.
pub fn common_size(mats: &[ExactMatrix]) -> Result<usize, LabError> {
    let n = mats.first().map_or(0, |m| m.nrows());
    for m in mats {
        if m.nrows() != m.ncols() {
            return Err(LabError::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        if m.nrows() != n {
            return Err(LabError::DimensionMismatch { expected: n, found: m.nrows() });
        }
    }
    Ok(n)
}

/// `Tr(A_{|k₁|}^{(±)} A_{|k₂|}^{(±)} ⋯)` for a signed cycle, negative
/// labels standing for transposes.
pub fn signed_word_trace(mats: &[ExactMatrix], cycle: &[i64]) -> Result<Rational, LabError> {
    let pick = |x: i64| -> Result<ExactMatrix, LabError> {
        let k = x.unsigned_abs() as usize;
        let m = mats.get(k.wrapping_sub(1)).ok_or(LabError::DimensionMismatch { expected: mats.len(), found: k })?;
        Ok(if x > 0 { m.clone() } else { m.transpose() })
    };
    let Some((&first, rest)) = cycle.split_first() else {
        return Ok(int(common_size(mats)? as i64));
    };
    let mut acc = pick(first)?;
    for &x in rest {
        acc = exact_mul(&acc, &pick(x)?);
    }
    Ok(exact_trace(&acc))
}

/// `Tr_σ(A^{(η)})`, or `tr_σ = N^{−#σ} Tr_σ` when normalized.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiTrace {
    pub sigma: Permutation,
    pub eta: SignPattern,
    pub normalized: bool,
}

impl MultiTrace {
    pub fn new(sigma: Permutation, eta: SignPattern, normalized: bool) -> Result<Self, LabError> {
        if sigma.ground().is_signed() || sigma.size() != eta.len() {
            return Err(LabError::DimensionMismatch { expected: sigma.size(), found: eta.len() });
        }
        Ok(MultiTrace { sigma, eta, normalized })
    }

    pub fn from_complement(data: &KDeltaComplement, normalized: bool) -> Self {
        MultiTrace { sigma: data.sigma.clone(), eta: data.eta.clone(), normalized }
    }

    /// Cycles of `σ` with the transpose signs attached.
    pub fn signed_cycles(&self) -> Vec<Vec<i64>> {
        KDeltaComplement { sigma: self.sigma.clone(), eta: self.eta.clone() }.signed_cycles()
    }

    pub fn evaluate(&self, mats: &[ExactMatrix]) -> Result<Rational, LabError> {
        self.evaluate_cached(mats, &mut TraceCache::default())
    }

    fn evaluate_cached(&self, mats: &[ExactMatrix], cache: &mut TraceCache) -> Result<Rational, LabError> {
        if mats.len() != self.sigma.size() {
            return Err(LabError::DimensionMismatch { expected: self.sigma.size(), found: mats.len() });
        }
        let n = common_size(mats)?;
        let cycles = self.signed_cycles();
        let mut value = Rational::one();
        for c in &cycles {
            value *= cache.trace(mats, c)?;
        }
        if self.normalized {
            value /= Scalar::pow(&int(n as i64), cycles.len() as u32);
        }
        Ok(value)
    }
}

/// Memoized traces of signed cycle words for one family of matrices.
#[derive(Default)]
struct TraceCache {
    values: HashMap<Vec<i64>, Rational>,
}

impl TraceCache {
    fn trace(&mut self, mats: &[ExactMatrix], cycle: &[i64]) -> Result<Rational, LabError> {
        if let Some(v) = self.values.get(cycle) {
            return Ok(v.clone());
        }
        let v = signed_word_trace(mats, cycle)?;
        self.values.insert(cycle.to_vec(), v.clone());
        Ok(v)
    }
}

/// Trace data of every class in the expansion: one entry per pairing `π`
/// of `[n]` and per choice of which pairs are "through".
pub fn goe_trace_classes(n: usize, caps: &Caps) -> Result<Vec<KDeltaComplement>, LabError> {
    caps.check_goe(n)?;
    let mut out = Vec::new();
    for pi in enumerate_pairings(n) {
        let pairs = pi.block_count();
        for bits in 0..1u64 << pairs {
            let through: Vec<bool> = (0..pairs).map(|b| bits >> b & 1 == 1).collect();
            let rho = signed_pairing(&pi, &through);
            out.push(signed_pairing_trace_data(&rho)?);
        }
    }
    Ok(out)
}

/// `E tr(XA₁XA₂⋯XAₙ)` for an `N×N` GOE `X` with `E X_ij X_kl = (δ_ik δ_jl + δ_il δ_jk)/N`:
/// `N^{−(n/2+1)} Σ Tr_σ(A^{(η)})` over [`goe_trace_classes`].
pub fn exact_goe_word_expectation(mats: &[ExactMatrix], caps: &Caps) -> Result<Rational, LabError> {
    let size = common_size(mats)?;
    let n = mats.len();
    if n == 0 {
        return Ok(Rational::one());
    }
    if n % 2 == 1 {
        caps.check_goe(n)?;
        return Ok(Rational::zero());
    }
    let mut cache = TraceCache::default();
    let mut total = Rational::zero();
    for data in goe_trace_classes(n, caps)? {
        total += MultiTrace::from_complement(&data, false).evaluate_cached(mats, &mut cache)?;
    }
    Ok(total / Scalar::pow(&int(size as i64), (n / 2 + 1) as u32))
}

/// Coefficients `e₀, …, e_d` of `E(N) = Σ e_k N^{−k}` from exact samples.
///
/// With `known_e0` the constant term is fixed and `d` samples suffice;
/// otherwise `d + 1` are needed. Surplus samples are used too: the fit has
/// one coefficient per sample, and the returned
/// [`InverseFit::excess`] holds the coefficients beyond degree `d`, which
/// vanish exactly when the data are a polynomial of degree `d`.
pub fn fit_inverse_powers(
    samples: &[(u64, Rational)],
    degree: usize,
    known_e0: Option<&Rational>,
) -> Result<InverseFit, LabError> {
    let needed = if known_e0.is_some() { degree } else { degree + 1 };
    if samples.len() < needed {
        return Err(LabError::LadderTooShort { needed, found: samples.len() });
    }
    // Work in t = 1/N; with e₀ known fit q(t) = (E − e₀)/t.
    let points: Vec<(Rational, Rational)> = samples
        .iter()
        .map(|(n, v)| {
            let t = Rational::new(1.into(), (*n).into());
            match known_e0 {
                Some(e0) => (t.clone(), (v - e0) / t),
                None => (t, v.clone()),
            }
        })
        .collect();
    let coeffs = interpolate(&points)?;
    let mut full = match known_e0 {
        Some(e0) => std::iter::once(e0.clone()).chain(coeffs).collect::<Vec<_>>(),
        None => coeffs,
    };
    let excess = if full.len() > degree + 1 { full.split_off(degree + 1) } else { Vec::new() };
    full.resize(degree + 1, Rational::zero());
    Ok(InverseFit { coeffs: full, excess })
}

#[derive(Clone, Debug, PartialEq)]
pub struct InverseFit {
    /// `e₀, …, e_d`.
    pub coeffs: Vec<Rational>,
    /// Fitted coefficients above degree `d`; all zero for exact data.
    pub excess: Vec<Rational>,
}

impl InverseFit {
    pub fn is_exact(&self) -> bool {
        self.excess.iter().all(Zero::is_zero)
    }
}

/// Monomial coefficients of the interpolating polynomial (Newton form,
/// then expanded).
fn interpolate(points: &[(Rational, Rational)]) -> Result<Vec<Rational>, LabError> {
    let n = points.len();
    let xs: Vec<&Rational> = points.iter().map(|p| &p.0).collect();
    let mut dd: Vec<Rational> = points.iter().map(|p| p.1.clone()).collect();
    for level in 1..n {
        for i in (level..n).rev() {
            let denom = xs[i] - xs[i - level];
            if denom.is_zero() {
                return Err(LabError::RepeatedNode);
            }
            dd[i] = (&dd[i] - &dd[i - 1]) / denom;
        }
    }
    let mut coeffs = vec![Rational::zero(); n];
    for i in (0..n).rev() {
        // coeffs ← coeffs·(t − x_i) + dd[i]
        let mut next = vec![Rational::zero(); n];
        for k in 0..n {
            if coeffs[k].is_zero() {
                continue;
            }
            if k + 1 < n {
                next[k + 1] += &coeffs[k];
            }
            next[k] -= &coeffs[k] * xs[i];
        }
        next[0] += &dd[i];
        coeffs = next;
    }
    Ok(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genus::goe_moment_poly;
    use crate::nc::mirror_cycle_pairs;
    use crate::perm::GroundSet;
    use crate::scalar::rat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> ExactMatrix {
        DMatrix::from_fn(n, n, |_, _| int(rng.random_range(-3..=3)))
    }

    #[test]
    fn multi_trace_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mats: Vec<ExactMatrix> = (0..4).map(|_| random_matrix(&mut rng, 3)).collect();
        let id = MultiTrace::new(Permutation::identity(GroundSet::Plain(2)), SignPattern::all_positive(2), true).unwrap();
        let expect = exact_trace(&mats[0]) * exact_trace(&mats[1]) / int(9);
        assert_eq!(id.evaluate(&mats[..2]).unwrap(), expect);

        let sigma = Permutation::parse("(1,2,3)(4)", GroundSet::Plain(4)).unwrap();
        let eta = SignPattern::new(vec![1, 1, -1, 1]).unwrap();
        let mt = MultiTrace::new(sigma, eta, false).unwrap();
        let direct = exact_trace(&exact_mul(&exact_mul(&mats[0], &mats[1]), &mats[2].transpose())) * exact_trace(&mats[3]);
        assert_eq!(mt.evaluate(&mats).unwrap(), direct);
        assert!(mt.evaluate(&mats[..3]).is_err());
    }

    #[test]
    fn n2_matches_direct_wick() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for size in 1..=4 {
            let a = random_matrix(&mut rng, size);
            let b = random_matrix(&mut rng, size);
            let nn = int(size as i64);
            let expect = exact_trace(&a) * exact_trace(&b) / (&nn * &nn)
                + exact_trace(&exact_mul(&a, &b.transpose())) / (&nn * &nn);
            // tr(A)tr(B) + N⁻¹ tr(ABᵗ) with tr normalized.
            assert_eq!(exact_goe_word_expectation(&[a, b], &Caps::default()).unwrap(), expect);
        }
    }

    /// Brute-force Wick expansion for tiny sizes.
    fn brute_force(mats: &[ExactMatrix]) -> Rational {
        let n = mats.len();
        let size = mats[0].nrows();
        let pairings = enumerate_pairings(n);
        let mut total = Rational::zero();
        let mut idx = vec![0usize; 2 * n];
        loop {
            let (i, j): (Vec<usize>, Vec<usize>) = (0..n).map(|p| (idx[2 * p], idx[2 * p + 1])).unzip();
            let mut w = Rational::one();
            for p in 0..n {
                w *= &mats[p][(j[p], i[(p + 1) % n])];
            }
            if !w.is_zero() {
                let mut e = Rational::zero();
                for pi in &pairings {
                    let mut t = Rational::one();
                    for b in pi.blocks() {
                        let (x, y) = (b[0], b[1]);
                        let v = ((i[x] == i[y]) as i64 * (j[x] == j[y]) as i64)
                            + ((i[x] == j[y]) as i64 * (j[x] == i[y]) as i64);
                        t *= rat(v, size as i64);
                    }
                    e += t;
                }
                total += w * e;
            }
            let mut k = 0;
            while k < 2 * n {
                idx[k] += 1;
                if idx[k] < size {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == 2 * n {
                break;
            }
        }
        total / int(size as i64)
    }

    #[test]
    fn matches_brute_force_wick() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (n, size) in [(2, 3), (4, 2), (4, 3)] {
            let mats: Vec<ExactMatrix> = (0..n).map(|_| random_matrix(&mut rng, size)).collect();
            assert_eq!(exact_goe_word_expectation(&mats, &Caps::default()).unwrap(), brute_force(&mats), "n={n} size={size}");
        }
        let mats: Vec<ExactMatrix> = (0..3).map(|_| random_matrix(&mut rng, 2)).collect();
        assert_eq!(exact_goe_word_expectation(&mats, &Caps::default()).unwrap(), int(0));
    }

    #[test]
    fn identities_reduce_to_moment_table() {
        for n in [2, 4, 6] {
            for size in [2u64, 3, 7] {
                let mats = vec![exact_identity(size as usize); n];
                let expect = goe_moment_poly(n, &Caps::default()).unwrap().eval_n(&int(size as i64)).unwrap();
                assert_eq!(exact_goe_word_expectation(&mats, &Caps::default()).unwrap(), expect);
            }
        }
    }

    #[test]
    fn representative_choice_is_irrelevant() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let n = 6;
        let mats: Vec<ExactMatrix> = (0..n).map(|_| random_matrix(&mut rng, 3)).collect();
        let gamma = Permutation::long_cycle(n).embed_signed();
        let delta = Permutation::delta(n);
        for pi in enumerate_pairings(n).into_iter().take(5) {
            for bits in 0..8u64 {
                let through: Vec<bool> = (0..3).map(|b| bits >> b & 1 == 1).collect();
                let rho = signed_pairing(&pi, &through);
                let p = Permutation::compose_all(&[&delta, &gamma.inverse(), &delta, &rho, &gamma, &delta]).unwrap();
                for (c, mirror) in mirror_cycle_pairs(&p).unwrap() {
                    assert_eq!(signed_word_trace(&mats, &c).unwrap(), signed_word_trace(&mats, &mirror).unwrap());
                }
            }
        }
    }

    #[test]
    fn interpolation_recovers_polynomial() {
        // E(N) = 2 + 5/N + 5/N².
        let e = |n: u64| int(2) + rat(5, n as i64) + rat(5, (n * n) as i64);
        let samples: Vec<(u64, Rational)> = [40, 80, 160].iter().map(|&n| (n, e(n))).collect();
        let fit = fit_inverse_powers(&samples, 2, None).unwrap();
        assert_eq!(fit.coeffs, vec![int(2), int(5), int(5)]);
        let fit = fit_inverse_powers(&samples, 2, Some(&int(2))).unwrap();
        assert_eq!(fit.coeffs, vec![int(2), int(5), int(5)]);
        assert!(fit.is_exact());
        let wrong = fit_inverse_powers(&samples, 1, Some(&int(2))).unwrap();
        assert!(!wrong.is_exact());
        assert!(fit_inverse_powers(&samples[..1], 2, None).is_err());
    }

    #[test]
    fn parses_matrices() {
        let m = parse_exact_matrix("1, 2; 0, -1/2").unwrap();
        assert_eq!(m[(0, 1)], int(2));
        assert_eq!(m[(1, 1)], crate::scalar::rat(-1, 2));
        assert!(parse_exact_matrix("1,2;3").is_err());
        assert!(parse_exact_matrix("1,x;3,4").is_err());
    }
}
