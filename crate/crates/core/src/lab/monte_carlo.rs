//! Seeded Monte-Carlo sampling of GOE and complex Wishart matrices.
//!
//! Samples are drawn in chunks of [`CHUNK`]; chunk `c` uses a ChaCha8
//! generator seeded with the run seed on stream `c`, so results do not
//! depend on the thread count. Normals come from `rand_distr`'s ziggurat
//! `StandardNormal`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde_json::{json, Value};

use super::LabError;

pub const CHUNK: usize = 1024;

/// A generator for stream `stream` of run `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `N×N` GOE: independent `X_ij = X_ji ~ N(0, 1/N)` off the diagonal and
/// `X_ii ~ N(0, 2/N)`, i.e. `(G + Gᵗ)/√2` for `G` with `N(0, 1/N)` entries.
pub fn sample_goe(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let scale = (1.0 / n as f64).sqrt();
    let mut x = DMatrix::zeros(n, n);
    for i in 0..n {
        let d: f64 = StandardNormal.sample(rng);
        x[(i, i)] = d * scale * std::f64::consts::SQRT_2;
        for j in i + 1..n {
            let v: f64 = StandardNormal.sample(rng);
            x[(i, j)] = v * scale;
            x[(j, i)] = v * scale;
        }
    }
    x
}

/// `Y = G*G/N` for an `M×N` matrix `G` of standard complex Gaussians
/// (`E|G_ij|² = 1`).
pub fn sample_wishart(m: usize, n: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let (re, im) = sample_wishart_parts(m, n, rng);
    re.zip_map(&im, Complex64::new)
}

/// Real and imaginary parts of [`sample_wishart`], from the same draws. The
/// products run as real matrix products, which are much faster.
fn sample_wishart_parts(m: usize, n: usize, rng: &mut ChaCha8Rng) -> (DMatrix<f64>, DMatrix<f64>) {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut a = DMatrix::zeros(m, n);
    let mut b = DMatrix::zeros(m, n);
    for j in 0..n {
        for i in 0..m {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            a[(i, j)] = re * h;
            b[(i, j)] = im * h;
        }
    }
    // (A − iB)ᵗ(A + iB) = AᵗA + BᵗB + i(AᵗB − BᵗA)
    let at = a.transpose();
    let bt = b.transpose();
    let scale = 1.0 / n as f64;
    let re = (&at * &a + &bt * &b) * scale;
    let im = (&at * &b - &bt * &a) * scale;
    (re, im)
}

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl McEstimate {
    /// `|mean − target| ≤ k·s.e.`
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_error
    }

    pub fn to_json(&self) -> Value {
        json!({"estimate": self.mean, "std_error": self.std_error, "samples": self.samples})
    }
}

/// Pairwise (cascade) summation.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let (l, r) = values.split_at(values.len() / 2);
    pairwise_sum(l) + pairwise_sum(r)
}

/// Every sample of `stat`, in a thread-count-independent order.
pub fn sample_values<F>(samples: usize, seed: u64, stat: F) -> Result<Vec<f64>, LabError>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    if samples == 0 {
        return Err(LabError::NoSamples);
    }
    let chunks = samples.div_ceil(CHUNK);
    let values: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, c as u64);
            let len = CHUNK.min(samples - c * CHUNK);
            (0..len).map(|_| stat(&mut rng)).collect()
        })
        .collect();
    Ok(values.concat())
}

pub fn summarize(values: &[f64]) -> Result<McEstimate, LabError> {
    let n = values.len();
    if n < 2 {
        return Err(LabError::NoSamples);
    }
    let mean = pairwise_sum(values) / n as f64;
    let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1) as f64;
    Ok(McEstimate { mean, std_error: (var / n as f64).sqrt(), samples: n })
}

/// Mean of `stat` over `samples` draws.
pub fn monte_carlo<F>(samples: usize, seed: u64, stat: F) -> Result<McEstimate, LabError>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    summarize(&sample_values(samples, seed, stat)?)
}

/// `tr(X^k)` for a real symmetric matrix.
pub fn normalized_power_trace(x: &DMatrix<f64>, k: usize) -> f64 {
    let n = x.nrows() as f64;
    match k {
        0 => 1.0,
        1 => x.trace() / n,
        2 => x.norm_squared() / n,
        _ => {
            // Square the half power and pair it up: tr(X^k) = ⟨X^a, X^b⟩.
            let a = k / 2;
            let b = k - a;
            let xa = power(x, a);
            let xb = if a == b { xa.clone() } else { &xa * x };
            xa.component_mul(&xb).sum() / n
        }
    }
}

fn power(x: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let mut acc = x.clone();
    for _ in 1..k {
        acc = &acc * x;
    }
    acc
}

/// `Re tr(Y^k)` for a Hermitian matrix.
pub fn normalized_power_trace_complex(y: &DMatrix<Complex64>, k: usize) -> f64 {
    hermitian_power_trace(&y.map(|v| v.re), &y.map(|v| v.im), k)
}

/// `tr(Y^k)` for `Y = R + iS` Hermitian, as `⟨Y^a, Y^b⟩` with `a + b = k`.
fn hermitian_power_trace(re: &DMatrix<f64>, im: &DMatrix<f64>, k: usize) -> f64 {
    let n = re.nrows() as f64;
    if k == 0 {
        return 1.0;
    }
    if k == 1 {
        return re.trace() / n;
    }
    let mul = |(r1, s1): &(DMatrix<f64>, DMatrix<f64>), (r2, s2): (&DMatrix<f64>, &DMatrix<f64>)| {
        (r1 * r2 - s1 * s2, r1 * s2 + s1 * r2)
    };
    let a = k / 2;
    let mut pa = (re.clone(), im.clone());
    for _ in 1..a {
        pa = mul(&pa, (re, im));
    }
    let pb = if k - a == a { pa.clone() } else { mul(&pa, (re, im)) };
    (pa.0.component_mul(&pb.0).sum() + pa.1.component_mul(&pb.1).sum()) / n
}

/// `E tr(X^k)` for the `n×n` GOE.
pub fn goe_power_estimate(n: usize, k: usize, samples: usize, seed: u64) -> Result<McEstimate, LabError> {
    if n == 0 {
        return Err(LabError::ZeroSize);
    }
    monte_carlo(samples, seed, |rng| normalized_power_trace(&sample_goe(n, rng), k))
}

/// `E tr(Y^k)` for `Y = G*G/N`, `G` of size `m×n`.
pub fn wishart_power_estimate(m: usize, n: usize, k: usize, samples: usize, seed: u64) -> Result<McEstimate, LabError> {
    if n == 0 || m == 0 {
        return Err(LabError::ZeroSize);
    }
    monte_carlo(samples, seed, |rng| {
        let (re, im) = sample_wishart_parts(m, n, rng);
        hermitian_power_trace(&re, &im, k)
    })
}

/// `E tr(XA₁XA₂⋯XAₙ)` for constant real matrices.
pub fn goe_word_estimate(mats: &[DMatrix<f64>], samples: usize, seed: u64) -> Result<McEstimate, LabError> {
    let n = mats.first().map(|m| m.nrows()).ok_or(LabError::EmptyEnsemble)?;
    if let Some(m) = mats.iter().find(|m| m.nrows() != n || m.ncols() != n) {
        return Err(LabError::DimensionMismatch { expected: n, found: m.nrows() });
    }
    monte_carlo(samples, seed, |rng| {
        let x = sample_goe(n, rng);
        let mut acc = DMatrix::<f64>::identity(n, n);
        for a in mats {
            acc = acc * &x * a;
        }
        acc.trace() / n as f64
    })
}

/// The random matrix model behind an infinitesimal estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Sampler {
    Goe,
    /// Complex Wishart with `M = c·N + c′` rows.
    Wishart { c: u64, c_prime: u64 },
}

impl Sampler {
    fn rows(&self, n: usize) -> usize {
        match *self {
            Sampler::Goe => n,
            Sampler::Wishart { c, c_prime } => c as usize * n + c_prime as usize,
        }
    }

    fn power_estimate(&self, n: usize, k: usize, samples: usize, seed: u64) -> Result<McEstimate, LabError> {
        match self {
            Sampler::Goe => goe_power_estimate(n, k, samples, seed),
            Sampler::Wishart { .. } => wishart_power_estimate(self.rows(n), n, k, samples, seed),
        }
    }
}

/// Estimates of `m = lim E tr(x^k)` and `m′ = lim N(E tr(x^k) − m)`.
#[derive(Clone, Debug, PartialEq)]
pub struct InfinitesimalEstimate {
    pub m: f64,
    pub m_std_error: f64,
    pub m_prime: f64,
    pub m_prime_std_error: f64,
    pub per_size: Vec<(usize, McEstimate)>,
}

impl InfinitesimalEstimate {
    pub fn to_json(&self) -> Value {
        json!({
            "m": {"estimate": self.m, "std_error": self.m_std_error},
            "m_prime": {"estimate": self.m_prime, "std_error": self.m_prime_std_error},
            "per_size": self.per_size.iter().map(|(n, e)| json!({"N": n, "mean": e.mean, "std_error": e.std_error})).collect::<Vec<_>>(),
        })
    }
}

/// With a known limit `m`, the two largest sizes `N₁ < N₂` give
/// `d_i = N_i(E_i − m)` and the `1/N` correction is eliminated:
/// `m′ ≈ (N₂d₂ − N₁d₁)/(N₂ − N₁)`. Without one, `E(N) ≈ m + m′/N` is fitted
/// through the same two points. Each size uses its own seed stream block.
pub fn infinitesimal_estimator(
    sampler: Sampler,
    k: usize,
    ladder: &[usize],
    samples: usize,
    seed: u64,
    known_limit: Option<f64>,
) -> Result<InfinitesimalEstimate, LabError> {
    if ladder.len() < 2 {
        return Err(LabError::LadderTooShort { needed: 2, found: ladder.len() });
    }
    if samples < 2 {
        return Err(LabError::NoSamples);
    }
    let per_size = ladder
        .iter()
        .enumerate()
        .map(|(i, &n)| sampler.power_estimate(n, k, samples, seed.wrapping_add(i as u64 * 0x9E37_79B9)).map(|e| (n, e)))
        .collect::<Result<Vec<_>, _>>()?;
    let (n1, e1) = per_size[per_size.len() - 2];
    let (n2, e2) = per_size[per_size.len() - 1];
    let (n1, n2) = (n1 as f64, n2 as f64);
    Ok(match known_limit {
        Some(m) => {
            let (w1, w2) = (n1 * n1 / (n2 - n1), n2 * n2 / (n2 - n1));
            let m_prime = w2 * (e2.mean - m) - w1 * (e1.mean - m);
            let se = ((w2 * e2.std_error).powi(2) + (w1 * e1.std_error).powi(2)).sqrt();
            InfinitesimalEstimate { m, m_std_error: 0.0, m_prime, m_prime_std_error: se, per_size }
        }
        None => {
            let w = 1.0 / (1.0 / n1 - 1.0 / n2);
            let m_prime = w * (e1.mean - e2.mean);
            let m_prime_se = w * (e1.std_error.powi(2) + e2.std_error.powi(2)).sqrt();
            let m = e2.mean - m_prime / n2;
            let m_se = (e2.std_error.powi(2) + (m_prime_se / n2).powi(2)).sqrt();
            InfinitesimalEstimate { m, m_std_error: m_se, m_prime, m_prime_std_error: m_prime_se, per_size }
        }
    })
}
