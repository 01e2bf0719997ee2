//! Exact `1/N` expansions of GOE and complex Wishart moments.
//!
//! GOE normalisation: `X = (G + Gᵗ)/√2` with `G` having iid `N(0, 1/N)`
//! entries, so `E tr X² = 1 + 1/N`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::nc::enumerate_nc;
use crate::poly::{LaurentPoly, Monomial};
use crate::scalar::{int, Rational, Scalar};
use crate::word::Word;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenusError {
    #[error("{what} with n = {n} exceeds the cap {cap} (raise it with {env})")]
    CapExceeded { what: &'static str, n: usize, cap: usize, env: &'static str },
    #[error("transpose marks are not meaningful for {0}")]
    Transpose(&'static str),
    #[error("n must be at least 1")]
    Empty,
}

/// Upper limits on word length for the exhaustive sums.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    pub goe_max_n: usize,
    pub wishart_max_n: usize,
}

pub const GOE_CAP_ENV: &str = "INFREE_GOE_MAX_N";
pub const WISHART_CAP_ENV: &str = "INFREE_WISHART_MAX_N";

impl Default for Caps {
    fn default() -> Self {
        Caps { goe_max_n: 16, wishart_max_n: 10 }
    }
}

impl Caps {
    /// Defaults overridden by `INFREE_GOE_MAX_N` / `INFREE_WISHART_MAX_N`.
    pub fn from_env() -> Self {
        let read = |key: &str, default: usize| {
            std::env::var(key).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(default)
        };
        let d = Caps::default();
        Caps { goe_max_n: read(GOE_CAP_ENV, d.goe_max_n), wishart_max_n: read(WISHART_CAP_ENV, d.wishart_max_n) }
    }

    pub fn check_goe(&self, n: usize) -> Result<(), GenusError> {
        if n > self.goe_max_n {
            return Err(GenusError::CapExceeded { what: "GOE moment", n, cap: self.goe_max_n, env: GOE_CAP_ENV });
        }
        Ok(())
    }

    pub fn check_wishart(&self, n: usize) -> Result<(), GenusError> {
        if n > self.wishart_max_n {
            return Err(GenusError::CapExceeded {
                what: "Wishart moment",
                n,
                cap: self.wishart_max_n,
                env: WISHART_CAP_ENV,
            });
        }
        Ok(())
    }
}

/// Small union-find over at most 64 points.
struct Dsu {
    parent: [u8; 64],
    blocks: usize,
}

impl Dsu {
    fn new(size: usize) -> Self {
        let mut parent = [0u8; 64];
        for (i, p) in parent.iter_mut().enumerate().take(size) {
            *p = i as u8;
        }
        Dsu { parent, blocks: size }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let up = self.parent[self.parent[x] as usize];
            self.parent[x] = up;
            x = up as usize;
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb as u8;
            self.blocks -= 1;
        }
    }
}

/// Calls `visit` with the partner array of every pairing of `[n]` whose
/// pairs satisfy `allowed`, parallel over the partner of the first point.
/// Per-branch results are combined in branch order.
fn fold_pairings<A, F, G>(n: usize, allowed: &G, init: impl Fn() -> A + Sync, visit: F, merge: impl Fn(A, A) -> A + Sync + Send) -> A
where
    A: Send,
    F: Fn(&mut A, &[usize]) + Sync,
    G: Fn(usize, usize) -> bool + Sync + ?Sized,
{
    if n == 0 {
        let mut acc = init();
        visit(&mut acc, &[]);
        return acc;
    }
    if n % 2 == 1 {
        return init();
    }
    fn rec<A, F: Fn(&mut A, &[usize]), G: Fn(usize, usize) -> bool + ?Sized>(
        partner: &mut [usize],
        allowed: &G,
        acc: &mut A,
        visit: &F,
    ) {
        let Some(first) = partner.iter().position(|&p| p == usize::MAX) else {
            visit(acc, partner);
            return;
        };
        for j in first + 1..partner.len() {
            if partner[j] == usize::MAX && allowed(first, j) {
                partner[first] = j;
                partner[j] = first;
                rec(partner, allowed, acc, visit);
                partner[j] = usize::MAX;
            }
        }
        partner[first] = usize::MAX;
    }
    let branches: Vec<A> = (1..n)
        .into_par_iter()
        .filter(|&j| allowed(0, j))
        .map(|j| {
            let mut acc = init();
            let mut partner = vec![usize::MAX; n];
            partner[0] = j;
            partner[j] = 0;
            rec(&mut partner, allowed, &mut acc, &visit);
            acc
        })
        .collect();
    branches.into_iter().fold(init(), merge)
}

/// `#(εγδγ⁻¹ε ∨ πδπδ) − (n/2 + 1)` for the sign class in which pair `b`
/// of `partner` has equal signs iff bit `b` of `same_mask` is set.
///
/// Pairs are numbered by their smaller point.
pub fn goe_class_exponent(partner: &[usize], same_mask: u64) -> i32 {
    let n = partner.len();
    let mut eps = vec![1i8; n];
    let mut pair = 0;
    for r in 0..n {
        let s = partner[r];
        if r < s {
            eps[s] = if same_mask >> pair & 1 == 1 { 1 } else { -1 };
            pair += 1;
        }
    }
    join_exponent(partner, &eps)
}

/// Same exponent for an arbitrary sign vector.
fn join_exponent(partner: &[usize], eps: &[i8]) -> i32 {
    let n = partner.len();
    let at = |k: usize, sign: i8| if sign > 0 { k } else { k + n };
    let mut dsu = Dsu::new(2 * n);
    for r in 0..n {
        let s = partner[r];
        if r < s {
            dsu.union(r, s);
            dsu.union(r + n, s + n);
        }
    }
    // εγδγ⁻¹ε pairs ε_k·k with −ε_{k−1}·(k−1).
    for k in 0..n {
        let p = (k + n - 1) % n;
        dsu.union(at(k, eps[k]), at(p, -eps[p]));
    }
    dsu.blocks as i32 - (n as i32 / 2 + 1)
}

fn histogram_to_poly(hist: BTreeMap<i32, BigInt>, scale: &Rational) -> LaurentPoly {
    let mut p = LaurentPoly::zero();
    for (e, count) in hist {
        p.add_term(Monomial { m: 0, n: e }, Rational::from_integer(count) * scale);
    }
    p
}

fn merge_hist(mut a: BTreeMap<i32, BigInt>, b: BTreeMap<i32, BigInt>) -> BTreeMap<i32, BigInt> {
    for (k, v) in b {
        *a.entry(k).or_insert_with(BigInt::zero) += v;
    }
    a
}

/// Colour-respecting GOE moment: each pair class carries multiplicity
/// `2^{n/2}`, which cancels the `2^{−n/2}` weight.
fn goe_poly_with(n: usize, allowed: &(dyn Fn(usize, usize) -> bool + Sync)) -> LaurentPoly {
    let classes = 1u64 << (n / 2);
    let hist = fold_pairings(
        n,
        allowed,
        BTreeMap::<i32, BigInt>::new,
        |acc, partner| {
            for mask in 0..classes {
                *acc.entry(goe_class_exponent(partner, mask)).or_insert_with(BigInt::zero) += 1;
            }
        },
        merge_hist,
    );
    histogram_to_poly(hist, &Rational::one())
}

/// `E tr Xⁿ` for the GOE as a polynomial in `N⁻¹`.
pub fn goe_moment_poly(n: usize, caps: &Caps) -> Result<LaurentPoly, GenusError> {
    if n == 0 {
        return Err(GenusError::Empty);
    }
    caps.check_goe(n)?;
    Ok(goe_poly_with(n, &|_, _| true))
}

/// The same polynomial from the unfactored sum over every `ε ∈ Z₂ⁿ`.
pub fn goe_moment_poly_full_sum(n: usize, caps: &Caps) -> Result<LaurentPoly, GenusError> {
    if n == 0 {
        return Err(GenusError::Empty);
    }
    caps.check_goe(n)?;
    if n % 2 == 1 {
        return Ok(LaurentPoly::zero());
    }
    let hist = fold_pairings(
        n,
        &|_, _| true,
        BTreeMap::<i32, BigInt>::new,
        |acc, partner| {
            for bits in 0u64..1 << n {
                let eps: Vec<i8> = (0..n).map(|k| if bits >> k & 1 == 1 { -1 } else { 1 }).collect();
                *acc.entry(join_exponent(partner, &eps)).or_insert_with(BigInt::zero) += 1;
            }
        },
        merge_hist,
    );
    let weight = Rational::new(BigInt::one(), BigInt::one() << (n / 2));
    Ok(histogram_to_poly(hist, &weight))
}

/// `m′ₙ`: the `N⁻¹` coefficient of [`goe_moment_poly`].
pub fn goe_infinitesimal_moment(n: usize, caps: &Caps) -> Result<Rational, GenusError> {
    Ok(goe_moment_poly(n, caps)?.coeff_inv(1))
}

/// `E tr(X_{i₁}⋯X_{iₙ})` for independent GOEs indexed by the word's
/// variables.
pub fn goe_mixed_moment_poly(word: &Word, caps: &Caps) -> Result<LaurentPoly, GenusError> {
    if word.is_empty() {
        return Err(GenusError::Empty);
    }
    if word.has_transpose() {
        return Err(GenusError::Transpose("GOE words"));
    }
    caps.check_goe(word.len())?;
    let vars = word.vars();
    Ok(goe_poly_with(word.len(), &|i, j| vars[i] == vars[j]))
}

/// Checks that expanding `((X + Y)/√2)ⁿ` over two independent GOEs gives
/// back [`goe_moment_poly`] exactly.
pub fn goe_sum_invariance_check(n: usize, caps: &Caps) -> Result<bool, GenusError> {
    let direct = goe_moment_poly(n, caps)?;
    let mut total = LaurentPoly::zero();
    for w in Word::all_of_length(2, n) {
        total = total + goe_mixed_moment_poly(&w, caps)?;
    }
    if n % 2 == 1 {
        return Ok(total.is_zero() && direct.is_zero());
    }
    let weight = Rational::new(BigInt::one(), BigInt::one() << (n / 2));
    Ok(total.scale(&weight) == direct)
}

/// Visits every permutation preserving the colour classes of `vars`.
fn for_each_colour_preserving(vars: &[usize], mut visit: impl FnMut(&[usize])) {
    let n = vars.len();
    let mut map = vec![0usize; n];
    let mut used = vec![false; n];
    fn rec(pos: usize, vars: &[usize], map: &mut [usize], used: &mut [bool], visit: &mut dyn FnMut(&[usize])) {
        if pos == vars.len() {
            visit(map);
            return;
        }
        for j in 0..vars.len() {
            if !used[j] && vars[j] == vars[pos] {
                used[j] = true;
                map[pos] = j;
                rec(pos + 1, vars, map, used, visit);
                used[j] = false;
            }
        }
    }
    rec(0, vars, &mut map, &mut used, &mut visit);
}

fn cycles_of(map: &[usize]) -> usize {
    crate::perm::cycle_count_of(map)
}

/// `E tr(Y_{i₁}⋯Y_{iₙ})` for independent complex Wishart matrices
/// `Y = (1/N)G*G`, `G` of size `M × N`, as a polynomial in `M` and `N⁻¹`:
/// `Σ_{π ≤ ker(i)} M^{#(π)} N^{#(π⁻¹γ) − (n+1)}`.
pub fn wishart_moment_poly(word: &Word, caps: &Caps) -> Result<LaurentPoly, GenusError> {
    if word.is_empty() {
        return Err(GenusError::Empty);
    }
    if word.has_transpose() {
        return Err(GenusError::Transpose("Wishart words"));
    }
    let n = word.len();
    caps.check_wishart(n)?;
    let vars = word.vars();
    let mut counts: BTreeMap<(u32, i32), u64> = BTreeMap::new();
    let mut kreweras = vec![0usize; n];
    let mut inverse = vec![0usize; n];
    for_each_colour_preserving(&vars, |pi| {
        for (i, &j) in pi.iter().enumerate() {
            inverse[j] = i;
        }
        for (i, k) in kreweras.iter_mut().enumerate() {
            *k = inverse[(i + 1) % n];
        }
        let key = (cycles_of(pi) as u32, cycles_of(&kreweras) as i32 - (n as i32 + 1));
        *counts.entry(key).or_insert(0) += 1;
    });
    let mut p = LaurentPoly::zero();
    for ((m, e), count) in counts {
        p.add_term(Monomial { m, n: e }, int(count as i64));
    }
    Ok(p)
}

/// Limit pair `(μ, μ′)` of a Wishart word for `M/N → c`, `M − cN → c′`:
/// `Σ c^{#(π)}` and `Σ c′ #(π) c^{#(π)−1}` over `π ∈ NC(n)`, `π ≤ ker(i)`.
pub fn wishart_limits(word: &Word, c: &Rational, c_prime: &Rational) -> (Rational, Rational) {
    let ker = word.kernel();
    let mut mu = Rational::zero();
    let mut mu_prime = Rational::zero();
    for pi in enumerate_nc(word.len()) {
        if !pi.refines(&ker) {
            continue;
        }
        let k = pi.block_count() as u32;
        mu += Scalar::pow(c, k);
        mu_prime += c_prime * int(k as i64) * Scalar::pow(c, k - 1);
    }
    (mu, mu_prime)
}
