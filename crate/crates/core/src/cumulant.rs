//! Moment ↔ cumulant transforms for infinitesimal distributions.
//!
//! A pair `(φ, φ′)` is stored as one functional with values in dual numbers
//! `φ + εφ′`. The whole moment–cumulant machinery then runs over `Dual<T>`:
//! the ε-part of a product over blocks is exactly the Leibniz sum that
//! defines `∂κ_π` and `∂φ_π`.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::genus::{goe_mixed_moment_poly, wishart_moment_poly, Caps, GenusError};
use crate::nc::{enumerate_nc, mobius_nc_product};
use crate::partition::SetPartition;
use crate::perm::GroundSet;
use crate::scalar::{format_rational, parse_rational, Dual, Rational, Scalar};
use crate::word::Word;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CumulantError {
    #[error("no value for word {0}")]
    MissingWord(String),
    #[error("word {0} is not alternating between the groups")]
    NotAlternating(String),
    #[error("letter {0} is not centred")]
    NotCentered(String),
    #[error("partition size {partition} does not match word length {word}")]
    LengthMismatch { partition: usize, word: usize },
    #[error("variable {0} belongs to no group")]
    Ungrouped(usize),
    #[error("odd order {0} of (x+y)/√2 has an irrational coefficient")]
    Irrational(usize),
    #[error("malformed functional JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Genus(#[from] GenusError),
}

/// Word-indexed dual values. The empty word is implicitly `1 + 0ε`.
#[derive(Clone, Debug, PartialEq)]
pub struct WordTable<T: Scalar> {
    n_max: usize,
    values: BTreeMap<Word, Dual<T>>,
}

/// `(φ, φ′)` on words up to length `n_max`.
pub type InfFunctional<T> = WordTable<T>;

/// `(κ, κ′)` on words up to length `n_max`.
pub type InfCumulants<T> = WordTable<T>;

impl<T: Scalar> WordTable<T> {
    pub fn new(n_max: usize) -> Self {
        WordTable { n_max, values: BTreeMap::new() }
    }

    /// One variable: `entries[k] = (value, ε-value)` of order `k + 1`.
    pub fn univariate(entries: &[(T, T)]) -> Self {
        let mut t = WordTable::new(entries.len());
        for (k, (a, b)) in entries.iter().enumerate() {
            t.insert(Word::power(0, k + 1), a.clone(), b.clone());
        }
        t
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn insert(&mut self, word: Word, value: T, eps: T) {
        self.n_max = self.n_max.max(word.len());
        self.values.insert(word, Dual::new(value, eps));
    }

    pub fn insert_dual(&mut self, word: Word, value: Dual<T>) {
        self.n_max = self.n_max.max(word.len());
        self.values.insert(word, value);
    }

    pub fn get(&self, word: &Word) -> Option<Dual<T>> {
        if word.is_empty() {
            return Some(Dual::one());
        }
        self.values.get(word).cloned()
    }

    pub fn require(&self, word: &Word) -> Result<Dual<T>, CumulantError> {
        self.get(word).ok_or_else(|| CumulantError::MissingWord(word.to_string()))
    }

    pub fn words(&self) -> impl Iterator<Item = &Word> {
        self.values.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, &Dual<T>)> {
        self.values.iter()
    }

    /// Order-`n` entries of a univariate table.
    pub fn power(&self, n: usize) -> Option<Dual<T>> {
        self.get(&Word::power(0, n))
    }
}

impl<T: Scalar> Default for WordTable<T> {
    fn default() -> Self {
        WordTable::new(0)
    }
}

/// NC(n) lists grouped by the multiset of subwords they cut out of a word.
struct NcCache {
    lists: HashMap<usize, Vec<SetPartition>>,
}

impl NcCache {
    fn new() -> Self {
        NcCache { lists: HashMap::new() }
    }

    fn nc(&mut self, n: usize) -> &[SetPartition] {
        self.lists.entry(n).or_insert_with(|| enumerate_nc(n))
    }

    /// `(subwords of π, multiplicity)` for every `π ∈ NC(n)`, optionally
    /// skipping `1ₙ`.
    fn block_types(&mut self, word: &Word, skip_full: bool) -> Vec<(Vec<Word>, i64)> {
        let mut counts: HashMap<Vec<Word>, i64> = HashMap::new();
        for pi in self.nc(word.len()) {
            if skip_full && pi.block_count() == 1 {
                continue;
            }
            let mut parts: Vec<Word> = pi.blocks().iter().map(|b| word.select(b)).collect();
            parts.sort();
            *counts.entry(parts).or_insert(0) += 1;
        }
        let mut out: Vec<_> = counts.into_iter().collect();
        out.sort();
        out
    }
}

fn product<T: Scalar>(parts: &[Word], lookup: &mut dyn FnMut(&Word) -> Result<Dual<T>, CumulantError>) -> Result<Dual<T>, CumulantError> {
    let mut acc = Dual::<T>::one();
    for w in parts {
        acc = acc * lookup(w)?;
    }
    Ok(acc)
}

/// Recursive extraction of `(κ, κ′)` from `(φ, φ′)`:
/// `κ̂(w) = φ̂(w) − Σ_{π ≠ 1ₙ} ∏_{V∈π} κ̂(w|V)` over dual numbers.
pub fn moments_to_cumulants<T: Scalar>(f: &InfFunctional<T>) -> Result<InfCumulants<T>, CumulantError> {
    let mut cache = NcCache::new();
    let mut out: WordTable<T> = WordTable::new(f.n_max);
    let mut words: Vec<&Word> = f.words().collect();
    words.sort_by_key(|w| w.len());
    for word in words {
        let value = cumulant_of(word, f, &mut out, &mut cache)?;
        out.insert_dual(word.clone(), value);
    }
    Ok(out)
}

fn cumulant_of<T: Scalar>(
    word: &Word,
    f: &InfFunctional<T>,
    memo: &mut WordTable<T>,
    cache: &mut NcCache,
) -> Result<Dual<T>, CumulantError> {
    if let Some(v) = memo.values.get(word) {
        return Ok(v.clone());
    }
    let mut acc = f.require(word)?;
    for (parts, count) in cache.block_types(word, true) {
        // Proper subwords are shorter; fill them in first if absent.
        for w in &parts {
            if !memo.values.contains_key(w) {
                let v = cumulant_of(w, f, memo, cache)?;
                memo.insert_dual(w.clone(), v);
            }
        }
        let prod = product(&parts, &mut |w| {
            memo.values.get(w).cloned().ok_or_else(|| CumulantError::MissingWord(w.to_string()))
        })?;
        acc = acc - Dual::from_i64(count) * prod;
    }
    Ok(acc)
}

/// `φ̂(w) = Σ_{π∈NC(n)} ∏_{V∈π} κ̂(w|V)` for every word in `k`.
pub fn cumulants_to_moments<T: Scalar>(k: &InfCumulants<T>) -> Result<InfFunctional<T>, CumulantError> {
    let mut cache = NcCache::new();
    let mut out = WordTable::new(k.n_max);
    for word in k.words() {
        let mut acc = Dual::<T>::zero();
        for (parts, count) in cache.block_types(word, false) {
            acc = acc + Dual::from_i64(count) * product(&parts, &mut |w| k.require(w))?;
        }
        out.insert_dual(word.clone(), acc);
    }
    Ok(out)
}

/// Univariate forward map `κ̂ₙ ↦ (mₙ, m′ₙ)` for orders `1..=n_max`.
pub fn univariate_cumulants_to_moments<T: Scalar>(k: &[(T, T)]) -> Result<Vec<(T, T)>, CumulantError> {
    let f = cumulants_to_moments(&WordTable::univariate(k))?;
    Ok((1..=k.len()).map(|n| f.power(n).map(|d| (d.re, d.eps)).expect("every order present")).collect())
}

/// Univariate inverse map `(mₙ, m′ₙ) ↦ (κₙ, κ′ₙ)`.
pub fn univariate_moments_to_cumulants<T: Scalar>(m: &[(T, T)]) -> Result<Vec<(T, T)>, CumulantError> {
    let k = moments_to_cumulants(&WordTable::univariate(m))?;
    Ok((1..=m.len()).map(|n| k.power(n).map(|d| (d.re, d.eps)).expect("every order present")).collect())
}

/// `∂φ_π(w) = Σ_{V∈π} φ′(w|V) ∏_{W≠V} φ(w|W)`, as an explicit Leibniz sum.
pub fn partial_phi<T: Scalar>(pi: &SetPartition, f: &InfFunctional<T>, word: &Word) -> Result<T, CumulantError> {
    if pi.ground().size() != word.len() {
        return Err(CumulantError::LengthMismatch { partition: pi.ground().size(), word: word.len() });
    }
    let values: Vec<Dual<T>> = pi.blocks().iter().map(|b| f.require(&word.select(b))).collect::<Result<_, _>>()?;
    let mut total = T::zero();
    for v in 0..values.len() {
        let mut term = values[v].eps.clone();
        for (w, value) in values.iter().enumerate() {
            if w != v {
                term = term * value.re.clone();
            }
        }
        total = total + term;
    }
    Ok(total)
}

/// `φ_π(w) = ∏_{V∈π} φ(w|V)`.
pub fn phi_pi<T: Scalar>(pi: &SetPartition, f: &InfFunctional<T>, word: &Word) -> Result<T, CumulantError> {
    pi.blocks().iter().try_fold(T::one(), |acc, b| Ok(acc * f.require(&word.select(b))?.re))
}

/// `(κₙ, κ′ₙ)(w)` via `Σ_π μ(π, 1ₙ) (φ_π, ∂φ_π)`.
pub fn mobius_inversion_cumulant<T: Scalar>(f: &InfFunctional<T>, word: &Word) -> Result<Dual<T>, CumulantError> {
    let n = word.len();
    let one = SetPartition::full(GroundSet::Plain(n));
    let mut kappa = T::zero();
    let mut kappa_prime = T::zero();
    for pi in enumerate_nc(n) {
        let mu = mobius_nc_product(&pi, &one).expect("NC interval");
        let mu = T::from_i64(mu.to_i64().expect("Möbius value fits in i64"));
        kappa = kappa + mu.clone() * phi_pi(&pi, f, word)?;
        kappa_prime = kappa_prime + mu * partial_phi(&pi, f, word)?;
    }
    Ok(Dual::new(kappa, kappa_prime))
}

/// Mixed words whose `(κ, κ′)` is not negligible.
#[derive(Clone, Debug, PartialEq)]
pub struct FreenessReport<T: Scalar> {
    pub checked: usize,
    pub nonzero_mixed: Vec<(Word, Dual<T>)>,
}

impl<T: Scalar> FreenessReport<T> {
    pub fn is_free(&self) -> bool {
        self.nonzero_mixed.is_empty()
    }
}

fn group_of(groups: &[Vec<usize>], var: usize) -> Result<usize, CumulantError> {
    groups.iter().position(|g| g.contains(&var)).ok_or(CumulantError::Ungrouped(var))
}

/// Cumulants of every word touching at least two groups; `tol` is the
/// zero threshold in float mode and ignored in exact mode.
pub fn check_inf_freeness<T: Scalar>(
    f: &InfFunctional<T>,
    groups: &[Vec<usize>],
    tol: f64,
) -> Result<FreenessReport<T>, CumulantError> {
    let k = moments_to_cumulants(f)?;
    let mut report = FreenessReport { checked: 0, nonzero_mixed: Vec::new() };
    for (word, value) in k.iter() {
        let mut seen: Vec<usize> = word.letters().iter().map(|l| group_of(groups, l.var)).collect::<Result<_, _>>()?;
        seen.sort_unstable();
        seen.dedup();
        if seen.len() < 2 {
            continue;
        }
        report.checked += 1;
        if !value.is_negligible(tol) {
            report.nonzero_mixed.push((word.clone(), value.clone()));
        }
    }
    Ok(report)
}

/// The value of `φ′(a₁⋯aₙ)` forced by infinitesimal freeness for an
/// alternating word of centred letters: `0` for even `n`, and
/// `φ(a₁aₙ)φ(a₂a_{n−1})⋯φ(a_m a_{m+2})·φ′(a_{m+1})` for `n = 2m + 1`.
pub fn inf_free_alternating_moment<T: Scalar>(
    f: &InfFunctional<T>,
    groups: &[Vec<usize>],
    word: &Word,
    tol: f64,
) -> Result<T, CumulantError> {
    let letters = word.letters();
    for pair in letters.windows(2) {
        if group_of(groups, pair[0].var)? == group_of(groups, pair[1].var)? {
            return Err(CumulantError::NotAlternating(word.to_string()));
        }
    }
    for l in letters {
        let single = Word::new(vec![*l]);
        if !f.require(&single)?.re.is_negligible(tol) {
            return Err(CumulantError::NotCentered(single.to_string()));
        }
    }
    let n = letters.len();
    if n % 2 == 0 {
        return Ok(T::zero());
    }
    let m = n / 2;
    let mut acc = f.require(&Word::new(vec![letters[m]]))?.eps;
    for j in 0..m {
        acc = acc * f.require(&Word::new(vec![letters[j], letters[n - 1 - j]]))?.re;
    }
    Ok(acc)
}

/// `∂κ_π` for the GOE limit (`κ₂ = 1`, `κ′_{2k} = 1`): `n/2` on pairings,
/// `1` when one even block exceeds size two and the rest are pairs, else `0`.
pub fn goe_partial_kappa(pi: &SetPartition) -> Rational {
    let sizes: Vec<usize> = pi.blocks().iter().map(Vec::len).collect();
    if sizes.iter().any(|s| s % 2 == 1) {
        return Rational::zero();
    }
    let big = sizes.iter().filter(|&&s| s > 2).count();
    match big {
        0 => Rational::from_integer(BigInt::from(sizes.len())),
        1 => Rational::from_integer(BigInt::from(1)),
        _ => Rational::zero(),
    }
}

/// Limit data `(φ, φ′)` of independent GOEs: the `N⁰` and `N⁻¹`
/// coefficients of the coloured genus expansion, on every word of length
/// `1..=n_max` over `vars` variables.
pub fn goe_limit_functional(vars: usize, n_max: usize, caps: &Caps) -> Result<InfFunctional<Rational>, CumulantError> {
    let mut f = WordTable::new(n_max);
    for n in 1..=n_max {
        for word in Word::all_of_length(vars, n) {
            let poly = goe_mixed_moment_poly(&word, caps)?;
            f.insert(word, poly.coeff_inv(0), poly.coeff_inv(1));
        }
    }
    Ok(f)
}

/// Symbolic `N⁰`/`N⁻¹` coefficients of the Wishart genus expansion at
/// `M = cN + c′`, on every word of length `1..=n_max` over `vars` colours.
pub fn wishart_limit_functional(
    vars: usize,
    n_max: usize,
    c: &Rational,
    c_prime: &Rational,
    caps: &Caps,
) -> Result<InfFunctional<Rational>, CumulantError> {
    let mut f = WordTable::new(n_max);
    for n in 1..=n_max {
        for word in Word::all_of_length(vars, n) {
            let poly = wishart_moment_poly(&word, caps)?.substitute_m(c, c_prime);
            f.insert(word, poly.coeff_inv(0), poly.coeff_inv(1));
        }
    }
    Ok(f)
}

/// `(κ, κ′)` of `z = (x + y)/√2` for two GOE colours next to the values
/// infinitesimal freeness of `x` and `y` would force.
#[derive(Clone, Debug, PartialEq)]
pub struct NonFreenessReport {
    /// `(κₙ(z), κ′ₙ(z))` for `n = 1..=n_max`.
    pub observed: Vec<(Rational, Rational)>,
    /// `2^{−n/2}(κₙ(x) + κₙ(y))` and the same for `κ′`.
    pub free_prediction: Vec<(Rational, Rational)>,
    pub mixed: FreenessReport<Rational>,
}

impl NonFreenessReport {
    /// Orders where the prediction fails.
    pub fn discrepancies(&self) -> Vec<usize> {
        (0..self.observed.len()).filter(|&i| self.observed[i] != self.free_prediction[i]).map(|i| i + 1).collect()
    }

    pub fn to_json(&self) -> Value {
        let pairs = |v: &[(Rational, Rational)]| -> Value {
            v.iter().map(|(a, b)| json!([format_rational(a), format_rational(b)])).collect()
        };
        json!({
            "kappa_z": pairs(&self.observed),
            "free_prediction": pairs(&self.free_prediction),
            "discrepant_orders": self.discrepancies(),
            "mixed_checked": self.mixed.checked,
            "mixed_nonzero": self.mixed.nonzero_mixed.len(),
        })
    }
}

/// `2^{−n/2}` for even `n`; odd orders carry a `√2` and must vanish.
fn half_power(n: usize) -> Rational {
    Rational::new(BigInt::one(), BigInt::from(2).pow((n / 2) as u32))
}

/// `φ(zⁿ) = 2^{−n/2} Σ_w φ(w)` over all words `w` in `x, y` of length `n`.
fn normalized_sum_moments(f: &InfFunctional<Rational>, n_max: usize) -> Result<Vec<(Rational, Rational)>, CumulantError> {
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let mut acc = Dual::<Rational>::zero();
        for w in Word::all_of_length(2, n) {
            acc = acc + f.require(&w)?;
        }
        if n % 2 == 1 {
            if !acc.is_zero() {
                return Err(CumulantError::Irrational(n));
            }
            out.push((Rational::zero(), Rational::zero()));
        } else {
            let s = half_power(n);
            out.push((acc.re * &s, acc.eps * &s));
        }
    }
    Ok(out)
}

/// Compares the cumulants of `(x + y)/√2` for independent GOEs with what
/// infinitesimal freeness of `x, y` would give.
pub fn goe_non_freeness(n_max: usize, caps: &Caps) -> Result<NonFreenessReport, CumulantError> {
    let f = goe_limit_functional(2, n_max, caps)?;
    let observed = univariate_moments_to_cumulants(&normalized_sum_moments(&f, n_max)?)?;
    let k = moments_to_cumulants(&f)?;
    let mut free_prediction = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let kx = k.require(&Word::power(0, n))?;
        let ky = k.require(&Word::power(1, n))?;
        let sum = kx + ky;
        if n % 2 == 1 {
            if !sum.is_zero() {
                return Err(CumulantError::Irrational(n));
            }
            free_prediction.push((Rational::zero(), Rational::zero()));
        } else {
            let s = half_power(n);
            free_prediction.push((sum.re * &s, sum.eps * &s));
        }
    }
    let mixed = check_inf_freeness(&f, &[vec![0], vec![1]], 0.0)?;
    Ok(NonFreenessReport { observed, free_prediction, mixed })
}

/// Words over `vars` untransposed variables, lengths `1..=n_max`.
pub fn all_words(vars: usize, n_max: usize) -> Vec<Word> {
    (1..=n_max).flat_map(|n| Word::all_of_length(vars, n)).collect()
}

/// Serialisation of table entries in either arithmetic mode.
pub trait JsonScalar: Scalar {
    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Option<Self>;
}

impl JsonScalar for Rational {
    fn to_json(&self) -> Value {
        json!(format_rational(self))
    }

    fn from_json(v: &Value) -> Option<Self> {
        match v {
            Value::String(s) => parse_rational(s),
            Value::Number(n) if n.is_i64() => Some(Rational::from_integer(BigInt::from(n.as_i64()?))),
            Value::Number(n) => parse_rational(&n.to_string()),
            _ => None,
        }
    }
}

impl JsonScalar for f64 {
    fn to_json(&self) -> Value {
        json!(self)
    }

    fn from_json(v: &Value) -> Option<Self> {
        match v {
            Value::Number(n) => n.as_f64(),
            Value::String(s) => s.parse().ok().or_else(|| parse_rational(s).map(|r| Scalar::to_f64(&r))),
            _ => None,
        }
    }
}

impl<T: JsonScalar> WordTable<T> {
    /// `{"mode": "exact", "n_max": n, "words": {"1,1,2t": [φ, φ′]}}`.
    pub fn to_json(&self) -> Value {
        let mut words = Map::new();
        for (w, v) in &self.values {
            words.insert(w.to_string(), json!([v.re.to_json(), v.eps.to_json()]));
        }
        json!({ "mode": T::mode(), "n_max": self.n_max, "words": words })
    }

    /// Accepts the `words` form above, or the univariate shorthand
    /// `{"moments": [m₁, …], "inf_moments": [m′₁, …]}`.
    pub fn from_json(v: &Value) -> Result<Self, CumulantError> {
        let bad = |why: &str| CumulantError::Json(why.to_string());
        if let Some(mode) = v.get("mode").and_then(Value::as_str) {
            if mode != T::mode() {
                return Err(bad(&format!("mode {mode:?} does not match {:?}", T::mode())));
            }
        }
        if let Some(words) = v.get("words") {
            let words = words.as_object().ok_or_else(|| bad("words must be an object"))?;
            let mut t = WordTable::new(0);
            for (key, pair) in words {
                let word: Word = key.parse().map_err(|_| bad(&format!("bad word {key:?}")))?;
                let arr = pair.as_array().filter(|a| a.len() == 2).ok_or_else(|| bad("values must be [φ, φ′]"))?;
                let a = T::from_json(&arr[0]).ok_or_else(|| bad("bad number"))?;
                let b = T::from_json(&arr[1]).ok_or_else(|| bad("bad number"))?;
                t.insert(word, a, b);
            }
            return Ok(t);
        }
        let moments = v.get("moments").and_then(Value::as_array).ok_or_else(|| bad("need words or moments"))?;
        let inf = v.get("inf_moments").and_then(Value::as_array);
        let mut entries = Vec::new();
        for (i, m) in moments.iter().enumerate() {
            let a = T::from_json(m).ok_or_else(|| bad("bad number"))?;
            let b = match inf {
                Some(arr) => T::from_json(arr.get(i).ok_or_else(|| bad("inf_moments too short"))?)
                    .ok_or_else(|| bad("bad number"))?,
                None => T::zero(),
            };
            entries.push((a, b));
        }
        Ok(WordTable::univariate(&entries))
    }
}
