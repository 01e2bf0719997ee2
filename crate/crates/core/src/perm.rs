//! Permutations of `[n]` and of the signed set `[±n]`.
//!
//! Points are stored as 0-based indices. For `[±n]` the label `k` sits at
//! index `k - 1` and `-k` at index `n + k - 1`; [`GroundSet`] is the only
//! place that knows this encoding.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::partition::UnionFind;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PermError {
    #[error("ground set mismatch: {left} vs {right}")]
    GroundMismatch { left: GroundSet, right: GroundSet },
    #[error("mapping is not a bijection of {0}")]
    NotBijective(GroundSet),
    #[error("label {label} is not in {ground}")]
    LabelOutOfRange { label: i64, ground: GroundSet },
    #[error("the generated group does not act transitively ({orbits} orbits)")]
    NonTransitive { orbits: usize },
    #[error("malformed cycle notation: {0}")]
    Parse(String),
    #[error("sign vector entries must be +1 or -1")]
    BadSign,
}

/// Either `[n] = {1..n}` or `[±n] = {1..n, -n..-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroundSet {
    Plain(usize),
    Signed(usize),
}

impl GroundSet {
    /// Number of points.
    pub fn size(self) -> usize {
        match self {
            GroundSet::Plain(n) => n,
            GroundSet::Signed(n) => 2 * n,
        }
    }

    /// The `n` in `[n]` or `[±n]`.
    pub fn half(self) -> usize {
        match self {
            GroundSet::Plain(n) | GroundSet::Signed(n) => n,
        }
    }

    pub fn is_signed(self) -> bool {
        matches!(self, GroundSet::Signed(_))
    }

    pub fn index_of(self, label: i64) -> Result<usize, PermError> {
        let n = self.half() as i64;
        let out = PermError::LabelOutOfRange { label, ground: self };
        match self {
            GroundSet::Plain(_) if (1..=n).contains(&label) => Ok(label as usize - 1),
            GroundSet::Signed(_) if (1..=n).contains(&label) => Ok(label as usize - 1),
            GroundSet::Signed(_) if (-n..=-1).contains(&label) => Ok((n - label - 1) as usize),
            _ => Err(out),
        }
    }

    pub fn label_of(self, index: usize) -> i64 {
        let n = self.half();
        if index < n {
            index as i64 + 1
        } else {
            -((index - n) as i64 + 1)
        }
    }

    /// Index of `-label`; for plain sets this is the identity.
    pub fn negate(self, index: usize) -> usize {
        match self {
            GroundSet::Plain(_) => index,
            GroundSet::Signed(n) => {
                if index < n {
                    index + n
                } else {
                    index - n
                }
            }
        }
    }

    /// Index of `|label|` inside `[n]`.
    pub fn abs_index(self, index: usize) -> usize {
        index % self.half().max(1)
    }
}

impl fmt::Display for GroundSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundSet::Plain(n) => write!(f, "[{n}]"),
            GroundSet::Signed(n) => write!(f, "[±{n}]"),
        }
    }
}

/// A bijection of a [`GroundSet`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    ground: GroundSet,
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(ground: GroundSet) -> Self {
        Permutation { ground, map: (0..ground.size()).collect() }
    }

    /// Builds from an index map, checking bijectivity.
    pub fn from_map(ground: GroundSet, map: Vec<usize>) -> Result<Self, PermError> {
        if map.len() != ground.size() {
            return Err(PermError::NotBijective(ground));
        }
        let mut seen = vec![false; map.len()];
        for &image in &map {
            if image >= map.len() || seen[image] {
                return Err(PermError::NotBijective(ground));
            }
            seen[image] = true;
        }
        Ok(Permutation { ground, map })
    }

    pub(crate) fn from_map_unchecked(ground: GroundSet, map: Vec<usize>) -> Self {
        debug_assert!(Permutation::from_map(ground, map.clone()).is_ok());
        Permutation { ground, map }
    }

    /// Builds from cycles written with labels; unlisted points are fixed.
    pub fn from_cycles(ground: GroundSet, cycles: &[Vec<i64>]) -> Result<Self, PermError> {
        let mut map: Vec<Option<usize>> = vec![None; ground.size()];
        for cycle in cycles {
            let idx: Vec<usize> = cycle.iter().map(|&l| ground.index_of(l)).collect::<Result<_, _>>()?;
            for (k, &from) in idx.iter().enumerate() {
                if map[from].is_some() {
                    return Err(PermError::NotBijective(ground));
                }
                map[from] = Some(idx[(k + 1) % idx.len()]);
            }
        }
        let map = map.iter().enumerate().map(|(i, m)| m.unwrap_or(i)).collect();
        Permutation::from_map(ground, map)
    }

    /// Parses cycle notation such as `"(1,7)(2,3)"` or `"(1,-7)(-1,7)"`.
    pub fn parse(text: &str, ground: GroundSet) -> Result<Self, PermError> {
        Permutation::from_cycles(ground, &parse_cycles(text)?)
    }

    /// Parses cycle notation, inferring the smallest ground set that holds
    /// every label (signed if any label is negative).
    pub fn parse_infer(text: &str) -> Result<Self, PermError> {
        let cycles = parse_cycles(text)?;
        let max = cycles.iter().flatten().map(|l| l.unsigned_abs() as usize).max().unwrap_or(0);
        let signed = cycles.iter().flatten().any(|&l| l < 0);
        let ground = if signed { GroundSet::Signed(max) } else { GroundSet::Plain(max) };
        Permutation::from_cycles(ground, &cycles)
    }

    /// The long cycle `γ = (1, 2, …, n)` on `[n]`.
    pub fn long_cycle(n: usize) -> Self {
        let map = (0..n).map(|i| (i + 1) % n).collect();
        Permutation { ground: GroundSet::Plain(n), map }
    }

    /// `γ_{m,n} = (1, …, m)(m+1, …, m+n)` on `[m+n]`.
    pub fn annular_cycle(m: usize, n: usize) -> Self {
        let map = (0..m + n)
            .map(|i| if i < m { (i + 1) % m } else { m + (i - m + 1) % n })
            .collect();
        Permutation { ground: GroundSet::Plain(m + n), map }
    }

    /// `δ(k) = -k` on `[±n]`.
    pub fn delta(n: usize) -> Self {
        let ground = GroundSet::Signed(n);
        let map = (0..2 * n).map(|i| ground.negate(i)).collect();
        Permutation { ground, map }
    }

    /// Embeds a permutation of `[n]` into `[±n]`, acting trivially on the
    /// negative labels.
    pub fn embed_signed(&self) -> Self {
        let n = self.ground.half();
        let mut map: Vec<usize> = (0..2 * n).collect();
        map[..n].copy_from_slice(&self.map[..n]);
        Permutation { ground: GroundSet::Signed(n), map }
    }

    pub fn ground(&self) -> GroundSet {
        self.ground
    }

    /// Number of points moved or fixed.
    pub fn size(&self) -> usize {
        self.map.len()
    }

    /// Image of an index.
    #[inline]
    pub fn at(&self, index: usize) -> usize {
        self.map[index]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    /// Image of a label.
    pub fn image(&self, label: i64) -> Result<i64, PermError> {
        let i = self.ground.index_of(label)?;
        Ok(self.ground.label_of(self.map[i]))
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation, PermError> {
        if self.ground != other.ground {
            return Err(PermError::GroundMismatch { left: self.ground, right: other.ground });
        }
        Ok(self.compose_unchecked(other))
    }

    pub(crate) fn compose_unchecked(&self, other: &Permutation) -> Permutation {
        let map = other.map.iter().map(|&j| self.map[j]).collect();
        Permutation { ground: self.ground, map }
    }

    /// Composes a right-to-left chain `p₁ ∘ p₂ ∘ … ∘ p_k`.
    pub fn compose_all(chain: &[&Permutation]) -> Result<Permutation, PermError> {
        let (last, rest) = chain.split_last().expect("empty composition chain");
        rest.iter().rev().try_fold((*last).clone(), |acc, p| p.compose(&acc))
    }

    pub fn inverse(&self) -> Permutation {
        let mut map = vec![0; self.map.len()];
        for (i, &j) in self.map.iter().enumerate() {
            map[j] = i;
        }
        Permutation { ground: self.ground, map }
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &j)| i == j)
    }

    pub fn is_involution(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &j)| self.map[j] == i)
    }

    /// Cycles in canonical form: each led by its smallest index, sorted by
    /// leader. Fixed points are included.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.map.len()];
        let mut out = Vec::new();
        for start in 0..self.map.len() {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                cycle.push(x);
                x = self.map[x];
            }
            out.push(cycle);
        }
        out
    }

    /// Canonical cycles written with labels.
    pub fn cycle_labels(&self) -> Vec<Vec<i64>> {
        self.cycles()
            .into_iter()
            .map(|c| c.into_iter().map(|i| self.ground.label_of(i)).collect())
            .collect()
    }

    /// `#(π)`: number of cycles, fixed points included.
    pub fn cycle_count(&self) -> usize {
        cycle_count_of(&self.map)
    }

    /// Number of orbits of the group generated by `self` and `other`.
    pub fn orbit_count_with(&self, other: &Permutation) -> Result<usize, PermError> {
        if self.ground != other.ground {
            return Err(PermError::GroundMismatch { left: self.ground, right: other.ground });
        }
        let mut uf = UnionFind::new(self.size());
        for i in 0..self.size() {
            uf.union(i, self.map[i]);
            uf.union(i, other.map[i]);
        }
        Ok(uf.count())
    }
}

/// Number of cycles of an index map.
pub(crate) fn cycle_count_of(map: &[usize]) -> usize {
    let mut seen = vec![false; map.len()];
    let mut count = 0;
    for start in 0..map.len() {
        if seen[start] {
            continue;
        }
        count += 1;
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            x = map[x];
        }
    }
    count
}

/// `#(π)`.
pub fn cycle_count(p: &Permutation) -> usize {
    p.cycle_count()
}

/// `p ∘ q`.
pub fn compose(p: &Permutation, q: &Permutation) -> Result<Permutation, PermError> {
    p.compose(q)
}

/// Genus of the pair `(p, q)` from the Euler relation
/// `#(p) + #(q p⁻¹) + #(q) = s + 2(1 - g)` where `s` is the number of points.
///
/// Fails with [`PermError::NonTransitive`] when `⟨p, q⟩` has more than one
/// orbit.
pub fn genus(p: &Permutation, q: &Permutation) -> Result<usize, PermError> {
    let orbits = p.orbit_count_with(q)?;
    if orbits > 1 {
        return Err(PermError::NonTransitive { orbits });
    }
    let total = p.cycle_count() + q.compose_unchecked(&p.inverse()).cycle_count() + q.cycle_count();
    let excess = p.size() + 2 - total;
    debug_assert!(excess % 2 == 0 && total <= p.size() + 2);
    Ok(excess / 2)
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for cycle in self.cycle_labels() {
            let body: Vec<String> = cycle.iter().map(|l| l.to_string()).collect();
            write!(f, "({})", body.join(","))?;
        }
        Ok(())
    }
}

impl FromStr for Permutation {
    type Err = PermError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Permutation::parse_infer(s)
    }
}

/// Splits `"(1,2)(3,-4)"` into label cycles.
pub fn parse_cycles(text: &str) -> Result<Vec<Vec<i64>>, PermError> {
    let mut out = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        let body_start = rest.strip_prefix('(').ok_or_else(|| PermError::Parse(text.to_string()))?;
        let end = body_start.find(')').ok_or_else(|| PermError::Parse(text.to_string()))?;
        let body = body_start[..end].trim();
        if !body.is_empty() {
            let cycle = body
                .split(',')
                .map(|tok| tok.trim().parse::<i64>().map_err(|_| PermError::Parse(text.to_string())))
                .collect::<Result<Vec<_>, _>>()?;
            out.push(cycle);
        }
        rest = body_start[end + 1..].trim_start();
    }
    Ok(out)
}

/// A sign vector `ε ∈ {−1, +1}ⁿ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignPattern {
    signs: Vec<i8>,
}

impl SignPattern {
    pub fn new(signs: Vec<i8>) -> Result<Self, PermError> {
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(PermError::BadSign);
        }
        Ok(SignPattern { signs })
    }

    pub fn all_positive(n: usize) -> Self {
        SignPattern { signs: vec![1; n] }
    }

    /// Pattern whose bit `k` (set = negative) drives position `k + 1`.
    pub fn from_bits(n: usize, bits: u64) -> Self {
        let signs = (0..n).map(|k| if bits >> k & 1 == 1 { -1 } else { 1 }).collect();
        SignPattern { signs }
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    /// Sign of position `position` (0-based).
    pub fn sign(&self, position: usize) -> i8 {
        self.signs[position]
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// The permutation `ε(k) = ε_{|k|}·k` of `[±n]`.
    pub fn to_permutation(&self) -> Permutation {
        let n = self.signs.len();
        let ground = GroundSet::Signed(n);
        let map = (0..2 * n)
            .map(|i| if self.signs[i % n.max(1)] == 1 { i } else { ground.negate(i) })
            .collect();
        Permutation { ground, map }
    }
}

impl fmt::Display for SignPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.signs.iter().map(|s| s.to_string()).collect();
        write!(f, "({})", body.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn perm(text: &str, n: usize) -> Permutation {
        Permutation::parse(text, GroundSet::Plain(n)).unwrap()
    }

    #[test]
    fn compose_examples() {
        let p = perm("(1,2)", 3);
        let q = perm("(2,3)", 3);
        assert_eq!(p.compose(&q).unwrap(), perm("(1,2,3)", 3));

        let d = Permutation::delta(4);
        assert!(d.compose(&d).unwrap().is_identity());

        let g = Permutation::long_cycle(4);
        assert!(g.compose(&g.inverse()).unwrap().is_identity());
    }

    #[test]
    fn compose_rejects_mismatched_ground() {
        let err = Permutation::identity(GroundSet::Plain(3))
            .compose(&Permutation::identity(GroundSet::Signed(3)))
            .unwrap_err();
        assert!(matches!(err, PermError::GroundMismatch { .. }));
    }

    #[test]
    fn cycle_count_examples() {
        assert_eq!(Permutation::identity(GroundSet::Plain(5)).cycle_count(), 5);
        assert_eq!(Permutation::long_cycle(7).cycle_count(), 1);

        let pi = perm("(1,2)", 2).embed_signed();
        let d = Permutation::delta(2);
        let w = Permutation::compose_all(&[&pi, &d, &pi, &d]).unwrap();
        assert_eq!(w.cycle_count(), 2);
    }

    #[test]
    fn genus_examples() {
        let g4 = Permutation::long_cycle(4);
        assert_eq!(genus(&perm("(1,2)(3,4)", 4), &g4), Ok(0));
        assert_eq!(genus(&perm("(1,3)(2,4)", 4), &g4), Ok(1));
        assert_eq!(
            genus(&perm("(1,2)", 4), &perm("(3,4)", 4)),
            Err(PermError::NonTransitive { orbits: 2 })
        );
    }

    #[test]
    fn signed_encoding_roundtrip() {
        let g = GroundSet::Signed(8);
        for label in (1..=8).chain(-8..=-1) {
            let i = g.index_of(label).unwrap();
            assert_eq!(g.label_of(i), label);
            assert_eq!(g.label_of(g.negate(i)), -label);
        }
        assert!(g.index_of(0).is_err());
        assert!(g.index_of(9).is_err());
    }

    #[test]
    fn parse_and_print() {
        let p = Permutation::parse_infer("(1,-7)(-1,7)").unwrap();
        assert_eq!(p.ground(), GroundSet::Signed(7));
        assert_eq!(p.image(1).unwrap(), -7);
        assert_eq!(p.image(-1).unwrap(), 7);
        let q = perm("(1,7)(2,3)(4,8)(5,6)", 8);
        assert_eq!(q.to_string(), "(1,7)(2,3)(4,8)(5,6)");
        assert_eq!(perm("(2,3,1)", 4).to_string(), "(1,2,3)(4)");
        assert!(Permutation::parse("(1,2", GroundSet::Plain(2)).is_err());
        assert!(Permutation::parse("(1,2)(2,3)", GroundSet::Plain(3)).is_err());
        assert!(Permutation::parse("(1,5)", GroundSet::Plain(3)).is_err());
    }

    #[test]
    fn all_negative_sign_pattern_is_delta() {
        let eps = SignPattern::new(vec![-1; 5]).unwrap();
        assert_eq!(eps.to_permutation(), Permutation::delta(5));
        assert!(SignPattern::new(vec![1, 0]).is_err());
    }

    fn arb_perm(n: usize) -> impl Strategy<Value = Permutation> {
        Just((0..n).collect::<Vec<usize>>())
            .prop_shuffle()
            .prop_map(move |map| Permutation::from_map(GroundSet::Plain(n), map).unwrap())
    }

    fn arb_perm_pair() -> impl Strategy<Value = (Permutation, Permutation)> {
        (1usize..10).prop_flat_map(|n| (arb_perm(n), arb_perm(n)))
    }

    proptest! {
        #[test]
        fn cycle_count_is_conjugation_invariant((p, q) in arb_perm_pair()) {
            let pq = p.compose(&q).unwrap();
            let qp = q.compose(&p).unwrap();
            prop_assert_eq!(pq.cycle_count(), qp.cycle_count());
        }

        #[test]
        fn composition_is_associative((p, q) in arb_perm_pair()) {
            let r = p.compose(&q).unwrap().inverse();
            let left = p.compose(&q).unwrap().compose(&r).unwrap();
            let right = p.compose(&q.compose(&r).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn euler_excess_is_even_for_transitive_pairs((p, q) in arb_perm_pair()) {
            if p.orbit_count_with(&q).unwrap() == 1 {
                let total = p.cycle_count() + q.compose(&p.inverse()).unwrap().cycle_count() + q.cycle_count();
                prop_assert!(total <= p.size() + 2);
                prop_assert_eq!((p.size() + 2 - total) % 2, 0);
            }
        }

        #[test]
        fn sign_patterns_commute_with_delta(n in 1usize..10, bits in any::<u64>()) {
            let eps = SignPattern::from_bits(n, bits).to_permutation();
            let d = Permutation::delta(n);
            prop_assert_eq!(eps.compose(&d).unwrap(), d.compose(&eps).unwrap());
        }

        #[test]
        fn display_parse_roundtrip(p in (1usize..9).prop_flat_map(arb_perm)) {
            let text = p.to_string();
            prop_assert_eq!(Permutation::parse(&text, p.ground()).unwrap(), p);
        }
    }
}
