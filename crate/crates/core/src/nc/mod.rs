//! Pairings, non-crossing partitions, Kreweras complements and the Möbius
//! function of `NC(n)`.
//!
//! The annular classes built on top of these live in [`annular`].

pub mod annular;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::partition::SetPartition;
use crate::perm::{GroundSet, PermError, Permutation};
use crate::scalar::catalan;

pub use annular::{
    annular_to_half_pairing, annular_twist, complement_source, enumerate_half_pairings, enumerate_nc2delta,
    half_pairing_to_annular, k_delta, mirror_cycle_pairs, pairing_to_trace_data, signed_pairing,
    signed_pairing_trace_data, AnnularPairing, HalfPairing, KDeltaComplement,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NcError {
    #[error("partition {0} is not non-crossing")]
    Crossing(String),
    #[error("{0} does not refine {1}")]
    NotRefinement(String, String),
    #[error("expected a partition of a plain ground set [n]")]
    NeedsPlainGround,
    #[error("invalid half-pairing: {0}")]
    BadHalfPairing(String),
    #[error("invalid annular pairing: {0}")]
    BadAnnular(String),
    #[error("cycles of {0} do not split into mirror pairs")]
    Unpaired(String),
    #[error(transparent)]
    Perm(#[from] PermError),
}

/// All `(n−1)!!` pairings of `[n]` in lexicographic order; empty for odd `n`.
pub fn enumerate_pairings(n: usize) -> Vec<SetPartition> {
    if n % 2 == 1 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut used = vec![false; n];
    let mut blocks = Vec::with_capacity(n / 2);
    fn rec(used: &mut [bool], blocks: &mut Vec<Vec<usize>>, out: &mut Vec<SetPartition>) {
        let Some(first) = used.iter().position(|u| !u) else {
            let ground = GroundSet::Plain(used.len());
            out.push(SetPartition::new(ground, blocks.clone()).expect("pairing"));
            return;
        };
        used[first] = true;
        for partner in first + 1..used.len() {
            if !used[partner] {
                used[partner] = true;
                blocks.push(vec![first, partner]);
                rec(used, blocks, out);
                blocks.pop();
                used[partner] = false;
            }
        }
        used[first] = false;
    }
    rec(&mut used, &mut blocks, &mut out);
    out
}

/// Non-crossing pairings `NC₂(n)`.
pub fn enumerate_nc_pairings(n: usize) -> Vec<SetPartition> {
    enumerate_nc(n).into_iter().filter(SetPartition::is_pairing).collect()
}

/// All of `NC(n)`, sorted by canonical form.
///
/// Generated with a stack of open blocks: a new point either opens a block
/// or joins an open block, which closes every block opened after it.
pub fn enumerate_nc(n: usize) -> Vec<SetPartition> {
    let ground = GroundSet::Plain(n);
    if n == 0 {
        return vec![SetPartition::full(ground)];
    }
    let mut out = Vec::new();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut open: Vec<usize> = Vec::new();
    fn rec(
        point: usize,
        n: usize,
        blocks: &mut Vec<Vec<usize>>,
        open: &mut Vec<usize>,
        out: &mut Vec<SetPartition>,
    ) {
        if point == n {
            out.push(SetPartition::new(GroundSet::Plain(n), blocks.clone()).expect("partition"));
            return;
        }
        for depth in 0..open.len() {
            let saved: Vec<usize> = open.drain(depth + 1..).collect();
            let b = open[depth];
            blocks[b].push(point);
            rec(point + 1, n, blocks, open, out);
            blocks[b].pop();
            open.extend(saved);
        }
        blocks.push(vec![point]);
        open.push(blocks.len() - 1);
        rec(point + 1, n, blocks, open, out);
        open.pop();
        blocks.pop();
    }
    rec(0, n, &mut blocks, &mut open, &mut out);
    out.sort();
    out
}

/// `#(π) + #(π⁻¹γ) = n + 1`, with `π` read as blocks traversed upward.
pub fn is_noncrossing(p: &SetPartition) -> bool {
    let GroundSet::Plain(n) = p.ground() else {
        return false;
    };
    if n == 0 {
        return true;
    }
    let pi = p.to_permutation();
    let k = kreweras_perm(&pi);
    pi.cycle_count() + k.cycle_count() == n + 1
}

/// `π⁻¹γ` for a permutation of `[n]`.
pub fn kreweras_perm(pi: &Permutation) -> Permutation {
    let gamma = Permutation::long_cycle(pi.size());
    pi.inverse().compose(&gamma).expect("same ground set")
}

/// Kreweras complement, realised as the cycles of `π⁻¹γ`.
pub fn kreweras(p: &SetPartition) -> Result<SetPartition, NcError> {
    if p.ground().is_signed() {
        return Err(NcError::NeedsPlainGround);
    }
    if !is_noncrossing(p) {
        return Err(NcError::Crossing(p.to_string()));
    }
    Ok(SetPartition::from_permutation(&kreweras_perm(&p.to_permutation())))
}

/// Möbius function `μ(p, q)` of `NC(n)`.
///
/// Uses zeta inversion over the interval for `n ≤ 9` and the product formula
/// above that.
pub fn mobius_nc(p: &SetPartition, q: &SetPartition) -> Result<BigInt, NcError> {
    check_interval(p, q)?;
    if p.ground().size() <= 9 {
        Ok(mobius_interval_dp(p, q))
    } else {
        Ok(mobius_product(p, q))
    }
}

/// `μ(p, q)` as `∏ (−1)^{|c|−1} Cat(|c|−1)` over cycles `c` of `p⁻¹q`.
pub fn mobius_nc_product(p: &SetPartition, q: &SetPartition) -> Result<BigInt, NcError> {
    check_interval(p, q)?;
    Ok(mobius_product(p, q))
}

/// `μ(p, q)` by explicit zeta inversion over `[p, q] ⊂ NC(n)`.
pub fn mobius_nc_dp(p: &SetPartition, q: &SetPartition) -> Result<BigInt, NcError> {
    check_interval(p, q)?;
    Ok(mobius_interval_dp(p, q))
}

fn check_interval(p: &SetPartition, q: &SetPartition) -> Result<(), NcError> {
    if p.ground().is_signed() || q.ground().is_signed() {
        return Err(NcError::NeedsPlainGround);
    }
    for x in [p, q] {
        if !is_noncrossing(x) {
            return Err(NcError::Crossing(x.to_string()));
        }
    }
    if !p.refines(q) {
        return Err(NcError::NotRefinement(p.to_string(), q.to_string()));
    }
    Ok(())
}

fn mobius_product(p: &SetPartition, q: &SetPartition) -> BigInt {
    let rel = p.to_permutation().inverse().compose(&q.to_permutation()).expect("same ground");
    rel.cycles().iter().fold(BigInt::one(), |acc, c| {
        let k = c.len() as u64 - 1;
        let sign = if k % 2 == 0 { BigInt::one() } else { -BigInt::one() };
        acc * sign * catalan(k)
    })
}

fn mobius_interval_dp(p: &SetPartition, q: &SetPartition) -> BigInt {
    let n = p.ground().size();
    let mut interval: Vec<SetPartition> =
        enumerate_nc(n).into_iter().filter(|s| p.refines(s) && s.refines(q)).collect();
    // Coarser partitions first so μ(τ, q) is known for every τ above σ.
    interval.sort_by_key(|s| s.block_count());
    let mut mu: Vec<BigInt> = Vec::with_capacity(interval.len());
    for i in 0..interval.len() {
        let value = if interval[i] == *q {
            BigInt::one()
        } else {
            let mut acc = BigInt::zero();
            for j in 0..i {
                if interval[j] != interval[i] && interval[i].refines(&interval[j]) {
                    acc += &mu[j];
                }
            }
            -acc
        };
        mu.push(value);
    }
    let idx = interval.iter().position(|s| s == p).expect("p lies in its own interval");
    mu[idx].clone()
}

/// Non-crossing annular permutations `S_NC(m, n)`:
/// `#(p) + #(p⁻¹γ_{m,n}) = m + n` and some cycle meets both circles.
pub fn is_snc(p: &Permutation, m: usize, n: usize) -> bool {
    if p.ground() != GroundSet::Plain(m + n) || m == 0 || n == 0 {
        return false;
    }
    let gamma = Permutation::annular_cycle(m, n);
    let count = p.cycle_count() + p.inverse().compose_unchecked(&gamma).cycle_count();
    let through = p.cycles().iter().any(|c| c.iter().any(|&i| i < m) && c.iter().any(|&i| i >= m));
    count == m + n && through
}

/// `{"n": n, "pairs": [[a, b], ...]}` with 1-based (signed) labels.
pub fn pairs_json(p: &SetPartition) -> Value {
    json!({ "n": p.ground().half(), "pairs": p.label_blocks() })
}

/// `{"n": n, "blocks": [[...], ...]}` with 1-based labels.
pub fn blocks_json(p: &SetPartition) -> Value {
    json!({ "n": p.ground().half(), "blocks": p.label_blocks() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::all_partitions;

    fn part(text: &str, n: usize) -> SetPartition {
        SetPartition::parse(text, GroundSet::Plain(n)).unwrap()
    }

    #[test]
    fn pairing_examples() {
        assert_eq!(enumerate_pairings(2), vec![part("(1,2)", 2)]);
        assert_eq!(enumerate_pairings(4).len(), 3);
        assert!(enumerate_pairings(5).is_empty());
        let counts: Vec<usize> = (0..=10).step_by(2).map(|n| enumerate_pairings(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 3, 15, 105, 945]);
    }

    #[test]
    fn catalan_counts() {
        for n in 0..=12 {
            let expected = catalan(n as u64);
            assert_eq!(BigInt::from(enumerate_nc(n).len()), expected, "NC({n})");
        }
        for m in 0..=6 {
            assert_eq!(BigInt::from(enumerate_nc_pairings(2 * m).len()), catalan(m as u64));
        }
    }

    #[test]
    fn nc_enumeration_matches_membership_filter() {
        for n in 0..=7 {
            let filtered: Vec<SetPartition> = all_partitions(n).into_iter().filter(is_noncrossing).collect();
            let mut sorted = filtered.clone();
            sorted.sort();
            assert_eq!(enumerate_nc(n), sorted);
        }
    }

    #[test]
    fn noncrossing_examples() {
        assert!(is_noncrossing(&part("(1,2)(3,4)", 4)));
        assert!(!is_noncrossing(&part("(1,3)(2,4)", 4)));
        assert!(is_noncrossing(&SetPartition::full(GroundSet::Plain(6))));
    }

    #[test]
    fn kreweras_examples() {
        let g = GroundSet::Plain(5);
        assert_eq!(kreweras(&SetPartition::singletons(g)).unwrap(), SetPartition::full(g));
        assert_eq!(kreweras(&part("(1,2)", 2)).unwrap(), SetPartition::singletons(GroundSet::Plain(2)));
        assert!(kreweras(&part("(1,3)(2,4)", 4)).is_err());

        // For pairings π⁻¹γ = πγ.
        for p in enumerate_nc_pairings(6) {
            let pi = p.to_permutation();
            let gamma = Permutation::long_cycle(6);
            assert_eq!(kreweras_perm(&pi), pi.compose(&gamma).unwrap());
        }
    }

    #[test]
    fn kreweras_properties_exhaustive() {
        for n in 1..=8 {
            let gamma = Permutation::long_cycle(n);
            let all = enumerate_nc(n);
            for p in &all {
                let k = kreweras(p).unwrap();
                assert_eq!(p.block_count() + k.block_count(), n + 1);
                let kk = kreweras(&k).unwrap().to_permutation();
                let rotated = gamma.inverse().compose(&p.to_permutation()).unwrap().compose(&gamma).unwrap();
                assert_eq!(kk, rotated);
            }
            if n <= 6 {
                for p in &all {
                    for q in &all {
                        if p.refines(q) {
                            assert!(kreweras(q).unwrap().refines(&kreweras(p).unwrap()));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn mobius_examples() {
        let g4 = GroundSet::Plain(4);
        let p = part("(1,2)(3)(4)", 4);
        assert_eq!(mobius_nc(&p, &p).unwrap(), BigInt::one());
        assert_eq!(
            mobius_nc(&SetPartition::singletons(g4), &SetPartition::full(g4)).unwrap(),
            BigInt::from(-5)
        );
        let g2 = GroundSet::Plain(2);
        assert_eq!(
            mobius_nc(&SetPartition::singletons(g2), &SetPartition::full(g2)).unwrap(),
            BigInt::from(-1)
        );
        assert!(mobius_nc(&SetPartition::full(g4), &p).is_err());
    }

    #[test]
    fn mobius_inverts_zeta() {
        for n in 1..=6 {
            let all = enumerate_nc(n);
            for p in &all {
                for q in all.iter().filter(|q| p.refines(q)) {
                    let sum: BigInt = all
                        .iter()
                        .filter(|s| p.refines(s) && s.refines(q))
                        .map(|s| mobius_nc_dp(s, q).unwrap())
                        .sum();
                    let expected = if p == q { BigInt::one() } else { BigInt::zero() };
                    assert_eq!(sum, expected);
                    assert_eq!(mobius_nc_dp(p, q).unwrap(), mobius_nc_product(p, q).unwrap());
                }
            }
        }
    }

    #[test]
    fn mobius_zeta_sum_n7() {
        let all = enumerate_nc(7);
        let one = SetPartition::full(GroundSet::Plain(7));
        for p in &all {
            let sum: BigInt = all.iter().filter(|s| p.refines(s)).map(|s| mobius_nc_product(s, &one).unwrap()).sum();
            assert_eq!(sum, if *p == one { BigInt::one() } else { BigInt::zero() });
        }
    }

    #[test]
    fn snc_examples() {
        let p = Permutation::parse("(1,2,8)(3)(4,6,7)(5)", GroundSet::Plain(8)).unwrap();
        assert!(is_snc(&p, 4, 4));
        assert!(!is_snc(&Permutation::identity(GroundSet::Plain(5)), 2, 3));
        let t = Permutation::parse("(1,2)", GroundSet::Plain(2)).unwrap();
        assert!(is_snc(&t, 1, 1));
    }

    #[test]
    fn pairs_json_shape() {
        let v = pairs_json(&part("(1,4)(2,3)", 4));
        assert_eq!(v, json!({"n": 4, "pairs": [[1, 4], [2, 3]]}));
    }
}
