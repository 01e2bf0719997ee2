//! Set partitions of a [`GroundSet`] and the refinement lattice.

use std::fmt;

use thiserror::Error;

use crate::perm::{parse_cycles, GroundSet, PermError, Permutation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error("blocks do not partition {0}")]
    NotAPartition(GroundSet),
    #[error("ground set mismatch: {left} vs {right}")]
    GroundMismatch { left: GroundSet, right: GroundSet },
    #[error(transparent)]
    Perm(#[from] PermError),
}

/// Disjoint-set forest with path halving.
#[derive(Clone, Debug)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
    components: usize,
}

impl UnionFind {
    pub(crate) fn new(size: usize) -> Self {
        UnionFind { parent: (0..size).collect(), components: size }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
            self.components -= 1;
        }
    }

    pub(crate) fn count(&self) -> usize {
        self.components
    }
}

/// A partition in canonical form: blocks sorted internally and by minimum.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetPartition {
    ground: GroundSet,
    blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    /// Builds from index blocks, validating coverage and disjointness.
    pub fn new(ground: GroundSet, mut blocks: Vec<Vec<usize>>) -> Result<Self, PartitionError> {
        let mut seen = vec![false; ground.size()];
        for block in &mut blocks {
            if block.is_empty() {
                return Err(PartitionError::NotAPartition(ground));
            }
            block.sort_unstable();
            for &i in block.iter() {
                if i >= seen.len() || seen[i] {
                    return Err(PartitionError::NotAPartition(ground));
                }
                seen[i] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(PartitionError::NotAPartition(ground));
        }
        blocks.sort_unstable();
        Ok(SetPartition { ground, blocks })
    }

    /// Builds from blocks written with labels.
    pub fn from_label_blocks(ground: GroundSet, blocks: &[Vec<i64>]) -> Result<Self, PartitionError> {
        let idx = blocks
            .iter()
            .map(|b| b.iter().map(|&l| ground.index_of(l)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        SetPartition::new(ground, idx)
    }

    /// Parses block notation such as `"(1,4)(2,3)"`; unlisted points become
    /// singletons.
    pub fn parse(text: &str, ground: GroundSet) -> Result<Self, PartitionError> {
        let mut blocks = parse_cycles(text)?;
        let mut listed = vec![false; ground.size()];
        for b in &blocks {
            for &l in b {
                listed[ground.index_of(l)?] = true;
            }
        }
        for (i, l) in listed.iter().enumerate() {
            if !l {
                blocks.push(vec![ground.label_of(i)]);
            }
        }
        SetPartition::from_label_blocks(ground, &blocks)
    }

    /// Blocks are the cycles of `p`.
    pub fn from_permutation(p: &Permutation) -> Self {
        let blocks = p.cycles();
        SetPartition::new(p.ground(), blocks).expect("cycles always partition the ground set")
    }

    /// Kernel of a colouring: `i ~ j` iff `colors[i] == colors[j]`.
    pub fn kernel<C: PartialEq>(colors: &[C]) -> Self {
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut reps: Vec<usize> = Vec::new();
        for (i, c) in colors.iter().enumerate() {
            match reps.iter().position(|&r| colors[r] == *c) {
                Some(b) => blocks[b].push(i),
                None => {
                    reps.push(i);
                    blocks.push(vec![i]);
                }
            }
        }
        SetPartition { ground: GroundSet::Plain(colors.len()), blocks }
    }

    /// `0ₙ`, all singletons.
    pub fn singletons(ground: GroundSet) -> Self {
        SetPartition { ground, blocks: (0..ground.size()).map(|i| vec![i]).collect() }
    }

    /// `1ₙ`, one block (empty ground set gives no blocks).
    pub fn full(ground: GroundSet) -> Self {
        let blocks = if ground.size() == 0 { vec![] } else { vec![(0..ground.size()).collect()] };
        SetPartition { ground, blocks }
    }

    pub fn ground(&self) -> GroundSet {
        self.ground
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Block index of every point.
    pub fn block_index(&self) -> Vec<usize> {
        let mut out = vec![0; self.ground.size()];
        for (b, block) in self.blocks.iter().enumerate() {
            for &i in block {
                out[i] = b;
            }
        }
        out
    }

    pub fn is_pairing(&self) -> bool {
        self.blocks.iter().all(|b| b.len() == 2)
    }

    /// The permutation traversing each block in increasing order.
    pub fn to_permutation(&self) -> Permutation {
        let mut map = vec![0; self.ground.size()];
        for block in &self.blocks {
            for (k, &i) in block.iter().enumerate() {
                map[i] = block[(k + 1) % block.len()];
            }
        }
        Permutation::from_map_unchecked(self.ground, map)
    }

    /// Refinement order: every block of `self` lies inside a block of `other`.
    pub fn refines(&self, other: &SetPartition) -> bool {
        if self.ground != other.ground {
            return false;
        }
        let owner = other.block_index();
        self.blocks.iter().all(|b| b.iter().all(|&i| owner[i] == owner[b[0]]))
    }

    /// Least upper bound in the partition lattice.
    pub fn join(&self, other: &SetPartition) -> Result<SetPartition, PartitionError> {
        if self.ground != other.ground {
            return Err(PartitionError::GroundMismatch { left: self.ground, right: other.ground });
        }
        let mut uf = UnionFind::new(self.ground.size());
        for block in self.blocks.iter().chain(&other.blocks) {
            for &i in &block[1..] {
                uf.union(block[0], i);
            }
        }
        Ok(SetPartition::from_union_find(self.ground, &mut uf))
    }

    /// Greatest lower bound: nonempty intersections of blocks.
    pub fn meet(&self, other: &SetPartition) -> Result<SetPartition, PartitionError> {
        if self.ground != other.ground {
            return Err(PartitionError::GroundMismatch { left: self.ground, right: other.ground });
        }
        let owner = other.block_index();
        let mut blocks = Vec::new();
        for block in &self.blocks {
            let mut parts: Vec<Vec<usize>> = Vec::new();
            let mut keys: Vec<usize> = Vec::new();
            for &i in block {
                match keys.iter().position(|&k| k == owner[i]) {
                    Some(p) => parts[p].push(i),
                    None => {
                        keys.push(owner[i]);
                        parts.push(vec![i]);
                    }
                }
            }
            blocks.extend(parts);
        }
        SetPartition::new(self.ground, blocks)
    }

    fn from_union_find(ground: GroundSet, uf: &mut UnionFind) -> SetPartition {
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; ground.size()];
        for i in 0..ground.size() {
            let r = uf.find(i);
            if slot[r] == usize::MAX {
                slot[r] = blocks.len();
                blocks.push(Vec::new());
            }
            blocks[slot[r]].push(i);
        }
        SetPartition { ground, blocks }
    }

    /// Blocks written with labels.
    pub fn label_blocks(&self) -> Vec<Vec<i64>> {
        self.blocks.iter().map(|b| b.iter().map(|&i| self.ground.label_of(i)).collect()).collect()
    }
}

/// `p ∨ q`.
pub fn join(p: &SetPartition, q: &SetPartition) -> Result<SetPartition, PartitionError> {
    p.join(q)
}

/// Number of blocks of `p ∨ q` where `p`, `q` are read as partitions into
/// cycles. Skips building the partition.
pub fn join_block_count(p: &Permutation, q: &Permutation) -> usize {
    p.orbit_count_with(q).expect("join of permutations on different ground sets")
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for block in self.label_blocks() {
            let body: Vec<String> = block.iter().map(|l| l.to_string()).collect();
            write!(f, "({})", body.join(","))?;
        }
        Ok(())
    }
}

/// All set partitions of `[n]` in restricted-growth order.
pub fn all_partitions(n: usize) -> Vec<SetPartition> {
    let mut out = Vec::new();
    let mut labels = vec![0usize; n];
    fn rec(pos: usize, max: usize, labels: &mut Vec<usize>, out: &mut Vec<SetPartition>) {
        if pos == labels.len() {
            out.push(SetPartition::kernel(labels));
            return;
        }
        for b in 0..=max {
            labels[pos] = b;
            rec(pos + 1, if b == max { max + 1 } else { max }, labels, out);
        }
    }
    if n == 0 {
        return vec![SetPartition::full(GroundSet::Plain(0))];
    }
    rec(0, 0, &mut labels, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn part(text: &str, n: usize) -> SetPartition {
        SetPartition::parse(text, GroundSet::Plain(n)).unwrap()
    }

    #[test]
    fn join_examples() {
        let p = part("(1,2)(3,4)", 4);
        let q = part("(2,3)(1,4)", 4);
        assert_eq!(p.join(&q).unwrap(), SetPartition::full(GroundSet::Plain(4)));
        assert_eq!(p.join(&p).unwrap(), p);

        let pq = p.to_permutation().compose(&q.to_permutation()).unwrap();
        assert_eq!(pq, Permutation::parse("(1,3)(2,4)", GroundSet::Plain(4)).unwrap());
        assert_eq!(2 * p.join(&q).unwrap().block_count(), pq.cycle_count());
    }

    #[test]
    fn pairing_join_identity_exhaustive() {
        for n in (2..=8).step_by(2) {
            let pairings: Vec<SetPartition> =
                all_partitions(n).into_iter().filter(|p| p.is_pairing()).collect();
            for p in &pairings {
                for q in &pairings {
                    let pq = p.to_permutation().compose(&q.to_permutation()).unwrap();
                    assert_eq!(2 * p.join(q).unwrap().block_count(), pq.cycle_count());
                }
            }
        }
    }

    #[test]
    fn bell_numbers() {
        let counts: Vec<usize> = (0..=6).map(|n| all_partitions(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 5, 15, 52, 203]);
    }

    #[test]
    fn rejects_bad_blocks() {
        let g = GroundSet::Plain(3);
        assert!(SetPartition::new(g, vec![vec![0, 1]]).is_err());
        assert!(SetPartition::new(g, vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(SetPartition::new(g, vec![vec![0, 1], vec![2], vec![]]).is_err());
    }

    #[test]
    fn kernel_and_display() {
        let k = SetPartition::kernel(&[7, 3, 7, 3, 1]);
        assert_eq!(k.to_string(), "(1,3)(2,4)(5)");
    }

    fn arb_partition(n: usize) -> impl Strategy<Value = SetPartition> {
        proptest::collection::vec(0usize..n.max(1), n).prop_map(|c| SetPartition::kernel(&c))
    }

    fn arb_triple() -> impl Strategy<Value = (SetPartition, SetPartition, SetPartition)> {
        (1usize..9).prop_flat_map(|n| (arb_partition(n), arb_partition(n), arb_partition(n)))
    }

    proptest! {
        #[test]
        fn refinement_is_a_partial_order((p, q, r) in arb_triple()) {
            prop_assert!(p.refines(&p));
            if p.refines(&q) && q.refines(&p) {
                prop_assert_eq!(&p, &q);
            }
            if p.refines(&q) && q.refines(&r) {
                prop_assert!(p.refines(&r));
            }
        }

        #[test]
        fn join_is_least_upper_bound((p, q, r) in arb_triple()) {
            let j = p.join(&q).unwrap();
            prop_assert!(p.refines(&j) && q.refines(&j));
            if p.refines(&r) && q.refines(&r) {
                prop_assert!(j.refines(&r));
            }
        }

        #[test]
        fn meet_is_greatest_lower_bound((p, q, r) in arb_triple()) {
            let m = p.meet(&q).unwrap();
            prop_assert!(m.refines(&p) && m.refines(&q));
            if r.refines(&p) && r.refines(&q) {
                prop_assert!(r.refines(&m));
            }
        }
    }
}
