//! Symmetric annular pairings `NC₂^δ(n, −n)`, half-pairings `NCC₂(n)` and
//! the type-B style complement `K^δ(ρ) = (σ, η)`.

use std::fmt;

use serde_json::{json, Value};

use super::{enumerate_nc, is_noncrossing, NcError};
use crate::partition::SetPartition;
use crate::perm::{GroundSet, Permutation, SignPattern};

/// `γδγ⁻¹δ` on `[±n]`, with `γ` fixing the negative labels.
///
/// It sends `k ↦ k+1` on the positives and `−k ↦ −(k−1)` on the negatives.
pub fn annular_twist(n: usize) -> Permutation {
    let gamma = Permutation::long_cycle(n).embed_signed();
    let delta = Permutation::delta(n);
    Permutation::compose_all(&[&gamma, &delta, &gamma.inverse(), &delta]).expect("same ground set")
}

/// The signed pairing attached to a pairing `π` of `[n]` and a per-pair
/// class: a through pair `{r, s}` becomes `(r,−s)(−r,s)`, any other pair
/// becomes `(r,s)(−r,−s)`.
///
/// `through[b]` refers to the `b`-th block of `π` in canonical order.
pub fn signed_pairing(pi: &SetPartition, through: &[bool]) -> Permutation {
    let n = pi.ground().half();
    let ground = GroundSet::Signed(n);
    let mut map: Vec<usize> = (0..2 * n).collect();
    for (block, &cross) in pi.blocks().iter().zip(through) {
        let (r, s) = (block[0], block[1]);
        let (s_img, ns_img) = if cross { (n + s, s) } else { (s, n + s) };
        map[r] = s_img;
        map[s_img] = r;
        map[n + r] = ns_img;
        map[ns_img] = n + r;
    }
    Permutation::from_map_unchecked(ground, map)
}

/// An element of `NC₂^δ(n, −n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AnnularPairing {
    rho: Permutation,
}

impl AnnularPairing {
    /// Validates the mirror conditions, a through string and the cycle-count
    /// characterisation `#(γδγ⁻¹δρ) = n`.
    pub fn new(rho: Permutation) -> Result<Self, NcError> {
        let GroundSet::Signed(n) = rho.ground() else {
            return Err(NcError::BadAnnular("ground set must be [±n]".into()));
        };
        let g = rho.ground();
        let bad = |why: &str| Err(NcError::BadAnnular(format!("{rho}: {why}")));
        for i in 0..2 * n {
            let j = rho.at(i);
            if j == i || rho.at(j) != i {
                return bad("not a fixed-point-free pairing");
            }
            if j == g.negate(i) {
                return bad("contains a pair (r,-r)");
            }
            if rho.at(g.negate(i)) != g.negate(j) {
                return bad("not mirror symmetric");
            }
        }
        if !(0..n).any(|i| rho.at(i) >= n) {
            return bad("no through string");
        }
        if annular_twist(n).compose_unchecked(&rho).cycle_count() != n {
            return bad("crossing");
        }
        Ok(AnnularPairing { rho })
    }

    /// Parses cycle notation such as `"(1,-2)(-1,2)"` on `[±n]`.
    pub fn parse(text: &str, n: usize) -> Result<Self, NcError> {
        AnnularPairing::new(Permutation::parse(text, GroundSet::Signed(n))?)
    }

    pub fn half(&self) -> usize {
        self.rho.ground().half()
    }

    pub fn as_permutation(&self) -> &Permutation {
        &self.rho
    }

    /// Number of pairs joining a positive to a negative label.
    pub fn through_strings(&self) -> usize {
        let n = self.half();
        (0..n).filter(|&i| self.rho.at(i) >= n).count()
    }

    /// Pairs in canonical order, as labels.
    pub fn pairs(&self) -> Vec<Vec<i64>> {
        SetPartition::from_permutation(&self.rho).label_blocks()
    }

    pub fn to_json(&self) -> Value {
        json!({ "n": self.half(), "pairs": self.pairs() })
    }
}

impl fmt::Display for AnnularPairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rho)
    }
}

/// All of `NC₂^δ(n, −n)`, sorted by canonical pair list.
pub fn enumerate_nc2delta(n: usize) -> Vec<AnnularPairing> {
    if n % 2 == 1 || n == 0 {
        return Vec::new();
    }
    let twist = annular_twist(n);
    let pairs = n / 2;
    let mut out: Vec<(SetPartition, AnnularPairing)> = Vec::new();
    for pi in super::enumerate_pairings(n) {
        for mask in 1u32..(1 << pairs) {
            let through: Vec<bool> = (0..pairs).map(|b| mask >> b & 1 == 1).collect();
            let rho = signed_pairing(&pi, &through);
            if twist.compose_unchecked(&rho).cycle_count() == n {
                out.push((SetPartition::from_permutation(&rho), AnnularPairing { rho }));
            }
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out.into_iter().map(|(_, a)| a).collect()
}

/// An element `(π, V)` of `NCC₂(n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfPairing {
    base: SetPartition,
    special: usize,
}

impl HalfPairing {
    /// `special` must be one of the blocks of `base` (as 0-based indices).
    pub fn new(base: SetPartition, special: &[usize]) -> Result<Self, NcError> {
        let bad = |why: &str| Err(NcError::BadHalfPairing(format!("{base}: {why}")));
        if base.ground().is_signed() {
            return Err(NcError::NeedsPlainGround);
        }
        if !is_noncrossing(&base) {
            return bad("not non-crossing");
        }
        let mut v = special.to_vec();
        v.sort_unstable();
        let Some(idx) = base.blocks().iter().position(|b| *b == v) else {
            return bad("special set is not a block");
        };
        if v.len() % 2 == 1 {
            return bad("special block has odd size");
        }
        if base.blocks().iter().enumerate().any(|(i, b)| i != idx && b.len() != 2) {
            return bad("a non-special block is not a pair");
        }
        Ok(HalfPairing { base, special: idx })
    }

    pub fn base(&self) -> &SetPartition {
        &self.base
    }

    /// The special block `V`, as sorted 0-based indices.
    pub fn special(&self) -> &[usize] {
        &self.base.blocks()[self.special]
    }

    pub fn through_strings(&self) -> usize {
        self.special().len()
    }

    pub fn to_json(&self) -> Value {
        let special: Vec<i64> = self.special().iter().map(|&i| i as i64 + 1).collect();
        json!({ "n": self.base.ground().half(), "blocks": self.base.label_blocks(), "special": special })
    }
}

impl fmt::Display for HalfPairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let special: Vec<String> = self.special().iter().map(|i| (i + 1).to_string()).collect();
        write!(f, "{} V={{{}}}", self.base, special.join(","))
    }
}

/// All of `NCC₂(n)` in canonical order; empty for odd `n` and for `n = 0`.
pub fn enumerate_half_pairings(n: usize) -> Vec<HalfPairing> {
    if n % 2 == 1 || n == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for p in enumerate_nc(n) {
        if p.blocks().iter().any(|b| b.len() % 2 == 1) {
            continue;
        }
        let big: Vec<usize> = (0..p.block_count()).filter(|&i| p.blocks()[i].len() > 2).collect();
        match big.len() {
            0 => out.extend((0..p.block_count()).map(|i| HalfPairing { base: p.clone(), special: i })),
            1 => out.push(HalfPairing { base: p.clone(), special: big[0] }),
            _ => {}
        }
    }
    out.sort();
    out
}

/// Ordinary pairs `{r, s}` become `(r,s)(−r,−s)`; the special block
/// `V = (i₁ < … < i_{2l})` is wired as `(i_j, −i_{j+l})(−i_j, i_{j+l})`.
pub fn half_pairing_to_annular(h: &HalfPairing) -> AnnularPairing {
    let n = h.base.ground().half();
    let mut map: Vec<usize> = (0..2 * n).collect();
    let mut link = |a: usize, b: usize| {
        map[a] = b;
        map[b] = a;
    };
    for (i, block) in h.base.blocks().iter().enumerate() {
        if i == h.special {
            continue;
        }
        link(block[0], block[1]);
        link(n + block[0], n + block[1]);
    }
    let v = h.special();
    let l = v.len() / 2;
    for j in 0..l {
        link(v[j], n + v[j + l]);
        link(n + v[j], v[j + l]);
    }
    let rho = Permutation::from_map_unchecked(GroundSet::Signed(n), map);
    debug_assert!(AnnularPairing::new(rho.clone()).is_ok());
    AnnularPairing { rho }
}

/// Inverse of [`half_pairing_to_annular`]: `V` collects the endpoints of
/// the through strings.
pub fn annular_to_half_pairing(a: &AnnularPairing) -> Result<HalfPairing, NcError> {
    let n = a.half();
    let rho = a.as_permutation();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut special = Vec::new();
    for i in 0..n {
        let j = rho.at(i);
        if j >= n {
            special.push(i);
        } else if i < j {
            blocks.push(vec![i, j]);
        }
    }
    blocks.push(special.clone());
    let base = SetPartition::new(GroundSet::Plain(n), blocks)
        .map_err(|e| NcError::BadAnnular(e.to_string()))?;
    let h = HalfPairing::new(base, &special)?;
    if half_pairing_to_annular(&h) != *a {
        return Err(NcError::BadAnnular(format!("{a}: through strings are not in canonical wiring")));
    }
    Ok(h)
}

/// The pair `(σ, η)`: a permutation of `[n]` and the transpose pattern that
/// together index a multi-trace `Tr_σ(A^{(η)})`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KDeltaComplement {
    pub sigma: Permutation,
    pub eta: SignPattern,
}

impl KDeltaComplement {
    /// Builds from signed cycles whose absolute values partition `[n]`.
    pub fn from_signed_cycles(n: usize, cycles: &[Vec<i64>]) -> Result<Self, NcError> {
        let mut signs = vec![0i8; n];
        let mut abs_cycles = Vec::with_capacity(cycles.len());
        for cycle in cycles {
            let mut abs = Vec::with_capacity(cycle.len());
            for &x in cycle {
                let k = x.unsigned_abs() as usize;
                if k == 0 || k > n || signs[k - 1] != 0 {
                    return Err(NcError::Unpaired(format!("{cycles:?}")));
                }
                signs[k - 1] = if x > 0 { 1 } else { -1 };
                abs.push(k as i64);
            }
            abs_cycles.push(abs);
        }
        if signs.contains(&0) {
            return Err(NcError::Unpaired(format!("{cycles:?}")));
        }
        let sigma = Permutation::from_cycles(GroundSet::Plain(n), &abs_cycles)?;
        let eta = SignPattern::new(signs)?;
        Ok(KDeltaComplement { sigma, eta })
    }

    /// Signed cycles `(η_k·k, η_{σ(k)}·σ(k), …)` of `σ`.
    pub fn signed_cycles(&self) -> Vec<Vec<i64>> {
        self.sigma
            .cycle_labels()
            .into_iter()
            .map(|c| c.into_iter().map(|k| k * self.eta.sign(k as usize - 1) as i64).collect())
            .collect()
    }
}

impl fmt::Display for KDeltaComplement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "σ = {}, η = {}", self.sigma, self.eta)
    }
}

/// Cycles of `pδ` grouped as `(c, δc⁻¹δ)`; the first entry of each pair is
/// the cycle holding `+m`, `m` being its smallest absolute value.
pub fn mirror_cycle_pairs(p: &Permutation) -> Result<Vec<(Vec<i64>, Vec<i64>)>, NcError> {
    let GroundSet::Signed(n) = p.ground() else {
        return Err(NcError::BadAnnular("ground set must be [±n]".into()));
    };
    let q = p.compose(&Permutation::delta(n))?;
    let mut out = Vec::new();
    for cycle in q.cycle_labels() {
        let m = cycle.iter().map(|x| x.abs()).min().expect("cycles are nonempty");
        if !cycle.contains(&m) {
            continue;
        }
        // δc⁻¹δ: negate and reverse.
        let mut mirror: Vec<i64> = cycle.iter().rev().map(|x| -x).collect();
        let lead = mirror.iter().position(|&x| x == -m).expect("mirror holds -m");
        mirror.rotate_left(lead);
        out.push((cycle, mirror));
    }
    Ok(out)
}

/// `(σ, η)` from the canonical representatives of the cycles of `pδ`.
pub fn pairing_to_trace_data(p: &Permutation) -> Result<KDeltaComplement, NcError> {
    let chosen: Vec<Vec<i64>> = mirror_cycle_pairs(p)?.into_iter().map(|(c, _)| c).collect();
    KDeltaComplement::from_signed_cycles(p.ground().half(), &chosen)
        .map_err(|_| NcError::Unpaired(p.to_string()))
}

/// `δγ⁻¹δργδ`, whose product with `δ` is the permutation `δγ⁻¹δργ`.
pub fn complement_source(rho: &Permutation) -> Permutation {
    let n = rho.ground().half();
    let gamma = Permutation::long_cycle(n).embed_signed();
    let delta = Permutation::delta(n);
    Permutation::compose_all(&[&delta, &gamma.inverse(), &delta, rho, &gamma, &delta]).expect("same ground set")
}

/// `(σ, η)` for any mirror-symmetric signed pairing `ρ` of `[±n]`.
pub fn signed_pairing_trace_data(rho: &Permutation) -> Result<KDeltaComplement, NcError> {
    pairing_to_trace_data(&complement_source(rho))
}

/// `K^δ(ρ)`.
pub fn k_delta(rho: &AnnularPairing) -> KDeltaComplement {
    signed_pairing_trace_data(rho.as_permutation()).expect("cycles of an annular pairing come in mirror pairs")
}
