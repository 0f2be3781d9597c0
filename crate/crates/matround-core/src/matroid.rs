//! Oracle-based matroids: concrete families plus the derivations
//! (restriction, contraction, truncation, direct sum, free extension) the
//! rounding algorithms rely on.
//!
//! Matroids are immutable values; derivations share their bases through
//! reference counting, so cloning is cheap and all operations are safe to
//! call from multiple threads.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::ground::{ElementId, GroundSet};
use crate::rat::Rat;

/// Largest ground set for which an explicit independence family is accepted;
/// validation is exhaustive and would not scale beyond this.
pub const EXPLICIT_VALIDATION_LIMIT: usize = 12;

#[derive(Clone, Debug)]
pub struct Matroid {
    inner: Arc<Inner>,
}

#[derive(Debug)]
enum Inner {
    Uniform {
        ground: GroundSet,
        rank: usize,
    },
    Partition {
        ground: GroundSet,
        blocks: Vec<(GroundSet, usize)>,
    },
    Graphic {
        ground: GroundSet,
        edges: BTreeMap<ElementId, (u64, u64)>,
    },
    Linear {
        ground: GroundSet,
        columns: BTreeMap<ElementId, Vec<Rat>>,
    },
    Explicit {
        ground: GroundSet,
        independent: BTreeSet<GroundSet>,
    },
    Restrict {
        base: Matroid,
        ground: GroundSet,
    },
    Contract {
        base: Matroid,
        removed: GroundSet,
        /// Fixed maximum independent subset of `removed` (ascending greedy).
        fixed: GroundSet,
        removed_rank: usize,
        ground: GroundSet,
    },
    Truncate {
        base: Matroid,
        limit: usize,
    },
    DirectSum {
        parts: Vec<Matroid>,
        ground: GroundSet,
    },
}

impl Matroid {
    fn wrap(inner: Inner) -> Self {
        Matroid { inner: Arc::new(inner) }
    }

    /// Uniform matroid: independent iff `|S| <= rank`.
    pub fn uniform(ground: GroundSet, rank: usize) -> Self {
        Matroid::wrap(Inner::Uniform { ground, rank })
    }

    /// Free matroid (every subset independent).
    pub fn free(ground: GroundSet) -> Self {
        let rank = ground.len();
        Matroid::uniform(ground, rank)
    }

    /// Partition matroid from disjoint blocks with per-block caps; the
    /// ground set is the union of the blocks.
    pub fn partition(blocks: Vec<(GroundSet, usize)>) -> Result<Self> {
        let mut ground = GroundSet::new();
        for (block, _) in &blocks {
            if !ground.is_disjoint(block) {
                return Err(Error::OverlappingGrounds);
            }
            ground = ground.union(block);
        }
        Ok(Matroid::wrap(Inner::Partition { ground, blocks }))
    }

    /// Graphic matroid: each element is an edge `(u, v)` over opaque vertex
    /// labels; independence is acyclicity.
    pub fn graphic(edges: BTreeMap<ElementId, (u64, u64)>) -> Self {
        let ground = edges.keys().copied().collect();
        Matroid::wrap(Inner::Graphic { ground, edges })
    }

    /// Linear matroid over the rationals: one column per element,
    /// independence is linear independence.
    pub fn linear(columns: BTreeMap<ElementId, Vec<Rat>>) -> Result<Self> {
        let mut dims = columns.values().map(|c| c.len());
        if let Some(first) = dims.next() {
            if dims.any(|d| d != first) {
                return Err(Error::Invalid(String::from("linear matroid columns differ in length")));
            }
        }
        let ground = columns.keys().copied().collect();
        Ok(Matroid::wrap(Inner::Linear { ground, columns }))
    }

    /// Explicit matroid from a list of independent sets. Validated for
    /// downward closure and the exchange axiom; grounds larger than
    /// [`EXPLICIT_VALIDATION_LIMIT`] are rejected.
    pub fn explicit(
        ground: GroundSet,
        independent: impl IntoIterator<Item = GroundSet>,
    ) -> Result<Self> {
        if ground.len() > EXPLICIT_VALIDATION_LIMIT {
            return Err(Error::Invalid(String::from("explicit matroid ground set too large to validate")));
        }
        let family: BTreeSet<GroundSet> = independent.into_iter().collect();
        if !family.contains(&GroundSet::new()) {
            return Err(Error::Invalid(String::from("explicit family must contain the empty set")));
        }
        for set in &family {
            set.check_within(&ground)
                .map_err(|_| Error::Invalid(String::from("explicit independent set leaves the ground set")))?;
            for e in set.iter() {
                let mut smaller = set.clone();
                smaller.remove(e);
                if !family.contains(&smaller) {
                    return Err(Error::Invalid(String::from("explicit family is not downward closed")));
                }
            }
        }
        // Exchange axiom; pairs with |A| = |B| + 1 suffice.
        let mut by_size: BTreeMap<usize, Vec<&GroundSet>> = BTreeMap::new();
        for set in &family {
            by_size.entry(set.len()).or_default().push(set);
        }
        for (&size, bigger) in &by_size {
            if size == 0 {
                continue;
            }
            let Some(smaller) = by_size.get(&(size - 1)) else { continue };
            for a in bigger {
                for b in smaller {
                    let ok = a.difference(b).iter().any(|e| {
                        let mut cand = (*b).clone();
                        cand.insert(e);
                        family.contains(&cand)
                    });
                    if !ok {
                        return Err(Error::Invalid(String::from("explicit family violates the exchange axiom")));
                    }
                }
            }
        }
        Ok(Matroid::wrap(Inner::Explicit { ground, independent: family }))
    }

    pub fn ground(&self) -> &GroundSet {
        match &*self.inner {
            Inner::Uniform { ground, .. }
            | Inner::Partition { ground, .. }
            | Inner::Graphic { ground, .. }
            | Inner::Linear { ground, .. }
            | Inner::Explicit { ground, .. }
            | Inner::Restrict { ground, .. }
            | Inner::Contract { ground, .. }
            | Inner::DirectSum { ground, .. } => ground,
            Inner::Truncate { base, .. } => base.ground(),
        }
    }

    /// Independence oracle.
    pub fn is_independent(&self, s: &GroundSet) -> Result<bool> {
        s.check_within(self.ground())?;
        Ok(self.indep(s))
    }

    fn indep(&self, s: &GroundSet) -> bool {
        match &*self.inner {
            Inner::Uniform { rank, .. } => s.len() <= *rank,
            Inner::Partition { blocks, .. } => blocks
                .iter()
                .all(|(block, cap)| s.intersection(block).len() <= *cap),
            Inner::Graphic { edges, .. } => {
                let mut uf = UnionFind::new();
                for e in s.iter() {
                    let (u, v) = edges[&e];
                    if !uf.union(u, v) {
                        return false;
                    }
                }
                true
            }
            Inner::Linear { columns, .. } => {
                let cols: Vec<&Vec<Rat>> = s.iter().map(|e| &columns[&e]).collect();
                column_rank(&cols) == s.len()
            }
            Inner::Explicit { independent, .. } => independent.contains(s),
            Inner::Restrict { base, .. } => base.indep(s),
            Inner::Contract { base, fixed, .. } => base.indep(&s.union(fixed)),
            Inner::Truncate { base, limit } => s.len() <= *limit && base.indep(s),
            Inner::DirectSum { parts, .. } => parts
                .iter()
                .all(|part| part.indep(&s.intersection(part.ground()))),
        }
    }

    /// Rank of a subset: size of a maximum independent subset. Closed forms
    /// are used per family; derivations follow the standard rank identities.
    pub fn rank(&self, s: &GroundSet) -> Result<usize> {
        s.check_within(self.ground())?;
        Ok(self.rank_raw(s))
    }

    fn rank_raw(&self, s: &GroundSet) -> usize {
        match &*self.inner {
            Inner::Uniform { rank, .. } => s.len().min(*rank),
            Inner::Partition { blocks, .. } => blocks
                .iter()
                .map(|(block, cap)| s.intersection(block).len().min(*cap))
                .sum(),
            Inner::Graphic { edges, .. } => {
                let mut uf = UnionFind::new();
                let mut forest = 0usize;
                for e in s.iter() {
                    let (u, v) = edges[&e];
                    if uf.union(u, v) {
                        forest += 1;
                    }
                }
                forest
            }
            Inner::Linear { columns, .. } => {
                let cols: Vec<&Vec<Rat>> = s.iter().map(|e| &columns[&e]).collect();
                column_rank(&cols)
            }
            Inner::Explicit { .. } => self.greedy_max_independent(s).len(),
            Inner::Restrict { base, .. } => base.rank_raw(s),
            Inner::Contract { base, removed, removed_rank, .. } => {
                base.rank_raw(&s.union(removed)) - removed_rank
            }
            Inner::Truncate { base, limit } => base.rank_raw(s).min(*limit),
            Inner::DirectSum { parts, .. } => parts
                .iter()
                .map(|part| part.rank_raw(&s.intersection(part.ground())))
                .sum(),
        }
    }

    /// Greedy maximum independent subset of `s` in ascending element order;
    /// valid by the exchange axiom.
    pub fn max_independent_subset(&self, s: &GroundSet) -> Result<GroundSet> {
        s.check_within(self.ground())?;
        Ok(self.greedy_max_independent(s))
    }

    fn greedy_max_independent(&self, s: &GroundSet) -> GroundSet {
        let mut acc = GroundSet::new();
        for e in s.iter() {
            acc.insert(e);
            if !self.indep(&acc) {
                acc.remove(e);
            }
        }
        acc
    }

    /// Restriction M|_S to a nonempty subset.
    pub fn restrict(&self, s: &GroundSet) -> Result<Matroid> {
        if s.is_empty() {
            return Err(Error::EmptyGround);
        }
        s.check_within(self.ground())?;
        if s == self.ground() {
            return Ok(self.clone());
        }
        Ok(Matroid::wrap(Inner::Restrict { base: self.clone(), ground: s.clone() }))
    }

    /// Contraction M/S. The fixed maximum independent subset of `s` is the
    /// ascending greedy one, so derived oracles are reproducible.
    pub fn contract(&self, s: &GroundSet) -> Result<Matroid> {
        s.check_within(self.ground())?;
        if s.is_empty() {
            return Ok(self.clone());
        }
        let fixed = self.greedy_max_independent(s);
        let removed_rank = fixed.len();
        let ground = self.ground().difference(s);
        Ok(Matroid::wrap(Inner::Contract {
            base: self.clone(),
            removed: s.clone(),
            fixed,
            removed_rank,
            ground,
        }))
    }

    /// Deletion M \ S, i.e. restriction to the complement.
    pub fn delete(&self, s: &GroundSet) -> Result<Matroid> {
        s.check_within(self.ground())?;
        if s.is_empty() {
            return Ok(self.clone());
        }
        self.restrict(&self.ground().difference(s))
    }

    /// Truncation to rank at most `k`.
    pub fn truncate(&self, k: usize) -> Matroid {
        if k >= self.rank_raw(self.ground()) {
            return self.clone();
        }
        Matroid::wrap(Inner::Truncate { base: self.clone(), limit: k })
    }

    /// Direct sum of matroids on pairwise disjoint grounds.
    pub fn direct_sum(parts: Vec<Matroid>) -> Result<Matroid> {
        let mut ground = GroundSet::new();
        for part in &parts {
            if !ground.is_disjoint(part.ground()) {
                return Err(Error::OverlappingGrounds);
            }
            ground = ground.union(part.ground());
        }
        if parts.len() == 1 {
            return Ok(parts.into_iter().next().expect("one part"));
        }
        Ok(Matroid::wrap(Inner::DirectSum { parts, ground }))
    }

    /// Rank bound when this is a concrete uniform matroid; derived matroids
    /// report `None` even when oracle-equivalent to a uniform one.
    pub(crate) fn as_uniform(&self) -> Option<usize> {
        match &*self.inner {
            Inner::Uniform { rank, .. } => Some(*rank),
            _ => None,
        }
    }

    /// Union with a free matroid on `pad`, truncated back to the original
    /// rank: the matroid whose rank function is
    /// `min(r(S ∩ N₀) + |S ∩ pad|, r(N₀))`. Requires `|pad| = r(N₀)` and a
    /// pad disjoint from the ground set.
    pub fn free_extend_and_truncate(&self, pad: &GroundSet) -> Result<Matroid> {
        if !pad.is_disjoint(self.ground()) {
            return Err(Error::OverlappingGrounds);
        }
        let full_rank = self.rank_raw(self.ground());
        if pad.len() != full_rank {
            return Err(Error::WrongPadSize);
        }
        let sum = Matroid::direct_sum(alloc::vec![self.clone(), Matroid::free(pad.clone())])?;
        Ok(sum.truncate(full_rank))
    }
}

/// Union-find over opaque vertex labels; `union` returns false when both
/// endpoints were already connected (i.e. the edge closes a cycle).
struct UnionFind {
    parent: BTreeMap<u64, u64>,
}

impl UnionFind {
    fn new() -> Self {
        UnionFind { parent: BTreeMap::new() }
    }

    fn find(&mut self, v: u64) -> u64 {
        let p = *self.parent.entry(v).or_insert(v);
        if p == v {
            return v;
        }
        let root = self.find(p);
        self.parent.insert(v, root);
        root
    }

    fn union(&mut self, u: u64, v: u64) -> bool {
        let ru = self.find(u);
        let rv = self.find(v);
        if ru == rv {
            return false;
        }
        self.parent.insert(ru, rv);
        true
    }
}

/// Rank of a set of rational column vectors, by Gaussian elimination.
fn column_rank(cols: &[&Vec<Rat>]) -> usize {
    if cols.is_empty() {
        return 0;
    }
    let dim = cols[0].len();
    let mut mat: Vec<Vec<Rat>> = cols.iter().map(|c| (*c).clone()).collect();
    let mut rank = 0usize;
    for row in 0..dim {
        let Some(pivot) = (rank..mat.len()).find(|&j| !mat[j][row].is_zero()) else {
            continue;
        };
        mat.swap(rank, pivot);
        let pivot_val = mat[rank][row].clone();
        for j in 0..mat.len() {
            if j != rank && !mat[j][row].is_zero() {
                let factor = &mat[j][row] / &pivot_val;
                for r in row..dim {
                    let delta = &factor * &mat[rank][r];
                    mat[j][r] = &mat[j][r] - delta;
                }
            }
        }
        rank += 1;
        if rank == mat.len() {
            break;
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat_int;
    use alloc::vec;

    pub(crate) fn gs(ids: &[u64]) -> GroundSet {
        ids.iter().copied().collect()
    }

    /// Triangle graph on vertices 1,2,3 with edges e1={1,2}, e2={2,3}, e3={1,3}.
    pub(crate) fn triangle() -> Matroid {
        let edges = BTreeMap::from([
            (ElementId(1), (1, 2)),
            (ElementId(2), (2, 3)),
            (ElementId(3), (1, 3)),
        ]);
        Matroid::graphic(edges)
    }

    #[test]
    fn uniform_independence() {
        let m = Matroid::uniform(gs(&[1, 2, 3, 4]), 2);
        assert!(m.is_independent(&gs(&[1, 2])).unwrap());
        assert!(!m.is_independent(&gs(&[1, 2, 3])).unwrap());
        assert_eq!(m.is_independent(&gs(&[9])), Err(Error::ElementOutOfGround));
    }

    #[test]
    fn graphic_cycle_detection() {
        let m = triangle();
        assert!(!m.is_independent(&gs(&[1, 2, 3])).unwrap());
        assert!(m.is_independent(&gs(&[1, 2])).unwrap());
        assert_eq!(m.rank(&gs(&[1, 2, 3])).unwrap(), 2);
    }

    #[test]
    fn rank_examples() {
        let m = Matroid::uniform(gs(&[1, 2, 3, 4]), 2);
        assert_eq!(m.rank(&gs(&[1, 2, 3, 4])).unwrap(), 2);
        assert_eq!(m.rank(&GroundSet::new()).unwrap(), 0);
        assert_eq!(triangle().rank(&GroundSet::new()).unwrap(), 0);
    }

    #[test]
    fn restrict_examples() {
        let m = Matroid::uniform(gs(&[1, 2, 3, 4]), 2);
        let r = m.restrict(&gs(&[1, 2])).unwrap();
        assert_eq!(r.rank(&gs(&[1, 2])).unwrap(), 2);
        let t = triangle().restrict(&gs(&[1, 2])).unwrap();
        assert_eq!(t.rank(&gs(&[1, 2])).unwrap(), 2);
        assert_eq!(m.restrict(&GroundSet::new()).err(), Some(Error::EmptyGround));
    }

    #[test]
    fn restrict_full_is_identity() {
        let m = triangle();
        let r = m.restrict(m.ground()).unwrap();
        for mask in 0u32..8 {
            let s: GroundSet = (0..3).filter(|i| mask >> i & 1 == 1).map(|i| i as u64 + 1).collect();
            assert_eq!(m.is_independent(&s).unwrap(), r.is_independent(&s).unwrap());
        }
    }

    #[test]
    fn contract_examples() {
        let c = triangle().contract(&gs(&[1])).unwrap();
        assert_eq!(c.rank(&gs(&[2, 3])).unwrap(), 1);
        let m = Matroid::uniform(gs(&[1, 2, 3]), 2);
        let c = m.contract(&gs(&[1])).unwrap();
        assert_eq!(c.rank(&gs(&[2, 3])).unwrap(), 1);
        let id = m.contract(&GroundSet::new()).unwrap();
        assert_eq!(id.rank(&gs(&[1, 2, 3])).unwrap(), 2);
    }

    #[test]
    fn delete_examples() {
        let m = Matroid::uniform(gs(&[1, 2, 3, 4]), 2);
        let d = m.delete(&gs(&[3, 4])).unwrap();
        assert_eq!(d.ground(), &gs(&[1, 2]));
        assert_eq!(d.rank(&gs(&[1, 2])).unwrap(), 2);
        assert_eq!(m.delete(m.ground()).err(), Some(Error::EmptyGround));
    }

    #[test]
    fn direct_sum_examples() {
        let a = Matroid::uniform(gs(&[1]), 1);
        let b = Matroid::uniform(gs(&[2]), 1);
        let sum = Matroid::direct_sum(vec![a.clone(), b]).unwrap();
        assert_eq!(sum.rank(&gs(&[1, 2])).unwrap(), 2);

        let single = Matroid::direct_sum(vec![a.clone()]).unwrap();
        assert_eq!(single.rank(&gs(&[1])).unwrap(), 1);

        let u = Matroid::uniform(gs(&[10, 11]), 1);
        let sum = Matroid::direct_sum(vec![u, triangle()]).unwrap();
        let all = sum.ground().clone();
        assert_eq!(sum.rank(&all).unwrap(), 3);

        let overlap = Matroid::direct_sum(vec![a.clone(), a]);
        assert_eq!(overlap.err(), Some(Error::OverlappingGrounds));
    }

    #[test]
    fn truncate_examples() {
        let free = Matroid::free(gs(&[1, 2, 3, 4, 5]));
        let t = free.truncate(2);
        for mask in 0u32..32 {
            let s: GroundSet = (0..5).filter(|i| mask >> i & 1 == 1).map(|i| i as u64 + 1).collect();
            assert_eq!(t.is_independent(&s).unwrap(), s.len() <= 2);
        }
        let m = triangle();
        let same = m.truncate(2);
        assert_eq!(same.rank(&gs(&[1, 2, 3])).unwrap(), 2);
        assert_eq!(m.truncate(1).rank(&gs(&[1, 2, 3])).unwrap(), 1);
    }

    #[test]
    fn free_extension_examples() {
        let m0 = Matroid::uniform(gs(&[1]), 1);
        let ext = m0.free_extend_and_truncate(&gs(&[7])).unwrap();
        // Bases are exactly {1} and {7}.
        assert!(ext.is_independent(&gs(&[1])).unwrap());
        assert!(ext.is_independent(&gs(&[7])).unwrap());
        assert!(!ext.is_independent(&gs(&[1, 7])).unwrap());
        assert_eq!(ext.rank(&gs(&[1, 7])).unwrap(), 1);

        let tri = triangle();
        let pad = gs(&[10, 11]);
        let ext = tri.free_extend_and_truncate(&pad).unwrap();
        let all = ext.ground().clone();
        assert_eq!(ext.rank(&all).unwrap(), 2);
        // Restricted to the original ground, the extension matches the base.
        for mask in 0u32..8 {
            let s: GroundSet = (0..3).filter(|i| mask >> i & 1 == 1).map(|i| i as u64 + 1).collect();
            assert_eq!(ext.is_independent(&s).unwrap(), tri.is_independent(&s).unwrap());
        }

        assert_eq!(tri.free_extend_and_truncate(&gs(&[10])).err(), Some(Error::WrongPadSize));
        assert_eq!(tri.free_extend_and_truncate(&gs(&[1, 10])).err(), Some(Error::OverlappingGrounds));
    }

    #[test]
    fn explicit_validation() {
        let g = gs(&[1, 2]);
        let ok = Matroid::explicit(
            g.clone(),
            vec![GroundSet::new(), gs(&[1]), gs(&[2])],
        )
        .unwrap();
        assert!(ok.is_independent(&gs(&[1])).unwrap());
        assert!(!ok.is_independent(&gs(&[1, 2])).unwrap());

        // Missing singleton {1}: not downward closed.
        let bad = Matroid::explicit(g.clone(), vec![GroundSet::new(), gs(&[1, 2]), gs(&[2])]);
        assert!(bad.is_err());

        // {1,2} and {3} with nothing to exchange into {3}: violates exchange.
        let bad = Matroid::explicit(
            gs(&[1, 2, 3]),
            vec![GroundSet::new(), gs(&[1]), gs(&[2]), gs(&[3]), gs(&[1, 2])],
        );
        assert!(bad.is_err());

        let big: GroundSet = (0u64..13).collect();
        assert!(Matroid::explicit(big, vec![GroundSet::new()]).is_err());
    }

    #[test]
    fn linear_matches_explicit_fixture() {
        // Columns (1,0), (0,1), (1,1) over Q: any two independent, all three dependent.
        let cols = BTreeMap::from([
            (ElementId(1), vec![rat_int(1), rat_int(0)]),
            (ElementId(2), vec![rat_int(0), rat_int(1)]),
            (ElementId(3), vec![rat_int(1), rat_int(1)]),
        ]);
        let lin = Matroid::linear(cols).unwrap();
        let expl = Matroid::explicit(
            gs(&[1, 2, 3]),
            vec![
                GroundSet::new(),
                gs(&[1]),
                gs(&[2]),
                gs(&[3]),
                gs(&[1, 2]),
                gs(&[1, 3]),
                gs(&[2, 3]),
            ],
        )
        .unwrap();
        for mask in 0u32..8 {
            let s: GroundSet = (0..3).filter(|i| mask >> i & 1 == 1).map(|i| i as u64 + 1).collect();
            assert_eq!(lin.rank(&s).unwrap(), expl.rank(&s).unwrap());
        }
    }
}
