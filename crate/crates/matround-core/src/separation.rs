//! Separation over matroid polytopes: minimize `r(S) - x(S)` by subset
//! enumeration (with a closed-form shortcut for uniform matroids).
//!
//! Enumeration is capped; the refinement loop shrinks ground sets quickly,
//! so the cap is rarely a concern at desk scale. Ties are broken by smallest
//! cardinality, then lexicographically smallest element list, making every
//! returned set deterministic.

use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::ground::{ElementId, GroundSet};
use crate::matroid::Matroid;
use crate::rat::{Rat, RatVec};

/// Default cap on the ground-set size for subset enumeration.
pub const DEFAULT_SEP_CAP: usize = 22;

/// Ranks of all subsets of `elems` (as bitmasks over the slice order),
/// computed with one independence-oracle call per subset: the ascending
/// greedy independent set of a mask extends the one of the mask without its
/// top element.
pub(crate) fn ranks_by_mask(m: &Matroid, elems: &[ElementId]) -> Vec<u32> {
    let n = elems.len();
    let size = 1usize << n;
    let mut greedy: Vec<u64> = Vec::with_capacity(size);
    let mut ranks: Vec<u32> = Vec::with_capacity(size);
    greedy.push(0);
    ranks.push(0);
    for mask in 1..size {
        let top = usize::BITS as usize - 1 - mask.leading_zeros() as usize;
        let prev = mask & !(1 << top);
        let base = greedy[prev];
        let mut candidate: GroundSet =
            (0..n).filter(|i| base >> i & 1 == 1).map(|i| elems[i]).collect();
        candidate.insert(elems[top]);
        let keep = m
            .is_independent(&candidate)
            .expect("mask elements lie in the ground set");
        let set = if keep { base | 1 << top } else { base };
        greedy.push(set);
        ranks.push(set.count_ones());
    }
    ranks
}

/// Lexicographic order on the (ascending) element lists two masks denote.
fn lex_smaller(a: usize, b: usize, n: usize) -> bool {
    for i in 0..n {
        let in_a = a >> i & 1 == 1;
        let in_b = b >> i & 1 == 1;
        if in_a != in_b {
            // The mask holding the smaller element is lexicographically
            // smaller; if one list is a prefix of the other the cardinality
            // tie-break has already fired, so this is enough.
            return in_a;
        }
    }
    false
}

/// Minimizes `rank(M, S) - x(S)` over nonempty `S` (proper subsets only when
/// `proper_only`). Returns the minimizing set and its value when the minimum
/// is nonpositive: a negative value is a violated rank constraint, zero a
/// tight set. Returns `None` when every candidate has positive slack.
pub fn separate_matroid(
    m: &Matroid,
    x: &RatVec,
    proper_only: bool,
    cap: usize,
) -> Result<Option<(GroundSet, Rat)>> {
    if x.ground() != m.ground() {
        return Err(Error::ElementOutOfGround);
    }
    if let Some(hit) = separate_uniform(m, x, proper_only) {
        return Ok(hit);
    }
    let elems = m.ground().to_vec();
    let n = elems.len();
    if n > cap {
        return Err(Error::GroundTooLarge { size: n, cap });
    }
    if n == 0 || (proper_only && n == 1) {
        return Ok(None);
    }
    let ranks = ranks_by_mask(m, &elems);
    let mut sums: Vec<Rat> = Vec::with_capacity(1 << n);
    sums.push(Rat::zero());
    for mask in 1usize..1 << n {
        let top = usize::BITS as usize - 1 - mask.leading_zeros() as usize;
        let sum = &sums[mask & !(1 << top)] + x.get(elems[top]);
        sums.push(sum);
    }
    let full = (1usize << n) - 1;
    let mut best: Option<(usize, Rat)> = None;
    for mask in 1usize..=full {
        if proper_only && mask == full {
            continue;
        }
        let value = Rat::from_integer(ranks[mask].into()) - &sums[mask];
        let better = match &best {
            None => true,
            Some((best_mask, best_value)) => {
                value < *best_value
                    || (value == *best_value
                        && (mask.count_ones() < best_mask.count_ones()
                            || (mask.count_ones() == best_mask.count_ones()
                                && lex_smaller(mask, *best_mask, n))))
            }
        };
        if better {
            best = Some((mask, value));
        }
    }
    let (mask, value) = best.expect("at least one candidate subset");
    if value.is_positive() {
        return Ok(None);
    }
    let set: GroundSet = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| elems[i]).collect();
    Ok(Some((set, value)))
}

/// Closed-form separation for a top-level uniform matroid: for each size t
/// the minimizer of `min(t, k) - x(S)` takes the t largest entries, ties by
/// smallest label, which also realizes the global tie-break rules.
fn separate_uniform(
    m: &Matroid,
    x: &RatVec,
    proper_only: bool,
) -> Option<Option<(GroundSet, Rat)>> {
    let k = m.as_uniform()?;
    let n = m.ground().len();
    if n == 0 || (proper_only && n == 1) {
        return Some(None);
    }
    let mut order: Vec<ElementId> = m.ground().to_vec();
    order.sort_by(|a, b| x.get(*b).cmp(x.get(*a)).then(a.cmp(b)));
    let mut best: Option<(usize, Rat)> = None;
    let mut prefix = Rat::zero();
    let limit = if proper_only { n - 1 } else { n };
    for t in 1..=limit {
        prefix += x.get(order[t - 1]);
        let value = Rat::from_integer((t.min(k) as u64).into()) - &prefix;
        // Strict improvement only: among equal values the smaller
        // cardinality wins, and per size the greedy prefix is already the
        // lexicographically smallest optimum.
        if best.as_ref().map_or(true, |(_, bv)| value < *bv) {
            best = Some((t, value));
        }
    }
    let (t, value) = best.expect("nonempty prefix candidates");
    if value.is_positive() {
        return Some(None);
    }
    Some(Some((order[..t].iter().copied().collect(), value)))
}

/// Finds some tight proper nonempty set `x(S) = r(S)`, or `None`. The caller
/// guarantees `x` lies in the matroid polytope.
pub fn find_tight_proper_set(m: &Matroid, x: &RatVec, cap: usize) -> Result<Option<GroundSet>> {
    match separate_matroid(m, x, true, cap)? {
        Some((set, value)) => {
            debug_assert!(!value.is_negative(), "separation point outside the polytope");
            if value.is_zero() {
                Ok(Some(set))
            } else {
                Ok(None)
            }
        }
        None => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_int};
    use alloc::collections::BTreeMap;

    fn gs(ids: &[u64]) -> GroundSet {
        ids.iter().copied().collect()
    }

    fn triangle() -> Matroid {
        Matroid::graphic(BTreeMap::from([
            (ElementId(1), (1, 2)),
            (ElementId(2), (2, 3)),
            (ElementId(3), (1, 3)),
        ]))
    }

    #[test]
    fn uniform_violation() {
        let m = Matroid::uniform(gs(&[1, 2]), 1);
        let x = RatVec::from_entries(
            gs(&[1, 2]),
            [(ElementId(1), rat(3, 4)), (ElementId(2), rat(3, 4))],
        )
        .unwrap();
        let (s, v) = separate_matroid(&m, &x, false, DEFAULT_SEP_CAP).unwrap().unwrap();
        assert_eq!(s, gs(&[1, 2]));
        assert_eq!(v, rat(-1, 2));
    }

    #[test]
    fn zero_vector_has_no_tight_or_violated_set() {
        let m = triangle();
        let x = RatVec::zero(gs(&[1, 2, 3]));
        assert_eq!(separate_matroid(&m, &x, false, DEFAULT_SEP_CAP).unwrap(), None);
    }

    #[test]
    fn tight_full_set_on_triangle() {
        let m = triangle();
        let x = RatVec::from_entries(
            gs(&[1, 2, 3]),
            [
                (ElementId(1), rat(1, 2)),
                (ElementId(2), rat(1, 2)),
                (ElementId(3), rat_int(1)),
            ],
        )
        .unwrap();
        let (s, v) = separate_matroid(&m, &x, false, DEFAULT_SEP_CAP).unwrap().unwrap();
        assert_eq!(v, rat_int(0));
        // r({e3}) = 1 = x({e3}): the singleton ties the full set at value 0
        // and wins on cardinality.
        assert_eq!(s, gs(&[3]));
    }

    #[test]
    fn tight_sets_proper_only() {
        let m = Matroid::uniform(gs(&[1, 2]), 1);
        let x = RatVec::from_entries(
            gs(&[1, 2]),
            [(ElementId(1), rat(1, 2)), (ElementId(2), rat(1, 2))],
        )
        .unwrap();
        assert_eq!(find_tight_proper_set(&m, &x, DEFAULT_SEP_CAP).unwrap(), None);

        let m = Matroid::uniform(gs(&[1, 2, 3]), 2);
        let x = RatVec::from_entries(
            gs(&[1, 2, 3]),
            [(ElementId(1), rat_int(1)), (ElementId(2), rat_int(1))],
        )
        .unwrap();
        assert_eq!(
            find_tight_proper_set(&m, &x, DEFAULT_SEP_CAP).unwrap(),
            Some(gs(&[1]))
        );

        let m = Matroid::partition(alloc::vec![(gs(&[1, 2]), 1), (gs(&[3]), 1)]).unwrap();
        let x = RatVec::from_entries(
            gs(&[1, 2, 3]),
            [
                (ElementId(1), rat(1, 2)),
                (ElementId(2), rat(1, 2)),
                (ElementId(3), rat_int(1)),
            ],
        )
        .unwrap();
        // {3} is tight and smaller than {1,2}.
        assert_eq!(
            find_tight_proper_set(&m, &x, DEFAULT_SEP_CAP).unwrap(),
            Some(gs(&[3]))
        );
    }

    #[test]
    fn uniform_shortcut_matches_enumeration() {
        // Same instance through the shortcut (uniform) and enumeration
        // (explicit encoding of the same matroid).
        let ground = gs(&[1, 2, 3, 4]);
        let uni = Matroid::uniform(ground.clone(), 2);
        let mut family = alloc::vec::Vec::new();
        for mask in 0u32..16 {
            let s: GroundSet =
                (0..4).filter(|i| mask >> i & 1 == 1).map(|i| i as u64 + 1).collect();
            if s.len() <= 2 {
                family.push(s);
            }
        }
        let expl = Matroid::explicit(ground.clone(), family).unwrap();
        let points = [
            [rat(3, 4), rat(3, 4), rat(1, 2), rat_int(0)],
            [rat_int(1), rat_int(1), rat_int(0), rat_int(0)],
            [rat(1, 3), rat(1, 3), rat(1, 3), rat(1, 3)],
            [rat_int(1), rat(1, 2), rat(1, 2), rat_int(1)],
        ];
        for point in points {
            let x = RatVec::from_entries(
                ground.clone(),
                point.iter().cloned().enumerate().map(|(i, v)| (ElementId(i as u64 + 1), v)),
            )
            .unwrap();
            for proper in [false, true] {
                assert_eq!(
                    separate_matroid(&uni, &x, proper, DEFAULT_SEP_CAP).unwrap(),
                    separate_matroid(&expl, &x, proper, DEFAULT_SEP_CAP).unwrap(),
                );
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        let ground: GroundSet = (0u64..5).collect();
        let m = Matroid::graphic(
            ground
                .iter()
                .map(|e| (e, (e.0, e.0 + 1)))
                .collect(),
        );
        let x = RatVec::zero(ground);
        assert_eq!(
            separate_matroid(&m, &x, false, 4),
            Err(Error::GroundTooLarge { size: 5, cap: 4 })
        );
    }
}
