//! Weighted 2-matroid intersection through the integral intersection
//! polytope, the q-independence test, and matroid partitioning into at most
//! q independent sets via shortest augmenting paths in the exchange graph.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::ground::{ElementId, GroundSet};
use crate::matroid::Matroid;
use crate::matroid_lp::{solve_matroid_lp, LpStatus, MatroidLp};
use crate::rat::RatVec;
use crate::separation::ranks_by_mask;

/// Cap for the exhaustive q-independence check.
pub const Q_INDEPENDENCE_CAP: usize = 20;

/// Partition of a set into independent sets of one matroid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionCertificate {
    pub parts: Vec<GroundSet>,
}

impl PartitionCertificate {
    /// Re-validates with independence oracles only: parts disjoint, union
    /// equal to `target`, every part independent in `m`.
    pub fn validate(&self, m: &Matroid, target: &GroundSet) -> Result<bool> {
        let mut union = GroundSet::new();
        for part in &self.parts {
            if !union.is_disjoint(part) {
                return Ok(false);
            }
            union = union.union(part);
            if !m.is_independent(part)? {
                return Ok(false);
            }
        }
        Ok(&union == target)
    }
}

/// Maximum-weight common independent set of two matroids on the same
/// ground, via the intersection LP (whose extreme points are integral).
pub fn weighted_intersection(
    m1: &Matroid,
    m2: &Matroid,
    w: &RatVec,
    sep_cap: usize,
) -> Result<GroundSet> {
    if m1.ground() != m2.ground() {
        return Err(Error::Invalid("intersection requires equal grounds".into()));
    }
    if w.ground() != m1.ground() {
        return Err(Error::Invalid("weight vector ground mismatch".into()));
    }
    if m1.ground().is_empty() {
        return Ok(GroundSet::new());
    }
    let lp = MatroidLp {
        basis: None,
        side: vec![m1.clone(), m2.clone()],
        knapsacks: vec![],
        objective: w.clone(),
    };
    let sol = solve_matroid_lp(&lp, sep_cap)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Internal("intersection LP not optimal"));
    }
    let (x, _) = sol.optimal()?;
    let mut support = GroundSet::new();
    for (e, v) in x.iter() {
        if v.is_one() {
            support.insert(e);
        } else if !v.is_zero() {
            return Err(Error::FractionalVertex);
        }
    }
    Ok(support)
}

/// True iff `|T| <= q * rank(T)` for every subset `T` of `s`; exhaustive.
pub fn is_q_independent(m: &Matroid, s: &GroundSet, q: u32) -> Result<bool> {
    s.check_within(m.ground())?;
    let elems = s.to_vec();
    if elems.len() > Q_INDEPENDENCE_CAP {
        return Err(Error::GroundTooLarge { size: elems.len(), cap: Q_INDEPENDENCE_CAP });
    }
    let restricted = if s.is_empty() { return Ok(true) } else { m.restrict(s)? };
    let ranks = ranks_by_mask(&restricted, &elems);
    for (mask, &rank) in ranks.iter().enumerate() {
        if mask.count_ones() > q * rank {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Partitions `s` into at most `q` independent sets of `m`, or reports that
/// no such partition exists. Elements are inserted in ascending order; each
/// insertion follows a breadth-first shortest augmenting path through the
/// exchange graph over the q parts.
pub fn partition(m: &Matroid, s: &GroundSet, q: u32) -> Result<Option<PartitionCertificate>> {
    s.check_within(m.ground())?;
    if q == 0 {
        return Err(Error::Invalid("q must be at least 1".into()));
    }
    let mut parts: Vec<GroundSet> = vec![GroundSet::new(); q as usize];
    for e in s.iter() {
        if !augment(m, &mut parts, e)? {
            return Ok(None);
        }
    }
    let parts = parts.into_iter().filter(|p| !p.is_empty()).collect();
    Ok(Some(PartitionCertificate { parts }))
}

/// One augmentation: place `new_elem`, possibly displacing elements along a
/// shortest path. Returns false when no augmenting path exists.
fn augment(m: &Matroid, parts: &mut [GroundSet], new_elem: ElementId) -> Result<bool> {
    // BFS state per discovered element: the part its successor sits in and
    // the predecessor on the path.
    let mut pred: BTreeMap<ElementId, Option<(ElementId, usize)>> = BTreeMap::new();
    pred.insert(new_elem, None);
    let mut queue: Vec<ElementId> = vec![new_elem];
    let mut head = 0;

    while head < queue.len() {
        let u = queue[head];
        head += 1;

        // Direct placement: some part accepts u as is.
        for (j, part) in parts.iter().enumerate() {
            if part.contains(u) {
                continue;
            }
            let mut cand = part.clone();
            cand.insert(u);
            if m.is_independent(&cand)? {
                apply_path(parts, &pred, u, j);
                return Ok(true);
            }
        }
        // Exchange edges: u may replace v in v's part.
        for (j, part) in parts.iter().enumerate() {
            if part.contains(u) {
                continue;
            }
            for v in part.iter() {
                if pred.contains_key(&v) {
                    continue;
                }
                let mut cand = part.clone();
                cand.remove(v);
                cand.insert(u);
                if m.is_independent(&cand)? {
                    pred.insert(v, Some((u, j)));
                    queue.push(v);
                }
            }
        }
    }
    Ok(false)
}

/// Applies the swaps along the path ending at `last`, which enters `part`.
fn apply_path(
    parts: &mut [GroundSet],
    pred: &BTreeMap<ElementId, Option<(ElementId, usize)>>,
    last: ElementId,
    part: usize,
) {
    let mut current = last;
    let mut dest = part;
    loop {
        // Remove `current` from wherever it sits, then put it in `dest`.
        for p in parts.iter_mut() {
            p.remove(current);
        }
        parts[dest].insert(current);
        match pred[&current] {
            Some((prev, prev_part)) => {
                current = prev;
                dest = prev_part;
            }
            None => break,
        }
    }
}
