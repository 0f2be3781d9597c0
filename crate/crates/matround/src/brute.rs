//! Exhaustive reference solvers. Everything here enumerates subsets and asks
//! independence oracles directly, providing the ground truth the randomized
//! suites compare against.

use anyhow::{bail, Result};

use matround_core::ground::GroundSet;
use matround_core::matroid::Matroid;
use matround_core::rat::{Rat, RatVec};
use matround_core::refine::RoundingInstance;

pub const BRUTE_CAP: usize = 20;

fn subsets(ground: &GroundSet) -> Result<impl Iterator<Item = GroundSet> + '_> {
    let elems = ground.to_vec();
    if elems.len() > BRUTE_CAP {
        bail!("ground of size {} exceeds the brute-force cap {}", elems.len(), BRUTE_CAP);
    }
    Ok((0usize..1 << elems.len()).map(move |mask| {
        elems
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, e)| *e)
            .collect()
    }))
}

/// Maximum-weight set that is simultaneously exactly feasible for the
/// rounding instance: a basis of M0, independent in every side matroid, and
/// within every knapsack budget. `None` when no such set exists.
pub fn best_exact_solution(instance: &RoundingInstance) -> Result<Option<(GroundSet, Rat)>> {
    let ground = instance.ground();
    let rank = instance.m0.rank(ground).map_err(err)?;
    let mut best: Option<(GroundSet, Rat)> = None;
    'subset: for s in subsets(ground)? {
        if s.len() != rank || !instance.m0.is_independent(&s).map_err(err)? {
            continue;
        }
        for side in &instance.side {
            let part = s.intersection(side.matroid.ground());
            if !side.matroid.is_independent(&part).map_err(err)? {
                continue 'subset;
            }
        }
        for kn in &instance.knapsacks {
            if kn.cost.sum_over(&s.intersection(&kn.ground)) > kn.budget {
                continue 'subset;
            }
        }
        let value = instance.w.sum_over(&s);
        if best.as_ref().map_or(true, |(_, b)| value > *b) {
            best = Some((s, value));
        }
    }
    Ok(best)
}

/// Like [`best_exact_solution`] but for the independent-set variant: the
/// solution only has to be independent in M0, not a basis.
pub fn best_exact_independent(instance: &RoundingInstance) -> Result<Option<(GroundSet, Rat)>> {
    let ground = instance.ground();
    let mut best: Option<(GroundSet, Rat)> = None;
    'subset: for s in subsets(ground)? {
        if !instance.m0.is_independent(&s).map_err(err)? {
            continue;
        }
        for side in &instance.side {
            let part = s.intersection(side.matroid.ground());
            if !side.matroid.is_independent(&part).map_err(err)? {
                continue 'subset;
            }
        }
        for kn in &instance.knapsacks {
            if kn.cost.sum_over(&s.intersection(&kn.ground)) > kn.budget {
                continue 'subset;
            }
        }
        let value = instance.w.sum_over(&s);
        if best.as_ref().map_or(true, |(_, b)| value > *b) {
            best = Some((s, value));
        }
    }
    Ok(best)
}

/// Maximum-weight common independent set of any number of matroids over the
/// same ground (the empty set always qualifies).
pub fn best_common_independent(
    matroids: &[Matroid],
    w: &RatVec,
) -> Result<(GroundSet, Rat)> {
    let ground = w.ground();
    let mut best: Option<(GroundSet, Rat)> = None;
    'subset: for s in subsets(ground)? {
        for m in matroids {
            if !m.is_independent(&s).map_err(err)? {
                continue 'subset;
            }
        }
        let value = w.sum_over(&s);
        if best.as_ref().map_or(true, |(_, b)| value > *b) {
            best = Some((s, value));
        }
    }
    Ok(best.expect("the empty set is always a candidate"))
}

/// Minimum-cost spanning tree that is exactly independent in every group
/// matroid (`None` when no tree satisfies all groups strictly).
pub fn best_exact_tree(
    m0: &Matroid,
    costs: &RatVec,
    groups: &[matround_core::apps::GmdstGroup],
) -> Result<Option<(GroundSet, Rat)>> {
    let ground = m0.ground();
    let rank = m0.rank(ground).map_err(err)?;
    let mut best: Option<(GroundSet, Rat)> = None;
    'subset: for s in subsets(ground)? {
        if s.len() != rank || !m0.is_independent(&s).map_err(err)? {
            continue;
        }
        for g in groups {
            let part = s.intersection(g.matroid.ground());
            if !g.matroid.is_independent(&part).map_err(err)? {
                continue 'subset;
            }
        }
        let value = costs.sum_over(&s);
        if best.as_ref().map_or(true, |(_, b)| value < *b) {
            best = Some((s, value));
        }
    }
    Ok(best)
}

fn err(e: matround_core::error::Error) -> anyhow::Error {
    anyhow::anyhow!("{e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use matround_core::ground::ElementId;
    use matround_core::rat::rat_int;
    use matround_core::refine::SideConstraint;

    fn gs(ids: &[u64]) -> GroundSet {
        ids.iter().copied().collect()
    }

    fn weights(entries: &[(u64, i64)]) -> RatVec {
        RatVec::from_entries(
            entries.iter().map(|&(e, _)| ElementId(e)).collect(),
            entries.iter().map(|&(e, w)| (ElementId(e), rat_int(w))),
        )
        .unwrap()
    }

    #[test]
    fn common_independent_of_identical_rank_one() {
        let m = Matroid::uniform(gs(&[1, 2]), 1);
        let w = weights(&[(1, 1), (2, 1)]);
        let (_, v) = best_common_independent(&[m.clone(), m.clone(), m], &w).unwrap();
        assert_eq!(v, rat_int(1));
    }

    #[test]
    fn exact_solution_respects_side_matroids() {
        let inst = RoundingInstance::new(
            Matroid::uniform(gs(&[1, 2, 3]), 2),
            vec![SideConstraint {
                matroid: Matroid::partition(vec![(gs(&[1, 2]), 1), (gs(&[3]), 1)]).unwrap(),
                q: 2,
            }],
            vec![],
            weights(&[(1, 5), (2, 4), (3, 1)]),
        )
        .unwrap();
        let (s, v) = best_exact_solution(&inst).unwrap().unwrap();
        assert_eq!(s, gs(&[1, 3]));
        assert_eq!(v, rat_int(6));
    }

    #[test]
    fn infeasible_instances_return_none() {
        let inst = RoundingInstance::new(
            Matroid::uniform(gs(&[1, 2]), 2),
            vec![SideConstraint { matroid: Matroid::uniform(gs(&[1, 2]), 1), q: 1 }],
            vec![],
            weights(&[(1, 1), (2, 1)]),
        )
        .unwrap();
        assert!(best_exact_solution(&inst).unwrap().is_none());
    }
}
