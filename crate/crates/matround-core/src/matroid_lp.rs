//! LPs over matroid (and basis) polytopes with knapsack rows, solved by a
//! cutting-plane loop around the exact simplex.
//!
//! A returned `Optimal` point is a true vertex of the full implicitly
//! constrained region: it is a vertex of the outer relaxation built from the
//! generated rows, and it satisfies every rank constraint, so it is a vertex
//! of the contained region as well. Both facts are checked after each solve.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::ground::{ElementId, GroundSet};
use crate::matroid::Matroid;
use crate::rat::{Rat, RatVec};
use crate::separation::separate_matroid;
use crate::simplex::{row_rank, simplex_solve, LinearConstraint, Sense, SimplexStatus};

/// One knapsack row: `cost · x|_ground <= budget`.
#[derive(Clone, Debug)]
pub struct KnapsackRow {
    pub ground: GroundSet,
    pub cost: RatVec,
    pub budget: Rat,
}

impl KnapsackRow {
    /// Costs must be nonnegative and indexed exactly by `ground`.
    pub fn new(ground: GroundSet, cost: RatVec, budget: Rat) -> Result<Self> {
        if cost.ground() != &ground {
            return Err(Error::Invalid("knapsack cost vector ground mismatch".into()));
        }
        if cost.iter().any(|(_, c)| c.is_negative()) {
            return Err(Error::Invalid("knapsack costs must be nonnegative".into()));
        }
        if budget.is_negative() {
            return Err(Error::Invalid("knapsack budget must be nonnegative".into()));
        }
        Ok(KnapsackRow { ground, cost, budget })
    }
}

/// LP over the intersection of matroid polytopes: optional basis matroid
/// (adding the equality `x(N0) = r0(N0)`), side matroid polytopes on
/// sub-grounds, knapsack rows, and bounds `0 <= x <= 1`.
#[derive(Clone, Debug)]
pub struct MatroidLp {
    pub basis: Option<Matroid>,
    pub side: Vec<Matroid>,
    pub knapsacks: Vec<KnapsackRow>,
    pub objective: RatVec,
}

impl MatroidLp {
    pub fn ground(&self) -> &GroundSet {
        self.objective.ground()
    }

    fn check(&self) -> Result<()> {
        let n = self.ground();
        if let Some(m0) = &self.basis {
            m0.ground().check_within(n)?;
        }
        for m in &self.side {
            m.ground().check_within(n)?;
        }
        for k in &self.knapsacks {
            k.ground.check_within(n)?;
        }
        Ok(())
    }

    /// Matroids whose rank constraints apply, basis first.
    fn matroids(&self) -> impl Iterator<Item = &Matroid> {
        self.basis.iter().chain(self.side.iter())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// A rank constraint generated during the cutting-plane loop; index 0 is the
/// basis matroid, side matroids follow in order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratedCut {
    pub matroid: usize,
    pub set: GroundSet,
    pub rank: usize,
}

#[derive(Clone, Debug)]
pub struct VertexSolution {
    pub status: LpStatus,
    /// Present iff `Optimal`; a vertex of the full feasible region.
    pub x: Option<RatVec>,
    pub objective: Option<Rat>,
    pub cuts: Vec<GeneratedCut>,
}

impl VertexSolution {
    pub fn optimal(&self) -> Result<(&RatVec, &Rat)> {
        match (&self.x, &self.objective) {
            (Some(x), Some(obj)) if self.status == LpStatus::Optimal => Ok((x, obj)),
            _ => Err(Error::Infeasible),
        }
    }
}

fn rank_cut(m: &Matroid, matroid: usize, set: GroundSet) -> Result<GeneratedCut> {
    let rank = m.rank(&set)?;
    Ok(GeneratedCut { matroid, set, rank })
}

fn cut_to_row(cut: &GeneratedCut) -> LinearConstraint {
    let coeffs: BTreeMap<ElementId, Rat> =
        cut.set.iter().map(|e| (e, Rat::one())).collect();
    LinearConstraint::new(coeffs, Sense::Le, Rat::from_integer((cut.rank as u64).into()))
}

/// Solves the matroid LP with iterated separation. Deterministic: rows are
/// added in matroid order and separation uses fixed tie-breaking.
pub fn solve_matroid_lp(lp: &MatroidLp, sep_cap: usize) -> Result<VertexSolution> {
    lp.check()?;
    let n = lp.ground();
    let mut rows: Vec<LinearConstraint> = Vec::new();

    // Bounds x <= 1 (x >= 0 is implicit in the simplex).
    for e in n.iter() {
        rows.push(LinearConstraint::new(
            BTreeMap::from([(e, Rat::one())]),
            Sense::Le,
            Rat::one(),
        ));
    }
    // Basis equality x(N0) = r0(N0), always part of the initial system.
    if let Some(m0) = &lp.basis {
        let r0 = m0.rank(m0.ground())?;
        rows.push(LinearConstraint::new(
            m0.ground().iter().map(|e| (e, Rat::one())).collect(),
            Sense::Eq,
            Rat::from_integer((r0 as u64).into()),
        ));
    }
    for k in &lp.knapsacks {
        rows.push(LinearConstraint::new(
            k.ground.iter().map(|e| (e, k.cost.get(e).clone())).collect(),
            Sense::Le,
            k.budget.clone(),
        ));
    }
    let base_rows = rows.len();

    let mut cuts: Vec<GeneratedCut> = Vec::new();
    loop {
        let sol = simplex_solve(&rows, &lp.objective)?;
        match sol.status {
            SimplexStatus::Infeasible => {
                return Ok(VertexSolution {
                    status: LpStatus::Infeasible,
                    x: None,
                    objective: None,
                    cuts,
                });
            }
            SimplexStatus::Unbounded => {
                return Err(Error::Internal("bounded LP reported unbounded"));
            }
            SimplexStatus::Optimal => {}
        }
        let x = sol.x.expect("optimal solution carries a point");

        let mut new_cuts: Vec<GeneratedCut> = Vec::new();
        for (idx, m) in lp.matroids().enumerate() {
            let x_m = x.restrict(m.ground())?;
            if let Some((set, violation)) = separate_matroid(m, &x_m, false, sep_cap)? {
                if violation.is_negative() {
                    new_cuts.push(rank_cut(m, idx, set)?);
                }
            }
        }
        if new_cuts.is_empty() {
            check_vertex(&rows[..base_rows], &cuts, &x, n)?;
            return Ok(VertexSolution {
                status: LpStatus::Optimal,
                objective: sol.objective,
                x: Some(x),
                cuts,
            });
        }
        for cut in new_cuts {
            rows.push(cut_to_row(&cut));
            cuts.push(cut);
        }
    }
}

/// Asserts that the linearly independent tight constraints at `x` (generated
/// rows plus bounds) span all `|N|` dimensions, i.e. `x` is a vertex.
fn check_vertex(
    base_rows: &[LinearConstraint],
    cuts: &[GeneratedCut],
    x: &RatVec,
    n: &GroundSet,
) -> Result<()> {
    let mut tight: Vec<BTreeMap<ElementId, Rat>> = Vec::new();
    for row in base_rows {
        if row.slack_at(x).is_zero() {
            tight.push(row.coeffs.clone());
        }
    }
    for cut in cuts {
        let row = cut_to_row(cut);
        if row.slack_at(x).is_zero() {
            tight.push(row.coeffs);
        }
    }
    for e in n.iter() {
        if x.get(e).is_zero() {
            tight.push(BTreeMap::from([(e, Rat::one())]));
        }
    }
    if row_rank(&tight, n) == n.len() {
        Ok(())
    } else {
        Err(Error::Internal("optimal solution is not a vertex"))
    }
}

/// Exhaustively re-checks that `x` satisfies every rank constraint of every
/// matroid in the LP (used by tests and the verifier; separation-based).
pub fn check_rank_feasible(lp: &MatroidLp, x: &RatVec, sep_cap: usize) -> Result<bool> {
    for m in lp.matroids() {
        let x_m = x.restrict(m.ground())?;
        if let Some((_, violation)) = separate_matroid(m, &x_m, false, sep_cap)? {
            if violation.is_negative() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat_int, RatVec};
    use crate::separation::DEFAULT_SEP_CAP;
    use alloc::vec;

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

    fn ones(ground: &GroundSet) -> RatVec {
        RatVec::from_entries(ground.clone(), ground.iter().map(|e| (e, rat_int(1)))).unwrap()
    }

    #[test]
    fn basis_with_capped_side_matroid() {
        // Spanning tree of the triangle with at most one edge of {e1, e2}:
        // optimum 2, integral under deterministic pivoting.
        let lp = MatroidLp {
            basis: Some(triangle()),
            side: vec![Matroid::uniform(gs(&[1, 2]), 1)],
            knapsacks: vec![],
            objective: ones(&gs(&[1, 2, 3])),
        };
        let sol = solve_matroid_lp(&lp, DEFAULT_SEP_CAP).unwrap();
        let (x, obj) = sol.optimal().unwrap();
        assert_eq!(obj, &rat_int(2));
        let support = x.support();
        assert_eq!(support.len(), 2);
        assert!(support.contains(ElementId(3)));
        for e in [1u64, 2, 3] {
            let v = x.get(ElementId(e));
            assert!(v == &rat_int(0) || v == &rat_int(1));
        }
    }

    #[test]
    fn unique_basis() {
        let lp = MatroidLp {
            basis: Some(Matroid::uniform(gs(&[1, 2]), 2)),
            side: vec![],
            knapsacks: vec![],
            objective: ones(&gs(&[1, 2])),
        };
        let sol = solve_matroid_lp(&lp, DEFAULT_SEP_CAP).unwrap();
        let (x, obj) = sol.optimal().unwrap();
        assert_eq!(obj, &rat_int(2));
        assert_eq!(x.get(ElementId(1)), &rat_int(1));
        assert_eq!(x.get(ElementId(2)), &rat_int(1));
    }

    #[test]
    fn contradictory_constraints_are_infeasible() {
        // Basis forces x(a) = 1, side matroid of rank 0 forces x(a) = 0.
        let lp = MatroidLp {
            basis: Some(Matroid::uniform(gs(&[1]), 1)),
            side: vec![Matroid::uniform(gs(&[1]), 0)],
            knapsacks: vec![],
            objective: ones(&gs(&[1])),
        };
        let sol = solve_matroid_lp(&lp, DEFAULT_SEP_CAP).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn optimum_satisfies_all_rank_constraints() {
        let lp = MatroidLp {
            basis: Some(triangle()),
            side: vec![
                Matroid::uniform(gs(&[1, 2]), 1),
                Matroid::partition(vec![(gs(&[2, 3]), 1)]).unwrap(),
            ],
            knapsacks: vec![],
            objective: ones(&gs(&[1, 2, 3])),
        };
        let sol = solve_matroid_lp(&lp, DEFAULT_SEP_CAP).unwrap();
        if sol.status == LpStatus::Optimal {
            let (x, _) = sol.optimal().unwrap();
            assert!(check_rank_feasible(&lp, x, DEFAULT_SEP_CAP).unwrap());
        }
    }
}
