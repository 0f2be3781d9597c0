//! Exact-rational primal simplex with Bland's anti-cycling rule.
//!
//! Two-phase dense tableau over `BigRational`. Structural variables are
//! implicitly nonnegative; all other bounds arrive as explicit rows. The
//! pivot rules are purely index-based, so results are deterministic given
//! the input order.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::ground::{ElementId, GroundSet};
use crate::rat::{Rat, RatVec};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

/// One linear row over variables indexed by element labels.
#[derive(Clone, Debug)]
pub struct LinearConstraint {
    pub coeffs: BTreeMap<ElementId, Rat>,
    pub sense: Sense,
    pub rhs: Rat,
}

impl LinearConstraint {
    pub fn new(coeffs: BTreeMap<ElementId, Rat>, sense: Sense, rhs: Rat) -> Self {
        LinearConstraint { coeffs, sense, rhs }
    }

    /// Signed slack `rhs - a·x`; zero means the row is tight at `x`.
    pub fn slack_at(&self, x: &RatVec) -> Rat {
        let mut lhs = Rat::zero();
        for (e, c) in &self.coeffs {
            lhs += c * x.get(*e);
        }
        &self.rhs - lhs
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SimplexStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct SimplexSolution {
    pub status: SimplexStatus,
    /// Present iff `status == Optimal`; a basic (vertex) solution.
    pub x: Option<RatVec>,
    pub objective: Option<Rat>,
}

struct Tableau {
    /// rows[i] has `cols` coefficient entries plus the rhs at index `cols`.
    rows: Vec<Vec<Rat>>,
    cols: usize,
    basis: Vec<usize>,
    banned: Vec<bool>,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Rat {
        &self.rows[i][self.cols]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let pivot_val = self.rows[row][col].clone();
        for entry in self.rows[row].iter_mut() {
            *entry /= &pivot_val;
        }
        for i in 0..self.rows.len() {
            if i == row || self.rows[i][col].is_zero() {
                continue;
            }
            let factor = self.rows[i][col].clone();
            for j in 0..=self.cols {
                let delta = &factor * &self.rows[row][j];
                self.rows[i][j] -= delta;
            }
        }
        self.basis[row] = col;
    }

    /// Maximizes `cost` over the current basis with Bland's rule.
    /// Returns false on unboundedness.
    fn optimize(&mut self, cost: &[Rat]) -> bool {
        loop {
            let mut entering = None;
            for j in 0..self.cols {
                if self.banned[j] || self.basis.contains(&j) {
                    continue;
                }
                let mut reduced = cost[j].clone();
                for (i, &b) in self.basis.iter().enumerate() {
                    if !cost[b].is_zero() {
                        reduced -= &cost[b] * &self.rows[i][j];
                    }
                }
                if reduced.is_positive() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(col) = entering else { return true };

            let mut leaving: Option<(usize, Rat)> = None;
            for i in 0..self.rows.len() {
                if !self.rows[i][col].is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / &self.rows[i][col];
                let better = match &leaving {
                    None => true,
                    Some((best_row, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*best_row])
                    }
                };
                if better {
                    leaving = Some((i, ratio));
                }
            }
            let Some((row, _)) = leaving else { return false };
            self.pivot(row, col);
        }
    }
}

/// Solves `max objective·x` subject to `constraints` and `x >= 0`.
pub fn simplex_solve(
    constraints: &[LinearConstraint],
    objective: &RatVec,
) -> Result<SimplexSolution> {
    let vars: Vec<ElementId> = objective.ground().to_vec();
    let var_index: BTreeMap<ElementId, usize> =
        vars.iter().enumerate().map(|(i, e)| (*e, i)).collect();
    let n = vars.len();

    // Normalize each row to a nonnegative rhs, flipping the sense as needed.
    let mut normalized: Vec<(Vec<Rat>, Rat, Sense)> = Vec::with_capacity(constraints.len());
    for c in constraints {
        let mut coeffs = vec![Rat::zero(); n];
        for (e, coeff) in &c.coeffs {
            let &idx = var_index.get(e).ok_or(Error::ElementOutOfGround)?;
            coeffs[idx] = &coeffs[idx] + coeff;
        }
        let mut rhs = c.rhs.clone();
        let mut sense = c.sense;
        if rhs.is_negative() {
            for entry in coeffs.iter_mut() {
                *entry = -entry.clone();
            }
            rhs = -rhs;
            sense = match sense {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
        normalized.push((coeffs, rhs, sense));
    }

    // Count auxiliary columns.
    let mut n_slack = 0usize;
    let mut n_art = 0usize;
    for (_, _, sense) in &normalized {
        match sense {
            Sense::Le => n_slack += 1,
            Sense::Ge => {
                n_slack += 1;
                n_art += 1;
            }
            Sense::Eq => n_art += 1,
        }
    }
    let cols = n + n_slack + n_art;
    let mut rows: Vec<Vec<Rat>> = Vec::with_capacity(normalized.len());
    let mut basis: Vec<usize> = Vec::with_capacity(normalized.len());
    let mut artificial = vec![false; cols];
    let mut next_slack = n;
    let mut next_art = n + n_slack;

    for (coeffs, rhs, sense) in normalized {
        let mut row = vec![Rat::zero(); cols + 1];
        row[..n].clone_from_slice(&coeffs);
        row[cols] = rhs;
        match sense {
            Sense::Le => {
                row[next_slack] = Rat::from_integer(1.into());
                basis.push(next_slack);
                next_slack += 1;
            }
            Sense::Ge => {
                row[next_slack] = Rat::from_integer((-1).into());
                next_slack += 1;
                row[next_art] = Rat::from_integer(1.into());
                artificial[next_art] = true;
                basis.push(next_art);
                next_art += 1;
            }
            Sense::Eq => {
                row[next_art] = Rat::from_integer(1.into());
                artificial[next_art] = true;
                basis.push(next_art);
                next_art += 1;
            }
        }
        rows.push(row);
    }

    let mut tab = Tableau { rows, cols, basis, banned: vec![false; cols] };

    // Phase 1: drive the artificials to zero.
    if n_art > 0 {
        let phase1: Vec<Rat> = (0..cols)
            .map(|j| if artificial[j] { Rat::from_integer((-1).into()) } else { Rat::zero() })
            .collect();
        if !tab.optimize(&phase1) {
            return Err(Error::Internal("phase-1 objective unbounded"));
        }
        let infeas: Rat = tab
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| artificial[b])
            .map(|(i, _)| tab.rhs(i).clone())
            .fold(Rat::zero(), |a, b| a + b);
        if !infeas.is_zero() {
            return Ok(SimplexSolution { status: SimplexStatus::Infeasible, x: None, objective: None });
        }
        // Pivot remaining (degenerate) artificials out of the basis, or drop
        // their rows when redundant.
        let mut i = 0;
        while i < tab.basis.len() {
            if artificial[tab.basis[i]] {
                let col = (0..tab.cols).find(|&j| !artificial[j] && !tab.rows[i][j].is_zero());
                match col {
                    Some(col) => tab.pivot(i, col),
                    None => {
                        tab.rows.remove(i);
                        tab.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
        for j in 0..cols {
            if artificial[j] {
                tab.banned[j] = true;
            }
        }
    }

    // Phase 2.
    let mut cost = vec![Rat::zero(); cols];
    for (e, &idx) in &var_index {
        cost[idx] = objective.get(*e).clone();
    }
    if !tab.optimize(&cost) {
        return Ok(SimplexSolution { status: SimplexStatus::Unbounded, x: None, objective: None });
    }

    let mut x = RatVec::zero(objective.ground().clone());
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x.set(vars[b], tab.rhs(i).clone())?;
        }
    }
    let value = objective.dot(&x);
    Ok(SimplexSolution { status: SimplexStatus::Optimal, x: Some(x), objective: Some(value) })
}

/// Rank over Q of a set of coefficient rows indexed by the given variables.
pub fn row_rank(rows: &[BTreeMap<ElementId, Rat>], vars: &GroundSet) -> usize {
    let order: Vec<ElementId> = vars.to_vec();
    let mut mat: Vec<Vec<Rat>> = rows
        .iter()
        .map(|r| order.iter().map(|e| r.get(e).cloned().unwrap_or_else(Rat::zero)).collect())
        .collect();
    let n = order.len();
    let mut rank = 0usize;
    for col in 0..n {
        let Some(pivot) = (rank..mat.len()).find(|&i| !mat[i][col].is_zero()) else {
            continue;
        };
        mat.swap(rank, pivot);
        let pivot_val = mat[rank][col].clone();
        for i in 0..mat.len() {
            if i != rank && !mat[i][col].is_zero() {
                let factor = &mat[i][col] / &pivot_val;
                for j in col..n {
                    let delta = &factor * &mat[rank][j];
                    mat[i][j] -= delta;
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
    use crate::rat::{rat, rat_int};

    fn vars(ids: &[u64]) -> GroundSet {
        ids.iter().copied().collect()
    }

    fn row(entries: &[(u64, i64)], sense: Sense, rhs: Rat) -> LinearConstraint {
        LinearConstraint::new(
            entries.iter().map(|&(e, c)| (ElementId(e), rat_int(c))).collect(),
            sense,
            rhs,
        )
    }

    #[test]
    fn single_variable_box() {
        let obj = RatVec::from_entries(vars(&[1]), [(ElementId(1), rat_int(1))]).unwrap();
        let cons = [row(&[(1, 1)], Sense::Le, rat_int(1))];
        let sol = simplex_solve(&cons, &obj).unwrap();
        assert_eq!(sol.status, SimplexStatus::Optimal);
        assert_eq!(sol.objective.unwrap(), rat_int(1));
        assert_eq!(sol.x.unwrap().get(ElementId(1)), &rat_int(1));
    }

    #[test]
    fn fractional_vertex() {
        // max x1+x2 s.t. x1+x2 <= 3/2, 0 <= xi <= 1: optimum 3/2 at a vertex
        // with one coordinate 1 and one 1/2.
        let g = vars(&[1, 2]);
        let obj = RatVec::from_entries(
            g,
            [(ElementId(1), rat_int(1)), (ElementId(2), rat_int(1))],
        )
        .unwrap();
        let cons = [
            row(&[(1, 1), (2, 1)], Sense::Le, rat(3, 2)),
            row(&[(1, 1)], Sense::Le, rat_int(1)),
            row(&[(2, 1)], Sense::Le, rat_int(1)),
        ];
        let sol = simplex_solve(&cons, &obj).unwrap();
        assert_eq!(sol.status, SimplexStatus::Optimal);
        assert_eq!(sol.objective.unwrap(), rat(3, 2));
        let x = sol.x.unwrap();
        let a = x.get(ElementId(1)).clone();
        let b = x.get(ElementId(2)).clone();
        assert!(
            (a == rat_int(1) && b == rat(1, 2)) || (a == rat(1, 2) && b == rat_int(1)),
            "not a vertex of the polygon: ({a}, {b})"
        );
    }

    #[test]
    fn infeasible_system() {
        let obj = RatVec::from_entries(vars(&[1]), [(ElementId(1), rat_int(1))]).unwrap();
        let cons = [row(&[(1, 1)], Sense::Le, rat_int(-1))];
        let sol = simplex_solve(&cons, &obj).unwrap();
        assert_eq!(sol.status, SimplexStatus::Infeasible);
    }

    #[test]
    fn unbounded_problem() {
        let obj = RatVec::from_entries(vars(&[1]), [(ElementId(1), rat_int(1))]).unwrap();
        let cons = [row(&[(1, -1)], Sense::Le, rat_int(0))];
        let sol = simplex_solve(&cons, &obj).unwrap();
        assert_eq!(sol.status, SimplexStatus::Unbounded);
    }

    #[test]
    fn equality_row() {
        let g = vars(&[1, 2]);
        let obj = RatVec::from_entries(
            g,
            [(ElementId(1), rat_int(2)), (ElementId(2), rat_int(1))],
        )
        .unwrap();
        let cons = [
            row(&[(1, 1), (2, 1)], Sense::Eq, rat_int(1)),
            row(&[(1, 1)], Sense::Le, rat(1, 2)),
        ];
        let sol = simplex_solve(&cons, &obj).unwrap();
        assert_eq!(sol.status, SimplexStatus::Optimal);
        assert_eq!(sol.objective.unwrap(), rat(3, 2));
        let x = sol.x.unwrap();
        assert_eq!(x.get(ElementId(1)), &rat(1, 2));
        assert_eq!(x.get(ElementId(2)), &rat(1, 2));
    }

    #[test]
    fn degenerate_is_handled() {
        // Redundant equalities; phase 1 must drop the duplicate row.
        let g = vars(&[1, 2]);
        let obj = RatVec::from_entries(
            g,
            [(ElementId(1), rat_int(1)), (ElementId(2), rat_int(1))],
        )
        .unwrap();
        let cons = [
            row(&[(1, 1), (2, 1)], Sense::Eq, rat_int(1)),
            row(&[(1, 1), (2, 1)], Sense::Eq, rat_int(1)),
            row(&[(1, 1)], Sense::Le, rat_int(1)),
        ];
        let sol = simplex_solve(&cons, &obj).unwrap();
        assert_eq!(sol.status, SimplexStatus::Optimal);
        assert_eq!(sol.objective.unwrap(), rat_int(1));
    }

    #[test]
    fn tight_row_rank() {
        let g = vars(&[1, 2, 3]);
        let rows = [
            BTreeMap::from([(ElementId(1), rat_int(1)), (ElementId(2), rat_int(1))]),
            BTreeMap::from([(ElementId(2), rat_int(1)), (ElementId(3), rat_int(1))]),
            BTreeMap::from([(ElementId(1), rat_int(1)), (ElementId(3), rat_int(-1))]),
        ];
        // Third row = first minus second: rank 2.
        assert_eq!(row_rank(&rows, &g), 2);
    }
}
