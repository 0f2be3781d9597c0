//! The iterative refinement/relaxation rounding loop: solve the LP at a
//! vertex, delete zeros and contract ones, refine side matroids along tight
//! proper sets, and relax by dropping one near-tight matroid (or knapsack)
//! per round. Produces an independently checkable certificate and a full
//! event trace whose length is asserted against the proven iteration bound.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::ground::{ElementId, GroundSet};
use crate::matroid::Matroid;
use crate::matroid_lp::{KnapsackRow, LpStatus, MatroidLp, solve_matroid_lp};
use crate::partition::{partition, PartitionCertificate};
use crate::rat::{Rat, RatVec};
use crate::separation::find_tight_proper_set;

fn rat_usize(n: usize) -> Rat {
    Rat::from_integer((n as u64).into())
}

/// A side matroid with its violation allowance q >= 1.
#[derive(Clone, Debug)]
pub struct SideConstraint {
    pub matroid: Matroid,
    pub q: u32,
}

/// A knapsack `cost(R ∩ ground) <= budget` with its allowance q >= 1.
#[derive(Clone, Debug)]
pub struct KnapsackConstraint {
    pub ground: GroundSet,
    pub cost: RatVec,
    pub budget: Rat,
    pub q: u32,
}

/// Rounding input: basis matroid M0 on N, side matroids on subsets of N,
/// knapsacks, and a weight vector (negative entries allowed).
#[derive(Clone, Debug)]
pub struct RoundingInstance {
    pub m0: Matroid,
    pub side: Vec<SideConstraint>,
    pub knapsacks: Vec<KnapsackConstraint>,
    pub w: RatVec,
}

/// One element's violated load bound: the sum of 1/q over the constraints
/// whose ground contains it exceeds 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoadViolation {
    pub element: ElementId,
    pub load: Rat,
}

/// All q equal to the maximum number of listed grounds any element lies in
/// (at least 1), which always satisfies the load property.
pub fn default_q(grounds: &[GroundSet]) -> Vec<u32> {
    let mut delta = 1u32;
    let all: GroundSet = grounds.iter().flat_map(|g| g.iter()).collect();
    for e in all.iter() {
        let count = grounds.iter().filter(|g| g.contains(e)).count() as u32;
        delta = delta.max(count);
    }
    vec![delta; grounds.len()]
}

impl RoundingInstance {
    pub fn new(
        m0: Matroid,
        side: Vec<SideConstraint>,
        knapsacks: Vec<KnapsackConstraint>,
        w: RatVec,
    ) -> Result<Self> {
        if w.ground() != m0.ground() {
            return Err(Error::Invalid("weights must be indexed by the ground of M0".into()));
        }
        for s in &side {
            s.matroid.ground().check_within(m0.ground())?;
            if s.q == 0 {
                return Err(Error::Invalid("side matroid q must be at least 1".into()));
            }
        }
        for k in &knapsacks {
            k.ground.check_within(m0.ground())?;
            if k.q == 0 {
                return Err(Error::Invalid("knapsack q must be at least 1".into()));
            }
            if k.cost.ground() != &k.ground {
                return Err(Error::Invalid("knapsack cost vector ground mismatch".into()));
            }
            if k.cost.iter().any(|(_, c)| c.is_negative()) {
                return Err(Error::Invalid("knapsack costs must be nonnegative".into()));
            }
            if k.budget.is_negative() {
                return Err(Error::Invalid("knapsack budget must be nonnegative".into()));
            }
            if k.cost.iter().any(|(_, c)| c > &k.budget) {
                return Err(Error::Invalid(
                    "each knapsack cost entry must be at most the budget".into(),
                ));
            }
        }
        let instance = RoundingInstance { m0, side, knapsacks, w };
        match instance.load_violations().into_iter().next() {
            None => Ok(instance),
            Some(v) => Err(Error::Invalid(format!(
                "load property violated at element {}: sum of 1/q is {}",
                v.element.0, v.load,
            ))),
        }
    }

    pub fn ground(&self) -> &GroundSet {
        self.m0.ground()
    }

    /// Exact load check: for every element, the 1/q contributions of the
    /// side-matroid and knapsack grounds containing it must sum to <= 1.
    pub fn load_violations(&self) -> Vec<LoadViolation> {
        let mut out = Vec::new();
        for e in self.ground().iter() {
            let mut load = Rat::zero();
            for s in &self.side {
                if s.matroid.ground().contains(e) {
                    load += Rat::new(1.into(), (s.q as u64).into());
                }
            }
            for k in &self.knapsacks {
                if k.ground.contains(e) {
                    load += Rat::new(1.into(), (k.q as u64).into());
                }
            }
            if load > Rat::from_integer(1.into()) {
                out.push(LoadViolation { element: e, load });
            }
        }
        out
    }
}

/// One event of a rounding run. Matroid indices refer to the instance's
/// original side list; refinement children keep their ancestor's index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceEvent {
    LpSolved { objective: Rat },
    Deleted { element: ElementId },
    Contracted { element: ElementId },
    Refined { matroid: usize, set: GroundSet },
    DroppedMatroid { matroid: usize, slack: Rat },
    DroppedKnapsack { knapsack: usize, slack: Rat },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
}

impl Trace {
    pub fn iterations(&self) -> usize {
        self.count(|e| matches!(e, TraceEvent::LpSolved { .. }))
    }

    pub fn refinements(&self) -> usize {
        self.count(|e| matches!(e, TraceEvent::Refined { .. }))
    }

    pub fn dropped_matroids(&self) -> usize {
        self.count(|e| matches!(e, TraceEvent::DroppedMatroid { .. }))
    }

    pub fn dropped_knapsacks(&self) -> usize {
        self.count(|e| matches!(e, TraceEvent::DroppedKnapsack { .. }))
    }

    fn count(&self, pred: impl Fn(&TraceEvent) -> bool) -> usize {
        self.events.iter().filter(|e| pred(e)).count()
    }
}

/// Recorded knapsack outcome: spend of the solution against the proven
/// allowance `budget + q * max cost`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnapsackUsage {
    pub used: Rat,
    pub allowance: Rat,
}

/// Output of a rounding run, re-checkable with matroid oracles alone via
/// [`verify_certificate`].
#[derive(Clone, Debug)]
pub struct SolutionCertificate {
    pub solution: GroundSet,
    /// w(solution).
    pub objective: Rat,
    /// Optimum of the first LP solve; the guarantee is objective >= this.
    pub lp_optimum: Rat,
    /// rank(M0, N0): the solution must be a basis, i.e. have this size.
    pub basis_rank: usize,
    /// Per original side matroid: solution ∩ ground split into <= q
    /// independent sets.
    pub partitions: Vec<PartitionCertificate>,
    /// Per original knapsack, in order.
    pub knapsack_usage: Vec<KnapsackUsage>,
}

struct SideState {
    matroid: Matroid,
    q: u32,
    origin: usize,
}

struct KnapState {
    ground: GroundSet,
    cost: RatVec,
    budget: Rat,
    q: u32,
    origin: usize,
}

/// Runs the rounding loop. `Err(Infeasible)` when the initial LP is
/// infeasible; any other failure mode indicates a broken invariant.
pub fn round(
    instance: &RoundingInstance,
    sep_cap: usize,
) -> Result<(SolutionCertificate, Trace)> {
    let mut trace = Trace::default();
    let n0 = instance.ground().clone();
    let k = instance.side.len();
    let t = instance.knapsacks.len();
    let iteration_bound = (2 * k + 1) * n0.len() + t;

    if n0.is_empty() {
        let cert = certify(instance, GroundSet::new(), Rat::zero())?;
        return Ok((cert, trace));
    }

    let mut m0 = instance.m0.clone();
    let mut sides: Vec<SideState> = instance
        .side
        .iter()
        .enumerate()
        .map(|(i, s)| SideState { matroid: s.matroid.clone(), q: s.q, origin: i })
        .collect();
    let mut knaps: Vec<KnapState> = instance
        .knapsacks
        .iter()
        .enumerate()
        .map(|(i, s)| KnapState {
            ground: s.ground.clone(),
            cost: s.cost.clone(),
            budget: s.budget.clone(),
            q: s.q,
            origin: i,
        })
        .collect();
    let mut contracted = GroundSet::new();
    let mut lp_optimum: Option<Rat> = None;
    let mut prev_opt: Option<Rat> = None;
    let mut prev_ones_weight = Rat::zero();

    loop {
        if trace.iterations() >= iteration_bound {
            return Err(Error::Internal("iteration bound exceeded"));
        }
        let ground = m0.ground().clone();
        let lp = MatroidLp {
            basis: Some(m0.clone()),
            side: sides.iter().map(|s| s.matroid.clone()).collect(),
            knapsacks: knaps
                .iter()
                .map(|kn| {
                    KnapsackRow::new(kn.ground.clone(), kn.cost.clone(), kn.budget.clone())
                })
                .collect::<Result<_>>()?,
            objective: instance.w.restrict(&ground)?,
        };
        let sol = solve_matroid_lp(&lp, sep_cap)?;
        if sol.status != LpStatus::Optimal {
            return if lp_optimum.is_none() {
                Err(Error::Infeasible)
            } else {
                // The previous point restricted to the new instance stays
                // feasible, so later solves cannot fail.
                Err(Error::Internal("relaxed instance became infeasible"))
            };
        }
        let (x, opt) = sol.optimal()?;
        let (x, opt) = (x.clone(), opt.clone());
        trace.events.push(TraceEvent::LpSolved { objective: opt.clone() });
        if let Some(prev) = &prev_opt {
            if opt < prev - &prev_ones_weight {
                return Err(Error::Internal("LP optimum dropped below carried value"));
            }
        }
        lp_optimum.get_or_insert_with(|| opt.clone());

        let mut zeros = GroundSet::new();
        let mut ones = GroundSet::new();
        for (e, v) in x.iter() {
            if v.is_zero() {
                zeros.insert(e);
            } else if v == &Rat::from_integer(1.into()) {
                ones.insert(e);
            }
        }
        for e in zeros.iter() {
            trace.events.push(TraceEvent::Deleted { element: e });
        }
        for e in ones.iter() {
            trace.events.push(TraceEvent::Contracted { element: e });
        }
        contracted = contracted.union(&ones);
        prev_opt = Some(opt);
        prev_ones_weight = instance.w.sum_over(&ones);

        let new_ground = ground.difference(&zeros).difference(&ones);
        if new_ground.is_empty() {
            let cert = certify(instance, contracted, lp_optimum.expect("solved at least once"))?;
            return Ok((cert, trace));
        }
        m0 = m0.delete(&zeros)?.contract(&ones)?;

        let mut kept: Vec<SideState> = Vec::with_capacity(sides.len());
        for s in sides {
            let g = s.matroid.ground();
            let del = g.intersection(&zeros);
            let con = g.intersection(&ones);
            if g.difference(&del).difference(&con).is_empty() {
                // Vacuous constraint; silently removed.
                continue;
            }
            let shrunk = s.matroid.delete(&del)?;
            for e in con.iter() {
                if shrunk.rank(&[e].into_iter().collect::<GroundSet>())? != 1 {
                    return Err(Error::Internal("contracting a loop in a side matroid"));
                }
            }
            kept.push(SideState { matroid: shrunk.contract(&con)?, q: s.q, origin: s.origin });
        }
        sides = kept;

        let mut kept: Vec<KnapState> = Vec::with_capacity(knaps.len());
        for mut kn in knaps {
            let spent = ones
                .intersection(&kn.ground)
                .iter()
                .map(|e| kn.cost.get(e).clone())
                .fold(Rat::zero(), |a, b| a + b);
            kn.budget -= spent;
            if kn.budget.is_negative() {
                return Err(Error::Internal("knapsack budget overdrawn by contraction"));
            }
            kn.ground = kn.ground.difference(&zeros).difference(&ones);
            if kn.ground.is_empty() {
                continue;
            }
            kn.cost = kn.cost.restrict(&kn.ground)?;
            kept.push(kn);
        }
        knaps = kept;

        let x = x.restrict(&new_ground)?;

        // Refinement: split along tight proper sets until none is left.
        // Children take the parent's slot and are re-examined in place.
        let mut i = 0;
        while i < sides.len() {
            let g = sides[i].matroid.ground().clone();
            let x_m = x.restrict(&g)?;
            match find_tight_proper_set(&sides[i].matroid, &x_m, sep_cap)? {
                None => i += 1,
                Some(s) => {
                    let parent = sides.remove(i);
                    trace.events.push(TraceEvent::Refined {
                        matroid: parent.origin,
                        set: s.clone(),
                    });
                    let inside = parent.matroid.restrict(&s)?;
                    let outside = parent.matroid.contract(&s)?;
                    sides.insert(
                        i,
                        SideState { matroid: outside, q: parent.q, origin: parent.origin },
                    );
                    sides.insert(
                        i,
                        SideState { matroid: inside, q: parent.q, origin: parent.origin },
                    );
                }
            }
        }

        // Relaxation: drop the first matroid that is tight and within its
        // allowance; fall back to a knapsack only when no matroid qualifies.
        let mut matroid_drop = None;
        for (idx, s) in sides.iter().enumerate() {
            let g = s.matroid.ground();
            let mass = x.sum_over(g);
            let slack = rat_usize(g.len()) - &mass;
            if mass == rat_usize(s.matroid.rank(g)?) && slack < rat_usize(s.q as usize) {
                matroid_drop = Some((idx, s.origin, slack));
                break;
            }
        }
        if let Some((idx, origin, slack)) = matroid_drop {
            trace.events.push(TraceEvent::DroppedMatroid { matroid: origin, slack });
            sides.remove(idx);
            continue;
        }
        let mut knap_drop = None;
        for (idx, kn) in knaps.iter().enumerate() {
            let slack = rat_usize(kn.ground.len()) - x.sum_over(&kn.ground);
            if slack <= rat_usize(kn.q as usize) {
                knap_drop = Some((idx, kn.origin, slack));
                break;
            }
        }
        match knap_drop {
            Some((idx, origin, slack)) => {
                trace.events.push(TraceEvent::DroppedKnapsack { knapsack: origin, slack });
                knaps.remove(idx);
            }
            None => return Err(Error::NoDroppableConstraint),
        }
    }
}

/// Builds the certificate for a finished run: partitions are computed on the
/// original matroids, not reconstructed from bookkeeping.
fn certify(
    instance: &RoundingInstance,
    solution: GroundSet,
    lp_optimum: Rat,
) -> Result<SolutionCertificate> {
    let objective = instance.w.sum_over(&solution);
    let basis_rank = instance.m0.rank(instance.ground())?;
    let mut partitions = Vec::with_capacity(instance.side.len());
    for s in &instance.side {
        let target = solution.intersection(s.matroid.ground());
        match partition(&s.matroid, &target, s.q)? {
            Some(cert) => partitions.push(cert),
            None => return Err(Error::Internal("solution is not q-independent")),
        }
    }
    let knapsack_usage = instance
        .knapsacks
        .iter()
        .map(|kn| {
            let used = solution
                .intersection(&kn.ground)
                .iter()
                .map(|e| kn.cost.get(e).clone())
                .fold(Rat::zero(), |a, b| a + b);
            let max_cost =
                kn.cost.iter().map(|(_, c)| c.clone()).max().unwrap_or_else(Rat::zero);
            let allowance = &kn.budget + rat_usize(kn.q as usize) * max_cost;
            KnapsackUsage { used, allowance }
        })
        .collect();
    Ok(SolutionCertificate {
        solution,
        objective,
        lp_optimum,
        basis_rank,
        partitions,
        knapsack_usage,
    })
}

/// Independently re-checks a certificate against the instance using oracles
/// only. Returns the list of failed checks; empty means the certificate is
/// sound.
pub fn verify_certificate(
    instance: &RoundingInstance,
    cert: &SolutionCertificate,
) -> Result<Vec<String>> {
    verify_impl(instance, cert, true)
}

/// Like [`verify_certificate`], but the solution only has to be independent
/// in M0 rather than a basis (the independent-set problem variant).
pub fn verify_independent_certificate(
    instance: &RoundingInstance,
    cert: &SolutionCertificate,
) -> Result<Vec<String>> {
    verify_impl(instance, cert, false)
}

fn verify_impl(
    instance: &RoundingInstance,
    cert: &SolutionCertificate,
    require_basis: bool,
) -> Result<Vec<String>> {
    let mut failures = Vec::new();
    let r = &cert.solution;
    if !r.is_subset(instance.ground()) {
        failures.push("solution contains elements outside the ground set".into());
        return Ok(failures);
    }
    let full_rank = instance.m0.rank(instance.ground())?;
    if cert.basis_rank != full_rank {
        failures.push(format!(
            "recorded basis rank {} differs from rank {} of the ground set",
            cert.basis_rank, full_rank,
        ));
    }
    if require_basis {
        if !instance.m0.is_independent(r)? || r.len() != full_rank {
            failures.push("solution is not a basis of M0".into());
        }
    } else if !instance.m0.is_independent(r)? {
        failures.push("solution is not independent in M0".into());
    }
    let objective = instance.w.sum_over(r);
    if objective != cert.objective {
        failures.push(format!(
            "recorded objective {} differs from recomputed {}",
            cert.objective, objective,
        ));
    }
    if objective < cert.lp_optimum {
        failures.push(format!(
            "objective {} is below the LP optimum {}",
            objective, cert.lp_optimum,
        ));
    }
    if cert.partitions.len() != instance.side.len() {
        failures.push("one partition certificate per side matroid is required".into());
    }
    for (i, (s, part)) in instance.side.iter().zip(&cert.partitions).enumerate() {
        let target = r.intersection(s.matroid.ground());
        if part.parts.len() > s.q as usize {
            failures.push(format!("partition {} has more than q = {} parts", i, s.q));
        }
        if !part.validate(&s.matroid, &target)? {
            failures.push(format!("partition {} does not cover with independent parts", i));
        }
    }
    if cert.knapsack_usage.len() != instance.knapsacks.len() {
        failures.push("one usage record per knapsack is required".into());
    }
    for (i, (kn, usage)) in instance.knapsacks.iter().zip(&cert.knapsack_usage).enumerate() {
        let used = r
            .intersection(&kn.ground)
            .iter()
            .map(|e| kn.cost.get(e).clone())
            .fold(Rat::zero(), |a, b| a + b);
        if used != usage.used {
            failures.push(format!("knapsack {} usage record does not match the solution", i));
        }
        let max_cost = kn.cost.iter().map(|(_, c)| c.clone()).max().unwrap_or_else(Rat::zero);
        let allowance = &kn.budget + rat_usize(kn.q as usize) * max_cost;
        if usage.allowance != allowance {
            failures.push(format!("knapsack {} allowance record is wrong", i));
        }
        if used > allowance {
            failures.push(format!("knapsack {} exceeds its allowance", i));
        }
        if allowance > rat_usize(kn.q as usize + 1) * &kn.budget {
            failures.push(format!(
                "knapsack {} allowance exceeds the (q+1) * budget bound",
                i
            ));
        }
    }
    Ok(failures)
}
