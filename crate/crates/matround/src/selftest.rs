//! Randomized self-verification. Each suite generates seeded instances, runs
//! a pipeline, and checks its guarantee exactly against certificates and
//! brute-force oracles. The integration tests run the same suites, so CI and
//! `matround selftest` produce the same evidence.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Mutex;
use std::thread;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use matround_core::apps::{greedy_baseline, round_independent, three_matroid_2approx};
use matround_core::error::Error as CoreError;
use matround_core::ground::{ElementId, GroundSet};
use matround_core::matroid::Matroid;
use matround_core::partition::{is_q_independent, partition, weighted_intersection};
use matround_core::rat::{format_rat, rat, rat_int, Rat, RatVec};
use matround_core::refine::{round, verify_certificate, verify_independent_certificate};

use crate::brute;
use crate::gen;
use crate::report::gmdst_instance;

/// One guarantee ratio aggregated over a suite (min and max across trials).
#[derive(Clone, Debug)]
pub struct SlackRow {
    pub label: String,
    pub min: String,
    pub max: String,
}

#[derive(Clone, Debug)]
pub struct SuiteResult {
    pub name: String,
    pub trials: usize,
    pub failures: usize,
    /// Lowest failing seed and its message, for reproduction.
    pub first_failure: Option<(u64, String)>,
    pub slacks: Vec<SlackRow>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Clone, Debug)]
pub struct SelftestSummary {
    pub suites: Vec<SuiteResult>,
}

impl SelftestSummary {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }

    /// Human-readable table: one line per suite plus its guarantee slacks.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for s in &self.suites {
            let verdict = if s.passed() { "pass" } else { "FAIL" };
            let _ = writeln!(out, "{verdict}  {:<28} trials {:>5}  failures {}", s.name, s.trials, s.failures);
            for row in &s.slacks {
                let _ = writeln!(out, "      {:<32} min {:>10}  max {:>10}", row.label, row.min, row.max);
            }
            if let Some((seed, msg)) = &s.first_failure {
                let _ = writeln!(out, "      first failing seed {seed}: {msg}");
            }
        }
        let verdict = if self.passed() { "SELFTEST PASSED" } else { "SELFTEST FAILED" };
        let _ = writeln!(out, "{verdict}");
        out
    }
}

/// Per-trial outcome: named guarantee ratios on success, a message on failure.
type Trial = Result<Vec<(String, Rat)>, String>;

fn run_suite<F>(name: &str, count: usize, base_seed: u64, f: F) -> SuiteResult
where
    F: Fn(u64) -> Trial + Sync,
{
    let outcomes: Mutex<Vec<(u64, Trial)>> = Mutex::new(Vec::with_capacity(count));
    let workers = thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(8)
        .min(count.max(1));
    thread::scope(|scope| {
        for wid in 0..workers {
            let f = &f;
            let outcomes = &outcomes;
            scope.spawn(move || {
                let mut local = Vec::new();
                let mut i = wid;
                while i < count {
                    let seed = base_seed.wrapping_add(i as u64);
                    local.push((seed, f(seed)));
                    i += workers;
                }
                outcomes.lock().unwrap().extend(local);
            });
        }
    });
    let mut outcomes = outcomes.into_inner().unwrap();
    outcomes.sort_by_key(|(seed, _)| *seed);

    let mut failures = 0;
    let mut first_failure = None;
    let mut slacks: BTreeMap<String, (Rat, Rat)> = BTreeMap::new();
    for (seed, outcome) in outcomes {
        match outcome {
            Ok(entries) => {
                for (label, value) in entries {
                    slacks
                        .entry(label)
                        .and_modify(|(lo, hi)| {
                            if value < *lo {
                                *lo = value.clone();
                            }
                            if value > *hi {
                                *hi = value.clone();
                            }
                        })
                        .or_insert_with(|| (value.clone(), value));
                }
            }
            Err(msg) => {
                failures += 1;
                if first_failure.is_none() {
                    first_failure = Some((seed, msg));
                }
            }
        }
    }
    SuiteResult {
        name: name.to_string(),
        trials: count,
        failures,
        first_failure,
        slacks: slacks
            .into_iter()
            .map(|(label, (lo, hi))| SlackRow {
                label,
                min: format_rat(&lo),
                max: format_rat(&hi),
            })
            .collect(),
    }
}

fn bad<T>(msg: impl Into<String>) -> Result<T, String> {
    Err(msg.into())
}

fn core_err(e: CoreError) -> String {
    format!("{e}")
}

fn any_err(e: anyhow::Error) -> String {
    format!("{e}")
}

/// Shared body for the basis-rounding suites: solve, certify, and record
/// slack ratios; infeasible outcomes must be confirmed by brute force.
fn rounding_trial(problem: &str, seed: u64, size: usize, sep_cap: usize) -> Trial {
    let file = gen::gen_instance(problem, seed, size).map_err(any_err)?;
    let instance = file.rounding_instance().map_err(any_err)?;
    let (cert, trace) = match round(&instance, sep_cap) {
        Ok(out) => out,
        Err(CoreError::Infeasible) => {
            if brute::best_exact_solution(&instance).map_err(any_err)?.is_some() {
                return bad("reported infeasible but an exact solution exists");
            }
            return Ok(Vec::new());
        }
        Err(e) => return Err(core_err(e)),
    };
    let failures = verify_certificate(&instance, &cert).map_err(core_err)?;
    if !failures.is_empty() {
        return bad(format!("certificate rejected: {failures:?}"));
    }
    let mut slacks = Vec::new();
    if cert.lp_optimum > rat_int(0) {
        slacks.push(("w(R)/lp_opt".to_string(), &cert.objective / &cert.lp_optimum));
    }
    let bound = (2 * instance.side.len() + 1) * instance.ground().len()
        + instance.knapsacks.len();
    if trace.iterations() > bound {
        return bad(format!("{} iterations exceed the bound {bound}", trace.iterations()));
    }
    slacks.push((
        "iterations/bound".to_string(),
        rat(trace.iterations() as i64, bound.max(1) as i64),
    ));
    for usage in &cert.knapsack_usage {
        if usage.allowance > rat_int(0) {
            slacks.push(("knapsack used/allowance".to_string(), &usage.used / &usage.allowance));
        }
    }
    Ok(slacks)
}

/// Basis rounding with side matroids only: solution is a basis, beats the LP
/// optimum, and carries verified q_i-partitions.
pub fn suite_rounding(count: usize, size: usize, base_seed: u64, sep_cap: usize) -> SuiteResult {
    run_suite("rounding (matroid sides)", count, base_seed, |seed| {
        rounding_trial("round", seed, size, sep_cap)
    })
}

/// Iteration counts stay within (2k+1)|N| + t on both rounding problems.
pub fn suite_iteration_bounds(
    count: usize,
    size: usize,
    base_seed: u64,
    sep_cap: usize,
) -> SuiteResult {
    run_suite("iteration bounds", count, base_seed, |seed| {
        let problem = if seed % 2 == 0 { "round" } else { "round-knapsack" };
        rounding_trial(problem, seed, size, sep_cap)
    })
}

/// Mixed matroid + knapsack rounding: the full guarantee including the
/// cost-overrun cap c(R ∩ N_i) ≤ U_i + q_i·max cost ≤ (q_i+1)·U_i.
pub fn suite_knapsack(count: usize, size: usize, base_seed: u64, sep_cap: usize) -> SuiteResult {
    run_suite("rounding (with knapsacks)", count, base_seed, |seed| {
        rounding_trial("round-knapsack", seed, size, sep_cap)
    })
}

/// 3-matroid intersection: result is common independent, 2·w(R) bounds the
/// LP optimum, and the LP optimum is within factor 2 of the brute-force
/// integer optimum.
pub fn suite_three_matroid(
    count: usize,
    size: usize,
    base_seed: u64,
    sep_cap: usize,
) -> SuiteResult {
    run_suite("3-matroid 2-approximation", count, base_seed, |seed| {
        let file = gen::gen_instance("3mat", seed, size).map_err(any_err)?;
        let ms = file.matroid_list(3).map_err(any_err)?;
        let w = file.weight_vec().map_err(any_err)?;
        let (r, lp) = three_matroid_2approx(&ms[0], &ms[1], &ms[2], &w, sep_cap)
            .map_err(core_err)?;
        for (i, m) in ms.iter().enumerate() {
            if !m.is_independent(&r).map_err(core_err)? {
                return bad(format!("result dependent in matroid {i}"));
            }
        }
        let value = w.sum_over(&r);
        if rat_int(2) * &value < lp {
            return bad("2·w(R) < LP optimum");
        }
        let (_, opt) = brute::best_common_independent(&ms, &w).map_err(any_err)?;
        if value > opt {
            return bad("result beats the brute-force optimum");
        }
        if rat_int(2) * &opt < lp {
            return bad("integrality gap above 2");
        }
        let mut slacks = Vec::new();
        if lp > rat_int(0) {
            slacks.push(("2·w(R)/lp_opt".to_string(), rat_int(2) * &value / &lp));
        }
        if opt > rat_int(0) {
            slacks.push(("w(R)/opt_int".to_string(), &value / &opt));
        }
        Ok(slacks)
    })
}

/// Exhaustive membership test in the independent-set polytope of `m`.
fn in_polytope(m: &Matroid, x: &RatVec) -> Result<bool, String> {
    let elems = x.ground().to_vec();
    assert!(elems.len() <= brute::BRUTE_CAP, "polytope check ground too large");
    for e in &elems {
        if *x.get(*e) < rat_int(0) {
            return Ok(false);
        }
    }
    for mask in 1usize..1 << elems.len() {
        let t: GroundSet = elems
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, e)| *e)
            .collect();
        if x.sum_over(&t) > rat_int(m.rank(&t).map_err(core_err)? as i64) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Greedy maximal independent set scanning `order` front to back.
fn greedy_independent(m: &Matroid, order: &[ElementId]) -> Result<GroundSet, String> {
    let mut ind = GroundSet::new();
    for &e in order {
        ind.insert(e);
        if !m.is_independent(&ind).map_err(core_err)? {
            ind.remove(e);
        }
    }
    Ok(ind)
}

fn add_scaled(x: &mut RatVec, s: &GroundSet, coeff: &Rat) {
    for e in s.iter() {
        let val = x.get(e) + coeff;
        x.set(e, val).expect("element within ground");
    }
}

/// Split/glue feasibility of refinement: restricting a feasible point with a
/// tight set S stays feasible in M|_S and M/S, and gluing a tight point of
/// M|_S with any feasible point of M/S stays feasible in M. Checked by full
/// subset enumeration.
pub fn suite_refinement(count: usize, size: usize, base_seed: u64, _sep_cap: usize) -> SuiteResult {
    run_suite("refinement split/glue", count, base_seed, |seed| {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..=size.clamp(2, 12));
        let ids: Vec<u64> = (1..=n as u64).collect();
        let m = gen::matroid_spec(&mut rng, &ids).build().map_err(any_err)?;
        let ground = m.ground().clone();

        let mut shuffled = ids.clone();
        shuffled.shuffle(&mut rng);
        let s: GroundSet = shuffled[..rng.gen_range(1..n)]
            .iter()
            .copied()
            .collect();
        let rest = ground.difference(&s);
        let rank_s = m.rank(&s).map_err(core_err)?;

        // A feasible point with S tight: average of maximal independent sets
        // whose greedy order starts inside S, so each traces a basis of S.
        let copies = rng.gen_range(1..=3u32);
        let coeff = rat(1, copies as i64);
        let mut x = RatVec::zero(ground.clone());
        for _ in 0..copies {
            let mut order: Vec<ElementId> = s.to_vec();
            order.shuffle(&mut rng);
            let mut tail: Vec<ElementId> = rest.to_vec();
            tail.shuffle(&mut rng);
            order.extend(tail);
            let ind = greedy_independent(&m, &order)?;
            if ind.intersection(&s).len() != rank_s {
                return bad("greedy order starting in S missed a basis of S");
            }
            add_scaled(&mut x, &ind, &coeff);
        }
        if x.sum_over(&s) != rat_int(rank_s as i64) {
            return bad("constructed point is not tight on S");
        }

        let m_restrict = m.restrict(&s).map_err(core_err)?;
        let m_contract = m.contract(&s).map_err(core_err)?;
        if !in_polytope(&m_restrict, &x.restrict(&s).map_err(core_err)?)? {
            return bad("split point infeasible in the restriction");
        }
        if !rest.is_empty()
            && !in_polytope(&m_contract, &x.restrict(&rest).map_err(core_err)?)?
        {
            return bad("split point infeasible in the contraction");
        }

        // Glue: a fresh tight point of M|_S plus a fresh feasible point of
        // M/S must combine into a feasible point of M.
        let mut y = RatVec::zero(ground.clone());
        for _ in 0..2 {
            let mut order: Vec<ElementId> = s.to_vec();
            order.shuffle(&mut rng);
            let basis = greedy_independent(&m_restrict, &order)?;
            add_scaled(&mut y, &basis, &rat(1, 2));
        }
        if !rest.is_empty() {
            for _ in 0..2 {
                let pool = gen::subset(&mut rng, &rest.iter().map(|e| e.0).collect::<Vec<_>>(), 0);
                let mut order: Vec<ElementId> = pool.into_iter().map(ElementId).collect();
                order.shuffle(&mut rng);
                let ind = greedy_independent(&m_contract, &order)?;
                add_scaled(&mut y, &ind, &rat(1, 2));
            }
        }
        if y.sum_over(&s) != rat_int(rank_s as i64) {
            return bad("glue candidate is not tight on S");
        }
        if !in_polytope(&m, &y)? {
            return bad("glued point infeasible in the original matroid");
        }
        Ok(Vec::new())
    })
}

/// 2-matroid intersection LPs have integral vertices and match brute force.
pub fn suite_intersection(count: usize, size: usize, base_seed: u64, sep_cap: usize) -> SuiteResult {
    run_suite("2-matroid integrality", count, base_seed, |seed| {
        let file = gen::gen_instance("intersect2", seed, size).map_err(any_err)?;
        let ms = file.matroid_list(2).map_err(any_err)?;
        let w = file.weight_vec().map_err(any_err)?;
        let r = weighted_intersection(&ms[0], &ms[1], &w, sep_cap).map_err(core_err)?;
        for (i, m) in ms.iter().enumerate() {
            if !m.is_independent(&r).map_err(core_err)? {
                return bad(format!("result dependent in matroid {i}"));
            }
        }
        let (_, opt) = brute::best_common_independent(&ms, &w).map_err(any_err)?;
        if w.sum_over(&r) != opt {
            return bad("intersection value differs from brute-force optimum");
        }
        Ok(Vec::new())
    })
}

/// partition succeeds exactly when is_q_independent holds, and its
/// certificate validates.
pub fn suite_partition(count: usize, size: usize, base_seed: u64, _sep_cap: usize) -> SuiteResult {
    run_suite("partition min-max", count, base_seed, |seed| {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=size.clamp(1, 12));
        let ids: Vec<u64> = (1..=n as u64).collect();
        let m = gen::matroid_spec(&mut rng, &ids).build().map_err(any_err)?;
        let s: GroundSet = gen::subset(&mut rng, &ids, 0).into_iter().collect();
        let q = rng.gen_range(1..=3u32);
        let attained = partition(&m, &s, q).map_err(core_err)?;
        let predicted = is_q_independent(&m, &s, q).map_err(core_err)?;
        match attained {
            Some(cert) => {
                if !predicted {
                    return bad("partition succeeded on a set that is not q-independent");
                }
                if !cert.validate(&m, &s).map_err(core_err)? {
                    return bad("partition certificate does not validate");
                }
            }
            None => {
                if predicted {
                    return bad("partition failed on a q-independent set");
                }
            }
        }
        Ok(Vec::new())
    })
}

/// GMDST: spanning tree, cost at most the LP optimum, 2-independent per
/// group; infeasible reports are confirmed against exhaustive search.
pub fn suite_gmdst(count: usize, size: usize, base_seed: u64, sep_cap: usize) -> SuiteResult {
    run_suite("degree-style spanning trees", count, base_seed, |seed| {
        let file = gen::gen_instance("gmdst", seed, size).map_err(any_err)?;
        let (edges, costs, groups) = file.gmdst_parts().map_err(any_err)?;
        match matround_core::apps::gmdst(&edges, &costs, &groups, sep_cap) {
            Ok((cert, _trace)) => {
                let instance = gmdst_instance(&file).map_err(any_err)?;
                let failures = verify_certificate(&instance, &cert).map_err(core_err)?;
                if !failures.is_empty() {
                    return bad(format!("certificate rejected: {failures:?}"));
                }
                let cost = costs.sum_over(&cert.solution);
                let lp_cost = -&cert.lp_optimum;
                if cost > lp_cost {
                    return bad("tree cost exceeds the LP optimum");
                }
                let mut slacks = Vec::new();
                if lp_cost > rat_int(0) {
                    slacks.push(("c(T)/lp_cost".to_string(), &cost / &lp_cost));
                }
                Ok(slacks)
            }
            Err(CoreError::Infeasible) => {
                let m0 = Matroid::graphic(edges);
                if brute::best_exact_tree(&m0, &costs, &groups)
                    .map_err(any_err)?
                    .is_some()
                {
                    return bad("reported infeasible but a strictly feasible tree exists");
                }
                Ok(Vec::new())
            }
            Err(e) => Err(core_err(e)),
        }
    })
}

/// Independent-set variant: outputs are independent in M0 and carry the full
/// rounding guarantee.
pub fn suite_independent(count: usize, size: usize, base_seed: u64, sep_cap: usize) -> SuiteResult {
    run_suite("independent-set rounding", count, base_seed, |seed| {
        let file = gen::gen_instance("round", seed, size).map_err(any_err)?;
        let instance = file.rounding_instance().map_err(any_err)?;
        let (cert, _trace) = match round_independent(&instance, sep_cap) {
            Ok(out) => out,
            Err(CoreError::Infeasible) => {
                if brute::best_exact_independent(&instance).map_err(any_err)?.is_some() {
                    return bad("reported infeasible but an exact solution exists");
                }
                return Ok(Vec::new());
            }
            Err(e) => return Err(core_err(e)),
        };
        let failures = verify_independent_certificate(&instance, &cert).map_err(core_err)?;
        if !failures.is_empty() {
            return bad(format!("certificate rejected: {failures:?}"));
        }
        let mut slacks = Vec::new();
        if cert.lp_optimum > rat_int(0) {
            slacks.push(("w(R)/lp_opt".to_string(), &cert.objective / &cert.lp_optimum));
        }
        Ok(slacks)
    })
}

/// Greedy gives at least OPT/k on k-matroid fixtures, and the LP-relative
/// guarantees line up: 2·w(R) ≥ lp for the rounder, k·w(G) ≥ lp for greedy.
pub fn suite_greedy(count: usize, size: usize, base_seed: u64, sep_cap: usize) -> SuiteResult {
    run_suite("greedy baseline", count, base_seed, |seed| {
        let file = gen::gen_instance("3mat", seed, size).map_err(any_err)?;
        let ms = file.matroid_list(3).map_err(any_err)?;
        let w = file.weight_vec().map_err(any_err)?;
        let mut slacks = Vec::new();
        for k in 1..=3usize {
            let g = greedy_baseline(&ms[..k], &w).map_err(core_err)?;
            let (_, opt) = brute::best_common_independent(&ms[..k], &w).map_err(any_err)?;
            let value = w.sum_over(&g);
            if rat_int(k as i64) * &value < opt {
                return bad(format!("greedy below OPT/{k} on {k} matroids"));
            }
            if opt > rat_int(0) {
                slacks.push((format!("{k}·w(G)/opt_int (k={k})"), rat_int(k as i64) * &value / &opt));
            }
        }
        let (r, lp) = three_matroid_2approx(&ms[0], &ms[1], &ms[2], &w, sep_cap)
            .map_err(core_err)?;
        if rat_int(2) * w.sum_over(&r) < lp {
            return bad("rounder lost its LP-relative factor 2");
        }
        let g = greedy_baseline(&ms, &w).map_err(core_err)?;
        if rat_int(3) * w.sum_over(&g) < lp {
            return bad("greedy lost its LP-relative factor 3");
        }
        Ok(slacks)
    })
}

/// Runs every suite with `count` trials each.
pub fn run_selftest(count: usize, size: usize, seed: u64, sep_cap: usize) -> SelftestSummary {
    let suites = vec![
        suite_rounding(count, size, seed, sep_cap),
        suite_iteration_bounds(count, size, seed, sep_cap),
        suite_three_matroid(count, size, seed, sep_cap),
        suite_knapsack(count, size, seed, sep_cap),
        suite_refinement(count, size, seed, sep_cap),
        suite_intersection(count, size, seed, sep_cap),
        suite_partition(count, size, seed, sep_cap),
        suite_gmdst(count, size, seed, sep_cap),
        suite_independent(count, size, seed, sep_cap),
        suite_greedy(count, size, seed, sep_cap),
    ];
    SelftestSummary { suites }
}

#[cfg(test)]
mod tests {
    use super::*;
    use matround_core::separation::DEFAULT_SEP_CAP;

    #[test]
    fn small_selftest_passes() {
        let summary = run_selftest(6, 6, 1000, DEFAULT_SEP_CAP);
        assert!(summary.passed(), "{}", summary.render());
    }

    #[test]
    fn suite_results_are_deterministic() {
        let a = suite_partition(10, 6, 42, DEFAULT_SEP_CAP);
        let b = suite_partition(10, 6, 42, DEFAULT_SEP_CAP);
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }
}
