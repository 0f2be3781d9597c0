//! Problem dispatch: run a pipeline on an instance file, produce a report,
//! and independently verify a report against its instance. Reports are only
//! ever written after verification has passed.

use anyhow::{anyhow, bail, Result};

use matround_core::apps::{gmdst, three_matroid_2approx};
use matround_core::error::Error as CoreError;
use matround_core::partition::weighted_intersection;
use matround_core::rat::format_rat;
use matround_core::refine::{round, verify_certificate, RoundingInstance};

use crate::schema::{
    ground_to_ids, trace_events, trace_summary, InstanceFile, ReportFile,
};

/// Whether a core error is the infeasibility outcome (CLI exit code 2)
/// rather than a hard failure.
pub fn is_infeasible(err: &anyhow::Error) -> bool {
    matches!(err.downcast_ref::<CoreError>(), Some(CoreError::Infeasible))
}

fn core(e: CoreError) -> anyhow::Error {
    anyhow::Error::new(e)
}

/// The report written (alongside exit code 2) when an instance has no
/// feasible set.
pub fn infeasible_report(problem: &str) -> ReportFile {
    blank_report(problem, "infeasible")
}

fn blank_report(problem: &str, status: &str) -> ReportFile {
    ReportFile {
        problem: problem.to_string(),
        status: status.to_string(),
        solution: Vec::new(),
        objective: None,
        lp_optimum: None,
        basis_rank: None,
        partitions: Vec::new(),
        knapsack_usage: Vec::new(),
        cost: None,
        trace_summary: None,
        trace: Vec::new(),
    }
}

/// Runs the pipeline selected by the instance's `problem` field. Infeasible
/// rounding problems yield a report with status "infeasible" wrapped in the
/// `Infeasible` core error so the CLI can pick exit code 2.
pub fn solve_instance(
    file: &InstanceFile,
    sep_cap: usize,
    include_trace: bool,
) -> Result<ReportFile> {
    let report = match file.problem.as_str() {
        "round" | "round-knapsack" => {
            let instance = file.rounding_instance()?;
            let (cert, trace) = match round(&instance, sep_cap) {
                Ok(out) => out,
                Err(CoreError::Infeasible) => {
                    return Err(core(CoreError::Infeasible));
                }
                Err(e) => return Err(core(e)),
            };
            let mut report = blank_report(&file.problem, "optimal");
            report.solution = ground_to_ids(&cert.solution);
            report.objective = Some(format_rat(&cert.objective));
            report.lp_optimum = Some(format_rat(&cert.lp_optimum));
            report.basis_rank = Some(cert.basis_rank);
            report.partitions = cert
                .partitions
                .iter()
                .map(|p| p.parts.iter().map(ground_to_ids).collect())
                .collect();
            report.knapsack_usage = cert
                .knapsack_usage
                .iter()
                .map(|u| crate::schema::KnapsackUsageSpec {
                    used: format_rat(&u.used),
                    allowance: format_rat(&u.allowance),
                })
                .collect();
            report.trace_summary = Some(trace_summary(&trace, &instance));
            if include_trace {
                report.trace = trace_events(&trace);
            }
            report
        }
        "3mat" => {
            let ms = file.matroid_list(3)?;
            let w = file.weight_vec()?;
            let (r, lp) =
                three_matroid_2approx(&ms[0], &ms[1], &ms[2], &w, sep_cap).map_err(core)?;
            let mut report = blank_report(&file.problem, "optimal");
            report.objective = Some(format_rat(&w.sum_over(&r)));
            report.solution = ground_to_ids(&r);
            report.lp_optimum = Some(format_rat(&lp));
            report
        }
        "intersect2" => {
            let ms = file.matroid_list(2)?;
            let w = file.weight_vec()?;
            let r = weighted_intersection(&ms[0], &ms[1], &w, sep_cap).map_err(core)?;
            let mut report = blank_report(&file.problem, "optimal");
            report.objective = Some(format_rat(&w.sum_over(&r)));
            report.solution = ground_to_ids(&r);
            report
        }
        "gmdst" => {
            let (edges, costs, groups) = file.gmdst_parts()?;
            let (cert, trace) = match gmdst(&edges, &costs, &groups, sep_cap) {
                Ok(out) => out,
                Err(CoreError::Infeasible) => return Err(core(CoreError::Infeasible)),
                Err(e) => return Err(core(e)),
            };
            let instance = gmdst_instance(file)?;
            let mut report = blank_report(&file.problem, "optimal");
            report.solution = ground_to_ids(&cert.solution);
            report.objective = Some(format_rat(&cert.objective));
            report.cost = Some(format_rat(&costs.sum_over(&cert.solution)));
            report.lp_optimum = Some(format_rat(&cert.lp_optimum));
            report.basis_rank = Some(cert.basis_rank);
            report.partitions = cert
                .partitions
                .iter()
                .map(|p| p.parts.iter().map(ground_to_ids).collect())
                .collect();
            report.trace_summary = Some(trace_summary(&trace, &instance));
            if include_trace {
                report.trace = trace_events(&trace);
            }
            report
        }
        other => bail!("unknown problem {other:?}"),
    };
    let failures = verify_report(file, &report)?;
    if !failures.is_empty() {
        bail!("internal error: produced report failed verification: {failures:?}");
    }
    Ok(report)
}

/// The rounding instance a gmdst file induces: graphic M0, boundary side
/// matroids with q = 2, weights = negated costs.
pub fn gmdst_instance(file: &InstanceFile) -> Result<RoundingInstance> {
    use matround_core::rat::RatVec;
    use matround_core::refine::SideConstraint;
    let (edges, costs, groups) = file.gmdst_parts()?;
    let m0 = matround_core::matroid::Matroid::graphic(edges);
    let w = RatVec::from_entries(
        costs.ground().clone(),
        costs.iter().map(|(e, c)| (e, -c.clone())),
    )
    .map_err(core)?;
    RoundingInstance::new(
        m0,
        groups
            .into_iter()
            .map(|g| SideConstraint { matroid: g.matroid, q: 2 })
            .collect(),
        Vec::new(),
        w,
    )
    .map_err(core)
}

/// Re-checks a report against its instance with oracles only; empty result
/// means every check passed.
pub fn verify_report(file: &InstanceFile, report: &ReportFile) -> Result<Vec<String>> {
    if report.problem != file.problem {
        return Ok(vec!["report and instance disagree on the problem".into()]);
    }
    if report.status == "infeasible" {
        // Nothing to certify; the claim is checked by the selftest against
        // brute force, not here.
        return Ok(Vec::new());
    }
    match file.problem.as_str() {
        "round" | "round-knapsack" => {
            let instance = file.rounding_instance()?;
            let cert = report.certificate()?;
            verify_certificate(&instance, &cert).map_err(core)
        }
        "gmdst" => {
            let instance = gmdst_instance(file)?;
            let cert = report.certificate()?;
            let mut failures = verify_certificate(&instance, &cert).map_err(core)?;
            if let Some(cost) = &report.cost {
                let recomputed = file
                    .gmdst_parts()?
                    .1
                    .sum_over(&cert.solution);
                if crate::schema::prat(cost)? != recomputed {
                    failures.push("recorded tree cost does not match the solution".into());
                }
            }
            Ok(failures)
        }
        "3mat" => {
            let ms = file.matroid_list(3)?;
            let w = file.weight_vec()?;
            let r = crate::schema::ids_to_ground(&report.solution);
            let mut failures = Vec::new();
            for (i, m) in ms.iter().enumerate() {
                if !m.is_independent(&r).map_err(core)? {
                    failures.push(format!("solution is not independent in matroid {i}"));
                }
            }
            let value = w.sum_over(&r);
            let objective = report
                .objective
                .as_deref()
                .ok_or_else(|| anyhow!("report lacks objective"))?;
            if crate::schema::prat(objective)? != value {
                failures.push("recorded objective does not match the solution".into());
            }
            let lp = report
                .lp_optimum
                .as_deref()
                .ok_or_else(|| anyhow!("report lacks lp_optimum"))?;
            let lp = crate::schema::prat(lp)?;
            if matround_core::rat::rat_int(2) * value < lp {
                failures.push("solution violates the factor-2 LP guarantee".into());
            }
            Ok(failures)
        }
        "intersect2" => {
            let ms = file.matroid_list(2)?;
            let w = file.weight_vec()?;
            let r = crate::schema::ids_to_ground(&report.solution);
            let mut failures = Vec::new();
            for (i, m) in ms.iter().enumerate() {
                if !m.is_independent(&r).map_err(core)? {
                    failures.push(format!("solution is not independent in matroid {i}"));
                }
            }
            let objective = report
                .objective
                .as_deref()
                .ok_or_else(|| anyhow!("report lacks objective"))?;
            if crate::schema::prat(objective)? != w.sum_over(&r) {
                failures.push("recorded objective does not match the solution".into());
            }
            Ok(failures)
        }
        other => bail!("unknown problem {other:?}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use matround_core::separation::DEFAULT_SEP_CAP;

    fn triangle_gmdst() -> InstanceFile {
        InstanceFile::parse(
            r#"{
                "problem": "gmdst",
                "edges": [
                    {"id": 1, "u": 1, "v": 2},
                    {"id": 2, "u": 2, "v": 3},
                    {"id": 3, "u": 1, "v": 3}
                ],
                "costs": {"1": "1", "2": "2", "3": "3"}
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn gmdst_solve_and_verify_round_trip() {
        let file = triangle_gmdst();
        let report = solve_instance(&file, DEFAULT_SEP_CAP, true).unwrap();
        assert_eq!(report.status, "optimal");
        assert_eq!(report.solution, vec![1, 2]);
        assert_eq!(report.cost.as_deref(), Some("3"));
        assert!(verify_report(&file, &report).unwrap().is_empty());
    }

    #[test]
    fn tampered_report_fails_verification() {
        let file = triangle_gmdst();
        let mut report = solve_instance(&file, DEFAULT_SEP_CAP, false).unwrap();
        report.solution = vec![1, 3];
        assert!(!verify_report(&file, &report).unwrap().is_empty());
    }

    #[test]
    fn infeasible_round_is_signalled() {
        let file = InstanceFile::parse(
            r#"{
                "problem": "round",
                "ground": [1],
                "weights": {"1": "1"},
                "matroids": [
                    {"type": "uniform", "ground": [1], "rank": 1},
                    {"type": "uniform", "ground": [1], "rank": 0}
                ],
                "q": [1]
            }"#,
        )
        .unwrap();
        let err = solve_instance(&file, DEFAULT_SEP_CAP, false).unwrap_err();
        assert!(is_infeasible(&err));
    }
}
