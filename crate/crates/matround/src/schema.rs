//! JSON instance and report formats. All rationals travel as "p/q" strings;
//! there are no floats anywhere in the IO surface.

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use matround_core::ground::{ElementId, GroundSet};
use matround_core::matroid::Matroid;
use matround_core::rat::{format_rat, parse_rat, Rat, RatVec};
use matround_core::refine::{
    KnapsackConstraint, RoundingInstance, SideConstraint, SolutionCertificate, Trace,
    TraceEvent,
};

pub fn ids_to_ground(ids: &[u64]) -> GroundSet {
    ids.iter().copied().collect()
}

pub fn ground_to_ids(g: &GroundSet) -> Vec<u64> {
    g.iter().map(|e| e.0).collect()
}

pub fn prat(s: &str) -> Result<Rat> {
    parse_rat(s).map_err(|e| anyhow!("bad rational {s:?}: {e}"))
}

pub fn rat_map_to_vec(ground: &GroundSet, map: &BTreeMap<u64, String>) -> Result<RatVec> {
    let mut entries = Vec::new();
    for (id, s) in map {
        entries.push((ElementId(*id), prat(s)?));
    }
    if map.len() != ground.len() || !map.keys().all(|id| ground.contains(ElementId(*id))) {
        bail!("rational map keys must match the ground set exactly");
    }
    RatVec::from_entries(ground.clone(), entries).map_err(|e| anyhow!("{e}"))
}

pub fn rat_vec_to_map(v: &RatVec) -> BTreeMap<u64, String> {
    v.iter().map(|(e, r)| (e.0, format_rat(r))).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PartitionBlockSpec {
    pub elements: Vec<u64>,
    pub cap: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub id: u64,
    pub u: u64,
    pub v: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum MatroidSpec {
    Uniform { ground: Vec<u64>, rank: usize },
    Partition { blocks: Vec<PartitionBlockSpec> },
    Graphic { edges: Vec<EdgeSpec> },
    // Keys are element ids; kept as strings because internally tagged enums
    // buffer their content, which defeats serde_json's numeric-key parsing.
    Linear { columns: BTreeMap<String, Vec<String>> },
    Explicit { ground: Vec<u64>, independent: Vec<Vec<u64>> },
}

impl MatroidSpec {
    pub fn build(&self) -> Result<Matroid> {
        match self {
            MatroidSpec::Uniform { ground, rank } => {
                Ok(Matroid::uniform(ids_to_ground(ground), *rank))
            }
            MatroidSpec::Partition { blocks } => {
                let blocks = blocks
                    .iter()
                    .map(|b| (ids_to_ground(&b.elements), b.cap))
                    .collect();
                Matroid::partition(blocks).map_err(|e| anyhow!("{e}"))
            }
            MatroidSpec::Graphic { edges } => {
                let mut map = std::collections::BTreeMap::new();
                for e in edges {
                    if map.insert(ElementId(e.id), (e.u, e.v)).is_some() {
                        bail!("duplicate edge id {}", e.id);
                    }
                }
                Ok(Matroid::graphic(map.into_iter().collect()))
            }
            MatroidSpec::Linear { columns } => {
                let mut cols = std::collections::BTreeMap::new();
                for (id, col) in columns {
                    let id: u64 =
                        id.parse().map_err(|_| anyhow!("bad element id {id:?}"))?;
                    let parsed: Result<Vec<Rat>> = col.iter().map(|s| prat(s)).collect();
                    cols.insert(ElementId(id), parsed?);
                }
                Matroid::linear(cols).map_err(|e| anyhow!("{e}"))
            }
            MatroidSpec::Explicit { ground, independent } => {
                let family: Vec<GroundSet> =
                    independent.iter().map(|s| ids_to_ground(s)).collect();
                Matroid::explicit(ids_to_ground(ground), family).map_err(|e| anyhow!("{e}"))
            }
        }
    }

    pub fn ground(&self) -> GroundSet {
        match self {
            MatroidSpec::Uniform { ground, .. } | MatroidSpec::Explicit { ground, .. } => {
                ids_to_ground(ground)
            }
            MatroidSpec::Partition { blocks } => {
                blocks.iter().flat_map(|b| b.elements.iter().copied()).collect()
            }
            MatroidSpec::Graphic { edges } => edges.iter().map(|e| e.id).collect(),
            MatroidSpec::Linear { columns } => {
                columns.keys().filter_map(|k| k.parse::<u64>().ok()).collect()
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KnapsackSpec {
    pub ground: Vec<u64>,
    pub cost: BTreeMap<u64, String>,
    pub budget: String,
    pub q: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupSpec {
    pub nodes: Vec<u64>,
    pub matroid: MatroidSpec,
}

/// One instance document. Which fields are meaningful depends on `problem`:
/// `round`/`round-knapsack` use matroids[0] as M0 and the rest as side
/// matroids with allowances `q`; `3mat` takes exactly three matroids;
/// `intersect2` exactly two; `gmdst` uses `edges`, `costs`, and `groups`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceFile {
    pub problem: String,
    #[serde(default)]
    pub ground: Vec<u64>,
    #[serde(default)]
    pub weights: BTreeMap<u64, String>,
    #[serde(default)]
    pub matroids: Vec<MatroidSpec>,
    #[serde(default)]
    pub q: Vec<u32>,
    #[serde(default)]
    pub knapsacks: Vec<KnapsackSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<EdgeSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub costs: BTreeMap<u64, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub groups: Vec<GroupSpec>,
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).context("malformed instance file")
    }

    pub fn ground_set(&self) -> GroundSet {
        ids_to_ground(&self.ground)
    }

    pub fn weight_vec(&self) -> Result<RatVec> {
        rat_map_to_vec(&self.ground_set(), &self.weights)
    }

    /// Builds the rounding instance for `round` / `round-knapsack`.
    pub fn rounding_instance(&self) -> Result<RoundingInstance> {
        if self.matroids.is_empty() {
            bail!("at least the basis matroid is required");
        }
        if self.q.len() != self.matroids.len() - 1 {
            bail!("one q per side matroid is required");
        }
        let m0 = self.matroids[0].build()?;
        let side = self.matroids[1..]
            .iter()
            .zip(&self.q)
            .map(|(spec, &q)| Ok(SideConstraint { matroid: spec.build()?, q }))
            .collect::<Result<Vec<_>>>()?;
        let knapsacks = self
            .knapsacks
            .iter()
            .map(|k| {
                let ground = ids_to_ground(&k.ground);
                Ok(KnapsackConstraint {
                    cost: rat_map_to_vec(&ground, &k.cost)?,
                    budget: prat(&k.budget)?,
                    ground,
                    q: k.q,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        RoundingInstance::new(m0, side, knapsacks, self.weight_vec()?)
            .map_err(|e| anyhow!("{e}"))
    }

    pub fn matroid_list(&self, expected: usize) -> Result<Vec<Matroid>> {
        if self.matroids.len() != expected {
            bail!("problem {:?} requires exactly {} matroids", self.problem, expected);
        }
        self.matroids.iter().map(|m| m.build()).collect()
    }

    pub fn gmdst_parts(
        &self,
    ) -> Result<(
        std::collections::BTreeMap<ElementId, (u64, u64)>,
        RatVec,
        Vec<matround_core::apps::GmdstGroup>,
    )> {
        let mut edges = std::collections::BTreeMap::new();
        for e in &self.edges {
            if edges.insert(ElementId(e.id), (e.u, e.v)).is_some() {
                bail!("duplicate edge id {}", e.id);
            }
        }
        let ground: GroundSet = edges.keys().copied().collect();
        let costs = rat_map_to_vec(&ground, &self.costs)?;
        let groups = self
            .groups
            .iter()
            .map(|g| {
                Ok(matround_core::apps::GmdstGroup {
                    nodes: g.nodes.iter().copied().collect(),
                    matroid: g.matroid.build()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((edges, costs, groups))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KnapsackUsageSpec {
    pub used: String,
    pub allowance: String,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct TraceSummary {
    pub iterations: usize,
    pub refinements: usize,
    pub dropped_matroids: usize,
    pub dropped_knapsacks: usize,
    /// The proven bound (2k+1)|N| + t for this instance.
    pub iteration_bound: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceEventSpec {
    pub event: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub element: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matroid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub knapsack: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportFile {
    pub problem: String,
    pub status: String,
    #[serde(default)]
    pub solution: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lp_optimum: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis_rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub partitions: Vec<Vec<Vec<u64>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub knapsack_usage: Vec<KnapsackUsageSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_summary: Option<TraceSummary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceEventSpec>,
}

impl ReportFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).context("malformed report file")
    }

    pub fn certificate(&self) -> Result<SolutionCertificate> {
        use matround_core::partition::PartitionCertificate;
        use matround_core::refine::KnapsackUsage;
        let need = |s: &Option<String>, what: &str| -> Result<Rat> {
            let s = s.as_ref().ok_or_else(|| anyhow!("report lacks {what}"))?;
            prat(s)
        };
        Ok(SolutionCertificate {
            solution: ids_to_ground(&self.solution),
            objective: need(&self.objective, "objective")?,
            lp_optimum: need(&self.lp_optimum, "lp_optimum")?,
            basis_rank: self.basis_rank.ok_or_else(|| anyhow!("report lacks basis_rank"))?,
            partitions: self
                .partitions
                .iter()
                .map(|parts| PartitionCertificate {
                    parts: parts.iter().map(|p| ids_to_ground(p)).collect(),
                })
                .collect(),
            knapsack_usage: self
                .knapsack_usage
                .iter()
                .map(|u| {
                    Ok(KnapsackUsage { used: prat(&u.used)?, allowance: prat(&u.allowance)? })
                })
                .collect::<Result<Vec<_>>>()?,
        })
    }
}

pub fn trace_summary(trace: &Trace, instance: &RoundingInstance) -> TraceSummary {
    TraceSummary {
        iterations: trace.iterations(),
        refinements: trace.refinements(),
        dropped_matroids: trace.dropped_matroids(),
        dropped_knapsacks: trace.dropped_knapsacks(),
        iteration_bound: (2 * instance.side.len() + 1) * instance.ground().len()
            + instance.knapsacks.len(),
    }
}

pub fn trace_events(trace: &Trace) -> Vec<TraceEventSpec> {
    trace
        .events
        .iter()
        .map(|e| {
            let blank = TraceEventSpec {
                event: String::new(),
                element: None,
                matroid: None,
                knapsack: None,
                set: None,
                value: None,
            };
            match e {
                TraceEvent::LpSolved { objective } => TraceEventSpec {
                    event: "lp_solved".into(),
                    value: Some(format_rat(objective)),
                    ..blank
                },
                TraceEvent::Deleted { element } => TraceEventSpec {
                    event: "deleted".into(),
                    element: Some(element.0),
                    ..blank
                },
                TraceEvent::Contracted { element } => TraceEventSpec {
                    event: "contracted".into(),
                    element: Some(element.0),
                    ..blank
                },
                TraceEvent::Refined { matroid, set } => TraceEventSpec {
                    event: "refined".into(),
                    matroid: Some(*matroid),
                    set: Some(ground_to_ids(set)),
                    ..blank
                },
                TraceEvent::DroppedMatroid { matroid, slack } => TraceEventSpec {
                    event: "dropped_matroid".into(),
                    matroid: Some(*matroid),
                    value: Some(format_rat(slack)),
                    ..blank
                },
                TraceEvent::DroppedKnapsack { knapsack, slack } => TraceEventSpec {
                    event: "dropped_knapsack".into(),
                    knapsack: Some(*knapsack),
                    value: Some(format_rat(slack)),
                    ..blank
                },
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matroid_specs_round_trip_through_json() {
        let text = r#"{"type":"uniform","ground":[1,2,3],"rank":2}"#;
        let spec: MatroidSpec = serde_json::from_str(text).unwrap();
        let m = spec.build().unwrap();
        assert_eq!(m.rank(m.ground()).unwrap(), 2);

        let text = r#"{"type":"partition","blocks":[{"elements":[1,2],"cap":1}]}"#;
        let spec: MatroidSpec = serde_json::from_str(text).unwrap();
        let m = spec.build().unwrap();
        assert_eq!(m.rank(m.ground()).unwrap(), 1);

        let text = r#"{"type":"graphic","edges":[{"id":1,"u":1,"v":2},{"id":2,"u":2,"v":3}]}"#;
        let spec: MatroidSpec = serde_json::from_str(text).unwrap();
        let m = spec.build().unwrap();
        assert_eq!(m.rank(m.ground()).unwrap(), 2);

        let text = r#"{"type":"linear","columns":{"1":["1","0"],"2":["0","1"],"3":["1","1"]}}"#;
        let spec: MatroidSpec = serde_json::from_str(text).unwrap();
        let m = spec.build().unwrap();
        assert_eq!(m.rank(m.ground()).unwrap(), 2);

        let text = r#"{"type":"explicit","ground":[1,2],"independent":[[],[1],[2]]}"#;
        let spec: MatroidSpec = serde_json::from_str(text).unwrap();
        let m = spec.build().unwrap();
        assert_eq!(m.rank(m.ground()).unwrap(), 1);
    }

    #[test]
    fn instance_with_fractional_weights() {
        let text = r#"{
            "problem": "round",
            "ground": [1, 2],
            "weights": {"1": "3/2", "2": "-1"},
            "matroids": [{"type": "uniform", "ground": [1, 2], "rank": 1}],
            "q": []
        }"#;
        let file = InstanceFile::parse(text).unwrap();
        let inst = file.rounding_instance().unwrap();
        assert_eq!(inst.w.get(ElementId(1)), &parse_rat("3/2").unwrap());
    }

    #[test]
    fn malformed_documents_are_rejected() {
        assert!(InstanceFile::parse("{").is_err());
        let text = r#"{
            "problem": "round",
            "ground": [1],
            "weights": {"1": "0.5"},
            "matroids": [{"type": "uniform", "ground": [1], "rank": 1}],
            "q": []
        }"#;
        let file = InstanceFile::parse(text).unwrap();
        assert!(file.rounding_instance().is_err());
    }
}
