//! Serialization of every pipeline stage: a versioned JSON report, DOT text
//! for the final hierarchy, and per-stage CSV tables.
//!
//! Rounding is presentation-only: rounded values (half away from zero, a
//! configurable number of decimals) sit alongside the raw full-precision
//! values in the JSON report. All file output uses dot decimals.

use serde::{Deserialize, Serialize};

use crate::decision::{EdgeDecision, FinalHierarchy, Verdict};
use crate::error::Result;
use crate::fuzzy::{DeltaMatrix, EdgeAverages, FuzzyScores};
use crate::grades::MissingPolicy;
use crate::hierarchy::Skill;
use crate::pipeline::{PipelineConfig, PipelineOutput};

pub const SCHEMA: &str = "prereq-refiner/1";

/// Half-away-from-zero rounding to `decimals` places.
pub fn round_dp(value: f64, decimals: u32) -> f64 {
    let factor = 10f64.powi(decimals as i32);
    (value * factor).round() / factor
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub alpha_min: f64,
    pub g_max: f64,
    pub missing_policy: MissingPolicy,
    pub decimals: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchySection {
    pub skills: Vec<Skill>,
    pub edges: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaSection {
    pub learners: Vec<String>,
    pub links: Vec<String>,
    pub rounded: Vec<Vec<Option<f64>>>,
    pub raw: Vec<Vec<Option<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzySection {
    pub learners: Vec<String>,
    pub links: Vec<String>,
    pub cpr_rounded: Vec<Vec<Option<f64>>>,
    pub cpr_raw: Vec<Vec<Option<f64>>>,
    pub rpr_rounded: Vec<Vec<Option<f64>>>,
    pub rpr_raw: Vec<Vec<Option<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragesSection {
    pub links: Vec<String>,
    pub avg_cpr: Vec<f64>,
    pub avg_cpr_raw: Vec<f64>,
    pub avg_rpr: Vec<f64>,
    pub avg_rpr_raw: Vec<f64>,
    pub effective_n: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionEntry {
    pub edge: String,
    pub verdict: Verdict,
    pub relevance: Option<f64>,
    pub relevance_raw: Option<f64>,
    pub avg_cpr: f64,
    pub avg_cpr_raw: f64,
    pub avg_rpr: f64,
    pub avg_rpr_raw: f64,
    pub effective_n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalEdgeEntry {
    pub edge: String,
    pub relevance: f64,
    pub relevance_raw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalSection {
    pub skills: Vec<String>,
    pub edges: Vec<FinalEdgeEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarningsSection {
    pub cycles: Vec<Vec<String>>,
    pub duplicate_edges: Vec<String>,
}

/// Self-contained description of one refinement run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub schema: String,
    pub config: ConfigEcho,
    pub hierarchy: HierarchySection,
    pub delta: DeltaSection,
    pub fuzzy: FuzzySection,
    pub averages: AveragesSection,
    pub decisions: Vec<DecisionEntry>,
    pub final_hierarchy: FinalSection,
    pub warnings: WarningsSection,
}

const DELETED_NOTE: &str = "no support in either direction: check the \
assessment items for both skills, or the two skills may be unrelated";

impl PipelineReport {
    pub fn from_pipeline(out: &PipelineOutput, config: &PipelineConfig) -> Self {
        let dp = config.decimals;
        let links: Vec<String> = out.delta.links.iter().map(|e| e.to_string()).collect();
        let learners = out.delta.learners.clone();

        let mut delta_rounded = Vec::with_capacity(learners.len());
        let mut delta_raw = Vec::with_capacity(learners.len());
        let mut cpr_rounded = Vec::with_capacity(learners.len());
        let mut cpr_raw = Vec::with_capacity(learners.len());
        let mut rpr_rounded = Vec::with_capacity(learners.len());
        let mut rpr_raw = Vec::with_capacity(learners.len());
        for l in 0..learners.len() {
            let cols = 0..links.len();
            delta_raw.push(
                cols.clone()
                    .map(|k| out.delta.get(l, k))
                    .collect::<Vec<_>>(),
            );
            delta_rounded.push(
                cols.clone()
                    .map(|k| out.delta.get(l, k).map(|v| round_dp(v, dp)))
                    .collect(),
            );
            cpr_raw.push(
                cols.clone()
                    .map(|k| out.scores.cpr(l, k))
                    .collect::<Vec<_>>(),
            );
            cpr_rounded.push(
                cols.clone()
                    .map(|k| out.scores.cpr(l, k).map(|v| round_dp(v, dp)))
                    .collect(),
            );
            rpr_raw.push(
                cols.clone()
                    .map(|k| out.scores.rpr(l, k))
                    .collect::<Vec<_>>(),
            );
            rpr_rounded.push(
                cols.map(|k| out.scores.rpr(l, k).map(|v| round_dp(v, dp)))
                    .collect(),
            );
        }

        let decisions = out
            .decisions
            .iter()
            .map(|d| DecisionEntry {
                edge: d.original.to_string(),
                verdict: d.verdict,
                relevance: d.relevance.map(|v| round_dp(v, dp)),
                relevance_raw: d.relevance,
                avg_cpr: round_dp(d.avg_cpr, dp),
                avg_cpr_raw: d.avg_cpr,
                avg_rpr: round_dp(d.avg_rpr, dp),
                avg_rpr_raw: d.avg_rpr,
                effective_n: d.effective_n,
                note: (d.verdict == Verdict::Deleted).then(|| DELETED_NOTE.to_string()),
            })
            .collect();

        PipelineReport {
            schema: SCHEMA.to_string(),
            config: ConfigEcho {
                s1: config.thresholds.s1,
                s2: config.thresholds.s2,
                s3: config.thresholds.s3,
                alpha_min: config.alpha_min,
                g_max: config.g_max,
                missing_policy: config.missing_policy,
                decimals: dp,
            },
            hierarchy: HierarchySection {
                skills: out.hierarchy.skills().to_vec(),
                edges: out
                    .hierarchy
                    .edges()
                    .iter()
                    .map(|e| e.to_string())
                    .collect(),
            },
            delta: DeltaSection {
                learners: learners.clone(),
                links: links.clone(),
                rounded: delta_rounded,
                raw: delta_raw,
            },
            fuzzy: FuzzySection {
                learners,
                links: links.clone(),
                cpr_rounded,
                cpr_raw,
                rpr_rounded,
                rpr_raw,
            },
            averages: AveragesSection {
                links,
                avg_cpr: out
                    .averages
                    .avg_cpr
                    .iter()
                    .map(|&v| round_dp(v, dp))
                    .collect(),
                avg_cpr_raw: out.averages.avg_cpr.clone(),
                avg_rpr: out
                    .averages
                    .avg_rpr
                    .iter()
                    .map(|&v| round_dp(v, dp))
                    .collect(),
                avg_rpr_raw: out.averages.avg_rpr.clone(),
                effective_n: out.averages.effective_n.clone(),
            },
            decisions,
            final_hierarchy: FinalSection {
                skills: out
                    .final_hierarchy
                    .skills
                    .iter()
                    .map(|s| s.id.clone())
                    .collect(),
                edges: out
                    .final_hierarchy
                    .edges
                    .iter()
                    .map(|(e, r)| FinalEdgeEntry {
                        edge: e.to_string(),
                        relevance: round_dp(*r, dp),
                        relevance_raw: *r,
                    })
                    .collect(),
            },
            warnings: WarningsSection {
                cycles: out.final_hierarchy.cycle_warnings.clone(),
                duplicate_edges: out
                    .final_hierarchy
                    .duplicate_warnings
                    .iter()
                    .map(|e| e.to_string())
                    .collect(),
            },
        }
    }

    pub fn to_json_string(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

pub fn render_report(out: &PipelineOutput, config: &PipelineConfig) -> Result<String> {
    PipelineReport::from_pipeline(out, config).to_json_string()
}

fn dot_quote(id: &str) -> String {
    format!("\"{}\"", id.replace('\\', "\\\\").replace('"', "\\\""))
}

/// DOT digraph of the final hierarchy. Every skill appears as a node even
/// when all of its links were deleted. With `include_deleted`, deleted
/// original links render dashed and grey.
pub fn render_dot(f: &FinalHierarchy, include_deleted: bool) -> String {
    let mut dot = String::from("digraph final_hierarchy {\n");
    for skill in &f.skills {
        dot.push_str(&format!("    {};\n", dot_quote(&skill.id)));
    }
    for (edge, relevance) in &f.edges {
        dot.push_str(&format!(
            "    {} -> {} [label=\"{:.2}\"];\n",
            dot_quote(&edge.from),
            dot_quote(&edge.to),
            relevance
        ));
    }
    if include_deleted {
        for d in &f.provenance {
            if d.verdict == Verdict::Deleted {
                dot.push_str(&format!(
                    "    {} -> {} [style=dashed, color=grey, label=\"deleted\"];\n",
                    dot_quote(&d.original.from),
                    dot_quote(&d.original.to)
                ));
            }
        }
    }
    dot.push_str("}\n");
    dot
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Shortest decimal form of the rounded value (`-9`, `0.5`).
fn compact(v: f64, decimals: u32) -> String {
    format!("{}", round_dp(v, decimals))
}

/// Fixed-point form of the rounded value (`0.80`, `1.00`).
fn fixed(v: f64, decimals: u32) -> String {
    format!("{:.*}", decimals as usize, round_dp(v, decimals))
}

/// Delta table: one row per learner, one column per link, empty cells for
/// skip-policy gaps.
pub fn render_delta_csv(d: &DeltaMatrix, decimals: u32) -> String {
    let mut out = String::from("learner");
    for link in &d.links {
        out.push(',');
        out.push_str(&csv_field(&link.to_string()));
    }
    out.push('\n');
    for (l, learner) in d.learners.iter().enumerate() {
        out.push_str(&csv_field(learner));
        for k in 0..d.links.len() {
            out.push(',');
            if let Some(v) = d.get(l, k) {
                out.push_str(&compact(v, decimals));
            }
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FuzzyTable {
    Cpr,
    Rpr,
}

/// Membership table for one fuzzy set, with the per-link average as the
/// final `AVG` row.
pub fn render_fuzzy_csv(
    scores: &FuzzyScores,
    averages: &EdgeAverages,
    table: FuzzyTable,
    decimals: u32,
) -> String {
    let mut out = String::from("learner");
    for link in &scores.links {
        out.push(',');
        out.push_str(&csv_field(&link.to_string()));
    }
    out.push('\n');
    for (l, learner) in scores.learners.iter().enumerate() {
        out.push_str(&csv_field(learner));
        for k in 0..scores.links.len() {
            out.push(',');
            let cell = match table {
                FuzzyTable::Cpr => scores.cpr(l, k),
                FuzzyTable::Rpr => scores.rpr(l, k),
            };
            if let Some(v) = cell {
                out.push_str(&fixed(v, decimals));
            }
        }
        out.push('\n');
    }
    out.push_str("AVG");
    for k in 0..scores.links.len() {
        out.push(',');
        let v = match table {
            FuzzyTable::Cpr => averages.avg_cpr[k],
            FuzzyTable::Rpr => averages.avg_rpr[k],
        };
        out.push_str(&fixed(v, decimals));
    }
    out.push('\n');
    out
}

pub fn render_averages_csv(a: &EdgeAverages, decimals: u32) -> String {
    let mut out = String::from("edge,avg_cpr,avg_rpr,effective_n\n");
    for (k, link) in a.links.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            csv_field(&link.to_string()),
            fixed(a.avg_cpr[k], decimals),
            fixed(a.avg_rpr[k], decimals),
            a.effective_n[k]
        ));
    }
    out
}

pub fn render_decisions_csv(decisions: &[EdgeDecision], decimals: u32) -> String {
    let mut out = String::from("edge,verdict,relevance,avg_cpr,avg_rpr,effective_n\n");
    for d in decisions {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            csv_field(&d.original.to_string()),
            d.verdict,
            d.relevance.map(|v| fixed(v, decimals)).unwrap_or_default(),
            fixed(d.avg_cpr, decimals),
            fixed(d.avg_rpr, decimals),
            d.effective_n
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decision::build_final_hierarchy;
    use crate::decision::decide_edges;
    use crate::decision::DecisionConfig;
    use crate::hierarchy::Edge;

    #[test]
    fn rounding_is_half_away_from_zero() {
        assert_eq!(round_dp(0.125, 2), 0.13);
        assert_eq!(round_dp(-0.125, 2), -0.13);
        assert_eq!(round_dp(0.724999, 2), 0.72);
        assert_eq!(round_dp(1.0, 2), 1.0);
    }

    #[test]
    fn dot_quotes_awkward_ids() {
        assert_eq!(dot_quote("Flux I/O"), "\"Flux I/O\"");
        assert_eq!(dot_quote("a\"b"), "\"a\\\"b\"");
    }

    fn tiny_final() -> FinalHierarchy {
        let a = crate::fuzzy::EdgeAverages {
            links: vec![Edge::new("E", "C"), Edge::new("A", "C")],
            avg_cpr: vec![0.06, 0.04],
            avg_rpr: vec![0.72, 0.0],
            effective_n: vec![10, 10],
        };
        let decisions = decide_edges(&a, &DecisionConfig::default());
        build_final_hierarchy(
            decisions,
            vec![
                crate::hierarchy::Skill::new("A"),
                crate::hierarchy::Skill::new("C"),
                crate::hierarchy::Skill::new("E"),
            ],
        )
    }

    #[test]
    fn dot_contains_labeled_edge_and_all_nodes() {
        let f = tiny_final();
        let dot = render_dot(&f, false);
        assert!(dot.contains("\"C\" -> \"E\" [label=\"0.72\"]"));
        for node in ["\"A\";", "\"C\";", "\"E\";"] {
            assert!(dot.contains(node), "missing {node} in {dot}");
        }
        // deleted link only rendered on request
        assert!(!dot.contains("dashed"));
        let with_deleted = render_dot(&f, true);
        assert!(with_deleted.contains("\"A\" -> \"C\" [style=dashed"));
    }

    #[test]
    fn empty_hierarchy_dot_is_nodes_only() {
        let f = build_final_hierarchy(vec![], vec![crate::hierarchy::Skill::new("A")]);
        let dot = render_dot(&f, false);
        assert!(dot.contains("\"A\";"));
        assert!(!dot.contains("->"));
    }

    #[test]
    fn averages_csv_flags_zero_learner_column() {
        let a = crate::fuzzy::EdgeAverages {
            links: vec![Edge::new("A", "B")],
            avg_cpr: vec![0.0],
            avg_rpr: vec![0.0],
            effective_n: vec![0],
        };
        let csv = render_averages_csv(&a, 2);
        assert!(csv.lines().nth(1).unwrap().ends_with(",0"));
    }
}
