//! End-to-end orchestration: load → delta → fuzzify → average → decide →
//! assemble. Every stage is a pure function of the previous one, so a fixed
//! input always produces an identical result.

use serde::{Deserialize, Serialize};

use crate::decision::{
    build_final_hierarchy, decide_edges, DecisionConfig, EdgeDecision, FinalHierarchy,
};
use crate::error::Result;
use crate::fuzzy::{
    average_scores, delta_grades, fuzzify, DeltaMatrix, EdgeAverages, FuzzyScores, Thresholds,
};
use crate::grades::{GradeMatrix, MissingPolicy};
use crate::hierarchy::Hierarchy;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub thresholds: Thresholds,
    pub alpha_min: f64,
    pub g_max: f64,
    pub missing_policy: MissingPolicy,
    pub decimals: u32,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            thresholds: Thresholds::default(),
            alpha_min: 0.5,
            g_max: 20.0,
            missing_policy: MissingPolicy::Strict,
            decimals: 2,
        }
    }
}

/// Every intermediate artifact of one refinement run.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub hierarchy: Hierarchy,
    pub grades: GradeMatrix,
    pub delta: DeltaMatrix,
    pub scores: FuzzyScores,
    pub averages: EdgeAverages,
    pub decisions: Vec<EdgeDecision>,
    pub final_hierarchy: FinalHierarchy,
}

pub fn run_pipeline(
    hierarchy: Hierarchy,
    grades: GradeMatrix,
    config: &PipelineConfig,
) -> Result<PipelineOutput> {
    let decision_config = DecisionConfig::new(config.alpha_min)?;
    let delta = delta_grades(&grades, &hierarchy)?;
    let scores = fuzzify(&delta, &config.thresholds);
    let averages = average_scores(&scores)?;
    let decisions = decide_edges(&averages, &decision_config);
    let final_hierarchy = build_final_hierarchy(decisions.clone(), hierarchy.skills().to_vec());
    Ok(PipelineOutput {
        hierarchy,
        grades,
        delta,
        scores,
        averages,
        decisions,
        final_hierarchy,
    })
}
