//! Synthetic cohort generation and recovery scoring.
//!
//! The generator exists to test the pipeline, not to model students. Grades
//! propagate down a ground-truth hierarchy: roots draw a base grade, every
//! dependent skill takes the minimum over its prerequisites (the mastery
//! bottleneck), minus an optional per-link mastery gap, plus centered
//! uniform noise, clamped to the grade scale.
//!
//! A mis-oriented expert link is only detectable when the data carries a
//! directional signal: the dependent must trail its true prerequisite by
//! about `s2` grades, which is exactly what a `link_gaps` entry injects.
//! With all gaps at zero (the default), both orientations of a link look
//! identical and every link is scored as kept.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decision::{EdgeDecision, Verdict};
use crate::error::{Error, Result};
use crate::grades::GradeMatrix;
use crate::hierarchy::{Edge, Hierarchy};

/// Extra mastery drop along one true link, in grade units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkGap {
    pub from: String,
    pub to: String,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSpec {
    pub n_learners: usize,
    /// Half-width of the uniform noise added to every dependent grade.
    pub noise_spread: f64,
    /// `[low, high]` range the root skills draw their base grade from.
    pub base_grade_range: [f64; 2],
    pub seed: u64,
    #[serde(default)]
    pub link_gaps: Vec<LinkGap>,
}

impl CohortSpec {
    // negated comparisons so that NaN fails validation too
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self, g_max: f64) -> Result<()> {
        if self.n_learners == 0 {
            return Err(Error::InvalidCohortSpec(
                "n_learners must be positive".into(),
            ));
        }
        if !(self.noise_spread >= 0.0) {
            return Err(Error::InvalidCohortSpec(format!(
                "noise_spread must be >= 0, got {}",
                self.noise_spread
            )));
        }
        let [low, high] = self.base_grade_range;
        if !(low <= high) {
            return Err(Error::InvalidCohortSpec(format!(
                "base_grade_range low {low} exceeds high {high}"
            )));
        }
        if low < 0.0 || high > g_max {
            return Err(Error::InvalidCohortSpec(format!(
                "base_grade_range [{low}, {high}] outside [0, {g_max}]"
            )));
        }
        for g in &self.link_gaps {
            if !(g.gap >= 0.0) {
                return Err(Error::InvalidCohortSpec(format!(
                    "gap for {}\u{2192}{} must be >= 0",
                    g.from, g.to
                )));
            }
        }
        Ok(())
    }
}

impl Default for CohortSpec {
    fn default() -> Self {
        CohortSpec {
            n_learners: 200,
            noise_spread: 2.0,
            // interior defaults so clamping rarely distorts deltas
            base_grade_range: [6.0, 14.0],
            seed: 0,
            link_gaps: Vec::new(),
        }
    }
}

// One RNG per learner so serial and parallel generation agree.
fn learner_rng(seed: u64, learner: usize) -> ChaCha8Rng {
    let mixed = splitmix64(seed ^ splitmix64(learner as u64 + 1));
    ChaCha8Rng::seed_from_u64(mixed)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Generates a cohort from a ground-truth hierarchy. Deterministic for a
/// fixed `(spec, seed)`; the result round-trips through the grades CSV
/// format.
pub fn generate_cohort(truth: &Hierarchy, spec: &CohortSpec, g_max: f64) -> Result<GradeMatrix> {
    spec.validate(g_max)?;
    let n_skills = truth.skills().len();
    let order = truth.topological_order();
    let indexed_edges = truth.indexed_edges();

    let mut gap = std::collections::HashMap::new();
    for g in &spec.link_gaps {
        let from = truth
            .skill_index(&g.from)
            .ok_or_else(|| Error::UnknownReversal {
                from: g.from.clone(),
                to: g.to.clone(),
            })?;
        let to = truth
            .skill_index(&g.to)
            .ok_or_else(|| Error::UnknownReversal {
                from: g.from.clone(),
                to: g.to.clone(),
            })?;
        gap.insert((from, to), g.gap);
    }

    let mut prereqs: Vec<Vec<usize>> = vec![Vec::new(); n_skills];
    for &(i, j) in &indexed_edges {
        prereqs[j].push(i);
    }

    let width = spec.n_learners.to_string().len();
    let mut learners = Vec::with_capacity(spec.n_learners);
    let mut values = vec![None; spec.n_learners * n_skills];
    let [low, high] = spec.base_grade_range;
    for l in 0..spec.n_learners {
        learners.push(format!("L{:0width$}", l + 1));
        let mut rng = learner_rng(spec.seed, l);
        let mut grades = vec![0.0f64; n_skills];
        for &s in &order {
            let grade = if prereqs[s].is_empty() {
                if low == high {
                    low
                } else {
                    rng.gen_range(low..=high)
                }
            } else {
                let floor = prereqs[s]
                    .iter()
                    .map(|&p| grades[p] - gap.get(&(p, s)).copied().unwrap_or(0.0))
                    .fold(f64::INFINITY, f64::min);
                let noise = if spec.noise_spread == 0.0 {
                    0.0
                } else {
                    rng.gen_range(-spec.noise_spread..=spec.noise_spread)
                };
                (floor + noise).clamp(0.0, g_max)
            };
            grades[s] = grade;
            values[l * n_skills + s] = Some(grade);
        }
    }

    GradeMatrix::new(
        learners,
        truth.skill_ids().map(str::to_string).collect(),
        values,
        g_max,
    )
}

/// Flips the listed edges of a ground-truth hierarchy, modelling an expert
/// who mis-oriented them. Fails if a flip is unknown or induces a cycle.
pub fn perturb_hierarchy(truth: &Hierarchy, reverse: &[Edge]) -> Result<Hierarchy> {
    for r in reverse {
        if !truth.edges().contains(r) {
            return Err(Error::UnknownReversal {
                from: r.from.clone(),
                to: r.to.clone(),
            });
        }
    }
    let edges = truth
        .edges()
        .iter()
        .map(|e| {
            if reverse.contains(e) {
                e.reversed()
            } else {
                e.clone()
            }
        })
        .collect();
    Hierarchy::new(truth.skills().to_vec(), edges)
}

const VERDICTS: [Verdict; 3] = [Verdict::Kept, Verdict::Reversed, Verdict::Deleted];

fn verdict_index(v: Verdict) -> usize {
    VERDICTS.iter().position(|&x| x == v).unwrap()
}

/// Confusion counts and derived metrics, truth rows × predicted columns in
/// KEPT, REVERSED, DELETED order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryStats {
    pub links: usize,
    pub confusion: [[usize; 3]; 3],
    pub accuracy: f64,
    pub precision: [f64; 3],
    pub recall: [f64; 3],
}

/// Scores predicted decisions against expected verdicts, matched by original
/// link. Precision/recall for a verdict with no predicted/true instances is
/// reported as 0.
pub fn evaluate_recovery(
    expected: &[(Edge, Verdict)],
    predicted: &[EdgeDecision],
) -> Result<RecoveryStats> {
    if expected.len() != predicted.len() {
        return Err(Error::LinkSetMismatch(format!(
            "{} expected vs {} predicted links",
            expected.len(),
            predicted.len()
        )));
    }
    let mut confusion = [[0usize; 3]; 3];
    for (edge, truth) in expected {
        let p = predicted
            .iter()
            .find(|d| &d.original == edge)
            .ok_or_else(|| Error::LinkSetMismatch(edge.to_string()))?;
        confusion[verdict_index(*truth)][verdict_index(p.verdict)] += 1;
    }
    let links = expected.len();
    let correct: usize = (0..3).map(|i| confusion[i][i]).sum();
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let mut precision = [0.0; 3];
    let mut recall = [0.0; 3];
    for v in 0..3 {
        let predicted_v: usize = (0..3).map(|t| confusion[t][v]).sum();
        let true_v: usize = confusion[v].iter().sum();
        precision[v] = ratio(confusion[v][v], predicted_v);
        recall[v] = ratio(confusion[v][v], true_v);
    }
    Ok(RecoveryStats {
        links,
        confusion,
        accuracy: ratio(correct, links),
        precision,
        recall,
    })
}

/// Expected verdicts for a perturbation experiment: reversed expert links
/// should be flipped back, everything else kept.
pub fn expected_verdicts(expert: &Hierarchy, reversed: &[Edge]) -> Vec<(Edge, Verdict)> {
    expert
        .edges()
        .iter()
        .map(|e| {
            let verdict = if reversed.iter().any(|r| r.reversed() == *e) {
                Verdict::Reversed
            } else {
                Verdict::Kept
            };
            (e.clone(), verdict)
        })
        .collect()
}
