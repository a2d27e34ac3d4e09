//! Grade-delta computation and fuzzy membership of prerequisite links.
//!
//! Each link of the hierarchy is scored per learner against two triangular
//! membership functions over the grade delta `grade(to) - grade(from)`:
//! `mu_cpr` peaks at 0 (the stated direction is supported) and `mu_rpr`
//! peaks at `s2` (the opposite direction fits better). Per-link arithmetic
//! means over the cohort feed the keep/reverse/delete decision.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grades::GradeMatrix;
use crate::hierarchy::{Edge, Hierarchy};

/// Membership thresholds; must satisfy `s1 < 0 < s2 < s3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl Thresholds {
    // negated comparisons so that NaN fails validation too
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn new(s1: f64, s2: f64, s3: f64) -> Result<Self> {
        if !(s1 < 0.0) {
            return Err(Error::InvalidThresholds(format!(
                "s1 must be negative, got {s1}"
            )));
        }
        if !(s2 > 0.0) {
            return Err(Error::InvalidThresholds(format!(
                "s2 must be positive, got {s2}"
            )));
        }
        if !(s3 > s2) {
            return Err(Error::InvalidThresholds(format!(
                "s3 must exceed s2, got s2={s2}, s3={s3}"
            )));
        }
        Ok(Thresholds { s1, s2, s3 })
    }
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            s1: -5.0,
            s2: 5.0,
            s3: 10.0,
        }
    }
}

/// Membership in "the stated direction is correct". Triangular with support
/// `[s1, s2]` and peak 1 at delta 0.
pub fn mu_cpr(delta: f64, t: &Thresholds) -> f64 {
    if delta < t.s1 {
        0.0
    } else if delta <= 0.0 {
        1.0 - delta / t.s1
    } else if delta <= t.s2 {
        1.0 - delta / t.s2
    } else {
        0.0
    }
}

/// Membership in "the opposite direction fits better". Triangular with
/// support `[0, s3]` and peak 1 at delta `s2`.
pub fn mu_rpr(delta: f64, t: &Thresholds) -> f64 {
    if delta < 0.0 {
        0.0
    } else if delta <= t.s2 {
        delta / t.s2
    } else if delta <= t.s3 {
        (t.s3 - delta) / (t.s3 - t.s2)
    } else {
        0.0
    }
}

/// Per-learner grade deltas, one column per hierarchy edge in edge order.
/// `None` cells come from skip-policy gaps in the grade matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaMatrix {
    pub learners: Vec<String>,
    pub links: Vec<Edge>,
    values: Vec<Option<f64>>,
}

impl DeltaMatrix {
    pub fn get(&self, learner: usize, link: usize) -> Option<f64> {
        self.values[learner * self.links.len() + link]
    }
}

/// Computes `grade(to) - grade(from)` for every learner and link. The grade
/// matrix must cover exactly the hierarchy's skill set.
pub fn delta_grades(m: &GradeMatrix, h: &Hierarchy) -> Result<DeltaMatrix> {
    let missing: Vec<String> = h
        .skill_ids()
        .filter(|id| !m.skills().iter().any(|s| s == id))
        .map(str::to_string)
        .collect();
    let extra: Vec<String> = m
        .skills()
        .iter()
        .filter(|s| h.skill_index(s).is_none())
        .cloned()
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(Error::SkillSetMismatch { missing, extra });
    }

    let col: Vec<(usize, usize)> = h
        .edges()
        .iter()
        .map(|e| {
            let from = m.skills().iter().position(|s| *s == e.from).unwrap();
            let to = m.skills().iter().position(|s| *s == e.to).unwrap();
            (from, to)
        })
        .collect();

    let mut values = Vec::with_capacity(m.learners().len() * col.len());
    for l in 0..m.learners().len() {
        for &(from, to) in &col {
            values.push(match (m.get(l, to), m.get(l, from)) {
                (Some(j), Some(i)) => Some(j - i),
                _ => None,
            });
        }
    }

    Ok(DeltaMatrix {
        learners: m.learners().to_vec(),
        links: h.edges().to_vec(),
        values,
    })
}

/// Per-learner membership values for every link.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyScores {
    pub learners: Vec<String>,
    pub links: Vec<Edge>,
    cpr: Vec<Option<f64>>,
    rpr: Vec<Option<f64>>,
}

impl FuzzyScores {
    pub fn cpr(&self, learner: usize, link: usize) -> Option<f64> {
        self.cpr[learner * self.links.len() + link]
    }

    pub fn rpr(&self, learner: usize, link: usize) -> Option<f64> {
        self.rpr[learner * self.links.len() + link]
    }
}

pub fn fuzzify(d: &DeltaMatrix, t: &Thresholds) -> FuzzyScores {
    let mut cpr = Vec::with_capacity(d.learners.len() * d.links.len());
    let mut rpr = Vec::with_capacity(cpr.capacity());
    for l in 0..d.learners.len() {
        for k in 0..d.links.len() {
            let delta = d.get(l, k);
            cpr.push(delta.map(|v| mu_cpr(v, t)));
            rpr.push(delta.map(|v| mu_rpr(v, t)));
        }
    }
    FuzzyScores {
        learners: d.learners.clone(),
        links: d.links.clone(),
        cpr,
        rpr,
    }
}

/// Per-link arithmetic means of the membership values, with the number of
/// contributing learners.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeAverages {
    pub links: Vec<Edge>,
    pub avg_cpr: Vec<f64>,
    pub avg_rpr: Vec<f64>,
    pub effective_n: Vec<usize>,
}

pub fn average_scores(f: &FuzzyScores) -> Result<EdgeAverages> {
    let mut avg_cpr = Vec::with_capacity(f.links.len());
    let mut avg_rpr = Vec::with_capacity(f.links.len());
    let mut effective_n = Vec::with_capacity(f.links.len());
    for (k, link) in f.links.iter().enumerate() {
        let mut sum_c = 0.0;
        let mut sum_r = 0.0;
        let mut n = 0usize;
        for l in 0..f.learners.len() {
            if let (Some(c), Some(r)) = (f.cpr(l, k), f.rpr(l, k)) {
                sum_c += c;
                sum_r += r;
                n += 1;
            }
        }
        if n == 0 {
            return Err(Error::NoContributingLearners {
                from: link.from.clone(),
                to: link.to.clone(),
            });
        }
        avg_cpr.push(sum_c / n as f64);
        avg_rpr.push(sum_r / n as f64);
        effective_n.push(n);
    }
    Ok(EdgeAverages {
        links: f.links.clone(),
        avg_cpr,
        avg_rpr,
        effective_n,
    })
}
