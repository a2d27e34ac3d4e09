//! The learners × skills grade matrix.

use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What to do with empty cells in a grades file. `Strict` rejects them;
/// `Skip` keeps them absent so downstream averages exclude that learner for
/// any link touching the missing skill.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "UPPERCASE")]
pub enum MissingPolicy {
    #[default]
    Strict,
    Skip,
}

impl FromStr for MissingPolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "strict" => Ok(MissingPolicy::Strict),
            "skip" => Ok(MissingPolicy::Skip),
            other => Err(format!(
                "unknown missing policy `{other}` (use strict|skip)"
            )),
        }
    }
}

/// Dense grade matrix, immutable after load. Cells are `None` only when a
/// skip policy admitted a missing value.
#[derive(Debug, Clone, PartialEq)]
pub struct GradeMatrix {
    learners: Vec<String>,
    skills: Vec<String>,
    values: Vec<Option<f64>>,
    g_max: f64,
}

impl GradeMatrix {
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn new(
        learners: Vec<String>,
        skills: Vec<String>,
        values: Vec<Option<f64>>,
        g_max: f64,
    ) -> Result<Self> {
        if !(g_max > 0.0) {
            return Err(Error::InvalidGMax(g_max));
        }
        assert_eq!(values.len(), learners.len() * skills.len());
        for (idx, v) in values.iter().enumerate() {
            if let Some(v) = *v {
                if !(0.0..=g_max).contains(&v) {
                    return Err(Error::GradeOutOfRange {
                        learner: learners[idx / skills.len()].clone(),
                        skill: skills[idx % skills.len()].clone(),
                        value: v,
                        g_max,
                    });
                }
            }
        }
        Ok(GradeMatrix {
            learners,
            skills,
            values,
            g_max,
        })
    }

    /// Parses the grades CSV: first column is the learner id, remaining
    /// columns are skill ids, one row per learner.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn from_csv_reader<R: Read>(reader: R, g_max: f64, policy: MissingPolicy) -> Result<Self> {
        if !(g_max > 0.0) {
            return Err(Error::InvalidGMax(g_max));
        }
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);

        let headers = rdr.headers()?.clone();
        let mut skills: Vec<String> = Vec::new();
        for h in headers.iter().skip(1) {
            let id = h.to_string();
            if skills.contains(&id) {
                return Err(Error::DuplicateSkillColumn(id));
            }
            skills.push(id);
        }

        let mut learners: Vec<String> = Vec::new();
        let mut values: Vec<Option<f64>> = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let learner = record.get(0).unwrap_or("").to_string();
            if learners.contains(&learner) {
                return Err(Error::DuplicateLearner(learner));
            }
            for (col, skill) in skills.iter().enumerate() {
                let raw = record.get(col + 1).unwrap_or("");
                if raw.is_empty() {
                    match policy {
                        MissingPolicy::Strict => {
                            return Err(Error::MissingGrade {
                                learner,
                                skill: skill.clone(),
                            })
                        }
                        MissingPolicy::Skip => values.push(None),
                    }
                    continue;
                }
                let v: f64 = raw.parse().map_err(|_| Error::NonNumericGrade {
                    learner: learner.clone(),
                    skill: skill.clone(),
                    raw: raw.to_string(),
                })?;
                if !(0.0..=g_max).contains(&v) {
                    return Err(Error::GradeOutOfRange {
                        learner: learner.clone(),
                        skill: skill.clone(),
                        value: v,
                        g_max,
                    });
                }
                values.push(Some(v));
            }
            learners.push(learner);
        }

        Ok(GradeMatrix {
            learners,
            skills,
            values,
            g_max,
        })
    }

    pub fn learners(&self) -> &[String] {
        &self.learners
    }

    pub fn skills(&self) -> &[String] {
        &self.skills
    }

    pub fn g_max(&self) -> f64 {
        self.g_max
    }

    /// Cell by row/column index. `None` marks a skip-policy gap.
    pub fn get(&self, learner: usize, skill: usize) -> Option<f64> {
        self.values[learner * self.skills.len() + skill]
    }

    pub fn grade_of(&self, learner: &str, skill: &str) -> Result<f64> {
        let l = self
            .learners
            .iter()
            .position(|x| x == learner)
            .ok_or_else(|| Error::UnknownLearner(learner.to_string()))?;
        let s = self
            .skills
            .iter()
            .position(|x| x == skill)
            .ok_or_else(|| Error::UnknownSkill(skill.to_string()))?;
        self.get(l, s).ok_or_else(|| Error::MissingGrade {
            learner: learner.to_string(),
            skill: skill.to_string(),
        })
    }

    /// Serializes back to the grades CSV format. Values print with dot
    /// decimals; integral grades print without a fraction.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("learner");
        for s in &self.skills {
            out.push(',');
            out.push_str(s);
        }
        out.push('\n');
        for (l, learner) in self.learners.iter().enumerate() {
            out.push_str(learner);
            for s in 0..self.skills.len() {
                out.push(',');
                if let Some(v) = self.get(l, s) {
                    out.push_str(&format_grade(v));
                }
            }
            out.push('\n');
        }
        out
    }
}

fn format_grade(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}
