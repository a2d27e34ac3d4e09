use thiserror::Error;

/// Errors produced by any stage of the refinement pipeline. Each variant
/// names the offending skill, link or learner so that CLI messages can
/// point at the input element that caused the failure.
#[derive(Debug, Error)]
pub enum Error {
    #[error("hierarchy: duplicate skill id `{0}`")]
    DuplicateSkill(String),

    #[error("hierarchy: edge {from}\u{2192}{to} references unknown skill `{unknown}`")]
    UnknownEndpoint {
        from: String,
        to: String,
        unknown: String,
    },

    #[error("hierarchy: self-loop on skill `{0}`")]
    SelfLoop(String),

    #[error("hierarchy: duplicate edge {from}\u{2192}{to}")]
    DuplicateEdge { from: String, to: String },

    #[error("hierarchy: cycle detected: {}", cycle.join(" \u{2192} "))]
    CycleDetected { cycle: Vec<String> },

    #[error("hierarchy: missing `{0}` column in edge list")]
    MissingEdgeColumn(String),

    #[error("grades: non-numeric cell `{raw}` for learner `{learner}`, skill `{skill}`")]
    NonNumericGrade {
        learner: String,
        skill: String,
        raw: String,
    },

    #[error("grades: value {value} for learner `{learner}`, skill `{skill}` outside [0, {g_max}]")]
    GradeOutOfRange {
        learner: String,
        skill: String,
        value: f64,
        g_max: f64,
    },

    #[error("grades: duplicate learner id `{0}`")]
    DuplicateLearner(String),

    #[error("grades: duplicate skill column `{0}`")]
    DuplicateSkillColumn(String),

    #[error("grades: missing cell for learner `{learner}`, skill `{skill}`")]
    MissingGrade { learner: String, skill: String },

    #[error("grades: unknown learner `{0}`")]
    UnknownLearner(String),

    #[error("grades: unknown skill `{0}`")]
    UnknownSkill(String),

    #[error("grades: g_max must be positive, got {0}")]
    InvalidGMax(f64),

    #[error(
        "delta: grade matrix skills do not match hierarchy skills \
         (missing: [{}], extra: [{}])",
        missing.join(", "),
        extra.join(", ")
    )]
    SkillSetMismatch {
        missing: Vec<String>,
        extra: Vec<String>,
    },

    #[error("thresholds: {0}")]
    InvalidThresholds(String),

    #[error("decision: alpha_min must be in (0, 1], got {0}")]
    InvalidAlphaMin(f64),

    #[error("averages: link {from}\u{2192}{to} has no contributing learners")]
    NoContributingLearners { from: String, to: String },

    #[error("recovery: expected and predicted link sets differ at {0}")]
    LinkSetMismatch(String),

    #[error("simulator: {0}")]
    InvalidCohortSpec(String),

    #[error("simulator: edge {from}\u{2192}{to} is not part of the hierarchy")]
    UnknownReversal { from: String, to: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
