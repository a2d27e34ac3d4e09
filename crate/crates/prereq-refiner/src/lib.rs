//! Refines an expert-defined learning hierarchy (a prerequisite DAG over
//! skills) against cohort grade data.
//!
//! For every prerequisite link the pipeline computes per-learner grade
//! deltas, scores them with two triangular membership functions (one peaked
//! where the stated direction is supported, one where the opposite direction
//! fits better), averages over the cohort, and keeps, reverses or deletes
//! the link. The result is a refined hierarchy whose edges carry relevance
//! degrees.

pub mod decision;
pub mod error;
pub mod fuzzy;
pub mod grades;
pub mod hierarchy;
pub mod pipeline;
pub mod report;
pub mod simulate;

pub use error::{Error, Result};
