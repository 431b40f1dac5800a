//! Composite risk scoring for tabular binary classification: cleaning,
//! correlation-signed scores, five-learner feature weights, a neural refiner,
//! greedy weight calibration, evaluation and rule-based insights.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod error;
pub mod evaluation;
pub mod insights;
pub mod learners;
pub mod matrix;
pub mod neural;
pub mod pipeline;
pub mod scoring;
pub mod table;

pub use error::{Error, Result};
