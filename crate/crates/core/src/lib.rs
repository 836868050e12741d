//! Simulation and metrics for explanation delivery modeled as a noisy,
//! capacity-limited channel between a model's feature attributions and a
//! user's understanding.
//!
//! Pipeline: [`generator`] draws or ingests attribution vectors,
//! [`encoder`] turns them into messages, [`percept`] models what the user
//! retains, and [`metrics`]/[`infotheory`] score the outcome. [`experiment`]
//! runs the full protocol and [`report`] writes CSV and SVG output.

// `!(x > 0.0)` is used on purpose so NaN fails the same checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod encoder;
pub mod error;
pub mod experiment;
pub mod generator;
pub mod infotheory;
pub mod metrics;
pub mod percept;
pub mod report;
pub mod stream;

pub use config::{Condition, ExperimentConfig, Modality, Style};
pub use error::{Error, Result};
pub use experiment::{run_protocol, ResultSet, SampleRecord};
