//! Planning per-model quantization levels for multi-model inference
//! pipelines.
//!
//! Given measured accuracy and latency for each model at each candidate
//! precision, the crate picks exactly one level per model, either by a
//! weighted accuracy/latency trade-off, under a pipeline latency budget, or
//! by enumerating the full Pareto front of the two objectives.

pub mod cli;
pub mod domain;
pub mod error;
pub mod ingest;
pub mod objective;
pub mod par;
pub mod solver;
pub mod synth;

pub use domain::{
    dominates, AccuracyComposition, Assignment, FrontEntry, LevelSet, MeasuredPoint, ModelProfile,
    ObjectiveVector, ParetoFront, PipelineProfile, QuantLevel, Thresholds,
};
pub use error::{Error, Result};
pub use solver::{brute_force_front, pareto_front_dp, solve_budget, solve_weighted, SolveResult};
