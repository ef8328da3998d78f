//! Benchmark sweeps comparing surrogate accuracy across construction
//! domains: raw coordinates, min-max scaling, Kriging length-scale scaling,
//! the curvature transforms, and the known ideal frame.

pub mod emit;
pub mod run;
pub mod spec;

pub use emit::{emit, emit_lines, summarize, CellSummary, Summary};
pub use run::{line_slice, run_experiment, run_lines, shape_variance, ExperimentResult, Problem, RmseRecord};
pub use spec::{Domain, ExperimentSpec, FunctionId, Preset, Region, TestCloud};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid experiment spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Core(#[from] isoframe::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/benchmark.md")]
mod book {}
