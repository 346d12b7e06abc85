//! Quantum Birkhoff normal forms for torus symbols with Gevrey-class
//! bounds: approximation functions, small-divisor scans, a jet-truncated
//! symbol algebra, the homological solver and the normal-form recursion.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod approximation;
pub mod config;
pub mod error;
pub mod gevrey;
pub mod homological;
pub mod jet;
pub mod nonresonance;
pub mod pipeline;
mod props;
pub mod qbnf;
pub mod symbol;

pub use approximation::{ApproximationFunction, DeltaKind, ValidityReport};
pub use config::{parse_config, parse_config_str, write_config, ProblemConfig};
pub use error::{QbnfError, Result};
pub use gevrey::{GevreyIndices, MultiIndex};
pub use homological::{solve_homological, DivisorFrequency, HomologicalSolution};
pub use jet::Jet;
pub use nonresonance::{scan_divisors, DivisorReport, FrequencySpec, Mode};
pub use pipeline::{
    emit_plot_data, run_pipeline, run_props, PipelineOptions, PlotSeries, RunReport,
};
pub use qbnf::{run_recursion, verify_conjugacy, NormalFormResult};
pub use symbol::{AngleConvention, SymbolShape, SymbolSlice, TorusSymbol};
