//! Replay harness for the dynamic matching pipeline: parameter planning,
//! update streams, the composed pipeline with its checks, and flat-file
//! outputs.

pub mod config;
pub mod output;
pub mod pipeline;
pub mod stream;
pub mod sweep;

pub use config::{plan_parameters, ConfigError, Mode, PipelineConfig, ResolvedParams, StreamKind, StreamSpec};
pub use dynmatch_core::exec::ExecPolicy;
pub use output::{emit_plot_data, metrics_csv, write_run, METRICS_HEADER};
pub use pipeline::{run_pipeline, MetricsRow, Pipeline, PipelineError, RunOutput, Summary};
pub use stream::{generate_stream, three_block_instance, Op, StreamError, Update, UpdateStream};
