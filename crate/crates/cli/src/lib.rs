//! Pipeline orchestration: configuration, stage checkpoints, the document
//! index and the per-language summary table.

pub mod checkpoint;
pub mod config;
pub mod pipeline;
pub mod record;
pub mod route;
pub mod summary;

pub use checkpoint::Stage;
pub use config::{PipelineConfig, SourceMode};
pub use pipeline::{Pipeline, PipelineError, RunReport};
pub use record::{DocumentRecord, Status};
pub use route::{route_document, Routing};
