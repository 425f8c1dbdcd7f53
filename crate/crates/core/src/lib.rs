//! Value linter: annotates code elements with human-value relevance derived
//! from value-annotated APIs, inspects the annotations for value smells and
//! recommends mitigations.
//!
//! Pipeline: [`facts`] → [`annotator`] → [`inspector`] → [`recommender`] →
//! [`report`]. The [`cli`] module wires the stages together.

pub mod annotator;
pub mod catalog;
pub mod cli;
pub mod error;
pub mod facts;
pub mod inspector;
pub mod recommender;
pub mod report;
mod trie;
pub mod value_model;

pub use error::{Error, Result};
pub use trie::is_segment_prefix;

pub const TOOL_NAME: &str = "value-lint";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
