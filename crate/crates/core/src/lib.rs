//! Rule-based metadata extraction for scholarly articles.
//!
//! Documents arrive as PDFs or `.spans` files, are classified as scientific
//! or not, and have six fields pulled out by marker-delimited windows. Records
//! are indexed as XML, JSON or SQLite and can be scored against ground truth.

pub mod classifier;
pub mod config;
pub mod evaluator;
pub mod extractor;
pub mod fixtures;
pub mod ingest;
pub mod model;
pub mod pipeline;
pub mod store;
pub mod text;
