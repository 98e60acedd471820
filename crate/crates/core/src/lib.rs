//! Private, one-time LLM benchmarks built from fresh arXiv articles.
//!
//! The crate is organised along the life of a benchmark:
//!
//! * [`corpus`] fetches article listings and sources and stores cleaned text,
//! * [`scpgen`] turns paragraphs into sequencing, cloze and prediction items,
//! * [`harness`] renders prompts, queries models and scores exact-match answers,
//! * [`metrics`] computes rugged scores, rank correlations and stability statistics,
//! * [`registry`] tracks the private/expired lifecycle and builds leaderboards.

pub mod corpus;
pub mod digest;
mod fsio;
pub mod harness;
pub mod metrics;
pub mod registry;
pub mod scpgen;

/// Version of this crate, embedded in every artifact it writes.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
