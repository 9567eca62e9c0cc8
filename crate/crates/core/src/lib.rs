//! Allocation-only core of the serpgauge evaluation harness.
//!
//! Everything here is a pure function of its inputs: text normalization and
//! occurrence counting, the built-in evaluation-domain taxonomy and query-set
//! validation, decision-network relevancy scoring, the linear feature model
//! and its coordinate-ascent tuner, rank metrics, and deterministic mock
//! engines. IO, HTTP, caching and reporting live in the `serpgauge` crate.

#![no_std]

extern crate alloc;

mod error;
mod rng;

pub mod document;
pub mod metrics;
pub mod mock;
pub mod query;
pub mod sample;
pub mod scoring;
pub mod serp;
pub mod taxonomy;
pub mod text;
pub mod url;

pub use error::CoreError;
pub use rng::{stable_hash, SeededRng};
