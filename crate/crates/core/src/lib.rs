//! Merge ranked, multi-locale search results into one diverse source set.
//!
//! * [`allocation`] splits a keyword budget across weighted locales.
//! * [`cascade`] infers a source's country from its TLD, model metadata or language.
//! * [`diversity`] picks one source per keyword under a per-domain allowance.
//! * [`brief`] holds the research brief, its per-stage projections and the
//!   convergence calculator.
//! * [`metrics`] scores a selection.
//! * [`harness`] wires everything together over fixture-backed providers.

pub mod allocation;
pub mod brief;
pub mod cascade;
pub mod diversity;
mod error;
pub mod harness;
pub mod metrics;
pub mod model;

pub use error::{Error, Result};
