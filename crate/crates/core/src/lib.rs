//! Fitness modelling for evolving citation networks.
//!
//! The crate is organised as a pipeline:
//!
//! * [`corpus`] loads and indexes papers, scholars, venues and references.
//! * [`metrics`] derives the age and prior-impact variables of every paper
//!   and aggregates them per scholar.
//! * [`inference`] fits least-squares models with full inference statistics.
//! * [`models`] assembles the paper and scholar fitness models, normalized
//!   scores and benchmark correlations.
//! * [`distributions`] builds frequency distributions, tail fits and yearly trends.
//! * [`netsim`] grows preferential-attachment networks with known ground truth.

pub mod corpus;
pub mod distributions;
mod error;
pub mod inference;
pub mod metrics;
pub mod models;
pub mod netsim;
pub mod synthetic;

pub use error::{Error, Result};
