//! Multi-dimensional quality scoring and regression-guided weight search for
//! pre-training data selection.
//!
//! The pipeline has four stages:
//!
//! 1. [`corpus`] reads line-delimited JSON documents (or synthesizes them).
//! 2. [`signals`] and [`importance`] compute per-document quality scores;
//!    [`scores`] gathers them, together with ingested model ratings, into a
//!    rank-normalized [`scores::ScoreMatrix`].
//! 3. [`proxy`] samples weight vectors on the simplex, selects data with each
//!    ([`selection`]) and records the proxy loss reported by a trainer.
//! 4. [`optimizer`] fits gradient-boosted trees to the `(weights, loss)`
//!    records and searches a dense candidate set for the best mixture.
//!
//! Data-parallel loops go through [`exec::Execution`]; with the `parallel`
//! feature disabled everything runs on the calling thread.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corpus;
pub mod error;
pub mod exec;
pub mod importance;
pub mod optimizer;
pub mod presets;
pub mod proxy;
pub mod scores;
pub mod selection;
pub mod signals;

pub use error::{Error, Result};
pub use exec::Execution;
