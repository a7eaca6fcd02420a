//! Corpus-to-variant-families toolkit.
//!
//! The pipeline has three stages:
//!
//! 1. [`corpus`] streams a JSONL corpus and collects token statistics, and
//!    [`embed`] trains skip-gram embeddings whose token vectors are composed
//!    from a word vector and hashed character n-gram vectors.
//! 2. [`induce`] groups related surface forms into variant families using
//!    cosine similarity plus character n-gram Jaccard overlap, in either
//!    open (star) or strict (connected component) mode. [`score`] computes
//!    cohesion, per-variant dimension statistics and pruning verdicts.
//! 3. The families are written by [`artifact`] as JSONL and a CSV summary,
//!    ready for manual categorisation.
//!
//! [`bench`] generates corpora with planted families and measures how well
//! the pipeline recovers them.

pub mod artifact;
pub mod bench;
pub mod corpus;
pub mod embed;
mod error;
pub mod induce;
pub mod ngram;
pub mod pipeline;
pub mod score;

pub use error::{Error, Result};
