//! Variant-family induction from cosine and character n-gram evidence.
//!
//! Open mode builds one star per seed. Strict mode builds an undirected
//! graph of admitted pairs, capped in degree, and takes its connected
//! components.

mod config;
mod family;
mod jaccard;
mod lexicon;
mod open;
mod strict;
mod union_find;

pub use config::{InductionConfig, Mode};
pub use family::{family_id, open_family_id, RawFamily, VariantPair};
pub use jaccard::{jaccard, jaccard_of_sets};
pub use lexicon::{candidate_lexicon, CandidateSpace};
pub use open::induce_open;
pub use strict::{induce_strict, strict_graph, StrictGraph};
pub use union_find::UnionFind;

/// Inclusive threshold test shared by both modes.
pub fn admits(cosine: f64, jaccard: f64, cosine_th: f64, jaccard_th: f64) -> bool {
    cosine >= cosine_th && jaccard >= jaccard_th
}

/// Scores the pair `(i, j)` of `space` and returns it if both thresholds
/// are met.
pub fn admit_pair(space: &CandidateSpace, i: usize, j: usize, cosine_th: f64, jaccard_th: f64) -> Option<VariantPair> {
    let pair = space.pair(i, j)?;
    admits(pair.cosine, pair.jaccard, cosine_th, jaccard_th).then_some(VariantPair { is_edge: true, ..pair })
}

/// Runs the configured mode.
pub fn induce(space: &CandidateSpace, config: &InductionConfig, mode: Mode) -> Vec<RawFamily> {
    match mode {
        Mode::Open => induce_open(space, config),
        Mode::Strict => induce_strict(space, config),
    }
}
