//! Synthetic corpora with planted variant families, and recovery metrics.

mod evaluate;
mod generate;
mod rules;

pub use evaluate::{evaluate_recovery, random_pairing, RecoveryMetrics};
pub use generate::{generate_corpus, read_ground_truth, GeneratorSpec, PlantedFamily, SyntheticCorpus};
pub use rules::{default_rules, derive_variants, Applicability, PerturbationRule};
