//! The stages wired together, as used by the command-line tool.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::artifact::RunConfig;
use crate::corpus::{ingest_file, CorpusStats};
use crate::embed::{train_with_vocab, EmbeddingModel, JsonlCorpus, TrainingReport, Vocabulary};
use crate::induce::{candidate_lexicon, induce, CandidateSpace};
use crate::score::{score_families, ScoredFamily};
use crate::Result;

/// Ingests `corpus` and trains embeddings whose vocabulary is every token
/// with frequency at least `min_count`.
pub fn train_stage(corpus: &Path, config: &RunConfig) -> Result<(CorpusStats, EmbeddingModel, TrainingReport)> {
    config.validate()?;
    let stats = ingest_file(corpus, &config.ingest)?;
    log::info!(
        "ingested {} records ({} skipped), {} distinct tokens",
        stats.records,
        stats.skipped.total(),
        stats.tokens.len()
    );
    let vocab = Vocabulary::from_counts(
        stats.tokens.iter().map(|(t, s)| (t.as_str(), s.corpus_frequency)),
        config.embedding.min_count,
    );
    let source = JsonlCorpus {
        path: corpus.to_path_buf(),
        config: config.ingest.clone(),
    };
    let (model, report) = train_with_vocab(&source, vocab, &config.embedding, config.workers)?;
    log::info!(
        "trained {} word vectors, mean loss {:.4}",
        report.vocabulary_size,
        report.mean_loss
    );
    Ok((stats, model, report))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct InductionReport {
    pub lexicon_size: usize,
    pub families_induced: usize,
    pub families_kept: usize,
    pub families_pruned: usize,
    /// Tokens that belong to more than one kept family (open mode only).
    pub overlapping_tokens: usize,
}

/// Builds the candidate lexicon, induces families in the configured mode,
/// and scores and prunes them. Families are sorted by id.
pub fn induce_stage(
    stats: &CorpusStats,
    model: &EmbeddingModel,
    config: &RunConfig,
) -> Result<(Vec<ScoredFamily>, InductionReport)> {
    config.validate()?;
    let lexicon = candidate_lexicon(stats, model, config.embedding.min_count, config.induction.min_len)?;
    let space = CandidateSpace::from_model(model, &lexicon);
    let raw = induce(&space, &config.induction, config.mode);
    let induced = raw.len();
    let mut families = score_families(raw, stats, config.induction.snn_min, &config.scoring);
    families.sort_by(|a, b| a.family_id.cmp(&b.family_id));

    let mut membership: BTreeMap<&str, usize> = BTreeMap::new();
    for family in families.iter().filter(|f| f.survives()) {
        for m in &family.members {
            *membership.entry(m.token.as_str()).or_default() += 1;
        }
    }
    let kept = families.iter().filter(|f| f.survives()).count();
    let report = InductionReport {
        lexicon_size: lexicon.len(),
        families_induced: induced,
        families_kept: kept,
        families_pruned: induced - kept,
        overlapping_tokens: membership.values().filter(|&&n| n > 1).count(),
    };
    log::info!(
        "{} candidates, {} families induced, {} kept",
        report.lexicon_size,
        report.families_induced,
        report.families_kept
    );
    Ok((families, report))
}
