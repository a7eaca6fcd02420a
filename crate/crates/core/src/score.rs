//! Family scoring, pruning and per-variant dimension statistics.
//!
//! Filters run in a fixed order:
//!
//! 1. members seen in fewer than `min_users` dimension values are removed,
//! 2. the family is re-checked against `snn_min`,
//! 3. the max/min member frequency ratio is checked against `max_freq_ratio`,
//! 4. the remaining pairs are scored.
//!
//! Scoring has no side effects, so swapping steps 3 and 4 changes nothing.
//! Pruned families keep their reason codes for the audit summary.

use serde::{Deserialize, Serialize};

use crate::corpus::CorpusStats;
use crate::induce::{Mode, RawFamily, VariantPair};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoringConfig {
    pub min_users: usize,
    pub max_freq_ratio: f64,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        ScoringConfig {
            min_users: 3,
            max_freq_ratio: 25.0,
        }
    }
}

impl ScoringConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_users < 1 {
            return Err(Error::config("MIN_USERS", "must be at least 1"));
        }
        if !(self.max_freq_ratio.is_finite() && self.max_freq_ratio >= 1.0) {
            return Err(Error::config("MAX_FREQ_RATIO", "must be a finite number >= 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyScore {
    pub size: usize,
    pub mean_cosine: f64,
    pub mean_jaccard: f64,
    pub cohesion: f64,
}

/// `2ab / (a + b)`, or 0 when `a + b` is 0.
pub fn harmonic_mean(a: f64, b: f64) -> f64 {
    if a == b {
        return a;
    }
    let sum = a + b;
    if sum == 0.0 {
        0.0
    } else {
        2.0 * a * b / sum
    }
}

/// Means over all unordered member pairs and their harmonic mean. `None`
/// for a family without pairs.
pub fn score_pairs(size: usize, pairs: &[VariantPair]) -> Option<FamilyScore> {
    if pairs.is_empty() {
        return None;
    }
    let n = pairs.len() as f64;
    let mean_cosine = pairs.iter().map(|p| p.cosine).sum::<f64>() / n;
    let mean_jaccard = pairs.iter().map(|p| p.jaccard).sum::<f64>() / n;
    Some(FamilyScore {
        size,
        mean_cosine,
        mean_jaccard,
        cohesion: harmonic_mean(mean_cosine, mean_jaccard),
    })
}

pub fn score_family(family: &RawFamily) -> Option<FamilyScore> {
    score_pairs(family.members.len(), &family.pairs)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariantDimensionStats {
    /// Number of distinct dimension values the variant occurs in.
    pub coverage: usize,
    pub top_dimension: Option<String>,
    /// Share of `total_frequency` contributed by `top_dimension`.
    pub top_share: f64,
    pub top_count: u64,
    pub total_frequency: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub token: String,
    pub frequency: u64,
    /// `None` when the corpus has no dimension configured.
    pub dimension: Option<VariantDimensionStats>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PruneReason {
    MinSize,
    MaxFreqRatio,
}

impl PruneReason {
    pub fn code(self) -> &'static str {
        match self {
            PruneReason::MinSize => "min_size",
            PruneReason::MaxFreqRatio => "max_freq_ratio",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub reasons: Vec<PruneReason>,
    /// Max over min member frequency; `None` without members.
    pub freq_ratio: Option<f64>,
}

impl Verdict {
    pub fn pruned(&self) -> bool {
        !self.reasons.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoredFamily {
    /// Identity of the induced family, kept when members are filtered out.
    pub family_id: String,
    pub mode: Mode,
    pub seed: Option<String>,
    /// Sorted by token.
    pub members: Vec<Member>,
    pub pairs: Vec<VariantPair>,
    pub score: Option<FamilyScore>,
    pub verdict: Verdict,
}

impl ScoredFamily {
    /// Attaches member frequencies; no filtering, no dimension statistics.
    pub fn from_raw(raw: RawFamily, stats: &CorpusStats) -> ScoredFamily {
        let members = raw
            .members
            .iter()
            .map(|t| Member {
                token: t.clone(),
                frequency: stats.frequency(t),
                dimension: None,
            })
            .collect();
        ScoredFamily {
            family_id: raw.family_id,
            mode: raw.mode,
            seed: raw.seed,
            members,
            pairs: raw.pairs,
            score: None,
            verdict: Verdict::default(),
        }
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn survives(&self) -> bool {
        !self.verdict.pruned()
    }

    fn add_reason(&mut self, reason: PruneReason) {
        if !self.verdict.reasons.contains(&reason) {
            self.verdict.reasons.push(reason);
        }
    }
}

pub fn variant_dimension_stats(stats: &CorpusStats, token: &str) -> VariantDimensionStats {
    let entry = stats.get(token);
    let total_frequency = entry.map_or(0, |e| e.corpus_frequency);
    let (coverage, top) = match entry {
        Some(e) => (
            e.dimension_counts.len(),
            // Highest count; the smallest label wins ties.
            e.dimension_counts
                .iter()
                .fold(None::<(&String, u64)>, |best, (label, &count)| match best {
                    Some((_, c)) if c >= count => best,
                    _ => Some((label, count)),
                }),
        ),
        None => (0, None),
    };
    let top_count = top.map_or(0, |(_, c)| c);
    VariantDimensionStats {
        coverage,
        top_dimension: top.map(|(label, _)| label.clone()),
        top_share: if total_frequency == 0 {
            0.0
        } else {
            top_count as f64 / total_frequency as f64
        },
        top_count,
        total_frequency,
    }
}

/// Computes per-member dimension statistics and removes members seen in
/// fewer than `min_users` dimension values, together with their pairs. A
/// no-op when the corpus has no dimension.
pub fn aggregate_dimensions(family: &mut ScoredFamily, stats: &CorpusStats, min_users: usize) {
    if !stats.dimension_configured() {
        return;
    }
    for member in &mut family.members {
        member.dimension = Some(variant_dimension_stats(stats, &member.token));
    }
    let before = family.members.len();
    family
        .members
        .retain(|m| m.dimension.as_ref().is_some_and(|d| d.coverage >= min_users));
    if family.members.len() != before {
        let keep = |t: &str| family.members.binary_search_by(|m| m.token.as_str().cmp(t)).is_ok();
        let pairs = std::mem::take(&mut family.pairs);
        family.pairs = pairs.into_iter().filter(|p| keep(&p.w) && keep(&p.v)).collect();
    }
}

/// `true` if the family is too small.
pub fn prune_by_min_size(family: &ScoredFamily, snn_min: usize) -> bool {
    family.size() < snn_min
}

/// Max/min member frequency and whether it exceeds `max_freq_ratio`.
pub fn prune_by_frequency_ratio(family: &ScoredFamily, max_freq_ratio: f64) -> (Option<f64>, bool) {
    let max = family.members.iter().map(|m| m.frequency).max();
    let min = family.members.iter().map(|m| m.frequency).min();
    match (max, min) {
        (Some(max), Some(min)) if min > 0 => {
            let ratio = max as f64 / min as f64;
            (Some(ratio), ratio > max_freq_ratio)
        }
        _ => (None, false),
    }
}

/// The full filter pipeline for one family.
pub fn score_and_prune(raw: RawFamily, stats: &CorpusStats, snn_min: usize, config: &ScoringConfig) -> ScoredFamily {
    let mut family = ScoredFamily::from_raw(raw, stats);
    aggregate_dimensions(&mut family, stats, config.min_users);
    if prune_by_min_size(&family, snn_min) {
        family.add_reason(PruneReason::MinSize);
    }
    let (ratio, too_lopsided) = prune_by_frequency_ratio(&family, config.max_freq_ratio);
    family.verdict.freq_ratio = ratio;
    if too_lopsided {
        family.add_reason(PruneReason::MaxFreqRatio);
    }
    family.score = score_pairs(family.size(), &family.pairs);
    family
}

pub fn score_families(
    families: Vec<RawFamily>,
    stats: &CorpusStats,
    snn_min: usize,
    config: &ScoringConfig,
) -> Vec<ScoredFamily> {
    families
        .into_iter()
        .map(|f| score_and_prune(f, stats, snn_min, config))
        .collect()
}
