use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use super::{format_float, write_atomic};
use crate::score::ScoredFamily;
use crate::Result;

pub const SUMMARY_HEADER: [&str; 13] = [
    "family_id",
    "size",
    "mean_cosine",
    "mean_jaccard",
    "cohesion",
    "members",
    "min_freq",
    "max_freq",
    "freq_ratio",
    "min_coverage",
    "top_dimension_mode",
    "pruned",
    "prune_reason",
];

/// Most frequent top dimension among the members; the smallest label wins
/// ties.
fn top_dimension_mode(family: &ScoredFamily) -> Option<String> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for m in &family.members {
        if let Some(top) = m.dimension.as_ref().and_then(|d| d.top_dimension.as_deref()) {
            *counts.entry(top).or_default() += 1;
        }
    }
    let mut best: Option<(&str, usize)> = None;
    for (label, n) in counts {
        if best.is_none_or(|(_, b)| n > b) {
            best = Some((label, n));
        }
    }
    best.map(|(label, _)| label.to_owned())
}

fn row(family: &ScoredFamily) -> Vec<String> {
    let opt = |x: Option<f64>| x.map(format_float).unwrap_or_default();
    let freqs = family.members.iter().map(|m| m.frequency);
    let min_coverage = family
        .members
        .iter()
        .filter_map(|m| m.dimension.as_ref().map(|d| d.coverage))
        .min();
    vec![
        family.family_id.clone(),
        family.size().to_string(),
        opt(family.score.map(|s| s.mean_cosine)),
        opt(family.score.map(|s| s.mean_jaccard)),
        opt(family.score.map(|s| s.cohesion)),
        family.members.iter().map(|m| m.token.as_str()).collect::<Vec<_>>().join("|"),
        freqs.clone().min().map(|f| f.to_string()).unwrap_or_default(),
        freqs.max().map(|f| f.to_string()).unwrap_or_default(),
        opt(family.verdict.freq_ratio),
        min_coverage.map(|c| c.to_string()).unwrap_or_default(),
        top_dimension_mode(family).unwrap_or_default(),
        family.verdict.pruned().to_string(),
        family.verdict.reasons.iter().map(|r| r.code()).collect::<Vec<_>>().join("|"),
    ]
}

/// Writes one row per family, pruned ones included, sorted by `family_id`.
/// Returns the number of rows.
pub fn write_summary_csv(families: &[ScoredFamily], path: &Path) -> Result<usize> {
    let mut sorted: Vec<&ScoredFamily> = families.iter().collect();
    sorted.sort_by(|a, b| a.family_id.cmp(&b.family_id));
    write_atomic(path, |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(SUMMARY_HEADER).map_err(io::Error::other)?;
        for family in &sorted {
            csv.write_record(row(family)).map_err(io::Error::other)?;
        }
        csv.flush()
    })?;
    Ok(sorted.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::induce::Mode;
    use crate::score::{Member, PruneReason, Verdict};

    fn family(id: &str, tokens: &[&str]) -> ScoredFamily {
        ScoredFamily {
            family_id: id.into(),
            mode: Mode::Strict,
            seed: None,
            members: tokens
                .iter()
                .map(|t| Member {
                    token: t.to_string(),
                    frequency: 10,
                    dimension: None,
                })
                .collect(),
            pairs: vec![],
            score: None,
            verdict: Verdict::default(),
        }
    }

    #[test]
    fn header_only_when_empty() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        assert_eq!(write_summary_csv(&[], &path).unwrap(), 0);
        assert_eq!(std::fs::read_to_string(&path).unwrap(), SUMMARY_HEADER.join(",") + "\n");
    }

    #[test]
    fn members_joined_and_commas_quoted() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let mut pruned = family("b", &["x,y", "xy"]);
        pruned.verdict.reasons = vec![PruneReason::MinSize, PruneReason::MaxFreqRatio];
        write_summary_csv(&[pruned, family("a", &["maat", "mat", "matt"])], &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("a,3,,,,maat|mat|matt,10,10,"));
        assert!(lines[2].contains(",\"x,y|xy\","));
        assert!(lines[2].ends_with(",true,min_size|max_freq_ratio"));
    }
}
