//! Streaming JSONL ingestion, minimal cleaning and token statistics.
//!
//! Each corpus line is one JSON object holding the configured text field and,
//! optionally, a dimension field (user id, date, domain...). Lines that cannot
//! be used are skipped and tallied instead of aborting the run.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestConfig {
    pub text_field: String,
    /// Field holding the comparison dimension; `None` disables aggregation.
    pub dimension: Option<String>,
    pub lowercase: bool,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            text_field: "text".to_owned(),
            dimension: Some("user_id".to_owned()),
            lowercase: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusRecord {
    pub record_id: u64,
    pub text: String,
    /// Opaque label; never parsed.
    pub dimension: Option<String>,
}

/// Tallies of corpus lines that did not produce a record.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipCounts {
    /// Not valid UTF-8, not JSON, or not a JSON object.
    pub malformed: u64,
    /// Text field absent or not a string.
    pub missing_text: u64,
    pub blank: u64,
}

impl SkipCounts {
    pub fn total(&self) -> u64 {
        self.malformed + self.missing_text + self.blank
    }
}

/// Iterator over the records of a JSONL file, in file order.
///
/// Only one line is held in memory at a time. Skipped lines are counted in
/// [`RecordStream::skipped`].
pub struct RecordStream {
    path: PathBuf,
    reader: BufReader<File>,
    text_field: String,
    dimension_field: Option<String>,
    line: Vec<u8>,
    line_no: usize,
    next_id: u64,
    skipped: SkipCounts,
}

/// Opens `path` for streaming. Fails only if the file cannot be opened.
pub fn stream_records(
    path: impl AsRef<Path>,
    text_field: &str,
    dimension_field: Option<&str>,
) -> Result<RecordStream> {
    let path = path.as_ref().to_path_buf();
    let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
    Ok(RecordStream {
        path,
        reader: BufReader::with_capacity(1 << 16, file),
        text_field: text_field.to_owned(),
        dimension_field: dimension_field.map(str::to_owned),
        line: Vec::new(),
        line_no: 0,
        next_id: 0,
        skipped: SkipCounts::default(),
    })
}

impl RecordStream {
    pub fn skipped(&self) -> SkipCounts {
        self.skipped
    }

    fn parse_line(&mut self) -> Option<CorpusRecord> {
        let Ok(text) = std::str::from_utf8(&self.line) else {
            self.skipped.malformed += 1;
            return None;
        };
        if text.trim().is_empty() {
            self.skipped.blank += 1;
            return None;
        }
        let Ok(Value::Object(mut object)) = serde_json::from_str::<Value>(text) else {
            self.skipped.malformed += 1;
            return None;
        };
        let Some(Value::String(body)) = object.remove(&self.text_field) else {
            self.skipped.missing_text += 1;
            return None;
        };
        let dimension = self
            .dimension_field
            .as_ref()
            .and_then(|field| object.remove(field))
            .and_then(dimension_label);
        let record = CorpusRecord {
            record_id: self.next_id,
            text: body,
            dimension,
        };
        self.next_id += 1;
        Some(record)
    }
}

/// Strings are taken verbatim; numbers and booleans by their JSON text.
fn dimension_label(value: Value) -> Option<String> {
    match value {
        Value::String(s) => Some(s),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Null | Value::Array(_) | Value::Object(_) => None,
    }
}

impl Iterator for RecordStream {
    type Item = Result<CorpusRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.line.clear();
            match self.reader.read_until(b'\n', &mut self.line) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => {
                    return Some(Err(Error::Parse {
                        path: self.path.clone(),
                        line: self.line_no + 1,
                        message: e.to_string(),
                    }))
                }
            }
            self.line_no += 1;
            if let Some(record) = self.parse_line() {
                return Some(Ok(record));
            }
        }
    }
}

enum Chunk {
    Token(String),
    Mention,
    NoAlphanumeric,
}

fn scan_chunks(text: &str, lowercase: bool, mut f: impl FnMut(Chunk)) {
    for chunk in text.split_whitespace() {
        if chunk.starts_with('@') {
            f(Chunk::Mention);
            continue;
        }
        let folded;
        let chunk = if lowercase {
            folded = chunk.to_lowercase();
            folded.as_str()
        } else {
            chunk
        };
        // Edge characters that are not letters or digits go, including edge
        // apostrophes; word-internal apostrophes and hyphens stay.
        let trimmed = chunk.trim_matches(|c: char| !c.is_alphanumeric());
        if trimmed.is_empty() {
            f(Chunk::NoAlphanumeric);
        } else {
            f(Chunk::Token(trimmed.to_owned()));
        }
    }
}

/// Splits `text` on Unicode whitespace into cleaned tokens, in surface order.
///
/// Chunks starting with `@` are mentions and are dropped whole. Punctuation
/// is stripped from both ends of every other chunk, so `d'Zukunft!` yields
/// `d'Zukunft`. Chunks without any letter or digit disappear.
pub fn clean_and_tokenize(text: &str, lowercase: bool) -> Vec<String> {
    let mut tokens = Vec::new();
    scan_chunks(text, lowercase, |chunk| {
        if let Chunk::Token(t) = chunk {
            tokens.push(t);
        }
    });
    tokens
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenStats {
    pub corpus_frequency: u64,
    pub document_frequency: u64,
    /// Occurrences per dimension label. Occurrences in records without a
    /// dimension value are counted in `corpus_frequency` only.
    pub dimension_counts: BTreeMap<String, u64>,
}

/// Everything ingestion learns about a corpus.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub config: IngestConfig,
    pub records: u64,
    pub records_with_dimension: u64,
    pub skipped: SkipCounts,
    pub token_total: u64,
    pub mentions_dropped: u64,
    /// Whitespace chunks with no letter or digit (punctuation, most emoji).
    pub non_alphanumeric_dropped: u64,
    pub tokens: BTreeMap<String, TokenStats>,
}

impl CorpusStats {
    pub fn dimension_configured(&self) -> bool {
        self.config.dimension.is_some()
    }

    pub fn get(&self, token: &str) -> Option<&TokenStats> {
        self.tokens.get(token)
    }

    pub fn frequency(&self, token: &str) -> u64 {
        self.tokens.get(token).map_or(0, |t| t.corpus_frequency)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        crate::artifact::write_atomic(path, |w| {
            serde_json::to_writer(&mut *w, self).map_err(std::io::Error::other)?;
            w.write_all(b"\n")
        })
    }

    pub fn read_json(path: &Path) -> Result<CorpusStats> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })
    }
}

/// Accumulates exact per-token statistics over `records`.
pub fn collect_stats<I>(records: I, config: &IngestConfig) -> Result<CorpusStats>
where
    I: IntoIterator<Item = Result<CorpusRecord>>,
{
    let mut stats = CorpusStats {
        config: config.clone(),
        ..CorpusStats::default()
    };
    let mut seen = HashSet::new();
    for record in records {
        let record = record?;
        stats.records += 1;
        let dimension = if config.dimension.is_some() {
            record.dimension.as_deref()
        } else {
            None
        };
        if dimension.is_some() {
            stats.records_with_dimension += 1;
        }
        seen.clear();
        scan_chunks(&record.text, config.lowercase, |chunk| match chunk {
            Chunk::Mention => stats.mentions_dropped += 1,
            Chunk::NoAlphanumeric => stats.non_alphanumeric_dropped += 1,
            Chunk::Token(token) => {
                stats.token_total += 1;
                let first_in_record = !seen.contains(&token);
                let entry = match stats.tokens.get_mut(&token) {
                    Some(entry) => entry,
                    None => stats.tokens.entry(token.clone()).or_default(),
                };
                entry.corpus_frequency += 1;
                if first_in_record {
                    entry.document_frequency += 1;
                }
                if let Some(label) = dimension {
                    match entry.dimension_counts.get_mut(label) {
                        Some(count) => *count += 1,
                        None => {
                            entry.dimension_counts.insert(label.to_owned(), 1);
                        }
                    }
                }
                if first_in_record {
                    seen.insert(token);
                }
            }
        });
    }
    Ok(stats)
}

/// Streams `path` and collects statistics in one pass.
pub fn ingest_file(path: &Path, config: &IngestConfig) -> Result<CorpusStats> {
    let mut stream = stream_records(path, &config.text_field, config.dimension.as_deref())?;
    let mut stats = collect_stats(stream.by_ref(), config)?;
    stats.skipped = stream.skipped();
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use std::io::Write;

    use proptest::prelude::*;

    use super::*;

    fn corpus(lines: &[&str]) -> tempfile::NamedTempFile {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        for line in lines {
            writeln!(file, "{line}").unwrap();
        }
        file
    }

    #[test]
    fn extracts_text_and_dimension() {
        let file = corpus(&[r#"{"text":"moien alleguer","user_id":"u1"}"#]);
        let records: Vec<_> = stream_records(file.path(), "text", Some("user_id"))
            .unwrap()
            .collect::<Result<_>>()
            .unwrap();
        assert_eq!(
            records,
            vec![CorpusRecord {
                record_id: 0,
                text: "moien alleguer".into(),
                dimension: Some("u1".into()),
            }]
        );
    }

    #[test]
    fn missing_text_field_is_skipped() {
        let file = corpus(&[r#"{"body":"x"}"#]);
        let mut stream = stream_records(file.path(), "text", None).unwrap();
        assert!(stream.next().is_none());
        assert_eq!(stream.skipped().missing_text, 1);
        assert_eq!(stream.skipped().total(), 1);
    }

    #[test]
    fn malformed_line_is_skipped_and_counted() {
        let file = corpus(&[
            r#"{"text":"a"}"#,
            r#"{"text": oops"#,
            r#"{"text":"b","user_id":"u2"}"#,
        ]);
        let mut stream = stream_records(file.path(), "text", Some("user_id")).unwrap();
        let records: Vec<_> = stream.by_ref().collect::<Result<_>>().unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].dimension, None);
        assert_eq!(records[1].record_id, 1);
        assert_eq!(stream.skipped().malformed, 1);
        assert_eq!(stream.skipped().total(), 1);
    }

    #[test]
    fn numeric_dimension_is_an_opaque_label() {
        let file = corpus(&[r#"{"text":"a","user_id":17}"#]);
        let record = stream_records(file.path(), "text", Some("user_id"))
            .unwrap()
            .next()
            .unwrap()
            .unwrap();
        assert_eq!(record.dimension.as_deref(), Some("17"));
    }

    #[test]
    fn unreadable_file_is_fatal() {
        assert!(matches!(
            stream_records("/nonexistent/corpus.jsonl", "text", None),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn tokenizer_drops_mentions_and_keeps_internal_apostrophes() {
        assert_eq!(
            clean_and_tokenize("@max Moien d'Zukunft!", true),
            vec!["moien", "d'zukunft"]
        );
        assert!(clean_and_tokenize("", true).is_empty());
        assert_eq!(clean_and_tokenize("Zäit, Zeit.", true), vec!["zäit", "zeit"]);
        assert_eq!(clean_and_tokenize("Zäit, Zeit.", false), vec!["Zäit", "Zeit"]);
    }

    #[test]
    fn tokenizer_edge_cases() {
        assert_eq!(clean_and_tokenize("« bla-bla » ... 'ok' 😀 !!", true), vec!["bla-bla", "ok"]);
        assert_eq!(clean_and_tokenize("mail@host (@not) 2024", true), vec!["mail@host", "not", "2024"]);
    }

    #[test]
    fn counts_tokens_per_dimension() {
        let records = vec![
            ("mat mat", Some("u1")),
            ("mat", Some("u1")),
            ("mat", Some("u2")),
            ("mat", None),
        ];
        let records = records.into_iter().enumerate().map(|(i, (t, d))| {
            Ok(CorpusRecord {
                record_id: i as u64,
                text: t.into(),
                dimension: d.map(Into::into),
            })
        });
        let stats = collect_stats(records, &IngestConfig::default()).unwrap();
        let mat = stats.get("mat").unwrap();
        assert_eq!(mat.corpus_frequency, 5);
        assert_eq!(mat.document_frequency, 4);
        assert_eq!(mat.dimension_counts, BTreeMap::from([("u1".into(), 3), ("u2".into(), 1)]));
        assert!(stats.get("matt").is_none());
        assert_eq!(stats.records_with_dimension, 3);
    }

    #[test]
    fn dimension_counts_ignored_without_configured_dimension() {
        let config = IngestConfig {
            dimension: None,
            ..IngestConfig::default()
        };
        let records = std::iter::once(Ok(CorpusRecord {
            record_id: 0,
            text: "mat".into(),
            dimension: Some("u1".into()),
        }));
        let stats = collect_stats(records, &config).unwrap();
        assert!(stats.get("mat").unwrap().dimension_counts.is_empty());
    }

    #[test]
    fn ingest_file_is_deterministic() {
        let file = corpus(&[
            r#"{"text":"@a Moien, moien! wéi geet et","user_id":"u1"}"#,
            r#"not json"#,
            r#"{"text":"Moien","user_id":"u2"}"#,
        ]);
        let a = ingest_file(file.path(), &IngestConfig::default()).unwrap();
        let b = ingest_file(file.path(), &IngestConfig::default()).unwrap();
        assert_eq!(serde_json::to_vec(&a).unwrap(), serde_json::to_vec(&b).unwrap());
        assert_eq!(a.skipped.malformed, 1);
        assert_eq!(a.mentions_dropped, 1);
        assert_eq!(a.frequency("moien"), 3);
    }

    proptest! {
        #[test]
        fn tokenizer_invariants(text in "[@a-zäéë' ,.!?()-]{0,60}") {
            let tokens = clean_and_tokenize(&text, true);
            for token in &tokens {
                prop_assert!(!token.starts_with('@'));
                prop_assert!(token.chars().any(char::is_alphanumeric));
                prop_assert_eq!(clean_and_tokenize(token, true), vec![token.clone()]);
            }
        }

        #[test]
        fn frequency_bounds(texts in proptest::collection::vec("[ab ]{0,12}", 0..20)) {
            let records = texts.iter().enumerate().map(|(i, t)| Ok(CorpusRecord {
                record_id: i as u64,
                text: t.clone(),
                dimension: Some(format!("u{}", i % 3)),
            }));
            let stats = collect_stats(records, &IngestConfig::default()).unwrap();
            for entry in stats.tokens.values() {
                prop_assert!(entry.corpus_frequency >= entry.document_frequency);
                prop_assert!(entry.document_frequency >= 1);
                prop_assert_eq!(entry.corpus_frequency, entry.dimension_counts.values().sum::<u64>());
            }
        }
    }
}
