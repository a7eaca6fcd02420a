use std::collections::HashMap;

/// Embedding vocabulary: tokens at or above `min_count`, ordered by
/// descending frequency and then by token.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    pub fn from_counts<'a, I>(counts: I, min_count: u64) -> Vocabulary
    where
        I: IntoIterator<Item = (&'a str, u64)>,
    {
        let mut kept: Vec<(&str, u64)> = counts.into_iter().filter(|&(_, c)| c >= min_count).collect();
        kept.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        Self::from_entries(kept.into_iter().map(|(t, c)| (t.to_owned(), c)).collect())
    }

    /// Entries are used in the given order.
    pub(crate) fn from_entries(entries: Vec<(String, u64)>) -> Vocabulary {
        let mut vocab = Vocabulary::default();
        for (i, (token, count)) in entries.into_iter().enumerate() {
            vocab.index.insert(token.clone(), i as u32);
            vocab.tokens.push(token);
            vocab.counts.push(count);
        }
        vocab
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: u32) -> &str {
        &self.tokens[id as usize]
    }

    pub fn count(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}
