use std::sync::OnceLock;

use super::space::{cosine_of, TokenSpace};
use super::{EmbeddingConfig, NgramTable, Vocabulary};
use crate::ngram::subword_buckets;
use crate::{Error, Result};

/// Trained subword embedding model. Immutable; safe to share across threads.
#[derive(Debug)]
pub struct EmbeddingModel {
    config: EmbeddingConfig,
    vocab: Vocabulary,
    word_vectors: Vec<f32>,
    ngrams: NgramTable,
    subwords: Vec<Vec<u32>>,
    vocab_space: OnceLock<TokenSpace>,
}

impl EmbeddingModel {
    /// Assembles a model from its parameters.
    ///
    /// `word_vectors` holds one row per vocabulary entry.
    pub fn from_parts(
        config: EmbeddingConfig,
        vocab: Vocabulary,
        word_vectors: Vec<f32>,
        ngrams: NgramTable,
    ) -> EmbeddingModel {
        assert_eq!(word_vectors.len(), vocab.len() * config.vector_size);
        assert_eq!(ngrams.bucket_count(), config.bucket_count);
        let subwords = vocab
            .tokens()
            .iter()
            .map(|t| subword_buckets(t, config.min_n, config.max_n, config.bucket_count))
            .collect();
        EmbeddingModel {
            config,
            vocab,
            word_vectors,
            ngrams,
            subwords,
            vocab_space: OnceLock::new(),
        }
    }

    pub fn config(&self) -> &EmbeddingConfig {
        &self.config
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.config.vector_size
    }

    pub(crate) fn word_row(&self, id: u32) -> &[f32] {
        let dim = self.dim();
        &self.word_vectors[id as usize * dim..(id as usize + 1) * dim]
    }

    pub(crate) fn word_vectors(&self) -> &[f32] {
        &self.word_vectors
    }

    pub fn ngram_table(&self) -> &NgramTable {
        &self.ngrams
    }

    /// Composed vector of `token`: the average of its word vector (if in the
    /// vocabulary) and the vectors of all its n-gram buckets.
    ///
    /// A token that is unknown and too short to have any n-gram gets the
    /// zero vector.
    pub fn word_vector(&self, token: &str) -> Vec<f32> {
        let dim = self.dim();
        let mut out = vec![0.0f32; dim];
        let id = self.vocab.id(token);
        let computed;
        let buckets: &[u32] = match id {
            Some(id) => &self.subwords[id as usize],
            None => {
                computed = subword_buckets(token, self.config.min_n, self.config.max_n, self.config.bucket_count);
                &computed
            }
        };
        let mut parts = buckets.len();
        if let Some(id) = id {
            parts += 1;
            add(&mut out, self.word_row(id));
        }
        for &bucket in buckets {
            add(&mut out, &self.ngrams.row(bucket));
        }
        if parts == 0 {
            log::warn!("`{token}` is out of vocabulary and has no n-grams; using the zero vector");
            return out;
        }
        let scale = 1.0 / parts as f32;
        out.iter_mut().for_each(|x| *x *= scale);
        out
    }

    pub fn cosine(&self, w: &str, v: &str) -> Result<f64> {
        let a = self.word_vector(w);
        let b = self.word_vector(v);
        cosine_of(&a, &b).ok_or_else(|| Error::UndefinedSimilarity {
            token: if a.iter().all(|&x| x == 0.0) { w } else { v }.to_owned(),
        })
    }

    /// Composed vectors for `tokens`, in the given order.
    pub fn space_for(&self, tokens: &[String]) -> TokenSpace {
        let dim = self.dim();
        let mut vectors = Vec::with_capacity(tokens.len() * dim);
        for token in tokens {
            vectors.extend(self.word_vector(token));
        }
        TokenSpace::new(tokens.to_vec(), vectors, dim)
    }

    /// The whole vocabulary as a [`TokenSpace`], built on first use.
    pub fn vocabulary_space(&self) -> &TokenSpace {
        self.vocab_space.get_or_init(|| self.space_for(self.vocab.tokens()))
    }

    /// The `n` in-vocabulary tokens closest to `w` (which need not be in the
    /// vocabulary), excluding `w`. Ties go to the lexicographically smaller
    /// token.
    pub fn top_neighbors(&self, w: &str, n: usize) -> Result<Vec<(String, f64)>> {
        if n == 0 {
            return Ok(Vec::new());
        }
        let space = self.vocabulary_space();
        let query = self.word_vector(w);
        if query.iter().all(|&x| x == 0.0) {
            return Err(Error::UndefinedSimilarity { token: w.to_owned() });
        }
        if let Some(i) = space.index_of(w) {
            return Ok(space
                .top_neighbors(i, n)
                .into_iter()
                .map(|(j, c)| (space.token(j).to_owned(), c))
                .collect());
        }
        let mut scored: Vec<(String, f64)> = (0..space.len())
            .filter_map(|j| cosine_of(&query, space.vector(j)).map(|c| (space.token(j).to_owned(), c)))
            .collect();
        scored.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        scored.truncate(n);
        Ok(scored)
    }
}

fn add(acc: &mut [f32], row: &[f32]) {
    for (a, &r) in acc.iter_mut().zip(row) {
        *a += r;
    }
}
