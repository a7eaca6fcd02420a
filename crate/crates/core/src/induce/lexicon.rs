use super::jaccard::jaccard_of_sets;
use super::VariantPair;
use crate::corpus::CorpusStats;
use crate::embed::{EmbeddingModel, TokenSpace};
use crate::ngram::ngram_set;
use crate::{Error, Result};

/// Tokens eligible for families: frequent enough, long enough (in
/// characters) and known to the embedding model. Sorted.
pub fn candidate_lexicon(
    stats: &CorpusStats,
    model: &EmbeddingModel,
    min_count: u64,
    min_len: usize,
) -> Result<Vec<String>> {
    // BTreeMap iteration is already sorted.
    let lexicon: Vec<String> = stats
        .tokens
        .iter()
        .filter(|(token, entry)| {
            entry.corpus_frequency >= min_count
                && token.chars().count() >= min_len
                && model.vocabulary().id(token).is_some()
        })
        .map(|(token, _)| token.clone())
        .collect();
    if lexicon.is_empty() {
        return Err(Error::EmptyLexicon { min_count, min_len });
    }
    Ok(lexicon)
}

/// The candidate lexicon with composed vectors and n-gram sets, indexed in
/// sorted token order.
#[derive(Clone, Debug)]
pub struct CandidateSpace {
    space: TokenSpace,
    grams: Vec<Vec<String>>,
}

impl CandidateSpace {
    /// `space` tokens must be sorted ascending.
    pub fn new(space: TokenSpace, min_n: usize, max_n: usize) -> CandidateSpace {
        assert!(
            space.tokens().windows(2).all(|w| w[0] < w[1]),
            "candidate tokens must be sorted and distinct"
        );
        let grams = space.tokens().iter().map(|t| ngram_set(t, min_n, max_n)).collect();
        CandidateSpace { space, grams }
    }

    pub fn from_model(model: &EmbeddingModel, lexicon: &[String]) -> CandidateSpace {
        let config = model.config();
        Self::new(model.space_for(lexicon), config.min_n, config.max_n)
    }

    pub fn space(&self) -> &TokenSpace {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    pub fn token(&self, i: usize) -> &str {
        self.space.token(i)
    }

    pub fn jaccard(&self, i: usize, j: usize) -> f64 {
        jaccard_of_sets(&self.grams[i], &self.grams[j])
    }

    /// Both scores for `(i, j)`, canonically ordered, not marked as an edge.
    /// `None` when the cosine is undefined.
    pub fn pair(&self, i: usize, j: usize) -> Option<VariantPair> {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        Some(VariantPair {
            w: self.token(a).to_owned(),
            v: self.token(b).to_owned(),
            cosine: self.space.cosine(a, b)?,
            jaccard: self.jaccard(a, b),
            is_edge: false,
        })
    }

    /// All unordered pairs among `members` (indices in ascending order),
    /// with `is_edge` set where `edge(a, b)` holds.
    pub(crate) fn all_pairs(&self, members: &[usize], edge: impl Fn(usize, usize) -> bool) -> Vec<VariantPair> {
        let mut pairs = Vec::with_capacity(members.len() * members.len().saturating_sub(1) / 2);
        for (x, &a) in members.iter().enumerate() {
            for &b in &members[x + 1..] {
                let mut pair = self.pair(a, b).unwrap_or_else(|| VariantPair {
                    w: self.token(a).to_owned(),
                    v: self.token(b).to_owned(),
                    cosine: 0.0,
                    jaccard: self.jaccard(a, b),
                    is_edge: false,
                });
                pair.is_edge = edge(a, b);
                pairs.push(pair);
            }
        }
        pairs
    }
}
