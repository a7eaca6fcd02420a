use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use super::sgns::pair_loss_and_grad;
use super::store::{init_word_row, NgramTable, SharedMatrix};
use super::{EmbeddingConfig, EmbeddingModel, Vocabulary};
use crate::corpus::{clean_and_tokenize, stream_records, IngestConfig};
use crate::ngram::subword_buckets;
use crate::{Error, Result};

/// A corpus that can be replayed once per epoch.
///
/// Sentences are split into `shards` disjoint parts; a shard is always
/// visited in the same order.
pub trait SentenceSource: Sync {
    fn for_each_sentence(&self, shard: usize, shards: usize, f: &mut dyn FnMut(&[String])) -> Result<()>;
}

/// Pre-tokenised sentences held in memory.
#[derive(Clone, Debug, Default)]
pub struct TokenizedCorpus(pub Vec<Vec<String>>);

impl SentenceSource for TokenizedCorpus {
    fn for_each_sentence(&self, shard: usize, shards: usize, f: &mut dyn FnMut(&[String])) -> Result<()> {
        for sentence in self.0.iter().skip(shard).step_by(shards) {
            f(sentence);
        }
        Ok(())
    }
}

/// A JSONL corpus re-read and re-tokenised on every pass.
#[derive(Clone, Debug)]
pub struct JsonlCorpus {
    pub path: PathBuf,
    pub config: IngestConfig,
}

impl SentenceSource for JsonlCorpus {
    fn for_each_sentence(&self, shard: usize, shards: usize, f: &mut dyn FnMut(&[String])) -> Result<()> {
        let records = stream_records(&self.path, &self.config.text_field, None)?;
        for record in records.skip(shard).step_by(shards) {
            let tokens = clean_and_tokenize(&record?.text, self.config.lowercase);
            f(&tokens);
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    pub vocabulary_size: usize,
    pub stored_ngram_buckets: usize,
    pub tokens_seen: u64,
    pub pairs: u64,
    pub mean_loss: f64,
}

/// Counts tokens in one pass over `source`, then trains.
pub fn train(
    source: &dyn SentenceSource,
    config: &EmbeddingConfig,
    workers: usize,
) -> Result<(EmbeddingModel, TrainingReport)> {
    config.validate()?;
    let mut counts: HashMap<String, u64> = HashMap::new();
    source.for_each_sentence(0, 1, &mut |sentence| {
        for token in sentence {
            *counts.entry(token.clone()).or_default() += 1;
        }
    })?;
    let vocab = Vocabulary::from_counts(counts.iter().map(|(t, &c)| (t.as_str(), c)), config.min_count);
    train_with_vocab(source, vocab, config, workers)
}

/// Skip-gram training with negative sampling over a known vocabulary.
///
/// With `workers == 1` the result is a pure function of the inputs and
/// `config.rng_seed`. More workers update shared parameters without
/// synchronisation and are not reproducible.
pub fn train_with_vocab(
    source: &dyn SentenceSource,
    vocab: Vocabulary,
    config: &EmbeddingConfig,
    workers: usize,
) -> Result<(EmbeddingModel, TrainingReport)> {
    config.validate()?;
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary {
            min_count: config.min_count,
        });
    }
    let workers = workers.max(1);
    let dim = config.vector_size;
    let nwords = vocab.len();

    let subwords: Vec<Vec<u32>> = vocab
        .tokens()
        .iter()
        .map(|t| subword_buckets(t, config.min_n, config.max_n, config.bucket_count))
        .collect();
    let table = NgramTable::initialised(
        config.bucket_count,
        dim,
        config.rng_seed,
        subwords.iter().flatten().copied(),
    );

    // Input matrix: word rows first, then the stored n-gram rows.
    let mut input = vec![0.0f32; nwords * dim];
    for (id, row) in input.chunks_exact_mut(dim).enumerate() {
        init_word_row(config.rng_seed, id as u32, row);
    }
    input.extend_from_slice(table.rows());
    let input_rows: Vec<Vec<usize>> = subwords
        .iter()
        .enumerate()
        .map(|(id, buckets)| {
            std::iter::once(id)
                .chain(buckets.iter().map(|&b| nwords + table.slot(b).expect("bucket stored") as usize))
                .collect()
        })
        .collect();

    let total = vocab.total();
    let keep_probability: Vec<f32> = vocab
        .counts()
        .iter()
        .map(|&c| {
            let ratio = config.subsample_threshold / (c as f64 / total as f64);
            (ratio.sqrt() + ratio) as f32
        })
        .collect();
    let negatives = WeightedAliasIndex::new(vocab.counts().iter().map(|&c| (c as f64).sqrt()).collect())
        .expect("vocabulary counts are positive");

    let shared = Shared {
        config,
        vocab: &vocab,
        input: SharedMatrix::from_vec(input, dim),
        output: SharedMatrix::zeros(nwords, dim),
        input_rows,
        keep_probability,
        negatives,
        processed: AtomicU64::new(0),
        budget: (config.epochs as u64 * total) as f64,
    };

    let stats: Vec<Result<WorkerStats>> = if workers == 1 {
        vec![shared.run_worker(source, 0, 1)]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let shared = &shared;
                    scope.spawn(move || shared.run_worker(source, w, workers))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("training worker panicked")).collect()
        })
    };
    let mut totals = WorkerStats::default();
    for s in stats {
        let s = s?;
        totals.pairs += s.pairs;
        totals.loss += s.loss;
    }

    let tokens_seen = shared.processed.load(Ordering::Relaxed);
    let mut input = shared.input.into_vec();
    let ngram_rows = input.split_off(nwords * dim);
    let buckets = table.stored_buckets().to_vec();
    let mut table = table;
    table.rows_mut().copy_from_slice(&ngram_rows);
    let report = TrainingReport {
        vocabulary_size: nwords,
        stored_ngram_buckets: buckets.len(),
        tokens_seen,
        pairs: totals.pairs,
        mean_loss: if totals.pairs == 0 { 0.0 } else { totals.loss / totals.pairs as f64 },
    };
    Ok((EmbeddingModel::from_parts(config.clone(), vocab, input, table), report))
}

#[derive(Default)]
struct WorkerStats {
    pairs: u64,
    loss: f64,
}

struct Shared<'a> {
    config: &'a EmbeddingConfig,
    vocab: &'a Vocabulary,
    input: SharedMatrix,
    output: SharedMatrix,
    /// Input-matrix rows averaged into each word's representation.
    input_rows: Vec<Vec<usize>>,
    keep_probability: Vec<f32>,
    negatives: WeightedAliasIndex<f64>,
    processed: AtomicU64,
    budget: f64,
}

struct Scratch {
    hidden: Vec<f32>,
    hidden_grad: Vec<f32>,
    targets: Vec<usize>,
    labels: Vec<bool>,
    outputs: Vec<f32>,
    output_grads: Vec<f32>,
}

impl Shared<'_> {
    fn run_worker(&self, source: &dyn SentenceSource, worker: usize, workers: usize) -> Result<WorkerStats> {
        let dim = self.config.vector_size;
        let negatives = self.config.negative_samples;
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.rng_seed ^ 0x5EED_5EED_5EED_5EED);
        rng.set_stream(worker as u64);
        let mut scratch = Scratch {
            hidden: vec![0.0; dim],
            hidden_grad: vec![0.0; dim],
            targets: vec![0; negatives + 1],
            labels: std::iter::once(true).chain(std::iter::repeat_n(false, negatives)).collect(),
            outputs: vec![0.0; (negatives + 1) * dim],
            output_grads: vec![0.0; (negatives + 1) * dim],
        };
        let mut stats = WorkerStats::default();
        let mut ids: Vec<usize> = Vec::new();
        for _ in 0..self.config.epochs {
            source.for_each_sentence(worker, workers, &mut |sentence| {
                ids.clear();
                let mut read = 0u64;
                for token in sentence {
                    if let Some(id) = self.vocab.id(token) {
                        read += 1;
                        if rng.random::<f32>() < self.keep_probability[id as usize] {
                            ids.push(id as usize);
                        }
                    }
                }
                let done = self.processed.fetch_add(read, Ordering::Relaxed) + read;
                let progress = (done as f64 / self.budget).min(1.0);
                let lr = self.config.initial_learning_rate * (1.0 - progress) as f32;
                for center in 0..ids.len() {
                    let reach = rng.random_range(1..=self.config.window);
                    let lo = center.saturating_sub(reach);
                    let hi = (center + reach).min(ids.len() - 1);
                    for context in lo..=hi {
                        if context != center {
                            stats.loss += f64::from(self.update(ids[center], ids[context], lr, &mut rng, &mut scratch));
                            stats.pairs += 1;
                        }
                    }
                }
            })?;
        }
        Ok(stats)
    }

    /// One gradient step for the pair (center, context). Every input row of
    /// the center receives the full hidden-layer gradient, as in fastText's
    /// unsupervised models.
    fn update(&self, center: usize, context: usize, lr: f32, rng: &mut ChaCha8Rng, s: &mut Scratch) -> f32 {
        let dim = self.config.vector_size;
        let rows = &self.input_rows[center];
        s.hidden.iter_mut().for_each(|x| *x = 0.0);
        for &r in rows {
            self.input.accumulate_row(r, &mut s.hidden);
        }
        let scale = 1.0 / rows.len() as f32;
        s.hidden.iter_mut().for_each(|x| *x *= scale);

        s.targets[0] = context;
        for slot in 1..s.targets.len() {
            s.targets[slot] = loop {
                let negative = self.negatives.sample(rng);
                if negative != context {
                    break negative;
                }
            };
        }
        for (&t, row) in s.targets.iter().zip(s.outputs.chunks_exact_mut(dim)) {
            self.output.load_row(t, row);
        }
        let loss = pair_loss_and_grad(&s.hidden, &s.outputs, &s.labels, &mut s.hidden_grad, &mut s.output_grads);
        for (&t, grad) in s.targets.iter().zip(s.output_grads.chunks_exact(dim)) {
            self.output.add_to_row(t, grad, -lr);
        }
        for &r in rows {
            self.input.add_to_row(r, &s.hidden_grad, -lr);
        }
        loss
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::cosine_of;

    fn toy_corpus() -> TokenizedCorpus {
        // "ech ginn X" templates with X in {muer, muar}, interleaved with a
        // control token that lives in different contexts.
        let mut sentences = Vec::new();
        for i in 0..500 {
            let slot = if i % 2 == 0 { "muer" } else { "muar" };
            sentences.push(format!("ech ginn {slot} heem"));
            sentences.push(format!("mir kommen {slot} zréck"));
            sentences.push("d'kaz leit op der fënster".to_owned());
            sentences.push("hien drénkt e gudde kaffi".to_owned());
        }
        TokenizedCorpus(sentences.iter().map(|s| s.split(' ').map(str::to_owned).collect()).collect())
    }

    fn small_config() -> EmbeddingConfig {
        EmbeddingConfig {
            vector_size: 20,
            epochs: 5,
            bucket_count: 50_000,
            rng_seed: 3,
            ..EmbeddingConfig::default()
        }
    }

    #[test]
    fn shared_contexts_give_higher_cosine() {
        let (model, report) = train(&toy_corpus(), &small_config(), 1).unwrap();
        assert!(report.pairs > 0 && report.mean_loss.is_finite());
        let variant = model.cosine("muer", "muar").unwrap();
        let control = model.cosine("muer", "kaffi").unwrap();
        assert!(variant > control, "variant {variant} control {control}");
        for token in model.vocabulary().tokens() {
            let v = model.word_vector(token);
            let norm = cosine_of(&v, &v).map(|_| v.iter().map(|x| x * x).sum::<f32>().sqrt());
            let norm = norm.expect("non-zero vector");
            assert!(norm.is_finite() && norm < 1e3, "{token}: {norm}");
        }
    }

    #[test]
    fn single_worker_training_is_reproducible() {
        let (a, _) = train(&toy_corpus(), &small_config(), 1).unwrap();
        let (b, _) = train(&toy_corpus(), &small_config(), 1).unwrap();
        assert_eq!(a.word_vectors(), b.word_vectors());
        assert_eq!(a.ngram_table(), b.ngram_table());
    }

    #[test]
    fn parallel_training_produces_finite_vectors() {
        let (model, _) = train(&toy_corpus(), &small_config(), 3).unwrap();
        assert!(model.word_vectors().iter().all(|x| x.is_finite()));
    }

    #[test]
    fn empty_vocabulary_and_bad_config_are_rejected() {
        let corpus = TokenizedCorpus(vec![vec!["rare".into()]]);
        assert!(matches!(
            train(&corpus, &EmbeddingConfig::default(), 1),
            Err(Error::EmptyVocabulary { min_count: 10 })
        ));
        let config = EmbeddingConfig {
            epochs: 0,
            ..EmbeddingConfig::default()
        };
        assert!(matches!(train(&corpus, &config, 1), Err(Error::Config { key, .. }) if key == "epochs"));
    }
}
