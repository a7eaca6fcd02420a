//! Skip-gram embeddings with hashed character n-gram subwords.
//!
//! A token's input representation is the average of its word vector and the
//! vectors of the buckets its n-grams hash to. Out-of-vocabulary tokens are
//! represented by their n-gram buckets alone.

mod config;
mod io;
mod model;
pub mod sgns;
mod space;
mod store;
mod train;
mod vocab;

pub use config::EmbeddingConfig;
pub use model::EmbeddingModel;
pub use space::{cosine_of, TokenSpace};
pub use store::NgramTable;
pub use train::{train, train_with_vocab, JsonlCorpus, SentenceSource, TokenizedCorpus, TrainingReport};
pub use vocab::Vocabulary;
