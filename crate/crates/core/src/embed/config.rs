use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingConfig {
    pub vector_size: usize,
    pub window: usize,
    pub min_count: u64,
    pub epochs: usize,
    /// Skip-gram flag; only skip-gram (1) is implemented.
    pub sg: u8,
    pub min_n: usize,
    pub max_n: usize,
    pub bucket_count: u32,
    pub negative_samples: usize,
    pub initial_learning_rate: f32,
    pub subsample_threshold: f64,
    pub rng_seed: u64,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig {
            vector_size: 100,
            window: 5,
            min_count: 10,
            epochs: 10,
            sg: 1,
            min_n: 3,
            max_n: 7,
            bucket_count: 2_000_000,
            negative_samples: 5,
            initial_learning_rate: 0.05,
            subsample_threshold: 1e-4,
            rng_seed: 0,
        }
    }
}

impl EmbeddingConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("vector_size", self.vector_size),
            ("window", self.window),
            ("epochs", self.epochs),
            ("min_n", self.min_n),
            ("negative_samples", self.negative_samples),
        ];
        for (key, value) in positive {
            if value == 0 {
                return Err(Error::config(key, "must be at least 1"));
            }
        }
        if self.min_count == 0 {
            return Err(Error::config("min_count", "must be at least 1"));
        }
        if self.sg != 1 {
            return Err(Error::config("sg", "only skip-gram (sg = 1) is supported"));
        }
        if self.max_n < self.min_n {
            return Err(Error::config("max_n", "must be at least min_n"));
        }
        if self.bucket_count == 0 {
            return Err(Error::config("bucket_count", "must be at least 1"));
        }
        if !(self.initial_learning_rate.is_finite() && self.initial_learning_rate > 0.0) {
            return Err(Error::config("initial_learning_rate", "must be a positive number"));
        }
        if !(self.subsample_threshold.is_finite() && self.subsample_threshold > 0.0) {
            return Err(Error::config("subsample_threshold", "must be a positive number"));
        }
        Ok(())
    }
}
