use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::IngestConfig;
use crate::embed::EmbeddingConfig;
use crate::induce::{InductionConfig, Mode};
use crate::score::ScoringConfig;
use crate::{Error, Result};

/// The on-disk configuration: one flat JSON object.
///
/// Capitalised keys such as `SNN_MIN` are also accepted in lowercase.
/// Missing keys take their defaults; unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub text_field: String,
    pub lowercase: bool,
    pub dimension: Option<String>,

    pub vector_size: usize,
    pub window: usize,
    pub min_count: u64,
    pub epochs: usize,
    pub sg: u8,
    pub min_n: usize,
    pub max_n: usize,
    pub bucket_count: u32,
    pub negative_samples: usize,
    pub initial_learning_rate: f32,
    pub subsample_threshold: f64,

    #[serde(rename = "open_TOPN", alias = "open_topn")]
    pub open_topn: usize,
    #[serde(rename = "open_TH", alias = "open_th")]
    pub open_th: f64,
    #[serde(rename = "strict_TOPN", alias = "strict_topn")]
    pub strict_topn: usize,
    #[serde(rename = "strict_TH", alias = "strict_th")]
    pub strict_th: f64,
    #[serde(rename = "SNN_MIN", alias = "snn_min")]
    pub snn_min: usize,
    #[serde(rename = "DEGREE_CAP", alias = "degree_cap")]
    pub degree_cap: usize,
    #[serde(rename = "MIN_LEN", alias = "min_len")]
    pub min_len: usize,
    pub jaccard_th: f64,

    #[serde(rename = "MIN_USERS", alias = "min_users")]
    pub min_users: usize,
    #[serde(rename = "MAX_FREQ_RATIO", alias = "max_freq_ratio")]
    pub max_freq_ratio: f64,

    pub mode: Mode,
    pub seed: u64,
    pub workers: usize,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub corpus: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl Default for ConfigFile {
    fn default() -> Self {
        RunConfig::default().to_file()
    }
}

/// Fully resolved settings for one pipeline run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub ingest: IngestConfig,
    pub embedding: EmbeddingConfig,
    pub induction: InductionConfig,
    pub scoring: ScoringConfig,
    pub mode: Mode,
    pub workers: usize,
    pub corpus: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            ingest: IngestConfig::default(),
            embedding: EmbeddingConfig::default(),
            induction: InductionConfig::default(),
            scoring: ScoringConfig::default(),
            mode: Mode::default(),
            workers: 1,
            corpus: None,
            out: None,
        }
    }
}

impl From<ConfigFile> for RunConfig {
    fn from(f: ConfigFile) -> RunConfig {
        RunConfig {
            ingest: IngestConfig {
                text_field: f.text_field,
                dimension: f.dimension,
                lowercase: f.lowercase,
            },
            embedding: EmbeddingConfig {
                vector_size: f.vector_size,
                window: f.window,
                min_count: f.min_count,
                epochs: f.epochs,
                sg: f.sg,
                min_n: f.min_n,
                max_n: f.max_n,
                bucket_count: f.bucket_count,
                negative_samples: f.negative_samples,
                initial_learning_rate: f.initial_learning_rate,
                subsample_threshold: f.subsample_threshold,
                rng_seed: f.seed,
            },
            induction: InductionConfig {
                open_topn: f.open_topn,
                open_th: f.open_th,
                strict_topn: f.strict_topn,
                strict_th: f.strict_th,
                snn_min: f.snn_min,
                degree_cap: f.degree_cap,
                min_len: f.min_len,
                jaccard_th: f.jaccard_th,
            },
            scoring: ScoringConfig {
                min_users: f.min_users,
                max_freq_ratio: f.max_freq_ratio,
            },
            mode: f.mode,
            workers: f.workers,
            corpus: f.corpus,
            out: f.out,
        }
    }
}

impl RunConfig {
    pub fn to_file(&self) -> ConfigFile {
        let e = &self.embedding;
        let i = &self.induction;
        ConfigFile {
            text_field: self.ingest.text_field.clone(),
            lowercase: self.ingest.lowercase,
            dimension: self.ingest.dimension.clone(),
            vector_size: e.vector_size,
            window: e.window,
            min_count: e.min_count,
            epochs: e.epochs,
            sg: e.sg,
            min_n: e.min_n,
            max_n: e.max_n,
            bucket_count: e.bucket_count,
            negative_samples: e.negative_samples,
            initial_learning_rate: e.initial_learning_rate,
            subsample_threshold: e.subsample_threshold,
            open_topn: i.open_topn,
            open_th: i.open_th,
            strict_topn: i.strict_topn,
            strict_th: i.strict_th,
            snn_min: i.snn_min,
            degree_cap: i.degree_cap,
            min_len: i.min_len,
            jaccard_th: i.jaccard_th,
            min_users: self.scoring.min_users,
            max_freq_ratio: self.scoring.max_freq_ratio,
            mode: self.mode,
            seed: e.rng_seed,
            workers: self.workers,
            corpus: self.corpus.clone(),
            out: self.out.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ingest.text_field.is_empty() {
            return Err(Error::config("text_field", "must not be empty"));
        }
        if self.ingest.dimension.as_deref() == Some("") {
            return Err(Error::config("dimension", "must be a field name or null"));
        }
        self.embedding.validate()?;
        self.induction.validate()?;
        self.scoring.validate()?;
        if self.workers < 1 {
            return Err(Error::config("workers", "must be at least 1"));
        }
        Ok(())
    }

    /// The resolved settings without input/output paths, as written into
    /// every output. Keys are sorted.
    pub fn echo(&self) -> serde_json::Value {
        let mut file = self.to_file();
        file.corpus = None;
        file.out = None;
        serde_json::to_value(file).expect("config serialises")
    }

    /// First 16 hex digits of SHA-256 over the compact echo.
    pub fn config_hash(&self) -> String {
        let digest = Sha256::digest(self.echo().to_string().as_bytes());
        hex::encode(&digest[..8])
    }
}

/// Parses and validates a JSON configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut de = serde_json::Deserializer::from_str(text);
    let file: ConfigFile = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let message = e.inner().to_string();
        let path = e.path().to_string();
        let key = if path == "." {
            unknown_field(&message).unwrap_or(path)
        } else {
            path
        };
        Error::config(key, message)
    })?;
    de.end().map_err(|e| Error::config(".", e.to_string()))?;
    let config = RunConfig::from(file);
    config.validate()?;
    Ok(config)
}

fn unknown_field(message: &str) -> Option<String> {
    let rest = message.strip_prefix("unknown field `")?;
    Some(rest[..rest.find('`')?].to_owned())
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}
