use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Open,
    #[default]
    Strict,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Open => "open",
            Mode::Strict => "strict",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "open" => Ok(Mode::Open),
            "strict" => Ok(Mode::Strict),
            other => Err(Error::config("mode", format!("expected `open` or `strict`, got `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InductionConfig {
    pub open_topn: usize,
    pub open_th: f64,
    pub strict_topn: usize,
    pub strict_th: f64,
    pub snn_min: usize,
    pub degree_cap: usize,
    pub min_len: usize,
    /// Minimum character n-gram Jaccard overlap for a pair to be admitted.
    pub jaccard_th: f64,
}

impl Default for InductionConfig {
    fn default() -> Self {
        InductionConfig {
            open_topn: 30,
            open_th: 0.75,
            strict_topn: 100,
            strict_th: 0.73,
            snn_min: 2,
            degree_cap: 200,
            min_len: 3,
            jaccard_th: 0.2,
        }
    }
}

impl InductionConfig {
    pub fn validate(&self) -> Result<()> {
        for (key, value) in [
            ("open_TH", self.open_th),
            ("strict_TH", self.strict_th),
            ("jaccard_th", self.jaccard_th),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::config(key, "must lie in [0, 1]"));
            }
        }
        if self.snn_min < 2 {
            return Err(Error::config("SNN_MIN", "must be at least 2"));
        }
        if self.degree_cap < 1 {
            return Err(Error::config("DEGREE_CAP", "must be at least 1"));
        }
        if self.min_len < 1 {
            return Err(Error::config("MIN_LEN", "must be at least 1"));
        }
        Ok(())
    }
}
