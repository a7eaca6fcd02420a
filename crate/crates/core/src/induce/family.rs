use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::Mode;

/// A scored token pair, canonically ordered so that `w < v`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariantPair {
    pub w: String,
    pub v: String,
    pub cosine: f64,
    pub jaccard: f64,
    /// Whether the pair is an edge of the induced structure (a star spoke or
    /// an installed graph edge) rather than a pair scored for inspection.
    pub is_edge: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RawFamily {
    pub family_id: String,
    pub mode: Mode,
    /// Sorted.
    pub members: Vec<String>,
    /// Every unordered member pair, sorted by `(w, v)`.
    pub pairs: Vec<VariantPair>,
    /// Star centre; open mode only.
    pub seed: Option<String>,
}

fn digest16(input: &str) -> String {
    let digest = Sha256::digest(input.as_bytes());
    hex::encode(&digest[..8])
}

/// First 16 hex digits of SHA-256 over the sorted members joined by `\n`.
pub fn family_id(members: &[String]) -> String {
    debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
    digest16(&members.join("\n"))
}

/// Open-mode stars around different seeds can share a member set, so their
/// identity also covers the seed.
pub fn open_family_id(seed: &str, members: &[String]) -> String {
    digest16(&format!("seed:{seed}\n{}", members.join("\n")))
}
