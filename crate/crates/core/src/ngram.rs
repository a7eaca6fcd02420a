//! Character n-grams and their bucket hashing.
//!
//! Tokens are wrapped in `<` and `>` before extraction, so prefixes and
//! suffixes get their own n-grams. The same n-grams feed the subword
//! embeddings and the Jaccard overlap used during family induction.

pub const BEGIN_MARKER: char = '<';
pub const END_MARKER: char = '>';

fn wrapped_chars(token: &str) -> Vec<char> {
    let mut chars = Vec::with_capacity(token.len() + 2);
    chars.push(BEGIN_MARKER);
    chars.extend(token.chars());
    chars.push(END_MARKER);
    chars
}

/// All substrings of `<token>` with `min_n..=max_n` characters, ordered by
/// length and then by position. Duplicates are kept.
///
/// ```
/// use varfam_core::ngram::extract_ngrams;
/// assert_eq!(
///     extract_ngrams("mat", 3, 7),
///     ["<ma", "mat", "at>", "<mat", "mat>", "<mat>"]
/// );
/// ```
pub fn extract_ngrams(token: &str, min_n: usize, max_n: usize) -> Vec<String> {
    let chars = wrapped_chars(token);
    let min_n = min_n.max(1);
    let max_n = max_n.min(chars.len());
    let mut out = Vec::new();
    for n in min_n..=max_n {
        out.extend(chars.windows(n).map(|w| w.iter().collect::<String>()));
    }
    out
}

/// Sorted, deduplicated n-grams of `token`: the set `G(token)`.
pub fn ngram_set(token: &str, min_n: usize, max_n: usize) -> Vec<String> {
    let mut grams = extract_ngrams(token, min_n, max_n);
    grams.sort_unstable();
    grams.dedup();
    grams
}

const FNV_OFFSET: u32 = 2_166_136_261;
const FNV_PRIME: u32 = 16_777_619;

/// 32-bit FNV-1a over the UTF-8 bytes of `ngram`.
pub fn fnv1a32(ngram: &str) -> u32 {
    ngram
        .bytes()
        .fold(FNV_OFFSET, |h, b| (h ^ u32::from(b)).wrapping_mul(FNV_PRIME))
}

pub fn hash_ngram(ngram: &str, bucket_count: u32) -> u32 {
    assert!(bucket_count >= 1, "bucket_count must be at least 1");
    fnv1a32(ngram) % bucket_count
}

/// Bucket indices of all n-grams of `token`, in [`extract_ngrams`] order.
pub fn subword_buckets(token: &str, min_n: usize, max_n: usize, bucket_count: u32) -> Vec<u32> {
    extract_ngrams(token, min_n, max_n)
        .iter()
        .map(|g| hash_ngram(g, bucket_count))
        .collect()
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn short_tokens() {
        assert_eq!(extract_ngrams("ab", 4, 7), ["<ab>"]);
        assert!(extract_ngrams("ab", 5, 9).is_empty());
        assert_eq!(extract_ngrams("a", 1, 2), ["<", "a", ">", "<a", "a>"]);
    }

    #[test]
    fn ngrams_count_characters_not_bytes() {
        assert_eq!(extract_ngrams("zäit", 6, 6), ["<zäit>"]);
        assert_eq!(ngram_set("éé", 3, 3), ["<éé", "éé>"]);
    }

    #[test]
    fn fnv_reference_values() {
        // Published FNV-1a 32-bit test vectors.
        assert_eq!(fnv1a32(""), 0x811c9dc5);
        assert_eq!(fnv1a32("a"), 0xe40c292c);
        assert_eq!(fnv1a32("foobar"), 0xbf9cf968);
    }

    #[test]
    fn hashing_is_deterministic_and_degenerate_with_one_bucket() {
        assert_eq!(hash_ngram("<ma", 2_000_000), hash_ngram("<ma", 2_000_000));
        for g in ["<ma", "mat", "zäit>"] {
            assert_eq!(hash_ngram(g, 1), 0);
        }
    }

    #[test]
    fn bucket_distribution_looks_uniform() {
        const BUCKETS: u32 = 2_000_000;
        const SAMPLES: usize = 100_000;
        let alphabet: Vec<char> = "abcdefghijklmnopqrstuvwxyzäéëü<>".chars().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut grams = HashSet::new();
        while grams.len() < SAMPLES {
            let len = rng.random_range(3..=7);
            let g: String = (0..len).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect();
            grams.insert(g);
        }

        let mut used = HashSet::new();
        let mut coarse = [0u64; 100];
        for g in &grams {
            let b = hash_ngram(g, BUCKETS);
            used.insert(b);
            coarse[(u64::from(b) * 100 / u64::from(BUCKETS)) as usize] += 1;
        }

        // Expected collisions for uniform hashing: n - m(1 - (1 - 1/m)^n) ≈ 2496.
        let n = SAMPLES as f64;
        let m = f64::from(BUCKETS);
        let expected = n - m * (1.0 - (1.0 - 1.0 / m).powf(n));
        let collisions = (SAMPLES - used.len()) as f64;
        assert!(
            (collisions - expected).abs() < 5.0 * expected.sqrt(),
            "collisions {collisions}, expected {expected:.0}"
        );

        // Chi-square over 100 equal ranges, 99 degrees of freedom.
        let e = n / 100.0;
        let chi2: f64 = coarse.iter().map(|&o| (o as f64 - e).powi(2) / e).sum();
        assert!(chi2 < 170.0, "chi-square {chi2}");
    }
}
