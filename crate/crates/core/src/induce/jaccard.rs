use std::cmp::Ordering;

use crate::ngram::ngram_set;

/// Jaccard index of two sorted, deduplicated n-gram sets; 0 when both are
/// empty.
pub fn jaccard_of_sets(a: &[String], b: &[String]) -> f64 {
    let (mut i, mut j, mut shared) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                shared += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = a.len() + b.len() - shared;
    if union == 0 {
        0.0
    } else {
        shared as f64 / union as f64
    }
}

/// `|G(w) ∩ G(v)| / |G(w) ∪ G(v)|` over boundary-wrapped character n-grams
/// of lengths `min_n..=max_n`.
pub fn jaccard(w: &str, v: &str, min_n: usize, max_n: usize) -> f64 {
    jaccard_of_sets(&ngram_set(w, min_n, max_n), &ngram_set(v, min_n, max_n))
}
