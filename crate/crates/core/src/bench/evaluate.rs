use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::PlantedFamily;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryMetrics {
    pub pair_precision: f64,
    pub pair_recall: f64,
    pub pair_f1: f64,
    pub family_exact_match_rate: f64,
    pub predicted_pairs: usize,
    pub true_pairs: usize,
    pub correct_pairs: usize,
    /// Planted pairs left out because a token is not learnable.
    pub unlearnable_true_pairs: usize,
    /// Planted families with at least two learnable members.
    pub evaluated_families: usize,
}

type Pair = (String, String);

fn restricted<'a>(members: impl IntoIterator<Item = &'a String>, learnable: Option<&BTreeSet<String>>) -> BTreeSet<String> {
    members
        .into_iter()
        .filter(|t| learnable.is_none_or(|l| l.contains(*t)))
        .cloned()
        .collect()
}

fn pairs_of(members: &BTreeSet<String>, out: &mut BTreeSet<Pair>) {
    let members: Vec<&String> = members.iter().collect();
    for (i, a) in members.iter().enumerate() {
        for b in &members[i + 1..] {
            out.insert(((*a).clone(), (*b).clone()));
        }
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Pairwise precision, recall and F1 of `found` against `truth`.
///
/// Only tokens in `learnable` are considered (all tokens when `None`): pairs
/// with a token the embedding stage could not learn are excluded on both
/// sides and counted in `unlearnable_true_pairs`.
pub fn evaluate_recovery(
    found: &[Vec<String>],
    truth: &[PlantedFamily],
    learnable: Option<&BTreeSet<String>>,
) -> RecoveryMetrics {
    let found_sets: Vec<BTreeSet<String>> = found.iter().map(|f| restricted(f, learnable)).collect();
    let mut predicted = BTreeSet::new();
    for set in &found_sets {
        pairs_of(set, &mut predicted);
    }

    let mut true_pairs = BTreeSet::new();
    let mut all_true_pairs = BTreeSet::new();
    let mut evaluated = 0;
    let mut exact = 0;
    for family in truth {
        let members = family.members();
        pairs_of(&restricted(&members, None), &mut all_true_pairs);
        let set = restricted(&members, learnable);
        if set.len() < 2 {
            continue;
        }
        pairs_of(&set, &mut true_pairs);
        evaluated += 1;
        if found_sets.contains(&set) {
            exact += 1;
        }
    }

    let correct = predicted.intersection(&true_pairs).count();
    let precision = ratio(correct, predicted.len());
    let recall = ratio(correct, true_pairs.len());
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    RecoveryMetrics {
        pair_precision: precision,
        pair_recall: recall,
        pair_f1: f1,
        family_exact_match_rate: ratio(exact, evaluated),
        predicted_pairs: predicted.len(),
        true_pairs: true_pairs.len(),
        correct_pairs: correct,
        unlearnable_true_pairs: all_true_pairs.len() - true_pairs.len(),
        evaluated_families: evaluated,
    }
}

/// Random families over `universe` with the same sizes as `found`, as a
/// chance-level reference.
pub fn random_pairing(found: &[Vec<String>], universe: &[String], seed: u64) -> Vec<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tokens: Vec<String> = universe.to_vec();
    tokens.sort();
    tokens.dedup();
    tokens.shuffle(&mut rng);
    let mut rest = tokens.as_slice();
    let mut out = Vec::new();
    for family in found {
        if rest.len() < 2 {
            break;
        }
        let take = family.len().min(rest.len());
        out.push(rest[..take].to_vec());
        rest = &rest[take..];
    }
    out
}
