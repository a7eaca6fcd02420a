use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Where in a token a rule may fire.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Applicability {
    Anywhere,
    /// The match must end the token.
    WordFinal,
    /// The match must not touch another vowel on either side, so it is the
    /// whole vowel nucleus of its syllable.
    VowelNucleus,
}

/// A grapheme rewrite that derives a variant spelling from a base form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerturbationRule {
    pub name: String,
    pub pattern: String,
    pub replacement: String,
    pub applicability: Applicability,
}

pub(crate) fn is_vowel(c: char) -> bool {
    matches!(
        c,
        'a' | 'e' | 'i' | 'o' | 'u' | 'y' | 'ä' | 'ë' | 'é' | 'è' | 'ê' | 'ö' | 'ü' | 'â' | 'î' | 'ô' | 'û'
    )
}

impl PerturbationRule {
    /// Rejects empty patterns and identity rewrites.
    pub fn new(name: &str, pattern: &str, replacement: &str, applicability: Applicability) -> Result<Self> {
        if pattern.is_empty() {
            return Err(Error::config("pattern", format!("rule `{name}` has an empty pattern")));
        }
        if pattern == replacement {
            return Err(Error::config("replacement", format!("rule `{name}` does not change the token")));
        }
        Ok(PerturbationRule {
            name: name.to_owned(),
            pattern: pattern.to_owned(),
            replacement: replacement.to_owned(),
            applicability,
        })
    }

    fn fires_at(&self, token: &str, start: usize) -> bool {
        let end = start + self.pattern.len();
        match self.applicability {
            Applicability::Anywhere => true,
            Applicability::WordFinal => end == token.len(),
            Applicability::VowelNucleus => {
                let before = token[..start].chars().next_back();
                let after = token[end..].chars().next();
                !before.is_some_and(is_vowel) && !after.is_some_and(is_vowel)
            }
        }
    }

    /// Every token obtained by rewriting one admissible occurrence of the
    /// pattern, in order of position.
    pub fn apply(&self, token: &str) -> Vec<String> {
        let mut out = Vec::new();
        for (start, _) in token.match_indices(self.pattern.as_str()) {
            if self.fires_at(token, start) {
                let end = start + self.pattern.len();
                let variant = format!("{}{}{}", &token[..start], self.replacement, &token[end..]);
                if variant != token && !variant.is_empty() && !out.contains(&variant) {
                    out.push(variant);
                }
            }
        }
        out
    }
}

/// Grapheme correspondences typical of informal Luxembourgish spelling.
pub fn default_rules() -> Vec<PerturbationRule> {
    use Applicability::*;
    [
        ("ae_to_a", "ä", "a", Anywhere),
        ("ae_to_e", "ä", "e", Anywhere),
        ("ei_acute_to_grave", "éi", "èi", VowelNucleus),
        ("ei_acute_to_plain", "éi", "ei", VowelNucleus),
        ("final_n_deletion", "n", "", WordFinal),
        ("aa_shortening", "aa", "a", Anywhere),
        ("mm_degemination", "mm", "m", Anywhere),
        ("tt_degemination", "tt", "t", Anywhere),
        ("ll_degemination", "ll", "l", Anywhere),
        ("ou_to_o", "ou", "o", VowelNucleus),
        ("ie_to_i", "ie", "i", VowelNucleus),
        ("final_t_gemination", "t", "tt", WordFinal),
    ]
    .into_iter()
    .map(|(name, p, r, a)| PerturbationRule::new(name, p, r, a).expect("built-in rules are valid"))
    .collect()
}

/// All distinct single-rule variants of `lemma`, each with the rule that
/// produced it first. Sorted by variant.
pub fn derive_variants(lemma: &str, rules: &[PerturbationRule]) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = Vec::new();
    for rule in rules {
        for variant in rule.apply(lemma) {
            if !out.iter().any(|(v, _)| *v == variant) {
                out.push((variant, rule.name.clone()));
            }
        }
    }
    out.sort();
    out
}
