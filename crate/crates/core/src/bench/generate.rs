use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};
use serde::{Deserialize, Serialize};

use super::rules::{default_rules, derive_variants, PerturbationRule};
use crate::artifact::write_atomic;
use crate::induce::jaccard;
use crate::{Error, Result};

const NGRAM_RANGE: (usize, usize) = (3, 7);

/// Parameters of a synthetic corpus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorSpec {
    pub num_families: usize,
    /// Surface forms per family, lemma included; drawn uniformly from
    /// `min_variants..=max_variants`.
    pub min_variants: usize,
    pub max_variants: usize,
    pub users: usize,
    pub records: usize,
    /// Exponent of the Zipf laws over families, variants and distractors.
    pub zipf_exponent: f64,
    pub distractors: usize,
    pub templates_per_family: usize,
    pub rng_seed: u64,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        GeneratorSpec {
            num_families: 20,
            min_variants: 3,
            max_variants: 5,
            users: 200,
            records: 50_000,
            zipf_exponent: 1.0,
            distractors: 150,
            templates_per_family: 4,
            rng_seed: 7,
        }
    }
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        let at_least_one = [
            ("num_families", self.num_families),
            ("users", self.users),
            ("records", self.records),
            ("templates_per_family", self.templates_per_family),
        ];
        for (key, value) in at_least_one {
            if value < 1 {
                return Err(Error::config(key, "must be at least 1"));
            }
        }
        if self.min_variants < 2 {
            return Err(Error::config("variants_per_family", "families need at least 2 surface forms"));
        }
        if self.max_variants < self.min_variants {
            return Err(Error::config("variants_per_family", "max_variants is below min_variants"));
        }
        if !(self.zipf_exponent.is_finite() && self.zipf_exponent >= 0.0) {
            return Err(Error::config("zipf_exponent", "must be a finite number >= 0"));
        }
        Ok(())
    }
}

/// A ground-truth family: a lemma and spellings derived from it by rules.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedFamily {
    pub id: String,
    pub lemma: String,
    pub variants: Vec<String>,
    /// Rule that produced each variant, parallel to `variants`.
    pub rules: Vec<String>,
    pub context_template_ids: Vec<usize>,
}

impl PlantedFamily {
    /// Lemma first, then the variants.
    pub fn members(&self) -> Vec<String> {
        std::iter::once(self.lemma.clone()).chain(self.variants.iter().cloned()).collect()
    }
}

#[derive(Clone, Debug)]
pub struct SyntheticCorpus {
    /// One JSON object per record, without trailing newlines.
    pub lines: Vec<String>,
    pub families: Vec<PlantedFamily>,
    pub distractors: Vec<String>,
}

impl SyntheticCorpus {
    pub fn write_corpus(&self, path: &Path) -> Result<()> {
        write_atomic(path, |w| {
            for line in &self.lines {
                w.write_all(line.as_bytes())?;
                w.write_all(b"\n")?;
            }
            Ok(())
        })
    }

    /// Family id mapped to its members, lemma first.
    pub fn truth_map(&self) -> BTreeMap<String, Vec<String>> {
        self.families.iter().map(|f| (f.id.clone(), f.members())).collect()
    }

    pub fn write_truth(&self, path: &Path) -> Result<()> {
        crate::artifact::write_json(path, &self.truth_map())
    }
}

/// Reads a ground-truth file. The first member of each family is taken as
/// its lemma.
pub fn read_ground_truth(path: &Path) -> Result<Vec<PlantedFamily>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let map: BTreeMap<String, Vec<String>> = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })?;
    map.into_iter()
        .map(|(id, members)| {
            let mut members = members.into_iter();
            let lemma = members.next().ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: 0,
                message: format!("family `{id}` has no members"),
            })?;
            let variants: Vec<String> = members.collect();
            Ok(PlantedFamily {
                id,
                lemma,
                rules: vec![String::new(); variants.len()],
                variants,
                context_template_ids: Vec::new(),
            })
        })
        .collect()
}

const ONSETS: &[&str] = &[
    "b", "d", "f", "g", "h", "k", "l", "m", "n", "p", "r", "s", "t", "w", "z", "bl", "br", "dr", "fl", "fr", "gr", "kl",
    "kr", "pl", "schl", "schm", "schr", "sp", "st", "tr", "zw",
];
const RULE_NUCLEI: &[&str] = &["ä", "éi", "aa", "ou", "ie"];
const PLAIN_VOWELS: &[&str] = &["a", "e", "i", "o", "u", "ë"];
const GEMINATES: &[&str] = &["mm", "tt", "ll"];
const CONSONANTS: &[&str] = &["r", "l", "m", "s", "d", "g", "b", "ch", "w", "k", "p", "f", "ng", "nd", "rt", "st"];
const ENDINGS: &[&str] = &["en", "en", "en", "et", "er", "el", "eg", "ech", "ung"];
/// Short function words; below the default minimum candidate length.
const FILLERS: &[&str] = &["an", "et", "op", "de", "mä", "ze", "am", "as", "si", "ob", "fir", "net", "dat", "den"];

fn pick<'a>(rng: &mut ChaCha8Rng, items: &[&'a str]) -> &'a str {
    items.choose(rng).expect("non-empty")
}

/// A long pseudo-word with features the default rules act on.
fn lemma_candidate(rng: &mut ChaCha8Rng) -> String {
    let mut s = String::new();
    s.push_str(pick(rng, ONSETS));
    s.push_str(pick(rng, RULE_NUCLEI));
    s.push_str(if rng.random_bool(0.5) { pick(rng, GEMINATES) } else { pick(rng, CONSONANTS) });
    s.push_str(pick(rng, PLAIN_VOWELS));
    s.push_str(pick(rng, CONSONANTS));
    if rng.random_bool(0.5) {
        s.push_str(pick(rng, PLAIN_VOWELS));
        s.push_str(pick(rng, CONSONANTS));
    }
    s.push_str(pick(rng, ENDINGS));
    s
}

/// A pseudo-word of two or three plain syllables.
fn plain_word(rng: &mut ChaCha8Rng) -> String {
    let mut s = String::new();
    for _ in 0..rng.random_range(2..=3) {
        s.push_str(pick(rng, ONSETS));
        s.push_str(pick(rng, PLAIN_VOWELS));
    }
    s.push_str(pick(rng, CONSONANTS));
    s
}

fn jac(a: &str, b: &str) -> f64 {
    jaccard(a, b, NGRAM_RANGE.0, NGRAM_RANGE.1)
}

/// Tokens generated so far; new tokens must be orthographically distant
/// from all of them.
struct Lexicon {
    tokens: Vec<String>,
    seen: HashSet<String>,
}

impl Lexicon {
    /// Maximum Jaccard overlap allowed between unrelated tokens.
    const DISTANCE: f64 = 0.15;

    fn is_distant(&self, candidate: &str) -> bool {
        !self.seen.contains(candidate) && self.tokens.iter().all(|t| jac(t, candidate) < Self::DISTANCE)
    }

    fn all_distant(&self, candidates: &[String]) -> bool {
        candidates.iter().all(|c| self.is_distant(c))
    }

    fn add(&mut self, token: String) {
        self.seen.insert(token.clone());
        self.tokens.push(token);
    }

    fn fresh_plain(&mut self, rng: &mut ChaCha8Rng) -> Result<String> {
        for _ in 0..10_000 {
            let w = plain_word(rng);
            if self.is_distant(&w) {
                self.add(w.clone());
                return Ok(w);
            }
        }
        Err(Error::config("distractors", "could not generate enough distinct pseudo-words"))
    }
}

/// Minimum Jaccard overlap between a lemma and each of its variants, so the
/// planted relation is visible to the n-gram gate.
const MIN_VARIANT_OVERLAP: f64 = 0.3;

fn plant_family(
    rng: &mut ChaCha8Rng,
    rules: &[PerturbationRule],
    lexicon: &Lexicon,
    size: usize,
) -> Option<(String, Vec<(String, String)>)> {
    for _ in 0..2_000 {
        let lemma = lemma_candidate(rng);
        if lemma.chars().count() < 8 {
            continue;
        }
        let mut variants: Vec<(String, String)> = derive_variants(&lemma, rules)
            .into_iter()
            .filter(|(v, _)| jac(v, &lemma) >= MIN_VARIANT_OVERLAP)
            .collect();
        if variants.len() + 1 < size {
            continue;
        }
        variants.shuffle(rng);
        variants.truncate(size - 1);
        variants.sort();
        let mut members = vec![lemma.clone()];
        members.extend(variants.iter().map(|(v, _)| v.clone()));
        if lexicon.all_distant(&members) {
            return Some((lemma, variants));
        }
    }
    None
}

#[derive(Clone, Debug)]
enum Slot {
    Context(String),
    Filler,
    Target,
}

fn render_sentence(rng: &mut ChaCha8Rng, template: &[Slot], target: &str) -> Vec<String> {
    template
        .iter()
        .map(|slot| match slot {
            Slot::Context(w) => w.clone(),
            Slot::Filler => pick(rng, FILLERS).to_owned(),
            Slot::Target => target.to_owned(),
        })
        .collect()
}

fn zipf_index(rng: &mut ChaCha8Rng, zipf: &Zipf<f64>) -> usize {
    zipf.sample(rng) as usize - 1
}

/// Builds a corpus with planted families.
///
/// Each family has its own pool of context words and sentence templates
/// that all of its spellings share. Users choose spellings either freely
/// or, for about half of them, mostly according to a fixed personal
/// preference. Distractor sentences use orthographically unrelated words.
/// Output is a pure function of `spec`.
pub fn generate_corpus(spec: &GeneratorSpec) -> Result<SyntheticCorpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let rules = default_rules();
    let mut lexicon = Lexicon {
        tokens: Vec::new(),
        seen: FILLERS.iter().map(|s| s.to_string()).collect(),
    };

    let mut families = Vec::with_capacity(spec.num_families);
    for f in 0..spec.num_families {
        let size = rng.random_range(spec.min_variants..=spec.max_variants);
        let (lemma, variants) = plant_family(&mut rng, &rules, &lexicon, size)
            .ok_or_else(|| Error::config("num_families", "could not plant enough distinct families"))?;
        lexicon.add(lemma.clone());
        for (v, _) in &variants {
            lexicon.add(v.clone());
        }
        families.push(PlantedFamily {
            id: format!("F{f:03}"),
            lemma,
            rules: variants.iter().map(|(_, r)| r.clone()).collect(),
            variants: variants.into_iter().map(|(v, _)| v).collect(),
            context_template_ids: Vec::new(),
        });
    }

    let mut templates: Vec<Vec<Slot>> = Vec::new();
    for family in &mut families {
        let pool: Vec<String> = (0..5).map(|_| lexicon.fresh_plain(&mut rng)).collect::<Result<_>>()?;
        for _ in 0..spec.templates_per_family {
            let len = rng.random_range(4..=6);
            let target_at = rng.random_range(1..len);
            let template = (0..len)
                .map(|k| {
                    if k == target_at {
                        Slot::Target
                    } else if rng.random_bool(0.25) {
                        Slot::Filler
                    } else {
                        Slot::Context(pool.choose(&mut rng).expect("pool").clone())
                    }
                })
                .collect();
            family.context_template_ids.push(templates.len());
            templates.push(template);
        }
    }

    let distractors: Vec<String> = (0..spec.distractors)
        .map(|_| lexicon.fresh_plain(&mut rng))
        .collect::<Result<_>>()?;

    let family_zipf = Zipf::new(spec.num_families as f64, spec.zipf_exponent).expect("valid zipf");
    let variant_zipfs: Vec<Zipf<f64>> = families
        .iter()
        .map(|f| Zipf::new((f.variants.len() + 1) as f64, spec.zipf_exponent).expect("valid zipf"))
        .collect();
    // Per family, surface forms in decreasing order of popularity.
    let popularity: Vec<Vec<String>> = families
        .iter()
        .map(|f| {
            let mut members = f.members();
            members.shuffle(&mut rng);
            members
        })
        .collect();
    let distractor_zipf = (!distractors.is_empty())
        .then(|| Zipf::new(distractors.len() as f64, spec.zipf_exponent).expect("valid zipf"));

    struct User {
        id: String,
        loyal: bool,
        preferred: Vec<usize>,
    }
    let users: Vec<User> = (0..spec.users)
        .map(|u| User {
            id: format!("u{u:04}"),
            loyal: rng.random_bool(0.5),
            preferred: variant_zipfs.iter().map(|z| zipf_index(&mut rng, z)).collect(),
        })
        .collect();

    let distractor_sentence = |rng: &mut ChaCha8Rng| -> Vec<String> {
        let len = rng.random_range(4..=7);
        (0..len)
            .map(|_| match &distractor_zipf {
                Some(z) if !rng.random_bool(0.3) => distractors[zipf_index(rng, z)].clone(),
                _ => pick(rng, FILLERS).to_owned(),
            })
            .collect()
    };

    let mut lines = Vec::with_capacity(spec.records);
    for _ in 0..spec.records {
        let user = users.choose(&mut rng).expect("users");
        let mut words = Vec::new();
        if rng.random_bool(0.7) {
            let f = zipf_index(&mut rng, &family_zipf);
            let index = if user.loyal && rng.random_bool(0.9) {
                user.preferred[f]
            } else {
                zipf_index(&mut rng, &variant_zipfs[f])
            };
            let target = &popularity[f][index];
            let template_id = *families[f].context_template_ids.choose(&mut rng).expect("templates");
            words.extend(render_sentence(&mut rng, &templates[template_id], target));
            if rng.random_bool(0.3) {
                words.extend(distractor_sentence(&mut rng));
            }
        } else {
            words.extend(distractor_sentence(&mut rng));
        }
        if rng.random_bool(0.5) {
            let mut chars = words[0].chars();
            if let Some(first) = chars.next() {
                words[0] = first.to_uppercase().chain(chars).collect();
            }
        }
        if rng.random_bool(0.05) {
            let other = users.choose(&mut rng).expect("users");
            words.insert(0, format!("@{}", other.id));
        }
        let mut text = words.join(" ");
        text.push_str(pick(&mut rng, &[".", "!", "?", "", ""]));
        let line = serde_json::json!({ "text": text, "user_id": user.id });
        lines.push(line.to_string());
    }

    Ok(SyntheticCorpus {
        lines,
        families,
        distractors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> GeneratorSpec {
        GeneratorSpec {
            num_families: 5,
            users: 20,
            records: 500,
            distractors: 30,
            ..GeneratorSpec::default()
        }
    }

    #[test]
    fn same_seed_same_corpus() {
        let a = generate_corpus(&small()).unwrap();
        let b = generate_corpus(&small()).unwrap();
        assert_eq!(a.lines, b.lines);
        assert_eq!(a.families, b.families);
        let c = generate_corpus(&GeneratorSpec { rng_seed: 8, ..small() }).unwrap();
        assert_ne!(a.lines, c.lines);
    }

    #[test]
    fn planted_families_are_well_formed() {
        let spec = small();
        let corpus = generate_corpus(&spec).unwrap();
        assert_eq!(corpus.families.len(), spec.num_families);
        let mut all = HashSet::new();
        for family in &corpus.families {
            let members = family.members();
            assert!((spec.min_variants..=spec.max_variants).contains(&members.len()));
            for m in &members {
                assert!(all.insert(m.clone()), "{m} planted twice");
            }
            for v in &family.variants {
                assert!(jac(v, &family.lemma) >= MIN_VARIANT_OVERLAP);
            }
            assert_eq!(family.context_template_ids.len(), spec.templates_per_family);
        }
        for (i, a) in corpus.families.iter().enumerate() {
            for b in &corpus.families[i + 1..] {
                for x in a.members() {
                    for y in b.members() {
                        assert!(jac(&x, &y) < Lexicon::DISTANCE);
                    }
                }
            }
        }
    }

    #[test]
    fn records_parse_and_carry_users() {
        let corpus = generate_corpus(&small()).unwrap();
        assert_eq!(corpus.lines.len(), 500);
        for line in &corpus.lines {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert!(v["text"].is_string());
            assert!(v["user_id"].as_str().unwrap().starts_with('u'));
        }
    }

    #[test]
    fn single_form_families_are_rejected() {
        let spec = GeneratorSpec {
            min_variants: 1,
            max_variants: 1,
            ..small()
        };
        assert!(generate_corpus(&spec).is_err());
    }

    #[test]
    fn ground_truth_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = generate_corpus(&small()).unwrap();
        let path = dir.path().join("truth.json");
        corpus.write_truth(&path).unwrap();
        let back = read_ground_truth(&path).unwrap();
        assert_eq!(back.len(), corpus.families.len());
        for (a, b) in back.iter().zip(&corpus.families) {
            assert_eq!(a.members(), b.members());
        }
    }
}
