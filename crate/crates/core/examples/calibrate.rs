//! Runs the synthetic recovery benchmark at full scale and prints metrics.

use std::collections::BTreeSet;
use std::time::Instant;

use varfam_core::artifact::RunConfig;
use varfam_core::bench::{evaluate_recovery, generate_corpus, random_pairing, GeneratorSpec};
use varfam_core::induce::candidate_lexicon;
use varfam_core::pipeline::{induce_stage, train_stage};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map_or(Ok(7), |s| s.parse())?;
    let spec = GeneratorSpec { rng_seed: seed, ..GeneratorSpec::default() };
    let start = Instant::now();
    let corpus = generate_corpus(&spec)?;
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("corpus.jsonl");
    corpus.write_corpus(&path)?;
    let mut config = RunConfig::default();
    config.embedding.rng_seed = 42;
    let (stats, model, report) = train_stage(&path, &config)?;
    println!("train {:?} {:?}", start.elapsed(), report);
    let (families, ireport) = induce_stage(&stats, &model, &config)?;
    println!("induce {:?} {:?}", start.elapsed(), ireport);
    let lexicon = candidate_lexicon(&stats, &model, config.embedding.min_count, config.induction.min_len)?;
    let learnable: BTreeSet<String> = lexicon.iter().cloned().collect();
    let found: Vec<Vec<String>> = families
        .iter()
        .filter(|f| f.survives())
        .map(|f| f.members.iter().map(|m| m.token.clone()).collect())
        .collect();
    let m = evaluate_recovery(&found, &corpus.families, Some(&learnable));
    println!("{m:?}");
    let random = random_pairing(&found, &lexicon, seed);
    println!("random {:?}", evaluate_recovery(&random, &corpus.families, Some(&learnable)));
    let space = model.space_for(&lexicon);
    let (mut sum, mut n, mut above) = (0.0, 0, 0);
    for i in 0..space.len() {
        for j in i + 1..space.len() {
            if let Some(c) = space.cosine(i, j) {
                sum += c;
                n += 1;
                if c >= 0.73 {
                    above += 1;
                }
            }
        }
    }
    println!("lexicon pairs: mean cosine {:.4}, {above} of {n} at or above 0.73", sum / n as f64);
    for f in &corpus.families {
        println!("truth {} {:?}", f.id, f.members());
    }
    for f in &families {
        println!("found {:?} {:?} {:?}", f.members.iter().map(|m| (&m.token, m.frequency)).collect::<Vec<_>>(), f.verdict.reasons, f.score.map(|s| s.mean_cosine));
    }
    Ok(())
}
