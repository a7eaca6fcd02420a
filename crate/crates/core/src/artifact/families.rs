use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::write_atomic;
use crate::induce::{Mode, VariantPair};
use crate::score::{FamilyScore, ScoredFamily};
use crate::{Error, Result};

/// Six decimal places; negative zero is written as zero.
pub fn format_float(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".to_owned()
    } else {
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberRecord {
    pub token: String,
    pub frequency: u64,
    pub coverage: Option<usize>,
    pub top_dimension: Option<String>,
    pub top_share: Option<f64>,
}

/// One line of a families JSONL file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyRecord {
    pub family_id: String,
    pub mode: Mode,
    pub seed: Option<String>,
    pub members: Vec<MemberRecord>,
    pub pairs: Vec<VariantPair>,
    pub score: Option<FamilyScore>,
    pub config_echo: String,
}

impl FamilyRecord {
    pub fn from_scored(family: &ScoredFamily, config_hash: &str) -> FamilyRecord {
        FamilyRecord {
            family_id: family.family_id.clone(),
            mode: family.mode,
            seed: family.seed.clone(),
            members: family
                .members
                .iter()
                .map(|m| MemberRecord {
                    token: m.token.clone(),
                    frequency: m.frequency,
                    coverage: m.dimension.as_ref().map(|d| d.coverage),
                    top_dimension: m.dimension.as_ref().and_then(|d| d.top_dimension.clone()),
                    top_share: m.dimension.as_ref().map(|d| d.top_share),
                })
                .collect(),
            pairs: family.pairs.clone(),
            score: family.score,
            config_echo: config_hash.to_owned(),
        }
    }
}

fn json_str(out: &mut String, s: &str) {
    out.push_str(&serde_json::to_string(s).expect("strings serialise"));
}

fn json_opt_str(out: &mut String, s: Option<&str>) {
    match s {
        Some(s) => json_str(out, s),
        None => out.push_str("null"),
    }
}

fn json_opt_float(out: &mut String, x: Option<f64>) {
    match x {
        Some(x) => out.push_str(&format_float(x)),
        None => out.push_str("null"),
    }
}

/// Serialises one record with a fixed key order and six-decimal floats.
fn render(record: &FamilyRecord) -> String {
    let mut out = String::with_capacity(256);
    out.push_str("{\"family_id\":");
    json_str(&mut out, &record.family_id);
    out.push_str(",\"mode\":");
    json_str(&mut out, record.mode.as_str());
    out.push_str(",\"seed\":");
    json_opt_str(&mut out, record.seed.as_deref());
    out.push_str(",\"members\":[");
    for (k, m) in record.members.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        out.push_str("{\"token\":");
        json_str(&mut out, &m.token);
        let _ = write!(out, ",\"frequency\":{}", m.frequency);
        out.push_str(",\"coverage\":");
        match m.coverage {
            Some(c) => {
                let _ = write!(out, "{c}");
            }
            None => out.push_str("null"),
        }
        out.push_str(",\"top_dimension\":");
        json_opt_str(&mut out, m.top_dimension.as_deref());
        out.push_str(",\"top_share\":");
        json_opt_float(&mut out, m.top_share);
        out.push('}');
    }
    out.push_str("],\"pairs\":[");
    for (k, p) in record.pairs.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        out.push_str("{\"w\":");
        json_str(&mut out, &p.w);
        out.push_str(",\"v\":");
        json_str(&mut out, &p.v);
        let _ = write!(
            out,
            ",\"cosine\":{},\"jaccard\":{},\"is_edge\":{}}}",
            format_float(p.cosine),
            format_float(p.jaccard),
            p.is_edge
        );
    }
    out.push_str("],\"score\":");
    match &record.score {
        Some(s) => {
            let _ = write!(
                out,
                "{{\"size\":{},\"mean_cosine\":{},\"mean_jaccard\":{},\"cohesion\":{}}}",
                s.size,
                format_float(s.mean_cosine),
                format_float(s.mean_jaccard),
                format_float(s.cohesion)
            );
        }
        None => out.push_str("null"),
    }
    out.push_str(",\"config_echo\":");
    json_str(&mut out, &record.config_echo);
    out.push('}');
    out
}

/// Writes the surviving families, one per line, sorted by `family_id`.
/// Returns the number of lines written.
pub fn write_families_jsonl(families: &[ScoredFamily], config_hash: &str, path: &Path) -> Result<usize> {
    let mut survivors: Vec<&ScoredFamily> = families.iter().filter(|f| f.survives()).collect();
    survivors.sort_by(|a, b| a.family_id.cmp(&b.family_id));
    write_atomic(path, |w| {
        for family in &survivors {
            w.write_all(render(&FamilyRecord::from_scored(family, config_hash)).as_bytes())?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })?;
    Ok(survivors.len())
}

/// Reads a families JSONL file. Errors carry the 1-based line number.
/// Blank lines are ignored.
pub fn read_families_jsonl(path: &Path) -> Result<Vec<FamilyRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (index, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: index + 1,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}
