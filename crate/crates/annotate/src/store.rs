//! Durable annotation storage: an append-only JSONL log replayed with
//! last-write-wins semantics.

use std::collections::{BTreeMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::category::Category;

pub const MAX_CATEGORIES: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyAnnotation {
    pub family_id: String,
    pub categories: Vec<Category>,
    pub note: Option<String>,
    pub annotator: String,
    /// RFC 3339.
    pub timestamp: String,
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
}

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum ValidationError {
    #[error("at least one category is required")]
    NoCategories,
    #[error("at most {MAX_CATEGORIES} categories are allowed, got {0}")]
    TooManyCategories(usize),
    #[error("category `{0}` is listed twice")]
    DuplicateCategory(Category),
    #[error("unknown category `{0}`; expected one of Orthographic, Morphological, Lexical, Collocation, Tokenisation, Regional, Other")]
    UnknownCategory(String),
}

/// Parses category names with the exact-string contract and checks the
/// 1..=3 distinct rule.
pub fn parse_categories(names: &[String]) -> Result<Vec<Category>, ValidationError> {
    let categories = names
        .iter()
        .map(|n| n.parse::<Category>().map_err(|e| ValidationError::UnknownCategory(e.0)))
        .collect::<Result<Vec<_>, _>>()?;
    validate_categories(&categories)?;
    Ok(categories)
}

pub fn validate_categories(categories: &[Category]) -> Result<(), ValidationError> {
    if categories.is_empty() {
        return Err(ValidationError::NoCategories);
    }
    if categories.len() > MAX_CATEGORIES {
        return Err(ValidationError::TooManyCategories(categories.len()));
    }
    let mut seen = HashSet::new();
    for &c in categories {
        if !seen.insert(c) {
            return Err(ValidationError::DuplicateCategory(c));
        }
    }
    Ok(())
}

/// Single-writer store. Callers serialise access (the service keeps it
/// behind a mutex).
#[derive(Debug)]
pub struct AnnotationStore {
    path: PathBuf,
    log: File,
    current: BTreeMap<String, FamilyAnnotation>,
}

fn read_log(path: &Path) -> Result<Vec<FamilyAnnotation>, StoreError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(source) => {
            return Err(StoreError::Io {
                path: path.to_path_buf(),
                source,
            })
        }
    };
    let mut out = Vec::new();
    for (index, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| StoreError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let annotation: FamilyAnnotation = serde_json::from_str(&line).map_err(|e| StoreError::Parse {
            path: path.to_path_buf(),
            line: index + 1,
            message: e.to_string(),
        })?;
        out.push(annotation);
    }
    Ok(out)
}

impl AnnotationStore {
    /// Opens (creating if needed) the log at `path` and replays it.
    pub fn open(path: &Path) -> Result<AnnotationStore, StoreError> {
        let mut current = BTreeMap::new();
        for annotation in read_log(path)? {
            current.insert(annotation.family_id.clone(), annotation);
        }
        let log = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|source| StoreError::Io {
                path: path.to_path_buf(),
                source,
            })?;
        Ok(AnnotationStore {
            path: path.to_path_buf(),
            log,
            current,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Appends `annotation` to the log and syncs it to disk before it
    /// becomes visible.
    pub fn put(&mut self, annotation: FamilyAnnotation) -> Result<FamilyAnnotation, StoreError> {
        let mut line = serde_json::to_vec(&annotation).expect("annotations serialise");
        line.push(b'\n');
        self.log
            .write_all(&line)
            .and_then(|()| self.log.sync_data())
            .map_err(|source| StoreError::Io {
                path: self.path.clone(),
                source,
            })?;
        self.current.insert(annotation.family_id.clone(), annotation.clone());
        Ok(annotation)
    }

    pub fn get(&self, family_id: &str) -> Option<&FamilyAnnotation> {
        self.current.get(family_id)
    }

    /// Current annotations, sorted by family id.
    pub fn all(&self) -> impl Iterator<Item = &FamilyAnnotation> {
        self.current.values()
    }

    pub fn len(&self) -> usize {
        self.current.len()
    }

    pub fn is_empty(&self) -> bool {
        self.current.is_empty()
    }

    /// Appends every annotation of a JSONL export, in file order.
    pub fn import_jsonl(&mut self, path: &Path) -> Result<usize, StoreError> {
        let records = read_log(path)?;
        let n = records.len();
        for annotation in records {
            self.put(annotation)?;
        }
        Ok(n)
    }

    /// Multi-label counts: an annotation with k categories adds one to each.
    /// All categories are present, zeros included.
    pub fn category_counts(&self) -> BTreeMap<Category, usize> {
        let mut counts: BTreeMap<Category, usize> = Category::ALL.into_iter().map(|c| (c, 0)).collect();
        for annotation in self.current.values() {
            for c in &annotation.categories {
                *counts.entry(*c).or_default() += 1;
            }
        }
        counts
    }

    pub fn export_jsonl(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for annotation in self.current.values() {
            serde_json::to_writer(&mut out, annotation).expect("annotations serialise");
            out.push(b'\n');
        }
        out
    }

    pub fn export_csv(&self) -> Vec<u8> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        let record_error = "writing to memory cannot fail";
        writer
            .write_record(["family_id", "categories", "note", "annotator", "timestamp"])
            .expect(record_error);
        for a in self.current.values() {
            let categories = a.categories.iter().map(|c| c.as_str()).collect::<Vec<_>>().join("|");
            writer
                .write_record([
                    a.family_id.as_str(),
                    categories.as_str(),
                    a.note.as_deref().unwrap_or(""),
                    a.annotator.as_str(),
                    a.timestamp.as_str(),
                ])
                .expect(record_error);
        }
        writer.into_inner().expect(record_error)
    }
}
