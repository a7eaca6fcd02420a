//! Model persistence.
//!
//! Binary layout, all integers and floats little-endian:
//!
//! ```text
//! magic "VFSUBWRD" | format version u32 | config JSON (u32 length + bytes)
//! words u32 | dim u32 | per word: token (u32 length + UTF-8) and count u64
//! word matrix: words × dim f32
//! bucket_count u32 | stored rows u32 | stored bucket ids (u32 each)
//! n-gram matrix: stored rows × dim f32
//! ```

use std::fs::File;
use std::io::{self, BufReader, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::{EmbeddingConfig, EmbeddingModel, NgramTable, Vocabulary};
use crate::artifact::write_atomic;
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"VFSUBWRD";
const FORMAT_VERSION: u32 = 1;

fn write_str(w: &mut dyn Write, s: &str) -> io::Result<()> {
    w.write_u32::<LittleEndian>(s.len() as u32)?;
    w.write_all(s.as_bytes())
}

fn write_floats(w: &mut dyn Write, values: &[f32]) -> io::Result<()> {
    for &v in values {
        w.write_f32::<LittleEndian>(v)?;
    }
    Ok(())
}

fn read_string(r: &mut impl Read) -> io::Result<String> {
    let len = r.read_u32::<LittleEndian>()? as usize;
    let mut buf = vec![0; len];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
}

fn read_floats(r: &mut impl Read, n: usize) -> io::Result<Vec<f32>> {
    let mut values = vec![0.0; n];
    r.read_f32_into::<LittleEndian>(&mut values)?;
    Ok(values)
}

impl EmbeddingModel {
    pub fn save(&self, path: &Path) -> Result<()> {
        let config = serde_json::to_string(self.config()).expect("config serialises");
        write_atomic(path, |w| {
            w.write_all(MAGIC)?;
            w.write_u32::<LittleEndian>(FORMAT_VERSION)?;
            write_str(w, &config)?;
            let vocab = self.vocabulary();
            w.write_u32::<LittleEndian>(vocab.len() as u32)?;
            w.write_u32::<LittleEndian>(self.dim() as u32)?;
            for (token, &count) in vocab.tokens().iter().zip(vocab.counts()) {
                write_str(w, token)?;
                w.write_u64::<LittleEndian>(count)?;
            }
            write_floats(w, self.word_vectors())?;
            let table = self.ngram_table();
            w.write_u32::<LittleEndian>(table.bucket_count())?;
            w.write_u32::<LittleEndian>(table.stored_buckets().len() as u32)?;
            for &b in table.stored_buckets() {
                w.write_u32::<LittleEndian>(b)?;
            }
            write_floats(w, table.rows())
        })
    }

    pub fn load(path: &Path) -> Result<EmbeddingModel> {
        let format_error = |message: String| Error::ModelFormat {
            path: path.to_path_buf(),
            message,
        };
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = BufReader::new(file);
        let read = |r: &mut BufReader<File>| -> io::Result<_> {
            let mut magic = [0u8; 8];
            r.read_exact(&mut magic)?;
            if &magic != MAGIC {
                return Ok(Err("not a model file (bad magic)".to_owned()));
            }
            let version = r.read_u32::<LittleEndian>()?;
            if version != FORMAT_VERSION {
                return Ok(Err(format!("unsupported format version {version}")));
            }
            let config: EmbeddingConfig = match serde_json::from_str(&read_string(r)?) {
                Ok(c) => c,
                Err(e) => return Ok(Err(format!("config header: {e}"))),
            };
            let words = r.read_u32::<LittleEndian>()? as usize;
            let dim = r.read_u32::<LittleEndian>()? as usize;
            if dim != config.vector_size {
                return Ok(Err(format!("dimension {dim} disagrees with config {}", config.vector_size)));
            }
            let mut entries = Vec::with_capacity(words);
            for _ in 0..words {
                let token = read_string(r)?;
                entries.push((token, r.read_u64::<LittleEndian>()?));
            }
            let word_vectors = read_floats(r, words * dim)?;
            let bucket_count = r.read_u32::<LittleEndian>()?;
            let stored = r.read_u32::<LittleEndian>()? as usize;
            let mut buckets = vec![0u32; stored];
            r.read_u32_into::<LittleEndian>(&mut buckets)?;
            let rows = read_floats(r, stored * dim)?;
            if bucket_count != config.bucket_count {
                return Ok(Err("bucket count disagrees with config".to_owned()));
            }
            let table = NgramTable::from_rows(bucket_count, dim, config.rng_seed, buckets, rows);
            Ok(Ok(EmbeddingModel::from_parts(
                config,
                Vocabulary::from_entries(entries),
                word_vectors,
                table,
            )))
        };
        match read(&mut r) {
            Ok(Ok(model)) => Ok(model),
            Ok(Err(message)) => Err(format_error(message)),
            Err(e) => Err(format_error(e.to_string())),
        }
    }

    /// Plain-text export: a `words dim` header, then one line per vocabulary
    /// token with its composed vector.
    pub fn write_vec(&self, path: &Path) -> Result<()> {
        write_atomic(path, |w| {
            writeln!(w, "{} {}", self.vocabulary().len(), self.dim())?;
            for token in self.vocabulary().tokens() {
                w.write_all(token.as_bytes())?;
                for x in self.word_vector(token) {
                    write!(w, " {x}")?;
                }
                w.write_all(b"\n")?;
            }
            Ok(())
        })
    }
}
