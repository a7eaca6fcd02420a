use std::borrow::Cow;
use std::collections::HashMap;
use std::sync::atomic::{AtomicU32, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random streams at or above this value belong to n-gram buckets; word rows
/// use their vocabulary index as stream.
const NGRAM_STREAM_BASE: u64 = 1 << 32;

/// Initial value of a parameter row: uniform in `(-1/dim, 1/dim)`, a pure
/// function of `(seed, stream)`.
pub(crate) fn init_row(seed: u64, stream: u64, out: &mut [f32]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let bound = 1.0 / out.len() as f32;
    for x in out {
        *x = rng.random_range(-bound..bound);
    }
}

pub(crate) fn init_word_row(seed: u64, word: u32, out: &mut [f32]) {
    init_row(seed, u64::from(word), out);
}

pub(crate) fn init_bucket_row(seed: u64, bucket: u32, out: &mut [f32]) {
    init_row(seed, NGRAM_STREAM_BASE + u64::from(bucket), out);
}

/// The `bucket_count × dim` n-gram matrix.
///
/// Only rows reachable from the training vocabulary are stored. Every other
/// row still has a well-defined value: its deterministic initialisation,
/// which is what training would have left untouched anyway.
#[derive(Clone, Debug, PartialEq)]
pub struct NgramTable {
    bucket_count: u32,
    dim: usize,
    seed: u64,
    slots: HashMap<u32, u32>,
    buckets: Vec<u32>,
    rows: Vec<f32>,
}

impl NgramTable {
    /// Stores initialised rows for `buckets` (duplicates ignored).
    pub(crate) fn initialised(
        bucket_count: u32,
        dim: usize,
        seed: u64,
        buckets: impl IntoIterator<Item = u32>,
    ) -> NgramTable {
        let mut sorted: Vec<u32> = buckets.into_iter().collect();
        sorted.sort_unstable();
        sorted.dedup();
        let mut rows = vec![0.0; sorted.len() * dim];
        for (bucket, row) in sorted.iter().zip(rows.chunks_exact_mut(dim)) {
            init_bucket_row(seed, *bucket, row);
        }
        Self::from_rows(bucket_count, dim, seed, sorted, rows)
    }

    pub(crate) fn from_rows(
        bucket_count: u32,
        dim: usize,
        seed: u64,
        buckets: Vec<u32>,
        rows: Vec<f32>,
    ) -> NgramTable {
        assert_eq!(buckets.len() * dim, rows.len());
        let slots = buckets.iter().enumerate().map(|(i, &b)| (b, i as u32)).collect();
        NgramTable {
            bucket_count,
            dim,
            seed,
            slots,
            buckets,
            rows,
        }
    }

    pub fn bucket_count(&self) -> u32 {
        self.bucket_count
    }

    /// Buckets with a stored row, ascending.
    pub fn stored_buckets(&self) -> &[u32] {
        &self.buckets
    }

    pub(crate) fn slot(&self, bucket: u32) -> Option<u32> {
        self.slots.get(&bucket).copied()
    }

    pub(crate) fn rows(&self) -> &[f32] {
        &self.rows
    }

    pub(crate) fn rows_mut(&mut self) -> &mut [f32] {
        &mut self.rows
    }

    pub fn row(&self, bucket: u32) -> Cow<'_, [f32]> {
        match self.slot(bucket) {
            Some(slot) => {
                let start = slot as usize * self.dim;
                Cow::Borrowed(&self.rows[start..start + self.dim])
            }
            None => {
                let mut row = vec![0.0; self.dim];
                init_bucket_row(self.seed, bucket, &mut row);
                Cow::Owned(row)
            }
        }
    }
}

/// Row-major `f32` matrix shared between training workers.
///
/// Workers update rows without locks (Hogwild-style). Values are stored as
/// bit patterns in relaxed atomics, so concurrent updates may be lost but
/// never tear.
pub(crate) struct SharedMatrix {
    dim: usize,
    data: Vec<AtomicU32>,
}

impl SharedMatrix {
    pub(crate) fn from_vec(values: Vec<f32>, dim: usize) -> SharedMatrix {
        SharedMatrix {
            dim,
            data: values.into_iter().map(|v| AtomicU32::new(v.to_bits())).collect(),
        }
    }

    pub(crate) fn zeros(rows: usize, dim: usize) -> SharedMatrix {
        Self::from_vec(vec![0.0; rows * dim], dim)
    }

    fn row(&self, row: usize) -> &[AtomicU32] {
        &self.data[row * self.dim..(row + 1) * self.dim]
    }

    pub(crate) fn load_row(&self, row: usize, out: &mut [f32]) {
        for (o, a) in out.iter_mut().zip(self.row(row)) {
            *o = f32::from_bits(a.load(Ordering::Relaxed));
        }
    }

    /// `acc += row`
    pub(crate) fn accumulate_row(&self, row: usize, acc: &mut [f32]) {
        for (o, a) in acc.iter_mut().zip(self.row(row)) {
            *o += f32::from_bits(a.load(Ordering::Relaxed));
        }
    }

    /// `row += scale * delta`
    pub(crate) fn add_to_row(&self, row: usize, delta: &[f32], scale: f32) {
        for (d, a) in delta.iter().zip(self.row(row)) {
            let v = f32::from_bits(a.load(Ordering::Relaxed)) + scale * d;
            a.store(v.to_bits(), Ordering::Relaxed);
        }
    }

    pub(crate) fn into_vec(self) -> Vec<f32> {
        self.data.into_iter().map(|a| f32::from_bits(a.into_inner())).collect()
    }
}
