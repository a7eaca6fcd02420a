use std::cmp::Ordering;
use std::collections::HashMap;

fn dot64(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| f64::from(x) * f64::from(y)).sum()
}

fn norm64(a: &[f32]) -> f64 {
    dot64(a, a).sqrt()
}

fn cosine_from_parts(dot: f64, norm_a: f64, norm_b: f64) -> Option<f64> {
    if norm_a == 0.0 || norm_b == 0.0 {
        return None;
    }
    Some((dot / (norm_a * norm_b)).clamp(-1.0, 1.0))
}

/// Cosine similarity in double precision; `None` if either vector is zero.
pub fn cosine_of(a: &[f32], b: &[f32]) -> Option<f64> {
    cosine_from_parts(dot64(a, b), norm64(a), norm64(b))
}

/// A fixed set of tokens with their composed vectors, for exact similarity
/// queries.
#[derive(Clone, Debug)]
pub struct TokenSpace {
    tokens: Vec<String>,
    dim: usize,
    vectors: Vec<f32>,
    norms: Vec<f64>,
    index: HashMap<String, usize>,
}

impl TokenSpace {
    /// `vectors` is row-major, one row of `dim` values per token. Tokens must
    /// be distinct.
    pub fn new(tokens: Vec<String>, vectors: Vec<f32>, dim: usize) -> TokenSpace {
        assert_eq!(tokens.len() * dim, vectors.len(), "vector matrix shape");
        let norms = vectors.chunks_exact(dim).map(norm64).collect();
        let index: HashMap<String, usize> = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        assert_eq!(index.len(), tokens.len(), "duplicate token in space");
        TokenSpace {
            tokens,
            dim,
            vectors,
            norms,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn token(&self, i: usize) -> &str {
        &self.tokens[i]
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn vector(&self, i: usize) -> &[f32] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn has_direction(&self, i: usize) -> bool {
        self.norms[i] > 0.0
    }

    pub fn cosine(&self, i: usize, j: usize) -> Option<f64> {
        cosine_from_parts(dot64(self.vector(i), self.vector(j)), self.norms[i], self.norms[j])
    }

    /// Descending cosine, then ascending token.
    fn rank(&self, a: &(usize, f64), b: &(usize, f64)) -> Ordering {
        b.1.total_cmp(&a.1).then_with(|| self.tokens[a.0].cmp(&self.tokens[b.0]))
    }

    /// The `n` tokens most similar to token `i`, excluding `i` itself,
    /// by exhaustive scan. Tokens with a zero vector are never returned.
    pub fn top_neighbors(&self, i: usize, n: usize) -> Vec<(usize, f64)> {
        if n == 0 || !self.has_direction(i) {
            return Vec::new();
        }
        let mut scored: Vec<(usize, f64)> = (0..self.len())
            .filter(|&j| j != i)
            .filter_map(|j| self.cosine(i, j).map(|c| (j, c)))
            .collect();
        if n < scored.len() {
            scored.select_nth_unstable_by(n - 1, |a, b| self.rank(a, b));
            scored.truncate(n);
        }
        scored.sort_unstable_by(|a, b| self.rank(a, b));
        scored
    }
}
