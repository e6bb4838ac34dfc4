//! Cosine similarity, its rescaling to [0,1], and exact brute-force
//! k-nearest-neighbour retrieval.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SimilarityError {
    #[error("vector dimensions differ ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("cosine is undefined for a zero-norm vector")]
    ZeroNorm,
    #[error("k must be at least 1")]
    ZeroK,
    #[error("neighbour pool is empty")]
    EmptyPool,
}

/// A rescaled cosine similarity, guaranteed to lie in [0,1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SimilarityValue(f64);

impl SimilarityValue {
    /// Wraps a raw value, returning `None` outside [0,1].
    pub fn new(value: f64) -> Option<Self> {
        (0.0..=1.0).contains(&value).then_some(Self(value))
    }

    /// `(1 + cos) / 2`, clamped against float overshoot.
    pub(crate) fn from_cosine(cos: f64) -> Self {
        Self(((1.0 + cos) / 2.0).clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Dot product with four parallel accumulators; the fixed summation order
/// keeps results identical across runs and thread counts.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let mut chunks_a = a.chunks_exact(4);
    let mut chunks_b = b.chunks_exact(4);
    for (ca, cb) in chunks_a.by_ref().zip(chunks_b.by_ref()) {
        acc[0] += ca[0] * cb[0];
        acc[1] += ca[1] * cb[1];
        acc[2] += ca[2] * cb[2];
        acc[3] += ca[3] * cb[3];
    }
    let mut tail = 0.0;
    for (x, y) in chunks_a.remainder().iter().zip(chunks_b.remainder()) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Cosine of the angle between two vectors, in [-1,1].
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64, SimilarityError> {
    if a.len() != b.len() {
        return Err(SimilarityError::DimensionMismatch(a.len(), b.len()));
    }
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(SimilarityError::ZeroNorm);
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

/// The similarity relation: cosine rescaled to [0,1] via `(1 + cos) / 2`.
pub fn cos_similarity(a: &[f64], b: &[f64]) -> Result<SimilarityValue, SimilarityError> {
    Ok(SimilarityValue::from_cosine(cosine(a, b)?))
}

/// Neighbours of a query, sorted by similarity, most similar first.
#[derive(Debug, Clone)]
pub struct NeighbourList {
    entries: Vec<(usize, SimilarityValue)>,
}

impl NeighbourList {
    pub fn entries(&self) -> &[(usize, SimilarityValue)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Exact k-nearest-neighbour search over `pool` by rescaled cosine
/// similarity. Returns the `min(k, |pool|)` most similar entries; equal
/// similarities are ordered by ascending pool index.
pub fn k_nearest<'a, I>(query: &[f64], pool: I, k: usize) -> Result<NeighbourList, SimilarityError>
where
    I: IntoIterator<Item = (usize, &'a [f64])>,
{
    if k == 0 {
        return Err(SimilarityError::ZeroK);
    }
    let mut entries = Vec::new();
    for (index, vector) in pool {
        entries.push((index, cos_similarity(query, vector)?));
    }
    if entries.is_empty() {
        return Err(SimilarityError::EmptyPool);
    }
    entries.sort_unstable_by(|a, b| b.1.value().total_cmp(&a.1.value()).then(a.0.cmp(&b.0)));
    entries.truncate(k);
    Ok(NeighbourList { entries })
}
