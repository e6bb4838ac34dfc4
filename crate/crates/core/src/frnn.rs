//! The FRNN-OWA classifier.
//!
//! For a query y and each decision class C, the model computes a membership
//! to the upper approximation of C (an OWA over the similarities of y's k
//! nearest neighbours inside C) and to the lower approximation (an OWA over
//! the dissimilarities `1 - R` of y's k nearest neighbours outside C). The
//! predicted label is the class maximising lower + upper.
//!
//! When a class pool or its complement has fewer than k members, weights are
//! generated for the actual multiset size.

use rayon::prelude::*;
use thiserror::Error;

use crate::dataset::{Label, LabeledInstance, VectorDataset, NUM_LABELS};
use crate::owa::{aggregate_descending, make_weights, Bound, OwaError, OwaScheme};
use crate::similarity::{dot, norm, SimilarityError};

#[derive(Debug, Error)]
pub enum FrnnError {
    #[error("k must be at least 1")]
    InvalidK,
    #[error("class {0} has no training instances")]
    MissingClass(Label),
    #[error("query dimension {got} does not match model dimension {expected}")]
    QueryDimension { expected: usize, got: usize },
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
    #[error(transparent)]
    Owa(#[from] OwaError),
    #[error("all class memberships are zero; confidence is undefined")]
    DegenerateConfidence,
}

/// Classifier hyperparameters: neighbourhood size and the OWA schemes for
/// the two approximations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrnnConfig {
    pub k: usize,
    pub lower_scheme: OwaScheme,
    pub upper_scheme: OwaScheme,
}

impl FrnnConfig {
    pub fn new(k: usize, lower_scheme: OwaScheme, upper_scheme: OwaScheme) -> Result<Self, FrnnError> {
        if k == 0 {
            return Err(FrnnError::InvalidK);
        }
        Ok(Self {
            k,
            lower_scheme,
            upper_scheme,
        })
    }
}

#[derive(Debug)]
struct PoolEntry {
    instance: LabeledInstance,
    norm: f64,
}

/// A fitted FRNN-OWA model: per-class training pools plus configuration.
/// Fitting stores the data; all computation happens at query time.
#[derive(Debug)]
pub struct FrnnModel {
    config: FrnnConfig,
    dimension: usize,
    pools: [Vec<PoolEntry>; NUM_LABELS],
}

/// Similarities of one query to every training instance, grouped by class
/// and sorted non-increasing. Separating this from the OWA step lets grid
/// searches reuse one similarity pass for many (scheme, k) settings.
#[derive(Debug, Clone)]
pub struct ClassSimilarities {
    per_class: [Vec<f64>; NUM_LABELS],
}

/// Lower/upper approximation memberships per class, with derived mean
/// memberships and confidence scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassScores {
    lower: [f64; NUM_LABELS],
    upper: [f64; NUM_LABELS],
}

impl FrnnModel {
    /// Stores the training data in per-class pools. Every label 0-3 must be
    /// present.
    pub fn fit(ds: &VectorDataset, config: FrnnConfig) -> Result<Self, FrnnError> {
        let indices: Vec<usize> = (0..ds.len()).collect();
        Self::fit_subset(ds, &indices, config)
    }

    /// Fits on the given instance indices only (used by cross-validation).
    pub fn fit_subset(
        ds: &VectorDataset,
        indices: &[usize],
        config: FrnnConfig,
    ) -> Result<Self, FrnnError> {
        if config.k == 0 {
            return Err(FrnnError::InvalidK);
        }
        let mut pools: [Vec<PoolEntry>; NUM_LABELS] = Default::default();
        for &i in indices {
            let instance = ds.instances()[i].clone();
            let norm = norm(&instance.vector);
            pools[instance.label as usize].push(PoolEntry { instance, norm });
        }
        for label in 0..NUM_LABELS {
            if pools[label].is_empty() {
                return Err(FrnnError::MissingClass(label as Label));
            }
        }
        Ok(Self {
            config,
            dimension: ds.dimension(),
            pools,
        })
    }

    pub fn config(&self) -> &FrnnConfig {
        &self.config
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn class_size(&self, label: Label) -> usize {
        self.pools[label as usize].len()
    }

    /// Rescaled cosine similarities of `y` to each class pool, sorted
    /// non-increasing per class.
    pub fn class_similarities(&self, y: &[f64]) -> Result<ClassSimilarities, FrnnError> {
        if y.len() != self.dimension {
            return Err(FrnnError::QueryDimension {
                expected: self.dimension,
                got: y.len(),
            });
        }
        let ny = norm(y);
        if ny == 0.0 {
            return Err(FrnnError::Similarity(SimilarityError::ZeroNorm));
        }
        let mut per_class: [Vec<f64>; NUM_LABELS] = Default::default();
        for (label, pool) in self.pools.iter().enumerate() {
            let mut sims: Vec<f64> = pool
                .iter()
                .map(|e| {
                    let cos = (dot(y, &e.instance.vector) / (ny * e.norm)).clamp(-1.0, 1.0);
                    (1.0 + cos) / 2.0
                })
                .collect();
            sims.sort_unstable_by(|a, b| b.total_cmp(a));
            per_class[label] = sims;
        }
        Ok(ClassSimilarities { per_class })
    }

    /// Lower/upper approximation memberships of `y` for every class.
    pub fn approximations(&self, y: &[f64]) -> Result<ClassScores, FrnnError> {
        self.class_similarities(y)?.scores(&self.config)
    }

    /// The class maximising lower + upper membership; ties go to the lower
    /// label.
    pub fn predict(&self, y: &[f64]) -> Result<Label, FrnnError> {
        Ok(self.approximations(y)?.predicted_label())
    }

    /// Normalized mean memberships, summing to 1.
    pub fn confidence_vector(&self, y: &[f64]) -> Result<[f64; NUM_LABELS], FrnnError> {
        self.approximations(y)?.confidence()
    }

    /// Predicts a batch of queries in parallel with deterministic output
    /// order.
    pub fn predict_batch(&self, queries: &[Vec<f64>]) -> Result<Vec<Label>, FrnnError> {
        queries.par_iter().map(|y| self.predict(y)).collect()
    }
}

impl ClassSimilarities {
    /// Sorted similarities of the query to class `label`.
    pub fn class(&self, label: Label) -> &[f64] {
        &self.per_class[label as usize]
    }

    /// Applies the OWA approximation step for the given configuration.
    pub fn scores(&self, config: &FrnnConfig) -> Result<ClassScores, FrnnError> {
        if config.k == 0 {
            return Err(FrnnError::InvalidK);
        }
        let mut lower = [0.0; NUM_LABELS];
        let mut upper = [0.0; NUM_LABELS];
        for c in 0..NUM_LABELS {
            let within = &self.per_class[c];
            let p = config.k.min(within.len());
            if p == 0 {
                return Err(FrnnError::MissingClass(c as Label));
            }
            let w_upper = make_weights(config.upper_scheme, Bound::Upper, p)?;
            upper[c] = aggregate_descending(w_upper.weights(), &within[..p]).clamp(0.0, 1.0);

            // k most similar instances outside class c; their dissimilarities
            // 1 - R in non-increasing order are the reverse of the merged
            // similarity order
            let outside = top_k_outside(&self.per_class, c, config.k);
            let values: Vec<f64> = outside.iter().rev().map(|r| 1.0 - r).collect();
            let w_lower = make_weights(config.lower_scheme, Bound::Lower, values.len())?;
            lower[c] = aggregate_descending(w_lower.weights(), &values).clamp(0.0, 1.0);
        }
        Ok(ClassScores { lower, upper })
    }
}

/// The `min(k, total)` largest similarities among all classes except
/// `excluded`, non-increasing. The three source lists are already sorted.
fn top_k_outside(per_class: &[Vec<f64>; NUM_LABELS], excluded: usize, k: usize) -> Vec<f64> {
    let lists: Vec<&[f64]> = (0..NUM_LABELS)
        .filter(|&c| c != excluded)
        .map(|c| per_class[c].as_slice())
        .collect();
    let total: usize = lists.iter().map(|l| l.len()).sum();
    let take = k.min(total);
    let mut cursor = vec![0usize; lists.len()];
    let mut out = Vec::with_capacity(take);
    for _ in 0..take {
        let mut best: Option<(usize, f64)> = None;
        for (j, list) in lists.iter().enumerate() {
            if cursor[j] < list.len() {
                let v = list[cursor[j]];
                if best.map_or(true, |(_, bv)| v > bv) {
                    best = Some((j, v));
                }
            }
        }
        let (j, v) = best.expect("take never exceeds total");
        cursor[j] += 1;
        out.push(v);
    }
    out
}

impl ClassScores {
    pub fn lower(&self) -> &[f64; NUM_LABELS] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64; NUM_LABELS] {
        &self.upper
    }

    /// `(lower + upper) / 2` per class.
    pub fn mean_membership(&self) -> [f64; NUM_LABELS] {
        let mut out = [0.0; NUM_LABELS];
        for c in 0..NUM_LABELS {
            out[c] = (self.lower[c] + self.upper[c]) / 2.0;
        }
        out
    }

    /// Mean memberships divided by their sum; sums to 1.
    pub fn confidence(&self) -> Result<[f64; NUM_LABELS], FrnnError> {
        let mean = self.mean_membership();
        let total: f64 = mean.iter().sum();
        if total == 0.0 {
            return Err(FrnnError::DegenerateConfidence);
        }
        Ok(mean.map(|m| m / total))
    }

    /// Argmax of lower + upper; ties break toward the lower label.
    pub fn predicted_label(&self) -> Label {
        let mut best = 0usize;
        let mut best_score = self.lower[0] + self.upper[0];
        for c in 1..NUM_LABELS {
            let score = self.lower[c] + self.upper[c];
            if score > best_score {
                best = c;
                best_score = score;
            }
        }
        best as Label
    }
}
