//! Evaluation: Pearson correlation, deterministic stratified 5-fold
//! cross-validation, the two-sided Welch t-test, and per-emotion score
//! averaging.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::dataset::{Emotion, Label, VectorDataset, NUM_LABELS};
use crate::frnn::FrnnError;

pub const NUM_FOLDS: usize = 5;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least two points")]
    TooFewPoints,
    #[error("undefined correlation: input vector is constant")]
    ConstantVector,
    #[error("class {label} has only {count} instances; stratified {NUM_FOLDS}-fold CV needs at least {NUM_FOLDS}")]
    ClassTooSmall { label: Label, count: usize },
    #[error("both samples have zero variance")]
    ZeroVariance,
    #[error("scores must contain exactly the four emotions")]
    MissingEmotion,
    #[error("pipeline failure: {0}")]
    Pipeline(String),
    #[error(transparent)]
    Frnn(#[from] FrnnError),
}

/// Pearson correlation coefficient between two equal-length vectors.
pub fn pcc(x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
    if x.len() != y.len() {
        return Err(EvalError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(EvalError::TooFewPoints);
    }
    let n = x.len() as f64;
    let mean_x: f64 = x.iter().sum::<f64>() / n;
    let mean_y: f64 = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mean_x;
        let dy = yi - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(EvalError::ConstantVector);
    }
    Ok(cov / (var_x * var_y).sqrt())
}

/// A deterministic assignment of every dataset instance to one of the five
/// folds, stratified by label.
#[derive(Debug, Clone)]
pub struct FoldAssignment {
    seed: u64,
    fold_of: Vec<usize>,
}

impl FoldAssignment {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Fold index per dataset instance, in instance order.
    pub fn fold_of(&self) -> &[usize] {
        &self.fold_of
    }

    pub fn len(&self) -> usize {
        self.fold_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fold_of.is_empty()
    }

    /// Instance indices of the test fold `fold`, in dataset order.
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        self.fold_of
            .iter()
            .enumerate()
            .filter(|(_, &f)| f == fold)
            .map(|(i, _)| i)
            .collect()
    }

    /// Instance indices outside fold `fold`, in dataset order.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        self.fold_of
            .iter()
            .enumerate()
            .filter(|(_, &f)| f != fold)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Stratified fold construction. Within each class, instance indices are
/// shuffled by a ChaCha8 stream seeded with
/// `seed XOR ((label + 1) * 0x9E3779B97F4A7C15)` and dealt round-robin to
/// the five folds, so per-class fold sizes differ by at most one and the
/// assignment is a pure function of (seed, dataset order, labels).
pub fn make_folds(ds: &VectorDataset, seed: u64) -> Result<FoldAssignment, EvalError> {
    const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
    let mut per_class: [Vec<usize>; NUM_LABELS] = Default::default();
    for (i, inst) in ds.instances().iter().enumerate() {
        per_class[inst.label as usize].push(i);
    }
    for (label, members) in per_class.iter().enumerate() {
        if members.len() < NUM_FOLDS {
            return Err(EvalError::ClassTooSmall {
                label: label as Label,
                count: members.len(),
            });
        }
    }
    let mut fold_of = vec![0usize; ds.len()];
    for (label, members) in per_class.iter_mut().enumerate() {
        let stream = seed ^ GAMMA.wrapping_mul(label as u64 + 1);
        let mut rng = ChaCha8Rng::seed_from_u64(stream);
        members.shuffle(&mut rng);
        for (j, &idx) in members.iter().enumerate() {
            fold_of[idx] = j % NUM_FOLDS;
        }
    }
    Ok(FoldAssignment { seed, fold_of })
}

/// Per-fold and mean cross-validation PCC for one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport {
    pub per_fold: [f64; NUM_FOLDS],
    pub mean_pcc: f64,
    pub config_digest: String,
}

impl ScoreReport {
    pub fn from_folds(per_fold: [f64; NUM_FOLDS]) -> Self {
        let mean_pcc = per_fold.iter().sum::<f64>() / NUM_FOLDS as f64;
        Self {
            per_fold,
            mean_pcc,
            config_digest: String::new(),
        }
    }

    /// `config_digest<TAB>fold0..fold4<TAB>mean`.
    pub fn to_tsv_row(&self) -> String {
        let folds = self
            .per_fold
            .iter()
            .map(|f| format!("{f:.6}"))
            .collect::<Vec<_>>()
            .join("\t");
        format!("{}\t{}\t{:.6}", self.config_digest, folds, self.mean_pcc)
    }
}

/// Runs 5-fold cross-validation of a configured predictor.
///
/// For each fold the pipeline receives (train indices, test indices) and
/// returns one prediction per test index, floats allowed. Fold scores are
/// `pcc(true labels, predictions)`; a failing fold scores negative infinity
/// and the run continues.
pub fn cross_validate<P>(pipeline: P, ds: &VectorDataset, folds: &FoldAssignment) -> ScoreReport
where
    P: Fn(&[usize], &[usize]) -> Result<Vec<f64>, EvalError>,
{
    let labels = ds.labels();
    let mut per_fold = [f64::NEG_INFINITY; NUM_FOLDS];
    for fold in 0..NUM_FOLDS {
        let train = folds.train_indices(fold);
        let test = folds.test_indices(fold);
        let truth: Vec<f64> = test.iter().map(|&i| labels[i] as f64).collect();
        let score = pipeline(&train, &test).and_then(|preds| {
            if preds.len() != test.len() {
                return Err(EvalError::Pipeline(format!(
                    "pipeline returned {} predictions for {} test instances",
                    preds.len(),
                    test.len()
                )));
            }
            pcc(&truth, &preds)
        });
        per_fold[fold] = match score {
            Ok(s) => s,
            Err(e) => {
                log::warn!("fold {fold} scored -inf: {e}");
                f64::NEG_INFINITY
            }
        };
    }
    ScoreReport::from_folds(per_fold)
}

/// Two-sample two-sided Welch t-test p-value, with Welch-Satterthwaite
/// degrees of freedom.
pub fn t_test_two_sided(a: &[f64], b: &[f64]) -> Result<f64, EvalError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(EvalError::TooFewPoints);
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let var = |v: &[f64], m: f64| v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() as f64 - 1.0);
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (var(a, ma), var(b, mb));
    if va == 0.0 && vb == 0.0 {
        return Err(EvalError::ZeroVariance);
    }
    let sa = va / na;
    let sb = vb / nb;
    let t = (ma - mb) / (sa + sb).sqrt();
    let df = (sa + sb).powi(2) / (sa.powi(2) / (na - 1.0) + sb.powi(2) / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df)
        .map_err(|e| EvalError::Pipeline(format!("t-distribution: {e}")))?;
    let p = 2.0 * (1.0 - dist.cdf(t.abs()));
    Ok(p.clamp(0.0, 1.0))
}

/// Arithmetic mean of the four per-emotion scores.
pub fn average_emotions(scores: &HashMap<Emotion, f64>) -> Result<f64, EvalError> {
    if scores.len() != Emotion::ALL.len() {
        return Err(EvalError::MissingEmotion);
    }
    let mut total = 0.0;
    for emotion in Emotion::ALL {
        total += scores.get(&emotion).ok_or(EvalError::MissingEmotion)?;
    }
    Ok(total / Emotion::ALL.len() as f64)
}
