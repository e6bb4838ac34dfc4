//! Ensemble combination of per-embedding FRNN-OWA model outputs:
//! label-level voting, confidence-score voting, temperature-rescaled
//! softmax weighting, alpha grid search, and exhaustive model-subset
//! selection.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::dataset::{Label, VectorDataset, NUM_LABELS};
use crate::eval::{pcc, FoldAssignment, ScoreReport, NUM_FOLDS};
use crate::frnn::{ClassScores, FrnnConfig, FrnnError, FrnnModel};

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("ensemble requires at least one model output")]
    EmptyOutputs,
    #[error("ensemble requires at least one member")]
    EmptyMembers,
    #[error("{0} is not a label-level voting function")]
    NotLabelLevel(VotingFunction),
    #[error("alpha {0} out of range (0,1)")]
    AlphaOutOfRange(f64),
    #[error("voting function {0} requires alpha")]
    MissingAlpha(VotingFunction),
    #[error("voting function {0} does not take alpha")]
    UnexpectedAlpha(VotingFunction),
    #[error("total confidence weight is zero")]
    ZeroConfidenceWeight,
    #[error("per-model weights are only supported with mean voting")]
    WeightsUnsupported,
    #[error("weights must be non-negative with a positive sum, one per member")]
    BadWeights,
    #[error("ensemble members must be distinct")]
    DuplicateMember,
    #[error("member datasets are not aligned: {0}")]
    MemberMismatch(String),
    #[error("alpha grid is empty")]
    EmptyGrid,
    #[error("subset search supports at most 16 candidates, got {0}")]
    TooManyCandidates(usize),
    #[error("unknown voting function `{0}`")]
    UnknownVoting(String),
    #[error("unknown rescale source `{0}` (expected membership|confidence)")]
    UnknownSource(String),
    #[error(transparent)]
    Frnn(#[from] FrnnError),
}

/// The voting rules for combining member outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VotingFunction {
    Majority,
    Mean,
    RoundedMean,
    Median,
    Maximum,
    Minimum,
    CsMajority,
    CsWeightedAverage,
    CsWaRounded,
    RescaledWa,
    RescaledWaRounded,
}

impl VotingFunction {
    pub const ALL: [VotingFunction; 11] = [
        VotingFunction::Majority,
        VotingFunction::Mean,
        VotingFunction::RoundedMean,
        VotingFunction::Median,
        VotingFunction::Maximum,
        VotingFunction::Minimum,
        VotingFunction::CsMajority,
        VotingFunction::CsWeightedAverage,
        VotingFunction::CsWaRounded,
        VotingFunction::RescaledWa,
        VotingFunction::RescaledWaRounded,
    ];

    pub fn token(self) -> &'static str {
        match self {
            VotingFunction::Majority => "majority",
            VotingFunction::Mean => "mean",
            VotingFunction::RoundedMean => "rounded_mean",
            VotingFunction::Median => "median",
            VotingFunction::Maximum => "max",
            VotingFunction::Minimum => "min",
            VotingFunction::CsMajority => "cs_majority",
            VotingFunction::CsWeightedAverage => "cs_wa",
            VotingFunction::CsWaRounded => "cs_wa_rounded",
            VotingFunction::RescaledWa => "rescaled_wa",
            VotingFunction::RescaledWaRounded => "rescaled_wa_rounded",
        }
    }

    /// Operates on predicted labels only (no confidence scores).
    pub fn is_label_level(self) -> bool {
        matches!(
            self,
            VotingFunction::Majority
                | VotingFunction::Mean
                | VotingFunction::RoundedMean
                | VotingFunction::Median
                | VotingFunction::Maximum
                | VotingFunction::Minimum
        )
    }

    pub fn needs_alpha(self) -> bool {
        matches!(self, VotingFunction::RescaledWa | VotingFunction::RescaledWaRounded)
    }
}

impl fmt::Display for VotingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for VotingFunction {
    type Err = EnsembleError;

    fn from_str(s: &str) -> Result<Self, EnsembleError> {
        VotingFunction::ALL
            .into_iter()
            .find(|v| v.token() == s)
            .ok_or_else(|| EnsembleError::UnknownVoting(s.to_string()))
    }
}

/// Which per-class scores feed the softmax rescaling.
///
/// The membership variant uses the raw mean memberships `(lower+upper)/2`,
/// whose values cluster around 0.5 and match the centering constant; the
/// confidence variant uses the normalized scores instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RescaleSource {
    #[default]
    MeanMembership,
    NormalizedConfidence,
}

impl RescaleSource {
    pub fn token(self) -> &'static str {
        match self {
            RescaleSource::MeanMembership => "membership",
            RescaleSource::NormalizedConfidence => "confidence",
        }
    }
}

impl FromStr for RescaleSource {
    type Err = EnsembleError;

    fn from_str(s: &str) -> Result<Self, EnsembleError> {
        match s {
            "membership" => Ok(RescaleSource::MeanMembership),
            "confidence" => Ok(RescaleSource::NormalizedConfidence),
            other => Err(EnsembleError::UnknownSource(other.to_string())),
        }
    }
}

/// One member model's output for one query.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelOutput {
    pub model_id: String,
    pub predicted_label: Label,
    /// Normalized confidence scores, summing to 1.
    pub confidence: [f64; NUM_LABELS],
    /// Raw mean memberships `(lower+upper)/2`.
    pub mean_membership: [f64; NUM_LABELS],
}

impl ModelOutput {
    pub fn from_scores(model_id: impl Into<String>, scores: &ClassScores) -> Result<Self, FrnnError> {
        Ok(Self {
            model_id: model_id.into(),
            predicted_label: scores.predicted_label(),
            confidence: scores.confidence()?,
            mean_membership: scores.mean_membership(),
        })
    }
}

/// Rounds to the nearest integer label, halves up, clamped to 0-3.
pub fn round_label(x: f64) -> Label {
    ((x + 0.5).floor()).clamp(0.0, (NUM_LABELS - 1) as f64) as Label
}

fn check_alpha(alpha: f64) -> Result<f64, EnsembleError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(EnsembleError::AlphaOutOfRange(alpha));
    }
    Ok(alpha)
}

fn argmax_lowest(scores: &[f64; NUM_LABELS]) -> Label {
    let mut best = 0usize;
    for c in 1..NUM_LABELS {
        if scores[c] > scores[best] {
            best = c;
        }
    }
    best as Label
}

fn ensure_non_empty(outputs: &[&ModelOutput]) -> Result<(), EnsembleError> {
    if outputs.is_empty() {
        Err(EnsembleError::EmptyOutputs)
    } else {
        Ok(())
    }
}

fn vote_labels_ref(outputs: &[&ModelOutput], kind: VotingFunction) -> Result<f64, EnsembleError> {
    ensure_non_empty(outputs)?;
    if !kind.is_label_level() {
        return Err(EnsembleError::NotLabelLevel(kind));
    }
    let labels: Vec<Label> = outputs.iter().map(|o| o.predicted_label).collect();
    Ok(match kind {
        VotingFunction::Majority => {
            let mut counts = [0.0f64; NUM_LABELS];
            for &l in &labels {
                counts[l as usize] += 1.0;
            }
            argmax_lowest(&counts) as f64
        }
        VotingFunction::Mean => {
            labels.iter().map(|&l| l as f64).sum::<f64>() / labels.len() as f64
        }
        VotingFunction::RoundedMean => {
            round_label(labels.iter().map(|&l| l as f64).sum::<f64>() / labels.len() as f64) as f64
        }
        VotingFunction::Median => {
            let mut sorted = labels.clone();
            sorted.sort_unstable();
            let n = sorted.len();
            if n % 2 == 1 {
                sorted[n / 2] as f64
            } else {
                (sorted[n / 2 - 1] as f64 + sorted[n / 2] as f64) / 2.0
            }
        }
        VotingFunction::Maximum => *labels.iter().max().expect("non-empty") as f64,
        VotingFunction::Minimum => *labels.iter().min().expect("non-empty") as f64,
        _ => unreachable!("label-level kinds handled above"),
    })
}

/// Label-level voting over the members' predicted labels. `majority`
/// resolves ties toward the lowest label; `mean` may return a fractional
/// value; `rounded_mean` rounds half-up and clamps to [0,3].
pub fn vote_labels(outputs: &[ModelOutput], kind: VotingFunction) -> Result<f64, EnsembleError> {
    vote_labels_ref(&outputs.iter().collect::<Vec<_>>(), kind)
}

fn cs_majority_ref(outputs: &[&ModelOutput]) -> Result<Label, EnsembleError> {
    ensure_non_empty(outputs)?;
    let mut sums = [0.0f64; NUM_LABELS];
    for o in outputs {
        for c in 0..NUM_LABELS {
            sums[c] += o.confidence[c];
        }
    }
    Ok(argmax_lowest(&sums))
}

/// The label with the highest total confidence across members; ties go to
/// the lowest label.
pub fn cs_majority(outputs: &[ModelOutput]) -> Result<Label, EnsembleError> {
    cs_majority_ref(&outputs.iter().collect::<Vec<_>>())
}

fn cs_weighted_average_ref(outputs: &[&ModelOutput]) -> Result<f64, EnsembleError> {
    ensure_non_empty(outputs)?;
    let mut weighted = 0.0;
    let mut total = 0.0;
    for o in outputs {
        let c = o.confidence[o.predicted_label as usize];
        weighted += c * o.predicted_label as f64;
        total += c;
    }
    if total <= 0.0 {
        return Err(EnsembleError::ZeroConfidenceWeight);
    }
    Ok(weighted / total)
}

/// Weighted average of the members' predicted labels, each weighted by the
/// member's confidence in its own prediction.
pub fn cs_weighted_average(outputs: &[ModelOutput]) -> Result<f64, EnsembleError> {
    cs_weighted_average_ref(&outputs.iter().collect::<Vec<_>>())
}

fn rescale_ref(
    outputs: &[&ModelOutput],
    alpha: f64,
    source: RescaleSource,
) -> Result<[f64; NUM_LABELS], EnsembleError> {
    ensure_non_empty(outputs)?;
    check_alpha(alpha)?;
    let mut z = [0.0f64; NUM_LABELS];
    for o in outputs {
        let scores = match source {
            RescaleSource::MeanMembership => &o.mean_membership,
            RescaleSource::NormalizedConfidence => &o.confidence,
        };
        for c in 0..NUM_LABELS {
            z[c] += (scores[c] - 0.5) / alpha;
        }
    }
    // max-subtraction keeps exp() in range for any alpha down to 1e-4
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps = z.map(|v| (v - m).exp());
    let total: f64 = exps.iter().sum();
    Ok(exps.map(|e| e / total))
}

/// Temperature-softmax rescaling of the summed, 0.5-centered mean
/// memberships: `C_i = exp(sum_j (S_ij - 0.5)/alpha)`, normalized over
/// classes.
pub fn rescale_confidences(
    outputs: &[ModelOutput],
    alpha: f64,
) -> Result<[f64; NUM_LABELS], EnsembleError> {
    rescale_confidences_from(outputs, alpha, RescaleSource::MeanMembership)
}

/// As [`rescale_confidences`], with an explicit score source.
pub fn rescale_confidences_from(
    outputs: &[ModelOutput],
    alpha: f64,
    source: RescaleSource,
) -> Result<[f64; NUM_LABELS], EnsembleError> {
    rescale_ref(&outputs.iter().collect::<Vec<_>>(), alpha, source)
}

fn rescaled_wa_ref(
    outputs: &[&ModelOutput],
    alpha: f64,
    source: RescaleSource,
) -> Result<f64, EnsembleError> {
    let c = rescale_ref(outputs, alpha, source)?;
    Ok(c.iter().enumerate().map(|(i, ci)| i as f64 * ci).sum())
}

/// Expected label under the rescaled class distribution:
/// `sum_i i * C_i`.
pub fn rescaled_wa_predict(outputs: &[ModelOutput], alpha: f64) -> Result<f64, EnsembleError> {
    rescaled_wa_predict_from(outputs, alpha, RescaleSource::MeanMembership)
}

/// As [`rescaled_wa_predict`], with an explicit score source.
pub fn rescaled_wa_predict_from(
    outputs: &[ModelOutput],
    alpha: f64,
    source: RescaleSource,
) -> Result<f64, EnsembleError> {
    rescaled_wa_ref(&outputs.iter().collect::<Vec<_>>(), alpha, source)
}

fn vote_ref(
    outputs: &[&ModelOutput],
    voting: VotingFunction,
    alpha: Option<f64>,
    source: RescaleSource,
    weights: Option<&[f64]>,
) -> Result<f64, EnsembleError> {
    if voting.needs_alpha() && alpha.is_none() {
        return Err(EnsembleError::MissingAlpha(voting));
    }
    if !voting.needs_alpha() && alpha.is_some() {
        return Err(EnsembleError::UnexpectedAlpha(voting));
    }
    if let Some(w) = weights {
        if voting != VotingFunction::Mean {
            return Err(EnsembleError::WeightsUnsupported);
        }
        ensure_non_empty(outputs)?;
        if w.len() != outputs.len() || w.iter().any(|&x| x < 0.0) {
            return Err(EnsembleError::BadWeights);
        }
        let total: f64 = w.iter().sum();
        if total <= 0.0 {
            return Err(EnsembleError::BadWeights);
        }
        let weighted: f64 = outputs
            .iter()
            .zip(w)
            .map(|(o, &wi)| wi * o.predicted_label as f64)
            .sum();
        return Ok(weighted / total);
    }
    match voting {
        v if v.is_label_level() => vote_labels_ref(outputs, v),
        VotingFunction::CsMajority => Ok(cs_majority_ref(outputs)? as f64),
        VotingFunction::CsWeightedAverage => cs_weighted_average_ref(outputs),
        VotingFunction::CsWaRounded => Ok(round_label(cs_weighted_average_ref(outputs)?) as f64),
        VotingFunction::RescaledWa => rescaled_wa_ref(outputs, alpha.expect("checked"), source),
        VotingFunction::RescaledWaRounded => {
            Ok(round_label(rescaled_wa_ref(outputs, alpha.expect("checked"), source)?) as f64)
        }
        _ => unreachable!("all voting kinds covered"),
    }
}

/// Applies any voting function to one set of member outputs. `alpha` must be
/// present exactly for the rescaled kinds; optional per-model `weights`
/// (aligned with `outputs`) are honoured by mean voting only.
pub fn vote(
    outputs: &[ModelOutput],
    voting: VotingFunction,
    alpha: Option<f64>,
    source: RescaleSource,
    weights: Option<&[f64]>,
) -> Result<f64, EnsembleError> {
    vote_ref(&outputs.iter().collect::<Vec<_>>(), voting, alpha, source, weights)
}

/// One ensemble member: a model id, its own vector view of the shared
/// instances, and its classifier configuration.
pub struct MemberModel {
    pub id: String,
    pub dataset: VectorDataset,
    pub config: FrnnConfig,
}

/// Cached cross-validated outputs of every member for every instance.
///
/// Each instance's outputs come from the fold where it was in the test
/// split. Computing this once lets alpha grids and subset searches re-vote
/// without refitting any model.
pub struct EnsembleCv {
    model_ids: Vec<String>,
    /// outputs[member][instance]
    outputs: Vec<Vec<ModelOutput>>,
    labels: Vec<f64>,
    folds: FoldAssignment,
}

impl EnsembleCv {
    /// Fits every member on each fold's training split and records its
    /// outputs on the fold's test split. Member datasets must list the same
    /// instance ids and labels in the same order.
    pub fn compute(members: &[MemberModel], folds: &FoldAssignment) -> Result<Self, EnsembleError> {
        if members.is_empty() {
            return Err(EnsembleError::EmptyMembers);
        }
        let n = members[0].dataset.len();
        if folds.len() != n {
            return Err(EnsembleError::MemberMismatch(format!(
                "fold assignment covers {} instances, dataset has {n}",
                folds.len()
            )));
        }
        let mut ids = std::collections::HashSet::new();
        for member in members {
            if !ids.insert(member.id.as_str()) {
                return Err(EnsembleError::DuplicateMember);
            }
            if member.dataset.len() != n {
                return Err(EnsembleError::MemberMismatch(format!(
                    "member {} has {} instances, expected {n}",
                    member.id,
                    member.dataset.len()
                )));
            }
            for (a, b) in members[0]
                .dataset
                .instances()
                .iter()
                .zip(member.dataset.instances())
            {
                if a.id != b.id || a.label != b.label {
                    return Err(EnsembleError::MemberMismatch(format!(
                        "member {} disagrees on instance {} (id {} label {})",
                        member.id, a.id, b.id, b.label
                    )));
                }
            }
        }

        let labels: Vec<f64> = members[0].dataset.labels().iter().map(|&l| l as f64).collect();
        let mut outputs: Vec<Vec<Option<ModelOutput>>> = vec![vec![None; n]; members.len()];
        for fold in 0..NUM_FOLDS {
            let train = folds.train_indices(fold);
            let test = folds.test_indices(fold);
            for (m, member) in members.iter().enumerate() {
                let model = FrnnModel::fit_subset(&member.dataset, &train, member.config)?;
                let fold_outputs: Result<Vec<ModelOutput>, FrnnError> = test
                    .par_iter()
                    .map(|&i| {
                        let scores = model.approximations(&member.dataset.instances()[i].vector)?;
                        ModelOutput::from_scores(member.id.as_str(), &scores)
                    })
                    .collect();
                for (&i, out) in test.iter().zip(fold_outputs?) {
                    outputs[m][i] = Some(out);
                }
            }
        }
        let outputs = outputs
            .into_iter()
            .map(|per_member| {
                per_member
                    .into_iter()
                    .map(|o| o.expect("folds partition the dataset"))
                    .collect()
            })
            .collect();
        Ok(Self {
            model_ids: members.iter().map(|m| m.id.clone()).collect(),
            outputs,
            labels,
            folds: folds.clone(),
        })
    }

    pub fn model_ids(&self) -> &[String] {
        &self.model_ids
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Votes per instance over the selected members (indices into
    /// `model_ids`).
    pub fn predictions(
        &self,
        selection: &[usize],
        voting: VotingFunction,
        alpha: Option<f64>,
        source: RescaleSource,
        weights: Option<&[f64]>,
    ) -> Result<Vec<f64>, EnsembleError> {
        let mut refs: Vec<&ModelOutput> = Vec::with_capacity(selection.len());
        let mut preds = Vec::with_capacity(self.len());
        for i in 0..self.len() {
            refs.clear();
            refs.extend(selection.iter().map(|&m| &self.outputs[m][i]));
            preds.push(vote_ref(&refs, voting, alpha, source, weights)?);
        }
        Ok(preds)
    }

    /// Per-fold PCC of the given predictions; folds with undefined
    /// correlation score negative infinity.
    pub fn report(&self, predictions: &[f64]) -> ScoreReport {
        let mut per_fold = [f64::NEG_INFINITY; NUM_FOLDS];
        for fold in 0..NUM_FOLDS {
            let test = self.folds.test_indices(fold);
            let truth: Vec<f64> = test.iter().map(|&i| self.labels[i]).collect();
            let preds: Vec<f64> = test.iter().map(|&i| predictions[i]).collect();
            per_fold[fold] = pcc(&truth, &preds).unwrap_or(f64::NEG_INFINITY);
        }
        ScoreReport::from_folds(per_fold)
    }

    /// Cross-validated score of one voting configuration over the selected
    /// members.
    pub fn score(
        &self,
        selection: &[usize],
        voting: VotingFunction,
        alpha: Option<f64>,
        source: RescaleSource,
        weights: Option<&[f64]>,
    ) -> Result<ScoreReport, EnsembleError> {
        let preds = self.predictions(selection, voting, alpha, source, weights)?;
        Ok(self.report(&preds))
    }

    fn all_members(&self) -> Vec<usize> {
        (0..self.model_ids.len()).collect()
    }

    /// Grid search for the alpha maximising the cross-validated PCC of the
    /// unrounded rescaled weighted average over all members. Degenerate
    /// scores count as negative infinity; ties go to the smaller alpha.
    pub fn tune_alpha(
        &self,
        grid: &[f64],
        source: RescaleSource,
    ) -> Result<(f64, f64), EnsembleError> {
        if grid.is_empty() {
            return Err(EnsembleError::EmptyGrid);
        }
        let mut sorted = grid.to_vec();
        sorted.sort_by(|a, b| a.total_cmp(b));
        for &alpha in &sorted {
            check_alpha(alpha)?;
        }
        let selection = self.all_members();
        let scores: Vec<f64> = sorted
            .par_iter()
            .map(|&alpha| {
                self.score(&selection, VotingFunction::RescaledWa, Some(alpha), source, None)
                    .map(|r| r.mean_pcc)
                    .unwrap_or(f64::NEG_INFINITY)
            })
            .collect();
        let mut best = 0usize;
        for i in 1..sorted.len() {
            if scores[i] > scores[best] {
                best = i;
            }
        }
        Ok((sorted[best], scores[best]))
    }

    /// Exhaustive search over all non-empty member subsets for the one
    /// maximising cross-validated PCC under `voting` (the rounded rescaled
    /// weighted average in the standard setup). Ties prefer the smaller
    /// subset, then the lexicographically first one.
    pub fn select_models(
        &self,
        voting: VotingFunction,
        alpha: Option<f64>,
        source: RescaleSource,
    ) -> Result<(Vec<String>, f64), EnsembleError> {
        let n = self.model_ids.len();
        if n == 0 {
            return Err(EnsembleError::EmptyMembers);
        }
        if n > 16 {
            return Err(EnsembleError::TooManyCandidates(n));
        }
        if voting.needs_alpha() {
            check_alpha(alpha.ok_or(EnsembleError::MissingAlpha(voting))?)?;
        }
        let masks: Vec<u32> = (1..(1u32 << n)).collect();
        let scored: Vec<(Vec<usize>, f64)> = masks
            .par_iter()
            .map(|&mask| {
                let selection: Vec<usize> = (0..n).filter(|&m| mask & (1 << m) != 0).collect();
                let score = self
                    .score(&selection, voting, alpha, source, None)
                    .map(|r| r.mean_pcc)
                    .unwrap_or(f64::NEG_INFINITY);
                (selection, score)
            })
            .collect();
        let mut best: Option<&(Vec<usize>, f64)> = None;
        for cand in &scored {
            let better = match best {
                None => true,
                Some((bsel, bscore)) => {
                    cand.1 > *bscore
                        || (cand.1 == *bscore
                            && (cand.0.len() < bsel.len()
                                || (cand.0.len() == bsel.len() && cand.0 < *bsel)))
                }
            };
            if better {
                best = Some(cand);
            }
        }
        let (selection, score) = best.expect("at least one subset");
        Ok((
            selection.iter().map(|&m| self.model_ids[m].clone()).collect(),
            *score,
        ))
    }
}
