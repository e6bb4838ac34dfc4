//! Fuzzy-rough nearest-neighbour (FRNN) classification with ordered weighted
//! average (OWA) aggregation, for ordinal emotion-intensity labelling of
//! tweet embedding vectors.
//!
//! The crate covers the full experimental pipeline:
//! - [`dataset`]: task-file and embedding-vector ingestion, class statistics
//! - [`preprocess`]: tweet cleaning, emoji/emoticon replacement, stop-word
//!   removal, mean pooling of word vectors
//! - [`similarity`]: rescaled cosine similarity and exact k-NN retrieval
//! - [`owa`]: the five OWA weight families and aggregation
//! - [`frnn`]: lower/upper approximation memberships and prediction
//! - [`ensemble`]: voting functions, softmax-rescaled confidence weighting,
//!   alpha tuning, and model-subset selection
//! - [`eval`]: Pearson correlation, stratified 5-fold cross-validation, and
//!   the two-sided Welch t-test

pub mod dataset;
pub mod ensemble;
pub mod eval;
pub mod frnn;
pub mod owa;
pub mod preprocess;
pub mod similarity;

pub use dataset::{
    ClassStats, Emotion, Label, LabeledInstance, TextRecord, VectorDataset, NUM_LABELS,
};
pub use ensemble::{EnsembleCv, MemberModel, ModelOutput, RescaleSource, VotingFunction};
pub use eval::{FoldAssignment, ScoreReport, NUM_FOLDS};
pub use frnn::{ClassScores, ClassSimilarities, FrnnConfig, FrnnModel};
pub use owa::{Bound, OwaScheme, OwaWeights};
pub use preprocess::{CleanLevel, CleanOptions, EmojiTable};
pub use similarity::{NeighbourList, SimilarityValue};
