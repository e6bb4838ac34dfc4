//! Ordered weighted average (OWA) aggregation and the five weight families
//! used by the fuzzy-rough classifier.
//!
//! An OWA operator aggregates a multiset of values as `sum(w_i * v_(i))`
//! where `v_(i)` is the i-th largest value. The placement of the weight mass
//! interpolates between minimum, mean, and maximum: upper-bound weights are
//! non-increasing (a soft max), lower-bound weights are non-decreasing (a
//! soft min).

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OwaError {
    #[error("OWA weight vector length must be at least 1")]
    EmptyWeights,
    #[error("expected {expected} values for OWA aggregation, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("unknown OWA scheme `{0}` (expected strict|exp|add|invadd|mean)")]
    UnknownScheme(String),
}

/// The five OWA weighting schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OwaScheme {
    /// A single unit weight on the extreme value: plain min/max.
    Strict,
    /// Weights decay by a factor of two from the favoured end.
    Exp,
    /// Linearly decreasing (upper) or increasing (lower) weights.
    Add,
    /// Weights proportional to 1/i, normalized by the p-th harmonic number.
    Invadd,
    /// Uniform weights: the arithmetic mean.
    Mean,
}

impl OwaScheme {
    pub const ALL: [OwaScheme; 5] = [
        OwaScheme::Strict,
        OwaScheme::Exp,
        OwaScheme::Add,
        OwaScheme::Invadd,
        OwaScheme::Mean,
    ];

    /// Canonical config-file token for this scheme.
    pub fn token(self) -> &'static str {
        match self {
            OwaScheme::Strict => "strict",
            OwaScheme::Exp => "exp",
            OwaScheme::Add => "add",
            OwaScheme::Invadd => "invadd",
            OwaScheme::Mean => "mean",
        }
    }
}

impl fmt::Display for OwaScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for OwaScheme {
    type Err = OwaError;

    fn from_str(s: &str) -> Result<Self, OwaError> {
        match s {
            "strict" => Ok(OwaScheme::Strict),
            "exp" => Ok(OwaScheme::Exp),
            "add" => Ok(OwaScheme::Add),
            "invadd" => Ok(OwaScheme::Invadd),
            "mean" => Ok(OwaScheme::Mean),
            other => Err(OwaError::UnknownScheme(other.to_string())),
        }
    }
}

/// Which approximation a weight vector serves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bound {
    Lower,
    Upper,
}

/// A normalized OWA weight vector for one bound, scheme, and length.
///
/// Invariants: every weight lies in [0,1], the weights sum to 1, and the
/// lower-bound vector is the exact reverse of the upper-bound vector of the
/// same scheme and length.
#[derive(Debug, Clone, PartialEq)]
pub struct OwaWeights {
    weights: Vec<f64>,
    bound: Bound,
    scheme: OwaScheme,
}

impl OwaWeights {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn bound(&self) -> Bound {
        self.bound
    }

    pub fn scheme(&self) -> OwaScheme {
        self.scheme
    }
}

/// Builds the weight vector for `scheme` and `bound` of length `p`.
///
/// Upper-bound closed forms (1-based position i):
/// - strict: `<1, 0, ..., 0>`
/// - exp:    `w_i = 2^(p-i) / (2^p - 1)`
/// - add:    `w_i = 2(p+1-i) / (p(p+1))`
/// - invadd: `w_i = 1 / (i * D_p)` with `D_p` the p-th harmonic number
/// - mean:   `w_i = 1/p`
///
/// The lower-bound vector is the reverse of the upper-bound vector.
pub fn make_weights(scheme: OwaScheme, bound: Bound, p: usize) -> Result<OwaWeights, OwaError> {
    if p == 0 {
        return Err(OwaError::EmptyWeights);
    }
    let mut weights = upper_weights(scheme, p);
    if bound == Bound::Lower {
        weights.reverse();
    }
    Ok(OwaWeights {
        weights,
        bound,
        scheme,
    })
}

fn upper_weights(scheme: OwaScheme, p: usize) -> Vec<f64> {
    let pf = p as f64;
    match scheme {
        OwaScheme::Strict => {
            let mut w = vec![0.0; p];
            w[0] = 1.0;
            w
        }
        // 2^(p-i)/(2^p - 1) rewritten as 2^(-i)/(1 - 2^(-p)) so large p
        // cannot overflow.
        OwaScheme::Exp => {
            let denom = 1.0 - 2f64.powi(-(p as i32));
            (1..=p).map(|i| 2f64.powi(-(i as i32)) / denom).collect()
        }
        OwaScheme::Add => {
            let denom = pf * (pf + 1.0);
            (1..=p).map(|i| 2.0 * (pf + 1.0 - i as f64) / denom).collect()
        }
        OwaScheme::Invadd => {
            let harmonic: f64 = (1..=p).map(|i| 1.0 / i as f64).sum();
            (1..=p).map(|i| 1.0 / (i as f64 * harmonic)).collect()
        }
        OwaScheme::Mean => vec![1.0 / pf; p],
    }
}

/// OWA aggregation of a multiset: `sum(w_i * v_(i))` over the
/// descending-sorted values. The multiset size must match the weight length.
pub fn owa_aggregate(values: &[f64], weights: &OwaWeights) -> Result<f64, OwaError> {
    if values.len() != weights.len() {
        return Err(OwaError::LengthMismatch {
            expected: weights.len(),
            actual: values.len(),
        });
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    Ok(aggregate_descending(weights.weights(), &sorted))
}

/// Dot product of weights against values already sorted non-increasing.
pub(crate) fn aggregate_descending(weights: &[f64], sorted_desc: &[f64]) -> f64 {
    weights.iter().zip(sorted_desc).map(|(w, v)| w * v).sum()
}

/// Default neighbourhood size for a dataset of `n` instances:
/// `round(sqrt(n) / 2)` (half away from zero), clamped to at least 1.
pub fn default_k(n: usize) -> usize {
    let k = ((n as f64).sqrt() / 2.0 + 0.5).floor();
    (k as usize).max(1)
}
