//! Shared test helpers: an independent brute-force reference implementation
//! of the classifier (its own cosine, its own literal weight formulas, its
//! own element-by-element aggregation loop) plus synthetic data generators.
//!
//! Nothing here calls into the production similarity/OWA/classifier paths;
//! that independence is what makes the equivalence checks meaningful.

#![allow(dead_code)]

use frnn_owa::dataset::{Label, LabeledInstance, VectorDataset, NUM_LABELS};
use frnn_owa::owa::{Bound, OwaScheme};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Plain sequential dot product (deliberately a different accumulation
/// order than the production kernel).
fn naive_dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// Rescaled cosine similarity, straight from the formula.
pub fn naive_similarity(a: &[f64], b: &[f64]) -> f64 {
    let cos = naive_dot(a, b) / (naive_dot(a, a).sqrt() * naive_dot(b, b).sqrt());
    (1.0 + cos) / 2.0
}

/// Literal closed-form weight vectors, 1-based positions as written.
pub fn oracle_weights(scheme: OwaScheme, bound: Bound, p: usize) -> Vec<f64> {
    assert!(p >= 1);
    let pf = p as f64;
    let mut w = vec![0.0; p];
    match (scheme, bound) {
        (OwaScheme::Strict, Bound::Upper) => w[0] = 1.0,
        (OwaScheme::Strict, Bound::Lower) => w[p - 1] = 1.0,
        (OwaScheme::Exp, Bound::Upper) => {
            let denom = 2f64.powi(p as i32) - 1.0;
            for i in 1..=p {
                w[i - 1] = 2f64.powi((p - i) as i32) / denom;
            }
        }
        (OwaScheme::Exp, Bound::Lower) => {
            let denom = 2f64.powi(p as i32) - 1.0;
            for i in 1..=p {
                w[i - 1] = 2f64.powi((i - 1) as i32) / denom;
            }
        }
        (OwaScheme::Add, Bound::Upper) => {
            for i in 1..=p {
                w[i - 1] = 2.0 * (pf + 1.0 - i as f64) / (pf * (pf + 1.0));
            }
        }
        (OwaScheme::Add, Bound::Lower) => {
            for i in 1..=p {
                w[i - 1] = 2.0 * i as f64 / (pf * (pf + 1.0));
            }
        }
        (OwaScheme::Invadd, Bound::Upper) => {
            let d: f64 = (1..=p).map(|i| 1.0 / i as f64).sum();
            for i in 1..=p {
                w[i - 1] = 1.0 / (i as f64 * d);
            }
        }
        (OwaScheme::Invadd, Bound::Lower) => {
            let d: f64 = (1..=p).map(|i| 1.0 / i as f64).sum();
            for i in 1..=p {
                w[i - 1] = 1.0 / ((p + 1 - i) as f64 * d);
            }
        }
        (OwaScheme::Mean, _) => {
            for i in 0..p {
                w[i] = 1.0 / pf;
            }
        }
    }
    w
}

/// Eq.-style OWA: sort the multiset descending, multiply element by element.
pub fn oracle_owa(values: &[f64], weights: &[f64]) -> f64 {
    assert_eq!(values.len(), weights.len());
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut total = 0.0;
    for i in 0..sorted.len() {
        total += weights[i] * sorted[i];
    }
    total
}

/// Brute-force lower/upper approximation memberships of `query` for every
/// class: all similarities per class are computed and sorted, the k best
/// kept, and the aggregation applied by hand.
pub fn oracle_approximations(
    train: &[(Vec<f64>, Label)],
    query: &[f64],
    k: usize,
    lower_scheme: OwaScheme,
    upper_scheme: OwaScheme,
) -> ([f64; NUM_LABELS], [f64; NUM_LABELS]) {
    let mut lower = [0.0; NUM_LABELS];
    let mut upper = [0.0; NUM_LABELS];
    for c in 0..NUM_LABELS as Label {
        let mut in_class: Vec<f64> = train
            .iter()
            .filter(|(_, l)| *l == c)
            .map(|(x, _)| naive_similarity(x, query))
            .collect();
        in_class.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let p = k.min(in_class.len());
        let values: Vec<f64> = in_class[..p].to_vec();
        upper[c as usize] = oracle_owa(&values, &oracle_weights(upper_scheme, Bound::Upper, p));

        let mut out_class: Vec<f64> = train
            .iter()
            .filter(|(_, l)| *l != c)
            .map(|(x, _)| naive_similarity(x, query))
            .collect();
        out_class.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let p = k.min(out_class.len());
        let values: Vec<f64> = out_class[..p].iter().map(|r| 1.0 - r).collect();
        lower[c as usize] = oracle_owa(&values, &oracle_weights(lower_scheme, Bound::Lower, p));

        // memberships are convex combinations of values in [0,1]; squeeze the
        // float overshoot (weights summing to 1 +- 1 ulp) back into the
        // domain so exact boundary ties are honoured
        upper[c as usize] = upper[c as usize].clamp(0.0, 1.0);
        lower[c as usize] = lower[c as usize].clamp(0.0, 1.0);
    }
    (lower, upper)
}

/// Brute-force prediction: argmax of lower + upper, ties to the lowest
/// label.
pub fn oracle_predict(
    train: &[(Vec<f64>, Label)],
    query: &[f64],
    k: usize,
    lower_scheme: OwaScheme,
    upper_scheme: OwaScheme,
) -> Label {
    let (lower, upper) = oracle_approximations(train, query, k, lower_scheme, upper_scheme);
    let mut best = 0usize;
    for c in 1..NUM_LABELS {
        if lower[c] + upper[c] > lower[best] + upper[best] {
            best = c;
        }
    }
    best as Label
}

/// Textbook two-pass Pearson correlation: means first, then three separate
/// accumulation loops.
pub fn textbook_pcc(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mut mx = 0.0;
    for &v in x {
        mx += v;
    }
    mx /= n;
    let mut my = 0.0;
    for &v in y {
        my += v;
    }
    my /= n;
    let mut num = 0.0;
    for i in 0..x.len() {
        num += (x[i] - mx) * (y[i] - my);
    }
    let mut sx = 0.0;
    for &v in x {
        sx += (v - mx) * (v - mx);
    }
    let mut sy = 0.0;
    for &v in y {
        sy += (v - my) * (v - my);
    }
    num / (sx * sy).sqrt()
}

/// A random dataset with all four classes present and no zero vectors.
/// Returned as both the raw (vector, label) pairs and a `VectorDataset`.
pub fn random_dataset(
    rng: &mut ChaCha8Rng,
    n: usize,
    dim: usize,
) -> (Vec<(Vec<f64>, Label)>, VectorDataset) {
    assert!(n >= NUM_LABELS);
    let mut pairs: Vec<(Vec<f64>, Label)> = Vec::with_capacity(n);
    for i in 0..n {
        // first four instances pin one of each class
        let label = if i < NUM_LABELS {
            i as Label
        } else {
            rng.gen_range(0..NUM_LABELS as u8)
        };
        let vector: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0f64)).collect();
        let vector = if vector.iter().all(|&v| v.abs() < 1e-9) {
            vec![1.0; dim]
        } else {
            vector
        };
        pairs.push((vector, label));
    }
    let instances: Vec<LabeledInstance> = pairs
        .iter()
        .enumerate()
        .map(|(i, (v, l))| LabeledInstance {
            id: format!("i{i:05}"),
            vector: v.clone(),
            label: *l,
        })
        .collect();
    let ds = VectorDataset::new(dim, instances).expect("generator yields a valid dataset");
    (pairs, ds)
}

/// A nonzero random query vector.
pub fn random_query(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0f64)).collect();
        if v.iter().any(|&x| x.abs() > 1e-6) {
            return v;
        }
    }
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
