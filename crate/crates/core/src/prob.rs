//! Probability and logit vectors plus the information-theoretic primitives
//! (softmax, Shannon entropy, mode) that every truncation strategy builds on.
//!
//! All entropies are in nats. `0 · ln 0` is taken to be `0`.

use serde::Serialize;

use crate::error::{Error, Result};

/// Slack accepted when a caller hands us probabilities directly. Anything
/// within this distance of summing to one is renormalized, anything further
/// is rejected.
pub const INPUT_SUM_TOLERANCE: f64 = 1e-6;

/// Maximum deviation from one allowed for a constructed [`ProbDist`].
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Neumaier-compensated sum. Entropy of large uniform vocabularies needs it to
/// stay within 1e-12 of `ln n`.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut carry = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Raw model scores, one per vocabulary item. `-inf` marks a masked token.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogitVector {
    values: Vec<f64>,
}

impl LogitVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidLogits("empty logit vector".into()));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| v.is_nan() || *v == &f64::INFINITY)
        {
            return Err(Error::InvalidLogits(format!("entry {i} is {v}")));
        }
        Ok(Self { values })
    }

    /// Like [`LogitVector::new`] but also checks the length against a
    /// declared vocabulary size.
    pub fn with_vocab_size(values: Vec<f64>, vocab_size: usize) -> Result<Self> {
        if values.len() != vocab_size {
            return Err(Error::InvalidLogits(format!(
                "expected {vocab_size} logits, got {}",
                values.len()
            )));
        }
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_masked(&self, index: usize) -> bool {
        self.values[index] == f64::NEG_INFINITY
    }
}

/// A validated probability vector over a finite vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbDist {
    probs: Vec<f64>,
}

impl ProbDist {
    /// Validates `probs`. Vectors summing to within [`INPUT_SUM_TOLERANCE`]
    /// of one are rescaled; anything else is rejected.
    pub fn new(mut probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution(
                "empty probability vector".into(),
            ));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::InvalidDistribution(format!(
                "entry {i} is {p}, expected a finite value >= 0"
            )));
        }
        let total = compensated_sum(probs.iter().copied());
        if (total - 1.0).abs() > INPUT_SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        if (total - 1.0).abs() > SUM_TOLERANCE {
            probs.iter_mut().for_each(|p| *p /= total);
        }
        Ok(Self { probs })
    }

    /// Caller guarantees the invariants (non-negative, sums to one).
    pub(crate) fn from_normalized(probs: Vec<f64>) -> Self {
        debug_assert!(!probs.is_empty());
        debug_assert!((compensated_sum(probs.iter().copied()) - 1.0).abs() <= SUM_TOLERANCE);
        Self { probs }
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::parameter("n", n, "vocabulary size must be >= 1"));
        }
        Ok(Self {
            probs: vec![1.0 / n as f64; n],
        })
    }

    pub fn one_hot(n: usize, index: usize) -> Result<Self> {
        if index >= n {
            return Err(Error::parameter(
                "index",
                index,
                "must be < vocabulary size",
            ));
        }
        let mut probs = vec![0.0; n];
        probs[index] = 1.0;
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn entropy(&self) -> EntropyReport {
        entropy(self)
    }

    pub fn mode(&self) -> ModeInfo {
        mode(self)
    }

    /// Natural-log view of the distribution; zero entries become `-inf`.
    pub fn to_logits(&self) -> LogitVector {
        LogitVector {
            values: self
                .probs
                .iter()
                .map(|&p| if p > 0.0 { p.ln() } else { f64::NEG_INFINITY })
                .collect(),
        }
    }

    /// Re-tempers the distribution: `p_i^(1/T)` renormalized. `T = 1` is the
    /// identity and returns an exact copy.
    pub fn with_temperature(&self, temperature: f64) -> Result<Self> {
        check_temperature(temperature)?;
        if temperature == 1.0 {
            return Ok(self.clone());
        }
        softmax(&self.to_logits(), temperature)
    }
}

/// Shannon entropy of a distribution together with its ceiling `ln n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyReport {
    pub entropy: f64,
    pub max_entropy: f64,
    pub normalized: f64,
}

impl EntropyReport {
    /// Builds a report from a raw entropy value for a vocabulary of size `n`.
    /// `normalized` is clamped to `[0, 1]` and is `0` when `n = 1`.
    pub fn from_entropy(entropy: f64, n: usize) -> Self {
        let max_entropy = (n.max(1) as f64).ln();
        let normalized = if n > 1 {
            (entropy / max_entropy).clamp(0.0, 1.0)
        } else {
            0.0
        };
        Self {
            entropy,
            max_entropy,
            normalized,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeInfo {
    pub index: usize,
    pub p_max: f64,
}

fn check_temperature(temperature: f64) -> Result<()> {
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(Error::parameter(
            "temperature",
            temperature,
            "must be a finite value > 0",
        ));
    }
    Ok(())
}

/// Temperature-scaled softmax, `p_i ∝ exp(x_i / T)`, evaluated after shifting
/// by the largest finite logit. Masked entries map to exactly zero.
pub fn softmax(logits: &LogitVector, temperature: f64) -> Result<ProbDist> {
    check_temperature(temperature)?;
    let max = logits
        .values
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::Degenerate("every logit is masked".into()));
    }
    let mut probs: Vec<f64> = logits
        .values
        .iter()
        .map(|&v| {
            if v == f64::NEG_INFINITY {
                0.0
            } else {
                ((v - max) / temperature).exp()
            }
        })
        .collect();
    // The max entry contributes exp(0) = 1, so the total is never below one.
    let total = compensated_sum(probs.iter().copied());
    probs.iter_mut().for_each(|p| *p /= total);
    Ok(ProbDist::from_normalized(probs))
}

pub fn entropy(dist: &ProbDist) -> EntropyReport {
    let h = -compensated_sum(dist.probs.iter().filter(|&&p| p > 0.0).map(|&p| p * p.ln()));
    // Rounding can leave a one-hot at -0.0 or a hair below zero.
    EntropyReport::from_entropy(h.max(0.0), dist.len())
}

/// Argmax with ties resolved towards the lowest index.
pub fn mode(dist: &ProbDist) -> ModeInfo {
    let mut index = 0;
    let mut p_max = dist.probs[0];
    for (i, &p) in dist.probs.iter().enumerate().skip(1) {
        if p > p_max {
            index = i;
            p_max = p;
        }
    }
    ModeInfo { index, p_max }
}

/// Rescales a sparse subset of probabilities so it sums to one. Order of the
/// entries is preserved.
pub fn renormalize<K: Clone>(subset: &[(K, f64)]) -> Result<Vec<(K, f64)>> {
    if subset.is_empty() {
        return Err(Error::Degenerate(
            "cannot renormalize an empty subset".into(),
        ));
    }
    if let Some(p) = subset
        .iter()
        .map(|(_, p)| *p)
        .find(|p| !(p.is_finite() && *p > 0.0))
    {
        return Err(Error::InvalidDistribution(format!(
            "subset entry {p} is not a positive probability"
        )));
    }
    let total = compensated_sum(subset.iter().map(|(_, p)| *p));
    Ok(subset.iter().map(|(k, p)| (k.clone(), p / total)).collect())
}
