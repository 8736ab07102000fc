//! Truncation strategies: Top-b and the standard baselines.
//!
//! Every strategy maps a distribution to a [`TruncationResult`]: a support
//! set listed by descending probability (ties by lowest index), the
//! renormalized probabilities over that support, and diagnostics. Threshold
//! comparisons are inclusive and zero-probability tokens never enter a
//! support.

use std::cmp::Ordering;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{compensated_sum, softmax, EntropyReport, LogitVector, ProbDist};

pub const DEFAULT_BASE_BANDWIDTH: f64 = 0.3;
pub const DEFAULT_TOP_K: usize = 40;
pub const DEFAULT_TOP_P: f64 = 0.9;
pub const DEFAULT_MIN_P: f64 = 0.05;
pub const DEFAULT_EPSILON: f64 = 3e-4;
pub const DEFAULT_ETA: f64 = 6e-4;

/// Strategy tag and its hyperparameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Strategy {
    TopB {
        base_bandwidth: f64,
    },
    TopK {
        k: usize,
    },
    TopP {
        p: f64,
    },
    MinP {
        alpha: f64,
    },
    Epsilon {
        epsilon: f64,
    },
    Eta {
        eta: f64,
    },
    #[serde(rename = "temperature")]
    TemperatureOnly,
}

impl Strategy {
    pub const NAMES: [&'static str; 7] = [
        "top-b",
        "top-k",
        "top-p",
        "min-p",
        "epsilon",
        "eta",
        "temperature",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::TopB { .. } => "top-b",
            Strategy::TopK { .. } => "top-k",
            Strategy::TopP { .. } => "top-p",
            Strategy::MinP { .. } => "min-p",
            Strategy::Epsilon { .. } => "epsilon",
            Strategy::Eta { .. } => "eta",
            Strategy::TemperatureOnly => "temperature",
        }
    }

    /// The strategy called `name` with its default hyperparameter.
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "top-b" => Strategy::TopB {
                base_bandwidth: DEFAULT_BASE_BANDWIDTH,
            },
            "top-k" => Strategy::TopK { k: DEFAULT_TOP_K },
            "top-p" => Strategy::TopP { p: DEFAULT_TOP_P },
            "min-p" => Strategy::MinP {
                alpha: DEFAULT_MIN_P,
            },
            "epsilon" => Strategy::Epsilon {
                epsilon: DEFAULT_EPSILON,
            },
            "eta" => Strategy::Eta { eta: DEFAULT_ETA },
            "temperature" => Strategy::TemperatureOnly,
            _ => return None,
        })
    }

    /// Short human-readable label including the hyperparameter, e.g. `top-k(k=40)`.
    pub fn label(&self) -> String {
        match *self {
            Strategy::TopB { base_bandwidth } => format!("top-b(b={base_bandwidth})"),
            Strategy::TopK { k } => format!("top-k(k={k})"),
            Strategy::TopP { p } => format!("top-p(p={p})"),
            Strategy::MinP { alpha } => format!("min-p(alpha={alpha})"),
            Strategy::Epsilon { epsilon } => format!("epsilon(eps={epsilon})"),
            Strategy::Eta { eta } => format!("eta(eta={eta})"),
            Strategy::TemperatureOnly => "temperature".to_string(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Strategy::TopB { base_bandwidth } => check_open_unit("base_bandwidth", base_bandwidth),
            Strategy::TopK { k } => check_k(k),
            Strategy::TopP { p } => check_half_open_unit("p", p),
            Strategy::MinP { alpha } => check_half_open_unit("alpha", alpha),
            Strategy::Epsilon { epsilon } => check_open_unit("epsilon", epsilon),
            Strategy::Eta { eta } => check_open_unit("eta", eta),
            Strategy::TemperatureOnly => Ok(()),
        }
    }
}

fn default_temperature() -> f64 {
    1.0
}

/// One strategy plus the sampling temperature applied before it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyConfig {
    #[serde(flatten)]
    pub strategy: Strategy,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
}

impl StrategyConfig {
    pub fn new(strategy: Strategy) -> Self {
        Self {
            strategy,
            temperature: 1.0,
        }
    }

    pub fn with_temperature(mut self, temperature: f64) -> Self {
        self.temperature = temperature;
        self
    }

    pub fn top_b(base_bandwidth: f64) -> Self {
        Self::new(Strategy::TopB { base_bandwidth })
    }

    pub fn top_k(k: usize) -> Self {
        Self::new(Strategy::TopK { k })
    }

    pub fn top_p(p: f64) -> Self {
        Self::new(Strategy::TopP { p })
    }

    pub fn min_p(alpha: f64) -> Self {
        Self::new(Strategy::MinP { alpha })
    }

    pub fn epsilon(epsilon: f64) -> Self {
        Self::new(Strategy::Epsilon { epsilon })
    }

    pub fn eta(eta: f64) -> Self {
        Self::new(Strategy::Eta { eta })
    }

    pub fn temperature_only(temperature: f64) -> Self {
        Self::new(Strategy::TemperatureOnly).with_temperature(temperature)
    }

    pub fn name(&self) -> &'static str {
        self.strategy.name()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(Error::parameter(
                "temperature",
                self.temperature,
                "must be a finite value > 0",
            ));
        }
        self.strategy.validate()
    }
}

/// How the Top-b bandwidth was derived from the entropy of the distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandwidthTrace {
    /// `base · (1 + H / H_max)`, always in `[base, 2·base]`.
    pub raw_bandwidth: f64,
    /// `min(raw, 1)`.
    pub clamped_bandwidth: f64,
    pub clamp_applied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationResult {
    /// Token indices, descending probability, ties by lowest index.
    pub support: Vec<usize>,
    /// Probability of each support member after renormalization.
    pub renormalized: Vec<f64>,
    /// Probability of each support member in the truncated distribution
    /// (after temperature, before renormalization).
    pub original: Vec<f64>,
    /// Absolute probability cutoff, if the strategy uses one.
    pub threshold: Option<f64>,
    pub bandwidth: Option<BandwidthTrace>,
    /// Entropy of the distribution that was truncated.
    pub entropy_report: EntropyReport,
}

impl TruncationResult {
    pub fn support_size(&self) -> usize {
        self.support.len()
    }

    /// The mode of the truncated distribution; always the first support member.
    pub fn mode(&self) -> usize {
        self.support[0]
    }

    pub fn contains(&self, token: usize) -> bool {
        self.support.contains(&token)
    }

    /// Shannon entropy (nats) of the renormalized support distribution.
    pub fn truncated_entropy(&self) -> f64 {
        let h = -compensated_sum(
            self.renormalized
                .iter()
                .filter(|&&p| p > 0.0)
                .map(|&p| p * p.ln()),
        );
        h.max(0.0)
    }

    /// Support indices in ascending token order.
    pub fn sorted_support(&self) -> Vec<usize> {
        let mut s = self.support.clone();
        s.sort_unstable();
        s
    }
}

fn check_open_unit(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::parameter(name, value, "must lie in (0, 1)"))
    }
}

fn check_half_open_unit(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value <= 1.0 {
        Ok(())
    } else {
        Err(Error::parameter(name, value, "must lie in (0, 1]"))
    }
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        Err(Error::parameter("k", k, "must be >= 1"))
    } else {
        Ok(())
    }
}

/// Descending by probability, ascending by index on ties.
fn by_rank(probs: &[f64]) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    move |&a, &b| {
        probs[b]
            .partial_cmp(&probs[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    }
}

/// Nonzero tokens in rank order.
fn ranked_tokens(dist: &ProbDist) -> Vec<usize> {
    let probs = dist.probs();
    let mut idx: Vec<usize> = (0..probs.len()).filter(|&i| probs[i] > 0.0).collect();
    idx.sort_by(by_rank(probs));
    idx
}

fn finish(
    dist: &ProbDist,
    mut support: Vec<usize>,
    threshold: Option<f64>,
    bandwidth: Option<BandwidthTrace>,
    entropy_report: EntropyReport,
) -> TruncationResult {
    let probs = dist.probs();
    debug_assert!(!support.is_empty());
    support.sort_by(by_rank(probs));
    let original: Vec<f64> = support.iter().map(|&i| probs[i]).collect();
    let total = compensated_sum(original.iter().copied());
    let renormalized = original.iter().map(|p| p / total).collect();
    TruncationResult {
        support,
        renormalized,
        original,
        threshold,
        bandwidth,
        entropy_report,
    }
}

/// Every nonzero token with probability `>= threshold`, falling back to the
/// mode when that leaves nothing.
fn at_or_above(dist: &ProbDist, threshold: f64) -> Vec<usize> {
    let support: Vec<usize> = dist
        .probs()
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0 && p >= threshold)
        .map(|(i, _)| i)
        .collect();
    if support.is_empty() {
        vec![dist.mode().index]
    } else {
        support
    }
}

/// Adaptive bandwidth `base · (1 + H/H_max)`, clamped to 1.
pub fn top_b_bandwidth(report: &EntropyReport, base_bandwidth: f64) -> Result<BandwidthTrace> {
    check_open_unit("base_bandwidth", base_bandwidth)?;
    let raw_bandwidth = base_bandwidth * (1.0 + report.normalized);
    let clamped_bandwidth = raw_bandwidth.min(1.0);
    Ok(BandwidthTrace {
        raw_bandwidth,
        clamped_bandwidth,
        clamp_applied: raw_bandwidth > 1.0,
    })
}

/// Relative band around the mode with a fixed bandwidth: keeps every token
/// with `p >= (1 - bandwidth) · p_max`. Top-b is this with an
/// entropy-dependent bandwidth.
pub fn truncate_relative_band(dist: &ProbDist, bandwidth: f64) -> Result<TruncationResult> {
    check_half_open_unit("bandwidth", bandwidth)?;
    let threshold = (1.0 - bandwidth) * dist.mode().p_max;
    let support = at_or_above(dist, threshold);
    Ok(finish(dist, support, Some(threshold), None, dist.entropy()))
}

/// Top-b: relative band whose width follows the normalized entropy of the
/// (tempered) distribution.
pub fn truncate_top_b(
    dist: &ProbDist,
    base_bandwidth: f64,
    temperature: f64,
) -> Result<TruncationResult> {
    check_open_unit("base_bandwidth", base_bandwidth)?;
    let dist = dist.with_temperature(temperature)?;
    let report = dist.entropy();
    let trace = top_b_bandwidth(&report, base_bandwidth)?;
    let threshold = (1.0 - trace.clamped_bandwidth) * dist.mode().p_max;
    let support = at_or_above(&dist, threshold);
    Ok(finish(&dist, support, Some(threshold), Some(trace), report))
}

pub fn truncate_top_k(dist: &ProbDist, k: usize) -> Result<TruncationResult> {
    check_k(k)?;
    let mut ranked = ranked_tokens(dist);
    ranked.truncate(k);
    Ok(finish(dist, ranked, None, None, dist.entropy()))
}

/// Nucleus: smallest rank-ordered prefix whose mass reaches `p`. The token
/// that crosses `p` is kept.
pub fn truncate_top_p(dist: &ProbDist, p: f64) -> Result<TruncationResult> {
    check_half_open_unit("p", p)?;
    let probs = dist.probs();
    let ranked = ranked_tokens(dist);
    let mut cumulative = 0.0;
    let mut keep = ranked.len();
    for (i, &tok) in ranked.iter().enumerate() {
        cumulative += probs[tok];
        if cumulative >= p {
            keep = i + 1;
            break;
        }
    }
    let mut support = ranked;
    support.truncate(keep);
    Ok(finish(dist, support, None, None, dist.entropy()))
}

pub fn truncate_min_p(dist: &ProbDist, alpha: f64) -> Result<TruncationResult> {
    check_half_open_unit("alpha", alpha)?;
    let threshold = alpha * dist.mode().p_max;
    let support = at_or_above(dist, threshold);
    Ok(finish(dist, support, Some(threshold), None, dist.entropy()))
}

/// Absolute probability floor `epsilon`.
pub fn truncate_epsilon(dist: &ProbDist, epsilon: f64) -> Result<TruncationResult> {
    check_open_unit("epsilon", epsilon)?;
    let support = at_or_above(dist, epsilon);
    Ok(finish(dist, support, Some(epsilon), None, dist.entropy()))
}

/// Entropy-adaptive floor `min(eta, sqrt(eta) · exp(-H))`.
pub fn truncate_eta(dist: &ProbDist, eta: f64) -> Result<TruncationResult> {
    check_open_unit("eta", eta)?;
    let report = dist.entropy();
    let cutoff = eta.min(eta.sqrt() * (-report.entropy).exp());
    let support = at_or_above(dist, cutoff);
    Ok(finish(dist, support, Some(cutoff), None, report))
}

/// Applies the configured temperature to a probability vector, then the
/// strategy.
pub fn apply_to_dist(config: &StrategyConfig, dist: &ProbDist) -> Result<TruncationResult> {
    config.validate()?;
    let tempered = dist.with_temperature(config.temperature)?;
    dispatch(&config.strategy, &tempered)
}

/// Softmax at the configured temperature, then the strategy.
pub fn apply(config: &StrategyConfig, logits: &LogitVector) -> Result<TruncationResult> {
    config.validate()?;
    let dist = softmax(logits, config.temperature)?;
    dispatch(&config.strategy, &dist)
}

fn dispatch(strategy: &Strategy, dist: &ProbDist) -> Result<TruncationResult> {
    match *strategy {
        Strategy::TopB { base_bandwidth } => truncate_top_b(dist, base_bandwidth, 1.0),
        Strategy::TopK { k } => truncate_top_k(dist, k),
        Strategy::TopP { p } => truncate_top_p(dist, p),
        Strategy::MinP { alpha } => truncate_min_p(dist, alpha),
        Strategy::Epsilon { epsilon } => truncate_epsilon(dist, epsilon),
        Strategy::Eta { eta } => truncate_eta(dist, eta),
        Strategy::TemperatureOnly => Ok(finish(
            dist,
            ranked_tokens(dist),
            None,
            None,
            dist.entropy(),
        )),
    }
}

/// Multinomial draw over the renormalized support. Always consumes exactly
/// one `f64` from `rng`.
pub fn sample<R: Rng + ?Sized>(result: &TruncationResult, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut cumulative = 0.0;
    for (&token, &p) in result.support.iter().zip(&result.renormalized) {
        cumulative += p;
        if u < cumulative {
            return token;
        }
    }
    *result.support.last().expect("support is never empty")
}
