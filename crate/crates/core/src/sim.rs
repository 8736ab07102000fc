//! Synthetic autoregressive process and trajectory runner.
//!
//! A [`ProcessConfig`] stands in for a language model: at every step it
//! produces a next-token distribution from one of three regimes.
//!
//! * `PEAKED`: softmax of a logit vector that is zero everywhere except the
//!   mode, which carries the sharpness `L`.
//! * `FLAT`: uniform over the vocabulary.
//! * `MIXED`: a flat-Dirichlet draw, built from exponential variates.
//!
//! Step distributions are a pure function of `(process seed, step, history
//! digest)`. The generator is pinned so other implementations can reproduce
//! it bit for bit:
//!
//! ```text
//! splitmix64(x):   z = x + 0x9E3779B97F4A7C15
//!                  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//!                  z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//!                  return z ^ (z >> 31)                  (wrapping u64 arithmetic)
//! step key:        k = splitmix64(splitmix64(seed ^ splitmix64(step)) ^ digest)
//! PEAKED mode:     k mod vocab_size
//! MIXED draw i:    s_i = k + (i + 1) * 0x9E3779B97F4A7C15
//!                  u_i = ((splitmix64(s_i) >> 11) + 0.5) / 2^53
//!                  e_i = -ln(u_i);  p_i = e_i / sum(e)
//! digest update:   d' = splitmix64(d ^ splitmix64(token + 1)),  d_0 = 0
//! ```
//!
//! Sampling uses ChaCha8 seeded with the run seed, one `f64` per step.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{softmax, LogitVector, ProbDist};
use crate::truncation::{apply_to_dist, sample, StrategyConfig};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 64-bit running hash of the sampled token ids.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HistoryDigest(pub u64);

impl HistoryDigest {
    pub fn push(&mut self, token: usize) {
        self.0 = splitmix64(self.0 ^ splitmix64(token as u64 + 1));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Regime {
    Peaked,
    Flat,
    Mixed,
}

/// Which regime runs at which step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Schedule {
    /// The same regime at every step.
    Constant(Regime),
    /// One regime per step; length must equal `steps`.
    Sequence(Vec<Regime>),
    /// Every step PEAKED, sharpness annealed linearly from `l_start` at the
    /// first step to `l_end` at the last.
    Anneal { l_start: f64, l_end: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessConfig {
    pub vocab_size: usize,
    pub steps: usize,
    pub schedule: Schedule,
    /// Mode logit `L` for PEAKED steps (ignored by `Anneal`).
    pub sharpness: f64,
    #[serde(default)]
    pub seed: u64,
}

impl ProcessConfig {
    pub fn constant(
        regime: Regime,
        vocab_size: usize,
        steps: usize,
        sharpness: f64,
        seed: u64,
    ) -> Self {
        Self {
            vocab_size,
            steps,
            schedule: Schedule::Constant(regime),
            sharpness,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.vocab_size < 2 {
            return Err(Error::InvalidProcess(format!(
                "vocab_size must be >= 2, got {}",
                self.vocab_size
            )));
        }
        if self.steps == 0 {
            return Err(Error::InvalidProcess("steps must be >= 1".into()));
        }
        let positive = |l: f64| l.is_finite() && l > 0.0;
        let uses_sharpness = match &self.schedule {
            Schedule::Constant(r) => *r == Regime::Peaked,
            Schedule::Sequence(regimes) => {
                if regimes.len() != self.steps {
                    return Err(Error::InvalidProcess(format!(
                        "schedule has {} entries but steps = {}",
                        regimes.len(),
                        self.steps
                    )));
                }
                regimes.contains(&Regime::Peaked)
            }
            Schedule::Anneal { l_start, l_end } => {
                if !(positive(*l_start) && positive(*l_end)) {
                    return Err(Error::InvalidProcess(format!(
                        "anneal endpoints must be > 0, got {l_start} -> {l_end}"
                    )));
                }
                false
            }
        };
        if uses_sharpness && !positive(self.sharpness) {
            return Err(Error::InvalidProcess(format!(
                "sharpness must be > 0 for PEAKED steps, got {}",
                self.sharpness
            )));
        }
        Ok(())
    }

    /// Regime and sharpness in force at `step`.
    pub fn regime_at(&self, step: usize) -> (Regime, f64) {
        match &self.schedule {
            Schedule::Constant(r) => (*r, self.sharpness),
            Schedule::Sequence(regimes) => (regimes[step], self.sharpness),
            Schedule::Anneal { l_start, l_end } => {
                let frac = if self.steps > 1 {
                    step as f64 / (self.steps - 1) as f64
                } else {
                    0.0
                };
                (Regime::Peaked, l_start + (l_end - l_start) * frac)
            }
        }
    }
}

fn step_key(seed: u64, step: usize, digest: HistoryDigest) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(step as u64)) ^ digest.0)
}

/// Next-token distribution of the synthetic process.
pub fn step_distribution(
    config: &ProcessConfig,
    step: usize,
    digest: HistoryDigest,
) -> Result<ProbDist> {
    config.validate()?;
    if step >= config.steps {
        return Err(Error::StepOutOfRange {
            step,
            steps: config.steps,
        });
    }
    let n = config.vocab_size;
    let key = step_key(config.seed, step, digest);
    match config.regime_at(step) {
        (Regime::Flat, _) => ProbDist::uniform(n),
        (Regime::Peaked, sharpness) => {
            let mut logits = vec![0.0; n];
            logits[(key % n as u64) as usize] = sharpness;
            softmax(&LogitVector::new(logits)?, 1.0)
        }
        (Regime::Mixed, _) => {
            let draws: Vec<f64> = (0..n as u64)
                .map(|i| {
                    let z = splitmix64(key.wrapping_add((i + 1).wrapping_mul(GOLDEN_GAMMA)));
                    let u = ((z >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
                    -u.ln()
                })
                .collect();
            let total: f64 = draws.iter().sum();
            ProbDist::new(draws.into_iter().map(|e| e / total).collect())
        }
    }
}

/// One decoding step of a simulated run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    /// Entropy (nats) of the tempered distribution before truncation.
    pub entropy: f64,
    pub normalized_entropy: f64,
    /// Entropy (nats) of the renormalized support.
    pub truncated_entropy: f64,
    /// Branching factor at this step.
    pub support_size: usize,
    /// Effective Top-b bandwidth; `None` for other strategies.
    pub bandwidth: Option<f64>,
    pub sampled_token: usize,
    pub mode_agreement: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub strategy: StrategyConfig,
    pub seed: u64,
    pub records: Vec<StepRecord>,
}

fn mean(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = values.len() as f64;
    values.sum::<f64>() / n
}

impl Trajectory {
    /// Mean post-truncation entropy.
    pub fn mean_entropy(&self) -> f64 {
        mean(self.records.iter().map(|r| r.truncated_entropy))
    }

    /// Mean entropy of the distributions before truncation.
    pub fn mean_pre_entropy(&self) -> f64 {
        mean(self.records.iter().map(|r| r.entropy))
    }

    pub fn mean_support_size(&self) -> f64 {
        mean(self.records.iter().map(|r| r.support_size as f64))
    }

    /// `exp(mean(ln |S_t|))`, at least 1.
    pub fn geometric_mean_branching(&self) -> f64 {
        mean(self.records.iter().map(|r| (r.support_size as f64).ln())).exp()
    }

    pub fn mode_agreement_rate(&self) -> f64 {
        let hits = self.records.iter().filter(|r| r.mode_agreement).count();
        hits as f64 / self.records.len() as f64
    }
}

pub fn run_trajectory(
    process: &ProcessConfig,
    strategy: &StrategyConfig,
    seed: u64,
) -> Result<Trajectory> {
    process.validate()?;
    strategy.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut digest = HistoryDigest::default();
    let mut records = Vec::with_capacity(process.steps);
    for step in 0..process.steps {
        let dist = step_distribution(process, step, digest)?;
        let result = apply_to_dist(strategy, &dist)?;
        let token = sample(&result, &mut rng);
        records.push(StepRecord {
            step,
            entropy: result.entropy_report.entropy,
            normalized_entropy: result.entropy_report.normalized,
            truncated_entropy: result.truncated_entropy(),
            support_size: result.support_size(),
            bandwidth: result.bandwidth.map(|b| b.clamped_bandwidth),
            sampled_token: token,
            mode_agreement: token == result.mode(),
        });
        digest.push(token);
    }
    Ok(Trajectory {
        strategy: *strategy,
        seed,
        records,
    })
}

/// Per-seed values of one metric and their across-seed mean and unbiased
/// sample variance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSummary {
    pub per_seed: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
}

impl MetricSummary {
    pub fn from_values(per_seed: Vec<f64>) -> Self {
        let n = per_seed.len();
        let mean = per_seed.iter().sum::<f64>() / n as f64;
        let variance = if n > 1 {
            per_seed.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Self {
            per_seed,
            mean,
            variance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub strategy: StrategyConfig,
    pub n_seeds: usize,
    /// Mean post-truncation entropy per seed.
    pub mean_entropy: MetricSummary,
    /// Mean pre-truncation entropy per seed.
    pub mean_pre_entropy: MetricSummary,
    pub mean_support_size: MetricSummary,
    pub geometric_mean_branching: MetricSummary,
    pub mode_agreement_rate: MetricSummary,
}

impl RunSummary {
    fn from_trajectories(strategy: StrategyConfig, runs: &[Trajectory]) -> Self {
        let metric =
            |f: fn(&Trajectory) -> f64| MetricSummary::from_values(runs.iter().map(f).collect());
        Self {
            strategy,
            n_seeds: runs.len(),
            mean_entropy: metric(Trajectory::mean_entropy),
            mean_pre_entropy: metric(Trajectory::mean_pre_entropy),
            mean_support_size: metric(Trajectory::mean_support_size),
            geometric_mean_branching: metric(Trajectory::geometric_mean_branching),
            mode_agreement_rate: metric(Trajectory::mode_agreement_rate),
        }
    }
}

/// Runs every strategy on seeds `0..n_seeds` (the same seeds for each) and
/// aggregates. Seeds run in parallel; aggregation follows seed order.
pub fn run_comparison(
    process: &ProcessConfig,
    strategies: &[StrategyConfig],
    n_seeds: usize,
) -> Result<Vec<RunSummary>> {
    if n_seeds < 2 {
        return Err(Error::parameter("n_seeds", n_seeds, "must be >= 2"));
    }
    process.validate()?;
    strategies
        .iter()
        .map(|strategy| {
            let runs = (0..n_seeds as u64)
                .into_par_iter()
                .map(|seed| run_trajectory(process, strategy, seed))
                .collect::<Result<Vec<_>>>()?;
            Ok(RunSummary::from_trajectories(*strategy, &runs))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub bandwidth: f64,
    pub temperature: f64,
    pub summary: RunSummary,
}

/// Top-b over the Cartesian product of bandwidths and temperatures, in
/// row-major order (bandwidth outer, temperature inner).
pub fn sweep_grid(
    process: &ProcessConfig,
    bandwidths: &[f64],
    temperatures: &[f64],
    n_seeds: usize,
) -> Result<Vec<SweepCell>> {
    if bandwidths.is_empty() {
        return Err(Error::parameter(
            "bandwidths",
            "[]",
            "grid axis must be non-empty",
        ));
    }
    if temperatures.is_empty() {
        return Err(Error::parameter(
            "temperatures",
            "[]",
            "grid axis must be non-empty",
        ));
    }
    let mut cells = Vec::with_capacity(bandwidths.len() * temperatures.len());
    for &bandwidth in bandwidths {
        for &temperature in temperatures {
            let config = StrategyConfig::top_b(bandwidth).with_temperature(temperature);
            let summary = run_comparison(process, &[config], n_seeds)?.remove(0);
            cells.push(SweepCell {
                bandwidth,
                temperature,
                summary,
            });
        }
    }
    Ok(cells)
}
