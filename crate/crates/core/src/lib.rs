//! Entropy-regulated relative-band truncation ("Top-b") and the usual
//! truncation samplers, plus a synthetic decoding process for comparing them.
//!
//! ```
//! use bandlab_core::{ProbDist, truncate_top_b};
//!
//! let dist = ProbDist::new(vec![0.4, 0.35, 0.15, 0.10]).unwrap();
//! let result = truncate_top_b(&dist, 0.2, 1.0).unwrap();
//! assert_eq!(result.support, vec![0, 1]);
//! ```

pub mod error;
pub mod prob;
pub mod sim;
pub mod truncation;

pub use error::{Error, Result};
pub use prob::{
    entropy, mode, renormalize, softmax, EntropyReport, LogitVector, ModeInfo, ProbDist,
};
pub use sim::{
    run_comparison, run_trajectory, step_distribution, sweep_grid, HistoryDigest, MetricSummary,
    ProcessConfig, Regime, RunSummary, Schedule, StepRecord, SweepCell, Trajectory,
};
pub use truncation::{
    apply, apply_to_dist, sample, top_b_bandwidth, truncate_epsilon, truncate_eta, truncate_min_p,
    truncate_relative_band, truncate_top_b, truncate_top_k, truncate_top_p, BandwidthTrace,
    Strategy, StrategyConfig, TruncationResult,
};
