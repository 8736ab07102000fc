//! JSON next-token distribution files.
//!
//! ```json
//! {
//!   "metadata": { "prompt": "2+2=" },
//!   "probs": [ { "token": " 4", "prob": 0.3975 }, ... ]
//! }
//! ```
//!
//! `logits` (`[{ "token": ..., "logit": ... }]`) may replace `probs`. Golden
//! fixtures additionally carry `expected`: strategy configs with the support
//! indices they must select.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use bandlab_core::{
    apply, apply_to_dist, softmax, LogitVector, ProbDist, StrategyConfig, TruncationResult,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TokenProb {
    pub token: String,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TokenLogit {
    pub token: String,
    pub logit: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedSupport {
    pub config: StrategyConfig,
    /// Token indices (file order), ascending.
    pub support: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probs: Option<Vec<TokenProb>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logits: Option<Vec<TokenLogit>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<Vec<ExpectedSupport>>,
}

#[derive(Debug, Clone, PartialEq)]
enum Scores {
    Probs(ProbDist),
    Logits(LogitVector),
}

/// A loaded and validated distribution file.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pub tokens: Vec<String>,
    pub prompt: Option<String>,
    pub expected: Vec<ExpectedSupport>,
    scores: Scores,
}

impl Distribution {
    /// The distribution after temperature (softmax for logit files).
    pub fn tempered(&self, temperature: f64) -> bandlab_core::Result<ProbDist> {
        match &self.scores {
            Scores::Probs(p) => p.with_temperature(temperature),
            Scores::Logits(l) => softmax(l, temperature),
        }
    }

    pub fn truncate(&self, config: &StrategyConfig) -> bandlab_core::Result<TruncationResult> {
        match &self.scores {
            Scores::Probs(p) => apply_to_dist(config, p),
            Scores::Logits(l) => apply(config, l),
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

impl DistributionFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Schema {
            path: path.to_path_buf(),
            field: field_from_serde(&e),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("distribution files always serialize")
    }

    /// Checks the schema invariants and builds the in-memory distribution.
    pub fn validate(&self, path: &Path) -> Result<Distribution, CliError> {
        let schema = |field: &str, message: String| CliError::Schema {
            path: PathBuf::from(path),
            field: field.to_string(),
            message,
        };
        let (field, tokens, scores) = match (&self.probs, &self.logits) {
            (Some(_), Some(_)) => {
                return Err(schema(
                    "probs",
                    "give either `probs` or `logits`, not both".into(),
                ))
            }
            (None, None) => {
                return Err(schema(
                    "probs",
                    "one of `probs` or `logits` is required".into(),
                ))
            }
            (Some(entries), None) => {
                let tokens: Vec<String> = entries.iter().map(|e| e.token.clone()).collect();
                let values = entries.iter().map(|e| e.prob).collect::<Vec<_>>();
                if let Some(i) = values.iter().position(|p| !(p.is_finite() && *p >= 0.0)) {
                    return Err(schema(
                        &format!("probs[{i}].prob"),
                        format!("{} is not a probability", values[i]),
                    ));
                }
                let dist = ProbDist::new(values).map_err(|e| schema("probs", e.to_string()))?;
                ("probs", tokens, Scores::Probs(dist))
            }
            (None, Some(entries)) => {
                let tokens: Vec<String> = entries.iter().map(|e| e.token.clone()).collect();
                let values = entries.iter().map(|e| e.logit).collect::<Vec<_>>();
                let logits =
                    LogitVector::new(values).map_err(|e| schema("logits", e.to_string()))?;
                ("logits", tokens, Scores::Logits(logits))
            }
        };
        if tokens.is_empty() {
            return Err(schema(field, "must be non-empty".into()));
        }
        let mut seen = HashSet::new();
        if let Some(i) = tokens.iter().position(|t| !seen.insert(t.as_str())) {
            return Err(schema(
                &format!("{field}[{i}].token"),
                format!("duplicate token {:?}", tokens[i]),
            ));
        }
        let expected = self.expected.clone().unwrap_or_default();
        for (i, e) in expected.iter().enumerate() {
            e.config
                .validate()
                .map_err(|err| schema(&format!("expected[{i}].config"), err.to_string()))?;
            if let Some(&bad) = e.support.iter().find(|&&s| s >= tokens.len()) {
                return Err(schema(
                    &format!("expected[{i}].support"),
                    format!("index {bad} out of range for {} tokens", tokens.len()),
                ));
            }
        }
        Ok(Distribution {
            tokens,
            prompt: self.metadata.as_ref().and_then(|m| m.prompt.clone()),
            expected,
            scores,
        })
    }
}

/// Best-effort name of the field a serde error points at.
fn field_from_serde(e: &serde_json::Error) -> String {
    let msg = e.to_string();
    for marker in ["missing field `", "unknown field `", "duplicate field `"] {
        if let Some(rest) = msg.split(marker).nth(1) {
            if let Some(name) = rest.split('`').next() {
                return name.to_string();
            }
        }
    }
    format!("line {} column {}", e.line(), e.column())
}

/// Reads and validates a distribution file in one go.
pub fn load_distribution(path: &Path) -> Result<Distribution, CliError> {
    DistributionFile::load(path)?.validate(path)
}
