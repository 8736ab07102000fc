use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A hyperparameter or argument outside its admissible range.
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    Parameter {
        name: &'static str,
        value: String,
        reason: &'static str,
    },

    /// Input that leaves nothing to normalize (all masked, empty subset, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid logits: {0}")]
    InvalidLogits(String),

    #[error("step {step} out of range for a process with {steps} steps")]
    StepOutOfRange { step: usize, steps: usize },

    #[error("invalid process config: {0}")]
    InvalidProcess(String),
}

impl Error {
    pub(crate) fn parameter(
        name: &'static str,
        value: impl ToString,
        reason: &'static str,
    ) -> Self {
        Error::Parameter {
            name,
            value: value.to_string(),
            reason,
        }
    }
}
