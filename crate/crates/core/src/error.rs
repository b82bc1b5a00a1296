use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("grid mismatch: expected {expected} points, got {got}")]
    GridMismatch { expected: usize, got: usize },

    #[error("non-finite value {value} at grid index {index}")]
    NonFinite { index: usize, value: f64 },

    /// The form of `-Δ + β` must be coercive.
    #[error(
        "coercivity violated: smallest eigenvalue of -Δ+β is {lambda1:.6e} \
         (minimizing vector peaks at grid index {peak_index})"
    )]
    CoercivityViolated { lambda1: f64, peak_index: usize },

    #[error("hypothesis `{name}` violated: {detail}")]
    Hypothesis { name: &'static str, detail: String },

    #[error("dissipative checks unavailable: the model has no antiderivative F")]
    AntiderivativeMissing,

    #[error("degenerate weighted metric: W vanishes at grid index {index}; use epsilon > 0")]
    DegenerateWeight { index: usize },

    #[error("frame collapse at step {step}: QR diagonal {diag:.3e} (try a smaller QR interval)")]
    FrameCollapse { step: usize, diag: f64 },

    #[error("finite-time escape at t = {time}: energy norm {norm:.3e} above ceiling")]
    FiniteTimeEscape { time: f64, norm: f64 },

    #[error("linear algebra failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for errors caused by a violated standing hypothesis rather than
    /// bad input or a numerical breakdown.
    pub fn is_hypothesis_violation(&self) -> bool {
        matches!(
            self,
            Error::CoercivityViolated { .. } | Error::Hypothesis { .. }
        )
    }
}
