use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller supplied an argument outside the operation's domain.
    #[error("invalid input: {0}")]
    Input(String),

    /// No branch of the measurement ever fires for the given state.
    #[error("degenerate outcome: success probability {0:e} is below the cutoff")]
    DegenerateOutcome(f64),

    /// Rejection sampling could not populate the requested fidelity window.
    #[error("sampling failed: {accepted} of {attempts} draws landed in {target} ± {window}")]
    Sampling {
        target: f64,
        window: f64,
        attempts: u64,
        accepted: u64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
