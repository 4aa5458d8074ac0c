use thiserror::Error;

/// Errors raised by the numerical pipeline.
///
/// `Input` and `Precondition` are domain errors: the caller asked for
/// something outside the validity region of a bound or an expansion.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("division by vanishing potential at core node r = {r} (index {index})")]
    VanishingPotential { r: f64, index: usize },

    #[error("quadrature diverges: {0}")]
    Divergent(String),

    #[error("negative radial distribution function at r = {r} (g = {g}); the activity expansion is outside its validity region, try a smaller activity")]
    NegativeRdf { r: f64, g: f64 },

    #[error("non-positive ratio g_k/g_target at bin {index} (r = {r})")]
    NonPositiveRatio { r: f64, index: usize },

    #[error("potential is not of Lennard-Jones type: {0}")]
    Certification(String),

    #[error("no admissible perturbation radius in (0, 1): {0}")]
    NoPerturbationRadius(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("checkpoint format: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
