use thiserror::Error;

/// Errors produced by walk construction, Bell evaluation, and search drivers.
#[derive(Debug, Error)]
pub enum Error {
    /// A coin state or custom amplitude array is not unit-normalized.
    #[error("normalization violation: squared norm is {norm_sq:.17e}, expected 1 within {tol:e}")]
    NormalizationViolation { norm_sq: f64, tol: f64 },

    /// The walk light cone would leave the allocated lattice window.
    #[error("lattice window exhausted: {requested} steps requested from step {steps_taken} with half-width {t_max}")]
    WindowExhausted {
        steps_taken: usize,
        requested: usize,
        t_max: usize,
    },

    /// Two lattice objects do not share the same window or step count.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// An argument is outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Schmidt-aligned settings were requested for a product state.
    #[error("state has no entanglement: second Schmidt coefficient is {s1:e}")]
    NoEntanglement { s1: f64 },

    /// A subspace observable does not square to the identity.
    #[error("observable is not dichotomic: {0}")]
    NonDichotomic(String),

    /// A search finished without a single accepted candidate.
    #[error("empty search result: {0}")]
    EmptySearchResult(String),
}

pub type Result<T> = std::result::Result<T, Error>;
