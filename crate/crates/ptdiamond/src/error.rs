//! Crate-wide error type.

use thiserror::Error;

/// Everything that can go wrong when assembling operators, constructing
/// states, or running numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Parameter or state validation failure (bad ranges, wrong lengths,
    /// non-finite inputs, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// Bloch-space operations are only defined without the longitudinal
    /// tilt: `e_par != 0` breaks translation invariance.
    #[error("Bloch-space operation requires e_par = 0 (got {e_par}); the longitudinal tilt breaks translation invariance")]
    TiltedBloch { e_par: f64 },

    /// A compact-localized-state constructor was asked for a variant that
    /// does not match the model parameters (wrong flux phase, nonzero tilt,
    /// or a transverse field without the matching variant).
    #[error("compact localized state mismatch: {0}")]
    ClsMismatch(String),

    /// The matrix-exponential oracle is restricted to small systems where a
    /// dense exponential is trustworthy and cheap.
    #[error("matrix-exponential oracle limited to {max} unit cells, got {got}")]
    OracleSize { max: usize, got: usize },

    /// The integrator produced non-finite amplitudes. `last_z` is the last
    /// propagation distance with a finite state.
    #[error("integration failure: non-finite amplitudes encountered after z = {last_z}")]
    IntegrationFailure { last_z: f64 },

    /// Disagreement between the two independent spectral routes (analytic
    /// cubic vs. dense eigensolve) beyond the contract tolerance.
    #[error("cross-validation failure at k = {k}: cubic and eigensolver spectra differ by {deviation:.3e}")]
    CrossValidation { k: f64, deviation: f64 },

    /// Failure reported by the dense linear-algebra backend.
    #[error("linear algebra backend failure: {0}")]
    Linalg(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}
