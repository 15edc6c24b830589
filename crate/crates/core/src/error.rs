//! Error type shared by the whole crate.

use thiserror::Error;

/// Simulation errors.
///
/// The grid guardrails ([`Error::GridTooNarrow`], [`Error::MisalignedShift`],
/// [`Error::Truncation`]) indicate an under-padded or under-resolved grid
/// rather than invalid physics input; see [`Error::is_grid_guardrail`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid too narrow: needs [{needed_min}, {needed_max}], have [{grid_min}, {grid_max}]")]
    GridTooNarrow {
        grid_min: f64,
        grid_max: f64,
        needed_min: f64,
        needed_max: f64,
    },

    #[error("omega_f = {omega_f} is not an integer multiple of the grid spacing {delta_omega}")]
    MisalignedShift { omega_f: f64, delta_omega: f64 },

    #[error("shift pushed {leaked_fraction:.3e} of the squared norm off the grid (limit {limit:.0e}); widen the grid")]
    Truncation { leaked_fraction: f64, limit: f64 },

    #[error("operands live on different frequency grids")]
    GridMismatch,

    #[error("state is not normalized: squared norm = {norm_sq}")]
    NotNormalized { norm_sq: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{operation} expects branches only on {expected}; found {found}")]
    WrongStage {
        operation: &'static str,
        expected: &'static str,
        found: &'static str,
    },

    #[error("pre- and post-selection are orthogonal; weak value undefined")]
    OrthogonalSelection,

    #[error("post-selection outcome has zero probability")]
    ZeroProbability,

    #[error("state has no surviving amplitude")]
    ZeroNorm,

    #[error("observable is not Hermitian: max |A - A†| element = {max_deviation:.3e}")]
    NonHermitian { max_deviation: f64 },

    #[error("probability budget violated: norm + absorbed = {budget}")]
    BudgetViolation { budget: f64 },
}

impl Error {
    /// True for errors that signal an inadequate grid rather than bad input.
    pub fn is_grid_guardrail(&self) -> bool {
        matches!(
            self,
            Error::GridTooNarrow { .. } | Error::MisalignedShift { .. } | Error::Truncation { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
