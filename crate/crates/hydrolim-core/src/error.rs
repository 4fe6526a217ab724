use crate::spectral::Parity;
use thiserror::Error;

/// Errors shared by the spectral kernels and the solvers built on them.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("physical array has shape {got:?}, grid expects {expected:?}")]
    ShapeMismatch {
        expected: (usize, usize, usize),
        got: (usize, usize, usize),
    },

    #[error("grid dimensions must be even and >= 4, got {0}x{1}x{2}")]
    BadGrid(usize, usize, usize),

    #[error("operation requires an even-in-z field, got parity {0:?}")]
    ParityContract(Parity),

    #[error("aspect ratio must lie in (0, 1), got {0}")]
    BadEpsilon(f64),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("non-finite value in field `{field}` at t = {time}")]
    Diverged { field: &'static str, time: f64 },

    #[error("states are {separation:.3e} apart in time, comparison tolerance is {tolerance:.3e}")]
    TimeMismatch { separation: f64, tolerance: f64 },

    #[error("rate fit needs at least 3 usable points with distinct epsilon, got {0}")]
    TooFewPoints(usize),
}
