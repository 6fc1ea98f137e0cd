use thiserror::Error;

/// Errors raised by grid construction, state validation and the numerical
/// guards of the evolution routines.
#[derive(Debug, Clone, Error)]
pub enum CoreError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unnormalized state: norm deviates from 1 by {deviation:.3e}")]
    Unnormalized { deviation: f64 },

    #[error("boundary contamination: mass {mass:.3e} in outer 5% of the grid")]
    BoundaryContamination { mass: f64 },

    #[error("nyquist contamination: mass {mass:.3e} in the top momentum band")]
    NyquistContamination { mass: f64 },

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("dt too large: {dt:.3e} exceeds stability bound {max:.3e}")]
    DtTooLarge { dt: f64, max: f64 },

    #[error("pointer width {sigma:.3e} not resolved: needs >= {required} points, grid spacing {spacing:.3e}")]
    UnresolvedWidth {
        sigma: f64,
        spacing: f64,
        required: usize,
    },

    #[error("pointer center {center:.3e} closer than 5 sigma to the grid boundary")]
    OffGridCenter { center: f64 },

    #[error("inadmissible alpha: {0}")]
    InadmissibleAlpha(String),

    #[error("numerical blowup, reduce dt: {0}")]
    NumericalBlowup(String),

    #[error("under-resolved quadrature: trace error {trace_error:.3e} exceeds 1e-6")]
    QuadratureUnderResolved { trace_error: f64 },

    #[error("ensemble average needs at least 2 states, got {0}")]
    InsufficientStates(usize),
}
