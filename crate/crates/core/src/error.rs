use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge after {refinements} refinements (last relative change {last_change:.3e})")]
    QuadratureFailure { refinements: usize, last_change: f64 },

    #[error("frame filter degenerate: minimum {min:.3e} at z = {at:.3} Hz is below floor {floor:.3e}")]
    FrameDegeneracy { min: f64, at: f64, floor: f64 },

    #[error("frame filter ill-conditioned at {freq:.3} Hz: value {value:.3e} below floor {floor:.3e}")]
    IllConditionedFilter { freq: f64, value: f64, floor: f64 },

    #[error("reference domain too small: tail energy {tail:.3e} exceeds 10% of truncated energy {truncated:.3e}")]
    ReferenceTooSmall { tail: f64, truncated: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("cache format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
