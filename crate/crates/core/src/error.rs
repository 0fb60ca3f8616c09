use thiserror::Error;

use crate::grid::SpaceTag;

/// Everything that can go wrong while building states, grids or reports.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("time must be non-negative and finite, got {0}")]
    InvalidTime(f64),

    #[error("grid size must be a power of two >= 64, got {0}")]
    InvalidGridSize(usize),

    #[error("non-finite sample at grid point ({i}, {j}) = ({x1:e}, {x2:e})")]
    NonFiniteSample { i: usize, j: usize, x1: f64, x2: f64 },

    #[error("grid has zero norm")]
    ZeroNorm,

    #[error("grid is not normalized (norm = {0})")]
    NotNormalized(f64),

    #[error("expected a {expected:?} grid, got {found:?}")]
    TagMismatch { expected: SpaceTag, found: SpaceTag },

    #[error("t = {t} violates the chirp sampling bound; maximum safe time for this grid is {max_safe}")]
    Nyquist { t: f64, max_safe: f64 },

    #[error("conditioning value {value} lies outside the grid axis [{min}, {max}]")]
    SliceOutOfRange { value: f64, min: f64, max: f64 },

    #[error("conditioning on {value} selects a slice of negligible probability ({norm:e})")]
    NegligibleSlice { value: f64, norm: f64 },

    #[error("{0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        });
    }
    if value <= 0.0 {
        return Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be > 0",
        });
    }
    Ok(value)
}

pub(crate) fn check_time(t: f64) -> Result<f64> {
    if t.is_finite() && t >= 0.0 {
        Ok(t)
    } else {
        Err(Error::InvalidTime(t))
    }
}
