use thiserror::Error;

use crate::cycles::OperationMode;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cluster of {n_sites} sites exceeds the 10-site limit (dimension 2^{n_sites})")]
    DimensionOverflow { n_sites: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("explicit level list is empty")]
    EmptyLevels,

    #[error("matrix is not symmetric (max deviation {deviation:e})")]
    Asymmetric { deviation: f64 },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("temperature must be positive and finite, got {0}")]
    NonPositiveTemperature(f64),

    #[error("spectrum is empty")]
    EmptySpectrum,

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("target entropy {target} is not attainable on the end spectrum")]
    EntropyOutOfRange { target: f64 },

    #[error("adiabat root-find failed to converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: u32, residual: f64 },

    #[error("bath temperatures must satisfy T_H > T_C > 0 (got T_H = {t_hot}, T_C = {t_cold})")]
    TemperatureOrdering { t_hot: f64, t_cold: f64 },

    #[error(
        "Carnot cycle does not close: entropy residual {entropy_residual:e}, population drift {population_drift:e}"
    )]
    CycleClosure {
        entropy_residual: f64,
        population_drift: f64,
    },

    #[error("figure of merit is not defined for mode {0:?}")]
    NotApplicable(OperationMode),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("brute-force ergotropy limited to dimension 8, got {0}")]
    TooLarge(usize),
}

impl Error {
    /// Short stable identifier used in sweep output rows.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionOverflow { .. } => "dimension-overflow",
            Error::InvalidModel(_) => "invalid-model",
            Error::NonFinite(_) => "non-finite",
            Error::EmptyLevels => "empty-levels",
            Error::Asymmetric { .. } => "asymmetric",
            Error::NotSquare { .. } => "not-square",
            Error::NonPositiveTemperature(_) => "non-positive-temperature",
            Error::EmptySpectrum => "empty-spectrum",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::EntropyOutOfRange { .. } => "entropy-range",
            Error::NonConvergence { .. } => "non-convergence",
            Error::TemperatureOrdering { .. } => "temperature-ordering",
            Error::CycleClosure { .. } => "cycle-closure",
            Error::NotApplicable(_) => "not-applicable",
            Error::InvalidState(_) => "invalid-state",
            Error::TooLarge(_) => "too-large",
        }
    }

    /// True for errors caused by bad inputs rather than by the numerics.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::DimensionOverflow { .. }
                | Error::InvalidModel(_)
                | Error::NonFinite(_)
                | Error::EmptyLevels
                | Error::NonPositiveTemperature(_)
                | Error::DimensionMismatch { .. }
                | Error::TemperatureOrdering { .. }
                | Error::NotSquare { .. }
        )
    }
}
