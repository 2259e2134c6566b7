use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid chain parameters: {0}")]
    InvalidParams(String),

    #[error("site index {index} out of range for {len} sites")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("mode subset must not be empty")]
    EmptySubset,

    #[error("duplicate mode index {0}")]
    DuplicateIndex(usize),

    #[error("mode {0} appears in both subsets")]
    OverlappingSubsets(usize),

    #[error("matrix is not symmetric (max asymmetry {max_asymmetry:e})")]
    NotSymmetric { max_asymmetry: f64 },

    #[error("matrix has shape {rows}x{cols}, expected an even square matrix")]
    BadShape { rows: usize, cols: usize },

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(&'static str),

    #[error("numerically invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("unphysical state: symplectic eigenvalue {nu} below 1/2")]
    Unphysical { nu: f64 },

    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),

    #[error("target site {0} is inside the measured set")]
    TargetMeasured(usize),

    #[error("power-law fit failed: {0}")]
    Fit(String),

    #[error("Fock cutoff {cutoff} too small: top-level population {population:e}")]
    CutoffTooSmall { cutoff: usize, population: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Errors caused by user input rather than by a numerical breakdown.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParams(_)
                | Error::IndexOutOfRange { .. }
                | Error::EmptySubset
                | Error::DuplicateIndex(_)
                | Error::OverlappingSubsets(_)
                | Error::InvalidMeasurement(_)
                | Error::TargetMeasured(_)
                | Error::Config(_)
        )
    }
}
