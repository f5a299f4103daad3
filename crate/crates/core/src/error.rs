use thiserror::Error;

use crate::schur_weyl::Partition;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid partition {parts:?}: parts must be positive and weakly decreasing")]
    InvalidPartition { parts: Vec<u32> },

    #[error("no box to remove from the empty partition")]
    NoBoxToRemove,

    #[error("frame {partition} exceeds local dimension {dim}")]
    FrameExceedsDimension { partition: Partition, dim: u32 },

    #[error("{nu} is not obtained from {alpha} by adding one box")]
    NotOneBox { alpha: Partition, nu: Partition },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("operator dimension {required} exceeds the configured cap {allowed}")]
    DimensionCap { required: usize, allowed: usize },

    #[error("operator is not PSD: eigenvalue {eigenvalue:e} below -{tolerance:e}")]
    NotPsd { eigenvalue: f64, tolerance: f64 },

    #[error("{what}: expected {expected}, got {actual}")]
    TraceCheck {
        what: &'static str,
        expected: f64,
        actual: f64,
    },

    #[error("eigenvector positivity violated at component {index} (value {value:e})")]
    EigenvectorPositivity { index: usize, value: f64 },

    #[error("eigensolver did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("{what} disagree: {left} vs {right} (tolerance {tolerance:e})")]
    Disagreement {
        what: &'static str,
        left: f64,
        right: f64,
        tolerance: f64,
    },

    #[error(transparent)]
    Coefficients(#[from] CoefficientError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Validation failures for optimal-protocol coefficient sets.
#[derive(Debug, Error)]
pub enum CoefficientError {
    #[error("schema violation: {0}")]
    Schema(String),

    #[error("not normalized: sum of squares is {0}")]
    NotNormalized(f64),

    #[error("negative entry {value} for partition {partition}")]
    Negative { partition: Partition, value: f64 },

    #[error("incomplete support: partition {0} missing")]
    IncompleteSupport(Partition),

    #[error("duplicate entry for partition {0}")]
    Duplicate(Partition),

    #[error("partition {partition} is not a frame of N={ports} with height <= {dim}")]
    ForeignPartition { partition: Partition, ports: u32, dim: u32 },

    #[error("coefficients are for (N={found_ports}, d={found_dim}), expected (N={ports}, d={dim})")]
    WrongShape {
        ports: u32,
        dim: u32,
        found_ports: u32,
        found_dim: u32,
    },
}
