//! Exact combinatorics and numerics for infinitesimal free probability.

pub mod cumulant;
pub mod genus;
pub mod lab;
pub mod measure;
pub mod nc;
pub mod partition;
pub mod perm;
pub mod poly;
pub mod scalar;
pub mod series;
pub mod transform;
pub mod word;

/// Any failure surfaced by the engines, tagged by kind so callers can map
/// it to an exit status.
#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Perm(#[from] perm::PermError),
    #[error(transparent)]
    Partition(#[from] partition::PartitionError),
    #[error(transparent)]
    Nc(#[from] nc::NcError),
    #[error(transparent)]
    Genus(#[from] genus::GenusError),
    #[error(transparent)]
    Cumulant(#[from] cumulant::CumulantError),
    #[error(transparent)]
    Series(#[from] series::SeriesError),
    #[error(transparent)]
    Transform(#[from] transform::TransformError),
    #[error(transparent)]
    Measure(#[from] measure::MeasureError),
    #[error(transparent)]
    Lab(#[from] lab::LabError),
    #[error(transparent)]
    Word(#[from] word::WordParseError),
}

/// Broad failure classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed or out-of-range input.
    Validation,
    /// A configured size cap was exceeded.
    ResourceCap,
    /// Quadrature, extrapolation or another numerical procedure failed.
    Numeric,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Genus(genus::GenusError::CapExceeded { .. }) => ErrorKind::ResourceCap,
            Error::Cumulant(cumulant::CumulantError::Genus(genus::GenusError::CapExceeded { .. })) => ErrorKind::ResourceCap,
            Error::Lab(lab::LabError::Genus(genus::GenusError::CapExceeded { .. })) => ErrorKind::ResourceCap,
            Error::Measure(measure::MeasureError::Quadrature { .. } | measure::MeasureError::Extrapolation { .. }) => {
                ErrorKind::Numeric
            }
            _ => ErrorKind::Validation,
        }
    }
}
