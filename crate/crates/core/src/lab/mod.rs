//! Finite-`N` matrix experiments: exact GOE expectations with constant
//! matrices, constant ensembles with known limits, and Monte Carlo.

mod ensemble;
mod exact;
mod monte_carlo;

use thiserror::Error;

use crate::genus::GenusError;
use crate::nc::NcError;

pub use ensemble::{
    universal_rule_rhs, verify_universal_rule, ConstantEnsemble, EnsembleFamily, UniversalRuleReport,
    UniversalRuleRhs, UNIVERSAL_RULE_LADDER,
};
pub use exact::{
    common_size, exact_diagonal, exact_goe_word_expectation, exact_identity, exact_mul, exact_trace,
    fit_inverse_powers, goe_trace_classes, parse_exact_matrix, signed_word_trace, ExactMatrix, InverseFit, MultiTrace,
};
pub use monte_carlo::{
    goe_power_estimate, goe_word_estimate, infinitesimal_estimator, monte_carlo, normalized_power_trace,
    normalized_power_trace_complex, pairwise_sum, sample_goe, sample_values, sample_wishart, stream_rng, summarize,
    wishart_power_estimate, InfinitesimalEstimate, McEstimate, Sampler, CHUNK,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("expected size {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is {rows}×{cols}, not square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix size must be positive")]
    ZeroSize,
    #[error("size {size} is not a multiple of the tile size {block}")]
    Divisibility { size: usize, block: usize },
    #[error("ensemble needs at least one matrix")]
    EmptyEnsemble,
    #[error("variable {var} is not one of the {available} ensemble variables")]
    UnknownVariable { var: usize, available: usize },
    #[error("need at least {needed} sizes, got {found}")]
    LadderTooShort { needed: usize, found: usize },
    #[error("interpolation nodes must be distinct")]
    RepeatedNode,
    #[error("cannot read {0:?} as a square matrix")]
    BadMatrix(String),
    #[error("at least two samples are required")]
    NoSamples,
    #[error(transparent)]
    Genus(#[from] GenusError),
    #[error(transparent)]
    Nc(#[from] NcError),
}
