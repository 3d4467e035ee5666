//! Pointwise curvature diagnostics built on top of the tensor core: plane
//! sampling, constancy statistics, adapted eigenframes, identity residuals
//! and the space-form verdict.

mod residuals;
pub(crate) mod sampling;
mod schur;
mod spectral;
mod verdict;

pub use residuals::{
    bianchi2_residual, decomposition_residual, einstein_residual, ricci_derivative_relation_residual, Einstein,
};
pub use sampling::{constancy, sample_antiholomorphic_planes, sample_holomorphic_planes, CurvatureStats};
pub use schur::{schur_check, schur_from_means, SchurReport};
pub use spectral::{adapted_eigenframe, EigenframeOptions, SpectralFrame};
pub use verdict::{classify, ClassFlags, Verdict, VerdictKind, VerdictSupport};

use thiserror::Error;

use crate::chart::ChartError;
use crate::tensor_core::GeometryError;

/// Default threshold for data that went through finite differences.
pub const FD_TOL: f64 = 1e-4;
/// Default threshold for exact algebraic data.
pub const ALGEBRAIC_TOL: f64 = 1e-9;
pub const DEFAULT_SAMPLES: usize = 256;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error("antiholomorphic planes need complex dimension at least 2, got {0}")]
    NoAntiholomorphicPlanes(usize),
    #[error("plane sampling degenerated {0} times in a row")]
    SamplingDegenerate(usize),
    #[error("need at least {needed} {what}, got {got}")]
    TooFew { what: &'static str, needed: usize, got: usize },
    #[error("eigenspace for {eigenvalue:e} is not J-invariant (defect {defect:e})")]
    NotJClosed { eigenvalue: f64, defect: f64 },
}
