//! Point-level multilinear algebra on an almost Hermitian tangent space.
//!
//! Everything here is exact algebra on component arrays: no charts and no
//! differentiation. Curvature tensors follow the convention
//! `R(x, y, z, u) = g(R(x, y) z, u)`, so the unit round sphere has `R = π₁`
//! and the sectional curvature of an orthonormal plane is `R(x, y, y, x)`.

mod curvature;
mod dense;
mod point;

pub use curvature::{
    ah_identity_residual, build_from_decomposition, fit_pi_span, pi1, pi2, psi,
    riemann_symmetry_residual, sectional_curvature, sectional_curvature_of, AhIdentity,
    CurvatureTensor, PiSpanFit,
};
pub use dense::Covariant;
pub use point::{
    standard_j, Bilinear, HermitianPoint, Plane, PlaneKind, StructureDefects, INPUT_TOL,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("real dimension {0} is not a positive even number")]
    OddDimension(usize),
    #[error("metric is not symmetric (max defect {0:e})")]
    MetricNotSymmetric(f64),
    #[error("metric is not positive definite (smallest eigenvalue {0:e})")]
    MetricNotPositive(f64),
    #[error("J*J + I is not zero (max defect {0:e})")]
    NotComplexStructure(f64),
    #[error("J is not compatible with g (max defect of J^T g J - g is {0:e})")]
    NotCompatible(f64),
    #[error("bilinear form is not symmetric (max defect {0:e})")]
    NotSymmetric(f64),
    #[error("bilinear form is not J-invariant (max defect {0:e})")]
    NotJInvariant(f64),
    #[error("plane vectors are not orthonormal (max defect {0:e})")]
    NotOrthonormal(f64),
    #[error("degenerate plane (Gram determinant {0:e})")]
    DegeneratePlane(f64),
}
