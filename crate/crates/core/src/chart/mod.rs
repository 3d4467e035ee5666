//! Coordinate charts carrying a metric and an almost complex structure, and
//! the finite-difference covariant calculus built on them.

mod calculus;
mod expr;
mod spec;

pub use calculus::{
    christoffel, class_residuals, gray_ak2_residual, nabla_bilinear, nabla_j, nabla_r, ricci,
    riemann, ClassResiduals, ConnectionData, FdConfig, LocalCalculus, NablaJ, OrthonormalCalculus,
    LEVEL_GROWTH,
};
pub use expr::{BinOp, Expr, Func};
pub use spec::{parse_chart, ChartSpec};

use nalgebra::DMatrix;
use thiserror::Error;

use crate::tensor_core::{GeometryError, HermitianPoint, StructureDefects};

/// Tolerance for the Hermitian invariants of an evaluated chart point.
pub const CHART_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChartError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}, column {column}: undeclared identifier '{name}'")]
    UndeclaredIdentifier {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("line {line}: {message}")]
    Dimension { line: usize, message: String },
    #[error("line {line}: conflicting definitions of {entry}")]
    Conflict { line: usize, entry: String },
    #[error("missing '{0}' declaration")]
    Missing(&'static str),
    #[error("point {point:?} has {found} coordinates, chart has {expected}")]
    PointDimension {
        point: Vec<f64>,
        expected: usize,
        found: usize,
    },
    #[error("point {point:?} is outside the chart domain (needs margin {margin:e})")]
    OutOfDomain { point: Vec<f64>, margin: f64 },
    #[error("{entry} = {expr} evaluates to {value} at {point:?}")]
    Evaluation {
        entry: String,
        expr: String,
        point: Vec<f64>,
        value: f64,
    },
    #[error("invalid structure at {point:?}: {source} (asymmetry {asym:e}, min eigenvalue {min_eig:e}, |J^2+I| {j2:e}, |J^T g J - g| {compat:e})",
        asym = .defects.asymmetry, min_eig = .defects.min_eigenvalue, j2 = .defects.j_squared, compat = .defects.compatibility)]
    Structure {
        point: Vec<f64>,
        source: GeometryError,
        defects: StructureDefects,
    },
    #[error("finite-difference step {0:e} is too small")]
    StepUnderflow(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Closed coordinate interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const UNBOUNDED: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() || self.hi.is_finite()
    }
}

/// A single coordinate patch with metric and almost complex structure fields.
pub trait Chart: Send + Sync {
    /// Complex dimension m; the chart has 2m coordinates.
    fn complex_dim(&self) -> usize;

    fn coord_names(&self) -> Vec<String>;

    fn domain(&self) -> Vec<Interval>;

    fn default_points(&self) -> Vec<Vec<f64>>;

    /// Metric and structure matrices at `p` without any invariant checks.
    /// Callers are responsible for keeping `p` inside the domain.
    fn raw_structure(&self, p: &[f64]) -> Result<(DMatrix<f64>, DMatrix<f64>), ChartError>;

    fn real_dim(&self) -> usize {
        2 * self.complex_dim()
    }
}

/// Checks that every coordinate of `p` lies in the domain at distance at
/// least `margin` from a finite endpoint.
pub fn check_domain<C: Chart + ?Sized>(chart: &C, p: &[f64], margin: f64) -> Result<(), ChartError> {
    let n = chart.real_dim();
    if p.len() != n {
        return Err(ChartError::PointDimension {
            point: p.to_vec(),
            expected: n,
            found: p.len(),
        });
    }
    let inside = chart
        .domain()
        .iter()
        .zip(p)
        .all(|(iv, &x)| x.is_finite() && x - margin >= iv.lo && x + margin <= iv.hi);
    if inside {
        Ok(())
    } else {
        Err(ChartError::OutOfDomain {
            point: p.to_vec(),
            margin,
        })
    }
}

/// Evaluates g and J at `p` and validates the Hermitian invariants within
/// [`CHART_TOL`].
pub fn eval_point<C: Chart + ?Sized>(chart: &C, p: &[f64]) -> Result<HermitianPoint, ChartError> {
    check_domain(chart, p, 0.0)?;
    let (g, j) = chart.raw_structure(p)?;
    HermitianPoint::new(g.clone(), j.clone(), CHART_TOL).map_err(|source| ChartError::Structure {
        point: p.to_vec(),
        source,
        defects: StructureDefects::measure(&g, &j),
    })
}
