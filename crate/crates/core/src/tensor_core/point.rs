use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::GeometryError;

/// Default absolute tolerance for symmetry and J-invariance gates on inputs.
pub const INPUT_TOL: f64 = 1e-9;

/// Metric and almost complex structure at a single point, in some basis of
/// the tangent space. `j` acts on column vectors: `(J v)^i = j[(i, k)] v^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianPoint {
    m: usize,
    g: DMatrix<f64>,
    j: DMatrix<f64>,
}

/// Magnitudes of the three invariant violations of a candidate (g, J) pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StructureDefects {
    pub asymmetry: f64,
    /// Smallest eigenvalue of the symmetrized metric.
    pub min_eigenvalue: f64,
    pub j_squared: f64,
    pub compatibility: f64,
}

impl StructureDefects {
    pub fn measure(g: &DMatrix<f64>, j: &DMatrix<f64>) -> Self {
        let n = g.nrows();
        let sym = (g + g.transpose()) * 0.5;
        let min_eigenvalue = sym
            .symmetric_eigenvalues()
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b));
        let ident = DMatrix::<f64>::identity(n, n);
        Self {
            asymmetry: (g - g.transpose()).amax(),
            min_eigenvalue,
            j_squared: (j * j + &ident).amax(),
            compatibility: (j.transpose() * g * j - g).amax(),
        }
    }
}

impl HermitianPoint {
    /// Validates the invariants: g symmetric positive definite, J² = −I and
    /// Jᵀ g J = g, each within `tol`.
    pub fn new(g: DMatrix<f64>, j: DMatrix<f64>, tol: f64) -> Result<Self, GeometryError> {
        let n = g.nrows();
        if g.ncols() != n || j.shape() != (n, n) {
            return Err(GeometryError::DimensionMismatch {
                expected: n,
                found: j.nrows().max(g.ncols()),
            });
        }
        if n == 0 || !n.is_multiple_of(2) {
            return Err(GeometryError::OddDimension(n));
        }
        let d = StructureDefects::measure(&g, &j);
        if d.asymmetry > tol {
            return Err(GeometryError::MetricNotSymmetric(d.asymmetry));
        }
        if d.min_eigenvalue <= tol {
            return Err(GeometryError::MetricNotPositive(d.min_eigenvalue));
        }
        if d.j_squared > tol {
            return Err(GeometryError::NotComplexStructure(d.j_squared));
        }
        if d.compatibility > tol {
            return Err(GeometryError::NotCompatible(d.compatibility));
        }
        Ok(Self { m: n / 2, g, j })
    }

    /// Euclidean metric with the standard structure `J e_{2a} = e_{2a+1}` on
    /// the ordered basis `(x_1, y_1, x_2, y_2, ...)`.
    pub fn standard(m: usize) -> Self {
        Self {
            m,
            g: DMatrix::identity(2 * m, 2 * m),
            j: standard_j(m),
        }
    }

    pub fn complex_dim(&self) -> usize {
        self.m
    }

    pub fn real_dim(&self) -> usize {
        2 * self.m
    }

    pub fn metric(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn structure(&self) -> &DMatrix<f64> {
        &self.j
    }

    pub fn inverse_metric(&self) -> DMatrix<f64> {
        self.g
            .clone()
            .cholesky()
            .expect("metric is positive definite")
            .inverse()
    }

    /// `Ω_{ab} = g(e_a, J e_b)`.
    pub fn fundamental_form(&self) -> DMatrix<f64> {
        &self.g * &self.j
    }

    pub fn inner(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        (x.transpose() * &self.g * y)[(0, 0)]
    }

    pub fn norm(&self, x: &DVector<f64>) -> f64 {
        self.inner(x, x).sqrt()
    }

    pub fn apply_j(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.j * x
    }

    /// Columns form a g-orthonormal basis, obtained from the Cholesky factor
    /// `g = L Lᵀ` as `L⁻ᵀ`.
    pub fn orthonormal_frame(&self) -> DMatrix<f64> {
        let l = self
            .g
            .clone()
            .cholesky()
            .expect("metric is positive definite")
            .l();
        l.transpose()
            .try_inverse()
            .expect("Cholesky factor is invertible")
    }

    /// Re-expresses the structure in the basis given by the columns of
    /// `frame`: g' = Fᵀ g F, J' = F⁻¹ J F.
    pub fn in_frame(&self, frame: &DMatrix<f64>) -> Self {
        let inv = frame.clone().try_inverse().expect("frame is invertible");
        Self {
            m: self.m,
            g: frame.transpose() * &self.g * frame,
            j: inv * &self.j * frame,
        }
    }
}

/// Matrix of the standard complex structure on `(x_1, y_1, ..., x_m, y_m)`.
pub fn standard_j(m: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * m, 2 * m);
    for a in 0..m {
        j[(2 * a + 1, 2 * a)] = 1.0;
        j[(2 * a, 2 * a + 1)] = -1.0;
    }
    j
}

/// A (0,2) tensor at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct Bilinear {
    values: DMatrix<f64>,
    point: Arc<HermitianPoint>,
}

impl Bilinear {
    pub fn new(values: DMatrix<f64>, point: Arc<HermitianPoint>) -> Result<Self, GeometryError> {
        let n = point.real_dim();
        if values.shape() != (n, n) {
            return Err(GeometryError::DimensionMismatch {
                expected: n,
                found: values.nrows(),
            });
        }
        Ok(Self { values, point })
    }

    /// The metric itself as a bilinear form.
    pub fn metric(point: Arc<HermitianPoint>) -> Self {
        Self {
            values: point.metric().clone(),
            point,
        }
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            values: &self.values * s,
            point: self.point.clone(),
        }
    }

    pub fn point(&self) -> &Arc<HermitianPoint> {
        &self.point
    }

    pub fn eval(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        (x.transpose() * &self.values * y)[(0, 0)]
    }

    pub fn asymmetry(&self) -> f64 {
        (&self.values - self.values.transpose()).amax()
    }

    /// max |Q(Jx, Jy) − Q(x, y)| over basis pairs.
    pub fn j_defect(&self) -> f64 {
        let j = self.point.structure();
        (j.transpose() * &self.values * j - &self.values).amax()
    }

    /// Fails unless the form is symmetric and J-invariant within `tol`.
    pub fn check_hermitian(&self, tol: f64) -> Result<(), GeometryError> {
        let a = self.asymmetry();
        if a > tol {
            return Err(GeometryError::NotSymmetric(a));
        }
        let d = self.j_defect();
        if d > tol {
            return Err(GeometryError::NotJInvariant(d));
        }
        Ok(())
    }

    pub fn in_frame(&self, frame: &DMatrix<f64>, point: Arc<HermitianPoint>) -> Self {
        Self {
            values: frame.transpose() * &self.values * frame,
            point,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaneKind {
    Holomorphic,
    Antiholomorphic,
    Generic,
}

/// A tangent 2-plane given by a g-orthonormal pair.
#[derive(Clone, Debug, PartialEq)]
pub struct Plane {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub kind: PlaneKind,
}

impl Plane {
    /// Builds a plane from an orthonormal pair and classifies it: holomorphic
    /// when `y = ±Jx`, antiholomorphic when `g(x, Jy) = 0`.
    pub fn new(
        point: &HermitianPoint,
        x: DVector<f64>,
        y: DVector<f64>,
        tol: f64,
    ) -> Result<Self, GeometryError> {
        let gram = [
            point.inner(&x, &x) - 1.0,
            point.inner(&y, &y) - 1.0,
            point.inner(&x, &y),
        ];
        let defect = gram.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if defect > tol {
            return Err(GeometryError::NotOrthonormal(defect));
        }
        let jx = point.apply_j(&x);
        let kind = if (&y - &jx).amax() <= tol || (&y + &jx).amax() <= tol {
            PlaneKind::Holomorphic
        } else if point.inner(&x, &point.apply_j(&y)).abs() <= tol {
            PlaneKind::Antiholomorphic
        } else {
            PlaneKind::Generic
        };
        Ok(Self { x, y, kind })
    }

    /// The holomorphic plane spanned by a g-unit `x` and `Jx`.
    pub fn holomorphic(point: &HermitianPoint, x: DVector<f64>) -> Self {
        let y = point.apply_j(&x);
        Self {
            x,
            y,
            kind: PlaneKind::Holomorphic,
        }
    }
}
