use std::sync::Arc;

use nalgebra::DVector;
use serde::Serialize;

use super::{Bilinear, Covariant, GeometryError, HermitianPoint, Plane};

/// A (0,4) tensor `R_{ijkl} = R(e_i, e_j, e_k, e_l)` at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureTensor {
    values: Covariant<4>,
    point: Arc<HermitianPoint>,
}

impl CurvatureTensor {
    pub fn new(values: Covariant<4>, point: Arc<HermitianPoint>) -> Result<Self, GeometryError> {
        if values.dim() != point.real_dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: point.real_dim(),
                found: values.dim(),
            });
        }
        Ok(Self { values, point })
    }

    pub fn zero(point: Arc<HermitianPoint>) -> Self {
        Self {
            values: Covariant::zeros(point.real_dim()),
            point,
        }
    }

    pub fn values(&self) -> &Covariant<4> {
        &self.values
    }

    pub fn point(&self) -> &Arc<HermitianPoint> {
        &self.point
    }

    pub fn get(&self, idx: [usize; 4]) -> f64 {
        self.values.get(idx)
    }

    pub fn eval(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>, u: &DVector<f64>) -> f64 {
        self.values
            .eval([x.as_slice(), y.as_slice(), z.as_slice(), u.as_slice()])
    }

    /// Same point, different components.
    pub fn with_values(&self, values: Covariant<4>) -> Self {
        assert_eq!(values.dim(), self.values.dim());
        Self {
            values,
            point: self.point.clone(),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.with_values(self.values.scaled(s))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.with_values(&self.values + &other.values)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.with_values(&self.values - &other.values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.max_abs()
    }

    /// Components in the basis formed by the columns of `frame`, attached to
    /// `point` (which must be the structure expressed in that frame).
    pub fn in_frame(&self, frame: &nalgebra::DMatrix<f64>, point: Arc<HermitianPoint>) -> Self {
        Self {
            values: self.values.pull_back_all(frame),
            point,
        }
    }

    /// Components of `R(J^a x, J^b y, J^c z, J^d u)` where each flag says
    /// whether J is applied in that slot.
    fn with_j(&self, slots: [bool; 4]) -> Covariant<4> {
        let j = self.point.structure();
        slots
            .iter()
            .enumerate()
            .fold(self.values.clone(), |t, (slot, &apply)| {
                if apply {
                    t.pull_back(slot, j)
                } else {
                    t
                }
            })
    }

    /// The Ricci contraction `S(y, z) = Σ_i R(b_i, y, z, b_i)` over a
    /// g-orthonormal frame, i.e. `S_{jk} = g^{il} R_{ijkl}`.
    pub fn ricci(&self) -> Bilinear {
        let n = self.point.real_dim();
        let ginv = self.point.inverse_metric();
        let mut s = nalgebra::DMatrix::zeros(n, n);
        for j in 0..n {
            for k in 0..n {
                let mut acc = 0.0;
                for i in 0..n {
                    for l in 0..n {
                        acc += ginv[(i, l)] * self.values.get([i, j, k, l]);
                    }
                }
                s[(j, k)] = acc;
            }
        }
        Bilinear::new(s, self.point.clone()).expect("shape matches the point")
    }
}

fn check_same_point(q: &Bilinear, ctx: &HermitianPoint) -> Result<(), GeometryError> {
    if q.values().nrows() != ctx.real_dim() {
        return Err(GeometryError::DimensionMismatch {
            expected: ctx.real_dim(),
            found: q.values().nrows(),
        });
    }
    Ok(())
}

/// The six-term operator
/// `ψ(Q)(x,y,z,u) = g(x,Ju)Q(y,Jz) − g(x,Jz)Q(y,Ju) − 2g(x,Jy)Q(z,Ju)
///                 + g(y,Jz)Q(x,Ju) − g(y,Ju)Q(x,Jz) − 2g(z,Ju)Q(x,Jy)`.
pub fn psi(q: &Bilinear) -> Result<CurvatureTensor, GeometryError> {
    let ctx = q.point();
    check_same_point(q, ctx)?;
    let omega = ctx.fundamental_form();
    let qj = q.values() * ctx.structure();
    let n = ctx.real_dim();
    let values = Covariant::<4>::from_fn(n, |[x, y, z, u]| {
        omega[(x, u)] * qj[(y, z)] - omega[(x, z)] * qj[(y, u)] - 2.0 * omega[(x, y)] * qj[(z, u)]
            + omega[(y, z)] * qj[(x, u)]
            - omega[(y, u)] * qj[(x, z)]
            - 2.0 * omega[(z, u)] * qj[(x, y)]
    });
    CurvatureTensor::new(values, ctx.clone())
}

/// `π₁(x,y,z,u) = g(x,u)g(y,z) − g(x,z)g(y,u)`.
pub fn pi1(ctx: &Arc<HermitianPoint>) -> CurvatureTensor {
    let g = ctx.metric();
    let values = Covariant::<4>::from_fn(ctx.real_dim(), |[x, y, z, u]| {
        g[(x, u)] * g[(y, z)] - g[(x, z)] * g[(y, u)]
    });
    CurvatureTensor {
        values,
        point: ctx.clone(),
    }
}

/// `π₂ = ½ ψ(g)`.
pub fn pi2(ctx: &Arc<HermitianPoint>) -> CurvatureTensor {
    psi(&Bilinear::metric(ctx.clone()))
        .expect("metric matches its own point")
        .scaled(0.5)
}

/// The three curvature identities defining the classes AH₁, AH₂, AH₃.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AhIdentity {
    /// `R(x,y,z,u) = R(x,y,Jz,Ju)`
    First = 1,
    /// `R(x,y,z,u) = R(x,y,Jz,Ju) + R(x,Jy,z,Ju) + R(Jx,y,z,Ju)`
    Second = 2,
    /// `R(x,y,z,u) = R(Jx,Jy,Jz,Ju)`
    Third = 3,
}

impl AhIdentity {
    pub const ALL: [AhIdentity; 3] = [AhIdentity::First, AhIdentity::Second, AhIdentity::Third];

    pub fn from_index(i: u8) -> Option<Self> {
        match i {
            1 => Some(Self::First),
            2 => Some(Self::Second),
            3 => Some(Self::Third),
            _ => None,
        }
    }
}

/// Max-norm over basis quadruples of left side minus right side.
pub fn ah_identity_residual(r: &CurvatureTensor, which: AhIdentity) -> f64 {
    let lhs = &r.values;
    let rhs = match which {
        AhIdentity::First => r.with_j([false, false, true, true]),
        AhIdentity::Second => {
            let a = r.with_j([false, false, true, true]);
            let b = r.with_j([false, true, false, true]);
            let c = r.with_j([true, false, false, true]);
            &(&a + &b) + &c
        }
        AhIdentity::Third => r.with_j([true, true, true, true]),
    };
    (lhs - &rhs).max_abs()
}

/// Largest violation of `R_{ijkl} = −R_{jikl} = −R_{ijlk} = R_{klij}` and of
/// the first Bianchi sum `R_{ijkl} + R_{jkil} + R_{kijl} = 0`.
pub fn riemann_symmetry_residual(r: &CurvatureTensor) -> f64 {
    let t = &r.values;
    let mut worst = 0.0f64;
    for [i, j, k, l] in t.indices() {
        let v = t.get([i, j, k, l]);
        let defects = [
            v + t.get([j, i, k, l]),
            v + t.get([i, j, l, k]),
            v - t.get([k, l, i, j]),
            v + t.get([j, k, i, l]) + t.get([k, i, j, l]),
        ];
        for d in defects {
            worst = worst.max(d.abs());
        }
    }
    worst
}

/// `R(x,y,y,x) / (g(x,x)g(y,y) − g(x,y)²)` for arbitrary spanning vectors.
pub fn sectional_curvature_of(
    r: &CurvatureTensor,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<f64, GeometryError> {
    let ctx = &r.point;
    let (gxx, gyy, gxy) = (ctx.inner(x, x), ctx.inner(y, y), ctx.inner(x, y));
    let gram = gxx * gyy - gxy * gxy;
    if gram <= 1e-14 * (gxx * gyy).max(f64::MIN_POSITIVE) {
        return Err(GeometryError::DegeneratePlane(gram));
    }
    Ok(r.eval(x, y, y, x) / gram)
}

pub fn sectional_curvature(r: &CurvatureTensor, plane: &Plane) -> Result<f64, GeometryError> {
    sectional_curvature_of(r, &plane.x, &plane.y)
}

/// `R = (1/6) ψ(S) + ν π₁ − ((2m − 1)/3) ν π₂`, the curvature tensor of an
/// AH₃ structure with Ricci tensor `S` and constant antiholomorphic sectional
/// curvature `ν`.
pub fn build_from_decomposition(
    s: &Bilinear,
    nu: f64,
    tol: f64,
) -> Result<CurvatureTensor, GeometryError> {
    s.check_hermitian(tol)?;
    let ctx = s.point();
    let m = ctx.complex_dim() as f64;
    let r = psi(s)?
        .scaled(1.0 / 6.0)
        .add(&pi1(ctx).scaled(nu))
        .sub(&pi2(ctx).scaled((2.0 * m - 1.0) / 3.0 * nu));
    Ok(r)
}

/// Least-squares coefficients of `R ≈ a π₁ + b π₂`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PiSpanFit {
    pub a: f64,
    pub b: f64,
    /// Componentwise 2-norm of `R − a π₁ − b π₂`.
    pub residual: f64,
    /// True when π₁ and π₂ are parallel (real dimension 2); the fit is then
    /// taken along `π₁ + π₂`, so `a = b`.
    pub degenerate: bool,
}

pub fn fit_pi_span(r: &CurvatureTensor) -> PiSpanFit {
    let p1 = pi1(&r.point);
    let p2 = pi2(&r.point);
    let (g11, g12, g22) = (p1.values.dot(&p1.values), p1.values.dot(&p2.values), p2.values.dot(&p2.values));
    let (r1, r2) = (r.values.dot(&p1.values), r.values.dot(&p2.values));
    let det = g11 * g22 - g12 * g12;
    let degenerate = det <= 1e-12 * g11 * g22;
    let (a, b) = if degenerate {
        let sum = p1.add(&p2);
        let norm2 = sum.values.dot(&sum.values);
        let t = if norm2 > 0.0 { r.values.dot(&sum.values) / norm2 } else { 0.0 };
        (t, t)
    } else {
        ((g22 * r1 - g12 * r2) / det, (g11 * r2 - g12 * r1) / det)
    };
    let fitted = p1.scaled(a).add(&p2.scaled(b));
    PiSpanFit {
        a,
        b,
        residual: (&r.values - &fitted.values).frobenius(),
        degenerate,
    }
}
