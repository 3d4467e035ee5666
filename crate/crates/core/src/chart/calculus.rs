//! Finite-difference covariant calculus on a chart.
//!
//! Derivatives are nested: Γ differentiates g, R differentiates Γ, and ∇R,
//! ∇S differentiate R. Each nesting level uses its own step, growing by
//! [`LEVEL_GROWTH`] per level, so round-off amplified by the inner
//! differences stays below the truncation error of the outer ones. All
//! stencils are fourth-order central differences.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::{check_domain, eval_point, Chart, ChartError};
use crate::tensor_core::{Bilinear, Covariant, CurvatureTensor, HermitianPoint};

/// Ratio between the steps of consecutive nesting levels.
pub const LEVEL_GROWTH: f64 = 10.0;

const STENCIL: [(f64, f64); 4] = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];
const STENCIL_DENOM: f64 = 12.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FdConfig {
    /// Innermost step, before scaling by coordinate magnitude.
    pub step: f64,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self { step: 1e-4 }
    }
}

impl FdConfig {
    pub fn new(step: f64) -> Result<Self, ChartError> {
        if !(step.is_finite() && step >= 1e-12) {
            return Err(ChartError::StepUnderflow(step));
        }
        Ok(Self { step })
    }

    /// Step along one coordinate at nesting `level` (1 for derivatives of g and J).
    pub fn step_at(&self, level: u32, coord: f64) -> f64 {
        self.step * LEVEL_GROWTH.powi(level as i32 - 1) * coord.abs().max(1.0)
    }

    /// Distance the stencils of `levels` nested derivatives reach from `p`.
    pub fn reach(&self, levels: u32, p: &[f64]) -> f64 {
        let scale = p.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        // the outer level's offsets move the inner stencils' centers, so scale
        // generously by the largest coordinate the inner stencils may see
        let mut total = 0.0;
        for level in 1..=levels {
            total += 2.0 * self.step * LEVEL_GROWTH.powi(level as i32 - 1) * (scale + 1.0);
        }
        total
    }

    fn validate(&self) -> Result<(), ChartError> {
        Self::new(self.step).map(|_| ())
    }
}

/// Fourth-order central derivative of a vector-valued function along every
/// coordinate. Returns one flattened derivative per coordinate.
fn gradient<F>(p: &[f64], level: u32, fd: &FdConfig, parallel: bool, f: F) -> Result<Vec<Vec<f64>>, ChartError>
where
    F: Fn(&[f64]) -> Result<Vec<f64>, ChartError> + Sync,
{
    let n = p.len();
    let nodes: Vec<(usize, usize)> = (0..n).flat_map(|k| (0..STENCIL.len()).map(move |s| (k, s))).collect();
    let eval = |&(k, s): &(usize, usize)| -> Result<Vec<f64>, ChartError> {
        let h = fd.step_at(level, p[k]);
        let mut q = p.to_vec();
        q[k] += STENCIL[s].0 * h;
        f(&q)
    };
    let values: Vec<Vec<f64>> = if parallel {
        nodes.par_iter().map(eval).collect::<Result<_, _>>()?
    } else {
        nodes.iter().map(eval).collect::<Result<_, _>>()?
    };
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let h = fd.step_at(level, p[k]);
        let len = values[k * STENCIL.len()].len();
        let mut d = vec![0.0; len];
        for (s, &(_, w)) in STENCIL.iter().enumerate() {
            for (acc, v) in d.iter_mut().zip(&values[k * STENCIL.len() + s]) {
                *acc += w * v;
            }
        }
        for v in &mut d {
            *v /= STENCIL_DENOM * h;
        }
        out.push(d);
    }
    Ok(out)
}

fn flatten(m: &DMatrix<f64>) -> Vec<f64> {
    // row-major, matching Covariant<2>-style indexing [i][j]
    let (r, c) = m.shape();
    (0..r).flat_map(|i| (0..c).map(move |j| m[(i, j)])).collect()
}

/// Γ at `q`: upper index first, `gamma.get([i, j, k]) = Γ^i_{jk}`.
fn gamma_raw<C: Chart + ?Sized>(chart: &C, q: &[f64], fd: &FdConfig) -> Result<(DMatrix<f64>, Covariant<3>), ChartError> {
    let n = q.len();
    let (g, _) = chart.raw_structure(q)?;
    let dg = gradient(q, 1, fd, false, |x| chart.raw_structure(x).map(|(g, _)| flatten(&g)))?;
    let ginv = g
        .clone()
        .try_inverse()
        .ok_or(ChartError::Geometry(crate::tensor_core::GeometryError::MetricNotPositive(0.0)))?;
    // dg[k][a*n+b] = ∂_k g_{ab}
    let d = |k: usize, a: usize, b: usize| dg[k][a * n + b];
    let gamma = Covariant::<3>::from_fn(n, |[i, j, k]| {
        0.5 * (0..n)
            .map(|l| ginv[(i, l)] * (d(j, l, k) + d(k, l, j) - d(l, j, k)))
            .sum::<f64>()
    });
    Ok((g, gamma))
}

/// Lowered curvature `R_{ijkl} = g(R(∂_i, ∂_j)∂_k, ∂_l)` at `q`.
fn riemann_raw<C: Chart + ?Sized>(chart: &C, q: &[f64], fd: &FdConfig, parallel: bool) -> Result<Covariant<4>, ChartError> {
    let n = q.len();
    let (g, gamma) = gamma_raw(chart, q, fd)?;
    let dgamma = gradient(q, 2, fd, parallel, |x| gamma_raw(chart, x, fd).map(|(_, t)| t.as_slice().to_vec()))?;
    let dg = |a: usize, idx: [usize; 3]| dgamma[a][(idx[0] * n + idx[1]) * n + idx[2]];
    // upper[q][i][j][k] = R^q_{ijk}
    let upper = Covariant::<4>::from_fn(n, |[l, i, j, k]| {
        let mut v = dg(i, [l, j, k]) - dg(j, [l, i, k]);
        for m in 0..n {
            v += gamma.get([l, i, m]) * gamma.get([m, j, k]) - gamma.get([l, j, m]) * gamma.get([m, i, k]);
        }
        v
    });
    Ok(Covariant::<4>::from_fn(n, |[i, j, k, l]| {
        (0..n).map(|q| g[(l, q)] * upper.get([q, i, j, k])).sum()
    }))
}

fn ricci_raw(g: &DMatrix<f64>, r: &Covariant<4>) -> Result<DMatrix<f64>, ChartError> {
    let n = g.nrows();
    let ginv = g
        .clone()
        .try_inverse()
        .ok_or(ChartError::Geometry(crate::tensor_core::GeometryError::MetricNotPositive(0.0)))?;
    Ok(DMatrix::from_fn(n, n, |j, k| {
        let mut acc = 0.0;
        for i in 0..n {
            for l in 0..n {
                acc += ginv[(i, l)] * r.get([i, j, k, l]);
            }
        }
        acc
    }))
}

/// Levi-Civita connection coefficients at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionData {
    /// `gamma.get([i, j, k]) = Γ^i_{jk}`.
    pub gamma: Covariant<3>,
    pub coords: Vec<f64>,
    /// Innermost finite-difference step.
    pub step: f64,
}

/// `(∇_k J)^i_j`, stored as `values.get([k, i, j])`.
#[derive(Clone, Debug, PartialEq)]
pub struct NablaJ {
    pub values: Covariant<3>,
}

impl NablaJ {
    /// Lowers to `T(x, y, z) = g((∇_x J) y, z)`, stored `[x][y][z]`.
    pub fn lowered(&self, g: &DMatrix<f64>) -> Covariant<3> {
        let n = g.nrows();
        Covariant::<3>::from_fn(n, |[k, j, l]| (0..n).map(|i| g[(l, i)] * self.values.get([k, i, j])).sum())
    }
}

fn prepare<C: Chart + ?Sized>(chart: &C, p: &[f64], fd: &FdConfig, levels: u32) -> Result<Arc<HermitianPoint>, ChartError> {
    fd.validate()?;
    let point = eval_point(chart, p)?;
    check_domain(chart, p, fd.reach(levels, p))?;
    Ok(Arc::new(point))
}

pub fn christoffel<C: Chart + ?Sized>(chart: &C, p: &[f64], fd: &FdConfig) -> Result<ConnectionData, ChartError> {
    prepare(chart, p, fd, 1)?;
    let (_, gamma) = gamma_raw(chart, p, fd)?;
    Ok(ConnectionData {
        gamma,
        coords: p.to_vec(),
        step: fd.step,
    })
}

/// Riemann tensor in the convention where the unit sphere has `R = π₁`.
pub fn riemann<C: Chart + ?Sized>(chart: &C, p: &[f64], fd: &FdConfig) -> Result<CurvatureTensor, ChartError> {
    let point = prepare(chart, p, fd, 2)?;
    let r = riemann_raw(chart, p, fd, true)?;
    Ok(CurvatureTensor::new(r, point)?)
}

/// `S(y, z) = Σ_i R(b_i, y, z, b_i)` over a g-orthonormal frame.
pub fn ricci(r: &CurvatureTensor) -> Bilinear {
    r.ricci()
}

fn nabla_j_with(gamma: &Covariant<3>, j: &DMatrix<f64>, dj: &[Vec<f64>]) -> NablaJ {
    let n = j.nrows();
    let values = Covariant::<3>::from_fn(n, |[k, i, jj]| {
        let mut v = dj[k][i * n + jj];
        for l in 0..n {
            v += gamma.get([i, k, l]) * j[(l, jj)] - gamma.get([l, k, jj]) * j[(i, l)];
        }
        v
    });
    NablaJ { values }
}

pub fn nabla_j<C: Chart + ?Sized>(chart: &C, p: &[f64], fd: &FdConfig) -> Result<NablaJ, ChartError> {
    let point = prepare(chart, p, fd, 1)?;
    let (_, gamma) = gamma_raw(chart, p, fd)?;
    let dj = gradient(p, 1, fd, false, |x| chart.raw_structure(x).map(|(_, j)| flatten(&j)))?;
    Ok(nabla_j_with(&gamma, point.structure(), &dj))
}

fn nabla_bilinear_with(gamma: &Covariant<3>, s: &DMatrix<f64>, ds: &[Vec<f64>]) -> Covariant<3> {
    let n = s.nrows();
    Covariant::<3>::from_fn(n, |[k, i, j]| {
        let mut v = ds[k][i * n + j];
        for l in 0..n {
            v -= gamma.get([l, k, i]) * s[(l, j)] + gamma.get([l, k, j]) * s[(i, l)];
        }
        v
    })
}

/// Covariant derivative `(∇_k S)_{ij}` of a (0,2) field, stored `[k][i][j]`.
///
/// `depth` is the number of finite-difference levels already nested inside
/// `field` (0 for the metric, 2 for the Ricci tensor); the outer derivative
/// uses the next level's step.
pub fn nabla_bilinear<C, F>(chart: &C, p: &[f64], fd: &FdConfig, depth: u32, field: F) -> Result<Covariant<3>, ChartError>
where
    C: Chart + ?Sized,
    F: Fn(&[f64]) -> Result<DMatrix<f64>, ChartError> + Sync,
{
    prepare(chart, p, fd, depth + 1)?;
    let (_, gamma) = gamma_raw(chart, p, fd)?;
    let s = field(p)?;
    let ds = gradient(p, depth + 1, fd, true, |x| field(x).map(|m| flatten(&m)))?;
    Ok(nabla_bilinear_with(&gamma, &s, &ds))
}

fn nabla_r_with(gamma: &Covariant<3>, r: &Covariant<4>, dr: &[Vec<f64>]) -> Covariant<5> {
    let n = r.dim();
    Covariant::<5>::from_fn(n, |[a, i, j, k, l]| {
        let mut v = dr[a][((i * n + j) * n + k) * n + l];
        for m in 0..n {
            v -= gamma.get([m, a, i]) * r.get([m, j, k, l])
                + gamma.get([m, a, j]) * r.get([i, m, k, l])
                + gamma.get([m, a, k]) * r.get([i, j, m, l])
                + gamma.get([m, a, l]) * r.get([i, j, k, m]);
        }
        v
    })
}

/// `(∇_a R)_{ijkl}`, stored `[a][i][j][k][l]`.
pub fn nabla_r<C: Chart + ?Sized>(chart: &C, p: &[f64], fd: &FdConfig) -> Result<Covariant<5>, ChartError> {
    Ok(LocalCalculus::compute(chart, p, fd)?.nabla_riemann)
}

/// Everything the analysis needs at one chart point, sharing the curvature
/// stencil between ∇R and ∇S.
#[derive(Clone, Debug)]
pub struct LocalCalculus {
    pub coords: Vec<f64>,
    pub point: Arc<HermitianPoint>,
    pub connection: ConnectionData,
    pub riemann: CurvatureTensor,
    pub ricci: Bilinear,
    pub nabla_j: NablaJ,
    /// `(∇_k S)_{ij}` stored `[k][i][j]`.
    pub nabla_ricci: Covariant<3>,
    /// `(∇_a R)_{ijkl}` stored `[a][i][j][k][l]`.
    pub nabla_riemann: Covariant<5>,
}

impl LocalCalculus {
    pub fn compute<C: Chart + ?Sized>(chart: &C, p: &[f64], fd: &FdConfig) -> Result<Self, ChartError> {
        let point = prepare(chart, p, fd, 3)?;
        let n = p.len();
        let (_, gamma) = gamma_raw(chart, p, fd)?;
        let r = riemann_raw(chart, p, fd, true)?;
        let s = ricci_raw(point.metric(), &r)?;
        let dj = gradient(p, 1, fd, false, |x| chart.raw_structure(x).map(|(_, j)| flatten(&j)))?;
        // one stencil of curvature evaluations feeds both ∇R and ∇S
        let stacked = gradient(p, 3, fd, true, |x| {
            let r = riemann_raw(chart, x, fd, false)?;
            let (g, _) = chart.raw_structure(x)?;
            let s = ricci_raw(&g, &r)?;
            let mut v = r.as_slice().to_vec();
            v.extend(flatten(&s));
            Ok(v)
        })?;
        let n4 = n.pow(4);
        let dr: Vec<Vec<f64>> = stacked.iter().map(|v| v[..n4].to_vec()).collect();
        let ds: Vec<Vec<f64>> = stacked.iter().map(|v| v[n4..].to_vec()).collect();
        let nabla_riemann = nabla_r_with(&gamma, &r, &dr);
        let nabla_ricci = nabla_bilinear_with(&gamma, &s, &ds);
        let nabla_j = nabla_j_with(&gamma, point.structure(), &dj);
        let riemann = CurvatureTensor::new(r, point.clone())?;
        let ricci = Bilinear::new(s, point.clone())?;
        Ok(Self {
            coords: p.to_vec(),
            point,
            connection: ConnectionData {
                gamma,
                coords: p.to_vec(),
                step: fd.step,
            },
            riemann,
            ricci,
            nabla_j,
            nabla_ricci,
            nabla_riemann,
        })
    }

    /// Re-expresses every tensor in the g-orthonormal frame of the point
    /// (columns of the inverse transposed Cholesky factor).
    pub fn orthonormal(&self) -> OrthonormalCalculus {
        let frame = self.point.orthonormal_frame();
        let point = Arc::new(self.point.in_frame(&frame));
        OrthonormalCalculus {
            riemann: self.riemann.in_frame(&frame, point.clone()),
            ricci: self.ricci.in_frame(&frame, point.clone()),
            nabla_j: self.nabla_j.lowered(self.point.metric()).pull_back_all(&frame),
            nabla_ricci: self.nabla_ricci.pull_back_all(&frame),
            nabla_riemann: self.nabla_riemann.pull_back_all(&frame),
            frame,
            point,
        }
    }
}

/// [`LocalCalculus`] in a g-orthonormal frame, where g is the identity and
/// raising or lowering indices is trivial.
#[derive(Clone, Debug)]
pub struct OrthonormalCalculus {
    /// Columns are the frame vectors in chart coordinates.
    pub frame: DMatrix<f64>,
    pub point: Arc<HermitianPoint>,
    pub riemann: CurvatureTensor,
    pub ricci: Bilinear,
    /// `T(x, y, z) = g((∇_x J) y, z)` stored `[x][y][z]`.
    pub nabla_j: Covariant<3>,
    pub nabla_ricci: Covariant<3>,
    pub nabla_riemann: Covariant<5>,
}

/// Defects of the three differential class conditions, in a g-orthonormal
/// frame, each normalized so that `nearly_kahler ≤ kahler` and
/// `almost_kahler ≤ kahler`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClassResiduals {
    /// max |g((∇_x J) y, z)|
    pub kahler: f64,
    /// max ½ |g((∇_x J) y + (∇_y J) x, z)|, the polarized form of `(∇_x J) x = 0`
    pub nearly_kahler: f64,
    /// max ⅓ |g((∇_x J) y, z) + g((∇_y J) z, x) + g((∇_z J) x, y)|
    pub almost_kahler: f64,
}

impl ClassResiduals {
    /// From `T(x, y, z) = g((∇_x J) y, z)` in an orthonormal frame.
    pub fn from_lowered(t: &Covariant<3>) -> Self {
        let mut out = Self {
            kahler: 0.0,
            nearly_kahler: 0.0,
            almost_kahler: 0.0,
        };
        for [x, y, z] in t.indices() {
            let v = t.get([x, y, z]);
            out.kahler = out.kahler.max(v.abs());
            out.nearly_kahler = out.nearly_kahler.max(0.5 * (v + t.get([y, x, z])).abs());
            out.almost_kahler = out
                .almost_kahler
                .max((v + t.get([y, z, x]) + t.get([z, x, y])).abs() / 3.0);
        }
        out
    }
}

pub fn class_residuals<C: Chart + ?Sized>(chart: &C, p: &[f64], fd: &FdConfig) -> Result<ClassResiduals, ChartError> {
    let point = prepare(chart, p, fd, 1)?;
    let t = nabla_j(chart, p, fd)?.lowered(point.metric());
    Ok(ClassResiduals::from_lowered(&t.pull_back_all(&point.orthonormal_frame())))
}

impl OrthonormalCalculus {
    pub fn class_residuals(&self) -> ClassResiduals {
        ClassResiduals::from_lowered(&self.nabla_j)
    }

    /// max over frame quadruples of
    /// `|R(x,y,z,u) − R(x,y,Jz,Ju) − ½ g((∇_x J)y − (∇_y J)x, (∇_z J)u − (∇_u J)z)|`.
    pub fn gray_ak2_residual(&self) -> f64 {
        let n = self.point.real_dim();
        let t = &self.nabla_j;
        let jmat = self.point.structure();
        let rjj = self.riemann.values().pull_back(2, jmat).pull_back(3, jmat);
        let diff = |a: usize, b: usize, w: usize| t.get([a, b, w]) - t.get([b, a, w]);
        let mut worst = 0.0f64;
        for [x, y, z, u] in self.riemann.values().indices() {
            let rhs: f64 = 0.5 * (0..n).map(|w| diff(x, y, w) * diff(z, u, w)).sum::<f64>();
            let lhs = self.riemann.get([x, y, z, u]) - rjj.get([x, y, z, u]);
            worst = worst.max((lhs - rhs).abs());
        }
        worst
    }
}

pub fn gray_ak2_residual<C: Chart + ?Sized>(chart: &C, p: &[f64], fd: &FdConfig) -> Result<f64, ChartError> {
    let point = prepare(chart, p, fd, 2)?;
    let r = riemann(chart, p, fd)?;
    let t = nabla_j(chart, p, fd)?.lowered(point.metric());
    let frame = point.orthonormal_frame();
    let on_point = Arc::new(point.in_frame(&frame));
    let on = OrthonormalCalculus {
        riemann: r.in_frame(&frame, on_point.clone()),
        ricci: r.ricci().in_frame(&frame, on_point.clone()),
        nabla_j: t.pull_back_all(&frame),
        nabla_ricci: Covariant::zeros(p.len()),
        nabla_riemann: Covariant::zeros(p.len()),
        frame,
        point: on_point,
    };
    Ok(on.gray_ak2_residual())
}
