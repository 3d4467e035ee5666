use nalgebra::DVector;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::AnalysisError;
use crate::tensor_core::{sectional_curvature, CurvatureTensor, HermitianPoint, Plane, PlaneKind};

const RETRY_CAP: usize = 100;
const PLANE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvatureStats {
    pub samples: usize,
    pub mean: f64,
    /// max over samples of |K(α) − mean|
    pub max_deviation: f64,
    pub kind: PlaneKind,
}

/// g-unit vector uniformly distributed on the unit sphere of g.
fn unit_vector(point: &HermitianPoint, frame: &nalgebra::DMatrix<f64>, rng: &mut ChaCha8Rng) -> Option<DVector<f64>> {
    let n = point.real_dim();
    let xi = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let len = xi.norm();
    (len > 1e-8).then(|| frame * (xi / len))
}

fn project_off(point: &HermitianPoint, v: &DVector<f64>, units: &[&DVector<f64>]) -> DVector<f64> {
    let mut out = v.clone();
    for u in units {
        out -= *u * point.inner(u, &out);
    }
    out
}

/// `n` random antiholomorphic planes: `x` uniform on the g-unit sphere, `y`
/// a second Gaussian draw projected off `x` and `Jx` and normalized.
pub fn sample_antiholomorphic_planes(
    point: &HermitianPoint,
    n: usize,
    seed: u64,
) -> Result<Vec<Plane>, AnalysisError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_antiholomorphic_with(point, n, &mut rng)
}

pub(crate) fn sample_antiholomorphic_with(
    point: &HermitianPoint,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Plane>, AnalysisError> {
    if point.complex_dim() < 2 {
        return Err(AnalysisError::NoAntiholomorphicPlanes(point.complex_dim()));
    }
    let frame = point.orthonormal_frame();
    let mut planes = Vec::with_capacity(n);
    let mut failures = 0;
    while planes.len() < n {
        let candidate = unit_vector(point, &frame, rng).and_then(|x| {
            let jx = point.apply_j(&x);
            let raw = unit_vector(point, &frame, rng)?;
            // twice, so rounding left by the first pass is removed too
            let y = project_off(point, &project_off(point, &raw, &[&x, &jx]), &[&x, &jx]);
            let len = point.norm(&y);
            (len > 1e-6).then(|| (x, y / len))
        });
        match candidate {
            Some((x, y)) => {
                planes.push(Plane::new(point, x, y, PLANE_TOL)?);
                failures = 0;
            }
            None => {
                failures += 1;
                if failures >= RETRY_CAP {
                    return Err(AnalysisError::SamplingDegenerate(failures));
                }
            }
        }
    }
    Ok(planes)
}

/// `n` random holomorphic planes `span(x, Jx)` with `x` uniform on the g-unit
/// sphere.
pub fn sample_holomorphic_planes(point: &HermitianPoint, n: usize, seed: u64) -> Result<Vec<Plane>, AnalysisError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_holomorphic_with(point, n, &mut rng)
}

pub(crate) fn sample_holomorphic_with(
    point: &HermitianPoint,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Plane>, AnalysisError> {
    let frame = point.orthonormal_frame();
    let mut planes = Vec::with_capacity(n);
    let mut failures = 0;
    while planes.len() < n {
        match unit_vector(point, &frame, rng) {
            Some(x) => {
                planes.push(Plane::holomorphic(point, x));
                failures = 0;
            }
            None => {
                failures += 1;
                if failures >= RETRY_CAP {
                    return Err(AnalysisError::SamplingDegenerate(failures));
                }
            }
        }
    }
    Ok(planes)
}

/// Mean and spread of the sectional curvature over `planes`. The kind is the
/// common kind of the planes, or generic when they are mixed.
pub fn constancy(r: &CurvatureTensor, planes: &[Plane]) -> Result<CurvatureStats, AnalysisError> {
    if planes.len() < 2 {
        return Err(AnalysisError::TooFew {
            what: "planes",
            needed: 2,
            got: planes.len(),
        });
    }
    let values = planes
        .iter()
        .map(|p| sectional_curvature(r, p))
        .collect::<Result<Vec<_>, _>>()?;
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let max_deviation = values.iter().fold(0.0f64, |m, k| m.max((k - mean).abs()));
    let kind = if planes.iter().all(|p| p.kind == planes[0].kind) {
        planes[0].kind
    } else {
        PlaneKind::Generic
    };
    Ok(CurvatureStats {
        samples: values.len(),
        mean,
        max_deviation,
        kind,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use nalgebra::DMatrix;

    use super::*;
    use crate::tensor_core::{build_from_decomposition, pi1, standard_j, Bilinear, INPUT_TOL};

    fn skewed_point(m: usize) -> HermitianPoint {
        // g = Aᵀ A with A commuting with the standard J, so (g, J) is Hermitian
        let n = 2 * m;
        let j = standard_j(m);
        let b = DMatrix::from_fn(n, n, |i, k| ((i * 7 + k * 3) % 5) as f64 * 0.1);
        let a = DMatrix::identity(n, n) + (&b - &j * &b * &j) * 0.5;
        HermitianPoint::new(a.transpose() * a, j, INPUT_TOL).unwrap()
    }

    #[test]
    fn planes_are_orthonormal_and_antiholomorphic() {
        for m in [2, 3] {
            let point = skewed_point(m);
            let planes = sample_antiholomorphic_planes(&point, 200, 3).unwrap();
            assert_eq!(planes.len(), 200);
            for p in &planes {
                assert_eq!(p.kind, PlaneKind::Antiholomorphic);
                assert!(point.inner(&p.x, &point.apply_j(&p.y)).abs() < 1e-12);
                assert!(point.inner(&p.x, &p.y).abs() < 1e-12);
                assert!((point.norm(&p.x) - 1.0).abs() < 1e-12);
                assert!((point.norm(&p.y) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn standard_pair_is_antiholomorphic() {
        let point = HermitianPoint::standard(2);
        let e = |i: usize| DVector::from_fn(4, |k, _| if k == i { 1.0 } else { 0.0 });
        let plane = Plane::new(&point, e(0), e(2), 1e-12).unwrap();
        assert_eq!(plane.kind, PlaneKind::Antiholomorphic);
    }

    #[test]
    fn sampling_is_seeded() {
        let point = skewed_point(2);
        let a = sample_antiholomorphic_planes(&point, 10, 9).unwrap();
        let b = sample_antiholomorphic_planes(&point, 10, 9).unwrap();
        let c = sample_antiholomorphic_planes(&point, 10, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn complex_dimension_one_has_no_antiholomorphic_planes() {
        let point = HermitianPoint::standard(1);
        assert!(matches!(
            sample_antiholomorphic_planes(&point, 4, 0),
            Err(AnalysisError::NoAntiholomorphicPlanes(1))
        ));
    }

    #[test]
    fn holomorphic_planes_are_j_closed() {
        let point = skewed_point(3);
        for p in sample_holomorphic_planes(&point, 50, 1).unwrap() {
            assert_eq!(p.kind, PlaneKind::Holomorphic);
            assert!((&p.y - point.apply_j(&p.x)).amax() < 1e-15);
        }
    }

    #[test]
    fn constant_curvature_is_constant_on_any_planes() {
        let point = Arc::new(skewed_point(3));
        let r = pi1(&point);
        for planes in [
            sample_antiholomorphic_planes(&point, 100, 5).unwrap(),
            sample_holomorphic_planes(&point, 100, 5).unwrap(),
        ] {
            let stats = constancy(&r, &planes).unwrap();
            assert!((stats.mean - 1.0).abs() < 1e-12);
            assert!(stats.max_deviation < 1e-12);
        }
    }

    #[test]
    fn decomposition_gives_constant_antiholomorphic_curvature() {
        let point = Arc::new(skewed_point(3));
        let j = point.structure().clone();
        let a = DMatrix::from_fn(6, 6, |i, k| ((i + 2 * k) % 7) as f64 * 0.3 - 0.8);
        let a = &a + a.transpose();
        let s = Bilinear::new(&a + j.transpose() * &a * &j, point.clone()).unwrap();
        let r = build_from_decomposition(&s, 0.7, 1e-9).unwrap();
        let planes = sample_antiholomorphic_planes(&point, 1000, 11).unwrap();
        let stats = constancy(&r, &planes).unwrap();
        assert_eq!(stats.kind, PlaneKind::Antiholomorphic);
        assert!((stats.mean - 0.7).abs() < 1e-10);
        assert!(stats.max_deviation < 1e-10);
    }

    #[test]
    fn constancy_needs_two_planes() {
        let point = Arc::new(HermitianPoint::standard(2));
        let planes = sample_antiholomorphic_planes(&point, 1, 0).unwrap();
        assert!(constancy(&pi1(&point), &planes).is_err());
    }
}
