use std::sync::Arc;

use almost_hermitian::chart::{
    christoffel, class_residuals, eval_point, gray_ak2_residual, nabla_bilinear, nabla_j, parse_chart, riemann, Chart,
    ChartError, ChartSpec, FdConfig, LocalCalculus,
};
use almost_hermitian::models::{charts, sphere6::Sphere6Chart};
use almost_hermitian::tensor_core::{build_from_decomposition, pi1, Bilinear, Covariant};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fd() -> FdConfig {
    FdConfig::default()
}

fn flat() -> ChartSpec {
    parse_chart(&charts::flat(2)).unwrap()
}

fn fubini_study(m: usize, c: f64) -> ChartSpec {
    parse_chart(&charts::fubini_study(m, c)).unwrap()
}

/// The polynomial part `P(w)` of the Kähler metric `g = f I − k P` with
/// `f = 1/D`, `k = q/D²`, `D = 1 + q|w|²`.
fn fs_quadratic(w: &[f64]) -> DMatrix<f64> {
    let n = w.len();
    DMatrix::from_fn(n, n, |mu, nu| {
        let (a, s, b, t) = (mu / 2, mu % 2, nu / 2, nu % 2);
        let (xa, ya, xb, yb) = (w[2 * a], w[2 * a + 1], w[2 * b], w[2 * b + 1]);
        match (s, t) {
            (0, 0) | (1, 1) => xa * xb + ya * yb,
            (0, 1) => xa * yb - ya * xb,
            _ => xb * ya - yb * xa,
        }
    })
}

/// Christoffel symbols of the Fubini-Study / Bergman chart from hand-derived
/// metric derivatives.
fn fs_christoffel_oracle(w: &[f64], c: f64) -> (DMatrix<f64>, Covariant<3>) {
    let n = w.len();
    let q = c / 4.0;
    let r2: f64 = w.iter().map(|v| v * v).sum();
    let d = 1.0 + q * r2;
    let (f, k) = (1.0 / d, q / (d * d));
    let p = fs_quadratic(w);
    let g = DMatrix::identity(n, n) * f - &p * k;
    // ∂_λ D = 2q w_λ, so ∂f = −2q w_λ / D² and ∂k = −4q² w_λ / D³; P is
    // quadratic, so a unit central difference of it is exact
    let dg: Vec<DMatrix<f64>> = (0..n)
        .map(|l| {
            let df = -2.0 * q * w[l] / (d * d);
            let dk = -4.0 * q * q * w[l] / (d * d * d);
            let (mut up, mut dn) = (w.to_vec(), w.to_vec());
            up[l] += 1.0;
            dn[l] -= 1.0;
            let dp = (fs_quadratic(&up) - fs_quadratic(&dn)) * 0.5;
            DMatrix::identity(n, n) * df - &p * dk - dp * k
        })
        .collect();
    let ginv = g.clone().try_inverse().unwrap();
    let gamma = Covariant::<3>::from_fn(n, |[i, j, kk]| {
        0.5 * (0..n)
            .map(|l| ginv[(i, l)] * (dg[j][(l, kk)] + dg[kk][(l, j)] - dg[l][(j, kk)]))
            .sum::<f64>()
    });
    (g, gamma)
}

#[test]
fn flat_chart_has_no_connection_or_curvature() {
    let chart = flat();
    let p = [0.3, -0.2, 0.1, 0.4];
    assert!(christoffel(&chart, &p, &fd()).unwrap().gamma.max_abs() < 1e-10);
    assert!(riemann(&chart, &p, &fd()).unwrap().max_abs() < 1e-8);
    assert!(nabla_j(&chart, &p, &fd()).unwrap().values.max_abs() < 1e-10);
    let c = class_residuals(&chart, &p, &fd()).unwrap();
    assert_eq!((c.kahler, c.nearly_kahler, c.almost_kahler), (0.0, 0.0, 0.0));
    assert_eq!(gray_ak2_residual(&chart, &p, &fd()).unwrap(), 0.0);
    let local = LocalCalculus::compute(&chart, &p, &fd()).unwrap();
    assert_eq!(local.nabla_riemann.max_abs(), 0.0);
}

#[test]
fn christoffel_is_symmetric_in_lower_indices() {
    let chart = Sphere6Chart::default();
    let gamma = christoffel(&chart, &[0.2, -0.1, 0.3, 0.05, 0.1, -0.2], &fd()).unwrap().gamma;
    for [i, j, k] in gamma.indices() {
        assert_eq!(gamma.get([i, j, k]), gamma.get([i, k, j]));
    }
}

#[test]
fn fubini_study_christoffel_matches_analytic_derivatives() {
    for (m, c, p) in [
        (2, 4.0, vec![0.3, -0.2, 0.25, 0.1]),
        (2, -4.0, vec![0.1, 0.2, -0.15, 0.05]),
        (3, 4.0, vec![0.2, -0.1, 0.15, 0.3, -0.25, 0.05]),
    ] {
        let chart = fubini_study(m, c);
        let (g, oracle) = fs_christoffel_oracle(&p, c);
        let (g_chart, _) = chart.raw_structure(&p).unwrap();
        assert!((g - g_chart).amax() < 1e-14);
        let gamma = christoffel(&chart, &p, &fd()).unwrap().gamma;
        let err = (&gamma - &oracle).max_abs();
        assert!(err < 1e-7, "m = {m}, c = {c}: {err:e}");
    }
}

#[test]
fn finite_differences_converge() {
    let chart = fubini_study(2, 4.0);
    let p = [0.3, -0.2, 0.25, 0.1];
    let (_, oracle) = fs_christoffel_oracle(&p, 4.0);
    let err = |h: f64| (&christoffel(&chart, &p, &FdConfig::new(h).unwrap()).unwrap().gamma - &oracle).max_abs();
    let (coarse, mid, fine) = (err(0.04), err(0.02), err(0.01));
    assert!(coarse / mid >= 2.0, "{coarse:e} -> {mid:e}");
    assert!(mid / fine >= 2.0, "{mid:e} -> {fine:e}");
}

#[test]
fn sphere_curvature_is_pi1() {
    let chart = Sphere6Chart::default();
    for p in chart.default_points() {
        let r = riemann(&chart, &p, &fd()).unwrap();
        let err = r.sub(&pi1(r.point())).max_abs();
        assert!(err < 1e-5, "{p:?}: {err:e}");
        let s = r.ricci();
        assert!((s.values() - r.point().metric() * 5.0).amax() < 1e-5);
    }
}

#[test]
fn complex_projective_plane_curvature_at_origin() {
    let chart = fubini_study(2, 4.0);
    let r = riemann(&chart, &[0.0; 4], &fd()).unwrap();
    let s = Bilinear::metric(r.point().clone()).scale(6.0);
    let oracle = build_from_decomposition(&s, 1.0, 1e-12).unwrap();
    assert!(r.sub(&oracle).max_abs() < 1e-5);
    assert!((r.ricci().values() - s.values()).amax() < 1e-5);
}

#[test]
fn complex_projective_plane_is_kahler() {
    let chart = fubini_study(2, 4.0);
    for p in chart.default_points() {
        assert!(nabla_j(&chart, &p, &fd()).unwrap().values.max_abs() < 1e-6);
        let c = class_residuals(&chart, &p, &fd()).unwrap();
        assert!(c.kahler < 1e-6 && c.nearly_kahler < 1e-6 && c.almost_kahler < 1e-6);
        assert!(gray_ak2_residual(&chart, &p, &fd()).unwrap() < 1e-5);
    }
}

#[test]
fn sphere_is_nearly_kahler_but_not_kahler() {
    let chart = Sphere6Chart::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for p in chart.default_points() {
        let point = eval_point(&chart, &p).unwrap();
        let dj = nabla_j(&chart, &p, &fd()).unwrap().values;
        assert!(dj.max_abs() > 0.1);
        let frame = point.orthonormal_frame();
        let mut worst = 0.0f64;
        for _ in 0..50 {
            let xi = DVector::<f64>::from_fn(6, |_, _| rng.random_range(-1.0..1.0));
            let x = &frame * (&xi / xi.norm());
            // ((∇_x J) x)^i = x^k (∇_k J)^i_j x^j
            let v = DVector::from_fn(6, |i, _| {
                let mut acc = 0.0;
                for k in 0..6 {
                    for j in 0..6 {
                        acc += x[k] * dj.get([k, i, j]) * x[j];
                    }
                }
                acc
            });
            worst = worst.max(point.norm(&v));
        }
        assert!(worst < 1e-5, "{p:?}: {worst:e}");
        let c = class_residuals(&chart, &p, &fd()).unwrap();
        assert!(c.nearly_kahler < 1e-5 && c.kahler > 0.1 && c.almost_kahler > 0.1);
        // reported, not judged
        assert!(gray_ak2_residual(&chart, &p, &fd()).unwrap().is_finite());
    }
}

#[test]
fn metric_is_parallel() {
    for chart in [Arc::new(Sphere6Chart::default()) as Arc<dyn Chart>, Arc::new(fubini_study(2, 4.0))] {
        for p in chart.default_points() {
            let c = chart.clone();
            let dg = nabla_bilinear(chart.as_ref(), &p, &fd(), 0, move |x: &[f64]| c.raw_structure(x).map(|(g, _)| g)).unwrap();
            assert!(dg.max_abs() < 1e-7, "{p:?}: {:e}", dg.max_abs());
        }
    }
}

#[test]
fn conformal_factor_on_flat_space() {
    // S = (1 + 0.1 x1) g on flat space: (∇_k S)_{ij} = 0.1 δ_{k1} δ_{ij}
    let chart = flat();
    let p = [0.4, -0.3, 0.2, 0.1];
    let ds = nabla_bilinear(&chart, &p, &fd(), 0, |x| Ok(DMatrix::identity(4, 4) * (1.0 + 0.1 * x[0]))).unwrap();
    for [k, i, j] in ds.indices() {
        let expect = if k == 0 && i == j { 0.1 } else { 0.0 };
        assert!((ds.get([k, i, j]) - expect).abs() < 1e-10);
    }
}

#[test]
fn einstein_spaces_have_parallel_ricci_and_sphere_parallel_curvature() {
    let s6 = LocalCalculus::compute(&Sphere6Chart::default(), &[0.1, -0.2, 0.15, 0.05, -0.1, 0.2], &fd()).unwrap();
    assert!(s6.nabla_ricci.max_abs() < 1e-4);
    assert!(s6.nabla_riemann.max_abs() < 1e-4);
    let cp2 = LocalCalculus::compute(&fubini_study(2, 4.0), &[0.2, 0.1, -0.1, 0.3], &fd()).unwrap();
    assert!(cp2.nabla_ricci.max_abs() < 1e-4);
}

#[test]
fn rejects_tiny_steps_and_points_near_the_boundary() {
    assert!(matches!(FdConfig::new(1e-13), Err(ChartError::StepUnderflow(_))));
    assert!(matches!(FdConfig::new(f64::NAN), Err(ChartError::StepUnderflow(_))));
    let chart = fubini_study(2, 4.0);
    let edge = [1.5 - 1e-5, 0.0, 0.0, 0.0];
    assert!(matches!(riemann(&chart, &edge, &fd()), Err(ChartError::OutOfDomain { .. })));
    assert!(matches!(riemann(&chart, &[0.0; 3], &fd()), Err(ChartError::PointDimension { .. })));
}
