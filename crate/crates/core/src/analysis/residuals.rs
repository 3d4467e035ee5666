use serde::Serialize;

use super::{AnalysisError, SpectralFrame};
use crate::tensor_core::{build_from_decomposition, Bilinear, Covariant, CurvatureTensor};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Einstein {
    pub lambda: f64,
    /// ‖S − λ g‖_max
    pub residual: f64,
}

/// `λ = tr_g(S) / 2m` and how far `S` is from `λ g`.
pub fn einstein_residual(s: &Bilinear) -> Einstein {
    let point = s.point();
    let lambda = (point.inverse_metric() * s.values()).trace() / point.real_dim() as f64;
    Einstein {
        lambda,
        residual: (s.values() - point.metric() * lambda).amax(),
    }
}

/// ‖R − (⅙ψ(S) + νπ₁ − ((2m−1)/3)νπ₂)‖_max. `gate_tol` bounds the asymmetry
/// and J-defect tolerated in `S`.
pub fn decomposition_residual(
    r: &CurvatureTensor,
    s: &Bilinear,
    nu: f64,
    gate_tol: f64,
) -> Result<f64, AnalysisError> {
    Ok(r.sub(&build_from_decomposition(s, nu, gate_tol)?).max_abs())
}

/// Cyclic sum of `∇R` over its derivative slot and first two slots, stored
/// `[a][i][j][k][l] = (∇_a R)(e_i, e_j, e_k, e_l)`.
pub fn bianchi2_residual(nabla_r: &Covariant<5>) -> f64 {
    nabla_r
        .indices()
        .map(|[x, y, z, u, v]| {
            (nabla_r.get([x, y, z, u, v]) + nabla_r.get([y, z, x, u, v]) + nabla_r.get([z, x, y, u, v])).abs()
        })
        .fold(0.0, f64::max)
}

/// max over `i ≠ j` of
/// `|(∇_{e_j} S)(e_i, e_j) + (λ_i + λ_j − 2(2m−1)ν) g(Je_i, (∇_{e_j} J) e_j)|`
/// on the adapted frame, with `∇S` stored `[k][i][j]` and
/// `t[x][y][z] = g((∇_x J) y, z)`, all in the frame's coordinates.
pub fn ricci_derivative_relation_residual(frame: &SpectralFrame, nabla_s: &Covariant<3>, t: &Covariant<3>, nu: f64) -> f64 {
    let m = frame.point.complex_dim() as f64;
    let mut worst = 0.0f64;
    for (i, ei) in frame.basis.iter().enumerate() {
        let jei = frame.point.apply_j(ei);
        for (j, ej) in frame.basis.iter().enumerate() {
            if i == j {
                continue;
            }
            let ds = nabla_s.eval([ej.as_slice(), ei.as_slice(), ej.as_slice()]);
            let tj = t.eval([ej.as_slice(), ej.as_slice(), jei.as_slice()]);
            let coeff = frame.eigenvalue_of(i) + frame.eigenvalue_of(j) - 2.0 * (2.0 * m - 1.0) * nu;
            worst = worst.max((ds + coeff * tj).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use nalgebra::{DMatrix, DVector};

    use super::*;
    use crate::analysis::{adapted_eigenframe, EigenframeOptions};
    use crate::tensor_core::{pi1, pi2, HermitianPoint};

    #[test]
    fn einstein_of_block_form() {
        let point = Arc::new(HermitianPoint::standard(2));
        let s = Bilinear::new(DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 2.0, 5.0, 5.0])), point).unwrap();
        let e = einstein_residual(&s);
        assert!((e.lambda - 3.5).abs() < 1e-15);
        assert!((e.residual - 1.5).abs() < 1e-15);
    }

    #[test]
    fn decomposition_of_space_forms() {
        // sphere: S = 5g, ν = 1, m = 3; complex projective plane: S = 6g, ν = 1
        let p3 = Arc::new(HermitianPoint::standard(3));
        let s = Bilinear::metric(p3.clone()).scale(5.0);
        assert!(decomposition_residual(&pi1(&p3), &s, 1.0, 1e-9).unwrap() < 1e-12);
        let p2 = Arc::new(HermitianPoint::standard(2));
        let s = Bilinear::metric(p2.clone()).scale(6.0);
        assert!(decomposition_residual(&pi1(&p2).add(&pi2(&p2)), &s, 1.0, 1e-9).unwrap() < 1e-12);
    }

    #[test]
    fn decomposition_sees_linear_perturbation() {
        let p = Arc::new(HermitianPoint::standard(3));
        let r = pi1(&p).add(&pi2(&p).scaled(0.01));
        let s = pi1(&p).ricci();
        let got = decomposition_residual(&r, &s, 1.0, 1e-9).unwrap();
        let expect = 0.01 * pi2(&p).max_abs();
        assert!((got - expect).abs() < 1e-12, "{got} vs {expect}");
    }

    #[test]
    fn decomposition_gates_non_hermitian_ricci() {
        let p = Arc::new(HermitianPoint::standard(2));
        let s = Bilinear::new(DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0])), p.clone()).unwrap();
        assert!(decomposition_residual(&pi1(&p), &s, 1.0, 1e-9).is_err());
    }

    #[test]
    fn bianchi_catches_non_cyclic_data() {
        let zero = Covariant::<5>::zeros(4);
        assert_eq!(bianchi2_residual(&zero), 0.0);
        let mut bad = zero.clone();
        bad.set([0, 1, 2, 0, 1], 1.0);
        assert_eq!(bianchi2_residual(&bad), 1.0);
        // a cyclically antisymmetric pattern passes
        let mut good = zero;
        good.set([0, 1, 2, 0, 1], 1.0);
        good.set([1, 2, 0, 0, 1], -0.5);
        good.set([2, 0, 1, 0, 1], -0.5);
        assert_eq!(bianchi2_residual(&good), 0.0);
    }

    #[test]
    fn ricci_derivative_relation_vanishes_without_derivatives() {
        let p = Arc::new(HermitianPoint::standard(2));
        let s = Bilinear::metric(p.clone()).scale(3.0);
        let frame = adapted_eigenframe(&s, EigenframeOptions::default()).unwrap();
        let zero = Covariant::<3>::zeros(4);
        assert_eq!(ricci_derivative_relation_residual(&frame, &zero, &zero, 1.0), 0.0);
    }

    #[test]
    fn ricci_derivative_relation_combines_both_terms() {
        // standard frame (e1, Je1 = e2, e3, Je3 = e4) with λ = 1 on both pairs
        let p = Arc::new(HermitianPoint::standard(2));
        let e = |i: usize| DVector::from_fn(4, |k, _| if k == i { 1.0 } else { 0.0 });
        let frame = SpectralFrame {
            basis: (0..4).map(e).collect(),
            eigenvalues: vec![1.0, 1.0],
            point: p,
        };
        let mut ds = Covariant::<3>::zeros(4);
        ds.set([2, 0, 2], 0.25);
        let mut t = Covariant::<3>::zeros(4);
        t.set([2, 2, 1], 0.5);
        // m = 2, ν = 0.5: coefficient 1 + 1 − 3 = −1, so |0.25 − 0.5|
        let got = ricci_derivative_relation_residual(&frame, &ds, &t, 0.5);
        assert!((got - 0.25).abs() < 1e-15, "{got}");
    }
}
