use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::AnalysisError;
use crate::tensor_core::{Bilinear, HermitianPoint};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenframeOptions {
    /// Largest allowed component of `Je` outside its eigenspace.
    pub invariance_tol: f64,
    /// Neighbouring eigenvalues closer than this share an eigenspace.
    pub merge_tol: f64,
}

impl Default for EigenframeOptions {
    fn default() -> Self {
        Self {
            invariance_tol: 1e-9,
            merge_tol: 1e-8,
        }
    }
}

/// A g-orthonormal basis `(e_1, Je_1, ..., e_m, Je_m)` of eigenvectors of the
/// Ricci-type form, in the coordinates of its point.
#[derive(Clone, Debug)]
pub struct SpectralFrame {
    pub basis: Vec<DVector<f64>>,
    /// `λ_a` for the pair `(e_a, Je_a)`.
    pub eigenvalues: Vec<f64>,
    pub point: Arc<HermitianPoint>,
}

impl SpectralFrame {
    /// Eigenvalue belonging to the `k`-th basis vector.
    pub fn eigenvalue_of(&self, k: usize) -> f64 {
        self.eigenvalues[k / 2]
    }

    /// `Σ λ_a (e_a ⊗ e_a + Je_a ⊗ Je_a)` with both slots lowered by g.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let g = self.point.metric();
        let n = self.point.real_dim();
        let mut out = DMatrix::zeros(n, n);
        for (k, e) in self.basis.iter().enumerate() {
            let lowered = g * e;
            out += &lowered * lowered.transpose() * self.eigenvalue_of(k);
        }
        out
    }

    pub fn reconstruction_residual(&self, s: &Bilinear) -> f64 {
        (s.values() - self.reconstruct()).amax()
    }

    /// Largest defect of g-orthonormality and of `basis[2a+1] = J basis[2a]`.
    pub fn frame_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (a, x) in self.basis.iter().enumerate() {
            for (b, y) in self.basis.iter().enumerate() {
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((self.point.inner(x, y) - target).abs());
            }
        }
        for pair in self.basis.chunks(2) {
            worst = worst.max((&pair[1] - self.point.apply_j(&pair[0])).amax());
        }
        worst
    }

    /// max over basis vectors of `|S♯ e − λ e|`.
    pub fn eigen_residual(&self, s: &Bilinear) -> f64 {
        let sharp = self.point.inverse_metric() * s.values();
        self.basis
            .iter()
            .enumerate()
            .map(|(k, e)| (&sharp * e - e * self.eigenvalue_of(k)).amax())
            .fold(0.0, f64::max)
    }
}

/// Diagonalizes `S` relative to g and pairs each eigenvector with its image
/// under J. Works in the g-orthonormal frame where the problem is an ordinary
/// symmetric eigenproblem and J is orthogonal.
pub fn adapted_eigenframe(s: &Bilinear, opts: EigenframeOptions) -> Result<SpectralFrame, AnalysisError> {
    let point = s.point().clone();
    let frame = point.orthonormal_frame();
    let on_point = point.in_frame(&frame);
    let j = on_point.structure();
    let s_on = frame.transpose() * s.values() * &frame;
    let s_on = (&s_on + s_on.transpose()) * 0.5;
    let eig = s_on.clone().symmetric_eigen();

    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &k in &order {
        match clusters.last_mut() {
            Some(c) if eig.eigenvalues[k] - eig.eigenvalues[*c.last().unwrap()] <= opts.merge_tol => c.push(k),
            _ => clusters.push(vec![k]),
        }
    }

    let mut basis_on: Vec<DVector<f64>> = Vec::new();
    let mut eigenvalues = Vec::new();
    for cluster in clusters {
        let centre = cluster.iter().map(|&k| eig.eigenvalues[k]).sum::<f64>() / cluster.len() as f64;
        let space: Vec<DVector<f64>> = cluster.iter().map(|&k| eig.eigenvectors.column(k).into_owned()).collect();
        if space.len() % 2 == 1 {
            return Err(AnalysisError::NotJClosed {
                eigenvalue: centre,
                defect: f64::NAN,
            });
        }
        let project = |v: &DVector<f64>| space.iter().fold(DVector::zeros(v.len()), |acc, u| acc + u * u.dot(v));
        let mut chosen: Vec<DVector<f64>> = Vec::new();
        for _ in 0..space.len() / 2 {
            // the remaining eigenvector with the most weight off the chosen span
            let e = space
                .iter()
                .map(|u| chosen.iter().fold(u.clone(), |acc, c| &acc - c * c.dot(&acc)))
                .max_by(|a, b| a.norm().total_cmp(&b.norm()))
                .expect("nonempty eigenspace");
            let e = &e / e.norm();
            let je = j * &e;
            let defect = (&je - project(&je)).amax();
            if defect > opts.invariance_tol {
                return Err(AnalysisError::NotJClosed {
                    eigenvalue: centre,
                    defect,
                });
            }
            let lambda = 0.5 * (e.dot(&(&s_on * &e)) + je.dot(&(&s_on * &je)));
            eigenvalues.push(lambda);
            chosen.push(e);
            chosen.push(je);
        }
        basis_on.extend(chosen);
    }

    Ok(SpectralFrame {
        basis: basis_on.iter().map(|v| &frame * v).collect(),
        eigenvalues,
        point,
    })
}
