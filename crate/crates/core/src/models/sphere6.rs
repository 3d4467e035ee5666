//! The unit six-sphere with its nearly Kähler structure `J_p X = p × X`.
//!
//! The chart is inverse stereographic projection `u ↦ (2u, 1 − |u|²)/(1 + |u|²)`
//! into R⁷. Metric and structure are pulled back through the embedding
//! Jacobian `D`: `g = Dᵀ D` and `J = g⁻¹ Dᵀ (p × D)`.

use nalgebra::{DMatrix, SMatrix, SVector};

use super::octonion;
use crate::chart::{Chart, ChartError, Interval};

pub const HALF_WIDTH: f64 = 0.8;

#[derive(Clone, Debug)]
pub struct Sphere6Chart {
    points: Vec<Vec<f64>>,
}

impl Default for Sphere6Chart {
    fn default() -> Self {
        Self {
            points: vec![
                vec![0.0; 6],
                vec![0.1, -0.2, 0.15, 0.05, -0.1, 0.2],
                vec![0.3, 0.25, -0.2, 0.1, 0.05, -0.15],
            ],
        }
    }
}

impl Sphere6Chart {
    pub fn with_points(points: Vec<Vec<f64>>) -> Self {
        Self { points }
    }

    /// Embedded point and Jacobian `D[(a, j)] = ∂p_a/∂u_j`.
    pub fn embedding(u: &[f64]) -> (SVector<f64, 7>, SMatrix<f64, 7, 6>) {
        let s: f64 = u.iter().map(|x| x * x).sum();
        let w = 1.0 + s;
        let mut p = SVector::<f64, 7>::zeros();
        for i in 0..6 {
            p[i] = 2.0 * u[i] / w;
        }
        p[6] = (1.0 - s) / w;
        let mut d = SMatrix::<f64, 7, 6>::zeros();
        for j in 0..6 {
            for i in 0..6 {
                d[(i, j)] = if i == j { 2.0 / w } else { 0.0 } - 4.0 * u[i] * u[j] / (w * w);
            }
            d[(6, j)] = -4.0 * u[j] / (w * w);
        }
        (p, d)
    }
}

impl Chart for Sphere6Chart {
    fn complex_dim(&self) -> usize {
        3
    }

    fn coord_names(&self) -> Vec<String> {
        (1..=6).map(|i| format!("u{i}")).collect()
    }

    fn domain(&self) -> Vec<Interval> {
        vec![
            Interval {
                lo: -HALF_WIDTH,
                hi: HALF_WIDTH
            };
            6
        ]
    }

    fn default_points(&self) -> Vec<Vec<f64>> {
        self.points.clone()
    }

    fn raw_structure(&self, u: &[f64]) -> Result<(DMatrix<f64>, DMatrix<f64>), ChartError> {
        let (p, d) = Self::embedding(u);
        let pa: [f64; 7] = p.into();
        let mut pd = SMatrix::<f64, 7, 6>::zeros();
        for j in 0..6 {
            let col: [f64; 7] = d.column(j).into_owned().into();
            let c = octonion::cross(&pa, &col);
            for a in 0..7 {
                pd[(a, j)] = c[a];
            }
        }
        let g = d.transpose() * d;
        let ginv = g.try_inverse().ok_or(ChartError::OutOfDomain {
            point: u.to_vec(),
            margin: 0.0,
        })?;
        let j = ginv * d.transpose() * pd;
        Ok((
            DMatrix::from_column_slice(6, 6, g.as_slice()),
            DMatrix::from_column_slice(6, 6, j.as_slice()),
        ))
    }
}
