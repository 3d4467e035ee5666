use rayon::prelude::*;
use serde::Serialize;

use super::{constancy, sample_antiholomorphic_planes, AnalysisError};
use crate::chart::{riemann, Chart, FdConfig};

/// Antiholomorphic curvature across several points of one chart.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SchurReport {
    pub nu_per_point: Vec<f64>,
    /// Largest pairwise difference of the per-point values.
    pub global_spread: f64,
    /// Pointwise constancy forces a global constant only when m > 2.
    pub applies: bool,
}

pub fn schur_from_means(nu_per_point: Vec<f64>, complex_dim: usize) -> SchurReport {
    let max = nu_per_point.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = nu_per_point.iter().copied().fold(f64::INFINITY, f64::min);
    SchurReport {
        global_spread: if nu_per_point.is_empty() { 0.0 } else { max - min },
        nu_per_point,
        applies: complex_dim > 2,
    }
}

/// Mean antiholomorphic sectional curvature at each point from `n` sampled
/// planes, and the spread of those means.
pub fn schur_check<C: Chart + ?Sized>(
    chart: &C,
    points: &[Vec<f64>],
    fd: &FdConfig,
    n: usize,
    seed: u64,
) -> Result<SchurReport, AnalysisError> {
    if points.len() < 2 {
        return Err(AnalysisError::TooFew {
            what: "points",
            needed: 2,
            got: points.len(),
        });
    }
    let means = points
        .par_iter()
        .map(|p| {
            let r = riemann(chart, p, fd)?;
            let planes = sample_antiholomorphic_planes(r.point(), n, seed)?;
            Ok(constancy(&r, &planes)?.mean)
        })
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    Ok(schur_from_means(means, chart.complex_dim()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::parse_chart;
    use crate::models::charts;

    #[test]
    fn flat_chart_has_no_spread() {
        let chart = parse_chart(&charts::flat(2)).unwrap();
        let points = vec![vec![0.0; 4], vec![0.3, -0.2, 0.1, 0.4], vec![-1.0, 2.0, 0.5, 0.0]];
        let report = schur_check(&chart, &points, &FdConfig::default(), 32, 1).unwrap();
        assert_eq!(report.global_spread, 0.0);
        assert!(!report.applies);
        assert_eq!(report.nu_per_point, vec![0.0; 3]);
    }

    #[test]
    fn needs_two_points() {
        let chart = parse_chart(&charts::flat(2)).unwrap();
        assert!(schur_check(&chart, &[vec![0.0; 4]], &FdConfig::default(), 8, 1).is_err());
    }

    #[test]
    fn spread_is_max_minus_min() {
        let r = schur_from_means(vec![1.0, 1.5, 0.75], 3);
        assert_eq!(r.global_spread, 0.75);
        assert!(r.applies);
    }
}
