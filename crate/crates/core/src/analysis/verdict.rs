use std::fmt;

use serde::Serialize;

use super::{einstein_residual, CurvatureStats};
use crate::chart::ClassResiduals;
use crate::tensor_core::{ah_identity_residual, fit_pi_span, AhIdentity, Bilinear, CurvatureTensor, PiSpanFit};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "constant", rename_all = "snake_case")]
pub enum VerdictKind {
    /// `R = c π₁`: constant sectional curvature `c`.
    RealSpaceForm(f64),
    /// Kähler with `R = (c/4)(π₁ + π₂)`: constant holomorphic curvature `c`.
    ComplexSpaceForm(f64),
    NotConstantAntiholomorphic,
    #[serde(rename = "not_ah3")]
    NotAh3,
    Inconclusive,
}

impl VerdictKind {
    pub fn constant(&self) -> Option<f64> {
        match *self {
            Self::RealSpaceForm(c) | Self::ComplexSpaceForm(c) => Some(c),
            _ => None,
        }
    }

    /// Same variant, and constants within `tol`.
    pub fn agrees_with(&self, other: &Self, tol: f64) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
            && match (self.constant(), other.constant()) {
                (Some(a), Some(b)) => (a - b).abs() <= tol,
                _ => true,
            }
    }
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::RealSpaceForm(c) => write!(f, "RealSpaceForm({c:e})"),
            Self::ComplexSpaceForm(c) => write!(f, "ComplexSpaceForm({c:e})"),
            Self::NotConstantAntiholomorphic => f.write_str("NotConstantAntiholomorphic"),
            Self::NotAh3 => f.write_str("NotAH3"),
            Self::Inconclusive => f.write_str("Inconclusive"),
        }
    }
}

/// The numbers a verdict was decided on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VerdictSupport {
    pub ah3_residual: f64,
    pub antiholomorphic_deviation: Option<f64>,
    pub holomorphic_deviation: Option<f64>,
    pub fit: PiSpanFit,
    pub kahler_residual: f64,
    pub einstein_residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Verdict {
    #[serde(flatten)]
    pub kind: VerdictKind,
    pub support: VerdictSupport,
}

/// Decides which space form, if any, the curvature at a point belongs to.
///
/// `antiholomorphic` is `None` in complex dimension one, where there are no
/// antiholomorphic planes and the constancy condition is vacuous.
pub fn classify(
    r: &CurvatureTensor,
    s: &Bilinear,
    class: &ClassResiduals,
    holomorphic: Option<&CurvatureStats>,
    antiholomorphic: Option<&CurvatureStats>,
    tol: f64,
) -> Verdict {
    let fit = fit_pi_span(r);
    let support = VerdictSupport {
        ah3_residual: ah_identity_residual(r, AhIdentity::Third),
        antiholomorphic_deviation: antiholomorphic.map(|s| s.max_deviation),
        holomorphic_deviation: holomorphic.map(|s| s.max_deviation),
        fit,
        kahler_residual: class.kahler,
        einstein_residual: einstein_residual(s).residual,
    };
    let kind = if support.ah3_residual > tol {
        VerdictKind::NotAh3
    } else if support.antiholomorphic_deviation.is_some_and(|d| d > tol) {
        VerdictKind::NotConstantAntiholomorphic
    } else if fit.residual <= tol && fit.b.abs() <= tol {
        VerdictKind::RealSpaceForm(fit.a)
    } else if fit.residual <= tol && (fit.b - fit.a).abs() <= tol && class.kahler <= tol {
        VerdictKind::ComplexSpaceForm(4.0 * fit.a)
    } else {
        VerdictKind::Inconclusive
    };
    Verdict { kind, support }
}

/// Pass/fail of the six class conditions, all judged with one tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ClassFlags {
    pub k: bool,
    pub nk: bool,
    pub ak: bool,
    pub ah1: bool,
    pub ah2: bool,
    pub ah3: bool,
}

impl ClassFlags {
    pub const ALL: ClassFlags = ClassFlags {
        k: true,
        nk: true,
        ak: true,
        ah1: true,
        ah2: true,
        ah3: true,
    };

    /// `ah` holds the residuals of the three curvature identities in order.
    pub fn from_residuals(class: &ClassResiduals, ah: [f64; 3], tol: f64) -> Self {
        Self {
            k: class.kahler <= tol,
            nk: class.nearly_kahler <= tol,
            ak: class.almost_kahler <= tol,
            ah1: ah[0] <= tol,
            ah2: ah[1] <= tol,
            ah3: ah[2] <= tol,
        }
    }

    /// Inclusions `K ⊂ NK`, `K ⊂ AK`, `AH₁ ⊂ AH₂ ⊂ AH₃` that these flags break.
    pub fn lattice_violations(&self) -> Vec<&'static str> {
        let rules = [
            (self.k && !self.nk, "K without NK"),
            (self.k && !self.ak, "K without AK"),
            (self.nk && self.ak && !self.k, "NK and AK without K"),
            (self.ah1 && !self.ah2, "AH1 without AH2"),
            (self.ah2 && !self.ah3, "AH2 without AH3"),
        ];
        rules.iter().filter(|(broken, _)| *broken).map(|(_, what)| *what).collect()
    }

    pub fn as_array(&self) -> [(&'static str, bool); 6] {
        [
            ("K", self.k),
            ("NK", self.nk),
            ("AK", self.ak),
            ("AH1", self.ah1),
            ("AH2", self.ah2),
            ("AH3", self.ah3),
        ]
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use nalgebra::DMatrix;

    use super::*;
    use crate::analysis::{constancy, sample_antiholomorphic_planes, sample_holomorphic_planes};
    use crate::tensor_core::{pi1, pi2, HermitianPoint};

    const KAHLER: ClassResiduals = ClassResiduals {
        kahler: 0.0,
        nearly_kahler: 0.0,
        almost_kahler: 0.0,
    };

    fn run(r: &CurvatureTensor, class: &ClassResiduals, tol: f64) -> Verdict {
        let point = r.point();
        let holo = constancy(r, &sample_holomorphic_planes(point, 64, 1).unwrap()).unwrap();
        let anti = (point.complex_dim() >= 2)
            .then(|| constancy(r, &sample_antiholomorphic_planes(point, 64, 2).unwrap()).unwrap());
        classify(r, &r.ricci(), class, Some(&holo), anti.as_ref(), tol)
    }

    #[test]
    fn multiples_of_pi1_are_real_space_forms() {
        for m in [2, 3] {
            let point = Arc::new(HermitianPoint::standard(m));
            for c in [-1.0, 0.0, 1.0, 2.5] {
                let v = run(&pi1(&point).scaled(c), &KAHLER, 1e-9);
                match v.kind {
                    VerdictKind::RealSpaceForm(got) => assert!((got - c).abs() < 1e-12, "{got} vs {c}"),
                    other => panic!("{other} for c = {c}"),
                }
            }
        }
    }

    #[test]
    fn complex_space_form_reports_holomorphic_curvature() {
        let point = Arc::new(HermitianPoint::standard(2));
        let r = pi1(&point).add(&pi2(&point));
        let v = run(&r, &KAHLER, 1e-9);
        assert!(v.kind.agrees_with(&VerdictKind::ComplexSpaceForm(4.0), 1e-12), "{}", v.kind);
        // without the Kähler condition the same tensor is left undecided
        let nk = ClassResiduals {
            kahler: 0.5,
            nearly_kahler: 0.0,
            almost_kahler: 0.5,
        };
        assert_eq!(run(&r, &nk, 1e-9).kind, VerdictKind::Inconclusive);
    }

    #[test]
    fn product_of_spheres_is_not_constant() {
        // S²(1) × S²(2) at a point: curvature 1 on the first factor, ¼ on the second
        let point = Arc::new(HermitianPoint::standard(2));
        let r = CurvatureTensor::new(
            crate::tensor_core::Covariant::from_fn(4, |[i, j, k, l]| {
                let same = |a: usize| a / 2;
                if same(i) != same(j) || same(j) != same(k) || same(k) != same(l) {
                    return 0.0;
                }
                let kf = if same(i) == 0 { 1.0 } else { 0.25 };
                let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                kf * (d(i, l) * d(j, k) - d(i, k) * d(j, l))
            }),
            point,
        )
        .unwrap();
        let v = run(&r, &KAHLER, 1e-9);
        assert_eq!(v.kind, VerdictKind::NotConstantAntiholomorphic);
        assert!(v.support.antiholomorphic_deviation.unwrap() > 0.1);
    }

    #[test]
    fn breaking_the_third_identity_wins() {
        let point = Arc::new(HermitianPoint::standard(2));
        let bad = crate::tensor_core::Covariant::from_fn(4, |[i, j, k, l]| {
            // curvature-type tensor of a form that is not J-invariant
            let q = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]));
            q[(i, l)] * q[(j, k)] - q[(i, k)] * q[(j, l)]
        });
        let r = CurvatureTensor::new(bad, point).unwrap();
        assert_eq!(run(&r, &KAHLER, 1e-9).kind, VerdictKind::NotAh3);
    }

    #[test]
    fn verdict_survives_orthonormal_rotation() {
        // rotate the standard frame by an orthogonal map commuting with J
        let point = Arc::new(HermitianPoint::standard(2));
        let r = pi1(&point).scaled(0.3).add(&pi2(&point).scaled(0.3));
        let (c, s) = (0.6f64, 0.8f64);
        let mut u = DMatrix::zeros(4, 4);
        for (a, b) in [(0, 2), (1, 3)] {
            u[(a, a)] = c;
            u[(b, b)] = c;
            u[(a, b)] = -s;
            u[(b, a)] = s;
        }
        let rotated_point = Arc::new(point.in_frame(&u));
        let rotated = r.in_frame(&u, rotated_point);
        let (a, b) = (run(&r, &KAHLER, 1e-9).kind, run(&rotated, &KAHLER, 1e-9).kind);
        assert!(a.agrees_with(&b, 1e-8), "{a} vs {b}");
        assert!(a.agrees_with(&VerdictKind::ComplexSpaceForm(1.2), 1e-12));
    }

    #[test]
    fn flags_and_lattice() {
        let flags = ClassFlags::from_residuals(&KAHLER, [0.0; 3], 1e-4);
        assert_eq!(flags, ClassFlags::ALL);
        assert!(flags.lattice_violations().is_empty());
        let nk = ClassResiduals {
            kahler: 0.9,
            nearly_kahler: 1e-12,
            almost_kahler: 0.9,
        };
        let s6 = ClassFlags::from_residuals(&nk, [1.0, 1e-9, 1e-9], 1e-4);
        assert!(!s6.k && s6.nk && !s6.ak && !s6.ah1 && s6.ah2 && s6.ah3);
        assert!(s6.lattice_violations().is_empty());
        let broken = ClassFlags {
            ah2: false,
            ..ClassFlags::ALL
        };
        assert_eq!(broken.lattice_violations(), vec!["AH1 without AH2"]);
    }
}
