//! Model manifolds with known curvature, used as fixtures and as named
//! analysis targets.

pub mod charts;
pub mod octonion;
pub mod sphere6;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::analysis::{ClassFlags, VerdictKind};
use crate::chart::{parse_chart, Chart};
use sphere6::Sphere6Chart;

/// Ground truth for a single scalar quantity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Expect {
    Constant(f64),
    NonConstant,
    /// The quantity does not exist, e.g. antiholomorphic planes when m = 1.
    NotApplicable,
}

impl fmt::Display for Expect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(c) => write!(f, "{c}"),
            Self::NonConstant => f.write_str("non-constant"),
            Self::NotApplicable => f.write_str("n/a"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Expected {
    pub flags: ClassFlags,
    /// Antiholomorphic sectional curvature ν.
    pub antiholomorphic: Expect,
    pub holomorphic: Expect,
    /// Einstein constant, or non-constant when S is not a multiple of g.
    pub einstein: Expect,
    pub verdict: VerdictKind,
}

#[derive(Clone)]
pub struct ModelDescriptor {
    pub name: String,
    pub summary: String,
    pub chart: Arc<dyn Chart>,
    /// Chart-file text for expression-backed models.
    pub chart_text: Option<String>,
    pub expected: Expected,
}

impl fmt::Debug for ModelDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelDescriptor")
            .field("name", &self.name)
            .field("expected", &self.expected)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("unknown model {0:?}; run `ahm models` for the list")]
    Unknown(String),
    #[error("invalid model parameters: {0}")]
    Parameters(String),
}

fn from_text(name: String, summary: String, text: String, expected: Expected) -> ModelDescriptor {
    let chart = parse_chart(&text).expect("generated chart text parses");
    ModelDescriptor {
        name,
        summary,
        chart: Arc::new(chart),
        chart_text: Some(text),
        expected,
    }
}

fn anti_or_na(m: usize, nu: f64) -> Expect {
    if m >= 2 {
        Expect::Constant(nu)
    } else {
        Expect::NotApplicable
    }
}

pub fn model_flat(m: usize) -> Result<ModelDescriptor, ModelError> {
    if !(1..=8).contains(&m) {
        return Err(ModelError::Parameters(format!("complex dimension {m} outside 1..=8")));
    }
    Ok(from_text(
        format!("flat{m}"),
        format!("Euclidean C^{m}"),
        charts::flat(m),
        Expected {
            flags: ClassFlags::ALL,
            antiholomorphic: anti_or_na(m, 0.0),
            holomorphic: Expect::Constant(0.0),
            einstein: Expect::Constant(0.0),
            verdict: VerdictKind::RealSpaceForm(0.0),
        },
    ))
}

pub fn model_sphere6() -> ModelDescriptor {
    ModelDescriptor {
        name: "s6".into(),
        summary: "unit S^6 with the octonionic nearly Kaehler structure".into(),
        chart: Arc::new(Sphere6Chart::default()),
        chart_text: None,
        expected: Expected {
            flags: ClassFlags {
                k: false,
                nk: true,
                ak: false,
                ah1: false,
                ah2: true,
                ah3: true,
            },
            antiholomorphic: Expect::Constant(1.0),
            holomorphic: Expect::Constant(1.0),
            einstein: Expect::Constant(5.0),
            verdict: VerdictKind::RealSpaceForm(1.0),
        },
    }
}

fn kahler_space_form(name: String, summary: String, m: usize, c: f64) -> ModelDescriptor {
    from_text(
        name,
        summary,
        charts::fubini_study(m, c),
        Expected {
            flags: ClassFlags::ALL,
            antiholomorphic: anti_or_na(m, c / 4.0),
            holomorphic: Expect::Constant(c),
            einstein: Expect::Constant((m as f64 + 1.0) * c / 2.0),
            verdict: VerdictKind::ComplexSpaceForm(c),
        },
    )
}

pub fn model_fubini_study(m: usize, c: f64) -> Result<ModelDescriptor, ModelError> {
    if !(1..=3).contains(&m) || !(c > 0.0 && c.is_finite()) {
        return Err(ModelError::Parameters(format!("Fubini-Study needs m in 1..=3 and c > 0, got m = {m}, c = {c}")));
    }
    Ok(kahler_space_form(
        format!("cp{m}"),
        format!("CP^{m}, Fubini-Study, holomorphic curvature {c}"),
        m,
        c,
    ))
}

pub fn model_complex_hyperbolic(m: usize, c: f64) -> Result<ModelDescriptor, ModelError> {
    if !(1..=2).contains(&m) || !(c < 0.0 && c.is_finite()) {
        return Err(ModelError::Parameters(format!(
            "complex hyperbolic space needs m in 1..=2 and c < 0, got m = {m}, c = {c}"
        )));
    }
    Ok(kahler_space_form(
        format!("ch{m}"),
        format!("complex hyperbolic {m}-space, Bergman metric, holomorphic curvature {c}"),
        m,
        c,
    ))
}

pub fn model_product_spheres(r1: f64, r2: f64) -> Result<ModelDescriptor, ModelError> {
    if !(r1 > 0.0 && r2 > 0.0 && r1.is_finite() && r2.is_finite()) {
        return Err(ModelError::Parameters(format!("radii must be positive, got {r1}, {r2}")));
    }
    let einstein = if r1 == r2 {
        Expect::Constant(1.0 / (r1 * r1))
    } else {
        Expect::NonConstant
    };
    Ok(from_text(
        "s2xs2".into(),
        format!("S^2({r1}) x S^2({r2}), product Kaehler structure"),
        charts::product_spheres(r1, r2),
        Expected {
            flags: ClassFlags::ALL,
            antiholomorphic: Expect::NonConstant,
            holomorphic: Expect::NonConstant,
            einstein,
            verdict: VerdictKind::NotConstantAntiholomorphic,
        },
    ))
}

pub const MODEL_NAMES: [&str; 8] = ["flat2", "s6", "cp1", "cp2", "cp3", "ch1", "ch2", "s2xs2"];

pub fn model(name: &str) -> Result<ModelDescriptor, ModelError> {
    let built = match name {
        "flat2" => model_flat(2),
        "s6" => Ok(model_sphere6()),
        "cp1" => model_fubini_study(1, 4.0),
        "cp2" => model_fubini_study(2, 4.0),
        "cp3" => model_fubini_study(3, 4.0),
        "ch1" => model_complex_hyperbolic(1, -4.0),
        "ch2" => model_complex_hyperbolic(2, -4.0),
        "s2xs2" => model_product_spheres(1.0, 2.0),
        _ => return Err(ModelError::Unknown(name.to_owned())),
    };
    Ok(built.expect("registry parameters are valid"))
}

pub fn all_models() -> Vec<ModelDescriptor> {
    MODEL_NAMES.iter().map(|n| model(n).expect("registered")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::eval_point;

    #[test]
    fn expectations_respect_the_class_lattice() {
        for d in all_models() {
            assert!(d.expected.flags.lattice_violations().is_empty(), "{}", d.name);
            if d.expected.flags.k {
                assert!(d.expected.flags.nk && d.expected.flags.ak, "{}", d.name);
            }
            if d.expected.flags.ah1 {
                assert!(d.expected.flags.ah2 && d.expected.flags.ah3, "{}", d.name);
            }
        }
    }

    #[test]
    fn default_points_are_hermitian() {
        for d in all_models() {
            let points = d.chart.default_points();
            assert!(points.len() >= 3, "{}", d.name);
            for p in points {
                eval_point(d.chart.as_ref(), &p).unwrap_or_else(|e| panic!("{}: {e}", d.name));
            }
        }
    }

    #[test]
    fn flat_metric_is_identity() {
        let d = model_flat(2).unwrap();
        let (g, _) = d.chart.raw_structure(&[0.3, -0.1, 0.7, 0.2]).unwrap();
        assert_eq!(g, nalgebra::DMatrix::identity(4, 4));
    }

    #[test]
    fn unknown_names_and_bad_parameters() {
        assert_eq!(model("cp9").unwrap_err(), ModelError::Unknown("cp9".into()));
        assert!(model_fubini_study(4, 4.0).is_err());
        assert!(model_fubini_study(2, -1.0).is_err());
        assert!(model_complex_hyperbolic(2, 1.0).is_err());
        assert!(model_product_spheres(0.0, 1.0).is_err());
        assert!(model_flat(0).is_err());
    }

    #[test]
    fn bundled_chart_files_match_generators() {
        let bundled = [
            ("flat2", include_str!("../../models/flat2.ahm")),
            ("cp1", include_str!("../../models/cp1.ahm")),
            ("cp2", include_str!("../../models/cp2.ahm")),
            ("cp3", include_str!("../../models/cp3.ahm")),
            ("ch1", include_str!("../../models/ch1.ahm")),
            ("ch2", include_str!("../../models/ch2.ahm")),
            ("s2xs2", include_str!("../../models/s2xs2.ahm")),
        ];
        for (name, text) in bundled {
            let d = model(name).unwrap();
            assert_eq!(d.chart_text.as_deref(), Some(text), "{name}");
            let parsed = parse_chart(text).unwrap();
            assert_eq!(parsed.default_points(), d.chart.default_points(), "{name}");
        }
        assert!(model("s6").unwrap().chart_text.is_none());
    }

    #[test]
    fn registry_names_match() {
        for name in MODEL_NAMES {
            assert_eq!(model(name).unwrap().name, name);
        }
    }
}
