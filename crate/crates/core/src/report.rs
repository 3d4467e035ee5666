//! Full per-point analysis of a chart and the report built from it.

use std::fmt::Write as _;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::sampling::{sample_antiholomorphic_with, sample_holomorphic_with};
use crate::analysis::{
    adapted_eigenframe, bianchi2_residual, classify, constancy, decomposition_residual, einstein_residual,
    ricci_derivative_relation_residual, schur_from_means, AnalysisError, ClassFlags, CurvatureStats, Einstein,
    EigenframeOptions, SchurReport, Verdict, VerdictKind, DEFAULT_SAMPLES, DEFAULT_SEED, FD_TOL,
};
use crate::chart::{Chart, ClassResiduals, FdConfig, LocalCalculus};
use crate::models::{Expect, Expected};
use crate::tensor_core::{ah_identity_residual, riemann_symmetry_residual, AhIdentity};

/// Agreement required between an observed constant and a model's ground truth.
pub const FIXTURE_TOL: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AnalysisOptions {
    /// Pass/fail threshold for every residual.
    pub tol: f64,
    pub fd_step: f64,
    /// Planes sampled per kind per point.
    pub samples: usize,
    pub seed: u64,
    pub fixture_tol: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            tol: FD_TOL,
            fd_step: FdConfig::default().step,
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            fixture_tol: FIXTURE_TOL,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Target {
    /// `model` or `chart`.
    pub kind: &'static str,
    pub name: String,
    pub complex_dim: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Meta {
    pub target: Target,
    #[serde(flatten)]
    pub options: AnalysisOptions,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AhResiduals {
    pub ah1: f64,
    pub ah2: f64,
    pub ah3: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointReport {
    pub point: Vec<f64>,
    pub class_residuals: ClassResiduals,
    pub ah_residuals: AhResiduals,
    pub flags: ClassFlags,
    pub lattice_violations: Vec<&'static str>,
    pub einstein: Einstein,
    pub holomorphic: CurvatureStats,
    /// Absent in complex dimension one.
    pub antiholomorphic: Option<CurvatureStats>,
    /// Absent when the Ricci tensor fails the symmetry or J-invariance gate.
    pub decomposition_residual: Option<f64>,
    pub riemann_symmetry_residual: f64,
    pub bianchi_residual: f64,
    /// Ricci eigenvalues on the adapted frame, absent when no frame exists.
    pub ricci_eigenvalues: Option<Vec<f64>>,
    pub ricci_derivative_relation_residual: Option<f64>,
    pub verdict: Verdict,
}

/// One expected-versus-observed comparison against a model's ground truth.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    /// Zero-based point index, absent for global checks.
    pub point: Option<usize>,
    pub what: String,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GlobalReport {
    pub schur: Option<SchurReport>,
    pub verdict: VerdictKind,
    /// Present in model mode only.
    pub checks: Option<Vec<Check>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub meta: Meta,
    pub points: Vec<PointReport>,
    pub global: GlobalReport,
}

impl AnalysisReport {
    /// True unless a model check failed.
    pub fn passed(&self) -> bool {
        self.global.checks.iter().flatten().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        render_text(self)
    }
}

pub fn analyze_point<C: Chart + ?Sized>(
    chart: &C,
    p: &[f64],
    opts: &AnalysisOptions,
) -> Result<PointReport, AnalysisError> {
    let fd = FdConfig::new(opts.fd_step)?;
    let on = LocalCalculus::compute(chart, p, &fd)?.orthonormal();
    let (r, s, tol) = (&on.riemann, &on.ricci, opts.tol);
    let class = on.class_residuals();
    let ah = AhIdentity::ALL.map(|which| ah_identity_residual(r, which));
    let flags = ClassFlags::from_residuals(&class, ah, tol);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let holomorphic = constancy(r, &sample_holomorphic_with(&on.point, opts.samples, &mut rng)?)?;
    let antiholomorphic = if on.point.complex_dim() >= 2 {
        Some(constancy(r, &sample_antiholomorphic_with(&on.point, opts.samples, &mut rng)?)?)
    } else {
        None
    };
    // in complex dimension one the decomposition does not depend on ν
    let nu = antiholomorphic.map(|a| a.mean);
    let frame = adapted_eigenframe(
        s,
        EigenframeOptions {
            invariance_tol: tol,
            merge_tol: tol,
        },
    )
    .ok();
    let relation = frame
        .as_ref()
        .zip(nu)
        .map(|(f, nu)| ricci_derivative_relation_residual(f, &on.nabla_ricci, &on.nabla_j, nu));

    Ok(PointReport {
        point: p.to_vec(),
        class_residuals: class,
        ah_residuals: AhResiduals {
            ah1: ah[0],
            ah2: ah[1],
            ah3: ah[2],
        },
        flags,
        lattice_violations: flags.lattice_violations(),
        einstein: einstein_residual(s),
        holomorphic,
        antiholomorphic,
        decomposition_residual: decomposition_residual(r, s, nu.unwrap_or(0.0), tol).ok(),
        riemann_symmetry_residual: riemann_symmetry_residual(r),
        bianchi_residual: bianchi2_residual(&on.nabla_riemann),
        ricci_eigenvalues: frame.map(|f| f.eigenvalues),
        ricci_derivative_relation_residual: relation,
        verdict: classify(r, s, &class, Some(&holomorphic), antiholomorphic.as_ref(), tol),
    })
}

/// Combines pointwise verdicts: a failed hypothesis anywhere decides the
/// whole chart, otherwise every point must name the same space form.
fn global_verdict(points: &[PointReport], schur: Option<&SchurReport>, tol: f64) -> VerdictKind {
    let kinds: Vec<VerdictKind> = points.iter().map(|p| p.verdict.kind).collect();
    for decisive in [VerdictKind::NotAh3, VerdictKind::NotConstantAntiholomorphic] {
        if kinds.contains(&decisive) {
            return decisive;
        }
    }
    let Some(first) = kinds.first() else {
        return VerdictKind::Inconclusive;
    };
    let consistent = first.constant().is_some()
        && kinds.iter().all(|k| k.agrees_with(first, tol))
        && schur.is_none_or(|s| s.global_spread <= tol);
    if !consistent {
        return VerdictKind::Inconclusive;
    }
    let mean = kinds.iter().filter_map(VerdictKind::constant).sum::<f64>() / kinds.len() as f64;
    match first {
        VerdictKind::RealSpaceForm(_) => VerdictKind::RealSpaceForm(mean),
        _ => VerdictKind::ComplexSpaceForm(mean),
    }
}

pub fn analyze<C: Chart + ?Sized>(
    chart: &C,
    target: Target,
    points: &[Vec<f64>],
    opts: &AnalysisOptions,
) -> Result<AnalysisReport, AnalysisError> {
    if points.is_empty() {
        return Err(AnalysisError::TooFew {
            what: "points",
            needed: 1,
            got: 0,
        });
    }
    if opts.samples < 2 {
        return Err(AnalysisError::TooFew {
            what: "samples",
            needed: 2,
            got: opts.samples,
        });
    }
    let reports = points
        .par_iter()
        .map(|p| analyze_point(chart, p, opts))
        .collect::<Result<Vec<_>, _>>()?;
    let means: Option<Vec<f64>> = reports.iter().map(|r| r.antiholomorphic.map(|a| a.mean)).collect();
    let schur = means
        .filter(|m| m.len() >= 2)
        .map(|m| schur_from_means(m, chart.complex_dim()));
    let verdict = global_verdict(&reports, schur.as_ref(), opts.tol);
    Ok(AnalysisReport {
        meta: Meta {
            target,
            options: *opts,
        },
        points: reports,
        global: GlobalReport {
            schur,
            verdict,
            checks: None,
        },
    })
}

fn check_scalar(
    out: &mut Vec<Check>,
    point: usize,
    what: &str,
    expect: Expect,
    observed: Option<(f64, f64)>,
    opts: &AnalysisOptions,
) {
    // observed is (value, spread): a mean and its deviation, or λ and ‖S − λg‖
    let (pass, shown) = match (expect, observed) {
        (Expect::Constant(v), Some((x, spread))) => (
            (x - v).abs() <= opts.fixture_tol && spread <= opts.tol,
            format!("{x:e} (spread {spread:e})"),
        ),
        (Expect::NonConstant, Some((x, spread))) => (spread > opts.tol, format!("{x:e} (spread {spread:e})")),
        (Expect::NotApplicable, None) => (true, "n/a".to_owned()),
        (_, Some((x, spread))) => (false, format!("{x:e} (spread {spread:e})")),
        (_, None) => (false, "n/a".to_owned()),
    };
    out.push(Check {
        point: Some(point),
        what: what.to_owned(),
        expected: expect.to_string(),
        observed: shown,
        pass,
    });
}

/// Compares every point and the global verdict with a model's ground truth.
pub fn check_expectations(report: &AnalysisReport, expected: &Expected) -> Vec<Check> {
    let opts = &report.meta.options;
    let mut out = Vec::new();
    for (i, p) in report.points.iter().enumerate() {
        for ((name, want), (_, got)) in expected.flags.as_array().into_iter().zip(p.flags.as_array()) {
            out.push(Check {
                point: Some(i),
                what: format!("flag {name}"),
                expected: pass_word(want).into(),
                observed: pass_word(got).into(),
                pass: want == got,
            });
        }
        out.push(Check {
            point: Some(i),
            what: "class lattice".into(),
            expected: "no violations".into(),
            observed: if p.lattice_violations.is_empty() {
                "no violations".into()
            } else {
                p.lattice_violations.join(", ")
            },
            pass: p.lattice_violations.is_empty(),
        });
        let stats = |s: &CurvatureStats| (s.mean, s.max_deviation);
        check_scalar(&mut out, i, "antiholomorphic curvature", expected.antiholomorphic, p.antiholomorphic.as_ref().map(stats), opts);
        check_scalar(&mut out, i, "holomorphic curvature", expected.holomorphic, Some(stats(&p.holomorphic)), opts);
        check_scalar(&mut out, i, "einstein constant", expected.einstein, Some((p.einstein.lambda, p.einstein.residual)), opts);
        out.push(Check {
            point: Some(i),
            what: "verdict".into(),
            expected: expected.verdict.to_string(),
            observed: p.verdict.kind.to_string(),
            pass: p.verdict.kind.agrees_with(&expected.verdict, opts.fixture_tol),
        });
    }
    out.push(Check {
        point: None,
        what: "global verdict".into(),
        expected: expected.verdict.to_string(),
        observed: report.global.verdict.to_string(),
        pass: report.global.verdict.agrees_with(&expected.verdict, opts.fixture_tol),
    });
    out
}

fn pass_word(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_owned(), |x| format!("{x:e}"))
}

fn stats_line(s: &CurvatureStats) -> String {
    format!("mean {:e}  max deviation {:e}  ({} planes)", s.mean, s.max_deviation, s.samples)
}

fn render_text(report: &AnalysisReport) -> String {
    let mut out = String::new();
    let meta = &report.meta;
    let o = &meta.options;
    let _ = writeln!(out, "{} {}  (complex dimension {})", meta.target.kind, meta.target.name, meta.target.complex_dim);
    let _ = writeln!(
        out,
        "tol {:e}  fd step {:e}  samples {}  seed {}  fixture tol {:e}",
        o.tol, o.fd_step, o.samples, o.seed, o.fixture_tol
    );
    for (i, p) in report.points.iter().enumerate() {
        let coords: Vec<String> = p.point.iter().map(|x| format!("{x}")).collect();
        let _ = writeln!(out, "\npoint {i}: ({})", coords.join(", "));
        let c = &p.class_residuals;
        let _ = writeln!(out, "  class residuals      K {:e}  NK {:e}  AK {:e}", c.kahler, c.nearly_kahler, c.almost_kahler);
        let a = &p.ah_residuals;
        let _ = writeln!(out, "  curvature identities AH1 {:e}  AH2 {:e}  AH3 {:e}", a.ah1, a.ah2, a.ah3);
        let flags: Vec<String> = p.flags.as_array().iter().map(|(n, ok)| format!("{n} {}", pass_word(*ok))).collect();
        let _ = writeln!(out, "  flags                {}", flags.join("  "));
        if !p.lattice_violations.is_empty() {
            let _ = writeln!(out, "  lattice violations   {}", p.lattice_violations.join(", "));
        }
        let _ = writeln!(out, "  einstein             lambda {:e}  residual {:e}", p.einstein.lambda, p.einstein.residual);
        let _ = writeln!(out, "  holomorphic          {}", stats_line(&p.holomorphic));
        let anti = p.antiholomorphic.as_ref().map_or_else(|| "n/a".to_owned(), stats_line);
        let _ = writeln!(out, "  antiholomorphic      {anti}");
        let _ = writeln!(out, "  decomposition        {}", opt(p.decomposition_residual));
        let _ = writeln!(out, "  riemann symmetry     {:e}", p.riemann_symmetry_residual);
        let _ = writeln!(out, "  second bianchi       {:e}", p.bianchi_residual);
        let eig = p.ricci_eigenvalues.as_ref().map_or_else(
            || "n/a".to_owned(),
            |v| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(" "),
        );
        let _ = writeln!(out, "  ricci eigenvalues    {eig}");
        let _ = writeln!(out, "  eigenframe relation  {}", opt(p.ricci_derivative_relation_residual));
        let f = &p.verdict.support.fit;
        let _ = writeln!(out, "  pi fit               a {:e}  b {:e}  residual {:e}", f.a, f.b, f.residual);
        let _ = writeln!(out, "  verdict              {}", p.verdict.kind);
    }
    let _ = writeln!(out, "\nglobal");
    if let Some(s) = &report.global.schur {
        let nus: Vec<String> = s.nu_per_point.iter().map(|x| format!("{x:e}")).collect();
        let _ = writeln!(
            out,
            "  antiholomorphic means {}  spread {:e}{}",
            nus.join(" "),
            s.global_spread,
            if s.applies { "" } else { "  (m <= 2: no global constancy implied)" }
        );
    }
    let _ = writeln!(out, "  verdict              {}", report.global.verdict);
    if let Some(checks) = &report.global.checks {
        let failed = checks.iter().filter(|c| !c.pass).count();
        let _ = writeln!(out, "\nchecks: {} of {} passed", checks.len() - failed, checks.len());
        for c in checks.iter().filter(|c| !c.pass) {
            let at = c.point.map_or_else(|| "global".to_owned(), |i| format!("point {i}"));
            let _ = writeln!(out, "  FAIL {at} {}: expected {}, observed {}", c.what, c.expected, c.observed);
        }
    }
    out
}
