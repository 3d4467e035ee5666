//! Chart-file text for the expression-backed models.

use std::fmt::Write as _;

fn coord_names(m: usize, x: &str, y: &str) -> Vec<String> {
    (1..=m).flat_map(|a| [format!("{x}{a}"), format!("{y}{a}")]).collect()
}

fn header(out: &mut String, title: &str, names: &[String]) {
    let _ = writeln!(out, "# {title}");
    let _ = writeln!(out, "dim = {}", names.len() / 2);
    let _ = writeln!(out, "coords = {}", names.join(" "));
}

fn standard_structure(out: &mut String, m: usize) {
    for a in 0..m {
        let _ = writeln!(out, "J[{}][{}] = 1", 2 * a + 2, 2 * a + 1);
        let _ = writeln!(out, "J[{}][{}] = -1", 2 * a + 1, 2 * a + 2);
    }
}

fn points(out: &mut String, pts: &[Vec<f64>]) {
    for p in pts {
        let vals: Vec<String> = p.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "point = {}", vals.join(" "));
    }
}

/// A deterministic spread of interior points: the origin plus two tilted
/// points scaled to `radius` in the max-norm.
fn sample_points(n: usize, radius: f64) -> Vec<Vec<f64>> {
    const A: [f64; 6] = [0.5, -1.0, 0.75, 0.25, -0.5, 1.0];
    const B: [f64; 6] = [1.0, 0.75, -1.0, 0.5, 0.25, -0.75];
    vec![
        vec![0.0; n],
        A[..n].iter().map(|v| round6(v * radius)).collect(),
        B[..n].iter().map(|v| round6(v * radius)).collect(),
    ]
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

pub fn flat(m: usize) -> String {
    let names = coord_names(m, "x", "y");
    let mut out = String::new();
    header(&mut out, &format!("Euclidean C^{m} with the standard complex structure"), &names);
    for i in 1..=2 * m {
        let _ = writeln!(out, "g[{i}][{i}] = 1");
    }
    standard_structure(&mut out, m);
    points(&mut out, &sample_points(2 * m, 0.5));
    out
}

/// Half-width of the coordinate box for the Fubini-Study / Bergman charts.
pub fn fubini_study_half_width(m: usize, c: f64) -> f64 {
    if c > 0.0 {
        1.5
    } else {
        // keep (|c|/4)|z|² ≤ 0.8 on the whole box
        let b = (0.8 / ((c.abs() / 4.0) * (2 * m) as f64)).sqrt();
        (b * 10.0).floor() / 10.0
    }
}

/// Kähler metric with potential `(4/c) log(1 + (c/4)|z|²)` in inhomogeneous
/// coordinates `z_a = x_a + i y_a`: holomorphic sectional curvature `c` and
/// `g(0) = I`. For `c > 0` this is Fubini–Study on CP^m, for `c < 0` the
/// Bergman metric on a ball.
pub fn fubini_study(m: usize, c: f64) -> String {
    assert!(c != 0.0);
    let names = coord_names(m, "x", "y");
    let q = c / 4.0;
    let norm2: Vec<String> = (1..=m).map(|a| format!("x{a}^2 + y{a}^2")).collect();
    let d = format!("(1 + {q} * ({}))", norm2.join(" + "));
    let mut out = String::new();
    let family = if c > 0.0 { "Fubini-Study metric on CP" } else { "Bergman metric on the ball in C" };
    header(
        &mut out,
        &format!("{family}^{m}, holomorphic sectional curvature {c}, normalized so g(0) = I"),
        &names,
    );
    let w = fubini_study_half_width(m, c);
    for name in &names {
        let _ = writeln!(out, "domain {name} = {} {w}", -w);
    }
    // coordinate i is x_a (even i) or y_a (odd i) with a = i / 2
    let x = |a: usize| format!("x{}", a + 1);
    let y = |a: usize| format!("y{}", a + 1);
    for i in 0..2 * m {
        for j in i..2 * m {
            let (a, b) = (i / 2, j / 2);
            let expr = match (i % 2, j % 2) {
                (0, 0) | (1, 1) => {
                    let cross = format!("{q} * ({} * {} + {} * {}) / {d}^2", x(a), x(b), y(a), y(b));
                    if a == b {
                        format!("1 / {d} - {cross}")
                    } else {
                        format!("-{cross}")
                    }
                }
                // g(x_a, y_b) = −q (x_a y_b − y_a x_b) / D²
                (0, 1) if a != b => format!("-{q} * ({} * {} - {} * {}) / {d}^2", x(a), y(b), y(a), x(b)),
                // g(y_a, x_b) = g(x_b, y_a)
                (1, 0) => format!("-{q} * ({} * {} - {} * {}) / {d}^2", x(b), y(a), y(b), x(a)),
                _ => continue,
            };
            let _ = writeln!(out, "g[{}][{}] = {expr}", i + 1, j + 1);
        }
    }
    standard_structure(&mut out, m);
    points(&mut out, &sample_points(2 * m, w / 4.0));
    out
}

/// Product of round two-spheres of radii `r1`, `r2`, each in a stereographic
/// chart, with the product of their rotation-by-90° structures.
pub fn product_spheres(r1: f64, r2: f64) -> String {
    let names = vec!["u1".to_owned(), "v1".to_owned(), "u2".to_owned(), "v2".to_owned()];
    let mut out = String::new();
    header(&mut out, &format!("S^2({r1}) x S^2({r2})"), &names);
    for name in &names {
        let _ = writeln!(out, "domain {name} = -1.5 1.5");
    }
    for (a, r) in [(1, r1), (2, r2)] {
        let conformal = format!("4 * {r}^2 / (1 + u{a}^2 + v{a}^2)^2");
        let _ = writeln!(out, "g[{}][{}] = {conformal}", 2 * a - 1, 2 * a - 1);
        let _ = writeln!(out, "g[{}][{}] = {conformal}", 2 * a, 2 * a);
    }
    standard_structure(&mut out, 2);
    points(&mut out, &sample_points(4, 0.4));
    out
}
