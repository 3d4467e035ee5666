//! Line-oriented chart files.
//!
//! ```text
//! # comment
//! dim = 1
//! coords = x y
//! domain x = -1 1
//! g[1][1] = 1
//! g[2][2] = 1
//! J[2][1] = 1
//! J[1][2] = -1
//! point = 0 0
//! ```
//!
//! Indices are 1-based. Unset entries are zero; a metric entry set on one
//! side of the diagonal is mirrored to the other.

use std::fmt::{self, Write as _};

use nalgebra::DMatrix;

use super::{Chart, ChartError, Expr, Interval};

#[derive(Clone, Debug, PartialEq)]
pub struct ChartSpec {
    m: usize,
    coords: Vec<String>,
    metric: Vec<Vec<Expr>>,
    structure: Vec<Vec<Expr>>,
    domain: Vec<Interval>,
    points: Vec<Vec<f64>>,
}

struct Builder {
    m: Option<usize>,
    coords: Option<Vec<String>>,
    /// Explicit declarations only; mirroring happens in `finish`.
    metric: Vec<Vec<Option<Expr>>>,
    structure: Vec<Vec<Option<Expr>>>,
    domain: Vec<Interval>,
    points: Vec<Vec<f64>>,
}

/// Parses a chart file. Never panics; every malformed input yields a
/// [`ChartError`] carrying the offending line.
pub fn parse_chart(text: &str) -> Result<ChartSpec, ChartError> {
    let mut b = Builder {
        m: None,
        coords: None,
        metric: Vec::new(),
        structure: Vec::new(),
        domain: Vec::new(),
        points: Vec::new(),
    };
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let Some(eq) = content.find('=') else {
            return Err(syntax(line, first_col(content), "expected '<key> = <value>'"));
        };
        let key = content[..eq].trim();
        let value = &content[eq + 1..];
        let value_col = column_of(content, eq + 1) + leading_ws(value);
        let value = value.trim();
        b.statement(line, key, first_col(content), value, value_col)?;
    }
    b.finish()
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> ChartError {
    ChartError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

/// 1-based character column of byte offset `byte` in `s`.
fn column_of(s: &str, byte: usize) -> usize {
    s[..byte].chars().count() + 1
}

fn leading_ws(s: &str) -> usize {
    s.chars().take_while(|c| c.is_whitespace()).count()
}

fn first_col(s: &str) -> usize {
    leading_ws(s) + 1
}

fn parse_number(tok: &str, line: usize, column: usize) -> Result<f64, ChartError> {
    let v: f64 = tok
        .parse()
        .map_err(|_| syntax(line, column, format!("expected a number, found '{tok}'")))?;
    if !v.is_finite() {
        return Err(syntax(line, column, format!("'{tok}' is not finite")));
    }
    Ok(v)
}

fn parse_numbers(value: &str, line: usize, column: usize) -> Result<Vec<f64>, ChartError> {
    value
        .split_whitespace()
        .map(|t| parse_number(t, line, column))
        .collect()
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Splits `g[3][4]` into `('g', 3, 4)`.
fn table_entry(key: &str) -> Option<(char, usize, usize)> {
    let mut chars = key.chars();
    let table = chars.next()?;
    let rest: String = chars.filter(|c| !c.is_whitespace()).collect();
    let rest = rest.strip_prefix('[')?.strip_suffix(']')?;
    let (i, j) = rest.split_once("][")?;
    Some((table, i.parse().ok()?, j.parse().ok()?))
}

impl Builder {
    fn n(&self) -> Option<usize> {
        self.m.map(|m| 2 * m)
    }

    fn statement(&mut self, line: usize, key: &str, key_col: usize, value: &str, value_col: usize) -> Result<(), ChartError> {
        if key == "dim" {
            let m: usize = value
                .parse()
                .map_err(|_| syntax(line, value_col, format!("expected a positive integer, found '{value}'")))?;
            if m == 0 || m > 8 {
                return Err(ChartError::Dimension {
                    line,
                    message: format!("complex dimension {m} is outside 1..=8"),
                });
            }
            if self.m.is_some() {
                return Err(ChartError::Conflict {
                    line,
                    entry: "dim".into(),
                });
            }
            self.m = Some(m);
            let n = 2 * m;
            self.metric = vec![vec![None; n]; n];
            self.structure = vec![vec![None; n]; n];
            self.domain = vec![Interval::UNBOUNDED; n];
            return Ok(());
        }
        let Some(n) = self.n() else {
            return Err(syntax(line, key_col, "'dim' must come first"));
        };
        if key == "coords" {
            if self.coords.is_some() {
                return Err(ChartError::Conflict {
                    line,
                    entry: "coords".into(),
                });
            }
            let names: Vec<String> = value.split_whitespace().map(str::to_owned).collect();
            if let Some(bad) = names.iter().find(|s| !is_identifier(s)) {
                return Err(syntax(line, value_col, format!("'{bad}' is not an identifier")));
            }
            if names.len() != n {
                return Err(ChartError::Dimension {
                    line,
                    message: format!("dim = {} needs {} coordinates, found {}", n / 2, n, names.len()),
                });
            }
            for (i, name) in names.iter().enumerate() {
                if names[..i].contains(name) {
                    return Err(syntax(line, value_col, format!("coordinate '{name}' repeated")));
                }
            }
            self.coords = Some(names);
            return Ok(());
        }
        let Some(coords) = self.coords.clone() else {
            return Err(syntax(line, key_col, "'coords' must precede other declarations"));
        };
        if key == "point" {
            let v = parse_numbers(value, line, value_col)?;
            if v.len() != n {
                return Err(ChartError::Dimension {
                    line,
                    message: format!("point has {} values, chart has {} coordinates", v.len(), n),
                });
            }
            self.points.push(v);
            return Ok(());
        }
        if let Some(name) = key.strip_prefix("domain") {
            let name = name.trim();
            let Some(i) = coords.iter().position(|c| c == name) else {
                return Err(ChartError::UndeclaredIdentifier {
                    name: name.to_owned(),
                    line,
                    column: key_col + 6 + leading_ws(&key[6..]),
                });
            };
            let v = parse_numbers(value, line, value_col)?;
            if v.len() != 2 || v[0] >= v[1] {
                return Err(syntax(line, value_col, "domain needs '<lo> <hi>' with lo < hi"));
            }
            self.domain[i] = Interval { lo: v[0], hi: v[1] };
            return Ok(());
        }
        let Some((table, i, j)) = table_entry(key) else {
            return Err(syntax(line, key_col, format!("unknown declaration '{key}'")));
        };
        if !(1..=n).contains(&i) || !(1..=n).contains(&j) {
            return Err(ChartError::Dimension {
                line,
                message: format!("index [{i}][{j}] out of range 1..={n}"),
            });
        }
        let expr = Expr::parse_at(value, &coords, line, value_col)?;
        let (i, j) = (i - 1, j - 1);
        let entry = format!("{table}[{}][{}]", i + 1, j + 1);
        match table {
            'g' => {
                let clash = self.metric[i][j].is_some()
                    || (i != j && matches!(&self.metric[j][i], Some(prev) if *prev != expr));
                if clash {
                    return Err(ChartError::Conflict { line, entry });
                }
                self.metric[i][j] = Some(expr);
            }
            'J' => {
                if self.structure[i][j].is_some() {
                    return Err(ChartError::Conflict { line, entry });
                }
                self.structure[i][j] = Some(expr);
            }
            _ => return Err(syntax(line, key_col, format!("unknown table '{table}'"))),
        }
        Ok(())
    }

    fn finish(self) -> Result<ChartSpec, ChartError> {
        let m = self.m.ok_or(ChartError::Missing("dim"))?;
        let coords = self.coords.ok_or(ChartError::Missing("coords"))?;
        let n = 2 * m;
        let metric = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        self.metric[i][j]
                            .clone()
                            .or_else(|| self.metric[j][i].clone())
                            .unwrap_or(Expr::Num(0.0))
                    })
                    .collect()
            })
            .collect();
        let structure = self
            .structure
            .into_iter()
            .map(|row| row.into_iter().map(|e| e.unwrap_or(Expr::Num(0.0))).collect())
            .collect();
        Ok(ChartSpec {
            m,
            coords,
            metric,
            structure,
            domain: self.domain,
            points: self.points,
        })
    }
}

impl ChartSpec {
    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn metric_expr(&self, i: usize, j: usize) -> &Expr {
        &self.metric[i][j]
    }

    pub fn structure_expr(&self, i: usize, j: usize) -> &Expr {
        &self.structure[i][j]
    }

    pub fn with_points(mut self, points: Vec<Vec<f64>>) -> Self {
        self.points = points;
        self
    }

    /// Chart-file text that parses back to an equal spec.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "dim = {}", self.m);
        let _ = writeln!(out, "coords = {}", self.coords.join(" "));
        for (name, iv) in self.coords.iter().zip(&self.domain) {
            if iv.is_bounded() {
                let _ = writeln!(out, "domain {name} = {} {}", iv.lo, iv.hi);
            }
        }
        let n = 2 * self.m;
        for i in 0..n {
            for j in i..n {
                let e = &self.metric[i][j];
                if !e.is_zero() {
                    let _ = writeln!(out, "g[{}][{}] = {}", i + 1, j + 1, e.display(&self.coords));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let e = &self.structure[i][j];
                if !e.is_zero() {
                    let _ = writeln!(out, "J[{}][{}] = {}", i + 1, j + 1, e.display(&self.coords));
                }
            }
        }
        for p in &self.points {
            let vals: Vec<String> = p.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "point = {}", vals.join(" "));
        }
        out
    }

    fn eval_table(&self, table: &[Vec<Expr>], name: char, p: &[f64]) -> Result<DMatrix<f64>, ChartError> {
        let n = 2 * self.m;
        let mut out = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let v = table[i][j].eval(p);
                if !v.is_finite() {
                    return Err(ChartError::Evaluation {
                        entry: format!("{name}[{}][{}]", i + 1, j + 1),
                        expr: table[i][j].display(&self.coords).to_string(),
                        point: p.to_vec(),
                        value: v,
                    });
                }
                out[(i, j)] = v;
            }
        }
        Ok(out)
    }
}

impl Chart for ChartSpec {
    fn complex_dim(&self) -> usize {
        self.m
    }

    fn coord_names(&self) -> Vec<String> {
        self.coords.clone()
    }

    fn domain(&self) -> Vec<Interval> {
        self.domain.clone()
    }

    fn default_points(&self) -> Vec<Vec<f64>> {
        self.points.clone()
    }

    fn raw_structure(&self, p: &[f64]) -> Result<(DMatrix<f64>, DMatrix<f64>), ChartError> {
        Ok((self.eval_table(&self.metric, 'g', p)?, self.eval_table(&self.structure, 'J', p)?))
    }
}

impl fmt::Display for ChartSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
