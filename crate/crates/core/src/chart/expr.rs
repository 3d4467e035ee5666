//! Arithmetic expressions over chart coordinates.
//!
//! Grammar, lowest precedence first:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?            right-associative, binds tighter than unary minus
//! atom    := number | ident | ident '(' sum ')' | '(' sum ')'
//! ```

use std::fmt;

use super::ChartError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Atan,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Self::Sin,
            "cos" => Self::Cos,
            "tan" => Self::Tan,
            "exp" => Self::Exp,
            "log" => Self::Log,
            "sqrt" => Self::Sqrt,
            "atan" => Self::Atan,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Sin => "sin",
            Self::Cos => "cos",
            Self::Tan => "tan",
            Self::Exp => "exp",
            Self::Log => "log",
            Self::Sqrt => "sqrt",
            Self::Atan => "atan",
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Self::Sin => x.sin(),
            Self::Cos => x.cos(),
            Self::Tan => x.tan(),
            Self::Exp => x.exp(),
            Self::Log => x.ln(),
            Self::Sqrt => x.sqrt(),
            Self::Atan => x.atan(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            Self::Add => '+',
            Self::Sub => '-',
            Self::Mul => '*',
            Self::Div => '/',
            Self::Pow => '^',
        }
    }
}

/// Parsed expression. Coordinates are referenced by their index in the
/// chart's coordinate list.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn parse(text: &str, coords: &[String]) -> Result<Self, ChartError> {
        Self::parse_at(text, coords, 1, 1)
    }

    /// Parses `text` that starts at `line:column` of some enclosing file, so
    /// diagnostics point into that file.
    pub fn parse_at(text: &str, coords: &[String], line: usize, column: usize) -> Result<Self, ChartError> {
        let tokens = lex(text, line, column)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            coords,
            line,
            end_column: column + text.chars().count(),
        };
        let e = p.sum()?;
        match p.peek() {
            None => Ok(e),
            Some(t) => Err(p.syntax(t.column, format!("unexpected {}", t.kind))),
        }
    }

    /// Evaluates at a coordinate vector; non-finite results are reported by
    /// the caller, which knows the expression's role.
    pub fn eval(&self, point: &[f64]) -> f64 {
        match self {
            Self::Num(v) => *v,
            Self::Var(i) => point[*i],
            Self::Neg(e) => -e.eval(point),
            Self::Bin(op, a, b) => {
                let (a, b) = (a.eval(point), b.eval(point));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => pow(a, b),
                }
            }
            Self::Call(f, e) => f.apply(e.eval(point)),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Num(v) if *v == 0.0)
    }

    /// Renders with the coordinate names; parsing the output with the same
    /// names yields an equal tree.
    pub fn display<'a>(&'a self, coords: &'a [String]) -> impl fmt::Display + 'a {
        Shown { expr: self, coords }
    }
}

fn pow(a: f64, b: f64) -> f64 {
    if b.fract() == 0.0 && b.abs() <= 64.0 {
        a.powi(b as i32)
    } else {
        a.powf(b)
    }
}

struct Shown<'a> {
    expr: &'a Expr,
    coords: &'a [String],
}

impl Shown<'_> {
    fn write(&self, e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match e {
            Expr::Num(v) if *v < 0.0 => write!(f, "({v})"),
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(i) => f.write_str(&self.coords[*i]),
            Expr::Neg(inner) => {
                f.write_str("(-")?;
                self.write(inner, f)?;
                f.write_str(")")
            }
            Expr::Bin(op, a, b) => {
                f.write_str("(")?;
                self.write(a, f)?;
                write!(f, " {} ", op.symbol())?;
                self.write(b, f)?;
                f.write_str(")")
            }
            Expr::Call(func, arg) => {
                write!(f, "{}(", func.name())?;
                self.write(arg, f)?;
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for Shown<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(self.expr, f)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum TokenKind {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Num(v) => write!(f, "number {v}"),
            Self::Ident(s) => write!(f, "identifier '{s}'"),
            Self::Op(c) => write!(f, "'{c}'"),
            Self::LParen => f.write_str("'('"),
            Self::RParen => f.write_str("')'"),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    kind: TokenKind,
    column: usize,
}

fn lex(text: &str, line: usize, column: usize) -> Result<Vec<Token>, ChartError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = column + i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let kind = match c {
            '+' | '-' | '*' | '/' | '^' => {
                i += 1;
                TokenKind::Op(c)
            }
            '(' => {
                i += 1;
                TokenKind::LParen
            }
            ')' => {
                i += 1;
                TokenKind::RParen
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                let lit: String = chars[start..i].iter().collect();
                let v = lit.parse::<f64>().map_err(|_| ChartError::Syntax {
                    line,
                    column: col,
                    message: format!("malformed number '{lit}'"),
                })?;
                TokenKind::Num(v)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                TokenKind::Ident(chars[start..i].iter().collect())
            }
            other => {
                return Err(ChartError::Syntax {
                    line,
                    column: col,
                    message: format!("unexpected character '{other}'"),
                })
            }
        };
        out.push(Token { kind, column: col });
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    coords: &'a [String],
    line: usize,
    end_column: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn syntax(&self, column: usize, message: String) -> ChartError {
        ChartError::Syntax {
            line: self.line,
            column,
            message,
        }
    }

    fn eat_op(&mut self, ops: &[char]) -> Option<char> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Op(c),
                ..
            }) if ops.contains(c) => {
                let c = *c;
                self.pos += 1;
                Some(c)
            }
            _ => None,
        }
    }

    fn sum(&mut self) -> Result<Expr, ChartError> {
        let mut lhs = self.product()?;
        while let Some(c) = self.eat_op(&['+', '-']) {
            let rhs = self.product()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Expr, ChartError> {
        let mut lhs = self.unary()?;
        while let Some(c) = self.eat_op(&['*', '/']) {
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ChartError> {
        if self.eat_op(&['-']).is_some() {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ChartError> {
        let base = self.atom()?;
        if self.eat_op(&['^']).is_some() {
            let exponent = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ChartError> {
        let Some(tok) = self.next() else {
            return Err(self.syntax(self.end_column, "unexpected end of expression".into()));
        };
        match tok.kind {
            TokenKind::Num(v) => Ok(Expr::Num(v)),
            TokenKind::LParen => {
                let e = self.sum()?;
                self.expect_rparen()?;
                Ok(e)
            }
            TokenKind::Ident(name) => {
                if let Some(func) = Func::from_name(&name) {
                    match self.next() {
                        Some(Token {
                            kind: TokenKind::LParen,
                            ..
                        }) => {}
                        _ => {
                            return Err(self.syntax(tok.column, format!("function '{name}' needs '('")));
                        }
                    }
                    let arg = self.sum()?;
                    self.expect_rparen()?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                match self.coords.iter().position(|c| *c == name) {
                    Some(i) => Ok(Expr::Var(i)),
                    None => Err(ChartError::UndeclaredIdentifier {
                        name,
                        line: self.line,
                        column: tok.column,
                    }),
                }
            }
            other => Err(self.syntax(tok.column, format!("unexpected {other}"))),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ChartError> {
        match self.next() {
            Some(Token {
                kind: TokenKind::RParen,
                ..
            }) => Ok(()),
            Some(t) => Err(self.syntax(t.column, format!("expected ')', found {}", t.kind))),
            None => Err(self.syntax(self.end_column, "missing ')'".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn eval(text: &str, at: &[f64]) -> f64 {
        Expr::parse(text, &names(&["x", "y"])).unwrap().eval(at)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval("1 + 2 * 3", &[0.0, 0.0]), 7.0);
        assert_eq!(eval("2 ^ 3 ^ 2", &[0.0, 0.0]), 512.0);
        assert_eq!(eval("-x^2", &[3.0, 0.0]), -9.0);
        assert_eq!(eval("2^-1", &[0.0, 0.0]), 0.5);
        assert_eq!(eval("8 / 4 / 2", &[0.0, 0.0]), 1.0);
        assert_eq!(eval("1 - 2 - 3", &[0.0, 0.0]), -4.0);
        assert_eq!(eval("(x + y) * 2", &[1.0, 2.0]), 6.0);
        assert!((eval("sqrt(x) + atan(1)*4", &[4.0, 0.0]) - (2.0 + std::f64::consts::PI)).abs() < 1e-15);
    }

    #[test]
    fn undeclared_identifier_is_named() {
        let err = Expr::parse_at("x + x9", &names(&["x"]), 4, 10).unwrap_err();
        match err {
            ChartError::UndeclaredIdentifier { name, line, column } => {
                assert_eq!(name, "x9");
                assert_eq!((line, column), (4, 14));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let c = names(&["x"]);
        for bad in ["", "x +", "(x", "x)", "sin x", "1..2", "x $ 2", "*x"] {
            match Expr::parse(bad, &c) {
                Err(ChartError::Syntax { line: 1, .. }) => {}
                other => panic!("{bad:?}: {other:?}"),
            }
        }
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0u32..1000).prop_map(|v| Expr::Num(v as f64 / 8.0)),
            (0usize..2).prop_map(Expr::Var),
        ];
        leaf.prop_recursive(5, 40, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
                (inner.clone(), inner.clone(), 0..5u8).prop_map(|(a, b, k)| {
                    let op = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow][k as usize];
                    Expr::Bin(op, Box::new(a), Box::new(b))
                }),
                inner.prop_map(|e| Expr::Call(Func::Sin, Box::new(e))),
            ]
        })
    }

    proptest! {
        #[test]
        fn display_reparses_to_same_tree(e in arb_expr()) {
            let c = names(&["x", "y"]);
            let text = e.display(&c).to_string();
            prop_assert_eq!(Expr::parse(&text, &c).unwrap(), e);
        }

        #[test]
        fn parser_never_panics(s in "[-+*/^() xy0-9.a-z]{0,30}") {
            let _ = Expr::parse(&s, &names(&["x", "y"]));
        }
    }
}
