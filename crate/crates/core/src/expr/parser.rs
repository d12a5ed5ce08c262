//! Reader for the plain-text problem format:
//!
//! ```text
//! # unit circle
//! var x in [-2, 2];
//! var y in [-2, 2];
//! min x + y;
//! subject x^2 + y^2 - 1 = 0;
//! subject x*y - 1 <= 0;
//! ```
//!
//! Constraints may also be written `lhs = rhs`, `lhs <= rhs` or `lhs >= rhs`;
//! they are normalized to `e = 0` / `e <= 0`.

use std::collections::HashMap;

use super::{BinaryOp, Expr, Problem, ProblemError, UnaryOp};
use crate::interval::{Interval, IntervalBox};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("{line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{line}:{column}: undeclared variable `{name}`")]
    UndeclaredVariable { name: String, line: usize, column: usize },
    #[error("{line}:{column}: variable `{name}` declared twice")]
    DuplicateVariable { name: String, line: usize, column: usize },
    #[error("missing `min` objective")]
    MissingObjective,
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    /// Integer literal text is kept so `^` can insist on integers.
    Int(i64),
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token { tok: Tok::Ident(s), line: tl, col: tc });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            let mut integral = true;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                integral = false;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    integral = false;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = match (integral, s.parse::<i64>()) {
                (true, Ok(v)) => Tok::Int(v),
                _ => Tok::Num(s.parse::<f64>().map_err(|e| ParseError::Syntax {
                    line: tl,
                    column: tc,
                    message: format!("bad number `{s}`: {e}"),
                })?),
            };
            out.push(Token { tok, line: tl, col: tc });
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let sym: &'static str = match two.as_str() {
            "<=" => "<=",
            ">=" => ">=",
            _ => match c {
                '+' => "+",
                '-' => "-",
                '*' => "*",
                '/' => "/",
                '^' => "^",
                '(' => "(",
                ')' => ")",
                '[' => "[",
                ']' => "]",
                ',' => ",",
                ';' => ";",
                '=' => "=",
                _ => {
                    return Err(ParseError::Syntax { line, column: col, message: format!("unexpected character `{c}`") })
                }
            },
        };
        i += sym.len();
        col += sym.len();
        out.push(Token { tok: Tok::Sym(sym), line: tl, col: tc });
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

const KEYWORDS: &[&str] = &["var", "in", "min", "subject", "inf"];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    vars: HashMap<String, usize>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, t: &Token, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax { line: t.line, column: t.col, message: message.into() })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(&self.peek().tok, Tok::Sym(x) if *x == s)
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        let t = self.next();
        match &t.tok {
            Tok::Sym(x) if *x == s => Ok(()),
            other => self.err(&t, format!("expected `{s}`, found {}", describe(other))),
        }
    }

    fn signed_number(&mut self) -> Result<f64, ParseError> {
        let neg = if self.is_sym("-") {
            self.next();
            true
        } else {
            if self.is_sym("+") {
                self.next();
            }
            false
        };
        let t = self.next();
        let v = match &t.tok {
            Tok::Num(v) => *v,
            Tok::Int(v) => *v as f64,
            Tok::Ident(s) if s == "inf" => f64::INFINITY,
            other => return self.err(&t, format!("expected a number, found {}", describe(other))),
        };
        Ok(if neg { -v } else { v })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.is_sym("+") {
                BinaryOp::Add
            } else if self.is_sym("-") {
                BinaryOp::Sub
            } else {
                return Ok(lhs);
            };
            self.next();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.is_sym("*") {
                BinaryOp::Mul
            } else if self.is_sym("/") {
                BinaryOp::Div
            } else {
                return Ok(lhs);
            };
            self.next();
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.is_sym("-") {
            self.next();
            // A minus sign directly on a bare literal is a negative constant.
            let literal = match self.peek().tok {
                Tok::Num(v) => Some(v),
                Tok::Int(v) => Some(v as f64),
                _ => None,
            };
            let followed_by_pow = literal.is_some() && matches!(&self.toks[self.pos + 1].tok, Tok::Sym("^"));
            if let (Some(v), false) = (literal, followed_by_pow) {
                self.next();
                return Ok(Expr::constant(-v));
            }
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let mut base = self.primary()?;
        while self.is_sym("^") {
            self.next();
            let paren = self.is_sym("(");
            if paren {
                self.next();
            }
            let neg = self.is_sym("-");
            if neg {
                self.next();
            }
            let t = self.next();
            let n = match t.tok {
                Tok::Int(v) if v <= i32::MAX as i64 => v as i32,
                ref other => return self.err(&t, format!("exponent must be an integer, found {}", describe(other))),
            };
            if paren {
                self.expect_sym(")")?;
            }
            base = base.powi(if neg { -n } else { n });
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let t = self.next();
        match &t.tok {
            Tok::Num(v) => Ok(Expr::constant(*v)),
            Tok::Int(v) => Ok(Expr::constant(*v as f64)),
            Tok::Sym("(") => {
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if let Some(op) = UnaryOp::from_function_name(name) {
                    if self.is_sym("(") {
                        self.next();
                        let e = self.expr()?;
                        self.expect_sym(")")?;
                        return Ok(e.unary(op));
                    }
                }
                match self.vars.get(name) {
                    Some(&i) => Ok(Expr::var(i)),
                    None => Err(ParseError::UndeclaredVariable { name: name.clone(), line: t.line, column: t.col }),
                }
            }
            other => self.err(&t, format!("expected an expression, found {}", describe(other))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Num(v) => format!("`{v}`"),
        Tok::Int(v) => format!("`{v}`"),
        Tok::Sym(s) => format!("`{s}`"),
        Tok::Eof => "end of input".into(),
    }
}

fn is_zero_const(e: &Expr) -> bool {
    matches!(e.nodes(), [super::Node::Const(c)] if *c == 0.0)
}

/// Parses a problem file.
pub fn parse_problem(text: &str) -> Result<Problem, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, vars: HashMap::new() };
    let mut names = Vec::new();
    let mut bounds = Vec::new();
    let mut objective = None;
    let mut equalities = Vec::new();
    let mut inequalities = Vec::new();

    loop {
        let t = p.next();
        match &t.tok {
            Tok::Eof => break,
            Tok::Ident(kw) if kw == "var" => {
                let nt = p.next();
                let name = match &nt.tok {
                    Tok::Ident(n) if !KEYWORDS.contains(&n.as_str()) && UnaryOp::from_function_name(n).is_none() => {
                        n.clone()
                    }
                    other => return p.err(&nt, format!("expected a variable name, found {}", describe(other))),
                };
                if p.vars.contains_key(&name) {
                    return Err(ParseError::DuplicateVariable { name, line: nt.line, column: nt.col });
                }
                let it = p.next();
                if !matches!(&it.tok, Tok::Ident(s) if s == "in") {
                    return p.err(&it, format!("expected `in`, found {}", describe(&it.tok)));
                }
                p.expect_sym("[")?;
                let lo_tok = p.peek().clone();
                let lo = p.signed_number()?;
                p.expect_sym(",")?;
                let hi = p.signed_number()?;
                p.expect_sym("]")?;
                p.expect_sym(";")?;
                let Some(iv) = Interval::try_new(lo, hi) else {
                    return p.err(&lo_tok, format!("invalid domain [{lo}, {hi}]"));
                };
                p.vars.insert(name.clone(), names.len());
                names.push(name);
                bounds.push(iv);
            }
            Tok::Ident(kw) if kw == "min" => {
                if objective.is_some() {
                    return p.err(&t, "objective declared twice");
                }
                objective = Some(p.expr()?);
                p.expect_sym(";")?;
            }
            Tok::Ident(kw) if kw == "subject" => {
                let lhs = p.expr()?;
                let rt = p.next();
                let rel = match &rt.tok {
                    Tok::Sym(s @ ("=" | "<=" | ">=")) => *s,
                    other => return p.err(&rt, format!("expected `=`, `<=` or `>=`, found {}", describe(other))),
                };
                let rhs = p.expr()?;
                p.expect_sym(";")?;
                let e = match rel {
                    ">=" => {
                        if is_zero_const(&lhs) {
                            -rhs
                        } else {
                            rhs - lhs
                        }
                    }
                    _ => {
                        if is_zero_const(&rhs) {
                            lhs
                        } else {
                            lhs - rhs
                        }
                    }
                };
                if rel == "=" {
                    equalities.push(e);
                } else {
                    inequalities.push(e);
                }
            }
            other => return p.err(&t, format!("expected `var`, `min` or `subject`, found {}", describe(other))),
        }
    }
    let objective = objective.ok_or(ParseError::MissingObjective)?;
    Ok(Problem::new(names, IntervalBox::new(bounds), objective, equalities, inequalities)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::eval_point;

    #[test]
    fn circle_problem() {
        let p = parse_problem("var x in [-2,2]; var y in [-2,2]; min x + y; subject x^2 + y^2 - 1 = 0;").unwrap();
        assert_eq!(p.n(), 2);
        assert_eq!(p.equalities().len(), 1);
        assert_eq!(p.inequalities().len(), 0);
        assert_eq!(eval_point(&p.equalities()[0], &[1.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn undeclared_variable() {
        let err = parse_problem("min x;").unwrap_err();
        assert!(matches!(err, ParseError::UndeclaredVariable { ref name, line: 1, column: 5 } if name == "x"));
    }

    #[test]
    fn inequality_spot_check() {
        let p = parse_problem("var x in [-1,1];\nvar y in [-1,1];\nmin x;\nsubject x*y - 1 <= 0;\n").unwrap();
        assert_eq!(p.inequalities().len(), 1);
        assert_eq!(eval_point(&p.inequalities()[0], &[0.0, 0.0]).unwrap(), -1.0);
    }

    #[test]
    fn comments_functions_and_precedence() {
        let text = "# header\nvar a in [0, 4]; # trailing\nmin -a^2 + sqrt(a) * exp(0) / 2;\nsubject sin(a) + cos(a) >= 0.5;\n";
        let p = parse_problem(text).unwrap();
        let v = eval_point(p.objective(), &[4.0]).unwrap();
        assert_eq!(v, -16.0 + 1.0);
        let h = eval_point(&p.inequalities()[0], &[0.0]).unwrap();
        assert_eq!(h, 0.5 - 1.0);
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_problem("var x in [0,1];\nmin x +;\n").unwrap_err();
        match err {
            ParseError::Syntax { line, column, .. } => assert_eq!((line, column), (2, 8)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_problem("var x in [0,1]; min x^1.5;"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_problem("var x in [0,1];"), Err(ParseError::MissingObjective)));
        assert!(matches!(parse_problem("var x in [2,1]; min x;"), Err(ParseError::Syntax { .. })));
        assert!(matches!(
            parse_problem("var x in [0,1]; var x in [0,1]; min x;"),
            Err(ParseError::DuplicateVariable { .. })
        ));
        assert!(matches!(parse_problem("var x in [0,1]; min x; subject y = 0;"), Err(ParseError::UndeclaredVariable { .. })));
    }

    #[test]
    fn unbounded_domains() {
        let p = parse_problem("var x in [-inf, inf]; min x^2;").unwrap();
        assert_eq!(p.domain()[0], Interval::ENTIRE);
    }

    #[test]
    fn printer_round_trip() {
        let text = "var x in [-2.5, 3]; var y in [0, 1];\nmin -(x*y) + -3 - x^-2;\nsubject sqr(x) - log(y + 1) <= 0;\nsubject exp(x) / (1 + y) = 2;\n";
        let p = parse_problem(text).unwrap();
        let again = parse_problem(&p.to_text()).unwrap();
        assert_eq!(p, again);
    }
}
