//! Expression trees for objectives and constraints, plus the [`Problem`] they
//! make up.
//!
//! An [`Expr`] is stored as a flat arena in post-order: children always sit at
//! smaller indices than their parent and the root is the last node. Evaluation,
//! differentiation and constraint propagation are then plain loops over the
//! node vector.

mod eval;
mod parser;

pub use eval::{
    eval_interval, eval_point, gradient_interval, gradient_point, jacobian_interval, jacobian_point,
    node_ranges, DomainError,
};
pub use parser::{parse_problem, ParseError};

use std::fmt;
use std::ops;

use crate::interval::IntervalBox;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Sqr,
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sqr => "sqr",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
        }
    }

    pub fn from_function_name(name: &str) -> Option<UnaryOp> {
        Some(match name {
            "sqr" => UnaryOp::Sqr,
            "sqrt" => UnaryOp::Sqrt,
            "exp" => UnaryOp::Exp,
            "log" => UnaryOp::Log,
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Node {
    Var(usize),
    Const(f64),
    Unary(UnaryOp, usize),
    Binary(BinaryOp, usize, usize),
    /// Integer power of a child node.
    Pow(usize, i32),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    nodes: Vec<Node>,
}

impl Expr {
    pub fn var(i: usize) -> Expr {
        Expr { nodes: vec![Node::Var(i)] }
    }

    /// Panics on a non-finite constant.
    pub fn constant(c: f64) -> Expr {
        assert!(c.is_finite(), "expression constants must be finite, got {c}");
        Expr { nodes: vec![Node::Const(c)] }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn unary(mut self, op: UnaryOp) -> Expr {
        let r = self.root();
        self.nodes.push(Node::Unary(op, r));
        self
    }

    pub fn powi(mut self, n: i32) -> Expr {
        let r = self.root();
        self.nodes.push(Node::Pow(r, n));
        self
    }

    pub fn sqr(self) -> Expr {
        self.unary(UnaryOp::Sqr)
    }

    pub fn sqrt(self) -> Expr {
        self.unary(UnaryOp::Sqrt)
    }

    pub fn exp(self) -> Expr {
        self.unary(UnaryOp::Exp)
    }

    pub fn log(self) -> Expr {
        self.unary(UnaryOp::Log)
    }

    pub fn sin(self) -> Expr {
        self.unary(UnaryOp::Sin)
    }

    pub fn cos(self) -> Expr {
        self.unary(UnaryOp::Cos)
    }

    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
        let mut nodes = lhs.nodes;
        let a = nodes.len() - 1;
        let off = nodes.len();
        nodes.extend(rhs.nodes.into_iter().map(|n| shift(n, off)));
        let b = nodes.len() - 1;
        nodes.push(Node::Binary(op, a, b));
        Expr { nodes }
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Var(i) => Some(*i),
                _ => None,
            })
            .max()
    }

    pub fn references_var(&self, v: usize) -> bool {
        self.nodes.iter().any(|n| matches!(n, Node::Var(i) if *i == v))
    }

    pub fn is_constant(&self) -> bool {
        !self.nodes.iter().any(|n| matches!(n, Node::Var(_)))
    }

    /// Rewrites every variable reference: `Ok(j)` renames it to variable `j`,
    /// `Err(c)` replaces it by the constant `c`.
    pub fn substitute(&self, map: impl Fn(usize) -> Result<usize, f64>) -> Expr {
        let nodes = self
            .nodes
            .iter()
            .map(|n| match *n {
                Node::Var(i) => match map(i) {
                    Ok(j) => Node::Var(j),
                    Err(c) => {
                        assert!(c.is_finite(), "substituted constant must be finite");
                        Node::Const(c)
                    }
                },
                other => other,
            })
            .collect();
        Expr { nodes }
    }

    /// Printer using the given variable names; the output parses back to the
    /// same tree.
    pub fn display<'a>(&'a self, names: &'a [String]) -> ExprDisplay<'a> {
        ExprDisplay { expr: self, names: Some(names) }
    }

    fn write_node(&self, f: &mut fmt::Formatter<'_>, idx: usize, names: Option<&[String]>) -> fmt::Result {
        match self.nodes[idx] {
            Node::Var(i) => match names.and_then(|n| n.get(i)) {
                Some(name) => write!(f, "{name}"),
                None => write!(f, "x{i}"),
            },
            Node::Const(c) => {
                if c.is_sign_negative() {
                    write!(f, "({c:?})")
                } else {
                    write!(f, "{c:?}")
                }
            }
            Node::Unary(UnaryOp::Neg, a) => {
                write!(f, "(-(")?;
                self.write_node(f, a, names)?;
                write!(f, "))")
            }
            Node::Unary(op, a) => {
                write!(f, "{}(", op.name())?;
                self.write_node(f, a, names)?;
                write!(f, ")")
            }
            Node::Binary(op, a, b) => {
                write!(f, "(")?;
                self.write_node(f, a, names)?;
                write!(f, " {} ", op.symbol())?;
                self.write_node(f, b, names)?;
                write!(f, ")")
            }
            Node::Pow(a, n) => {
                write!(f, "(")?;
                self.write_node(f, a, names)?;
                write!(f, ")^{n}")
            }
        }
    }
}

fn shift(n: Node, off: usize) -> Node {
    match n {
        Node::Unary(op, a) => Node::Unary(op, a + off),
        Node::Binary(op, a, b) => Node::Binary(op, a + off, b + off),
        Node::Pow(a, k) => Node::Pow(a + off, k),
        leaf => leaf,
    }
}

pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    names: Option<&'a [String]>,
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.expr.write_node(f, self.expr.root(), self.names)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_node(f, self.root(), None)
    }
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident, $op:expr) => {
        impl ops::$trait for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::binary($op, self, rhs)
            }
        }
        impl ops::$trait<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::binary($op, self, Expr::constant(rhs))
            }
        }
        impl ops::$trait<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::binary($op, Expr::constant(self), rhs)
            }
        }
    };
}

impl_binop!(Add, add, BinaryOp::Add);
impl_binop!(Sub, sub, BinaryOp::Sub);
impl_binop!(Mul, mul, BinaryOp::Mul);
impl_binop!(Div, div, BinaryOp::Div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.unary(UnaryOp::Neg)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    /// `e(x) = 0`
    Eq,
    /// `e(x) <= 0`
    Le,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum ProblemError {
    #[error("expression references variable {index} but the problem has {n} variables")]
    Arity { index: usize, n: usize },
    #[error("expected {n} variable names, got {got}")]
    Names { n: usize, got: usize },
    #[error("problem needs at least one variable")]
    NoVariables,
}

/// `minimize f(x) s.t. g_i(x) = 0, h_j(x) <= 0, x ∈ domain`.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    names: Vec<String>,
    domain: IntervalBox,
    objective: Expr,
    equalities: Vec<Expr>,
    inequalities: Vec<Expr>,
}

impl Problem {
    pub fn new(
        names: Vec<String>,
        domain: IntervalBox,
        objective: Expr,
        equalities: Vec<Expr>,
        inequalities: Vec<Expr>,
    ) -> Result<Problem, ProblemError> {
        let n = domain.len();
        if n == 0 {
            return Err(ProblemError::NoVariables);
        }
        if names.len() != n {
            return Err(ProblemError::Names { n, got: names.len() });
        }
        for e in std::iter::once(&objective).chain(&equalities).chain(&inequalities) {
            if let Some(index) = e.max_var() {
                if index >= n {
                    return Err(ProblemError::Arity { index, n });
                }
            }
        }
        Ok(Problem { names, domain, objective, equalities, inequalities })
    }

    /// Same as [`Problem::new`] with generated names `x0, x1, …`.
    pub fn with_default_names(
        domain: IntervalBox,
        objective: Expr,
        equalities: Vec<Expr>,
        inequalities: Vec<Expr>,
    ) -> Result<Problem, ProblemError> {
        let names = (0..domain.len()).map(|i| format!("x{i}")).collect();
        Problem::new(names, domain, objective, equalities, inequalities)
    }

    pub fn n(&self) -> usize {
        self.domain.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn domain(&self) -> &IntervalBox {
        &self.domain
    }

    pub fn objective(&self) -> &Expr {
        &self.objective
    }

    pub fn equalities(&self) -> &[Expr] {
        &self.equalities
    }

    pub fn inequalities(&self) -> &[Expr] {
        &self.inequalities
    }

    /// Equalities first, then inequalities.
    pub fn constraints(&self) -> impl Iterator<Item = (&Expr, Relation)> {
        self.equalities
            .iter()
            .map(|e| (e, Relation::Eq))
            .chain(self.inequalities.iter().map(|e| (e, Relation::Le)))
    }

    /// Max of `|g_i(x)|` and `max(0, h_j(x))`; `+inf` on a domain failure.
    pub fn constraint_violation(&self, x: &[f64]) -> f64 {
        let mut v: f64 = 0.0;
        for (e, rel) in self.constraints() {
            match eval_point(e, x) {
                Ok(val) => {
                    let viol = match rel {
                        Relation::Eq => val.abs(),
                        Relation::Le => val.max(0.0),
                    };
                    v = v.max(viol);
                }
                Err(_) => return f64::INFINITY,
            }
        }
        v
    }

    /// Problem-file text that [`parse_problem`] reads back to this problem.
    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        for (name, c) in self.names.iter().zip(self.domain.iter()) {
            let _ = writeln!(s, "var {name} in [{}, {}];", fmt_bound(c.lo()), fmt_bound(c.hi()));
        }
        let _ = writeln!(s, "min {};", self.objective.display(&self.names));
        for g in &self.equalities {
            let _ = writeln!(s, "subject {} = 0;", g.display(&self.names));
        }
        for h in &self.inequalities {
            let _ = writeln!(s, "subject {} <= 0;", h.display(&self.names));
        }
        s
    }
}

fn fmt_bound(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:?}")
    }
}
