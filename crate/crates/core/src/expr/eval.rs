use nalgebra::DMatrix;

use super::{BinaryOp, Expr, Node, UnaryOp};
use crate::interval::{Interval, IntervalBox};

/// A point evaluation left the natural domain of some operation (or
/// overflowed).
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("domain failure at expression node {node}")]
pub struct DomainError {
    pub node: usize,
}

/// Arithmetic shared by point and interval evaluation so that evaluation and
/// forward-mode differentiation are written once.
trait Scalar: Copy {
    fn constant(c: f64) -> Self;
    fn is_zero(&self) -> bool;
    fn add(self, o: Self) -> Self;
    fn sub(self, o: Self) -> Self;
    fn mul(self, o: Self) -> Self;
    fn div(self, o: Self) -> Self;
    fn neg(self) -> Self;
    fn sqr(self) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn log(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn powi(self, n: i32) -> Self;
}

impl Scalar for f64 {
    fn constant(c: f64) -> Self {
        c
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn mul(self, o: Self) -> Self {
        self * o
    }
    fn div(self, o: Self) -> Self {
        self / o
    }
    fn neg(self) -> Self {
        -self
    }
    fn sqr(self) -> Self {
        self * self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn log(self) -> Self {
        f64::ln(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
}

impl Scalar for Interval {
    fn constant(c: f64) -> Self {
        Interval::point(c)
    }
    fn is_zero(&self) -> bool {
        self.lo() == 0.0 && self.hi() == 0.0
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn mul(self, o: Self) -> Self {
        self * o
    }
    fn div(self, o: Self) -> Self {
        self / o
    }
    fn neg(self) -> Self {
        -self
    }
    fn sqr(self) -> Self {
        Interval::sqr(&self)
    }
    fn sqrt(self) -> Self {
        Interval::sqrt(&self)
    }
    fn exp(self) -> Self {
        Interval::exp(&self)
    }
    fn log(self) -> Self {
        Interval::log(&self)
    }
    fn sin(self) -> Self {
        Interval::sin(&self)
    }
    fn cos(self) -> Self {
        Interval::cos(&self)
    }
    fn powi(self, n: i32) -> Self {
        Interval::powi(&self, n)
    }
}

#[inline]
fn apply_unary<T: Scalar>(op: UnaryOp, a: T) -> T {
    match op {
        UnaryOp::Neg => a.neg(),
        UnaryOp::Sqr => a.sqr(),
        UnaryOp::Sqrt => a.sqrt(),
        UnaryOp::Exp => a.exp(),
        UnaryOp::Log => a.log(),
        UnaryOp::Sin => a.sin(),
        UnaryOp::Cos => a.cos(),
    }
}

#[inline]
fn apply_binary<T: Scalar>(op: BinaryOp, a: T, b: T) -> T {
    match op {
        BinaryOp::Add => a.add(b),
        BinaryOp::Sub => a.sub(b),
        BinaryOp::Mul => a.mul(b),
        BinaryOp::Div => a.div(b),
    }
}

fn forward<T: Scalar>(e: &Expr, vars: &[T]) -> Vec<T> {
    let mut vals: Vec<T> = Vec::with_capacity(e.nodes.len());
    for node in &e.nodes {
        let v = match *node {
            Node::Var(i) => vars[i],
            Node::Const(c) => T::constant(c),
            Node::Unary(op, a) => apply_unary(op, vals[a]),
            Node::Binary(op, a, b) => apply_binary(op, vals[a], vals[b]),
            Node::Pow(a, n) => vals[a].powi(n),
        };
        vals.push(v);
    }
    vals
}

/// Floating-point value of `e` at `x`.
pub fn eval_point(e: &Expr, x: &[f64]) -> Result<f64, DomainError> {
    let vals = forward(e, x);
    if let Some(node) = vals.iter().position(|v| !v.is_finite()) {
        return Err(DomainError { node });
    }
    Ok(vals[e.root()])
}

/// Natural interval extension of `e` over `b`.
pub fn eval_interval(e: &Expr, b: &IntervalBox) -> Interval {
    if b.is_empty() {
        return Interval::EMPTY;
    }
    let vals = forward(e, b.components());
    vals[e.root()]
}

/// Interval enclosure of every node of `e` over `b`, in node order.
pub fn node_ranges(e: &Expr, b: &IntervalBox) -> Vec<Interval> {
    forward(e, b.components())
}

/// Forward-mode value and gradient of `e`; gradients have one entry per
/// element of `vars`.
fn forward_grad<T: Scalar>(e: &Expr, vars: &[T]) -> (Vec<T>, Vec<T>) {
    let n = vars.len();
    let zero = T::constant(0.0);
    let one = T::constant(1.0);
    let m = e.nodes.len();
    let vals = forward(e, vars);
    let mut grads: Vec<T> = vec![zero; m * n];
    for (k, node) in e.nodes.iter().enumerate() {
        let (done, rest) = grads.split_at_mut(k * n);
        let out = &mut rest[..n];
        let row = |i: usize| &done[i * n..(i + 1) * n];
        match *node {
            Node::Var(i) => out[i] = one,
            Node::Const(_) => {}
            Node::Unary(op, a) => {
                let u = vals[a];
                let factor = match op {
                    UnaryOp::Neg => T::constant(-1.0),
                    UnaryOp::Sqr => u.add(u),
                    UnaryOp::Sqrt => one.div(vals[k].add(vals[k])),
                    UnaryOp::Exp => vals[k],
                    UnaryOp::Log => one.div(u),
                    UnaryOp::Sin => u.cos(),
                    UnaryOp::Cos => u.sin().neg(),
                };
                scale_into(out, row(a), factor);
            }
            Node::Pow(a, p) => {
                let factor = if p == 0 { zero } else { T::constant(p as f64).mul(vals[a].powi(p - 1)) };
                scale_into(out, row(a), factor);
            }
            Node::Binary(op, a, b) => {
                let (ga, gb) = (row(a), row(b));
                for j in 0..n {
                    let (da, db) = (ga[j], gb[j]);
                    out[j] = match op {
                        BinaryOp::Add => da.add(db),
                        BinaryOp::Sub => da.sub(db),
                        BinaryOp::Mul => prod_rule(da, vals[b]).add(prod_rule(db, vals[a])),
                        BinaryOp::Div => {
                            // (da - q*db) / b
                            let num = if db.is_zero() { da } else { da.sub(vals[k].mul(db)) };
                            if num.is_zero() {
                                zero
                            } else {
                                num.div(vals[b])
                            }
                        }
                    };
                }
            }
        }
    }
    let r = e.root();
    (vals, grads[r * n..(r + 1) * n].to_vec())
}

#[inline]
fn prod_rule<T: Scalar>(d: T, other: T) -> T {
    if d.is_zero() {
        T::constant(0.0)
    } else {
        d.mul(other)
    }
}

#[inline]
fn scale_into<T: Scalar>(out: &mut [T], src: &[T], factor: T) {
    for (o, s) in out.iter_mut().zip(src) {
        // A zero partial stays zero even where the outer derivative is
        // undefined (e.g. d/dy sqrt(x) at x = 0).
        *o = if s.is_zero() { T::constant(0.0) } else { factor.mul(*s) };
    }
}

/// Value and gradient of `e` at `x` by forward-mode AD.
pub fn gradient_point(e: &Expr, x: &[f64]) -> Result<(f64, Vec<f64>), DomainError> {
    let (vals, grad) = forward_grad(e, x);
    if let Some(node) = vals.iter().position(|v| !v.is_finite()) {
        return Err(DomainError { node });
    }
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(DomainError { node: e.root() });
    }
    Ok((vals[e.root()], grad))
}

/// Interval value and interval gradient of `e` over `b`.
pub fn gradient_interval(e: &Expr, b: &IntervalBox) -> (Interval, Vec<Interval>) {
    if b.is_empty() {
        return (Interval::EMPTY, vec![Interval::EMPTY; b.len()]);
    }
    let (vals, grad) = forward_grad(e, b.components());
    (vals[e.root()], grad)
}

/// Jacobian of `exprs` at `x`: row i holds the gradient of `exprs[i]`.
pub fn jacobian_point(exprs: &[Expr], x: &[f64]) -> Result<DMatrix<f64>, DomainError> {
    let mut j = DMatrix::zeros(exprs.len(), x.len());
    for (i, e) in exprs.iter().enumerate() {
        let (_, g) = gradient_point(e, x)?;
        for (k, v) in g.into_iter().enumerate() {
            j[(i, k)] = v;
        }
    }
    Ok(j)
}

/// Interval Jacobian of `exprs` over `b`, row-major.
pub fn jacobian_interval(exprs: &[Expr], b: &IntervalBox) -> Vec<Vec<Interval>> {
    exprs.iter().map(|e| gradient_interval(e, b).1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Expr {
        Expr::var(0)
    }
    fn y() -> Expr {
        Expr::var(1)
    }

    #[test]
    fn point_examples() {
        let circle = x().sqr() + y().sqr() - 1.0;
        assert_eq!(eval_point(&circle, &[1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(eval_point(&(x() + y()), &[0.5, 0.25]).unwrap(), 0.75);
        assert!(eval_point(&x().sqrt(), &[-1.0]).is_err());
        assert!(eval_point(&x().log(), &[0.0]).is_err());
    }

    #[test]
    fn interval_examples() {
        let e = x().sqr() - x();
        let r = eval_interval(&e, &IntervalBox::from_bounds(&[(0.0, 1.0)]));
        assert!(r.lo() <= -0.25 && r.hi() >= 0.0);
        assert_eq!(r, Interval::new(-1.0, 1.0));
        let c = eval_interval(&Expr::constant(3.0), &IntervalBox::from_bounds(&[(5.0, 9.0)]));
        assert_eq!(c, Interval::point(3.0));
        let p = eval_interval(&(x() * y()), &IntervalBox::from_bounds(&[(1.0, 2.0), (-1.0, 1.0)]));
        assert_eq!(p, Interval::new(-2.0, 2.0));
        assert!(eval_interval(&x().sqrt(), &IntervalBox::from_bounds(&[(-2.0, -1.0)])).is_empty());
    }

    #[test]
    fn jacobian_point_examples() {
        let g = [x().sqr() + y().sqr() - 1.0];
        let j = jacobian_point(&g, &[1.1, 0.9]).unwrap();
        assert!((j[(0, 0)] - 2.2).abs() < 1e-15 && (j[(0, 1)] - 1.8).abs() < 1e-15);
        let j = jacobian_point(&[x() + y(), x() - y()], &[0.3, -7.0]).unwrap();
        assert_eq!(j.as_slice(), &[1.0, 1.0, 1.0, -1.0]); // column-major
        let j = jacobian_point(&[x() * y()], &[2.0, 3.0]).unwrap();
        assert_eq!((j[(0, 0)], j[(0, 1)]), (3.0, 2.0));
    }

    #[test]
    fn jacobian_interval_examples() {
        let j = jacobian_interval(&[x().sqr()], &IntervalBox::from_bounds(&[(1.0, 3.0)]));
        assert!(Interval::new(2.0, 6.0).is_subset(&j[0][0]));
        let b = IntervalBox::from_bounds(&[(-4.0, 4.0), (-3.0, 3.0)]);
        let j = jacobian_interval(&[x() + y()], &b);
        assert_eq!(j[0][0], Interval::ONE);
        let b = IntervalBox::from_bounds(&[(0.0, 1.0), (-1.0, 2.0)]);
        let j = jacobian_interval(&[x() * y()], &b);
        assert!(Interval::new(-1.0, 2.0).is_subset(&j[0][0]));
    }

    #[test]
    fn unrelated_partial_of_sqrt_at_zero_is_zero() {
        let e = x().sqrt() + y();
        let b = IntervalBox::from_bounds(&[(0.0, 0.0), (1.0, 2.0)]);
        let (_, g) = gradient_interval(&e, &b);
        assert_eq!(g[1], Interval::ONE);
        assert!(g[0].is_empty() || !g[0].is_bounded());
    }

    #[test]
    fn negative_powers_differentiate() {
        let e = x().powi(-2);
        let (v, g) = gradient_point(&e, &[2.0]).unwrap();
        assert_eq!(v, 0.25);
        assert_eq!(g[0], -0.25);
    }
}
