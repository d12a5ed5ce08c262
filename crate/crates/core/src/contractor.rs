//! Hull-consistency filtering: forward evaluation of an expression tree
//! followed by backward projection of the relation onto every variable.

use crate::expr::{node_ranges, BinaryOp, Expr, Node, Problem, Relation, UnaryOp};
use crate::interval::{Interval, IntervalBox};

const SWEEP_SHRINK: f64 = 0.01;
const MAX_SWEEPS: usize = 20;

/// Narrows `b` to a sub-box that still holds every point of `b` satisfying
/// `e(x) rel 0`. Returns an empty box when no such point can exist.
pub fn hc4_revise(e: &Expr, rel: Relation, b: &IntervalBox) -> IntervalBox {
    if b.is_empty() {
        return b.clone();
    }
    let target = match rel {
        Relation::Eq => Interval::ZERO,
        Relation::Le => Interval::new(f64::NEG_INFINITY, 0.0),
    };
    let mut r = node_ranges(e, b);
    let root = e.root();
    r[root] = r[root].intersect(&target);
    if r[root].is_empty() {
        return IntervalBox::empty(b.len());
    }
    let mut out = b.clone();
    for i in (0..e.nodes().len()).rev() {
        let ri = r[i];
        match e.nodes()[i] {
            Node::Var(v) => {
                let nv = out[v].intersect(&ri);
                if nv.is_empty() {
                    return IntervalBox::empty(b.len());
                }
                out.set(v, nv);
            }
            Node::Const(c) => {
                if !ri.contains(c) {
                    return IntervalBox::empty(b.len());
                }
            }
            Node::Unary(op, a) => {
                let ra = r[a];
                let proj = match op {
                    UnaryOp::Neg => -ri,
                    UnaryOp::Sqr => even_preimage(&ri, &ra, 2),
                    UnaryOp::Sqrt => ri.intersect(&Interval::new(0.0, f64::INFINITY)).sqr(),
                    UnaryOp::Exp => ri.log(),
                    UnaryOp::Log => ri.exp(),
                    UnaryOp::Sin | UnaryOp::Cos => Interval::ENTIRE,
                };
                if !narrow(&mut r, a, proj) {
                    return IntervalBox::empty(b.len());
                }
            }
            Node::Pow(a, n) => {
                let ra = r[a];
                let proj = if n <= 0 {
                    Interval::ENTIRE
                } else if n % 2 == 0 {
                    even_preimage(&ri, &ra, n as u32)
                } else {
                    odd_preimage(&ri, n as u32)
                };
                if !narrow(&mut r, a, proj) {
                    return IntervalBox::empty(b.len());
                }
            }
            Node::Binary(op, a, c) => {
                let (ra, rc) = (r[a], r[c]);
                let (pa, pc) = match op {
                    BinaryOp::Add => (ri - rc, ri - ra),
                    BinaryOp::Sub => (ri + rc, ra - ri),
                    BinaryOp::Mul => (quotient(&ri, &rc), quotient(&ri, &ra)),
                    BinaryOp::Div => {
                        // r = a / c  =>  a = r * c, c = a / r
                        let pa = if rc.contains_zero() { Interval::ENTIRE } else { ri * rc };
                        (pa, quotient(&ra, &ri))
                    }
                };
                if !narrow(&mut r, a, pa) || !narrow(&mut r, c, pc) {
                    return IntervalBox::empty(b.len());
                }
            }
        }
    }
    out
}

fn narrow(r: &mut [Interval], i: usize, proj: Interval) -> bool {
    r[i] = r[i].intersect(&proj);
    !r[i].is_empty()
}

/// `num / den` for projections; no narrowing when the divisor holds zero.
fn quotient(num: &Interval, den: &Interval) -> Interval {
    if den.contains_zero() {
        Interval::ENTIRE
    } else {
        *num / *den
    }
}

/// Hull of the two-sided preimage of `r` under `x^n`, n even, within `a`.
fn even_preimage(r: &Interval, a: &Interval, n: u32) -> Interval {
    let root = r.nth_root_pos(n);
    if root.is_empty() {
        return Interval::EMPTY;
    }
    let pos = root.intersect(a);
    let neg = (-root).intersect(a);
    pos.hull(&neg)
}

fn odd_preimage(r: &Interval, n: u32) -> Interval {
    if r.is_empty() {
        return Interval::EMPTY;
    }
    let inf = f64::INFINITY;
    let lo = if r.lo() >= 0.0 {
        Interval::new(r.lo(), inf).nth_root_pos(n).lo()
    } else {
        -Interval::new(0.0, -r.lo()).nth_root_pos(n).hi()
    };
    let hi = if r.hi() >= 0.0 {
        Interval::new(0.0, r.hi()).nth_root_pos(n).hi()
    } else {
        -Interval::new(-r.hi(), inf).nth_root_pos(n).lo()
    };
    Interval::new(lo, hi)
}

/// Applies [`hc4_revise`] over all constraints and the cut `f(x) - u <= 0`
/// until a full sweep shrinks no dimension by 1% or more.
pub fn prune(p: &Problem, b: &IntervalBox, u: f64) -> IntervalBox {
    let mut cur = b.clone();
    if cur.is_empty() {
        return cur;
    }
    let cut = (u < f64::INFINITY).then(|| p.objective().clone() - u);
    for _ in 0..MAX_SWEEPS {
        let before = cur.clone();
        for (e, rel) in p.constraints() {
            cur = hc4_revise(e, rel, &cur);
            if cur.is_empty() {
                return cur;
            }
        }
        if let Some(c) = &cut {
            cur = hc4_revise(c, Relation::Le, &cur);
            if cur.is_empty() {
                return cur;
            }
        }
        if !shrunk(&before, &cur) {
            break;
        }
    }
    cur
}

fn shrunk(before: &IntervalBox, after: &IntervalBox) -> bool {
    before.iter().zip(after.iter()).any(|(x, y)| {
        let (wx, wy) = (x.width(), y.width());
        if wx.is_infinite() {
            return wy.is_finite() || x.lo() != y.lo() || x.hi() != y.hi();
        }
        wx - wy > SWEEP_SHRINK * wx
    })
}
