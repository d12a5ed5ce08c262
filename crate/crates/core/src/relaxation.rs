//! Linear outer approximation of a problem over a box.
//!
//! Every expression `e` gets first-order interval-Taylor estimators expanded
//! at the two extreme corners of the box. With `G = [gl, gu]` the interval
//! gradient over the box and `l` the lower corner, the mean value theorem gives
//! `e(x) >= e(l) + gl·(x - l)` and `e(x) <= e(l) + gu·(x - l)` because
//! `x - l >= 0` componentwise; the upper corner flips the roles of `gl` and
//! `gu`. Coefficients are exact floats (interval endpoints) and each constant
//! term is computed in interval arithmetic and rounded in the relaxing
//! direction, so the emitted rows hold exactly for every point of the box.

use crate::expr::{eval_interval, gradient_interval, Expr, Problem, Relation};
use crate::interval::{Interval, IntervalBox, CLAMP};

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub a: Vec<f64>,
    pub rel: Relation,
    pub rhs: f64,
}

/// `minimize c·x` subject to the rows and `x ∈ bounds`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    pub c: Vec<f64>,
    pub rows: Vec<Row>,
    pub bounds: IntervalBox,
    /// Leading columns that correspond to problem variables; the rest are
    /// auxiliary (the objective variable `z` for relaxations).
    pub n_orig: usize,
    /// Some box component had to be cut to `±CLAMP`; the LP is then only an
    /// outer approximation on the clamped box.
    pub clamped: bool,
    /// Expressions whose estimators could not be formed (unbounded gradient or
    /// undefined corner value) and were left out. Dropping rows keeps the LP a
    /// relaxation.
    pub dropped: usize,
}

impl LinearProgram {
    /// A plain LP over `bounds` (all columns are problem variables).
    pub fn new(c: Vec<f64>, rows: Vec<Row>, bounds: IntervalBox) -> LinearProgram {
        let n = bounds.len();
        assert_eq!(c.len(), n, "objective length must match the bounds");
        for r in &rows {
            assert_eq!(r.a.len(), n, "row length must match the bounds");
        }
        LinearProgram { c, rows, bounds, n_orig: n, clamped: false, dropped: 0 }
    }

    pub fn n_cols(&self) -> usize {
        self.c.len()
    }

    /// Largest row violation of `x` (rows only, bounds not included).
    pub fn max_row_violation(&self, x: &[f64]) -> f64 {
        self.rows
            .iter()
            .map(|r| {
                let ax: f64 = r.a.iter().zip(x).map(|(a, x)| a * x).sum();
                match r.rel {
                    Relation::Eq => (ax - r.rhs).abs(),
                    Relation::Le => (ax - r.rhs).max(0.0),
                }
            })
            .fold(0.0, f64::max)
    }
}

/// A linear function `a·x + k` bounding an expression from one side.
struct Estimator {
    a: Vec<f64>,
    k: f64,
}

struct Estimators {
    lower: Vec<Estimator>,
    upper: Vec<Estimator>,
    /// Exact affine form `a·x + K` when the interval gradient is degenerate.
    affine: Option<(Vec<f64>, Interval)>,
}

fn estimators(e: &Expr, b: &IntervalBox) -> Option<Estimators> {
    let (_, g) = gradient_interval(e, b);
    if g.iter().any(|gi| gi.is_empty() || !gi.is_bounded()) {
        return None;
    }
    let gl: Vec<f64> = g.iter().map(|gi| gi.lo()).collect();
    let gu: Vec<f64> = g.iter().map(|gi| gi.hi()).collect();
    let lc = b.lower_corner();
    let uc = b.upper_corner();
    let el = corner_value(e, &lc)?;
    let eu = corner_value(e, &uc)?;
    // e(l) - a·l, enclosed
    let offset = |val: Interval, a: &[f64], at: &[f64]| {
        a.iter().zip(at).fold(val, |acc, (ai, xi)| acc - Interval::point(*ai) * Interval::point(*xi))
    };
    if gl == gu {
        let k = offset(el, &gl, &lc);
        if !k.is_bounded() {
            return None;
        }
        return Some(Estimators { lower: vec![], upper: vec![], affine: Some((gl, k)) });
    }
    let mut lower = Vec::with_capacity(2);
    let mut upper = Vec::with_capacity(2);
    for (val, at, lo_slope, hi_slope) in [(el, &lc, &gl, &gu), (eu, &uc, &gu, &gl)] {
        let kl = offset(Interval::point(val.lo()), lo_slope, at).lo();
        let ku = offset(Interval::point(val.hi()), hi_slope, at).hi();
        if !kl.is_finite() || !ku.is_finite() {
            return None;
        }
        lower.push(Estimator { a: lo_slope.clone(), k: kl });
        upper.push(Estimator { a: hi_slope.clone(), k: ku });
    }
    Some(Estimators { lower, upper, affine: None })
}

fn corner_value(e: &Expr, x: &[f64]) -> Option<Interval> {
    let v = eval_interval(e, &IntervalBox::from_point(x));
    (!v.is_empty() && v.is_bounded()).then_some(v)
}

fn extend(a: &[f64], z: Option<f64>) -> Vec<f64> {
    let mut v = a.to_vec();
    v.push(z.unwrap_or(0.0));
    v
}

/// Builds the relaxation `min z` over `b`, with `z` bounded above by `u`.
/// Column `n` (after the problem variables) is `z`.
pub fn linearize(p: &Problem, b: &IntervalBox, u: f64) -> LinearProgram {
    assert!(!b.is_empty(), "cannot relax over an empty box");
    let n = p.n();
    let clamp = Interval::new(-CLAMP, CLAMP);
    let mut clamped = false;
    let comps: Vec<Interval> = b
        .iter()
        .map(|c| {
            if !c.is_subset(&clamp) {
                clamped = true;
            }
            c.intersect(&clamp)
        })
        .collect();
    let bc = IntervalBox::new(comps);

    let mut rows = Vec::new();
    let mut dropped = 0;
    for (e, rel) in p.constraints() {
        let Some(est) = estimators(e, &bc) else {
            dropped += 1;
            continue;
        };
        if let Some((a, k)) = est.affine {
            let a = extend(&a, None);
            if rel == Relation::Eq && k.is_point() {
                rows.push(Row { a, rel: Relation::Eq, rhs: -k.lo() });
            } else {
                if rel == Relation::Eq {
                    rows.push(Row { a: a.iter().map(|v| -v).collect(), rel: Relation::Le, rhs: k.hi() });
                }
                rows.push(Row { a, rel: Relation::Le, rhs: -k.lo() });
            }
            continue;
        }
        // lower estimator <= e <= 0
        for l in &est.lower {
            rows.push(Row { a: extend(&l.a, None), rel: Relation::Le, rhs: -l.k });
        }
        if rel == Relation::Eq {
            // 0 = e <= upper estimator
            for up in &est.upper {
                rows.push(Row { a: up.a.iter().map(|v| -v).chain([0.0]).collect(), rel: Relation::Le, rhs: up.k });
            }
        }
    }

    let f = p.objective();
    match estimators(f, &bc) {
        Some(est) => {
            if let Some((a, k)) = est.affine {
                rows.push(Row { a: extend(&a, Some(-1.0)), rel: Relation::Le, rhs: -k.lo() });
            }
            for l in &est.lower {
                rows.push(Row { a: extend(&l.a, Some(-1.0)), rel: Relation::Le, rhs: -l.k });
            }
        }
        None => dropped += 1,
    }

    let fr = eval_interval(f, &bc);
    let (mut zlo, mut zhi) = if fr.is_empty() { (f64::NEG_INFINITY, f64::INFINITY) } else { (fr.lo(), fr.hi()) };
    zhi = zhi.min(u);
    if zlo < -CLAMP {
        zlo = -CLAMP;
        clamped = true;
    }
    if zhi > CLAMP {
        zhi = CLAMP;
        clamped = true;
    }
    // An inverted z range means f > u everywhere on the box: the LP is
    // infeasible, encoded by the empty bound.
    let zb = Interval::try_new(zlo, zhi).unwrap_or(Interval::EMPTY);
    let mut bounds: Vec<Interval> = bc.iter().copied().collect();
    bounds.push(zb);
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    LinearProgram { c, rows, bounds: IntervalBox::new(bounds), n_orig: n, clamped, dropped }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{eval_point, parse_problem};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn row_holds(r: &Row, x: &[f64]) -> bool {
        let ax: f64 = r.a.iter().zip(x).map(|(a, x)| a * x).sum();
        let tol = 1e-9 * (1.0 + ax.abs());
        match r.rel {
            Relation::Eq => (ax - r.rhs).abs() <= tol,
            Relation::Le => ax <= r.rhs + tol,
        }
    }

    #[test]
    fn square_cuts_minorize() {
        let p = parse_problem("var x in [1,3]; min x^2;").unwrap();
        let lp = linearize(&p, p.domain(), f64::INFINITY);
        assert_eq!(lp.rows.len(), 2);
        // z >= 2x - 1 and z >= 6x - 9
        assert_eq!(lp.rows[0].a, vec![2.0, -1.0]);
        assert_eq!(lp.rows[0].rhs, 1.0);
        assert_eq!(lp.rows[1].a, vec![6.0, -1.0]);
        assert_eq!(lp.rows[1].rhs, 9.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let x: f64 = rng.gen_range(1.0..=3.0);
            assert!(lp.rows.iter().all(|r| row_holds(r, &[x, x * x])));
        }
    }

    #[test]
    fn linear_equality_is_verbatim() {
        let p = parse_problem("var x in [0,1]; var y in [0,1]; min x; subject x + y - 1 = 0;").unwrap();
        let lp = linearize(&p, p.domain(), f64::INFINITY);
        assert_eq!(lp.rows[0], Row { a: vec![1.0, 1.0, 0.0], rel: Relation::Eq, rhs: 1.0 });
    }

    #[test]
    fn objective_only() {
        let p = parse_problem("var x in [0,1]; min x;").unwrap();
        let lp = linearize(&p, p.domain(), f64::INFINITY);
        assert_eq!(lp.rows, vec![Row { a: vec![1.0, -1.0], rel: Relation::Le, rhs: 0.0 }]);
        assert_eq!(lp.bounds[1], Interval::new(0.0, 1.0));
        assert_eq!(lp.c, vec![0.0, 1.0]);
        assert!(!lp.clamped);
    }

    #[test]
    fn unbounded_gradient_drops_rows_and_big_boxes_clamp() {
        let p = parse_problem("var x in [0,4]; var y in [-inf,inf]; min y; subject 1 - sqrt(x) <= 0;").unwrap();
        let lp = linearize(&p, p.domain(), f64::INFINITY);
        assert_eq!(lp.dropped, 1);
        assert!(lp.clamped);
        assert_eq!(lp.bounds[1], Interval::new(-CLAMP, CLAMP));
    }

    #[test]
    fn relaxation_holds_at_feasible_samples() {
        let p = parse_problem(
            "var x in [-1.5,2]; var y in [-2,1.5]; min x*y + exp(x);
             subject x^2 + y^2 - 1 = 0; subject x - y^3 <= 0.5;",
        )
        .unwrap();
        let lp = linearize(&p, p.domain(), f64::INFINITY);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        while checked < 1000 {
            let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let x = [t.cos(), t.sin()];
            if x[0] - x[1].powi(3) > 0.5 {
                continue;
            }
            let z = eval_point(p.objective(), &x).unwrap();
            let pt = [x[0], x[1], z];
            for r in &lp.rows {
                let ax: f64 = r.a.iter().zip(&pt).map(|(a, x)| a * x).sum();
                // circle samples carry ~1e-16 residual in the equality
                assert!(ax <= r.rhs + 1e-9, "row {r:?} violated at {pt:?}");
            }
            checked += 1;
        }
    }
}
