//! Dense two-phase simplex and rigorous post-processing of its output.
//!
//! The simplex itself is ordinary floating point. Whatever it returns is only
//! used through [`safe_lower_bound`] and [`certifies_infeasible`], which
//! re-evaluate the Lagrangian of the returned multipliers over the variable
//! bounds in interval arithmetic, so rounding inside the simplex can cost
//! tightness but never validity.

use crate::expr::Relation;
use crate::interval::Interval;
use crate::relaxation::LinearProgram;

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-10;
/// Negative multipliers on `<=` rows down to this (relative) size are treated
/// as rounding noise and clipped to zero.
const DUAL_SIGN_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Iteration cap reached or unusable input; callers fall back to interval
    /// bounds.
    NumericalFailure,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Optimal point in the LP's own coordinates (empty unless optimal).
    pub primal: Vec<f64>,
    /// One multiplier per row, oriented so that `c·x >= c·x + μ·(Ax - b)`
    /// holds for feasible `x`: nonnegative on `<=` rows, free on `=` rows.
    pub duals: Vec<f64>,
    /// Phase-one multipliers (same orientation) when the LP is infeasible.
    pub farkas: Option<Vec<f64>>,
    /// Floating-point objective; not safe.
    pub objective_value: f64,
    pub iterations: usize,
}

impl LpSolution {
    fn failed(status: LpStatus, iterations: usize) -> LpSolution {
        LpSolution { status, primal: vec![], duals: vec![], farkas: None, objective_value: f64::NAN, iterations }
    }
}

struct Tableau {
    width: usize,
    /// Constraint rows followed by the objective row; the last column is the
    /// right-hand side.
    t: Vec<f64>,
    m: usize,
    basis: Vec<usize>,
    /// Column of each row's unit vector (slack or artificial).
    unit: Vec<usize>,
    first_art: usize,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.width + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.width - 1)
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.width;
        let p = self.t[r * w + q];
        for j in 0..w {
            self.t[r * w + j] /= p;
        }
        self.t[r * w + q] = 1.0;
        for i in 0..=self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * w + q];
            if f == 0.0 {
                continue;
            }
            for j in 0..w {
                let v = self.t[i * w + j] - f * self.t[r * w + j];
                self.t[i * w + j] = if v.abs() < 1e-13 { 0.0 } else { v };
            }
            self.t[i * w + q] = 0.0;
        }
        self.basis[r] = q;
    }

    /// Loads `cost` into the objective row as reduced costs for the current
    /// basis.
    fn set_objective(&mut self, cost: &[f64]) {
        let w = self.width;
        let obj = self.m * w;
        for j in 0..w {
            self.t[obj + j] = if j < cost.len() { cost[j] } else { 0.0 };
        }
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for j in 0..w {
                    self.t[obj + j] -= cb * self.t[i * w + j];
                }
            }
        }
    }

    /// Bland's rule iterations; `allowed` bounds the entering columns.
    fn run(&mut self, allowed: usize, iters: &mut usize, cap: usize) -> LpStatus {
        loop {
            let q = match (0..allowed).find(|&j| self.at(self.m, j) < -COST_TOL) {
                Some(q) => q,
                None => return LpStatus::Optimal,
            };
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.at(i, q);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i) / a;
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br || (ratio == br && self.basis[i] < self.basis[bi]) {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = best else {
                return LpStatus::Unbounded;
            };
            *iters += 1;
            if *iters > cap {
                return LpStatus::NumericalFailure;
            }
            self.pivot(r, q);
        }
    }

    /// `y_i = cost(unit_i) - d(unit_i)` for the (possibly sign-flipped) rows.
    fn row_duals(&self, cost: &[f64]) -> Vec<f64> {
        (0..self.m).map(|i| cost[self.unit[i]] - self.at(self.m, self.unit[i])).collect()
    }
}

/// Solves `min c·x` over the rows and finite variable bounds.
pub fn simplex_solve(lp: &LinearProgram) -> LpSolution {
    let n = lp.n_cols();
    if lp.bounds.is_empty() {
        return LpSolution::failed(LpStatus::Infeasible, 0);
    }
    if lp.bounds.iter().any(|b| !b.is_bounded()) || lp.c.iter().any(|c| !c.is_finite()) {
        return LpSolution::failed(LpStatus::NumericalFailure, 0);
    }
    let lower: Vec<f64> = lp.bounds.iter().map(|b| b.lo()).collect();
    let k = lp.rows.len();

    // Shifted rows x = l + x', x' >= 0, then one bound row per column.
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::with_capacity(k + n);
    for r in &lp.rows {
        if r.a.iter().any(|a| !a.is_finite()) || !r.rhs.is_finite() {
            return LpSolution::failed(LpStatus::NumericalFailure, 0);
        }
        let shift: f64 = r.a.iter().zip(&lower).map(|(a, l)| a * l).sum();
        rows.push((r.a.clone(), r.rel, r.rhs - shift));
    }
    for (j, b) in lp.bounds.iter().enumerate() {
        let mut a = vec![0.0; n];
        a[j] = 1.0;
        rows.push((a, Relation::Le, b.hi() - b.lo()));
    }
    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 == Relation::Le).count();
    let n_art = rows.iter().filter(|r| r.1 == Relation::Eq || r.2 < 0.0).count();
    let first_slack = n;
    let first_art = n + n_slack;
    let ncols = first_art + n_art;
    let width = ncols + 1;
    let mut tab = Tableau {
        width,
        t: vec![0.0; (m + 1) * width],
        m,
        basis: vec![0; m],
        unit: vec![0; m],
        first_art,
    };
    let mut sigma = vec![1.0; m];
    let (mut s, mut a_idx) = (first_slack, first_art);
    for (i, (a, rel, rhs)) in rows.iter().enumerate() {
        let flip = *rhs < 0.0;
        let sg = if flip { -1.0 } else { 1.0 };
        sigma[i] = sg;
        for j in 0..n {
            tab.t[i * width + j] = sg * a[j];
        }
        tab.t[i * width + ncols] = sg * rhs;
        if *rel == Relation::Le {
            tab.t[i * width + s] = sg;
            if !flip {
                tab.basis[i] = s;
                tab.unit[i] = s;
            }
            s += 1;
        }
        if *rel == Relation::Eq || flip {
            tab.t[i * width + a_idx] = 1.0;
            tab.basis[i] = a_idx;
            tab.unit[i] = a_idx;
            a_idx += 1;
        }
    }

    let cap = 10 * (m + ncols) * (m + ncols);
    let mut iters = 0;

    let mut phase1 = vec![0.0; ncols];
    for c in phase1.iter_mut().skip(first_art) {
        *c = 1.0;
    }
    if n_art > 0 {
        tab.set_objective(&phase1);
        match tab.run(ncols, &mut iters, cap) {
            LpStatus::Optimal => {}
            _ => return LpSolution::failed(LpStatus::NumericalFailure, iters),
        }
        let infeas = -tab.rhs(m);
        let scale = 1.0 + rows.iter().map(|r| r.2.abs()).fold(0.0, f64::max);
        if infeas > 1e-9 * scale {
            let y = tab.row_duals(&phase1);
            let farkas = (0..k).map(|i| -sigma[i] * y[i]).collect();
            let mut sol = LpSolution::failed(LpStatus::Infeasible, iters);
            sol.farkas = Some(farkas);
            return sol;
        }
        // Drive zero-level artificials out of the basis where possible.
        for i in 0..m {
            if tab.basis[i] >= first_art {
                if let Some(q) = (0..first_art).find(|&j| tab.at(i, j).abs() > PIVOT_TOL) {
                    tab.pivot(i, q);
                }
            }
        }
    }

    let mut phase2 = vec![0.0; ncols];
    phase2[..n].copy_from_slice(&lp.c);
    tab.set_objective(&phase2);
    match tab.run(tab.first_art, &mut iters, cap) {
        LpStatus::Optimal => {}
        other => return LpSolution::failed(other, iters),
    }
    let mut primal = lower.clone();
    for i in 0..m {
        let b = tab.basis[i];
        if b < n {
            primal[b] = lower[b] + tab.rhs(i);
        }
    }
    for (x, b) in primal.iter_mut().zip(lp.bounds.iter()) {
        *x = x.clamp(b.lo(), b.hi());
    }
    let y = tab.row_duals(&phase2);
    let duals = (0..k).map(|i| -sigma[i] * y[i]).collect();
    let objective_value = lp.c.iter().zip(&primal).map(|(c, x)| c * x).sum();
    LpSolution { status: LpStatus::Optimal, primal, duals, farkas: None, objective_value, iterations: iters }
}

/// Checks the sign conditions and clips rounding-level violations; `None` if
/// a `<=` multiplier is significantly negative or any entry is not finite.
fn usable_multipliers(lp: &LinearProgram, mu: &[f64]) -> Option<Vec<f64>> {
    if mu.len() != lp.rows.len() || mu.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let scale = 1.0 + mu.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut out = mu.to_vec();
    for (v, r) in out.iter_mut().zip(&lp.rows) {
        if r.rel == Relation::Le && *v < 0.0 {
            if *v < -DUAL_SIGN_TOL * scale {
                return None;
            }
            *v = 0.0;
        }
    }
    Some(out)
}

/// Encloses `w·x + k` over the bounds where `w = base + Aᵀμ`, `k = -μ·b`.
fn lagrangian_range(lp: &LinearProgram, base: &[f64], mu: &[f64]) -> Interval {
    let n = lp.n_cols();
    let mut w: Vec<Interval> = base.iter().map(|c| Interval::point(*c)).collect();
    let mut k = Interval::ZERO;
    for (r, &m) in lp.rows.iter().zip(mu) {
        if m == 0.0 {
            continue;
        }
        let mi = Interval::point(m);
        for j in 0..n {
            if r.a[j] != 0.0 {
                w[j] = w[j] + mi * Interval::point(r.a[j]);
            }
        }
        k = k - mi * Interval::point(r.rhs);
    }
    w.iter().zip(lp.bounds.iter()).fold(k, |acc, (wj, bj)| acc + *wj * *bj)
}

/// A lower bound on the LP minimum (hence on anything the LP relaxes) that
/// is valid for any multipliers, computed as the infimum of the Lagrangian
/// over the variable bounds. Returns `-inf` for wrong-signed multipliers.
pub fn safe_lower_bound(lp: &LinearProgram, duals: &[f64]) -> f64 {
    if lp.bounds.is_empty() {
        return f64::INFINITY;
    }
    let Some(mu) = usable_multipliers(lp, duals) else {
        return f64::NEG_INFINITY;
    };
    let r = lagrangian_range(lp, &lp.c, &mu);
    if r.is_empty() {
        f64::NEG_INFINITY
    } else {
        r.lo()
    }
}

/// True when `μ·(Ax - b) > 0` over the whole bound box, which no feasible
/// point can satisfy.
pub fn certifies_infeasible(lp: &LinearProgram, farkas: &[f64]) -> bool {
    if lp.bounds.is_empty() {
        return true;
    }
    let Some(mu) = usable_multipliers(lp, farkas) else {
        return false;
    };
    let zero = vec![0.0; lp.n_cols()];
    let r = lagrangian_range(lp, &zero, &mu);
    !r.is_empty() && r.lo() > 0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::IntervalBox;
    use crate::relaxation::Row;

    fn le(a: &[f64], rhs: f64) -> Row {
        Row { a: a.to_vec(), rel: Relation::Le, rhs }
    }

    #[test]
    fn single_lower_bound_row() {
        let lp = LinearProgram::new(vec![1.0], vec![le(&[-1.0], -1.0)], IntervalBox::from_bounds(&[(0.0, 10.0)]));
        let sol = simplex_solve(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.primal, vec![1.0]);
        assert_eq!(sol.duals, vec![1.0]);
        let lb = safe_lower_bound(&lp, &sol.duals);
        assert!(lb <= 1.0 && lb >= 1.0 - 1e-12);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        // x <= 2 and x >= 3
        let lp = LinearProgram::new(
            vec![-1.0],
            vec![le(&[1.0], 2.0), le(&[-1.0], -3.0)],
            IntervalBox::from_bounds(&[(0.0, 10.0)]),
        );
        let sol = simplex_solve(&lp);
        assert_eq!(sol.status, LpStatus::Infeasible);
        assert!(certifies_infeasible(&lp, sol.farkas.as_ref().unwrap()));
    }

    #[test]
    fn degenerate_optimum() {
        let lp = LinearProgram::new(
            vec![1.0, 1.0],
            vec![le(&[-1.0, -1.0], -1.0)],
            IntervalBox::from_bounds(&[(0.0, 1.0), (0.0, 1.0)]),
        );
        let sol = simplex_solve(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective_value - 1.0).abs() < 1e-12);
        let lb = safe_lower_bound(&lp, &sol.duals);
        assert!(lb <= 1.0 && lb > 1.0 - 1e-9);
    }

    #[test]
    fn equality_rows_and_negative_bounds() {
        // min x - y, x + y = 1, x in [-2,2], y in [-3,0.5]
        let lp = LinearProgram::new(
            vec![1.0, -1.0],
            vec![Row { a: vec![1.0, 1.0], rel: Relation::Eq, rhs: 1.0 }],
            IntervalBox::from_bounds(&[(-2.0, 2.0), (-3.0, 0.5)]),
        );
        let sol = simplex_solve(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.primal, vec![0.5, 0.5]);
        let lb = safe_lower_bound(&lp, &sol.duals);
        assert!(lb <= 0.0 && lb > -1e-9);
    }

    #[test]
    fn zero_duals_reduce_to_box_bound() {
        let lp = LinearProgram::new(
            vec![1.0, -2.0],
            vec![le(&[1.0, 1.0], 5.0)],
            IntervalBox::from_bounds(&[(0.0, 1.0), (-1.0, 1.0)]),
        );
        assert_eq!(safe_lower_bound(&lp, &[0.0]), -2.0);
        assert_eq!(safe_lower_bound(&lp, &[-1.0]), f64::NEG_INFINITY);
    }

    #[test]
    fn bogus_farkas_is_rejected() {
        let lp = LinearProgram::new(vec![1.0], vec![le(&[1.0], 2.0)], IntervalBox::from_bounds(&[(0.0, 10.0)]));
        assert!(!certifies_infeasible(&lp, &[1.0]));
        assert!(!certifies_infeasible(&lp, &[-1.0]));
    }

    #[test]
    fn deterministic() {
        let lp = LinearProgram::new(
            vec![1.0, 2.0, -1.0],
            vec![le(&[1.0, 1.0, 1.0], 4.0), le(&[-1.0, 2.0, 0.5], 1.0), Row { a: vec![1.0, -1.0, 0.0], rel: Relation::Eq, rhs: 0.25 }],
            IntervalBox::from_bounds(&[(-1.0, 3.0), (-2.0, 2.0), (0.0, 5.0)]),
        );
        let a = simplex_solve(&lp);
        let b = simplex_solve(&lp);
        assert_eq!(a, b);
        assert_eq!(a.status, LpStatus::Optimal);
        assert!(lp.max_row_violation(&a.primal) <= 1e-7);
        let lb = safe_lower_bound(&lp, &a.duals);
        assert!(lb <= a.objective_value && lb > a.objective_value - 1e-9);
    }
}
