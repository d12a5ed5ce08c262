//! Newton correction for under-determined systems: inequalities near
//! activity become equalities `h_j(x) + s_j² = 0`, and the augmented system is
//! driven to zero by minimum-norm (Moore–Penrose) steps.

use nalgebra::{DMatrix, DVector};

use crate::expr::{eval_point, jacobian_point, Expr, Problem};
use crate::interval::IntervalBox;

#[derive(Clone, Debug, PartialEq)]
pub struct AugmentedSystem {
    /// Equalities first, then one `h_j + s_j²` per active inequality, over
    /// `base_n + active_set.len()` variables (slacks after the originals).
    pub equations: Vec<Expr>,
    /// Indices into the problem's inequalities.
    pub active_set: Vec<usize>,
    pub base_n: usize,
}

impl AugmentedSystem {
    pub fn n_vars(&self) -> usize {
        self.base_n + self.active_set.len()
    }

    pub fn residual(&self, v: &[f64]) -> Option<Vec<f64>> {
        self.equations.iter().map(|e| eval_point(e, v).ok()).collect()
    }
}

/// Activity threshold used when none is given: `0.1·(1 + max_j |h_j(x0)|)`.
pub fn default_active_threshold(p: &Problem, x0: &[f64]) -> f64 {
    let scale = p
        .inequalities()
        .iter()
        .filter_map(|h| eval_point(h, x0).ok())
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    0.1 * (1.0 + scale)
}

/// Activates inequalities with `h_j(x0) > -delta` (or undefined at `x0`) and
/// returns the augmented system with the augmented starting point.
pub fn slack_augment(p: &Problem, x0: &[f64], delta: f64) -> (AugmentedSystem, Vec<f64>) {
    let n = p.n();
    let mut equations: Vec<Expr> = p.equalities().to_vec();
    let mut active_set = Vec::new();
    let mut slacks = Vec::new();
    for (j, h) in p.inequalities().iter().enumerate() {
        let v = eval_point(h, x0).unwrap_or(0.0);
        if v > -delta {
            let s = Expr::var(n + active_set.len());
            equations.push(h.clone() + s.sqr());
            slacks.push((-v).max(0.0).sqrt());
            active_set.push(j);
        }
    }
    let mut point = x0.to_vec();
    point.extend(slacks);
    (AugmentedSystem { equations, active_set, base_n: n }, point)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum StepError {
    #[error("Jacobian is rank deficient")]
    RankDeficient,
    #[error("more equations than unknowns")]
    Overdetermined,
}

/// Minimum-norm solution `Δ` of `JΔ = residual`, through a QR factorization
/// of `Jᵀ`: with `Jᵀ = QR`, `Rᵀy = residual` and `Δ = Qy`.
pub fn moore_penrose_step(residual: &[f64], j: &DMatrix<f64>) -> Result<Vec<f64>, StepError> {
    let (m, n) = j.shape();
    assert_eq!(residual.len(), m, "residual length must match the Jacobian rows");
    if m == 0 {
        return Ok(vec![0.0; n]);
    }
    if m > n {
        return Err(StepError::Overdetermined);
    }
    let qr = j.transpose().qr();
    let r = qr.r();
    let rmax = r.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if rmax == 0.0 || (0..m).any(|i| r[(i, i)].abs() < 1e-12 * rmax) {
        return Err(StepError::RankDeficient);
    }
    let rhs = DVector::from_column_slice(residual);
    let y = r.transpose().solve_lower_triangular(&rhs).ok_or(StepError::RankDeficient)?;
    Ok((qr.q() * y).iter().copied().collect())
}

/// Same step through the normal equations `Jᵀ(JJᵀ)⁻¹ residual`.
pub fn normal_equations_step(residual: &[f64], j: &DMatrix<f64>) -> Result<Vec<f64>, StepError> {
    let (m, n) = j.shape();
    if m == 0 {
        return Ok(vec![0.0; n]);
    }
    if m > n {
        return Err(StepError::Overdetermined);
    }
    let jjt = j * j.transpose();
    let chol = jjt.cholesky().ok_or(StepError::RankDeficient)?;
    let w = chol.solve(&DVector::from_column_slice(residual));
    Ok((j.transpose() * w).iter().copied().collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrectionConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// Halvings of a step that fails to reduce the residual before giving up.
    pub max_halvings: usize,
    /// Activity threshold; `None` uses [`default_active_threshold`].
    pub active_threshold: Option<f64>,
}

impl Default for CorrectionConfig {
    fn default() -> Self {
        CorrectionConfig { tol: 1e-10, max_iter: 50, max_halvings: 8, active_threshold: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectionFailure {
    MaxIterations,
    Diverged,
    RankDeficient,
    DomainFailure,
    /// Converged on the augmented system but an inequality left out of it is
    /// violated at the result.
    InactiveViolated,
    OutsideBox,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrectionResult {
    pub point: Vec<f64>,
    /// Constraint violation of the problem at `point`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub failure: Option<CorrectionFailure>,
    /// Augmented-system residual (∞-norm) before each step and at the end.
    pub history: Vec<f64>,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Moves `x0` (clamped into `b`) onto the constraint manifold.
pub fn feasibility_correction(p: &Problem, x0: &[f64], b: &IntervalBox, cfg: &CorrectionConfig) -> CorrectionResult {
    let n = p.n();
    let start = b.clamp_point(x0);
    let fail = |point: Vec<f64>, iterations, failure, history| CorrectionResult {
        residual: p.constraint_violation(&point),
        point,
        iterations,
        converged: false,
        failure: Some(failure),
        history,
    };
    let r0 = p.constraint_violation(&start);
    if r0 <= cfg.tol {
        return CorrectionResult {
            point: start,
            residual: r0,
            iterations: 0,
            converged: true,
            failure: None,
            history: vec![r0],
        };
    }
    let delta = cfg.active_threshold.unwrap_or_else(|| default_active_threshold(p, &start));
    let (sys, mut v) = slack_augment(p, &start, delta);
    let Some(mut res) = sys.residual(&v) else {
        return fail(start, 0, CorrectionFailure::DomainFailure, vec![]);
    };
    let mut norm = inf_norm(&res);
    let mut history = vec![norm];
    let mut iters = 0;
    while norm > cfg.tol {
        if iters == cfg.max_iter {
            return fail(v[..n].to_vec(), iters, CorrectionFailure::MaxIterations, history);
        }
        let Ok(jac) = jacobian_point(&sys.equations, &v) else {
            return fail(v[..n].to_vec(), iters, CorrectionFailure::DomainFailure, history);
        };
        let delta_v = match moore_penrose_step(&res, &jac) {
            Ok(d) => d,
            Err(_) => return fail(v[..n].to_vec(), iters, CorrectionFailure::RankDeficient, history),
        };
        iters += 1;
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=cfg.max_halvings {
            let trial: Vec<f64> = v.iter().zip(&delta_v).map(|(a, d)| a - alpha * d).collect();
            if let Some(r) = sys.residual(&trial) {
                let tn = inf_norm(&r);
                if tn < norm {
                    accepted = Some((trial, r, tn));
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some((trial, r, tn)) = accepted else {
            return fail(v[..n].to_vec(), iters, CorrectionFailure::Diverged, history);
        };
        v = trial;
        res = r;
        norm = tn;
        history.push(norm);
    }
    let x = v[..n].to_vec();
    for (j, h) in p.inequalities().iter().enumerate() {
        if !sys.active_set.contains(&j) && eval_point(h, &x).map_or(true, |hv| hv > cfg.tol) {
            return fail(x, iters, CorrectionFailure::InactiveViolated, history);
        }
    }
    if !b.contains_point(&x) {
        let clamped = b.clamp_point(&x);
        if p.constraint_violation(&clamped) > cfg.tol {
            return fail(clamped, iters, CorrectionFailure::OutsideBox, history);
        }
        let residual = p.constraint_violation(&clamped);
        return CorrectionResult { point: clamped, residual, iterations: iters, converged: true, failure: None, history };
    }
    let residual = p.constraint_violation(&x);
    CorrectionResult {
        converged: residual <= cfg.tol,
        failure: (residual > cfg.tol).then_some(CorrectionFailure::MaxIterations),
        point: x,
        residual,
        iterations: iters,
        history,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_problem;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn activation_rule() {
        let p = parse_problem("var x in [-2,2]; min x; subject x - 1 <= 0;").unwrap();
        let (sys, pt) = slack_augment(&p, &[0.5], 0.6);
        assert_eq!(sys.active_set, vec![0]);
        assert!((pt[1] - 0.5_f64.sqrt()).abs() < 1e-15);
        let (sys, pt) = slack_augment(&p, &[0.0], 0.5);
        assert!(sys.active_set.is_empty() && sys.equations.is_empty());
        assert_eq!(pt, vec![0.0]);
    }

    #[test]
    fn step_examples() {
        let j = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        assert!(close(&moore_penrose_step(&[2.0], &j).unwrap(), &[1.0, 1.0], 1e-15));
        let id = DMatrix::<f64>::identity(2, 2);
        assert!(close(&moore_penrose_step(&[0.3, -4.0], &id).unwrap(), &[0.3, -4.0], 1e-15));
        // circle at (1.1, 0.9): Δ = Jᵀ·1.02/(2.2² + 1.8²)
        let j = DMatrix::from_row_slice(1, 2, &[2.2, 1.8]);
        let d = moore_penrose_step(&[1.02], &j).unwrap();
        let s = 1.02 / (2.2 * 2.2 + 1.8 * 1.8);
        assert!(close(&d, &[2.2 * s, 1.8 * s], 1e-15));
        let d2 = normal_equations_step(&[1.02], &j).unwrap();
        assert!(close(&d, &d2, 1e-15));
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let j = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        assert_eq!(moore_penrose_step(&[1.0, 1.0], &j), Err(StepError::RankDeficient));
        let j = DMatrix::from_row_slice(2, 1, &[1.0, 2.0]);
        assert_eq!(moore_penrose_step(&[1.0, 1.0], &j), Err(StepError::Overdetermined));
    }

    #[test]
    fn circle_correction_converges_on_the_ray() {
        let p = parse_problem("var x in [-2,2]; var y in [-2,2]; min x + y; subject x^2 + y^2 - 1 = 0;").unwrap();
        let res = feasibility_correction(&p, &[1.1, 0.9], p.domain(), &CorrectionConfig::default());
        assert!(res.converged, "{res:?}");
        assert!(res.iterations <= 5);
        assert!(res.residual <= 1e-10);
        assert!(close(&res.point, &[0.7739573, 0.63323779], 1e-7));
    }

    #[test]
    fn feasible_seed_is_returned_unchanged() {
        let p = parse_problem("var x in [-2,2]; var y in [-2,2]; min x; subject x + y = 0;").unwrap();
        let res = feasibility_correction(&p, &[0.25, -0.25], p.domain(), &CorrectionConfig::default());
        assert!(res.converged);
        assert_eq!(res.iterations, 0);
        assert_eq!(res.point, vec![0.25, -0.25]);
    }

    #[test]
    fn no_real_solution_fails() {
        let p = parse_problem("var x in [-2,2]; min x; subject x^2 + 1 = 0;").unwrap();
        let res = feasibility_correction(&p, &[0.0], p.domain(), &CorrectionConfig::default());
        assert!(!res.converged);
        let res = feasibility_correction(&p, &[0.7], p.domain(), &CorrectionConfig::default());
        assert!(!res.converged);
    }

    #[test]
    fn active_inequality_is_pulled_to_the_boundary() {
        // start violating x^2 + y^2 <= 1
        let p = parse_problem("var x in [-2,2]; var y in [-2,2]; min x + y; subject x^2 + y^2 - 1 <= 0;").unwrap();
        let res = feasibility_correction(&p, &[1.0, 1.0], p.domain(), &CorrectionConfig::default());
        assert!(res.converged, "{res:?}");
        assert!(res.residual <= 1e-10);
    }
}
