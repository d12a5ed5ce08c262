//! Computer-assisted existence proofs for feasible points.
//!
//! Around a (nearly) feasible point the slack-augmented equality system is
//! reduced to a square one by fixing some variables at their current values.
//! A Krawczyk test on a growing box around the point then certifies that the
//! square system has a zero there, which projects to a feasible point of the
//! original problem.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::expr::{eval_interval, jacobian_interval, jacobian_point, Expr, Problem};
use crate::feasibility::{default_active_threshold, slack_augment, AugmentedSystem};
use crate::interval::{Interval, IntervalBox};

/// Krawczyk operator `K = c - Y F(c) + (I - Y J(b))(b - c)`, with `Y` the
/// inverse of the midpoint of the interval Jacobian `J(b)`. Every zero of
/// `eqs` in `b` lies in `K`. `None` when `K` cannot be formed.
pub fn krawczyk_image(eqs: &[Expr], b: &IntervalBox, center: &[f64]) -> Option<IntervalBox> {
    let m = eqs.len();
    assert_eq!(b.len(), m, "Krawczyk needs a square system");
    assert_eq!(center.len(), m);
    if b.is_empty() || b.iter().any(|c| !c.is_bounded()) || !b.contains_point(center) {
        return None;
    }
    let cbox = IntervalBox::from_point(center);
    let fc: Vec<Interval> = eqs.iter().map(|e| eval_interval(e, &cbox)).collect();
    if fc.iter().any(|v| v.is_empty() || !v.is_bounded()) {
        return None;
    }
    let jb = jacobian_interval(eqs, b);
    if jb.iter().flatten().any(|v| v.is_empty() || !v.is_bounded()) {
        return None;
    }
    let mid = DMatrix::from_fn(m, m, |i, j| jb[i][j].mid());
    let y = mid.try_inverse()?;
    if y.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let yi = |i: usize, k: usize| Interval::point(y[(i, k)]);
    let mut k = Vec::with_capacity(m);
    for i in 0..m {
        let mut acc = Interval::point(center[i]);
        for (kk, f) in fc.iter().enumerate() {
            acc = acc - yi(i, kk) * *f;
        }
        for j in 0..m {
            let mut coef = if i == j { Interval::ONE } else { Interval::ZERO };
            for (kk, row) in jb.iter().enumerate() {
                coef = coef - yi(i, kk) * row[j];
            }
            acc = acc + coef * (b[j] - Interval::point(center[j]));
        }
        if acc.is_empty() {
            return None;
        }
        k.push(acc);
    }
    Some(IntervalBox::new(k))
}

/// Returns the Krawczyk image when it lies in the interior of `b`, which
/// proves a zero of `eqs` in `b`.
pub fn krawczyk_existence(eqs: &[Expr], b: &IntervalBox, center: &[f64]) -> Option<IntervalBox> {
    let k = krawczyk_image(eqs, b, center)?;
    k.iter().zip(b.iter()).all(|(ki, bi)| ki.is_interior_subset(bi)).then_some(k)
}

/// Shrinks a box known to hold a zero by iterating `X ← K(X) ∩ X` around the
/// midpoint until an iteration removes less than a tenth of the width.
pub fn krawczyk_tighten(eqs: &[Expr], b: &IntervalBox, max_iter: usize) -> IntervalBox {
    let mut x = b.clone();
    for _ in 0..max_iter {
        let Some(k) = krawczyk_image(eqs, &x, &x.midpoint()) else { break };
        let next = k.intersect(&x);
        if next.is_empty() {
            break;
        }
        let shrunk = next.width() <= 0.9 * x.width();
        x = next;
        if !shrunk {
            break;
        }
    }
    x
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProofConfig {
    pub min_radius: f64,
    pub growth: f64,
    pub rounds: usize,
}

impl Default for ProofConfig {
    fn default() -> Self {
        ProofConfig { min_radius: 1e-8, growth: 4.0, rounds: 12 }
    }
}

/// Everything needed to re-run the existence test: the augmented system is
/// rebuilt from the problem and `active_inequalities`, restricted to
/// `unknowns`, and tested on `unknown_box` around `center`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub active_inequalities: Vec<usize>,
    /// Augmented-space indices (slacks follow the problem variables).
    pub unknowns: Vec<usize>,
    /// Augmented-space `(index, value)` pairs held fixed.
    pub fixed: Vec<(usize, f64)>,
    pub center: Vec<f64>,
    pub radii_tried: Vec<f64>,
    pub unknown_box: Vec<[f64; 2]>,
    /// The Krawczyk image, which holds the zero.
    pub existence_box: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProvenBox {
    /// Box in the problem variables holding a feasible point.
    pub bx: IntervalBox,
    pub objective_range: Interval,
    pub witness_seed: Vec<f64>,
    pub certificate: Certificate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProofFailure {
    #[error("more equations than variables")]
    Overdetermined,
    #[error("no invertible square subsystem at the seed")]
    SelectionFailed,
    #[error("constraint undefined at the seed")]
    DomainFailure,
    #[error("existence test failed at every inflation radius")]
    NotProven,
    #[error("an inactive inequality could not be verified over the box")]
    InactiveUnverified,
}

fn to_pairs(b: &IntervalBox) -> Vec<[f64; 2]> {
    b.iter().map(|c| [c.lo(), c.hi()]).collect()
}

fn from_pairs(p: &[[f64; 2]]) -> Option<IntervalBox> {
    p.iter().map(|[a, b]| Interval::try_new(*a, *b)).collect::<Option<Vec<_>>>().map(IntervalBox::new)
}

/// Greedy column selection (Gram–Schmidt with column pivoting): repeatedly
/// takes the column with the largest component orthogonal to those already
/// chosen.
fn select_columns(j: &DMatrix<f64>) -> Option<Vec<usize>> {
    let (m, n) = j.shape();
    let mut cols: Vec<Vec<f64>> = (0..n).map(|c| j.column(c).iter().copied().collect()).collect();
    let scale = cols.iter().map(|c| norm(c)).fold(0.0, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    let mut chosen = Vec::with_capacity(m);
    for _ in 0..m {
        let (best, bn) = (0..n)
            .filter(|c| !chosen.contains(c))
            .map(|c| (c, norm(&cols[c])))
            .fold((usize::MAX, -1.0), |acc, (c, v)| if v > acc.1 { (c, v) } else { acc });
        if best == usize::MAX || bn <= 1e-10 * scale {
            return None;
        }
        let q: Vec<f64> = cols[best].iter().map(|v| v / bn).collect();
        for c in 0..n {
            if chosen.contains(&c) || c == best {
                continue;
            }
            let d: f64 = cols[c].iter().zip(&q).map(|(a, b)| a * b).sum();
            for (a, b) in cols[c].iter_mut().zip(&q) {
                *a -= d * b;
            }
        }
        chosen.push(best);
    }
    chosen.sort_unstable();
    Some(chosen)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `sys` with every variable not in `unknowns` replaced by its fixed value and
/// the unknowns renumbered `0..`.
fn square_subsystem(sys: &AugmentedSystem, unknowns: &[usize], fixed: &[(usize, f64)]) -> Vec<Expr> {
    let map = |i: usize| match unknowns.iter().position(|&u| u == i) {
        Some(k) => Ok(k),
        None => Err(fixed.iter().find(|(f, _)| *f == i).map(|(_, v)| *v).unwrap_or(0.0)),
    };
    sys.equations.iter().map(|e| e.substitute(map)).collect()
}

fn rebuild_system(p: &Problem, active: &[usize]) -> AugmentedSystem {
    let n = p.n();
    let mut equations: Vec<Expr> = p.equalities().to_vec();
    for (k, &j) in active.iter().enumerate() {
        equations.push(p.inequalities()[j].clone() + Expr::var(n + k).sqr());
    }
    AugmentedSystem { equations, active_set: active.to_vec(), base_n: n }
}

/// Problem-variable box from the existence box and fixed values, cut to the
/// node box (possibly empty).
fn assemble(n: usize, cert_unknowns: &[usize], k: &IntervalBox, fixed: &[(usize, f64)], node: &IntervalBox) -> IntervalBox {
    let comps = (0..n)
        .map(|i| {
            if let Some(pos) = cert_unknowns.iter().position(|&u| u == i) {
                k[pos]
            } else {
                let v = fixed.iter().find(|(f, _)| *f == i).map(|(_, v)| *v).unwrap_or(f64::NAN);
                Interval::new(v.next_down(), v.next_up())
            }
        })
        .collect();
    IntervalBox::new(comps).intersect(node)
}

fn inactive_hold(p: &Problem, active: &[usize], bx: &IntervalBox) -> bool {
    p.inequalities()
        .iter()
        .enumerate()
        .filter(|(j, _)| !active.contains(j))
        .all(|(_, h)| {
            let r = eval_interval(h, bx);
            !r.is_empty() && r.hi() <= 0.0
        })
}

/// Inflates a box around `x_corr` until the existence test succeeds.
pub fn inflate_and_prove(
    p: &Problem,
    x_corr: &[f64],
    node_box: &IntervalBox,
    cfg: &ProofConfig,
) -> Result<ProvenBox, ProofFailure> {
    let n = p.n();
    let x = node_box.clamp_point(x_corr);
    let delta = default_active_threshold(p, &x);
    let (sys, v) = slack_augment(p, &x, delta);
    let m = sys.equations.len();
    let nt = sys.n_vars();
    if m > nt {
        return Err(ProofFailure::Overdetermined);
    }
    let residual = sys.residual(&v).ok_or(ProofFailure::DomainFailure)?;
    let res_norm = residual.iter().fold(0.0_f64, |a, r| a.max(r.abs()));
    if m == 0 {
        let bx = IntervalBox::new(x.iter().map(|v| Interval::new(v.next_down(), v.next_up())).collect())
            .intersect(node_box);
        if bx.is_empty() || !inactive_hold(p, &sys.active_set, &bx) {
            return Err(ProofFailure::InactiveUnverified);
        }
        let fixed = x.iter().copied().enumerate().collect();
        let certificate = Certificate {
            active_inequalities: vec![],
            unknowns: vec![],
            fixed,
            center: vec![],
            radii_tried: vec![],
            unknown_box: vec![],
            existence_box: vec![],
        };
        let objective_range = eval_interval(p.objective(), &bx);
        return Ok(ProvenBox { bx, objective_range, witness_seed: x, certificate });
    }
    let jac = jacobian_point(&sys.equations, &v).map_err(|_| ProofFailure::DomainFailure)?;
    let unknowns = select_columns(&jac).ok_or(ProofFailure::SelectionFailed)?;
    let fixed: Vec<(usize, f64)> = (0..nt).filter(|i| !unknowns.contains(i)).map(|i| (i, v[i])).collect();
    let eqs = square_subsystem(&sys, &unknowns, &fixed);
    let center: Vec<f64> = unknowns.iter().map(|&i| v[i]).collect();

    let mut r = cfg.min_radius.max(10.0 * res_norm);
    let mut radii = Vec::with_capacity(cfg.rounds);
    for _ in 0..cfg.rounds {
        radii.push(r);
        let ub = IntervalBox::new(
            unknowns
                .iter()
                .zip(&center)
                .map(|(&i, &c)| {
                    let w = Interval::new(c - r, c + r);
                    if i < n {
                        w.intersect(&node_box[i])
                    } else {
                        w
                    }
                })
                .collect(),
        );
        if let Some(k) = krawczyk_existence(&eqs, &ub, &center) {
            let tight = krawczyk_tighten(&eqs, &k, 50);
            let bx = assemble(n, &unknowns, &tight, &fixed, node_box);
            if bx.is_empty() || !inactive_hold(p, &sys.active_set, &bx) {
                return Err(ProofFailure::InactiveUnverified);
            }
            let certificate = Certificate {
                active_inequalities: sys.active_set.clone(),
                unknowns: unknowns.clone(),
                fixed: fixed.clone(),
                center: center.clone(),
                radii_tried: radii,
                unknown_box: to_pairs(&ub),
                existence_box: to_pairs(&k),
            };
            let objective_range = eval_interval(p.objective(), &bx);
            return Ok(ProvenBox { bx, objective_range, witness_seed: x, certificate });
        }
        r *= cfg.growth;
    }
    Err(ProofFailure::NotProven)
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error("certificate is malformed: {0}")]
    Malformed(&'static str),
    #[error("existence test does not succeed on the stored box")]
    NotProven,
    #[error("the certified point may lie outside the problem domain")]
    OutsideDomain,
    #[error("an inactive inequality does not hold over the proven box")]
    InactiveUnverified,
}

/// Re-runs the existence test recorded in `cert` against `p` and returns the
/// problem-variable box it proves, cut to the domain.
pub fn replay(p: &Problem, cert: &Certificate) -> Result<IntervalBox, ReplayError> {
    let n = p.n();
    if cert.active_inequalities.iter().any(|&j| j >= p.inequalities().len()) {
        return Err(ReplayError::Malformed("unknown inequality index"));
    }
    let sys = rebuild_system(p, &cert.active_inequalities);
    let nt = sys.n_vars();
    let m = sys.equations.len();
    if cert.unknowns.len() != m || cert.unknowns.len() + cert.fixed.len() != nt || cert.center.len() != m {
        return Err(ReplayError::Malformed("dimensions do not match the system"));
    }
    let covered = (0..nt).all(|i| cert.unknowns.contains(&i) != cert.fixed.iter().any(|(f, _)| *f == i));
    if !covered || cert.fixed.iter().any(|(_, v)| !v.is_finite()) || cert.center.iter().any(|v| !v.is_finite()) {
        return Err(ReplayError::Malformed("unknowns and fixed values do not partition the variables"));
    }
    let domain = p.domain();
    if cert.fixed.iter().any(|&(i, v)| i < n && !domain[i].contains(v)) {
        return Err(ReplayError::OutsideDomain);
    }
    let bx = if m == 0 {
        assemble(n, &[], &IntervalBox::new(vec![]), &cert.fixed, domain)
    } else {
        let ub = from_pairs(&cert.unknown_box).ok_or(ReplayError::Malformed("bad unknown box"))?;
        if ub.len() != m {
            return Err(ReplayError::Malformed("unknown box has the wrong length"));
        }
        let eqs = square_subsystem(&sys, &cert.unknowns, &cert.fixed);
        let k = krawczyk_existence(&eqs, &ub, &cert.center).ok_or(ReplayError::NotProven)?;
        if cert.unknowns.iter().zip(k.iter()).any(|(&i, ki)| i < n && !ki.is_subset(&domain[i])) {
            return Err(ReplayError::OutsideDomain);
        }
        assemble(n, &cert.unknowns, &k, &cert.fixed, domain)
    };
    if bx.is_empty() || !inactive_hold(p, &cert.active_inequalities, &bx) {
        return Err(ReplayError::InactiveUnverified);
    }
    Ok(bx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_problem;

    #[test]
    fn one_dimensional_examples() {
        let g = [Expr::var(0).sqr() - 1.0];
        let k = krawczyk_existence(&g, &IntervalBox::from_bounds(&[(0.9, 1.1)]), &[1.0]).unwrap();
        assert!(k[0].lo() >= 0.97 && k[0].hi() <= 1.03);
        let g = [Expr::var(0).sqr() + 1.0];
        assert!(krawczyk_existence(&g, &IntervalBox::from_bounds(&[(-1.0, 1.0)]), &[0.0]).is_none());
        let g = [Expr::var(0) - 3.0];
        let k = krawczyk_existence(&g, &IntervalBox::from_bounds(&[(2.0, 4.0)]), &[3.0]).unwrap();
        assert_eq!(k[0], Interval::point(3.0));
    }

    #[test]
    fn circle_point_is_proven() {
        let p = parse_problem("var x in [-2,2]; var y in [-2,2]; min x + y; subject x^2 + y^2 - 1 = 0;").unwrap();
        let pb = inflate_and_prove(&p, &[0.7739573, 0.63323779], p.domain(), &ProofConfig::default()).unwrap();
        assert!(pb.objective_range.contains(1.4071950894605838) || pb.objective_range.width() < 1e-5);
        assert!((pb.objective_range.mid() - 1.40719509).abs() < 1e-6);
        assert!(pb.bx.is_subset(p.domain()));
        let again = replay(&p, &pb.certificate).unwrap();
        assert!(pb.bx.is_subset(&again));
    }

    #[test]
    fn linear_constraint_first_round() {
        let p = parse_problem("var x in [-2,2]; min x; subject x - 1 = 0;").unwrap();
        let pb = inflate_and_prove(&p, &[1.0], p.domain(), &ProofConfig::default()).unwrap();
        assert_eq!(pb.certificate.radii_tried.len(), 1);
        assert!(pb.bx[0].contains(1.0));
    }

    #[test]
    fn infeasible_system_is_never_proven() {
        let p = parse_problem("var x in [-2,2]; min x; subject x^2 + 1 = 0;").unwrap();
        for seed in [-1.5, -0.3, 0.0, 0.4, 1.9] {
            assert!(inflate_and_prove(&p, &[seed], p.domain(), &ProofConfig::default()).is_err());
        }
    }

    #[test]
    fn inequality_only_points() {
        let p = parse_problem("var x in [-2,2]; var y in [-2,2]; min x + y; subject x^2 + y^2 - 1 <= 0;").unwrap();
        // deep inside: nothing active, the point itself is the proof
        let pb = inflate_and_prove(&p, &[0.1, 0.2], p.domain(), &ProofConfig::default()).unwrap();
        assert!(pb.certificate.unknowns.is_empty());
        // on the boundary
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let pb = inflate_and_prove(&p, &[-s, -s], p.domain(), &ProofConfig::default()).unwrap();
        assert!(pb.objective_range.hi() < -1.414);
        replay(&p, &pb.certificate).unwrap();
    }

    #[test]
    fn tampered_certificate_fails_replay() {
        let p = parse_problem("var x in [-2,2]; var y in [-2,2]; min x + y; subject x^2 + y^2 - 1 = 0;").unwrap();
        let pb = inflate_and_prove(&p, &[0.6, 0.8], p.domain(), &ProofConfig::default()).unwrap();
        let mut cert = pb.certificate.clone();
        for f in cert.fixed.iter_mut() {
            f.1 += 0.5;
        }
        assert!(replay(&p, &cert).is_err());
    }
}
