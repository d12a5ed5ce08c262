//! Penalty-based local search producing unproven "guesses" of good feasible
//! points, plus a seeded multistart driver.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::{eval_point, gradient_point, Problem};
use crate::interval::IntervalBox;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalSearchConfig {
    pub mu0: f64,
    pub mu_growth: f64,
    pub rounds: usize,
    pub max_inner: usize,
}

impl Default for LocalSearchConfig {
    fn default() -> Self {
        LocalSearchConfig { mu0: 10.0, mu_growth: 10.0, rounds: 3, max_inner: 500 }
    }
}

impl LocalSearchConfig {
    pub fn final_mu(&self) -> f64 {
        self.mu0 * self.mu_growth.powi(self.rounds.saturating_sub(1) as i32)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalResult {
    pub point: Vec<f64>,
    /// Penalty function value at `point` under the final penalty weight.
    pub penalty: f64,
    /// No step was ever accepted.
    pub stalled: bool,
}

/// `f(x) + μ(Σ g_i(x)² + Σ max(0, h_j(x))²)`, `+inf` where undefined.
pub fn penalty(p: &Problem, x: &[f64], mu: f64) -> f64 {
    let Ok(f) = eval_point(p.objective(), x) else {
        return f64::INFINITY;
    };
    let mut s = 0.0;
    for g in p.equalities() {
        match eval_point(g, x) {
            Ok(v) => s += v * v,
            Err(_) => return f64::INFINITY,
        }
    }
    for h in p.inequalities() {
        match eval_point(h, x) {
            Ok(v) => s += v.max(0.0).powi(2),
            Err(_) => return f64::INFINITY,
        }
    }
    let v = f + mu * s;
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

fn penalty_gradient(p: &Problem, x: &[f64], mu: f64) -> Option<Vec<f64>> {
    let (_, mut grad) = gradient_point(p.objective(), x).ok()?;
    for g in p.equalities() {
        let (v, dg) = gradient_point(g, x).ok()?;
        for (a, d) in grad.iter_mut().zip(dg) {
            *a += mu * 2.0 * v * d;
        }
    }
    for h in p.inequalities() {
        let (v, dh) = gradient_point(h, x).ok()?;
        if v > 0.0 {
            for (a, d) in grad.iter_mut().zip(dh) {
                *a += mu * 2.0 * v * d;
            }
        }
    }
    grad.iter().all(|g| g.is_finite()).then_some(grad)
}

/// Projected gradient descent on the penalty function with Barzilai–Borwein
/// initial steps and Armijo backtracking, for an increasing sequence of
/// penalty weights.
pub fn local_descent(p: &Problem, x0: &[f64], b: &IntervalBox, cfg: &LocalSearchConfig) -> LocalResult {
    let start = b.clamp_point(x0);
    let mut x = start.clone();
    let mut accepted_any = false;
    let mut mu = cfg.mu0;
    for _ in 0..cfg.rounds {
        let mut fx = penalty(p, &x, mu);
        let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
        for _ in 0..cfg.max_inner {
            let Some(g) = penalty_gradient(p, &x, mu) else { break };
            let gnorm = g.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if gnorm == 0.0 || !fx.is_finite() {
                break;
            }
            let mut alpha = match &prev {
                Some((px, pg)) => {
                    let s: Vec<f64> = x.iter().zip(px).map(|(a, b)| a - b).collect();
                    let y: Vec<f64> = g.iter().zip(pg).map(|(a, b)| a - b).collect();
                    let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
                    let ss: f64 = s.iter().map(|a| a * a).sum();
                    if sy > 0.0 && ss > 0.0 {
                        ss / sy
                    } else {
                        1.0 / gnorm
                    }
                }
                None => 1.0 / gnorm.max(1.0),
            };
            let mut step = None;
            for _ in 0..50 {
                let trial = b.clamp_point(&x.iter().zip(&g).map(|(xi, gi)| xi - alpha * gi).collect::<Vec<_>>());
                let decrease: f64 = g.iter().zip(x.iter().zip(&trial)).map(|(gi, (a, t))| gi * (a - t)).sum();
                let ft = penalty(p, &trial, mu);
                if decrease > 0.0 && ft <= fx - 1e-4 * decrease {
                    step = Some((trial, ft));
                    break;
                }
                alpha *= 0.5;
            }
            let Some((trial, ft)) = step else { break };
            let moved = x.iter().zip(&trial).fold(0.0_f64, |m, (a, t)| m.max((a - t).abs()));
            let scale = 1.0 + x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            accepted_any = true;
            prev = Some((x, g));
            x = trial;
            let improvement = fx - ft;
            fx = ft;
            if moved <= 1e-13 * scale || improvement <= 1e-15 * (1.0 + fx.abs()) {
                break;
            }
        }
        mu *= cfg.mu_growth;
    }
    let mu_final = cfg.final_mu();
    let (pe, ps) = (penalty(p, &x, mu_final), penalty(p, &start, mu_final));
    if !accepted_any || ps < pe {
        return LocalResult { point: start, penalty: ps, stalled: !accepted_any };
    }
    LocalResult { point: x, penalty: pe, stalled: false }
}

/// Range to sample from for one component; unbounded sides are cut at a
/// distance of 100 from the finite side (or from 0).
fn sample_range(lo: f64, hi: f64) -> (f64, f64) {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => (lo, hi),
        (true, false) => (lo, lo + 100.0),
        (false, true) => (hi - 100.0, hi),
        (false, false) => (-100.0, 100.0),
    }
}

/// `nb_starts` uniform samples from `b`, each refined by [`local_descent`],
/// sorted by final penalty value (stable, so ties keep sampling order).
pub fn multistart(p: &Problem, b: &IntervalBox, nb_starts: usize, seed: u64, cfg: &LocalSearchConfig) -> Vec<LocalResult> {
    assert!(nb_starts >= 1, "multistart needs at least one start");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<LocalResult> = (0..nb_starts)
        .map(|_| {
            let x0: Vec<f64> = b
                .iter()
                .map(|c| {
                    let (lo, hi) = sample_range(c.lo(), c.hi());
                    if lo < hi {
                        rng.gen_range(lo..=hi)
                    } else {
                        lo
                    }
                })
                .collect();
            local_descent(p, &x0, b, cfg)
        })
        .collect();
    out.sort_by(|a, b| a.penalty.total_cmp(&b.penalty));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_problem;

    fn circle() -> Problem {
        parse_problem("var x in [-2,2]; var y in [-2,2]; min x + y; subject x^2 + y^2 - 1 = 0;").unwrap()
    }

    #[test]
    fn circle_descent_reaches_minimizer() {
        let p = circle();
        let r = local_descent(&p, &[-0.8, -0.4], p.domain(), &LocalSearchConfig::default());
        let s = -std::f64::consts::FRAC_1_SQRT_2;
        assert!((r.point[0] - s).abs() < 1e-2 && (r.point[1] - s).abs() < 1e-2, "{r:?}");
    }

    #[test]
    fn unconstrained_quadratic() {
        let p = parse_problem("var x in [-1,1]; min x^2;").unwrap();
        let r = local_descent(&p, &[0.5], p.domain(), &LocalSearchConfig::default());
        assert!(r.point[0].abs() <= 1e-4);
        let r = local_descent(&p, &[0.0], p.domain(), &LocalSearchConfig::default());
        assert_eq!(r.point, vec![0.0]);
        assert!(r.stalled);
    }

    #[test]
    fn multistart_is_deterministic_and_sorted() {
        let p = circle();
        let cfg = LocalSearchConfig::default();
        let a = multistart(&p, p.domain(), 20, 42, &cfg);
        let b = multistart(&p, p.domain(), 20, 42, &cfg);
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[0].penalty <= w[1].penalty));
        let f = a[0].point[0] + a[0].point[1];
        assert!((f + std::f64::consts::SQRT_2).abs() < 1e-2);
        assert_eq!(multistart(&p, p.domain(), 1, 3, &cfg).len(), 1);
    }

    #[test]
    fn descent_never_increases_penalty() {
        let p = parse_problem("var x in [-3,3]; var y in [-3,3]; min exp(x) - 2*x + (y+0.5)^2; subject x^2 + y^2 - 4 <= 0;").unwrap();
        let cfg = LocalSearchConfig::default();
        for x0 in [[2.9, -2.9], [0.0, 0.0], [-3.0, 3.0], [1.5, 1.0]] {
            let r = local_descent(&p, &x0, p.domain(), &cfg);
            assert!(r.penalty <= penalty(&p, &x0, cfg.final_mu()) + 1e-12);
            assert!(p.domain().contains_point(&r.point));
        }
    }
}
