//! Best-first interval branch and bound with pluggable upper-bounding
//! strategies.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::contractor::prune;
use crate::expr::{eval_interval, eval_point, Problem};
use crate::feasibility::{feasibility_correction, CorrectionConfig, CorrectionFailure};
use crate::interval::{Interval, IntervalBox};
use crate::local_search::{multistart, LocalSearchConfig};
use crate::lp::{certifies_infeasible, safe_lower_bound, simplex_solve, LpStatus};
use crate::proof::{inflate_and_prove, ProofConfig, ProofFailure, ProvenBox};
use crate::relaxation::linearize;

/// How feasible points are found and certified inside a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    /// Local-search guess used as an upper bound without proof (unsafe).
    S1,
    /// Proof directly around the local-search guess.
    S2,
    /// LP optimum, corrected onto the constraints, then proved.
    S3,
    /// Local-search guess, corrected, then proved.
    S4,
    /// Proof directly around the LP optimum.
    S5,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [Strategy::S1, Strategy::S2, Strategy::S3, Strategy::S4, Strategy::S5];

    fn uses_lp_point(self) -> bool {
        matches!(self, Strategy::S3 | Strategy::S5)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown strategy `{0}` (expected S1..S5)")]
pub struct UnknownStrategy(pub String);

impl FromStr for Strategy {
    type Err = UnknownStrategy;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "S1" => Ok(Strategy::S1),
            "S2" => Ok(Strategy::S2),
            "S3" => Ok(Strategy::S3),
            "S4" => Ok(Strategy::S4),
            "S5" => Ok(Strategy::S5),
            _ => Err(UnknownStrategy(s.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub eps: f64,
    /// Starts of the root multistart; nodes use one start.
    pub nb_starts: usize,
    pub max_nodes: usize,
    pub max_seconds: f64,
    pub seed: u64,
    pub local: LocalSearchConfig,
    pub correction: CorrectionConfig,
    pub proof: ProofConfig,
    /// Keep one record per processed node (box and lower bound) for audits.
    pub record_nodes: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("eps must be positive")]
    Eps,
    #[error("nb_starts must be at least 1")]
    NbStarts,
    #[error("max_seconds must be positive")]
    MaxSeconds,
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(ConfigError::Eps);
        }
        if self.nb_starts == 0 {
            return Err(ConfigError::NbStarts);
        }
        if !(self.max_seconds > 0.0) {
            return Err(ConfigError::MaxSeconds);
        }
        Ok(())
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            eps: 1e-6,
            nb_starts: 20,
            max_nodes: 100_000,
            max_seconds: 60.0,
            seed: 0,
            local: LocalSearchConfig::default(),
            correction: CorrectionConfig::default(),
            proof: ProofConfig::default(),
            record_nodes: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    Infeasible,
    BudgetExhausted,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::BudgetExhausted => "budget_exhausted",
        })
    }
}

/// Outcome of one upper-bounding attempt inside a node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage", content = "reason", rename_all = "snake_case")]
pub enum UpperBoundingEvent {
    Proven,
    /// The LP produced no point (S3/S5 only).
    NoLpPoint,
    /// Unproven guess recorded (S1 only).
    Guess,
    Correction(CorrectionFailure),
    Proof(ProofFailure),
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct UpperBoundingOutcome {
    pub proven: Vec<ProvenBox>,
    pub unsafe_value: Option<f64>,
    pub attempts: usize,
    pub events: Vec<UpperBoundingEvent>,
}

/// Corrects (optionally) and proves from `x`. Both stages work against the
/// problem domain rather than the node box: any certified feasible point of
/// the domain is a valid upper bound, and solutions on node faces are
/// otherwise out of reach of the existence test.
fn prove(p: &Problem, x: &[f64], correct: bool, cfg: &SolverConfig, out: &mut UpperBoundingOutcome) {
    let domain = p.domain();
    let seed = if correct {
        let c = feasibility_correction(p, x, domain, &cfg.correction);
        if !c.converged {
            out.events.push(UpperBoundingEvent::Correction(c.failure.unwrap_or(CorrectionFailure::MaxIterations)));
            return;
        }
        c.point
    } else {
        x.to_vec()
    };
    out.attempts += 1;
    match inflate_and_prove(p, &seed, domain, &cfg.proof) {
        Ok(pb) => {
            out.events.push(UpperBoundingEvent::Proven);
            out.proven.push(pb);
        }
        Err(e) => out.events.push(UpperBoundingEvent::Proof(e)),
    }
}

/// Looks for certified feasible boxes in `node_box` with the given strategy.
pub fn upper_bounding(
    p: &Problem,
    node_box: &IntervalBox,
    x_lp: Option<&[f64]>,
    strategy: Strategy,
    nb_starts: usize,
    seed: u64,
    cfg: &SolverConfig,
) -> UpperBoundingOutcome {
    let mut out = UpperBoundingOutcome::default();
    if strategy.uses_lp_point() {
        match x_lp {
            Some(x) => prove(p, x, strategy == Strategy::S3, cfg, &mut out),
            None => out.events.push(UpperBoundingEvent::NoLpPoint),
        }
        return out;
    }
    let guesses = multistart(p, node_box, nb_starts.max(1), seed, &cfg.local);
    for g in &guesses {
        match strategy {
            Strategy::S1 => {
                if let Ok(v) = eval_point(p.objective(), &g.point) {
                    out.unsafe_value = Some(out.unsafe_value.map_or(v, |u: f64| u.min(v)));
                }
                out.events.push(UpperBoundingEvent::Guess);
            }
            Strategy::S2 => prove(p, &g.point, false, cfg, &mut out),
            Strategy::S4 => prove(p, &g.point, true, cfg, &mut out),
            Strategy::S3 | Strategy::S5 => unreachable!(),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("box cannot be bisected further")]
pub struct Unsplittable;

/// Bisects the component with the largest `width / (1 + |mid|)` at its
/// midpoint.
pub fn split(b: &IntervalBox) -> Result<(IntervalBox, IntervalBox), Unsplittable> {
    if b.is_empty() {
        return Err(Unsplittable);
    }
    let i = b.max_relative_width_index().ok_or(Unsplittable)?;
    let c = b[i];
    let m = c.mid();
    if !(m > c.lo() && m < c.hi()) {
        return Err(Unsplittable);
    }
    let mut left = b.clone();
    let mut right = b.clone();
    left.set(i, Interval::new(c.lo(), m));
    right.set(i, Interval::new(m, c.hi()));
    Ok((left, right))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    #[serde(with = "crate::report::ext_real")]
    pub lower: f64,
    #[serde(with = "crate::report::ext_real")]
    pub upper: f64,
    #[serde(with = "crate::report::ext_real")]
    pub node_lower: f64,
    pub proof_attempts: usize,
    pub proof_successes: usize,
    pub events: Vec<UpperBoundingEvent>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub iteration: usize,
    pub bx: Vec<[f64; 2]>,
    #[serde(with = "crate::report::ext_real")]
    pub lower_bound: f64,
}

/// Measure bookkeeping: `initial = live + discarded` up to rounding while the
/// search runs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeAccount {
    pub initial: f64,
    pub discarded: f64,
    pub live: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub strategy: Strategy,
    pub status: Status,
    pub lower: f64,
    /// Reported upper bound; for S1 this is the unproven incumbent.
    pub upper: f64,
    /// Upper bound backed by certificates.
    pub certified_upper: f64,
    /// Unproven values took part in pruning.
    pub unsafe_run: bool,
    pub proven: Vec<ProvenBox>,
    pub nodes: usize,
    pub proof_attempts: usize,
    pub proof_successes: usize,
    pub time_to_first_proof: Option<f64>,
    pub first_proof_node: Option<usize>,
    pub wall_time: f64,
    /// Nodes whose LP came back infeasible without a verified certificate.
    pub lp_unconfirmed_infeasible: usize,
    /// Some relaxation had to clamp an unbounded box.
    pub clamped: bool,
    pub trace: Vec<IterationRecord>,
    pub node_log: Vec<NodeRecord>,
    pub volume: Option<VolumeAccount>,
}

struct Node {
    bx: IntervalBox,
    lb: f64,
    seq: u64,
}

impl PartialEq for Node {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap: reverse so the least bound (then the oldest
    // node) comes out first.
    fn cmp(&self, o: &Self) -> Ordering {
        o.lb.total_cmp(&self.lb).then_with(|| o.seq.cmp(&self.seq))
    }
}

fn node_seed(seed: u64, node: usize) -> u64 {
    seed.wrapping_add((node as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn to_pairs(b: &IntervalBox) -> Vec<[f64; 2]> {
    b.iter().map(|c| [c.lo(), c.hi()]).collect()
}

/// Runs branch and bound on `p` until `U - L <= eps`, the search space is
/// exhausted, or the budget runs out. Reported bounds are safe for all
/// strategies except S1.
pub fn branch_and_bound(p: &Problem, strategy: Strategy, cfg: &SolverConfig) -> SolveReport {
    let start = Instant::now();
    let domain = p.domain().clone();
    let mut proven: Vec<ProvenBox> = Vec::new();
    let mut u_safe = f64::INFINITY;
    let mut u_unsafe = f64::INFINITY;
    let mut attempts = 0;
    let mut first_proof: Option<(f64, usize)> = None;
    let mut trace = Vec::new();
    let mut node_log = Vec::new();
    let mut lp_unconfirmed = 0;
    let mut clamped = false;
    let initial_volume = domain.volume();
    let track_volume = initial_volume.is_finite();
    let mut discarded = 0.0;

    let absorb = |out: UpperBoundingOutcome,
                  proven: &mut Vec<ProvenBox>,
                  u_safe: &mut f64,
                  u_unsafe: &mut f64,
                  attempts: &mut usize,
                  first: &mut Option<(f64, usize)>,
                  node: usize| {
        *attempts += out.attempts;
        if let Some(v) = out.unsafe_value {
            *u_unsafe = u_unsafe.min(v);
        }
        for pb in out.proven {
            *u_safe = u_safe.min(pb.objective_range.hi());
            if first.is_none() {
                *first = Some((start.elapsed().as_secs_f64(), node));
            }
            proven.push(pb);
        }
        out.events
    };

    // Root upper bounding needs a guess; the LP-driven strategies get their
    // first point from the first node instead.
    if !strategy.uses_lp_point() {
        let out = upper_bounding(p, &domain, None, strategy, cfg.nb_starts, cfg.seed, cfg);
        absorb(out, &mut proven, &mut u_safe, &mut u_unsafe, &mut attempts, &mut first_proof, 0);
    }

    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    heap.push(Node { bx: domain.clone(), lb: f64::NEG_INFINITY, seq });
    let mut frozen: Vec<(IntervalBox, f64)> = Vec::new();
    let mut nodes = 0usize;
    let mut lower = f64::NEG_INFINITY;
    let mut status = Status::BudgetExhausted;
    let unsafe_mode = strategy == Strategy::S1;

    loop {
        let u_eff = if unsafe_mode { u_safe.min(u_unsafe) } else { u_safe };
        if heap.is_empty() {
            if frozen.is_empty() {
                status = if proven.is_empty() && u_unsafe == f64::INFINITY { Status::Infeasible } else { Status::Optimal };
            } else if u_eff - lower <= cfg.eps {
                status = Status::Optimal;
            }
            break;
        }
        if u_eff - lower <= cfg.eps {
            status = Status::Optimal;
            break;
        }
        let node = heap.pop().expect("heap checked non-empty");
        if nodes >= cfg.max_nodes || start.elapsed().as_secs_f64() >= cfg.max_seconds {
            heap.push(node);
            break;
        }
        nodes += 1;
        let it = nodes;
        let vol_before = node.bx.volume();
        let mut node_lb = node.lb;
        let mut events = Vec::new();
        let mut keep: Option<IntervalBox> = None;

        if node.lb <= u_eff {
            let b = prune(p, &node.bx, u_eff);
            if !b.is_empty() {
                let mut x_lp = None;
                let lp = linearize(p, &b, u_eff);
                clamped |= lp.clamped;
                let sol = simplex_solve(&lp);
                let mut infeasible = false;
                match sol.status {
                    LpStatus::Optimal => {
                        x_lp = Some(sol.primal[..lp.n_orig].to_vec());
                        if !lp.clamped {
                            node_lb = node_lb.max(safe_lower_bound(&lp, &sol.duals));
                        }
                    }
                    LpStatus::Infeasible => {
                        let certified = !lp.clamped
                            && (lp.bounds.is_empty()
                                || sol.farkas.as_deref().is_some_and(|f| certifies_infeasible(&lp, f)));
                        if certified {
                            infeasible = true;
                        } else {
                            lp_unconfirmed += 1;
                        }
                    }
                    LpStatus::Unbounded | LpStatus::NumericalFailure => {}
                }
                let fr = eval_interval(p.objective(), &b);
                if !fr.is_empty() {
                    node_lb = node_lb.max(fr.lo());
                }
                if cfg.record_nodes {
                    node_log.push(NodeRecord { iteration: it, bx: to_pairs(&b), lower_bound: node_lb });
                }
                if !infeasible && node_lb <= u_eff {
                    let out = upper_bounding(p, &b, x_lp.as_deref(), strategy, 1, node_seed(cfg.seed, it), cfg);
                    events = absorb(out, &mut proven, &mut u_safe, &mut u_unsafe, &mut attempts, &mut first_proof, it);
                    let u_now = if unsafe_mode { u_safe.min(u_unsafe) } else { u_safe };
                    if node_lb <= u_now {
                        keep = Some(b);
                    }
                }
            }
        }

        let mut vol_kept = 0.0;
        if let Some(b) = keep {
            vol_kept = b.volume();
            match split(&b) {
                Ok((l, r)) => {
                    for child in [l, r] {
                        seq += 1;
                        heap.push(Node { bx: child, lb: node_lb, seq });
                    }
                }
                Err(Unsplittable) => frozen.push((b, node_lb)),
            }
        }
        if track_volume {
            discarded += vol_before - vol_kept;
        }

        let heap_min = heap.peek().map_or(f64::INFINITY, |n| n.lb);
        let frozen_min = frozen.iter().map(|(_, l)| *l).fold(f64::INFINITY, f64::min);
        let u_rep = if unsafe_mode { u_safe.min(u_unsafe) } else { u_safe };
        // A minimizer inside a discarded box would have to exceed U.
        lower = lower.max(heap_min.min(frozen_min).min(u_rep));
        trace.push(IterationRecord {
            iteration: it,
            lower,
            upper: u_rep,
            node_lower: node_lb,
            proof_attempts: attempts,
            proof_successes: proven.len(),
            events,
        });
    }

    let u_rep = if unsafe_mode { u_safe.min(u_unsafe) } else { u_safe };
    let (lo, up) = match status {
        Status::Infeasible => (f64::INFINITY, f64::NEG_INFINITY),
        // Search space exhausted with an incumbent: nothing left can beat it.
        Status::Optimal if lower > u_rep => (u_rep, u_rep),
        _ => (lower, u_rep),
    };
    let volume = track_volume.then(|| {
        let pending: f64 = heap.iter().map(|n| n.bx.volume()).sum::<f64>();
        let frozen_vol: f64 = frozen.iter().map(|(b, _)| b.volume()).sum();
        VolumeAccount { initial: initial_volume, discarded, live: pending + frozen_vol }
    });
    SolveReport {
        strategy,
        status,
        lower: lo,
        upper: up,
        certified_upper: u_safe,
        unsafe_run: unsafe_mode,
        proof_successes: proven.len(),
        proven,
        nodes,
        proof_attempts: attempts,
        time_to_first_proof: first_proof.map(|f| f.0),
        first_proof_node: first_proof.map(|f| f.1),
        wall_time: start.elapsed().as_secs_f64(),
        lp_unconfirmed_infeasible: lp_unconfirmed,
        clamped,
        trace,
        node_log,
        volume,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_problem;

    #[test]
    fn split_rules() {
        let (l, r) = split(&IntervalBox::from_bounds(&[(0.0, 4.0), (0.0, 1.0)])).unwrap();
        assert_eq!(l, IntervalBox::from_bounds(&[(0.0, 2.0), (0.0, 1.0)]));
        assert_eq!(r, IntervalBox::from_bounds(&[(2.0, 4.0), (0.0, 1.0)]));
        let (l, _) = split(&IntervalBox::from_bounds(&[(0.0, 1.0), (0.0, 1.0)])).unwrap();
        assert_eq!(l[0], Interval::new(0.0, 0.5));
        let (l, _) = split(&IntervalBox::from_bounds(&[(5.0, 5.0), (0.0, 2.0)])).unwrap();
        assert_eq!(l[1], Interval::new(0.0, 1.0));
        assert!(split(&IntervalBox::from_point(&[1.0, 2.0])).is_err());
        let tiny = 1.0_f64.next_up();
        assert!(split(&IntervalBox::from_bounds(&[(1.0, tiny)])).is_err());
    }

    #[test]
    fn strategy_names() {
        for s in Strategy::ALL {
            assert_eq!(s.to_string().parse::<Strategy>().unwrap(), s);
        }
        assert!("S6".parse::<Strategy>().is_err());
    }

    #[test]
    fn circle_s3_encloses_optimum() {
        let p = parse_problem("var x in [-2,2]; var y in [-2,2]; min x + y; subject x^2 + y^2 - 1 = 0;").unwrap();
        let r = branch_and_bound(&p, Strategy::S3, &SolverConfig::default());
        let f = -std::f64::consts::SQRT_2;
        assert_eq!(r.status, Status::Optimal, "{:?}", (r.lower, r.upper, r.nodes));
        assert!(r.lower <= f && f <= r.upper);
        assert!(r.upper - r.lower <= 1e-6);
    }

    #[test]
    fn infeasible_problem_is_proven_empty() {
        let p = parse_problem("var x in [-10,10]; min x; subject x^2 + 1 = 0;").unwrap();
        let r = branch_and_bound(&p, Strategy::S3, &SolverConfig::default());
        assert_eq!(r.status, Status::Infeasible);
        assert_eq!((r.lower, r.upper), (f64::INFINITY, f64::NEG_INFINITY));
    }

    #[test]
    fn s1_is_flagged_unsafe() {
        let p = parse_problem("var x in [-10,10]; min x; subject x^2 - 4 = 0;").unwrap();
        let r = branch_and_bound(&p, Strategy::S1, &SolverConfig::default());
        assert!(r.unsafe_run);
        assert!(r.proven.is_empty());
    }

    #[test]
    fn upper_bounding_dispatch() {
        let p = parse_problem("var x in [-2,2]; var y in [-2,2]; min x + y; subject x^2 + y^2 - 1 = 0;").unwrap();
        let cfg = SolverConfig::default();
        let out = upper_bounding(&p, p.domain(), Some(&[-0.72, -0.70]), Strategy::S3, 1, 0, &cfg);
        assert_eq!(out.proven.len(), 1);
        // the correction lands on the radial projection of the seed, where
        // x + y = -1.4140733121062383
        let range = out.proven[0].objective_range;
        assert!(range.lo() >= -std::f64::consts::SQRT_2);
        assert!((range.hi() + 1.4140733121062383).abs() < 1e-6);
        let out = upper_bounding(&p, p.domain(), None, Strategy::S1, 5, 0, &cfg);
        assert!(out.proven.is_empty() && out.unsafe_value.is_some());
        // LP vertex violating the constraint by 0.5: far outside the reach of
        // the inflation radii
        let out = upper_bounding(&p, p.domain(), Some(&[-(0.5f64.sqrt()), 0.0]), Strategy::S5, 1, 0, &cfg);
        assert!(out.proven.is_empty());
    }
}
