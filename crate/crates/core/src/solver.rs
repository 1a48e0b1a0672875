//! Per-group slot-duration optimization and exact global search over all
//! groupings by set-partition enumeration.

use crate::ambiguity::{omega_from_curves, TvBall};
use crate::bounds::{self, BoundaryForce};
use crate::domain::{conditional_probs, CostParams, ModeSet, Partition};
use crate::error::{Error, Result};
use crate::piecewise::{self, PiecewiseWorstCase};

/// Largest mode count accepted by the exact enumeration.
pub const MAX_ENUM_MODES: usize = 15;

/// Cost difference below which two candidate durations count as tied; the
/// smaller duration wins.
const COST_TIE_TOL: f64 = 1e-9;

/// Optimal duration and worst-case cost for one group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupSolution {
    pub duration: f64,
    pub worst_cost: f64,
    /// Index of the merged interval that contained the optimum.
    pub interval_id: usize,
}

/// A full template: the grouping, each group's solution, and the overall
/// objective `activation * |P| + (1/|P|) * sum of group worst costs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub partition: Partition,
    pub group_solutions: Vec<GroupSolution>,
    pub objective: f64,
}

/// Splits `[0, horizon]` at every member's clamped breakpoints. Returns
/// sorted disjoint intervals covering the whole range; on each interval
/// every member stays on a single piece of its closed form.
pub fn merged_intervals(
    group: &[usize],
    mode_set: &ModeSet,
    costs: &CostParams,
) -> Result<Vec<(f64, f64)>> {
    let curves = build_curves(group, mode_set, costs)?;
    Ok(merged_intervals_from_curves(&curves, costs.horizon))
}

fn merged_intervals_from_curves(curves: &[PiecewiseWorstCase], horizon: f64) -> Vec<(f64, f64)> {
    let mut points = vec![0.0, horizon];
    for c in curves {
        for tau in c.breakpoints() {
            if tau > 0.0 && tau < horizon {
                points.push(tau);
            }
        }
    }
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    points.dedup();
    points.windows(2).map(|w| (w[0], w[1])).collect()
}

fn build_curves(
    group: &[usize],
    mode_set: &ModeSet,
    costs: &CostParams,
) -> Result<Vec<PiecewiseWorstCase>> {
    group
        .iter()
        .map(|&l| piecewise::build(mode_set.get(l), costs))
        .collect()
}

struct MixtureCurve<'a> {
    curves: &'a [PiecewiseWorstCase],
    weights: &'a [f64],
}

impl MixtureCurve<'_> {
    fn cost(&self, t: f64) -> f64 {
        self.curves
            .iter()
            .zip(self.weights)
            .map(|(c, &p)| p * c.cost(t).expect("t within range"))
            .sum()
    }

    fn slope_right(&self, t: f64) -> f64 {
        self.curves
            .iter()
            .zip(self.weights)
            .map(|(c, &p)| p * c.slope_right(t))
            .sum()
    }

    fn slope_left(&self, t: f64) -> f64 {
        self.curves
            .iter()
            .zip(self.weights)
            .map(|(c, &p)| p * c.slope_left(t))
            .sum()
    }
}

/// Candidate accumulator implementing the smallest-duration tie rule.
struct Best {
    duration: f64,
    cost: f64,
    interval_id: usize,
}

impl Best {
    fn new() -> Self {
        Self {
            duration: f64::INFINITY,
            cost: f64::INFINITY,
            interval_id: 0,
        }
    }

    fn offer(&mut self, duration: f64, cost: f64, interval_id: usize) {
        if cost < self.cost - COST_TIE_TOL
            || (cost <= self.cost + COST_TIE_TOL && duration < self.duration)
        {
            self.duration = duration;
            self.cost = cost;
            self.interval_id = interval_id;
        }
    }
}

/// Optimal duration for one group with the mode probabilities pinned at
/// their conditional nominal values (zero TV radius). On every merged
/// interval the mixture is smooth and convex, so the stationary point is
/// found by bisection on the analytic derivative; interval endpoints cover
/// the kinks. Equal-cost optima resolve to the smallest duration.
pub fn optimize_group_rho0(
    group: &[usize],
    mode_set: &ModeSet,
    costs: &CostParams,
) -> Result<GroupSolution> {
    let curves = build_curves(group, mode_set, costs)?;
    let weights = conditional_probs(group, mode_set);
    let mix = MixtureCurve {
        curves: &curves,
        weights: &weights,
    };
    let intervals = merged_intervals_from_curves(&curves, costs.horizon);

    // Closed-form boundary shortcut: when the first-piece slope is already
    // nonnegative the whole curve is nondecreasing, and mirror-wise at the
    // horizon.
    match bounds::boundary_conditions(group, mode_set, costs)? {
        BoundaryForce::ForceZero => {
            return Ok(GroupSolution {
                duration: 0.0,
                worst_cost: mix.cost(0.0),
                interval_id: 0,
            });
        }
        BoundaryForce::ForceHorizon => {
            return Ok(GroupSolution {
                duration: costs.horizon,
                worst_cost: mix.cost(costs.horizon),
                interval_id: intervals.len().saturating_sub(1),
            });
        }
        BoundaryForce::Interior { .. } => {}
    }

    let mut best = Best::new();
    for (j, &(lo, hi)) in intervals.iter().enumerate() {
        let t = minimize_smooth_convex(&mix, lo, hi);
        best.offer(t, mix.cost(t), j);
        best.offer(lo, mix.cost(lo), j);
        best.offer(hi, mix.cost(hi), j);
    }
    Ok(GroupSolution {
        duration: best.duration,
        worst_cost: best.cost,
        interval_id: best.interval_id,
    })
}

/// Bisection on the derivative of a smooth convex function over `[lo, hi]`;
/// returns an endpoint exactly when the derivative does not change sign.
fn minimize_smooth_convex(mix: &MixtureCurve, lo: f64, hi: f64) -> f64 {
    if hi - lo <= 0.0 {
        return lo;
    }
    if mix.slope_right(lo) >= 0.0 {
        return lo;
    }
    if mix.slope_left(hi) <= 0.0 {
        return hi;
    }
    let mut a = lo;
    let mut b = hi;
    for _ in 0..200 {
        if b - a <= 1e-12 * (1.0 + b.abs()) {
            break;
        }
        let mid = 0.5 * (a + b);
        // Strictly inside the interval every member is inside one piece, so
        // the two one-sided slopes agree.
        if mix.slope_right(mid) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Optimal duration for one group under a positive TV radius: the
/// adversarially reweighted cost is convex but kinked, so each merged
/// interval is searched by golden section, then interval winners and
/// endpoints are compared with the same smallest-duration tie rule.
pub fn optimize_group(
    group: &[usize],
    mode_set: &ModeSet,
    costs: &CostParams,
) -> Result<GroupSolution> {
    let curves = build_curves(group, mode_set, costs)?;
    let ball = TvBall::new(conditional_probs(group, mode_set), costs.tv_radius)?;
    let value = |t: f64| -> f64 {
        omega_from_curves(&curves, &ball, t).expect("t within range")
    };
    let intervals = merged_intervals_from_curves(&curves, costs.horizon);

    // The corner cost regimes force a boundary optimum for every mode
    // probability in the ball, so they short-circuit exactly.
    if costs.overtime_rate == 0.0 {
        return Ok(GroupSolution {
            duration: 0.0,
            worst_cost: value(0.0),
            interval_id: 0,
        });
    }
    if costs.idle_rate == 0.0 {
        return Ok(GroupSolution {
            duration: costs.horizon,
            worst_cost: value(costs.horizon),
            interval_id: intervals.len().saturating_sub(1),
        });
    }

    let tol = 1e-6 * costs.horizon;
    let mut best = Best::new();
    for (j, &(lo, hi)) in intervals.iter().enumerate() {
        let (t, cost) = golden_section(&value, lo, hi, tol);
        best.offer(t, cost, j);
        best.offer(lo, value(lo), j);
        best.offer(hi, value(hi), j);
    }
    Ok(GroupSolution {
        duration: best.duration,
        worst_cost: best.cost,
        interval_id: best.interval_id,
    })
}

/// Golden-section search for the minimum of a unimodal function on
/// `[a, b]`, to abscissa tolerance `tol`.
fn golden_section(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    if b - a <= tol {
        let mid = 0.5 * (a + b);
        return (mid, f(mid));
    }
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Solves one group, dispatching on the TV radius.
pub fn solve_group(
    group: &[usize],
    mode_set: &ModeSet,
    costs: &CostParams,
) -> Result<GroupSolution> {
    if costs.tv_radius == 0.0 {
        optimize_group_rho0(group, mode_set, costs)
    } else {
        optimize_group(group, mode_set, costs)
    }
}

/// Solves every group of `partition` and assembles the objective.
pub fn evaluate_partition(
    partition: Partition,
    mode_set: &ModeSet,
    costs: &CostParams,
) -> Result<Solution> {
    let group_solutions = partition
        .groups()
        .iter()
        .map(|g| solve_group(g, mode_set, costs))
        .collect::<Result<Vec<_>>>()?;
    let k = partition.num_groups() as f64;
    let total: f64 = group_solutions.iter().map(|g| g.worst_cost).sum();
    let objective = costs.activation_cost * k + total / k;
    Ok(Solution {
        partition,
        group_solutions,
        objective,
    })
}

/// Iterator over all set partitions of `0..n` in lexicographic
/// restricted-growth-string order.
pub struct Partitions {
    rgs: Vec<usize>,
    started: bool,
    done: bool,
}

/// Enumerates every set partition of `n` elements exactly once. Guarded at
/// [`MAX_ENUM_MODES`] elements; the count is the Bell number, which grows
/// too fast beyond that.
pub fn enumerate_partitions(n: usize) -> Result<Partitions> {
    if n == 0 || n > MAX_ENUM_MODES {
        return Err(Error::TooManyModes {
            l: n,
            max: MAX_ENUM_MODES,
        });
    }
    Ok(Partitions {
        rgs: vec![0; n],
        started: false,
        done: false,
    })
}

impl Iterator for Partitions {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(Partition::from_rgs(&self.rgs));
        }
        // Advance to the next restricted growth string: find the rightmost
        // position that can be incremented (value at most the prefix max),
        // increment it, and reset everything to its right to zero.
        let n = self.rgs.len();
        let mut prefix_max = vec![0usize; n];
        for i in 1..n {
            prefix_max[i] = prefix_max[i - 1].max(self.rgs[i - 1]);
        }
        let mut i = n;
        loop {
            if i == 1 {
                self.done = true;
                return None;
            }
            i -= 1;
            if self.rgs[i] <= prefix_max[i] {
                self.rgs[i] += 1;
                for v in self.rgs[i + 1..].iter_mut() {
                    *v = 0;
                }
                return Some(Partition::from_rgs(&self.rgs));
            }
        }
    }
}

/// Exact solve: enumerates every grouping, optimizes each group, and keeps
/// the minimum objective. Ties resolve to the lexicographically smallest
/// restricted growth string, which is the enumeration order.
pub fn solve_exact(mode_set: &ModeSet, costs: &CostParams) -> Result<Solution> {
    solve_exact_threads(mode_set, costs, 1)
}

/// Parallel variant fanning partition evaluations across `threads` workers.
/// The deterministic reduction (objective, then enumeration order) makes
/// parallel and serial runs agree exactly.
pub fn solve_exact_threads(
    mode_set: &ModeSet,
    costs: &CostParams,
    threads: usize,
) -> Result<Solution> {
    costs.validate()?;
    let n = mode_set.len();
    let partitions = enumerate_partitions(n)?;
    if threads <= 1 {
        let mut best: Option<Solution> = None;
        for p in partitions {
            let sol = evaluate_partition(p, mode_set, costs)?;
            let better = match &best {
                None => true,
                Some(b) => sol.objective < b.objective,
            };
            if better {
                best = Some(sol);
            }
        }
        return best.ok_or_else(|| Error::BadParameter("no partitions".into()));
    }

    let all: Vec<Partition> = partitions.collect();
    let chunk = all.len().div_ceil(threads);
    let results: Vec<Result<Option<(usize, Solution)>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = all
            .chunks(chunk)
            .enumerate()
            .map(|(ci, chunk_parts)| {
                scope.spawn(move || -> Result<Option<(usize, Solution)>> {
                    let mut local: Option<(usize, Solution)> = None;
                    for (k, p) in chunk_parts.iter().enumerate() {
                        let idx = ci * chunk + k;
                        let sol = evaluate_partition(p.clone(), mode_set, costs)?;
                        let better = match &local {
                            None => true,
                            Some((bi, b)) => {
                                sol.objective < b.objective
                                    || (sol.objective == b.objective && idx < *bi)
                            }
                        };
                        if better {
                            local = Some((idx, sol));
                        }
                    }
                    Ok(local)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });

    let mut best: Option<(usize, Solution)> = None;
    for r in results {
        if let Some((idx, sol)) = r? {
            let better = match &best {
                None => true,
                Some((bi, b)) => {
                    sol.objective < b.objective || (sol.objective == b.objective && idx < *bi)
                }
            };
            if better {
                best = Some((idx, sol));
            }
        }
    }
    best.map(|(_, s)| s)
        .ok_or_else(|| Error::BadParameter("no partitions".into()))
}
